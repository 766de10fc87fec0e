use std::process::ExitCode;

use clap::Parser;
use erselect::cli::{self, Cli, EXIT_VALIDATION};

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match cli::run(&args) {
        Ok(output) => {
            if args.out.is_none() {
                for f in &output.files {
                    println!("==> {} <==", f.name);
                    print!("{}", f.contents);
                }
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let code = cli::exit_code(&err);
            let kind = if code == cli::EXIT_COMPUTATION {
                "computation"
            } else {
                "validation"
            };
            let message = serde_json::json!({ "error": kind, "message": err.to_string() });
            eprintln!("{message}");
            ExitCode::from(code as u8)
        }
    }
}
