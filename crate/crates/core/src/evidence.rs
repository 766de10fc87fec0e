//! Frames of discernment, belief distributions and the evidential reasoning
//! (ER) combination rule.
//!
//! A piece of [`Evidence`] is a [`BeliefDistribution`] together with a weight
//! and a reliability. Combination works on [`ExtendedMass`] values: the
//! weighted masses `w * p(A)` for every focal set `A` plus a separate residual
//! `1 - r` that sits outside the frame. The residual intersects every
//! proposition as that proposition, so it carries unreliable support forward
//! through the fold and is dropped when the result is finally normalised.
//!
//! The per-evidence factor `1 / (1 + w - r)` of the full ER rule scales every
//! entry of one evidence uniformly and therefore cancels in the final
//! normalisation; it is never applied here. Results are identical for `w != r`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

/// Largest supported frame; subsets are stored as `u16` bitmasks.
pub const MAX_HYPOTHESES: usize = 16;

/// Tolerance on `sum(masses) == 1` for a belief distribution.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Ordered, mutually exclusive and exhaustive set of hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Frame {
    labels: Vec<String>,
}

impl Frame {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 || labels.len() > MAX_HYPOTHESES {
            return Err(Error::FrameSize(labels.len()));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(Error::EmptyLabel);
            }
            if labels[..i]
                .iter()
                .any(|l| l.trim().eq_ignore_ascii_case(label.trim()))
            {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Frame { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    /// Index of a hypothesis, matched after trimming and ignoring ASCII case.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        let label = label.trim();
        self.labels
            .iter()
            .position(|l| l.trim().eq_ignore_ascii_case(label))
    }

    /// The whole frame as a subset.
    pub fn full(&self) -> Subset {
        Subset(((1u32 << self.len()) - 1) as u16)
    }

    fn contains(&self, subset: Subset) -> bool {
        subset.0 & !self.full().0 == 0
    }

    fn describe(&self, subset: Subset) -> Vec<String> {
        subset.members().map(|i| self.labels[i].clone()).collect()
    }

    fn subset_of(&self, members: &[String]) -> Result<Subset> {
        let mut mask = 0u16;
        for m in members {
            let i = self
                .index_of(m)
                .ok_or_else(|| Error::UnknownOutcome(m.clone()))?;
            mask |= 1 << i;
        }
        Subset::new(mask).ok_or_else(|| Error::InvalidDistribution("empty focal set".into()))
    }
}

impl TryFrom<Vec<String>> for Frame {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        Frame::new(labels)
    }
}

impl From<Frame> for Vec<String> {
    fn from(frame: Frame) -> Self {
        frame.labels
    }
}

/// Non-empty subset of a frame, as a bitmask over hypothesis indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(u16);

impl Subset {
    /// `None` for the empty set, which can never be focal.
    pub fn new(mask: u16) -> Option<Self> {
        (mask != 0).then_some(Subset(mask))
    }

    pub fn singleton(index: usize) -> Self {
        assert!(
            index < MAX_HYPOTHESES,
            "hypothesis index {index} out of range"
        );
        Subset(1 << index)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn is_singleton(self) -> bool {
        self.0.is_power_of_two()
    }

    pub fn intersect(self, other: Subset) -> Option<Subset> {
        Subset::new(self.0 & other.0)
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..MAX_HYPOTHESES).filter(move |i| self.0 & (1 << i) != 0)
    }
}

/// Element of the extended power set: an in-frame subset, or the residual
/// that holds undistributed (unreliable) support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proposition {
    Set(Subset),
    Residual,
}

impl Proposition {
    /// Conjunction. The residual is neutral; disjoint subsets give `None`.
    pub fn intersect(self, other: Proposition) -> Option<Proposition> {
        match (self, other) {
            (Proposition::Residual, p) | (p, Proposition::Residual) => Some(p),
            (Proposition::Set(a), Proposition::Set(b)) => a.intersect(b).map(Proposition::Set),
        }
    }
}

/// Basic probability assignment over the non-empty subsets of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefDistribution {
    frame: Frame,
    masses: BTreeMap<Subset, f64>,
}

impl BeliefDistribution {
    pub fn new<I>(frame: Frame, masses: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        let mut map = BTreeMap::new();
        for (subset, mass) in masses {
            if !frame.contains(subset) {
                return Err(Error::InvalidDistribution(format!(
                    "subset {:#b} lies outside a frame of {} hypotheses",
                    subset.0,
                    frame.len()
                )));
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative or non-finite mass {mass}"
                )));
            }
            if mass > 0.0 {
                *map.entry(subset).or_insert(0.0) += mass;
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(BeliefDistribution { frame, masses: map })
    }

    /// Distribution with mass only on singletons, in frame order.
    pub fn from_singletons(frame: Frame, masses: &[f64]) -> Result<Self> {
        if masses.len() != frame.len() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} singleton masses, got {}",
                frame.len(),
                masses.len()
            )));
        }
        let pairs: Vec<_> = masses
            .iter()
            .enumerate()
            .map(|(i, &m)| (Subset::singleton(i), m))
            .collect();
        Self::new(frame, pairs)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn mass(&self, subset: Subset) -> f64 {
        self.masses.get(&subset).copied().unwrap_or(0.0)
    }

    /// Focal elements (strictly positive mass) in bitmask order.
    pub fn focal(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.masses.iter().map(|(&s, &m)| (s, m))
    }

    /// Mass on each singleton hypothesis, in frame order.
    pub fn singletons(&self) -> Vec<f64> {
        (0..self.frame.len())
            .map(|i| self.mass(Subset::singleton(i)))
            .collect()
    }

    pub fn is_bayesian(&self) -> bool {
        self.masses.keys().all(|s| s.is_singleton())
    }
}

impl fmt::Display for BeliefDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (subset, mass)) in self.masses.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(
                f,
                "({}, {:.4})",
                self.frame.describe(*subset).join("|"),
                mass
            )?;
        }
        f.write_str("}")
    }
}

#[derive(Serialize, Deserialize)]
struct FocalRepr {
    set: Vec<String>,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    frame: Frame,
    masses: Vec<FocalRepr>,
}

impl Serialize for BeliefDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DistributionRepr {
            frame: self.frame.clone(),
            masses: self
                .focal()
                .map(|(s, mass)| FocalRepr {
                    set: self.frame.describe(s),
                    mass,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BeliefDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(deserializer)?;
        let pairs = repr
            .masses
            .iter()
            .map(|f| Ok((repr.frame.subset_of(&f.set)?, f.mass)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        BeliefDistribution::new(repr.frame, pairs).map_err(serde::de::Error::custom)
    }
}

/// A belief distribution with the weight and reliability of its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    bd: BeliefDistribution,
    weight: f64,
    reliability: f64,
}

impl Evidence {
    pub fn new(bd: BeliefDistribution, weight: f64, reliability: f64) -> Result<Self> {
        Ok(Evidence {
            bd,
            weight: check_unit("weight", weight)?,
            reliability: check_unit("reliability", reliability)?,
        })
    }

    /// Fully weighted, fully reliable evidence.
    pub fn certain(bd: BeliefDistribution) -> Self {
        Evidence {
            bd,
            weight: 1.0,
            reliability: 1.0,
        }
    }

    pub fn bd(&self) -> &BeliefDistribution {
        &self.bd
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn reliability(&self) -> f64 {
        self.reliability
    }
}

/// Unnormalised masses on in-frame subsets plus the out-of-frame residual.
///
/// All-zero values arise only as the result of total conflict.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMass {
    frame: Frame,
    masses: BTreeMap<Subset, f64>,
    residual: f64,
}

impl ExtendedMass {
    pub fn new<I>(frame: Frame, masses: I, residual: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        if !residual.is_finite() || residual < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "negative residual {residual}"
            )));
        }
        let mut map = BTreeMap::new();
        for (subset, mass) in masses {
            if !frame.contains(subset) || !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "bad extended mass entry {:#b} -> {mass}",
                    subset.0
                )));
            }
            if mass > 0.0 {
                *map.entry(subset).or_insert(0.0) += mass;
            }
        }
        Ok(ExtendedMass {
            frame,
            masses: map,
            residual,
        })
    }

    /// Evidence that supports nothing: all mass on the residual.
    pub fn vacuous(frame: Frame) -> Self {
        ExtendedMass {
            frame,
            masses: BTreeMap::new(),
            residual: 1.0,
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn mass(&self, proposition: Proposition) -> f64 {
        match proposition {
            Proposition::Residual => self.residual,
            Proposition::Set(s) => self.masses.get(&s).copied().unwrap_or(0.0),
        }
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn in_frame(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.masses.iter().map(|(&s, &m)| (s, m))
    }

    pub fn in_frame_total(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Every in-frame entry is zero; normalisation is undefined.
    pub fn is_total_conflict(&self) -> bool {
        self.in_frame_total() <= 0.0
    }

    fn entries(&self) -> impl Iterator<Item = (Proposition, f64)> + '_ {
        self.masses
            .iter()
            .map(|(&s, &m)| (Proposition::Set(s), m))
            .chain((self.residual > 0.0).then_some((Proposition::Residual, self.residual)))
    }
}

/// Weighted masses `w * p(A)` with residual `1 - r`.
pub fn discount(e: &Evidence) -> ExtendedMass {
    ExtendedMass {
        frame: e.bd.frame.clone(),
        masses: e
            .bd
            .focal()
            .map(|(s, p)| (s, e.weight * p))
            .filter(|&(_, m)| m > 0.0)
            .collect(),
        residual: 1.0 - e.reliability,
    }
}

/// Unnormalised conjunctive combination with the residual as neutral element.
///
/// Products landing on the empty set are discarded.
pub fn orthogonal_sum(a: &ExtendedMass, b: &ExtendedMass) -> Result<ExtendedMass> {
    if a.frame != b.frame {
        return Err(Error::FrameMismatch);
    }
    let mut masses: BTreeMap<Subset, f64> = BTreeMap::new();
    let mut residual = 0.0;
    for (pa, ma) in a.entries() {
        for (pb, mb) in b.entries() {
            match pa.intersect(pb) {
                Some(Proposition::Residual) => residual += ma * mb,
                Some(Proposition::Set(s)) => *masses.entry(s).or_insert(0.0) += ma * mb,
                None => {}
            }
        }
    }
    masses.retain(|_, m| *m > 0.0);
    Ok(ExtendedMass {
        frame: a.frame.clone(),
        masses,
        residual,
    })
}

/// Rescale in-frame masses to sum to one; the residual is excluded.
pub fn normalize(m: &ExtendedMass) -> Result<BeliefDistribution> {
    let total = m.in_frame_total();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::CompleteConflict);
    }
    Ok(BeliefDistribution {
        frame: m.frame.clone(),
        masses: m.in_frame().map(|(s, v)| (s, v / total)).collect(),
    })
}

/// Fold the evidence without normalising. Zero-weight items are skipped.
pub fn fold(evidence: &[Evidence]) -> Result<ExtendedMass> {
    let mut effective = evidence.iter().filter(|e| e.weight > 0.0);
    let first = effective.next().ok_or_else(|| {
        Error::NoEffectiveEvidence("every piece of evidence has zero weight".into())
    })?;
    let mut acc = discount(first);
    for e in effective {
        acc = orthogonal_sum(&acc, &discount(e))?;
    }
    Ok(acc)
}

/// Combine evidence with the ER rule. Order of the input does not matter.
pub fn combine(evidence: &[Evidence]) -> Result<BeliefDistribution> {
    normalize(&fold(evidence)?)
}

/// Prior distribution confined to singleton hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorEvidence(BeliefDistribution);

impl PriorEvidence {
    pub fn new(bd: BeliefDistribution) -> Result<Self> {
        if !bd.is_bayesian() {
            return Err(Error::InvalidDistribution(
                "a prior may only assign mass to singletons".into(),
            ));
        }
        Ok(PriorEvidence(bd))
    }

    pub fn uniform(frame: Frame) -> Self {
        let n = frame.len();
        let masses = vec![1.0 / n as f64; n];
        PriorEvidence(BeliefDistribution::from_singletons(frame, &masses).expect("uniform prior"))
    }

    pub fn bd(&self) -> &BeliefDistribution {
        &self.0
    }
}

/// Bayesian posterior `p(h_i) ∝ prior(h_i) * prod_j c_j(h_i)`.
///
/// Each likelihood column holds one entry per hypothesis in frame order.
pub fn bayes_posterior(
    prior: &PriorEvidence,
    likelihood_columns: &[Vec<f64>],
) -> Result<BeliefDistribution> {
    let frame = prior.0.frame.clone();
    let mut posterior = prior.0.singletons();
    for column in likelihood_columns {
        if column.len() != frame.len() {
            return Err(Error::InvalidInput(format!(
                "likelihood column has {} entries for {} hypotheses",
                column.len(),
                frame.len()
            )));
        }
        if column.iter().any(|c| !c.is_finite() || *c < 0.0) || column.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidInput(format!(
                "invalid likelihood column {column:?}"
            )));
        }
        for (p, c) in posterior.iter_mut().zip(column) {
            *p *= c;
        }
    }
    let total: f64 = posterior.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::CompleteConflict);
    }
    posterior.iter_mut().for_each(|p| *p /= total);
    BeliefDistribution::from_singletons(frame, &posterior)
}
