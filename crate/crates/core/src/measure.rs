//! Finite measurable spaces, information states, mixtures and pushforwards.
//!
//! Every space is a finite ordered set of labelled atoms and the
//! sigma-algebra is implicitly its full power set, so events are plain
//! atom subsets and every integral is a finite sum.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default tolerance for weight normalization and probability comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A finite measurable space: an ordered list of distinct atom labels.
///
/// A product space remembers its two factors so that marginals of joint
/// kernels can be taken without guessing the label structure.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteSpace {
    atoms: Vec<String>,
    #[serde(skip)]
    factors: Option<Box<(FiniteSpace, FiniteSpace)>>,
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        // Two spaces are the same measurable space iff their atom lists agree;
        // product metadata is bookkeeping only.
        self.atoms == other.atoms
    }
}

impl fmt::Display for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.atoms.join(","))
    }
}

impl FiniteSpace {
    pub fn new<S: Into<String>>(atoms: impl IntoIterator<Item = S>) -> Result<Self> {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.is_empty() {
            return Err(Error::Invalid("a space needs at least one atom".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].contains(a) {
                return Err(Error::Invalid(format!("duplicate atom label `{a}`")));
            }
        }
        Ok(Self { atoms, factors: None })
    }

    /// The product space with atoms `a|b`, remembering both factors.
    pub fn product(left: &FiniteSpace, right: &FiniteSpace) -> Self {
        let mut atoms = Vec::with_capacity(left.len() * right.len());
        for a in &left.atoms {
            for b in &right.atoms {
                atoms.push(format!("{a}|{b}"));
            }
        }
        Self {
            atoms,
            factors: Some(Box::new((left.clone(), right.clone()))),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn factors(&self) -> Option<(&FiniteSpace, &FiniteSpace)> {
        self.factors.as_deref().map(|(l, r)| (l, r))
    }

    pub fn index_of(&self, atom: &str) -> Result<usize> {
        self.atoms
            .iter()
            .position(|a| a == atom)
            .ok_or_else(|| Error::UnknownAtom {
                atom: atom.to_string(),
                space: self.to_string(),
            })
    }

    /// Resolve an event given as atom labels into sorted distinct indices.
    pub fn event_indices<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            idx.push(self.index_of(l.as_ref())?);
        }
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }
}

/// A total measurable function between two finite spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurableMap {
    source: FiniteSpace,
    target: FiniteSpace,
    /// `assignment[i]` is the target atom index of source atom `i`.
    assignment: Vec<usize>,
}

impl MeasurableMap {
    pub fn new(
        source: FiniteSpace,
        target: FiniteSpace,
        assign: impl Fn(&str) -> String,
    ) -> Result<Self> {
        let assignment = source
            .atoms()
            .iter()
            .map(|a| target.index_of(&assign(a)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { source, target, assignment })
    }

    /// Build from explicit (source atom, target atom) pairs; every source
    /// atom must be assigned exactly once.
    pub fn from_pairs<S: AsRef<str>>(
        source: FiniteSpace,
        target: FiniteSpace,
        pairs: &[(S, S)],
    ) -> Result<Self> {
        let mut assignment = vec![usize::MAX; source.len()];
        for (from, to) in pairs {
            let i = source.index_of(from.as_ref())?;
            assignment[i] = target.index_of(to.as_ref())?;
        }
        if let Some(i) = assignment.iter().position(|&t| t == usize::MAX) {
            return Err(Error::Invalid(format!(
                "atom `{}` has no assignment",
                source.atoms()[i]
            )));
        }
        Ok(Self { source, target, assignment })
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        Self {
            source: space.clone(),
            target: space.clone(),
            assignment: (0..space.len()).collect(),
        }
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn apply_index(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn apply(&self, atom: &str) -> Result<&str> {
        let i = self.source.index_of(atom)?;
        Ok(&self.target.atoms()[self.assignment[i]])
    }
}

/// The canonical normalized representative of an equivalence class of
/// finite positive measures on a space.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationState {
    space: FiniteSpace,
    weights: Vec<f64>,
}

impl InformationState {
    /// Normalize raw non-negative weights to total mass one.
    pub fn normalize(space: &FiniteSpace, raw: &[f64]) -> Result<Self> {
        Self::normalize_with_tol(space, raw, DEFAULT_TOL)
    }

    pub fn normalize_with_tol(space: &FiniteSpace, raw: &[f64], tol: f64) -> Result<Self> {
        if raw.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: raw.len(),
            });
        }
        for (a, &w) in space.atoms().iter().zip(raw) {
            if w < -tol {
                return Err(Error::NegativeWeight {
                    atom: a.clone(),
                    weight: w,
                });
            }
        }
        let sum: f64 = raw.iter().sum();
        if sum <= tol {
            return Err(Error::ZeroMeasure { sum });
        }
        let weights = raw.iter().map(|w| w.max(0.0) / sum).collect();
        Ok(Self {
            space: space.clone(),
            weights,
        })
    }

    /// The Dirac (pure) state concentrated at one atom.
    pub fn dirac(space: &FiniteSpace, atom: &str) -> Result<Self> {
        let i = space.index_of(atom)?;
        let mut weights = vec![0.0; space.len()];
        weights[i] = 1.0;
        Ok(Self {
            space: space.clone(),
            weights,
        })
    }

    pub fn uniform(space: &FiniteSpace) -> Self {
        let n = space.len();
        Self {
            space: space.clone(),
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Convex combination of states on a shared space.
    pub fn mix(states: &[InformationState], coefficients: &[f64]) -> Result<Self> {
        Self::mix_with_tol(states, coefficients, DEFAULT_TOL)
    }

    pub fn mix_with_tol(
        states: &[InformationState],
        coefficients: &[f64],
        tol: f64,
    ) -> Result<Self> {
        if states.is_empty() || states.len() != coefficients.len() {
            return Err(Error::BadCoefficients(format!(
                "{} states vs {} coefficients",
                states.len(),
                coefficients.len()
            )));
        }
        if let Some(&c) = coefficients.iter().find(|&&c| c < -tol) {
            return Err(Error::BadCoefficients(format!("negative coefficient {c}")));
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::BadCoefficients(format!("coefficients sum to {total}")));
        }
        let space = &states[0].space;
        for s in &states[1..] {
            if s.space != *space {
                return Err(Error::SpaceMismatch {
                    expected: space.to_string(),
                    got: s.space.to_string(),
                });
            }
        }
        let mut weights = vec![0.0; space.len()];
        for (s, &c) in states.iter().zip(coefficients) {
            for (w, &sw) in weights.iter_mut().zip(&s.weights) {
                *w += c.max(0.0) * sw;
            }
        }
        // Renormalize away accumulation error.
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self {
            space: space.clone(),
            weights,
        })
    }

    /// The image state under a measurable map: mass of each target atom is
    /// the total mass of its preimage.
    pub fn pushforward(&self, map: &MeasurableMap) -> Result<Self> {
        if *map.source() != self.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                got: map.source().to_string(),
            });
        }
        let mut weights = vec![0.0; map.target().len()];
        for (i, &w) in self.weights.iter().enumerate() {
            weights[map.apply_index(i)] += w;
        }
        Ok(Self {
            space: map.target().clone(),
            weights,
        })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_of(&self, atom: &str) -> Result<f64> {
        Ok(self.weights[self.space.index_of(atom)?])
    }

    /// Probability of an event given by atom indices.
    pub fn event_mass(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.weights[i]).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.weights.iter().any(|&w| (w - 1.0).abs() <= tol)
    }
}

/// Total-variation distance between two states on the same space.
pub fn total_variation(s1: &InformationState, s2: &InformationState) -> Result<f64> {
    if s1.space != s2.space {
        return Err(Error::SpaceMismatch {
            expected: s1.space.to_string(),
            got: s2.space.to_string(),
        });
    }
    Ok(tv_from_weights(&s1.weights, &s2.weights))
}

pub(crate) fn tv_from_weights(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// An unnormalized positive measure with total mass in [0, 1], as produced
/// by an information state instrument before conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct SubMeasure {
    space: FiniteSpace,
    weights: Vec<f64>,
    total: f64,
}

impl SubMeasure {
    pub(crate) fn from_weights(space: FiniteSpace, weights: Vec<f64>) -> Self {
        let total = weights.iter().sum();
        Self { space, weights, total }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Condition on the total mass, yielding a normalized state.
    pub fn condition(&self, tol: f64) -> Result<InformationState> {
        if self.total <= tol {
            return Err(Error::ZeroProbabilityEvent {
                event: self.space.to_string(),
                prob: self.total,
            });
        }
        InformationState::normalize_with_tol(&self.space, &self.weights, tol)
    }
}
