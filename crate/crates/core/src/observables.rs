//! Generalized observables as row-stochastic kernels and their algebra:
//! outcome laws, the affine-family constructor, triviality and
//! deterministic-set-up predicates, products, marginals, convolution,
//! preimages and functional subordination.

use crate::error::{Error, Result};
use crate::measure::{FiniteSpace, InformationState, MeasurableMap, DEFAULT_TOL};

/// A generalized observable: a row-stochastic matrix from an input space
/// to an outcome space. `row(theta)[lambda]` is the probability that the
/// experiment records `lambda` when the system atom is `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    input: FiniteSpace,
    outcome: FiniteSpace,
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    pub fn new(input: FiniteSpace, outcome: FiniteSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tol(input, outcome, rows, DEFAULT_TOL)
    }

    pub fn with_tol(
        input: FiniteSpace,
        outcome: FiniteSpace,
        rows: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::DimensionMismatch {
                expected: input.len(),
                got: rows.len(),
            });
        }
        for (theta, row) in input.atoms().iter().zip(&rows) {
            if row.len() != outcome.len() {
                return Err(Error::DimensionMismatch {
                    expected: outcome.len(),
                    got: row.len(),
                });
            }
            for &p in row {
                if !(-tol..=1.0 + tol).contains(&p) {
                    return Err(Error::Invalid(format!(
                        "kernel entry {p} at row `{theta}` outside [0,1]"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::Invalid(format!(
                    "kernel row `{theta}` sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self { input, outcome, rows })
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        let n = space.len();
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                r
            })
            .collect();
        Self {
            input: space.clone(),
            outcome: space.clone(),
            rows,
        }
    }

    /// The trivial observable: every row equals the witness distribution,
    /// so the outcome law carries no knowledge about the state.
    pub fn trivial(input: &FiniteSpace, witness: &OutcomeLaw) -> Self {
        Self {
            input: input.clone(),
            outcome: witness.outcome.clone(),
            rows: vec![witness.probabilities.clone(); input.len()],
        }
    }

    pub fn input(&self) -> &FiniteSpace {
        &self.input
    }

    pub fn outcome(&self) -> &FiniteSpace {
        &self.outcome
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn entry(&self, theta: usize, lambda: usize) -> f64 {
        self.rows[theta][lambda]
    }

    /// The value of the observable on an event: `Pi(B)(theta)`.
    pub fn event_value(&self, event: &[usize], theta: usize) -> f64 {
        event.iter().map(|&l| self.rows[theta][l]).sum()
    }

    /// Apply the kernel to a state: the induced state on the outcome space.
    pub fn apply(&self, state: &InformationState) -> Result<InformationState> {
        let law = outcome_law(self, state)?;
        Ok(law.into_state())
    }
}

/// A probability law over an outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeLaw {
    outcome: FiniteSpace,
    probabilities: Vec<f64>,
}

impl OutcomeLaw {
    pub fn new(outcome: FiniteSpace, probabilities: Vec<f64>) -> Result<Self> {
        let state = InformationState::normalize(&outcome, &probabilities)?;
        Ok(Self {
            outcome,
            probabilities: state.weights().to_vec(),
        })
    }

    pub fn outcome(&self) -> &FiniteSpace {
        &self.outcome
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob_of_event(&self, event: &[usize]) -> f64 {
        event.iter().map(|&i| self.probabilities[i]).sum()
    }

    pub fn into_state(self) -> InformationState {
        // Probabilities are already normalized.
        InformationState::normalize(&self.outcome, &self.probabilities)
            .expect("law weights are a distribution")
    }

    pub fn from_state(state: &InformationState) -> Self {
        Self {
            outcome: state.space().clone(),
            probabilities: state.weights().to_vec(),
        }
    }
}

/// The outcome probability law of a kernel in a given state:
/// `law(lambda) = sum_theta K[theta][lambda] * pi(theta)`.
pub fn outcome_law(kernel: &Kernel, state: &InformationState) -> Result<OutcomeLaw> {
    if state.space() != kernel.input() {
        return Err(Error::SpaceMismatch {
            expected: kernel.input().to_string(),
            got: state.space().to_string(),
        });
    }
    let mut probabilities = vec![0.0; kernel.outcome().len()];
    for (row, &w) in kernel.rows().iter().zip(state.weights()) {
        for (p, &k) in probabilities.iter_mut().zip(row) {
            *p += w * k;
        }
    }
    Ok(OutcomeLaw {
        outcome: kernel.outcome().clone(),
        probabilities,
    })
}

/// Reconstruct the unique kernel whose outcome law at each Dirac state is
/// the given law: the finite form of the affine-extension theorem.
pub fn from_affine_family(input: &FiniteSpace, dirac_laws: &[OutcomeLaw]) -> Result<Kernel> {
    if dirac_laws.len() != input.len() {
        return Err(Error::DimensionMismatch {
            expected: input.len(),
            got: dirac_laws.len(),
        });
    }
    let outcome = dirac_laws[0].outcome.clone();
    if dirac_laws[1..].iter().any(|l| l.outcome != outcome) {
        return Err(Error::OutcomeSpaceMismatch);
    }
    let rows = dirac_laws.iter().map(|l| l.probabilities.clone()).collect();
    Kernel::new(input.clone(), outcome, rows)
}

/// A kernel is trivial iff all rows coincide; returns the common row as
/// the witness distribution when they do.
pub fn is_trivial(kernel: &Kernel, tol: f64) -> Option<OutcomeLaw> {
    let first = &kernel.rows()[0];
    for row in &kernel.rows()[1..] {
        if row.iter().zip(first).any(|(a, b)| (a - b).abs() > tol) {
            return None;
        }
    }
    Some(OutcomeLaw {
        outcome: kernel.outcome().clone(),
        probabilities: first.clone(),
    })
}

/// A kernel represents an experiment with a deterministic set-up iff every
/// attainable outcome atom has some input atom predicting it with
/// certainty. Checking singleton events suffices at finite scale: for an
/// event of positive mass, any of its attainable atoms supplies the
/// certain input atom.
pub fn is_observable(kernel: &Kernel, tol: f64) -> bool {
    for lambda in 0..kernel.outcome().len() {
        let column_mass: f64 = kernel.rows().iter().map(|r| r[lambda]).sum();
        if column_mass <= tol {
            continue;
        }
        let deterministic = kernel
            .rows()
            .iter()
            .any(|row| (row[lambda] - 1.0).abs() <= tol);
        if !deterministic {
            return false;
        }
    }
    true
}

/// The product observable on the shared input space, with the product
/// outcome space: entries multiply pointwise in the input atom.
pub fn product(k1: &Kernel, k2: &Kernel) -> Result<Kernel> {
    if k1.input() != k2.input() {
        return Err(Error::SpaceMismatch {
            expected: k1.input().to_string(),
            got: k2.input().to_string(),
        });
    }
    let outcome = FiniteSpace::product(k1.outcome(), k2.outcome());
    let rows = k1
        .rows()
        .iter()
        .zip(k2.rows())
        .map(|(r1, r2)| {
            let mut row = Vec::with_capacity(r1.len() * r2.len());
            for &a in r1 {
                for &b in r2 {
                    row.push(a * b);
                }
            }
            row
        })
        .collect();
    Ok(Kernel {
        input: k1.input().clone(),
        outcome,
        rows,
    })
}

/// Marginals of a joint kernel on a declared product outcome space.
pub fn marginals(joint: &Kernel) -> Result<(Kernel, Kernel)> {
    let (left, right) = joint.outcome().factors().ok_or(Error::NotProductSpace)?;
    let (nl, nr) = (left.len(), right.len());
    let mut rows1 = Vec::with_capacity(joint.rows().len());
    let mut rows2 = Vec::with_capacity(joint.rows().len());
    for row in joint.rows() {
        let mut r1 = vec![0.0; nl];
        let mut r2 = vec![0.0; nr];
        for i in 0..nl {
            for j in 0..nr {
                let p = row[i * nr + j];
                r1[i] += p;
                r2[j] += p;
            }
        }
        rows1.push(r1);
        rows2.push(r2);
    }
    Ok((
        Kernel {
            input: joint.input().clone(),
            outcome: left.clone(),
            rows: rows1,
        },
        Kernel {
            input: joint.input().clone(),
            outcome: right.clone(),
            rows: rows2,
        },
    ))
}

/// The convolution of an observable with a system observable whose
/// outcome space is the former's input space; as matrices, `S * Pi`.
pub fn convolve(pi: &Kernel, s: &Kernel) -> Result<Kernel> {
    if pi.input() != s.outcome() {
        return Err(Error::SpaceMismatch {
            expected: pi.input().to_string(),
            got: s.outcome().to_string(),
        });
    }
    let rows = s
        .rows()
        .iter()
        .map(|srow| {
            let mut row = vec![0.0; pi.outcome().len()];
            for (theta, &sw) in srow.iter().enumerate() {
                for (r, &p) in row.iter_mut().zip(&pi.rows()[theta]) {
                    *r += sw * p;
                }
            }
            row
        })
        .collect();
    Ok(Kernel {
        input: s.input().clone(),
        outcome: pi.outcome().clone(),
        rows,
    })
}

/// The preimage of a kernel under a map into its input space: the row at
/// `theta'` is the row at `phi(theta')`.
pub fn preimage(kernel: &Kernel, map: &MeasurableMap) -> Result<Kernel> {
    if map.target() != kernel.input() {
        return Err(Error::SpaceMismatch {
            expected: kernel.input().to_string(),
            got: map.target().to_string(),
        });
    }
    let rows = (0..map.source().len())
        .map(|i| kernel.rows()[map.apply_index(i)].clone())
        .collect();
    Ok(Kernel {
        input: map.source().clone(),
        outcome: kernel.outcome().clone(),
        rows,
    })
}

/// Functional subordination: push the outcome space forward through a map,
/// summing kernel mass over each fibre.
pub fn subordinate(kernel: &Kernel, map: &MeasurableMap) -> Result<Kernel> {
    if map.source() != kernel.outcome() {
        return Err(Error::SpaceMismatch {
            expected: kernel.outcome().to_string(),
            got: map.source().to_string(),
        });
    }
    let rows = kernel
        .rows()
        .iter()
        .map(|row| {
            let mut r = vec![0.0; map.target().len()];
            for (lambda, &p) in row.iter().enumerate() {
                r[map.apply_index(lambda)] += p;
            }
            r
        })
        .collect();
    Ok(Kernel {
        input: kernel.input().clone(),
        outcome: map.target().clone(),
        rows,
    })
}

/// The beable induced by a measurable function: indicator rows, so the
/// outcome law is the image law of the state.
pub fn beable_kernel(map: &MeasurableMap) -> Kernel {
    let rows = (0..map.source().len())
        .map(|i| {
            let mut r = vec![0.0; map.target().len()];
            r[map.apply_index(i)] = 1.0;
            r
        })
        .collect();
    Kernel {
        input: map.source().clone(),
        outcome: map.target().clone(),
        rows,
    }
}

/// The indicator kernel of a map, i.e. the beable viewed as a system
/// observable. Pushforward through the map equals applying this kernel.
pub fn indicator_kernel(map: &MeasurableMap) -> Kernel {
    beable_kernel(map)
}
