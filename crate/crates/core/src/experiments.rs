//! Extended generalized observables over compound outcomes, conditional
//! posterior states (reduction), information state instruments,
//! non-perturbing and beable structure, and mean-state machinery.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measure::{FiniteSpace, InformationState, MeasurableMap, SubMeasure, DEFAULT_TOL};
use crate::observables::{outcome_law, Kernel, OutcomeLaw};

/// An extended generalized observable: a row-stochastic kernel from an
/// input space to the compound outcome space `Omega x Theta_out`, the
/// source of instruments and posterior states.
///
/// Columns are indexed as `omega_idx * n_out + theta_out_idx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedKernel {
    input: FiniteSpace,
    outcome: FiniteSpace,
    output: FiniteSpace,
    rows: Vec<Vec<f64>>,
}

impl ExtendedKernel {
    pub fn new(
        input: FiniteSpace,
        outcome: FiniteSpace,
        output: FiniteSpace,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_tol(input, outcome, output, rows, DEFAULT_TOL)
    }

    pub fn with_tol(
        input: FiniteSpace,
        outcome: FiniteSpace,
        output: FiniteSpace,
        rows: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<Self> {
        let compound = FiniteSpace::product(&outcome, &output);
        let kernel = Kernel::with_tol(input, compound, rows, tol)?;
        Ok(Self {
            input: kernel.input().clone(),
            outcome,
            output,
            rows: kernel.rows().to_vec(),
        })
    }

    pub fn input(&self) -> &FiniteSpace {
        &self.input
    }

    pub fn outcome(&self) -> &FiniteSpace {
        &self.outcome
    }

    pub fn output(&self) -> &FiniteSpace {
        &self.output
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn entry(&self, theta_in: usize, omega: usize, theta_out: usize) -> f64 {
        self.rows[theta_in][omega * self.output.len() + theta_out]
    }

    /// View as a plain kernel on the declared product outcome space.
    pub fn as_kernel(&self) -> Kernel {
        let compound = FiniteSpace::product(&self.outcome, &self.output);
        Kernel::new(self.input.clone(), compound, self.rows.clone())
            .expect("rows validated at construction")
    }

    fn check_state(&self, state: &InformationState) -> Result<()> {
        if state.space() != &self.input {
            return Err(Error::SpaceMismatch {
                expected: self.input.to_string(),
                got: state.space().to_string(),
            });
        }
        Ok(())
    }
}

/// The marginal observable of recorded outcomes: `M(B) = Upsilon(B x Theta_out)`.
pub fn outcome_marginal(ext: &ExtendedKernel) -> Kernel {
    let n_out = ext.output.len();
    let rows = ext
        .rows
        .iter()
        .map(|row| {
            (0..ext.outcome.len())
                .map(|omega| row[omega * n_out..(omega + 1) * n_out].iter().sum())
                .collect()
        })
        .collect();
    Kernel::new(ext.input.clone(), ext.outcome.clone(), rows)
        .expect("marginal of stochastic rows is stochastic")
}

/// The marginal observable of posterior system outcomes:
/// `S(F) = Upsilon(Omega x F)`.
pub fn system_marginal(ext: &ExtendedKernel) -> Kernel {
    let n_out = ext.output.len();
    let rows = ext
        .rows
        .iter()
        .map(|row| {
            let mut r = vec![0.0; n_out];
            for (col, &p) in row.iter().enumerate() {
                r[col % n_out] += p;
            }
            r
        })
        .collect();
    Kernel::new(ext.input.clone(), ext.output.clone(), rows)
        .expect("marginal of stochastic rows is stochastic")
}

/// The instrument value: the unnormalized posterior measure on the output
/// space conditioned on recording an outcome in the event.
pub fn instrument_value(
    ext: &ExtendedKernel,
    state: &InformationState,
    event: &[usize],
) -> Result<SubMeasure> {
    ext.check_state(state)?;
    let n_out = ext.output.len();
    let mut weights = vec![0.0; n_out];
    for (row, &w) in ext.rows.iter().zip(state.weights()) {
        for &omega in event {
            for (m, &p) in weights.iter_mut().zip(&row[omega * n_out..(omega + 1) * n_out]) {
                *m += w * p;
            }
        }
    }
    Ok(SubMeasure::from_weights(ext.output.clone(), weights))
}

/// The conditional posterior state given that the recorded outcome fell in
/// the event; errors on events of vanishing probability.
pub fn posterior(
    ext: &ExtendedKernel,
    state: &InformationState,
    event: &[usize],
) -> Result<InformationState> {
    posterior_with_tol(ext, state, event, DEFAULT_TOL)
}

pub fn posterior_with_tol(
    ext: &ExtendedKernel,
    state: &InformationState,
    event: &[usize],
    tol: f64,
) -> Result<InformationState> {
    let sub = instrument_value(ext, state, event)?;
    sub.condition(tol).map_err(|e| match e {
        Error::ZeroProbabilityEvent { prob, .. } => Error::ZeroProbabilityEvent {
            event: event
                .iter()
                .map(|&i| ext.outcome.atoms()[i].as_str())
                .collect::<Vec<_>>()
                .join(","),
            prob,
        },
        other => other,
    })
}

/// The deterministic extended observable of a pair of maps: mass one at
/// `(phi(theta), g(theta))` for each input atom.
pub fn extended_from_maps(phi: &MeasurableMap, g: &MeasurableMap) -> Result<ExtendedKernel> {
    if phi.source() != g.source() {
        return Err(Error::SpaceMismatch {
            expected: phi.source().to_string(),
            got: g.source().to_string(),
        });
    }
    let (n_omega, n_out) = (phi.target().len(), g.target().len());
    let rows = (0..phi.source().len())
        .map(|i| {
            let mut r = vec![0.0; n_omega * n_out];
            r[phi.apply_index(i) * n_out + g.apply_index(i)] = 1.0;
            r
        })
        .collect();
    ExtendedKernel::new(
        phi.source().clone(),
        phi.target().clone(),
        g.target().clone(),
        rows,
    )
}

/// A beable extended observable: identical to `extended_from_maps`, named
/// for the non-perturbing errorless-measurement reading.
pub fn beable_extended(phi: &MeasurableMap, phi_out: &MeasurableMap) -> Result<ExtendedKernel> {
    extended_from_maps(phi, phi_out)
}

/// The non-perturbing extended observable in the identity chart: an outcome
/// kernel times a deterministic output map.
pub fn factorized_extended(m: &Kernel, phi_out: &MeasurableMap) -> Result<ExtendedKernel> {
    if m.input() != phi_out.source() {
        return Err(Error::SpaceMismatch {
            expected: m.input().to_string(),
            got: phi_out.source().to_string(),
        });
    }
    let (n_omega, n_out) = (m.outcome().len(), phi_out.target().len());
    let rows = m
        .rows()
        .iter()
        .enumerate()
        .map(|(theta, mrow)| {
            let mut r = vec![0.0; n_omega * n_out];
            let out = phi_out.apply_index(theta);
            for (omega, &p) in mrow.iter().enumerate() {
                r[omega * n_out + out] = p;
            }
            r
        })
        .collect();
    ExtendedKernel::new(
        m.input().clone(),
        m.outcome().clone(),
        phi_out.target().clone(),
        rows,
    )
}

/// Verify that an extended observable is non-perturbing in the given chart:
/// its preimage through `phi_in` must factorize into a row-stochastic
/// outcome kernel times the indicator of `phi_out`. Returns the factor
/// kernel when the factorization holds.
pub fn check_nonperturbing(
    ext: &ExtendedKernel,
    preimage_space: &FiniteSpace,
    phi_in: &MeasurableMap,
    phi_out: &MeasurableMap,
    tol: f64,
) -> Result<Option<Kernel>> {
    if phi_in.source() != preimage_space || phi_out.source() != preimage_space {
        return Err(Error::SpaceMismatch {
            expected: preimage_space.to_string(),
            got: format!("{} / {}", phi_in.source(), phi_out.source()),
        });
    }
    if phi_in.target() != &ext.input {
        return Err(Error::SpaceMismatch {
            expected: ext.input.to_string(),
            got: phi_in.target().to_string(),
        });
    }
    if phi_out.target() != &ext.output {
        return Err(Error::SpaceMismatch {
            expected: ext.output.to_string(),
            got: phi_out.target().to_string(),
        });
    }
    let n_out = ext.output.len();
    let mut factor_rows = Vec::with_capacity(preimage_space.len());
    for theta in 0..preimage_space.len() {
        let row = &ext.rows[phi_in.apply_index(theta)];
        let out = phi_out.apply_index(theta);
        let mut m_row = Vec::with_capacity(ext.outcome.len());
        for omega in 0..ext.outcome.len() {
            for theta_out in 0..n_out {
                let p = row[omega * n_out + theta_out];
                if theta_out != out && p.abs() > tol {
                    return Ok(None);
                }
            }
            m_row.push(row[omega * n_out + out]);
        }
        factor_rows.push(m_row);
    }
    let factor = Kernel::with_tol(
        preimage_space.clone(),
        ext.outcome.clone(),
        factor_rows,
        tol.max(DEFAULT_TOL),
    );
    Ok(factor.ok())
}

/// A linear embedding of a space's atoms into real coordinates; the mean
/// of a state is the weight-averaged coordinate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    space: FiniteSpace,
    dimension: usize,
    vectors: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn new(space: FiniteSpace, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: vectors.len(),
            });
        }
        let dimension = vectors.first().map_or(0, Vec::len);
        if dimension == 0 || vectors.iter().any(|v| v.len() != dimension) {
            return Err(Error::Invalid(
                "embedding vectors must share one positive dimension".into(),
            ));
        }
        Ok(Self {
            space,
            dimension,
            vectors,
        })
    }

    /// The simplex-coordinate embedding: atom `i` maps to the standard
    /// basis vector `e_i`, so means coincide with weight vectors.
    pub fn simplex(space: &FiniteSpace) -> Self {
        let n = space.len();
        let vectors = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        Self {
            space: space.clone(),
            dimension: n,
            vectors,
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Basis of directions `u` with zero embedded mean and zero total mass,
    /// i.e. perturbations invisible to the mean state.
    fn mean_null_basis(&self) -> Vec<Vec<f64>> {
        let n = self.space.len();
        let mut rows = Vec::with_capacity(self.dimension + 1);
        for d in 0..self.dimension {
            rows.push((0..n).map(|i| self.vectors[i][d]).collect::<Vec<f64>>());
        }
        rows.push(vec![1.0; n]);
        let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
        // Null space of A via the spectral decomposition of A^T A.
        let gram = a.transpose() * &a;
        let eig = gram.symmetric_eigen();
        let mut basis = Vec::new();
        for (i, &ev) in eig.eigenvalues.iter().enumerate() {
            if ev.abs() < 1e-12 {
                basis.push(eig.eigenvectors.column(i).iter().copied().collect());
            }
        }
        basis
    }
}

/// The mean of a state under an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanState {
    space: FiniteSpace,
    coordinates: Vec<f64>,
}

impl MeanState {
    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }
}

pub fn mean_state(state: &InformationState, emb: &Embedding) -> Result<MeanState> {
    if state.space() != &emb.space {
        return Err(Error::SpaceMismatch {
            expected: emb.space.to_string(),
            got: state.space().to_string(),
        });
    }
    let mut coordinates = vec![0.0; emb.dimension];
    for (v, &w) in emb.vectors.iter().zip(state.weights()) {
        for (c, &x) in coordinates.iter_mut().zip(v) {
            *c += w * x;
        }
    }
    Ok(MeanState {
        space: emb.space.clone(),
        coordinates,
    })
}

/// The mean of the conditional posterior state under an output embedding.
pub fn posterior_mean(
    ext: &ExtendedKernel,
    state: &InformationState,
    event: &[usize],
    emb_out: &Embedding,
) -> Result<MeanState> {
    let post = posterior(ext, state, event)?;
    mean_state(&post, emb_out)
}

/// The target of a mean-determination check: either a plain outcome kernel
/// or an extended observable (whose joint law determines every instrument
/// value).
#[derive(Debug, Clone, Copy)]
pub enum MeanLaw<'a> {
    Kernel(&'a Kernel),
    Extended(&'a ExtendedKernel),
}

/// Check whether the law of the target depends only on the mean state
/// under the embedding: samples same-mean state pairs along the embedding's
/// null directions and compares laws. Vacuously true when the embedding is
/// injective on distributions.
pub fn is_mean_determined(
    target: MeanLaw<'_>,
    emb: &Embedding,
    trials: usize,
    tol: f64,
) -> Result<bool> {
    let input = match target {
        MeanLaw::Kernel(k) => k.input(),
        MeanLaw::Extended(e) => e.input(),
    };
    if input != &emb.space {
        return Err(Error::SpaceMismatch {
            expected: input.to_string(),
            got: emb.space.to_string(),
        });
    }
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let basis = emb.mean_null_basis();
    if basis.is_empty() {
        return Ok(true);
    }
    let joint;
    let kernel: &Kernel = match target {
        MeanLaw::Kernel(k) => k,
        MeanLaw::Extended(e) => {
            joint = e.as_kernel();
            &joint
        }
    };
    let base = InformationState::uniform(&emb.space);
    let mut rng = crate::rng::CounterRng::new(0x6d65616e, 0);
    for _ in 0..trials {
        let mut u = vec![0.0; emb.space.len()];
        for b in &basis {
            let c = 2.0 * rng.next_f64() - 1.0;
            for (ui, &bi) in u.iter_mut().zip(b) {
                *ui += c * bi;
            }
        }
        let max_abs = u.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if max_abs < 1e-14 {
            continue;
        }
        // Scale so the perturbed weights stay inside the simplex.
        let eps = 0.9 / (emb.space.len() as f64 * max_abs);
        let perturbed: Vec<f64> = base
            .weights()
            .iter()
            .zip(&u)
            .map(|(&w, &ui)| w + eps * ui)
            .collect();
        let other = InformationState::normalize(&emb.space, &perturbed)?;
        let l1 = outcome_law(kernel, &base)?;
        let l2 = outcome_law(kernel, &other)?;
        let diff = l1
            .probabilities()
            .iter()
            .zip(l2.probabilities())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if diff > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome law of the outcome marginal, `mu(B; pi)` restricted to events.
pub fn outcome_event_probability(
    ext: &ExtendedKernel,
    state: &InformationState,
    event: &[usize],
) -> Result<f64> {
    let law: OutcomeLaw = outcome_law(&outcome_marginal(ext), state)?;
    Ok(law.prob_of_event(event))
}
