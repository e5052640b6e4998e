//! The quantum instantiation: density matrices, POVMs, the Born rule,
//! discretized quantum extended observables, quantum state instruments,
//! Choi-matrix complete-positivity and trace-preservation certificates,
//! and the deterministic-response no-go scan.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::FiniteSpace;
use crate::observables::OutcomeLaw;
use crate::rng::CounterRng;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for Hermiticity / positivity / trace checks on quantum types.
pub const QUANTUM_TOL: f64 = 1e-10;
/// Tolerance for the Choi positivity certificate.
pub const CHOI_TOL: f64 = 1e-9;

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Symmetrize away floating-point skew; reject genuinely non-Hermitian input.
pub fn hermitize(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let adj = m.adjoint();
    let skew = (m - &adj) * Complex64::new(0.5, 0.0);
    if max_abs(&skew) > tol {
        return Err(Error::NumericalInconsistency(format!(
            "matrix is not Hermitian (skew part {:.3e})",
            max_abs(&skew)
        )));
    }
    Ok((m + adj) * Complex64::new(0.5, 0.0))
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Trace distance 0.5 * ||a - b||_1 between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = a - b;
    0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>()
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tol(mat, QUANTUM_TOL)
    }

    pub fn with_tol(mat: CMatrix, tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let mat = hermitize(&mat, tol)?;
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::NumericalInconsistency(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min = min_eigenvalue(&mat);
        if min < -tol {
            return Err(Error::NumericalInconsistency(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// A rank-one projector stored as its unit vector with canonical phase
/// (first non-negligible amplitude real positive).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-12 {
            return Err(Error::Invalid("pure state vector has zero norm".into()));
        }
        let mut amplitudes = amplitudes / Complex64::new(norm, 0.0);
        if let Some(first) = amplitudes.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = first / Complex64::new(first.norm(), 0.0);
            amplitudes /= phase;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            mat: self.projector(),
        }
    }
}

/// A positive operator valued measure on a finite outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    outcome: FiniteSpace,
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(outcome: FiniteSpace, effects: Vec<CMatrix>) -> Result<Self> {
        Self::with_tol(outcome, effects, QUANTUM_TOL)
    }

    pub fn with_tol(outcome: FiniteSpace, effects: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if effects.len() != outcome.len() {
            return Err(Error::DimensionMismatch {
                expected: outcome.len(),
                got: effects.len(),
            });
        }
        let dim = effects[0].nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        let mut herm = Vec::with_capacity(effects.len());
        for (atom, e) in outcome.atoms().iter().zip(&effects) {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.nrows().max(e.ncols()),
                });
            }
            let h = hermitize(e, tol)?;
            let min = min_eigenvalue(&h);
            if min < -tol {
                return Err(Error::NumericalInconsistency(format!(
                    "effect `{atom}` has negative eigenvalue {min:.3e}"
                )));
            }
            sum += &h;
            herm.push(h);
        }
        let dev = max_abs(&(&sum - CMatrix::identity(dim, dim)));
        if dev > tol {
            return Err(Error::NumericalInconsistency(format!(
                "effects sum deviates from identity by {dev:.3e}"
            )));
        }
        Ok(Self {
            outcome,
            effects: herm,
        })
    }

    /// A projection valued measure in the standard basis.
    pub fn computational_basis(outcome: FiniteSpace) -> Self {
        let dim = outcome.len();
        let effects = (0..dim).map(|i| PureState::basis(dim, i).projector()).collect();
        Self { outcome, effects }
    }

    pub fn outcome(&self) -> &FiniteSpace {
        &self.outcome
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }
}

/// Born rule: `law(omega) = tr(rho * E_omega)`.
pub fn born_law(rho: &DensityMatrix, povm: &Povm) -> Result<OutcomeLaw> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            got: rho.dim(),
        });
    }
    let mut probs = Vec::with_capacity(povm.effects.len());
    for e in &povm.effects {
        let t = trace(&(rho.matrix() * e));
        if t.im.abs() > 1e-9 {
            return Err(Error::NumericalInconsistency(format!(
                "Born probability has imaginary part {:.3e}",
                t.im
            )));
        }
        probs.push(t.re.clamp(0.0, 1.0));
    }
    OutcomeLaw::new(povm.outcome.clone(), probs)
}

/// A discretized quantum extended observable: a finite outcome space, a
/// finite family of prepared pure output states, and one PSD operator per
/// (outcome, prepared) pair, summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumExtendedObservable {
    outcome: FiniteSpace,
    prepared: Vec<PureState>,
    /// `operators[k][j]` acts on the input space H.
    operators: Vec<Vec<CMatrix>>,
}

impl QuantumExtendedObservable {
    pub fn new(
        outcome: FiniteSpace,
        prepared: Vec<PureState>,
        operators: Vec<Vec<CMatrix>>,
    ) -> Result<Self> {
        Self::with_tol(outcome, prepared, operators, QUANTUM_TOL)
    }

    pub fn with_tol(
        outcome: FiniteSpace,
        prepared: Vec<PureState>,
        operators: Vec<Vec<CMatrix>>,
        tol: f64,
    ) -> Result<Self> {
        if operators.len() != outcome.len() {
            return Err(Error::DimensionMismatch {
                expected: outcome.len(),
                got: operators.len(),
            });
        }
        if prepared.is_empty() {
            return Err(Error::Invalid("at least one prepared state required".into()));
        }
        let dim_k = prepared[0].dim();
        if prepared.iter().any(|p| p.dim() != dim_k) {
            return Err(Error::Invalid("prepared states of mixed dimension".into()));
        }
        let dim_h = operators[0]
            .first()
            .ok_or_else(|| Error::Invalid("empty operator row".into()))?
            .nrows();
        let mut sum = CMatrix::zeros(dim_h, dim_h);
        let mut herm = Vec::with_capacity(operators.len());
        for row in &operators {
            if row.len() != prepared.len() {
                return Err(Error::DimensionMismatch {
                    expected: prepared.len(),
                    got: row.len(),
                });
            }
            let mut hrow = Vec::with_capacity(row.len());
            for a in row {
                if a.nrows() != dim_h || a.ncols() != dim_h {
                    return Err(Error::DimensionMismatch {
                        expected: dim_h,
                        got: a.nrows().max(a.ncols()),
                    });
                }
                let h = hermitize(a, tol)?;
                let min = min_eigenvalue(&h);
                if min < -tol {
                    return Err(Error::NumericalInconsistency(format!(
                        "operator has negative eigenvalue {min:.3e}"
                    )));
                }
                sum += &h;
                hrow.push(h);
            }
            herm.push(hrow);
        }
        let dev = max_abs(&(&sum - CMatrix::identity(dim_h, dim_h)));
        if dev > tol {
            return Err(Error::NumericalInconsistency(format!(
                "operators sum deviates from identity by {dev:.3e}"
            )));
        }
        Ok(Self {
            outcome,
            prepared,
            operators: herm,
        })
    }

    /// The von Neumann measure-and-prepare observable of a PVM: outcome
    /// `k` projects and re-prepares the `k`-th basis state.
    pub fn collapse(pvm: &Povm, prepared: Vec<PureState>) -> Result<Self> {
        if prepared.len() != pvm.effects().len() {
            return Err(Error::DimensionMismatch {
                expected: pvm.effects().len(),
                got: prepared.len(),
            });
        }
        let dim = pvm.dim();
        let operators = pvm
            .effects()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                (0..prepared.len())
                    .map(|j| {
                        if j == k {
                            e.clone()
                        } else {
                            CMatrix::zeros(dim, dim)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(pvm.outcome().clone(), prepared, operators)
    }

    pub fn outcome(&self) -> &FiniteSpace {
        &self.outcome
    }

    pub fn prepared(&self) -> &[PureState] {
        &self.prepared
    }

    pub fn operators(&self) -> &[Vec<CMatrix>] {
        &self.operators
    }

    pub fn dim_input(&self) -> usize {
        self.operators[0][0].nrows()
    }

    pub fn dim_output(&self) -> usize {
        self.prepared[0].dim()
    }
}

/// The outcome marginal POVM: effect for `omega_k` is the sum over
/// prepared states of the pair operators.
pub fn q_outcome_marginal(qeo: &QuantumExtendedObservable) -> Povm {
    let dim = qeo.dim_input();
    let effects = qeo
        .operators
        .iter()
        .map(|row| {
            row.iter()
                .fold(CMatrix::zeros(dim, dim), |acc, a| acc + a)
        })
        .collect();
    Povm {
        outcome: qeo.outcome.clone(),
        effects,
    }
}

/// A linear map on matrix space, stored as its action matrix on the
/// row-major vectorization: column `a*d_in + b` is the image of the
/// matrix unit `|a><b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim_in: usize,
    dim_out: usize,
    action: CMatrix,
}

impl SuperOperator {
    pub fn from_action(dim_in: usize, dim_out: usize, action: CMatrix) -> Result<Self> {
        if action.nrows() != dim_out * dim_out || action.ncols() != dim_in * dim_in {
            return Err(Error::DimensionMismatch {
                expected: dim_out * dim_out,
                got: action.nrows(),
            });
        }
        Ok(Self {
            dim_in,
            dim_out,
            action,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            action: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    /// The transpose map: not completely positive, the standard witness
    /// that the Choi certificate is non-vacuous.
    pub fn transpose_map(dim: usize) -> Self {
        let n = dim * dim;
        let mut action = CMatrix::zeros(n, n);
        for a in 0..dim {
            for b in 0..dim {
                action[(b * dim + a, a * dim + b)] = Complex64::new(1.0, 0.0);
            }
        }
        Self {
            dim_in: dim,
            dim_out: dim,
            action,
        }
    }

    pub fn zero(dim_in: usize, dim_out: usize) -> Self {
        Self {
            dim_in,
            dim_out,
            action: CMatrix::zeros(dim_out * dim_out, dim_in * dim_in),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn action_matrix(&self) -> &CMatrix {
        &self.action
    }

    pub fn apply(&self, t: &CMatrix) -> Result<CMatrix> {
        if t.nrows() != self.dim_in || t.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: t.nrows(),
            });
        }
        let mut vec_in = CVector::zeros(self.dim_in * self.dim_in);
        for a in 0..self.dim_in {
            for b in 0..self.dim_in {
                vec_in[a * self.dim_in + b] = t[(a, b)];
            }
        }
        let vec_out = &self.action * vec_in;
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for c in 0..self.dim_out {
            for d in 0..self.dim_out {
                out[(c, d)] = vec_out[c * self.dim_out + d];
            }
        }
        Ok(out)
    }
}

/// The quantum state instrument of an extended observable restricted to an
/// outcome event: `T -> sum_{k in B, j} tr(T A_kj) |psi_j><psi_j|`.
pub fn state_instrument(qeo: &QuantumExtendedObservable, event: &[usize]) -> Result<SuperOperator> {
    for &k in event {
        if k >= qeo.outcome.len() {
            return Err(Error::UnknownOutcome(format!("index {k}")));
        }
    }
    let (dh, dk) = (qeo.dim_input(), qeo.dim_output());
    let mut action = CMatrix::zeros(dk * dk, dh * dh);
    for &k in event {
        for (j, p) in qeo.prepared.iter().enumerate() {
            let proj = p.projector();
            let a = &qeo.operators[k][j];
            // tr(T A) = sum_{a,b} T[a,b] A[b,a]
            for c in 0..dk {
                for d in 0..dk {
                    for ia in 0..dh {
                        for ib in 0..dh {
                            action[(c * dk + d, ia * dh + ib)] += proj[(c, d)] * a[(ib, ia)];
                        }
                    }
                }
            }
        }
    }
    Ok(SuperOperator {
        dim_in: dh,
        dim_out: dk,
        action,
    })
}

/// The conditional posterior quantum state and its mixture weights over
/// the prepared states.
pub fn q_posterior(
    qeo: &QuantumExtendedObservable,
    rho: &DensityMatrix,
    event: &[usize],
) -> Result<(DensityMatrix, Vec<f64>)> {
    q_posterior_with_tol(qeo, rho, event, QUANTUM_TOL)
}

pub fn q_posterior_with_tol(
    qeo: &QuantumExtendedObservable,
    rho: &DensityMatrix,
    event: &[usize],
    tol: f64,
) -> Result<(DensityMatrix, Vec<f64>)> {
    if rho.dim() != qeo.dim_input() {
        return Err(Error::DimensionMismatch {
            expected: qeo.dim_input(),
            got: rho.dim(),
        });
    }
    let mut raw = vec![0.0; qeo.prepared.len()];
    for &k in event {
        if k >= qeo.outcome.len() {
            return Err(Error::UnknownOutcome(format!("index {k}")));
        }
        for (j, w) in raw.iter_mut().enumerate() {
            *w += trace(&(rho.matrix() * &qeo.operators[k][j])).re;
        }
    }
    let mu: f64 = raw.iter().sum();
    if mu <= tol {
        return Err(Error::ZeroProbabilityEvent {
            event: event
                .iter()
                .map(|&k| qeo.outcome.atoms()[k].as_str())
                .collect::<Vec<_>>()
                .join(","),
            prob: mu,
        });
    }
    let weights: Vec<f64> = raw.iter().map(|w| w.max(0.0) / mu).collect();
    let dk = qeo.dim_output();
    let mut mat = CMatrix::zeros(dk, dk);
    for (p, &w) in qeo.prepared.iter().zip(&weights) {
        mat += p.projector() * Complex64::new(w, 0.0);
    }
    Ok((DensityMatrix::with_tol(mat, tol.max(QUANTUM_TOL))?, weights))
}

/// The Choi matrix of a superoperator: block (i, j) is the image of the
/// matrix unit `|i><j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    mat: CMatrix,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

pub fn choi(op: &SuperOperator) -> ChoiMatrix {
    let (din, dout) = (op.dim_in, op.dim_out);
    let n = din * dout;
    let mut mat = CMatrix::zeros(n, n);
    for i in 0..din {
        for j in 0..din {
            let col = op.action.column(i * din + j);
            for k in 0..dout {
                for l in 0..dout {
                    mat[(i * dout + k, j * dout + l)] = col[k * dout + l];
                }
            }
        }
    }
    ChoiMatrix { mat }
}

/// Complete positivity certificate: the minimum Choi eigenvalue must be
/// above `-tol`. Returns the verdict together with the witness eigenvalue.
pub fn is_completely_positive(op: &SuperOperator, tol: f64) -> (bool, f64) {
    let c = choi(op);
    // A non-Hermitian Choi matrix means the map is not even
    // Hermiticity-preserving; symmetrize for the eigenvalue bound, which
    // can only improve the reported minimum.
    let h = (c.mat.clone() + c.mat.adjoint()) * Complex64::new(0.5, 0.0);
    let min = min_eigenvalue(&h);
    (min >= -tol, min)
}

/// Trace preservation: `tr(W(E_ab)) = delta_ab` on all matrix units.
pub fn is_trace_preserving(op: &SuperOperator, tol: f64) -> bool {
    let din = op.dim_in;
    for a in 0..din {
        for b in 0..din {
            let mut unit = CMatrix::zeros(din, din);
            unit[(a, b)] = Complex64::new(1.0, 0.0);
            let image = op.apply(&unit).expect("dimensions match");
            let t = trace(&image);
            let expected = if a == b { 1.0 } else { 0.0 };
            if (t.re - expected).abs() > tol || t.im.abs() > tol {
                return false;
            }
        }
    }
    true
}

fn check_projective(pvm: &Povm, tol: f64) -> Result<()> {
    for (i, e) in pvm.effects.iter().enumerate() {
        let dev = max_abs(&(e * e - e));
        if dev > tol {
            return Err(Error::NotProjective(format!(
                "effect {i} is not idempotent (deviation {dev:.3e})"
            )));
        }
        for (j, f) in pvm.effects.iter().enumerate() {
            if i != j {
                let cross = max_abs(&(e * f));
                if cross > tol {
                    return Err(Error::NotProjective(format!(
                        "effects {i} and {j} are not orthogonal (overlap {cross:.3e})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Deterministic-response check for the no-go relation: a pure state
/// admits an outcome assignment iff every projector trace is 0 or 1.
pub fn nogo_deterministic_response(
    p: &PureState,
    pvm: &Povm,
    tol: f64,
) -> Result<Option<usize>> {
    if p.dim() != pvm.dim() {
        return Err(Error::DimensionMismatch {
            expected: pvm.dim(),
            got: p.dim(),
        });
    }
    check_projective(pvm, tol.max(QUANTUM_TOL))?;
    let proj = p.projector();
    let mut assigned = None;
    for (i, e) in pvm.effects.iter().enumerate() {
        let t = trace(&(&proj * e)).re;
        if (t - 1.0).abs() <= tol {
            assigned = Some(i);
        } else if t.abs() > tol {
            return Ok(None);
        }
    }
    Ok(assigned)
}

/// A Haar-random pure state keyed by (seed, index).
pub fn haar_state(dim: usize, seed: u64, index: u64) -> PureState {
    let mut rng = CounterRng::new(seed ^ 0x6861_6172, index);
    let mut v = CVector::zeros(dim);
    for i in 0..dim {
        let (re, im) = rng.next_gaussian_pair();
        v[i] = Complex64::new(re, im);
    }
    PureState::new(v).expect("gaussian vector is nonzero almost surely")
}

/// Summary of a deterministic-response scan over sampled pure states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NogoReport {
    pub total: u64,
    pub deterministic_count: u64,
    pub eigenstate_count: u64,
}

/// Scan explicit pure states for deterministic responses.
pub fn nogo_scan_states(pvm: &Povm, states: &[PureState], tol: f64) -> Result<NogoReport> {
    let mut deterministic = 0u64;
    let mut eigen = 0u64;
    for p in states {
        if nogo_deterministic_response(p, pvm, tol)?.is_some() {
            deterministic += 1;
        }
        let proj = p.projector();
        let near_eigen = pvm
            .effects
            .iter()
            .any(|e| (trace(&(&proj * e)).re - 1.0).abs() <= tol);
        if near_eigen {
            eigen += 1;
        }
    }
    Ok(NogoReport {
        total: states.len() as u64,
        deterministic_count: deterministic,
        eigenstate_count: eigen,
    })
}

/// Scan Haar-random pure states: almost surely none admits a deterministic
/// response unless it lands on an eigenstate, which has measure zero.
pub fn nogo_scan(pvm: &Povm, samples: u64, seed: u64, tol: f64) -> Result<NogoReport> {
    if samples == 0 {
        return Err(Error::Invalid("samples must be at least 1".into()));
    }
    let dim = pvm.dim();
    let states: Vec<PureState> = (0..samples).map(|i| haar_state(dim, seed, i)).collect();
    nogo_scan_states(pvm, &states, tol)
}
