//! Deterministic Monte Carlo simulation of repeated experimental trials.
//!
//! Each trial draws from its own counter-keyed random stream, so reports are
//! bit-identical across thread counts and evaluation orders.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{outcome_marginal, posterior_with_tol, ExtendedKernel};
use crate::measure::{InformationState, DEFAULT_TOL};
use crate::observables::outcome_law;
use crate::quantum::{
    born_law, q_outcome_marginal, q_posterior, trace, trace_distance, CMatrix, DensityMatrix,
    QuantumExtendedObservable,
};
use crate::rng::CounterRng;
use num_complex::Complex64;

/// One simulated repetition of the experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Sampled input atom; absent for quantum runs, where the input is the
    /// fixed density matrix.
    pub input: Option<String>,
    pub outcome: String,
    /// Posterior output atom (classical) or prepared-state index (quantum).
    pub output: String,
}

/// Empirical vs. exact posterior conditioned on one outcome event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub event: String,
    pub count: u64,
    pub empirical: Vec<f64>,
    pub exact: Vec<f64>,
    pub tv: f64,
    /// Trace distance of the empirical posterior density to the exact one;
    /// quantum runs only.
    pub trace_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub outcome_atoms: Vec<String>,
    pub output_labels: Vec<String>,
    pub empirical_outcome: Vec<f64>,
    pub exact_outcome: Vec<f64>,
    pub outcome_tv: f64,
    pub conditionals: Vec<ConditionalReport>,
    pub records: Vec<TrialRecord>,
}

/// DKW-style concentration bound used by the consistency tests:
/// `3 * sqrt(ln(2k) / (2N))` for `k` outcomes over `N` trials.
pub fn dkw_bound(trials: u64, outcomes: usize) -> f64 {
    3.0 * ((2.0 * outcomes as f64).ln() / (2.0 * trials as f64)).sqrt()
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Run `f` on contiguous chunks of `0..trials` across `threads` workers and
/// concatenate the per-chunk outputs in order.
fn chunked<T: Send>(trials: u64, threads: usize, f: impl Fn(u64, u64) -> Vec<T> + Sync) -> Vec<T> {
    let threads = threads.max(1);
    if threads == 1 {
        return f(0, trials);
    }
    let chunk = trials.div_ceil(threads as u64);
    let mut out = Vec::with_capacity(trials as usize);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads as u64)
            .map(|t| {
                let f = &f;
                let lo = (t * chunk).min(trials);
                let hi = ((t + 1) * chunk).min(trials);
                scope.spawn(move || f(lo, hi))
            })
            .collect();
        for h in handles {
            out.extend(h.join().expect("worker panicked"));
        }
    });
    out
}

pub fn run_classical(
    ext: &ExtendedKernel,
    state: &InformationState,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    if state.space() != ext.input() {
        return Err(Error::SpaceMismatch {
            expected: ext.input().to_string(),
            got: state.space().to_string(),
        });
    }
    let n_omega = ext.outcome().len();
    let n_out = ext.output().len();
    let input_cum = cumulative(state.weights());
    let row_cums: Vec<Vec<f64>> = ext.rows().iter().map(|r| cumulative(r)).collect();

    let samples = chunked(trials, threads, |lo, hi| {
        (lo..hi)
            .map(|t| {
                let mut rng = CounterRng::new(seed, t);
                let theta_in = rng.next_index(&input_cum);
                let col = rng.next_index(&row_cums[theta_in]);
                (t, theta_in, col / n_out, col % n_out)
            })
            .collect::<Vec<_>>()
    });

    let mut outcome_counts = vec![0u64; n_omega];
    let mut joint_counts = vec![vec![0u64; n_out]; n_omega];
    let mut records = Vec::with_capacity(trials as usize);
    for (t, theta_in, omega, theta_out) in samples {
        outcome_counts[omega] += 1;
        joint_counts[omega][theta_out] += 1;
        records.push(TrialRecord {
            trial: t,
            input: Some(ext.input().atoms()[theta_in].clone()),
            outcome: ext.outcome().atoms()[omega].clone(),
            output: ext.output().atoms()[theta_out].clone(),
        });
    }

    let exact_outcome = outcome_law(&outcome_marginal(ext), state)?;
    let empirical_outcome: Vec<f64> = outcome_counts
        .iter()
        .map(|&c| c as f64 / trials as f64)
        .collect();

    let mut conditionals = Vec::new();
    for omega in 0..n_omega {
        let count = outcome_counts[omega];
        let exact = match posterior_with_tol(ext, state, &[omega], DEFAULT_TOL) {
            Ok(post) => post.weights().to_vec(),
            Err(Error::ZeroProbabilityEvent { .. }) if count == 0 => continue,
            Err(e) => return Err(e),
        };
        let empirical: Vec<f64> = if count == 0 {
            vec![0.0; n_out]
        } else {
            joint_counts[omega]
                .iter()
                .map(|&c| c as f64 / count as f64)
                .collect()
        };
        conditionals.push(ConditionalReport {
            event: ext.outcome().atoms()[omega].clone(),
            count,
            tv: tv(&empirical, &exact),
            empirical,
            exact,
            trace_distance: None,
        });
    }

    Ok(SimulationReport {
        trials,
        seed,
        outcome_atoms: ext.outcome().atoms().to_vec(),
        output_labels: ext.output().atoms().to_vec(),
        outcome_tv: tv(&empirical_outcome, exact_outcome.probabilities()),
        empirical_outcome,
        exact_outcome: exact_outcome.probabilities().to_vec(),
        conditionals,
        records,
    })
}

pub fn run_quantum(
    qeo: &QuantumExtendedObservable,
    rho: &DensityMatrix,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    if rho.dim() != qeo.dim_input() {
        return Err(Error::DimensionMismatch {
            expected: qeo.dim_input(),
            got: rho.dim(),
        });
    }
    let n_omega = qeo.outcome().len();
    let n_prep = qeo.prepared().len();
    // Joint distribution over (omega_k, prepared_j) pairs.
    let mut joint = vec![0.0; n_omega * n_prep];
    for k in 0..n_omega {
        for j in 0..n_prep {
            joint[k * n_prep + j] = trace(&(rho.matrix() * &qeo.operators()[k][j])).re.max(0.0);
        }
    }
    let joint_cum = cumulative(&joint);

    let samples = chunked(trials, threads, |lo, hi| {
        (lo..hi)
            .map(|t| {
                let mut rng = CounterRng::new(seed, t);
                let flat = rng.next_index(&joint_cum);
                (t, flat / n_prep, flat % n_prep)
            })
            .collect::<Vec<_>>()
    });

    let mut outcome_counts = vec![0u64; n_omega];
    let mut joint_counts = vec![vec![0u64; n_prep]; n_omega];
    let mut records = Vec::with_capacity(trials as usize);
    for (t, omega, j) in samples {
        outcome_counts[omega] += 1;
        joint_counts[omega][j] += 1;
        records.push(TrialRecord {
            trial: t,
            input: None,
            outcome: qeo.outcome().atoms()[omega].clone(),
            output: j.to_string(),
        });
    }

    let exact_outcome = born_law(rho, &q_outcome_marginal(qeo))?;
    let empirical_outcome: Vec<f64> = outcome_counts
        .iter()
        .map(|&c| c as f64 / trials as f64)
        .collect();

    let dk = qeo.dim_output();
    let mut conditionals = Vec::new();
    for omega in 0..n_omega {
        let count = outcome_counts[omega];
        let (exact_density, exact) = match q_posterior(qeo, rho, &[omega]) {
            Ok(pair) => pair,
            Err(Error::ZeroProbabilityEvent { .. }) if count == 0 => continue,
            Err(e) => return Err(e),
        };
        let empirical: Vec<f64> = if count == 0 {
            vec![0.0; n_prep]
        } else {
            joint_counts[omega]
                .iter()
                .map(|&c| c as f64 / count as f64)
                .collect()
        };
        let mut emp_density = CMatrix::zeros(dk, dk);
        for (p, &w) in qeo.prepared().iter().zip(&empirical) {
            emp_density += p.projector() * Complex64::new(w, 0.0);
        }
        conditionals.push(ConditionalReport {
            event: qeo.outcome().atoms()[omega].clone(),
            count,
            tv: tv(&empirical, &exact),
            trace_distance: Some(trace_distance(&emp_density, exact_density.matrix())),
            empirical,
            exact,
        });
    }

    Ok(SimulationReport {
        trials,
        seed,
        outcome_atoms: qeo.outcome().atoms().to_vec(),
        output_labels: (0..n_prep).map(|j| j.to_string()).collect(),
        outcome_tv: tv(&empirical_outcome, exact_outcome.probabilities()),
        empirical_outcome,
        exact_outcome: exact_outcome.probabilities().to_vec(),
        conditionals,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{beable_extended, extended_from_maps};
    use crate::measure::{FiniteSpace, MeasurableMap};
    use crate::quantum::{CVector, Povm, PureState};

    fn parity_beable() -> (ExtendedKernel, InformationState) {
        let theta = FiniteSpace::new(["0", "1", "2", "3"]).unwrap();
        let parity = FiniteSpace::new(["even", "odd"]).unwrap();
        let phi = MeasurableMap::from_pairs(
            theta.clone(),
            parity,
            &[("0", "even"), ("1", "odd"), ("2", "even"), ("3", "odd")],
        )
        .unwrap();
        let ext = beable_extended(&phi, &MeasurableMap::identity(&theta)).unwrap();
        let state = InformationState::uniform(&theta);
        (ext, state)
    }

    fn collapse_qeo() -> QuantumExtendedObservable {
        let pvm = Povm::computational_basis(FiniteSpace::new(["0", "1"]).unwrap());
        QuantumExtendedObservable::collapse(
            &pvm,
            vec![PureState::basis(2, 0), PureState::basis(2, 1)],
        )
        .unwrap()
    }

    fn plus_density() -> DensityMatrix {
        let s = 1.0 / 2f64.sqrt();
        PureState::new(CVector::from_vec(vec![
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
        ]))
        .unwrap()
        .density()
    }

    #[test]
    fn deterministic_extended_has_zero_tv_at_any_n() {
        let theta = FiniteSpace::new(["a", "b"]).unwrap();
        let omega = FiniteSpace::new(["x", "y"]).unwrap();
        let phi =
            MeasurableMap::from_pairs(theta.clone(), omega, &[("a", "x"), ("b", "y")]).unwrap();
        let ext = extended_from_maps(&phi, &MeasurableMap::identity(&theta)).unwrap();
        let dirac = InformationState::dirac(&theta, "b").unwrap();
        for n in [1u64, 10, 100] {
            let report = run_classical(&ext, &dirac, n, 5, 1).unwrap();
            assert_eq!(report.outcome_tv, 0.0);
            for c in &report.conditionals {
                assert_eq!(c.tv, 0.0);
            }
        }
    }

    #[test]
    fn single_trial_report() {
        let (ext, state) = parity_beable();
        let report = run_classical(&ext, &state, 1, 9, 1).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].trial, 0);
        assert!(report
            .empirical_outcome
            .iter()
            .all(|&f| f == 0.0 || f == 1.0));
    }

    #[test]
    fn parity_beable_posterior_concentrates() {
        let (ext, state) = parity_beable();
        let report = run_classical(&ext, &state, 200_000, 20240817, 1).unwrap();
        assert!(report.outcome_tv <= 0.01, "tv {}", report.outcome_tv);
        let odd = report.conditionals.iter().find(|c| c.event == "odd").unwrap();
        assert_eq!(odd.exact, vec![0.0, 0.5, 0.0, 0.5]);
        assert!(odd.tv <= 0.01, "tv {}", odd.tv);
    }

    #[test]
    fn dkw_bound_holds_over_growing_n() {
        let (ext, state) = parity_beable();
        for n in [1_000u64, 10_000, 100_000] {
            let report = run_classical(&ext, &state, n, 7, 1).unwrap();
            let bound = dkw_bound(n, report.outcome_atoms.len());
            assert!(report.outcome_tv <= bound, "N={n}: {} > {bound}", report.outcome_tv);
            for c in &report.conditionals {
                let cond_bound = dkw_bound(c.count.max(1), report.output_labels.len());
                assert!(c.tv <= cond_bound, "N={n} event {}: {} > {cond_bound}", c.event, c.tv);
            }
        }
    }

    #[test]
    fn reports_are_identical_across_thread_counts() {
        let (ext, state) = parity_beable();
        let one = run_classical(&ext, &state, 5000, 13, 1).unwrap();
        let two = run_classical(&ext, &state, 5000, 13, 2).unwrap();
        let eight = run_classical(&ext, &state, 5000, 13, 8).unwrap();
        assert_eq!(one.records, two.records);
        assert_eq!(one.empirical_outcome, two.empirical_outcome);
        assert_eq!(one.conditionals, two.conditionals);
        assert_eq!(one.records, eight.records);
        assert_eq!(one.empirical_outcome, eight.empirical_outcome);
    }

    #[test]
    fn quantum_collapse_frequencies() {
        let report = run_quantum(&collapse_qeo(), &plus_density(), 200_000, 99, 1).unwrap();
        assert!((report.empirical_outcome[0] - 0.5).abs() < 0.01);
        assert!((report.empirical_outcome[1] - 0.5).abs() < 0.01);
        // Single prepared state per branch: the conditional is exact.
        for c in &report.conditionals {
            assert_eq!(c.tv, 0.0);
            assert_eq!(c.trace_distance, Some(0.0));
        }
    }

    #[test]
    fn quantum_eigenstate_yields_one_outcome() {
        let rho = PureState::basis(2, 1).density();
        let report = run_quantum(&collapse_qeo(), &rho, 500, 3, 1).unwrap();
        assert_eq!(report.empirical_outcome, vec![0.0, 1.0]);
        assert!(report.records.iter().all(|r| r.outcome == "1"));
    }

    #[test]
    fn quantum_single_trial() {
        let report = run_quantum(&collapse_qeo(), &plus_density(), 1, 4, 1).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(report.records[0].input.is_none());
    }

    #[test]
    fn quantum_reports_identical_across_threads() {
        let rho = plus_density();
        let one = run_quantum(&collapse_qeo(), &rho, 5000, 21, 1).unwrap();
        let eight = run_quantum(&collapse_qeo(), &rho, 5000, 21, 8).unwrap();
        assert_eq!(one, eight);
    }

    #[test]
    fn space_mismatch_is_reported() {
        let (ext, _) = parity_beable();
        let other = InformationState::uniform(&FiniteSpace::new(["p", "q"]).unwrap());
        assert!(matches!(
            run_classical(&ext, &other, 10, 0, 1),
            Err(Error::SpaceMismatch { .. })
        ));
    }
}
