//! End-to-end acceptance gate: one pass/fail line per criterion.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use finexp::experiments::outcome_marginal;
use finexp::quantum::{haar_state, trace, CMatrix};
use finexp::sim::dkw_bound;
use finexp::*;

type Check = std::result::Result<(), String>;

fn space(prefix: &str, n: usize) -> FiniteSpace {
    FiniteSpace::new((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

fn random_row(rng: &mut CounterRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.next_f64() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|w| w / sum).collect()
}

fn random_kernel(rng: &mut CounterRng, n_in: usize, n_out: usize) -> Kernel {
    let rows = (0..n_in).map(|_| random_row(rng, n_out)).collect();
    Kernel::new(space("t", n_in), space("w", n_out), rows).unwrap()
}

fn random_state(rng: &mut CounterRng, sp: &FiniteSpace) -> InformationState {
    let raw = random_row(rng, sp.len());
    InformationState::normalize(sp, &raw).unwrap()
}

fn random_map(rng: &mut CounterRng, source: &FiniteSpace, target: &FiniteSpace) -> MeasurableMap {
    let n = target.len();
    let pairs: Vec<(String, String)> = source
        .atoms()
        .iter()
        .map(|a| {
            (
                a.clone(),
                target.atoms()[(rng.next_u64() % n as u64) as usize].clone(),
            )
        })
        .collect();
    MeasurableMap::from_pairs(source.clone(), target.clone(), &pairs).unwrap()
}

fn all_events(n: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// ---------------------------------------------------------------- criteria

fn c1_affinity() -> Check {
    let start = Instant::now();
    let mut rng = CounterRng::new(0xacce01, 0);
    for _ in 0..500 {
        let n_in = 2 + (rng.next_u64() % 7) as usize;
        let n_out = 2 + (rng.next_u64() % 7) as usize;
        let k = random_kernel(&mut rng, n_in, n_out);
        let p1 = random_state(&mut rng, k.input());
        let p2 = random_state(&mut rng, k.input());
        let alpha = rng.next_f64();
        let mixed = InformationState::mix(&[p1.clone(), p2.clone()], &[alpha, 1.0 - alpha])
            .map_err(|e| e.to_string())?;
        let (lm, l1, l2) = (
            outcome_law(&k, &mixed).unwrap(),
            outcome_law(&k, &p1).unwrap(),
            outcome_law(&k, &p2).unwrap(),
        );
        for event in all_events(n_out) {
            let gap = (lm.prob_of_event(&event)
                - alpha * l1.prob_of_event(&event)
                - (1.0 - alpha) * l2.prob_of_event(&event))
            .abs();
            ensure(gap <= 1e-12, format!("affinity gap {gap:.3e}"))?;
        }
    }
    ensure(start.elapsed().as_secs_f64() < 1.0, "affinity ran over 1 s")
}

fn c2_round_trip() -> Check {
    let start = Instant::now();
    let mut rng = CounterRng::new(0xacce02, 0);
    for _ in 0..200 {
        let n_in = 2 + (rng.next_u64() % 7) as usize;
        let n_out = 2 + (rng.next_u64() % 7) as usize;
        let k = random_kernel(&mut rng, n_in, n_out);
        let laws: Vec<OutcomeLaw> = k
            .input()
            .atoms()
            .iter()
            .map(|a| {
                outcome_law(&k, &InformationState::dirac(k.input(), a).unwrap()).unwrap()
            })
            .collect();
        let rebuilt = from_affine_family(k.input(), &laws).map_err(|e| e.to_string())?;
        for (r1, r2) in k.rows().iter().zip(rebuilt.rows()) {
            for (a, b) in r1.iter().zip(r2) {
                ensure((a - b).abs() <= 1e-14, format!("entry gap {:.3e}", (a - b).abs()))?;
            }
        }
        for _ in 0..50 {
            let pi = random_state(&mut rng, k.input());
            let law = outcome_law(&k, &pi).unwrap();
            for lambda in 0..n_out {
                let direct: f64 = pi
                    .weights()
                    .iter()
                    .zip(k.rows())
                    .map(|(w, row)| w * row[lambda])
                    .sum();
                let gap = (law.probabilities()[lambda] - direct).abs();
                ensure(gap <= 1e-12, format!("law gap {gap:.3e}"))?;
            }
        }
    }
    ensure(start.elapsed().as_secs_f64() < 1.0, "round trip ran over 1 s")
}

fn c3_convolution() -> Check {
    let mut rng = CounterRng::new(0xacce03, 0);
    for _ in 0..200 {
        let n1 = 2 + (rng.next_u64() % 5) as usize;
        let n2 = 2 + (rng.next_u64() % 5) as usize;
        let n_out = 2 + (rng.next_u64() % 5) as usize;
        let s = random_kernel(&mut rng, n1, n2);
        let pi_rows = (0..n2).map(|_| random_row(&mut rng, n_out)).collect();
        let pi_k = Kernel::new(s.outcome().clone(), space("o", n_out), pi_rows).unwrap();
        let state = random_state(&mut rng, s.input());
        let lhs = outcome_law(&pi_k, &s.apply(&state).unwrap()).unwrap();
        let rhs = outcome_law(&convolve(&pi_k, &s).unwrap(), &state).unwrap();
        for (a, b) in lhs.probabilities().iter().zip(rhs.probabilities()) {
            ensure((a - b).abs() <= 1e-12, format!("convolution gap {:.3e}", (a - b).abs()))?;
        }
    }
    Ok(())
}

fn c4_bayes_oracle() -> Check {
    let mut rng = CounterRng::new(0xacce04, 0);
    for _ in 0..100 {
        let n_theta = 2 + (rng.next_u64() % 15) as usize;
        let n_omega = 2 + (rng.next_u64() % 5) as usize;
        let n_out = 2 + (rng.next_u64() % 5) as usize;
        let theta = space("t", n_theta);
        let omega = space("w", n_omega);
        let out = space("o", n_out);
        let phi = random_map(&mut rng, &theta, &omega);
        let g = random_map(&mut rng, &theta, &out);
        let pi = random_state(&mut rng, &theta);
        // Pick an event guaranteed to contain an attained outcome.
        let anchor = phi.apply_index((rng.next_u64() % n_theta as u64) as usize);
        let mut event: Vec<usize> = (0..n_omega)
            .filter(|&i| i == anchor || rng.next_f64() < 0.3)
            .collect();
        event.sort_unstable();
        let ext = extended_from_maps(&phi, &g).map_err(|e| e.to_string())?;
        let post = posterior(&ext, &pi, &event).map_err(|e| e.to_string())?;
        // Brute-force conditional P(g(theta) in . | phi(theta) in event).
        let mut brute = vec![0.0; n_out];
        let mut mass = 0.0;
        for (i, &w) in pi.weights().iter().enumerate() {
            if event.contains(&phi.apply_index(i)) {
                brute[g.apply_index(i)] += w;
                mass += w;
            }
        }
        for b in &mut brute {
            *b /= mass;
        }
        for (a, b) in post.weights().iter().zip(&brute) {
            ensure((a - b).abs() <= 1e-12, format!("bayes gap {:.3e}", (a - b).abs()))?;
        }
    }
    Ok(())
}

fn c5_nonperturbing() -> Check {
    let mut rng = CounterRng::new(0xacce05, 0);
    for _ in 0..100 {
        let n_in = 2 + (rng.next_u64() % 6) as usize;
        let n_omega = 2 + (rng.next_u64() % 5) as usize;
        let m = random_kernel(&mut rng, n_in, n_omega);
        let input = m.input().clone();

        // Identity output map: conditioning on the full outcome space must
        // return the prior.
        let ext_id = factorized_extended(&m, &MeasurableMap::identity(&input))
            .map_err(|e| e.to_string())?;
        let pi = random_state(&mut rng, &input);
        let full: Vec<usize> = (0..n_omega).collect();
        let post = posterior(&ext_id, &pi, &full).map_err(|e| e.to_string())?;
        let tv = total_variation(&post, &pi).unwrap();
        ensure(tv <= 1e-14, format!("full-event posterior moved by {tv:.3e}"))?;

        // Arbitrary output map: dirac inputs pass through as the mapped dirac
        // for every positive-probability event.
        let out = space("o", 2 + (rng.next_u64() % 4) as usize);
        let phi_out = random_map(&mut rng, &input, &out);
        let ext = factorized_extended(&m, &phi_out).map_err(|e| e.to_string())?;
        let theta0 = (rng.next_u64() % n_in as u64) as usize;
        let dirac = InformationState::dirac(&input, &input.atoms()[theta0]).unwrap();
        let expected =
            InformationState::dirac(&out, &out.atoms()[phi_out.apply_index(theta0)]).unwrap();
        for event in all_events(n_omega).into_iter().filter(|e| !e.is_empty()) {
            let prob = outcome_law(&outcome_marginal(&ext), &dirac)
                .unwrap()
                .prob_of_event(&event);
            if prob <= 1e-12 {
                continue;
            }
            let post = posterior(&ext, &dirac, &event).map_err(|e| e.to_string())?;
            ensure(
                post.weights() == expected.weights(),
                "dirac input did not map to the dirac of its output atom",
            )?;
        }
    }
    Ok(())
}

fn random_gaussian_matrix(rng: &mut CounterRng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let (re, im) = rng.next_gaussian_pair();
        Complex64::new(re, im)
    })
}

fn inverse_sqrt(m: &CMatrix) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| Complex64::new(1.0 / l.max(1e-12).sqrt(), 0.0)),
    );
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

fn random_qeo(
    rng: &mut CounterRng,
    dh: usize,
    dk: usize,
    n_omega: usize,
    n_prep: usize,
) -> QuantumExtendedObservable {
    let eps = CMatrix::identity(dh, dh) * Complex64::new(1e-3, 0.0);
    let gram: Vec<Vec<CMatrix>> = (0..n_omega)
        .map(|_| {
            (0..n_prep)
                .map(|_| {
                    let m = random_gaussian_matrix(rng, dh, dh);
                    &m * m.adjoint() + &eps
                })
                .collect()
        })
        .collect();
    let mut sum = CMatrix::zeros(dh, dh);
    for row in &gram {
        for g in row {
            sum += g;
        }
    }
    let half = inverse_sqrt(&sum);
    let operators = gram
        .iter()
        .map(|row| row.iter().map(|g| &half * g * &half).collect())
        .collect();
    let prepared = (0..n_prep)
        .map(|j| haar_state(dk, rng.next_u64(), j as u64))
        .collect();
    QuantumExtendedObservable::new(space("w", n_omega), prepared, operators)
        .expect("normalized random operators form a qeo")
}

fn c6_theorem3() -> Check {
    let start = Instant::now();
    let mut rng = CounterRng::new(0xacce06, 0);
    for _ in 0..200 {
        let dh = 2 + (rng.next_u64() % 3) as usize;
        let dk = 2 + (rng.next_u64() % 3) as usize;
        let n_omega = 1 + (rng.next_u64() % 3) as usize;
        let n_prep = 1 + (rng.next_u64() % 5) as usize;
        let qeo = random_qeo(&mut rng, dh, dk, n_omega, n_prep);
        for event in all_events(n_omega) {
            let op = state_instrument(&qeo, &event).map_err(|e| e.to_string())?;
            let (cp, min) = is_completely_positive(&op, 1e-9);
            ensure(cp, format!("instrument not CP: min Choi eigenvalue {min:.3e}"))?;
        }
        let full: Vec<usize> = (0..n_omega).collect();
        let op = state_instrument(&qeo, &full).unwrap();
        ensure(
            is_trace_preserving(&op, 1e-10),
            "full-event instrument is not trace preserving",
        )?;
    }
    let (cp, min) = is_completely_positive(&SuperOperator::transpose_map(2), 1e-9);
    ensure(
        !cp && min <= -0.49,
        format!("transpose map not rejected (min {min:.3e})"),
    )?;
    ensure(start.elapsed().as_secs_f64() < 30.0, "Theorem 3 sweep ran over 30 s")
}

fn c7_nogo() -> Check {
    let qout = FiniteSpace::new(["0", "1"]).unwrap();
    let pvm = Povm::computational_basis(qout);
    let report = nogo_scan(&pvm, 1000, 0xacce07, 1e-9).map_err(|e| e.to_string())?;
    ensure(
        report.deterministic_count == 0,
        format!("{} Haar states claimed deterministic", report.deterministic_count),
    )?;
    ensure(
        nogo_deterministic_response(&PureState::basis(2, 0), &pvm, 1e-9).unwrap() == Some(0),
        "|0> lost its deterministic assignment",
    )?;
    ensure(
        nogo_deterministic_response(&PureState::basis(2, 1), &pvm, 1e-9).unwrap() == Some(1),
        "|1> lost its deterministic assignment",
    )?;
    let s = 1.0 / 2f64.sqrt();
    let plus = PureState::new(nalgebra::DVector::from_vec(vec![
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
    ]))
    .unwrap();
    ensure(
        nogo_deterministic_response(&plus, &pvm, 1e-9).unwrap().is_none(),
        "|+> claimed a deterministic assignment",
    )?;
    let proj = plus.projector();
    for e in pvm.effects() {
        let t = trace(&(&proj * e)).re;
        ensure((t - 0.5).abs() <= 1e-12, format!("|+> trace {t} is not 0.5"))?;
    }
    Ok(())
}

fn parity_setup() -> (ExtendedKernel, InformationState) {
    let theta = FiniteSpace::new(["0", "1", "2", "3"]).unwrap();
    let parity = FiniteSpace::new(["even", "odd"]).unwrap();
    let phi = MeasurableMap::from_pairs(
        theta.clone(),
        parity,
        &[("0", "even"), ("1", "odd"), ("2", "even"), ("3", "odd")],
    )
    .unwrap();
    let ext = beable_extended(&phi, &MeasurableMap::identity(&theta)).unwrap();
    (ext, InformationState::uniform(&theta))
}

fn collapse_setup() -> (QuantumExtendedObservable, DensityMatrix) {
    let pvm = Povm::computational_basis(FiniteSpace::new(["0", "1"]).unwrap());
    let qeo = QuantumExtendedObservable::collapse(
        &pvm,
        vec![PureState::basis(2, 0), PureState::basis(2, 1)],
    )
    .unwrap();
    let s = 1.0 / 2f64.sqrt();
    let plus = PureState::new(nalgebra::DVector::from_vec(vec![
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
    ]))
    .unwrap();
    (qeo, plus.density())
}

fn c8_monte_carlo() -> Check {
    let (ext, pi) = parity_setup();
    let start = Instant::now();
    let report = run_classical(&ext, &pi, 200_000, 0xacce08, 1).map_err(|e| e.to_string())?;
    ensure(
        start.elapsed().as_secs_f64() < 10.0,
        "classical run took over 10 s",
    )?;
    ensure(report.outcome_tv <= 0.01, format!("law TV {:.4}", report.outcome_tv))?;
    let even = report
        .conditionals
        .iter()
        .find(|c| c.event == "even")
        .ok_or("missing conditional for `even`")?;
    ensure(even.exact == vec![0.5, 0.0, 0.5, 0.0], "exact posterior | even is off")?;
    let odd = report
        .conditionals
        .iter()
        .find(|c| c.event == "odd")
        .ok_or("missing conditional for `odd`")?;
    ensure(odd.exact == vec![0.0, 0.5, 0.0, 0.5], "exact posterior | odd is off")?;
    ensure(odd.tv <= 0.01, format!("posterior | odd TV {:.4}", odd.tv))?;
    // DKW-style consistency at growing N.
    for n in [1_000u64, 10_000, 100_000] {
        let r = run_classical(&ext, &pi, n, 0xacce08, 1).unwrap();
        let bound = dkw_bound(n, r.outcome_atoms.len());
        ensure(r.outcome_tv <= bound, format!("N={n}: TV {} above {bound}", r.outcome_tv))?;
    }

    let (qeo, rho) = collapse_setup();
    let start = Instant::now();
    let qreport = run_quantum(&qeo, &rho, 200_000, 0xacce08, 1).map_err(|e| e.to_string())?;
    ensure(
        start.elapsed().as_secs_f64() < 10.0,
        "quantum run took over 10 s",
    )?;
    for (i, &f) in qreport.empirical_outcome.iter().enumerate() {
        ensure((f - 0.5).abs() <= 0.01, format!("outcome {i} frequency {f}"))?;
    }

    // Byte-identical reports at 1, 2, and 8 worker threads.
    for threads in [2usize, 8] {
        let r = run_classical(&ext, &pi, 200_000, 0xacce08, threads).unwrap();
        let (a, b) = (
            serde_json::to_vec(&report).unwrap(),
            serde_json::to_vec(&r).unwrap(),
        );
        ensure(a == b, format!("classical report differs at {threads} threads"))?;
        let q = run_quantum(&qeo, &rho, 200_000, 0xacce08, threads).unwrap();
        let (a, b) = (
            serde_json::to_vec(&qreport).unwrap(),
            serde_json::to_vec(&q).unwrap(),
        );
        ensure(a == b, format!("quantum report differs at {threads} threads"))?;
    }
    Ok(())
}

fn c9_reduction_witness() -> Check {
    let (ext, pi) = parity_setup();
    let even = ext.outcome().event_indices(&["even"]).unwrap();
    let post = posterior(&ext, &pi, &even).map_err(|e| e.to_string())?;
    let tv = total_variation(&post, &pi).unwrap();
    ensure(
        (tv - 0.5).abs() <= 1e-15,
        format!("reduction TV {tv} differs from 0.5"),
    )
}

// ------------------------------------------------------------- CLI goldens

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_finexp")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

struct CliCase {
    name: &'static str,
    args: Vec<String>,
    exit: i32,
    /// Compare stdout against the committed golden file.
    golden: bool,
}

fn cli_cases() -> Vec<CliCase> {
    let model = fixture("model.json");
    let m = |rest: &[&str]| -> Vec<String> {
        rest.iter().map(|s| s.to_string()).collect()
    };
    vec![
        CliCase {
            name: "law_kernel",
            args: m(&["law", "--model", &model, "--kernel", "parity_obs", "--state", "uniform"]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "law_born",
            args: m(&["law", "--model", &model, "--rho", "plus", "--povm", "Z"]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "posterior_classical",
            args: m(&[
                "posterior", "--model", &model, "--extended", "parity_beable", "--state",
                "uniform", "--event", "even",
            ]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "posterior_quantum",
            args: m(&[
                "posterior", "--model", &model, "--qeo", "collapse", "--rho", "plus", "--event",
                "0",
            ]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "instrument",
            args: m(&[
                "instrument", "--model", &model, "--extended", "parity_beable", "--state",
                "uniform", "--event", "even",
            ]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "check_trivial_pass",
            args: m(&["check", "trivial", "--model", &model, "--kernel", "noise"]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "check_trivial_fail",
            args: m(&["check", "trivial", "--model", &model, "--kernel", "parity_obs"]),
            exit: 3,
            golden: true,
        },
        CliCase {
            name: "check_observable",
            args: m(&["check", "observable", "--model", &model, "--kernel", "parity_obs"]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "check_nonperturbing",
            args: m(&[
                "check", "nonperturbing", "--model", &model, "--extended", "parity_beable",
                "--space", "Theta", "--phi-in", "id", "--phi-out", "id",
            ]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "check_cp_collapse",
            args: m(&["check", "cp", "--model", &model, "--qeo", "collapse", "--event", "0"]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "check_cp_transpose",
            args: m(&["check", "cp", "--model", &model, "--superop", "transpose"]),
            exit: 3,
            golden: true,
        },
        CliCase {
            name: "check_tp_collapse",
            args: m(&["check", "tp", "--model", &model, "--qeo", "collapse"]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "simulate_classical",
            args: m(&[
                "simulate", "--model", &model, "--extended", "parity_beable", "--state",
                "uniform", "--trials", "20", "--seed", "7", "--threads", "2", "--records",
            ]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "simulate_quantum",
            args: m(&[
                "simulate", "--model", &model, "--qeo", "collapse", "--rho", "plus", "--trials",
                "20", "--seed", "7",
            ]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "nogo_scan",
            args: m(&["nogo", "--model", &model, "--pvm", "Z", "--samples", "50", "--seed", "3"]),
            exit: 0,
            golden: true,
        },
        CliCase {
            name: "bad_model",
            args: m(&["law", "--model", &fixture("bad.json"), "--kernel", "K", "--state", "x"]),
            exit: 2,
            golden: false,
        },
        CliCase {
            name: "zero_probability_event",
            args: m(&[
                "posterior", "--model", &model, "--extended", "parity_beable", "--state",
                "point0", "--event", "odd",
            ]),
            exit: 4,
            golden: false,
        },
        CliCase {
            name: "missing_model_file",
            args: m(&["law", "--model", "/nonexistent.json", "--kernel", "k", "--state", "s"]),
            exit: 2,
            golden: false,
        },
    ]
}

fn run_cli(args: &[String]) -> (Vec<u8>, i32) {
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn c10_cli_contract() -> Check {
    let bless = std::env::var_os("BLESS_GOLDEN").is_some();
    let mut seen_codes = std::collections::BTreeSet::new();
    for case in cli_cases() {
        let (stdout, code) = run_cli(&case.args);
        seen_codes.insert(code);
        ensure(
            code == case.exit,
            format!("{}: exit {code}, expected {}", case.name, case.exit),
        )?;
        let (stdout2, code2) = run_cli(&case.args);
        ensure(
            stdout == stdout2 && code == code2,
            format!("{}: output not reproducible", case.name),
        )?;
        if case.golden {
            let path = golden_path(case.name);
            if bless {
                std::fs::create_dir_all(path.parent().unwrap()).unwrap();
                std::fs::write(&path, &stdout).unwrap();
            }
            let expected = std::fs::read(&path)
                .map_err(|e| format!("{}: missing golden file ({e})", case.name))?;
            ensure(
                stdout == expected,
                format!("{}: stdout differs from golden file", case.name),
            )?;
        }
    }
    ensure(
        [0, 2, 3, 4].iter().all(|c| seen_codes.contains(c)),
        format!("exit codes exercised: {seen_codes:?}"),
    )
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("statistical-axiom affinity", c1_affinity),
        ("affine-family round trip", c2_round_trip),
        ("convolution equivalence", c3_convolution),
        ("Bayes oracle", c4_bayes_oracle),
        ("non-perturbing structure", c5_nonperturbing),
        ("instrument complete positivity", c6_theorem3),
        ("no-go demonstrator", c7_nogo),
        ("Monte Carlo consistency", c8_monte_carlo),
        ("reduction witness", c9_reduction_witness),
        ("CLI contract", c10_cli_contract),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(()) => println!("criterion {:2} ({name}): pass", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:2} ({name}): FAIL - {msg}", i + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
