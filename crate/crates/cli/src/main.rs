//! Command-line surface over the model-file loader: laws, posteriors,
//! instruments, structural checks, CP/TP certification, trial simulation,
//! and the no-go scan. Results go to stdout as canonical JSON (sorted keys);
//! diagnostics go to stderr.
//!
//! Exit codes: 0 success, 2 parse/validation error, 3 a check returned
//! false, 4 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use finexp::experiments::posterior_with_tol;
use finexp::model::{parse_model_with_tol, ModelFile, Tolerances};
use finexp::observables::is_trivial;
use finexp::quantum::{
    born_law, is_completely_positive, is_trace_preserving, nogo_scan, q_posterior_with_tol,
    state_instrument, SuperOperator, CHOI_TOL,
};
use finexp::sim::{run_classical, run_quantum};
use finexp::{
    check_nonperturbing, instrument_value, is_observable, outcome_law, Error, FiniteSpace,
    InformationState, Kernel, DEFAULT_TOL, QUANTUM_TOL,
};

#[derive(Parser)]
#[command(name = "finexp", version, about = "Finite experiment toolkit")]
struct Cli {
    /// Override every validation tolerance with one value.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArg {
    /// Path to the JSON model file.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Outcome law of a kernel in a state, or Born law of a POVM in a density.
    Law {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        povm: Option<String>,
    },
    /// Conditional posterior state given an outcome event.
    Posterior {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        extended: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        qeo: Option<String>,
        #[arg(long)]
        rho: Option<String>,
        /// Comma-separated outcome atom labels.
        #[arg(long)]
        event: String,
    },
    /// Unnormalized instrument value on the output space.
    Instrument {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        extended: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        event: String,
    },
    /// Structural and channel checks; exit 3 when the check fails.
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// Monte Carlo trial simulation.
    Simulate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        extended: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        qeo: Option<String>,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Include per-trial records in the report.
        #[arg(long)]
        records: bool,
    },
    /// Deterministic-response scan over Haar-random pure states.
    Nogo {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        pvm: String,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Is the kernel trivial (identical rows)?
    Trivial {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        kernel: String,
    },
    /// Is the kernel an observable of a deterministic set-up?
    Observable {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        kernel: String,
    },
    /// Does the extended kernel factorize non-perturbingly in the given chart?
    Nonperturbing {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        extended: String,
        /// Preimage space name.
        #[arg(long)]
        space: String,
        /// Map from the preimage space onto the extended kernel's input.
        #[arg(long)]
        phi_in: String,
        /// Map from the preimage space onto the extended kernel's output.
        #[arg(long)]
        phi_out: String,
    },
    /// Complete positivity of a state instrument or stored superoperator.
    Cp {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        qeo: Option<String>,
        /// Outcome event for the instrument; defaults to the full space.
        #[arg(long)]
        event: Option<String>,
        #[arg(long)]
        superop: Option<String>,
    },
    /// Trace preservation of a state instrument or stored superoperator.
    Tp {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        qeo: Option<String>,
        #[arg(long)]
        event: Option<String>,
        #[arg(long)]
        superop: Option<String>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(err: Error) -> Self {
        Self {
            code: 4,
            message: err.to_string(),
        }
    }
}

fn validation(err: Error) -> Failure {
    Failure {
        code: 2,
        message: err.to_string(),
    }
}

type CliResult = std::result::Result<(Value, u8), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = cli.tol;
    match run(cli) {
        Ok((result, code)) => {
            let output = json!({
                "result": result,
                "tol": effective_tol(tol),
            });
            println!("{}", serde_json::to_string_pretty(&output).expect("valid JSON"));
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn effective_tol(over: Option<f64>) -> Value {
    match over {
        Some(t) => json!({ "classical": t, "quantum": t, "choi": t }),
        None => json!({ "classical": DEFAULT_TOL, "quantum": QUANTUM_TOL, "choi": CHOI_TOL }),
    }
}

fn tolerances(over: Option<f64>) -> Tolerances {
    match over {
        Some(t) => Tolerances::uniform(t),
        None => Tolerances::default(),
    }
}

fn load(path: &PathBuf, tol: Option<f64>) -> std::result::Result<ModelFile, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_model_with_tol(&bytes, tolerances(tol)).map_err(validation)
}

fn named<'a, T>(
    section: &'a std::collections::BTreeMap<String, T>,
    name: &str,
    kind: &str,
) -> std::result::Result<&'a T, Failure> {
    section
        .get(name)
        .ok_or_else(|| Failure::usage(format!("no {kind} named `{name}` in model")))
}

fn quantum<'a>(
    model: &'a ModelFile,
) -> std::result::Result<&'a finexp::model::QuantumSection, Failure> {
    model
        .quantum
        .as_ref()
        .ok_or_else(|| Failure::usage("model has no quantum section"))
}

fn parse_event(space: &FiniteSpace, event: &str) -> std::result::Result<Vec<usize>, Failure> {
    let labels: Vec<&str> = event.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    space.event_indices(&labels).map_err(validation)
}

fn state_json(state: &InformationState) -> Value {
    json!({ "atoms": state.space().atoms(), "weights": state.weights() })
}

fn kernel_json(k: &Kernel) -> Value {
    json!({
        "input": k.input().atoms(),
        "outcome": k.outcome().atoms(),
        "rows": k.rows(),
    })
}

fn run(cli: Cli) -> CliResult {
    let tol = cli.tol;
    let classical_tol = tol.unwrap_or(DEFAULT_TOL);
    let quantum_tol = tol.unwrap_or(QUANTUM_TOL);
    match cli.command {
        Command::Law {
            model,
            kernel,
            state,
            rho,
            povm,
        } => {
            let m = load(&model.model, tol)?;
            let law = match (kernel, state, rho, povm) {
                (Some(k), Some(s), None, None) => {
                    let k = named(&m.kernels, &k, "kernel")?;
                    let s = named(&m.states, &s, "state")?;
                    outcome_law(k, s).map_err(Failure::runtime)?
                }
                (None, None, Some(r), Some(p)) => {
                    let q = quantum(&m)?;
                    let r = named(&q.densities, &r, "density")?;
                    let p = named(&q.povms, &p, "povm")?;
                    born_law(r, p).map_err(Failure::runtime)?
                }
                _ => {
                    return Err(Failure::usage(
                        "law needs either --kernel and --state, or --rho and --povm",
                    ))
                }
            };
            Ok((
                json!({ "outcome": law.outcome().atoms(), "probabilities": law.probabilities() }),
                0,
            ))
        }
        Command::Posterior {
            model,
            extended,
            state,
            qeo,
            rho,
            event,
        } => {
            let m = load(&model.model, tol)?;
            match (extended, state, qeo, rho) {
                (Some(e), Some(s), None, None) => {
                    let ext = named(&m.extended, &e, "extended kernel")?;
                    let s = named(&m.states, &s, "state")?;
                    let ev = parse_event(ext.outcome(), &event)?;
                    let post = posterior_with_tol(ext, s, &ev, classical_tol)
                        .map_err(Failure::runtime)?;
                    Ok((state_json(&post), 0))
                }
                (None, None, Some(qn), Some(rn)) => {
                    let q = quantum(&m)?;
                    let qeo = named(&q.qeos, &qn, "qeo")?;
                    let r = named(&q.densities, &rn, "density")?;
                    let ev = parse_event(qeo.outcome(), &event)?;
                    let (post, weights) = q_posterior_with_tol(qeo, r, &ev, quantum_tol)
                        .map_err(Failure::runtime)?;
                    let mat: Vec<Vec<(f64, f64)>> = (0..post.dim())
                        .map(|i| {
                            (0..post.dim())
                                .map(|j| {
                                    let z = post.matrix()[(i, j)];
                                    (z.re, z.im)
                                })
                                .collect()
                        })
                        .collect();
                    Ok((json!({ "density": mat, "weights": weights }), 0))
                }
                _ => Err(Failure::usage(
                    "posterior needs either --extended and --state, or --qeo and --rho",
                )),
            }
        }
        Command::Instrument {
            model,
            extended,
            state,
            event,
        } => {
            let m = load(&model.model, tol)?;
            let ext = named(&m.extended, &extended, "extended kernel")?;
            let s = named(&m.states, &state, "state")?;
            let ev = parse_event(ext.outcome(), &event)?;
            let sub = instrument_value(ext, s, &ev).map_err(Failure::runtime)?;
            Ok((
                json!({
                    "atoms": sub.space().atoms(),
                    "weights": sub.weights(),
                    "total": sub.total(),
                }),
                0,
            ))
        }
        Command::Check { what } => check(what, tol),
        Command::Simulate {
            model,
            extended,
            state,
            qeo,
            rho,
            trials,
            seed,
            threads,
            records,
        } => {
            let m = load(&model.model, tol)?;
            let report = match (extended, state, qeo, rho) {
                (Some(e), Some(s), None, None) => {
                    let ext = named(&m.extended, &e, "extended kernel")?;
                    let s = named(&m.states, &s, "state")?;
                    run_classical(ext, s, trials, seed, threads).map_err(Failure::runtime)?
                }
                (None, None, Some(qn), Some(rn)) => {
                    let q = quantum(&m)?;
                    let qeo = named(&q.qeos, &qn, "qeo")?;
                    let r = named(&q.densities, &rn, "density")?;
                    run_quantum(qeo, r, trials, seed, threads).map_err(Failure::runtime)?
                }
                _ => {
                    return Err(Failure::usage(
                        "simulate needs either --extended and --state, or --qeo and --rho",
                    ))
                }
            };
            let mut value = serde_json::to_value(&report).expect("report serializes");
            if !records {
                value.as_object_mut().unwrap().remove("records");
            }
            Ok((value, 0))
        }
        Command::Nogo {
            model,
            pvm,
            samples,
            seed,
        } => {
            let m = load(&model.model, tol)?;
            let q = quantum(&m)?;
            let p = named(&q.povms, &pvm, "povm")?;
            let report =
                nogo_scan(p, samples, seed, quantum_tol.max(1e-9)).map_err(Failure::runtime)?;
            Ok((serde_json::to_value(&report).expect("report serializes"), 0))
        }
    }
}

fn check(what: CheckCommand, tol: Option<f64>) -> CliResult {
    let classical_tol = tol.unwrap_or(DEFAULT_TOL);
    let quantum_tol = tol.unwrap_or(QUANTUM_TOL);
    let choi_tol = tol.unwrap_or(CHOI_TOL);
    match what {
        CheckCommand::Trivial { model, kernel } => {
            let m = load(&model.model, tol)?;
            let k = named(&m.kernels, &kernel, "kernel")?;
            match is_trivial(k, classical_tol) {
                Some(witness) => Ok((
                    json!({ "pass": true, "witness": witness.probabilities() }),
                    0,
                )),
                None => Ok((json!({ "pass": false, "witness": Value::Null }), 3)),
            }
        }
        CheckCommand::Observable { model, kernel } => {
            let m = load(&model.model, tol)?;
            let k = named(&m.kernels, &kernel, "kernel")?;
            let pass = is_observable(k, classical_tol);
            Ok((json!({ "pass": pass }), if pass { 0 } else { 3 }))
        }
        CheckCommand::Nonperturbing {
            model,
            extended,
            space,
            phi_in,
            phi_out,
        } => {
            let m = load(&model.model, tol)?;
            let ext = named(&m.extended, &extended, "extended kernel")?;
            let sp = named(&m.spaces, &space, "space")?;
            let pin = named(&m.maps, &phi_in, "map")?;
            let pout = named(&m.maps, &phi_out, "map")?;
            match check_nonperturbing(ext, sp, pin, pout, classical_tol)
                .map_err(Failure::runtime)?
            {
                Some(factor) => Ok((json!({ "pass": true, "factor": kernel_json(&factor) }), 0)),
                None => Ok((json!({ "pass": false, "factor": Value::Null }), 3)),
            }
        }
        CheckCommand::Cp {
            model,
            qeo,
            event,
            superop,
        } => {
            let m = load(&model.model, tol)?;
            let op = resolve_superop(&m, qeo, event, superop)?;
            let (pass, min) = is_completely_positive(&op, choi_tol);
            Ok((
                json!({ "pass": pass, "min_eigenvalue": min }),
                if pass { 0 } else { 3 },
            ))
        }
        CheckCommand::Tp {
            model,
            qeo,
            event,
            superop,
        } => {
            let m = load(&model.model, tol)?;
            let op = resolve_superop(&m, qeo, event, superop)?;
            let pass = is_trace_preserving(&op, quantum_tol);
            Ok((json!({ "pass": pass }), if pass { 0 } else { 3 }))
        }
    }
}

fn resolve_superop(
    m: &ModelFile,
    qeo: Option<String>,
    event: Option<String>,
    superop: Option<String>,
) -> std::result::Result<SuperOperator, Failure> {
    match (qeo, superop) {
        (Some(qn), None) => {
            let q = quantum(m)?;
            let qeo = named(&q.qeos, &qn, "qeo")?;
            let ev = match event {
                Some(e) => parse_event(qeo.outcome(), &e)?,
                None => (0..qeo.outcome().len()).collect(),
            };
            state_instrument(qeo, &ev).map_err(Failure::runtime)
        }
        (None, Some(sn)) => {
            let q = quantum(m)?;
            Ok(named(&q.superops, &sn, "superoperator")?.clone())
        }
        _ => Err(Failure::usage("need exactly one of --qeo or --superop")),
    }
}
