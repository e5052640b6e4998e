//! A finite-instance toolkit for a general probabilistic description of
//! experiments: information states on finite atom sets, generalized
//! observables as row-stochastic kernels, extended observables with their
//! instruments and posterior states, the quantum instantiation with
//! complete-positivity certificates and a deterministic-response no-go scan,
//! and a reproducible Monte Carlo trial simulator.

pub mod error;
pub mod experiments;
pub mod measure;
pub mod model;
pub mod observables;
pub mod quantum;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use experiments::{
    beable_extended, check_nonperturbing, extended_from_maps, factorized_extended,
    instrument_value, is_mean_determined, mean_state, outcome_marginal, posterior, posterior_mean,
    system_marginal, Embedding, ExtendedKernel, MeanLaw, MeanState,
};
pub use measure::{
    total_variation, FiniteSpace, InformationState, MeasurableMap, SubMeasure, DEFAULT_TOL,
};
pub use model::{parse_model, parse_model_with_tol, serialize_model, ModelFile, Tolerances};
pub use observables::{
    beable_kernel, convolve, from_affine_family, indicator_kernel, is_observable, is_trivial,
    marginals, outcome_law, preimage, product, subordinate, Kernel, OutcomeLaw,
};
pub use quantum::{
    born_law, choi, is_completely_positive, is_trace_preserving, nogo_deterministic_response,
    nogo_scan, nogo_scan_states, q_outcome_marginal, q_posterior, state_instrument, ChoiMatrix,
    DensityMatrix, NogoReport, Povm, PureState, QuantumExtendedObservable, SuperOperator,
    CHOI_TOL, QUANTUM_TOL,
};
pub use rng::CounterRng;
pub use sim::{run_classical, run_quantum, SimulationReport, TrialRecord};
