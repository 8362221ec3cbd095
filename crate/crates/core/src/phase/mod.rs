//! Phase estimation over either evolution backend, and phase-to-energy decoding.

mod estimator;
mod oracle;

pub use estimator::{
    decode_phase, estimate_cost, qpe_shot, rpe_shot, CostEstimate, EnergySample, Estimator,
    DEFAULT_RPE_REPETITIONS, MAX_APPLICATIONS,
};
pub use oracle::{
    fejer_probability, sample_fejer, Backend, EvolutionOracle, ExactOracle, TrotterOracle,
    CACHED_POWER_QUBITS,
};
