//! Experiment orchestration: configuration, shot loop, clustering, reports.

mod cluster;
mod initial;
mod run;

pub use cluster::{
    cluster_samples, FciAssignment, LeadingDeterminant, StateCluster, DEFAULT_CLUSTER_TOLERANCE,
};
pub use initial::parse_initial_state;
pub use run::{
    default_orbital_names, default_window, excitation_label, excitation_report, run_experiment,
    shot_seeds, ExcitationLine, ExcitationReport, ExperimentConfig, InitialTerm, OverlapLine,
    Provenance, RunOutput, SystemInfo, TrotterOrder, FORMAT_TAG, OVERLAP_REPORT_THRESHOLD,
};
