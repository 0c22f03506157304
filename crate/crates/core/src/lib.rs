//! Core library: channel model, slot allocation, receivers, and the Monte
//! Carlo outage engine for RIS-assisted grant-free uplinks.

pub mod allocation;
pub mod channel;
pub mod error;
pub mod matrix;
pub mod outage;
pub mod phasesearch;
pub mod receivers;

pub use allocation::{apply_plan, build_plan, AllocationPlan, Scheme};
pub use channel::{
    effective_channel, phase_set, sample_realization, ChannelRealization, PhaseConfig, SystemDims,
};
pub use error::{CoreError, Result};
pub use matrix::ComplexMatrix;
pub use outage::{
    estimate_outage, max_rate, run_trial, siso_outage_closed_form, trial_rng, ExperimentConfig,
    OutageEstimate,
};
pub use phasesearch::{
    best_config, enumerate_configs, evaluate_configs, PhaseTableRow, MAX_ENUMERATION_BITS,
};
pub use receivers::{
    linear_post_sinr, mmse_filter, mmse_sic_sinr, mmse_sic_sinr_with_order, zf_filter, LinkParams,
    Receiver, SinrReport,
};
