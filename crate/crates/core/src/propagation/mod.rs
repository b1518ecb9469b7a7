//! End-to-end propagation of mixed aleatory and epistemic uncertainty.

pub mod extremize;
pub mod mcs;
pub mod models;
pub mod mpdem;
pub mod problem;
pub mod result;

pub use extremize::{
    cell_limits, extremize_interval, extremize_pbox_input, greedy_allocation, masses_from_cumulative, PBoxExtremes,
};
pub use mcs::{dl_mcs, vertex_mcs, vertex_samples, DlMcsSettings, VertexSettings, DEFAULT_BUDGET};
pub use models::{crash_input_names, BlackBoxResponse, BoucWenFrameModel, SdofSteadyStateModel, SdofVarianceModel};
pub use mpdem::{propagate_mpdem, run_mpdem, MpdemRun, MpdemSettings};
pub use problem::{AnalyticDensity, HybridProblem, ResponseModel};
pub use result::{
    empirical_cdf, envelope_check, interpolate_cdf, kolmogorov_distance, span_grid, CdfMember, EnvelopeReport,
    PBoxResult, Provenance,
};
