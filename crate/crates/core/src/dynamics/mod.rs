//! Deterministic simulators `h(θ, t)` and their excitations.

pub mod blackbox;
pub mod boucwen;
pub mod forcing;
pub mod sdof;
pub mod spectrum;
pub mod trajectory;

pub use blackbox::{run_external_model, BlackBoxModel, CrashSurrogate, ModelSchema, ParameterRow, CRASH_OUTPUT};
pub use boucwen::{
    boucwen_rate, simulate_boucwen, simulate_frame, BaberNoori, BoucWenParams, HysteresisLaw, MDOFBoucWenConfig,
    ShearFrame,
};
pub use forcing::ForcingSeries;
pub use sdof::{generate_white_noise, sdof_stationary_variance, simulate_sdof, simulate_sdof_from, SDOFConfig};
pub use spectrum::{generate_spectral_realization, ipsd_normalize, IPSDConfig, SpectralGenerator};
pub use trajectory::{response_max, Trajectory};
