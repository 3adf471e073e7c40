//! Sample generators: white noise, truncated linear processes, ARH(1) and
//! ARH(p), and the exactly simulated O-U and Wong segment processes.

pub mod arh;
pub mod checks;
pub mod linear;
pub mod noise;
pub mod ou;
pub mod rng;
pub mod segment;
pub mod wong;

pub use arh::{companion_operator, simulate_arh1, simulate_arh_p, ArhSpec, SegmentedProcess, DEFAULT_BURNIN};
pub use checks::{invertibility_check, spectral_radius, stationarity_check, InvertibilityReport, StationarityReport};
pub use linear::{simulate_linear_process, LinearProcessSpec};
pub use noise::{fourier_basis, gen_white_noise, orthonormalize, NoiseSpec, DEFAULT_TERMS};
pub use ou::{ou_operator, simulate_ou_segments};
pub use segment::{concatenate, segment_path};
pub use wong::{simulate_wong_segments, wong_apply_exact, wong_c, wong_operator, wong_phi};
pub use rng::{derive_seed, std_normal, substream};
pub(crate) use checks::require_stationary;
