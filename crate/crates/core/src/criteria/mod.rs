//! Numerical checks of the mixing, rigidity and singularity mechanisms.

pub mod scpa;
pub mod singular;
pub mod stretch;

pub use scpa::{c_band, c_measure_exact, coverage_check, displacement_check, overlap_check, scpa_band, scpa_band_check, sample_c_points, SCPASpec};
pub use singular::{rigid_start_points, singularity_partial_sums, singularity_sequence, terms_through, SpectralProbe};
pub use stretch::{default_bands, lower_level_check, stretch_check_x, stretch_check_y, MixingBandSpec};
