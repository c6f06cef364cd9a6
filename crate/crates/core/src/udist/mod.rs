//! Distributions of dimensionless squared localization lengths on a uniform
//! grid and the operators acting on them.

mod density;
mod drift;
mod grid;
mod kernel;
mod units;

pub use density::{Cdf, InitialProfile, UDensity};
pub use drift::{drift_shift, drift_shift_tracked, Drifted, LostMass, DEFAULT_LOST_MASS_CAP};
pub use grid::UGrid;
pub use kernel::{collision_kernel, collision_kernel_with, combine, pair_mean_combine, Deposition};
pub use units::{
    validate_regime, Conversion, RegimeReport, UnitsMap, Verdict, DEFAULT_REGIME_THRESHOLD,
};

pub(crate) use drift::shift_masses;
pub(crate) use kernel::{combine_unchecked, KernelPlan};
