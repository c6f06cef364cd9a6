//! Event-driven population of particles: drift at unit rate, pairwise
//! contraction, and conversion of delocalized particles on contact.

pub mod checkpoint;
mod population;
mod run;
mod stats;

pub use population::{EntrantRule, McOptions, Population, MIN_PARTICLES, MIN_SEEDED};
pub use run::{
    advance, run_steady, run_steady_with, run_transient, run_transient_with, seeded_count, McRun,
    McSnapshot,
};
pub use stats::{empirical_density, empirical_values_density, ks_distance, ks_statistic};
