use log::debug;

use super::population::{EntrantRule, McOptions, Population, MIN_PARTICLES, MIN_SEEDED};
use super::stats::{empirical_values_density, ks_statistic};
use crate::error::{Error, Result};
use crate::udist::{UDensity, UGrid};

/// State of a population at one snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct McSnapshot {
    pub tau: f64,
    pub particles: usize,
    /// Current values of the localized particles, in particle order.
    pub values: Vec<f64>,
}

impl McSnapshot {
    fn take(pop: &Population) -> Self {
        McSnapshot {
            tau: pop.tau(),
            particles: pop.len(),
            values: pop.localized_values(),
        }
    }

    pub fn localized_fraction(&self) -> f64 {
        self.values.len() as f64 / self.particles as f64
    }

    pub fn density(&self, grid: UGrid) -> Result<UDensity> {
        empirical_values_density(&self.values, grid)
    }

    pub fn ks_distance(&self, reference: &UDensity) -> Result<f64> {
        ks_statistic(&self.values, &reference.cdf()?)
    }

    pub fn mean(&self) -> Result<f64> {
        if self.values.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        Ok(self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    /// Standard error of [`McSnapshot::mean`].
    pub fn standard_error(&self) -> Result<f64> {
        let n = self.values.len();
        if n < 2 {
            return Err(Error::EmptyPopulation);
        }
        let mean = self.mean()?;
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok((var / n as f64).sqrt())
    }
}

/// Final population plus the requested snapshots.
#[derive(Debug, Clone)]
pub struct McRun {
    pub population: Population,
    pub snapshots: Vec<McSnapshot>,
}

fn check_times(tau_end: f64, snapshot_taus: &[f64]) -> Result<()> {
    if !(tau_end >= 0.0 && tau_end.is_finite()) {
        return Err(Error::domain(format!(
            "end time must be nonnegative, got {tau_end}"
        )));
    }
    if snapshot_taus.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::UnorderedTimes);
    }
    if let Some(t) = snapshot_taus
        .iter()
        .find(|t| !(**t >= 0.0 && **t <= tau_end))
    {
        return Err(Error::domain(format!(
            "snapshot time {t} outside [0, {tau_end}]"
        )));
    }
    Ok(())
}

fn check_size(particles: usize) -> Result<()> {
    if particles < MIN_PARTICLES {
        return Err(Error::domain(format!(
            "population of {particles} is below the minimum of {MIN_PARTICLES}"
        )));
    }
    Ok(())
}

/// Runs `pop` to `tau_end`, recording a snapshot at each requested time.
pub fn advance(mut pop: Population, tau_end: f64, snapshot_taus: &[f64]) -> Result<McRun> {
    check_times(tau_end, snapshot_taus)?;
    let mut snapshots = Vec::with_capacity(snapshot_taus.len());
    for &t in snapshot_taus {
        if t < pop.tau() {
            return Err(Error::domain(format!(
                "snapshot time {t} precedes the population time {}",
                pop.tau()
            )));
        }
        pop.run_until(t)?;
        snapshots.push(McSnapshot::take(&pop));
    }
    pop.run_until(tau_end)?;
    debug!(
        "population of {} at tau = {tau_end}: {} events, {} conversions",
        pop.len(),
        pop.events(),
        pop.conversions()
    );
    Ok(McRun {
        population: pop,
        snapshots,
    })
}

/// Fully localized population started from `opts.initial`.
pub fn run_steady_with(tau_end: f64, snapshot_taus: &[f64], opts: &McOptions) -> Result<McRun> {
    check_size(opts.particles)?;
    check_times(tau_end, snapshot_taus)?;
    let pop = Population::seeded(opts, opts.particles)?;
    advance(pop, tau_end, snapshot_taus)
}

pub fn run_steady(
    particles: usize,
    tau_end: f64,
    seed: u64,
    snapshot_taus: &[f64],
) -> Result<McRun> {
    run_steady_with(tau_end, snapshot_taus, &McOptions::new(particles, seed))
}

/// Number of initially localized particles for a seed fraction `g0`.
pub fn seeded_count(particles: usize, g0: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&g0) {
        return Err(Error::domain(format!("g0 must lie in [0, 1], got {g0}")));
    }
    let k = ((g0 * particles as f64) - 1e-9).ceil().max(0.0) as usize;
    if g0 > 0.0 && k < MIN_SEEDED {
        return Err(Error::domain(format!(
            "g0 = {g0} seeds only {k} of {particles} particles; need at least {MIN_SEEDED}"
        )));
    }
    Ok(k.min(particles))
}

/// A fraction `g0` of particles starts localized, the rest delocalized.
pub fn run_transient_with(
    g0: f64,
    tau_end: f64,
    snapshot_taus: &[f64],
    opts: &McOptions,
) -> Result<McRun> {
    check_size(opts.particles)?;
    check_times(tau_end, snapshot_taus)?;
    let k = seeded_count(opts.particles, g0)?;
    let pop = Population::seeded(opts, k)?;
    advance(pop, tau_end, snapshot_taus)
}

pub fn run_transient(
    particles: usize,
    g0: f64,
    tau_end: f64,
    seed: u64,
    entrant: EntrantRule,
    snapshot_taus: &[f64],
) -> Result<McRun> {
    let opts = McOptions {
        entrant,
        ..McOptions::new(particles, seed)
    };
    run_transient_with(g0, tau_end, snapshot_taus, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        assert!(run_steady(999, 1.0, 1, &[]).is_err());
        assert!(run_steady(1000, 1.0, 1, &[0.5, 0.2]).is_err());
        assert!(run_steady(1000, 1.0, 1, &[2.0]).is_err());
        assert!(run_transient(1000, 0.005, 1.0, 1, EntrantRule::Adopt, &[]).is_err());
        assert_eq!(seeded_count(200_000, 0.01).unwrap(), 2000);
        assert_eq!(seeded_count(1000, 0.0).unwrap(), 0);
    }

    #[test]
    fn same_seed_same_run() {
        let a = run_transient(2000, 0.05, 4.0, 11, EntrantRule::Adopt, &[1.0, 3.0]).unwrap();
        let b = run_transient(2000, 0.05, 4.0, 11, EntrantRule::Adopt, &[1.0, 3.0]).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.population.states(), b.population.states());
        let c = run_transient(2000, 0.05, 4.0, 12, EntrantRule::Adopt, &[1.0, 3.0]).unwrap();
        assert_ne!(a.population.states(), c.population.states());
    }

    #[test]
    fn snapshots_do_not_perturb_events() {
        let a = run_steady(1000, 3.0, 5, &[]).unwrap();
        let b = run_steady(1000, 3.0, 5, &[0.5, 1.0, 2.5]).unwrap();
        assert_eq!(a.population.states(), b.population.states());
        assert_eq!(a.population.events(), b.population.events());
    }

    #[test]
    fn localized_count_never_decreases() {
        let taus: Vec<f64> = (1..=20).map(|k| 0.5 * k as f64).collect();
        let run = run_transient(1000, 0.02, 10.0, 3, EntrantRule::Adopt, &taus).unwrap();
        let counts: Vec<usize> = run.snapshots.iter().map(|s| s.values.len()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
        assert!(run.population.localized_fraction() > 0.9);
    }

    #[test]
    fn full_seed_is_steady_semantics() {
        let opts = McOptions::new(1000, 9);
        let a = run_transient_with(1.0, 2.0, &[1.0], &opts).unwrap();
        let b = run_steady_with(2.0, &[1.0], &opts).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.population.conversions(), 0);
    }
}
