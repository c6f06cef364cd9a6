use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::udist::{combine_unchecked, InitialProfile};

/// Smallest population accepted by the run drivers.
pub const MIN_PARTICLES: usize = 1000;
/// Fewest initially localized particles for a seeded transient run.
pub const MIN_SEEDED: usize = 10;

/// Squared localization length given to a particle that localizes through
/// contact with a localized partner.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EntrantRule {
    /// Copy the partner's value, `combine(u, ∞) = u`.
    #[default]
    Adopt,
    /// `combine(u, cap)` for a finite cap.
    Cap(f64),
}

impl fmt::Display for EntrantRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntrantRule::Adopt => f.write_str("adopt"),
            EntrantRule::Cap(c) => write!(f, "cap:{c}"),
        }
    }
}

impl FromStr for EntrantRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "adopt" {
            return Ok(EntrantRule::Adopt);
        }
        s.strip_prefix("cap:")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|c| c.is_finite() && *c > 0.0)
            .map(EntrantRule::Cap)
            .ok_or_else(|| Error::config(format!("unknown entrant rule `{s}` (adopt | cap:<u>)")))
    }
}

/// Settings of a population run besides its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub particles: usize,
    pub seed: u64,
    /// Independent stream index under the same seed (replicas).
    pub replica: u64,
    /// Pair events per particle per unit time; 1 is the physical rate and 0
    /// switches events off.
    pub event_rate: f64,
    /// Values that drift past this are counted as overflow.
    pub ceiling: f64,
    pub initial: InitialProfile,
    pub entrant: EntrantRule,
}

impl McOptions {
    pub fn new(particles: usize, seed: u64) -> Self {
        McOptions {
            particles,
            seed,
            replica: 0,
            event_rate: 1.0,
            ceiling: 1e4,
            initial: InitialProfile::default(),
            entrant: EntrantRule::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::domain("a population needs at least two particles"));
        }
        if !(self.event_rate >= 0.0 && self.event_rate.is_finite()) {
            return Err(Error::domain(format!(
                "event rate must be nonnegative, got {}",
                self.event_rate
            )));
        }
        if !(self.ceiling > 0.0) {
            return Err(Error::domain(format!(
                "ceiling must be positive, got {}",
                self.ceiling
            )));
        }
        if let EntrantRule::Cap(c) = self.entrant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::domain(format!(
                    "entrant cap must be positive and finite, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Particles with lazily drifted squared localization lengths.
///
/// Particle `i` had value `base[i]` at time `touched[i]`; its current value
/// is `base[i] + (tau - touched[i])`. Delocalized particles hold `+∞`.
#[derive(Debug, Clone)]
pub struct Population {
    pub(crate) base: Vec<f64>,
    pub(crate) touched: Vec<f64>,
    pub(crate) tau: f64,
    pub(crate) next_event: f64,
    pub(crate) seed: u64,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) event_rate: f64,
    pub(crate) ceiling: f64,
    pub(crate) entrant: EntrantRule,
    pub(crate) events: u64,
    pub(crate) conversions: u64,
    pub(crate) overflow: u64,
    pub(crate) localized: usize,
}

impl Population {
    /// Starts from explicit values (`+∞` for delocalized) at `τ = 0`.
    pub fn with_states(states: Vec<f64>, opts: &McOptions) -> Result<Self> {
        let check = McOptions {
            particles: states.len(),
            ..*opts
        };
        check.validate()?;
        if let Some(v) = states.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::domain(format!(
                "particle value {v} is not a nonnegative length"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(opts.replica);
        let localized = states.iter().filter(|v| v.is_finite()).count();
        let mut pop = Population {
            touched: vec![0.0; states.len()],
            base: states,
            tau: 0.0,
            next_event: 0.0,
            seed: opts.seed,
            rng,
            event_rate: opts.event_rate,
            ceiling: opts.ceiling,
            entrant: opts.entrant,
            events: 0,
            conversions: 0,
            overflow: 0,
            localized,
        };
        pop.next_event = pop.draw_wait();
        Ok(pop)
    }

    /// `localized` particles drawn from `opts.initial`, the rest delocalized.
    pub fn seeded(opts: &McOptions, localized: usize) -> Result<Self> {
        opts.validate()?;
        if localized > opts.particles {
            return Err(Error::domain("more localized particles than particles"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        // initial values use their own stream family so the event stream of
        // replica r is the same with any initial profile
        rng.set_stream(opts.replica ^ (1 << 63));
        let mut states = Vec::with_capacity(opts.particles);
        for _ in 0..localized {
            let u = match opts.initial {
                InitialProfile::UExpU => {
                    let a: f64 = Exp1.sample(&mut rng);
                    let b: f64 = Exp1.sample(&mut rng);
                    a + b
                }
                InitialProfile::Exponential => Exp1.sample(&mut rng),
                InitialProfile::PointMass(u0) => u0,
            };
            states.push(u);
        }
        states.resize(opts.particles, f64::INFINITY);
        Self::with_states(states, opts)
    }

    fn draw_wait(&mut self) -> f64 {
        let total = 0.5 * self.base.len() as f64 * self.event_rate;
        if total > 0.0 {
            let e: f64 = Exp1.sample(&mut self.rng);
            self.tau + e / total
        } else {
            f64::INFINITY
        }
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Delocalized particles that have localized so far.
    pub fn conversions(&self) -> u64 {
        self.conversions
    }

    /// Values found above the ceiling; must stay 0.
    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn localized_count(&self) -> usize {
        self.localized
    }

    pub fn localized_fraction(&self) -> f64 {
        self.localized as f64 / self.base.len() as f64
    }

    #[inline]
    fn current(&self, i: usize) -> f64 {
        self.base[i] + (self.tau - self.touched[i])
    }

    /// Current values of the localized particles, in particle order.
    pub fn localized_values(&self) -> Vec<f64> {
        (0..self.base.len())
            .filter(|&i| self.base[i].is_finite())
            .map(|i| self.current(i))
            .collect()
    }

    /// Current value of every particle (`+∞` for delocalized).
    pub fn states(&self) -> Vec<f64> {
        (0..self.base.len()).map(|i| self.current(i)).collect()
    }

    /// Processes every event up to and including time `target`.
    pub fn run_until(&mut self, target: f64) -> Result<()> {
        if !(target >= self.tau) {
            return Err(Error::domain(format!(
                "cannot run back from tau = {} to {target}",
                self.tau
            )));
        }
        let m = self.base.len();
        while self.next_event <= target {
            self.tau = self.next_event;
            let i = self.rng.random_range(0..m);
            let mut j = self.rng.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            self.collide(i, j);
            self.events += 1;
            self.next_event = self.draw_wait();
        }
        self.tau = target;
        self.check_ceiling()
    }

    fn collide(&mut self, i: usize, j: usize) {
        let (bi, bj) = (self.base[i], self.base[j]);
        match (bi.is_finite(), bj.is_finite()) {
            (false, false) => {}
            (true, true) => {
                let ui = self.touch(i);
                let uj = self.touch(j);
                let c = combine_unchecked(ui, uj);
                self.base[i] = c;
                self.base[j] = c;
            }
            (true, false) | (false, true) => {
                let (loc, fresh) = if bi.is_finite() { (i, j) } else { (j, i) };
                let u = self.touch(loc);
                self.base[fresh] = match self.entrant {
                    EntrantRule::Adopt => u,
                    EntrantRule::Cap(c) => combine_unchecked(u, c),
                };
                self.touched[fresh] = self.tau;
                self.localized += 1;
                self.conversions += 1;
            }
        }
    }

    /// Brings particle `i` to the current time and returns its value.
    #[inline]
    fn touch(&mut self, i: usize) -> f64 {
        let u = self.current(i);
        if u > self.ceiling {
            self.overflow += 1;
        }
        self.base[i] = u;
        self.touched[i] = self.tau;
        u
    }

    fn check_ceiling(&mut self) -> Result<()> {
        let above = (0..self.base.len())
            .filter(|&i| self.base[i].is_finite() && self.current(i) > self.ceiling)
            .count() as u64;
        let count = self.overflow + above;
        if count > 0 {
            return Err(Error::Overflow {
                count,
                ceiling: self.ceiling,
            });
        }
        Ok(())
    }
}
