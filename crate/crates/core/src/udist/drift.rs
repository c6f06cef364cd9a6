use log::warn;

use super::density::UDensity;
use crate::error::{Error, Result};

/// Default cap on mass transported past `u_max`, as a fraction of the total.
pub const DEFAULT_LOST_MASS_CAP: f64 = 1e-10;

/// Result of [`drift_shift`]: the translated density and the mass that left
/// the grid through `u_max`.
#[derive(Debug, Clone)]
pub struct Drifted {
    pub density: UDensity,
    pub lost: f64,
}

/// Translates `p` by `delta >= 0` in `u` (quantum spreading over a time
/// `delta`). Interior values satisfy `out(u) = p(u - delta)`, linearly
/// interpolated when `delta` is not a multiple of `h`; the region
/// `u < delta` is emptied. Transport moves node masses, so
/// `mass(out) + lost = mass(in)` to rounding.
pub fn drift_shift(p: &UDensity, delta: f64) -> Result<Drifted> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!(
            "drift must be nonnegative, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(Drifted {
            density: p.clone(),
            lost: 0.0,
        });
    }
    let grid = *p.grid();
    let (masses, lost) = shift_masses(&p.node_masses(), grid.position(delta));
    let values = masses
        .into_iter()
        .enumerate()
        .map(|(i, m)| m / grid.weight(i))
        .collect();
    Ok(Drifted {
        density: UDensity::from_raw(grid, values),
        lost,
    })
}

/// [`drift_shift`] that books the leaked mass on `ledger`.
pub fn drift_shift_tracked(p: &UDensity, delta: f64, ledger: &mut LostMass) -> Result<UDensity> {
    let d = drift_shift(p, delta)?;
    ledger.record(d.lost)?;
    Ok(d.density)
}

/// Moves node masses by `shift` nodes (fractional part split linearly).
/// Returns the shifted masses and the total pushed past the last node.
pub(crate) fn shift_masses(masses: &[f64], shift: f64) -> (Vec<f64>, f64) {
    let len = masses.len();
    let nearest = shift.round();
    let shift = if (shift - nearest).abs() < 1e-9 {
        nearest
    } else {
        shift
    };
    let k = shift.floor();
    let f = shift - k;
    let k = k as usize;
    let mut out = vec![0.0; len];
    let mut lost = 0.0;
    for (i, &m) in masses.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let t = i + k;
        let (stay, next) = (m * (1.0 - f), m * f);
        if t < len {
            out[t] += stay;
        } else {
            lost += stay;
        }
        if f > 0.0 {
            if t + 1 < len {
                out[t + 1] += next;
            } else {
                lost += next;
            }
        }
    }
    (out, lost)
}

/// Running total of mass leaked through `u_max`, checked against a cap.
#[derive(Debug, Clone)]
pub struct LostMass {
    total: f64,
    cap: f64,
    warned: bool,
}

impl LostMass {
    /// Allows at most `cap_fraction * reference_mass` to leak overall.
    pub fn new(cap_fraction: f64, reference_mass: f64) -> Self {
        LostMass {
            total: 0.0,
            cap: cap_fraction * reference_mass,
            warned: false,
        }
    }

    pub fn record(&mut self, lost: f64) -> Result<()> {
        self.total += lost;
        if lost > 0.0 && !self.warned {
            warn!("mass {lost:e} drifted past u_max; tail leakage is being tracked");
            self.warned = true;
        }
        if self.total > self.cap {
            return Err(Error::LostMass {
                lost: self.total,
                cap: self.cap,
            });
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Whether a leakage warning has been emitted.
    pub fn warned(&self) -> bool {
        self.warned
    }
}
