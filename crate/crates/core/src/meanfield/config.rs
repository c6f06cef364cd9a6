use crate::error::{Error, Result};
use crate::udist::{Deposition, InitialProfile, UGrid};

/// Numerical settings shared by the deterministic solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub u_max: f64,
    pub h: f64,
    /// Fixed-point mixing `p <- (1 - alpha) p + alpha T[p]`.
    pub alpha: f64,
    /// L1 change between fixed-point iterates at which to stop.
    pub tol_fixed_point: f64,
    pub max_iters: usize,
    /// Transient time step; must equal `h` so that drift is an exact shift.
    pub dtau: f64,
    /// Target for the steady residual; reported, not enforced by the solver.
    pub tol_residual: f64,
    /// Allowed mass change per transient step before renormalization.
    pub tol_mass: f64,
    /// Highest hierarchy order checked by the resummed residual (1 to 3).
    pub m_max: usize,
    /// Store every `snapshot_stride`-th transient step (and the last).
    pub snapshot_stride: usize,
    pub deposition: Deposition,
    pub initial: InitialProfile,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            u_max: 30.0,
            h: 0.01,
            alpha: 0.5,
            tol_fixed_point: 1e-8,
            max_iters: 500,
            dtau: 0.01,
            tol_residual: 1e-4,
            tol_mass: 1e-8,
            m_max: 3,
            snapshot_stride: 10,
            deposition: Deposition::default(),
            initial: InitialProfile::default(),
        }
    }
}

impl SolverConfig {
    /// Default settings on a grid of spacing `h` (and `dtau = h`).
    pub fn with_grid(u_max: f64, h: f64) -> Self {
        SolverConfig {
            u_max,
            h,
            dtau: h,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> Result<UGrid> {
        UGrid::new(self.u_max, self.h)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid().map_err(|e| Error::config(e.to_string()))?;
        if grid.n_bins() < 4 {
            return Err(Error::config("grid needs at least 4 bins"));
        }
        if self.h > 1.0 {
            return Err(Error::config(format!(
                "grid spacing {} too coarse; at most 1",
                self.h
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        for (name, v) in [
            ("tol_fixed_point", self.tol_fixed_point),
            ("tol_residual", self.tol_residual),
            ("tol_mass", self.tol_mass),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be positive"));
        }
        if (self.dtau - self.h).abs() > 1e-12 * self.h {
            return Err(Error::config(format!(
                "dtau = {} must equal h = {} for exact drift",
                self.dtau, self.h
            )));
        }
        if !(1..=3).contains(&self.m_max) {
            return Err(Error::config(format!(
                "m_max must be 1, 2 or 3, got {}",
                self.m_max
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::config("snapshot_stride must be positive"));
        }
        Ok(())
    }
}
