use log::debug;

use super::config::SolverConfig;
use super::steady::masses;
use crate::error::{Error, Result};
use crate::gamma::GammaTrajectory;
use crate::udist::{
    shift_masses, Deposition, KernelPlan, LostMass, UDensity, UGrid, DEFAULT_LOST_MASS_CAP,
};

/// Values in `[-CLIP_FLOOR, 0)` are rounding noise and are set to zero.
const CLIP_FLOOR: f64 = 1e-12;

/// Stored snapshots of `p(u; τ)` from [`evolve_transient`].
#[derive(Debug, Clone)]
pub struct TransientSolution {
    tau_nodes: Vec<f64>,
    densities: Vec<UDensity>,
    source: GammaTrajectory,
    dtau: f64,
    deposition: Deposition,
    lost_mass: f64,
    max_mass_drift: f64,
}

impl TransientSolution {
    pub fn tau_nodes(&self) -> &[f64] {
        &self.tau_nodes
    }

    pub fn densities(&self) -> &[UDensity] {
        &self.densities
    }

    /// The `g(τ)` that drove the collision term.
    pub fn source(&self) -> &GammaTrajectory {
        &self.source
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn deposition(&self) -> Deposition {
        self.deposition
    }

    /// Total mass transported past `u_max`.
    pub fn lost_mass(&self) -> f64 {
        self.lost_mass
    }

    /// Largest per-step mass change removed by renormalization.
    pub fn max_mass_drift(&self) -> f64 {
        self.max_mass_drift
    }

    pub fn last(&self) -> &UDensity {
        self.densities
            .last()
            .expect("at least the initial snapshot")
    }

    pub fn grid(&self) -> &UGrid {
        self.densities[0].grid()
    }

    /// Index of the snapshot stored at `tau`.
    pub fn index_of(&self, tau: f64) -> Result<usize> {
        let tol = 1e-9 * self.dtau;
        let k = self.tau_nodes.partition_point(|&t| t < tau - tol);
        match self.tau_nodes.get(k) {
            Some(&t) if (t - tau).abs() <= tol => Ok(k),
            _ => Err(Error::domain(format!("no snapshot stored at tau = {tau}"))),
        }
    }

    /// Snapshot at `tau`, which must be a stored node.
    pub fn at(&self, tau: f64) -> Result<&UDensity> {
        Ok(&self.densities[self.index_of(tau)?])
    }
}

/// Evolves `(∂τ + ∂u) p = g(τ) (K[p,p] - p)` from `p0` to `tau_end`.
///
/// Each step of length `dtau = h` moves all mass up one node (exact drift),
/// then applies `p <- p + dtau g(τ_n) (K[p,p] - p)` and renormalizes.
pub fn evolve_transient(
    p0: &UDensity,
    g: &GammaTrajectory,
    tau_end: f64,
    cfg: &SolverConfig,
) -> Result<TransientSolution> {
    cfg.validate()?;
    let grid = *p0.grid();
    let expected = cfg.grid()?;
    if grid.n_bins() != expected.n_bins() || (grid.h() - expected.h()).abs() > 1e-15 {
        return Err(Error::GridMismatch);
    }
    let mass0 = p0.mass();
    if (mass0 - 1.0).abs() > 1e-6 {
        return Err(Error::domain(format!(
            "initial density must be normalized, mass = {mass0}"
        )));
    }
    let dtau = grid.h();
    let steps = (tau_end / dtau).round();
    if !(tau_end >= 0.0) || (steps * dtau - tau_end).abs() > 1e-9 * tau_end.max(1.0) {
        return Err(Error::domain(format!(
            "tau_end = {tau_end} is not a multiple of dtau = {dtau}"
        )));
    }
    let steps = steps as usize;
    if g.tau_end() < tau_end - 1e-9 * tau_end.max(1.0) {
        return Err(Error::domain(format!(
            "g is defined up to {} but the run needs {tau_end}",
            g.tau_end()
        )));
    }

    let plan = KernelPlan::for_repeated(grid.n_bins(), cfg.deposition);
    let mut ledger = LostMass::new(DEFAULT_LOST_MASS_CAP, 1.0);
    let mut m = masses(&grid, p0.values());
    let scale = 1.0 / m.iter().sum::<f64>();
    m.iter_mut().for_each(|v| *v *= scale);

    let mut tau_nodes = vec![0.0];
    let mut densities = vec![to_density(&grid, &m)];
    let mut max_mass_drift: f64 = 0.0;
    for step in 0..steps {
        let tau = step as f64 * dtau;
        let (drifted, lost) = shift_masses(&m, 1.0);
        ledger.record(lost)?;
        let rate = dtau * g.at(tau.min(g.tau_end()))?;
        let mut next = if rate > 0.0 {
            let k = plan.apply(&drifted, &drifted, cfg.deposition);
            drifted
                .iter()
                .zip(&k)
                .map(|(d, kv)| d + rate * (kv - d))
                .collect()
        } else {
            drifted
        };
        let tau_next = (step + 1) as f64 * dtau;
        for (i, v) in next.iter_mut().enumerate() {
            if *v < 0.0 {
                let value = *v / grid.weight(i);
                if value < -CLIP_FLOOR {
                    return Err(Error::Instability {
                        tau: tau_next,
                        value,
                    });
                }
                *v = 0.0;
            }
        }
        let mass: f64 = next.iter().sum();
        let drift = (mass - 1.0).abs();
        if !(drift < cfg.tol_mass) {
            return Err(Error::MassDrift {
                tau: tau_next,
                drift,
            });
        }
        max_mass_drift = max_mass_drift.max(drift);
        next.iter_mut().for_each(|v| *v /= mass);
        m = next;
        if (step + 1) % cfg.snapshot_stride == 0 || step + 1 == steps {
            tau_nodes.push(if step + 1 == steps { tau_end } else { tau_next });
            densities.push(to_density(&grid, &m));
        }
    }
    debug!(
        "transient to tau = {tau_end}: {steps} steps, lost mass {:e}, max mass drift {max_mass_drift:e}",
        ledger.total()
    );
    Ok(TransientSolution {
        tau_nodes,
        densities,
        source: g.clone(),
        dtau,
        deposition: cfg.deposition,
        lost_mass: ledger.total(),
        max_mass_drift,
    })
}

fn to_density(grid: &UGrid, m: &[f64]) -> UDensity {
    let values = m
        .iter()
        .enumerate()
        .map(|(i, x)| x / grid.weight(i))
        .collect();
    UDensity::new(*grid, values).expect("clipped masses are nonnegative")
}
