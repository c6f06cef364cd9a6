//! Checks of a transient solution against the memory-integral forms of the
//! dynamics.
//!
//! Along characteristics `u - τ = const`, `F = g p / (1 - g)` obeys
//! `dF/dτ = g p + g² K[p,p] / (1 - g)` with `F(0) = g0 p0 / (1 - g0)`, so
//!
//! `g p = (1 - g) { S + ∫ g₁ p₁ dτ₁ + ∫ g₁² / (1 - g₁) K₁ dτ₁ }`
//!
//! where `S = g0 / (1 - g0) p0(u - τ)` and every integrand is translated by
//! `τ - τ₁`. With `1 - g = (1 - g0) e^{-∫g}` this is the exponential-weight
//! form; `S` carries the seed and vanishes with it. Writing the collision
//! term as `g₁ K[p₁, F₁]` and iterating from `F = S + ∫ g₁ p₁` generates the
//! hierarchy order by order.

use super::steady::masses;
use crate::error::{Error, Result};
use crate::gamma::GammaTrajectory;
use crate::meanfield::TransientSolution;
use crate::udist::{
    drift_shift_tracked, shift_masses, KernelPlan, LostMass, UDensity, DEFAULT_LOST_MASS_CAP,
};

/// Highest hierarchy order evaluated by [`pm_recursion`] and
/// [`residual_resummed`].
pub const MAX_ORDER: usize = 3;

/// `p_m(u; τ, τ₁, …, τ_m)` for `times = [τ, τ₁, …, τ_m]` with
/// `τ ≥ τ₁ ≥ … ≥ τ_m`, all stored snapshot times of `sol`:
/// `p₁ = p(τ₁)` translated by `τ - τ₁`, and `p_m` is `K[p(τ₁), p_{m-1}(τ₁, …)]`
/// translated by `τ - τ₁`.
pub fn pm_recursion(sol: &TransientSolution, m: usize, times: &[f64]) -> Result<UDensity> {
    if !(1..=MAX_ORDER).contains(&m) {
        return Err(Error::domain(format!(
            "order m = {m} outside 1..={MAX_ORDER}"
        )));
    }
    if times.len() != m + 1 {
        return Err(Error::domain(format!(
            "order {m} needs {} times, got {}",
            m + 1,
            times.len()
        )));
    }
    if times.windows(2).any(|w| !(w[0] >= w[1])) {
        return Err(Error::UnorderedTimes);
    }
    let mut ledger = LostMass::new(DEFAULT_LOST_MASS_CAP, 1.0);
    let mut q = drift_shift_tracked(sol.at(times[m])?, times[m - 1] - times[m], &mut ledger)?;
    for l in (0..m - 1).rev() {
        let k = crate::udist::collision_kernel_with(sol.at(times[l + 1])?, &q, sol.deposition())?;
        q = drift_shift_tracked(&k, times[l] - times[l + 1], &mut ledger)?;
    }
    Ok(q)
}

/// L1 mismatch of `g p` against the integral forms at each snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ResummedResidual {
    pub tau: Vec<f64>,
    /// All-orders form, collision term built from the solution itself.
    pub full: Vec<f64>,
    /// `truncated[m - 1]`: the hierarchy kept through order `m`.
    pub truncated: Vec<Vec<f64>>,
}

/// Evaluates both integral forms by trapezoid quadrature over the stored
/// snapshots, which must be uniformly spaced at most `10 dtau` apart.
pub fn residual_resummed(
    sol: &TransientSolution,
    g: &GammaTrajectory,
    m_max: usize,
) -> Result<ResummedResidual> {
    if !(1..=MAX_ORDER).contains(&m_max) {
        return Err(Error::domain(format!(
            "m_max = {m_max} outside 1..={MAX_ORDER}"
        )));
    }
    let taus = sol.tau_nodes().to_vec();
    let dtau = sol.dtau();
    let limit = 10.0 * dtau;
    let spacing = if taus.len() > 1 {
        taus[1] - taus[0]
    } else {
        dtau
    };
    for w in taus.windows(2) {
        let s = w[1] - w[0];
        if s > limit * (1.0 + 1e-9) {
            return Err(Error::SparseSnapshots { spacing: s, limit });
        }
        if (s - spacing).abs() > 1e-9 * dtau {
            return Err(Error::domain("snapshots must be uniformly spaced"));
        }
    }
    let bins = (spacing / dtau).round();
    let grid = *sol.grid();
    let gs: Vec<f64> = taus.iter().map(|&t| g.at(t)).collect::<Result<_>>()?;
    if let Some(v) = gs.iter().find(|v| **v >= 1.0) {
        return Err(Error::domain(format!(
            "the integral forms need g < 1, got {v}"
        )));
    }
    let g0 = g.g0();
    let plan = KernelPlan::for_repeated(grid.n_bins(), sol.deposition());
    let dep = sol.deposition();
    let p: Vec<Vec<f64>> = sol
        .densities()
        .iter()
        .map(|d| masses(&grid, d.values()))
        .collect();
    let n = p.len();

    // shifted(f, k, j): f_k translated to time τ_j
    let shifted = |f: &[f64], k: usize, j: usize| shift_masses(f, (j - k) as f64 * bins).0;
    let integrate = |terms: &[Vec<f64>], j: usize| -> Vec<f64> {
        let mut acc = vec![0.0; grid.len()];
        for k in 0..=j {
            let w = if k == 0 || k == j {
                0.5 * spacing
            } else {
                spacing
            };
            if j == 0 {
                break;
            }
            for (a, v) in acc.iter_mut().zip(shifted(&terms[k], k, j)) {
                *a += w * v;
            }
        }
        acc
    };
    let scaled = |f: &[f64], c: f64| -> Vec<f64> { f.iter().map(|v| c * v).collect() };

    let seed: Vec<Vec<f64>> = (0..n)
        .map(|j| scaled(&shifted(&p[0], 0, j), g0 / (1.0 - g0)))
        .collect();
    let gp: Vec<Vec<f64>> = (0..n).map(|k| scaled(&p[k], gs[k])).collect();
    let base: Vec<Vec<f64>> = (0..n).map(|j| add(&seed[j], &integrate(&gp, j))).collect();

    let mismatch = |j: usize, rhs: &[f64]| -> f64 {
        p[j].iter()
            .zip(rhs)
            .map(|(pv, r)| (gs[j] * pv - (1.0 - gs[j]) * r).abs())
            .sum()
    };

    let collisions: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            scaled(
                &plan.apply(&p[k], &p[k], dep),
                gs[k] * gs[k] / (1.0 - gs[k]),
            )
        })
        .collect();
    let full = (0..n)
        .map(|j| mismatch(j, &add(&base[j], &integrate(&collisions, j))))
        .collect();

    let mut truncated = Vec::with_capacity(m_max);
    let mut level = base.clone();
    truncated.push((0..n).map(|j| mismatch(j, &level[j])).collect());
    for _ in 2..=m_max {
        let terms: Vec<Vec<f64>> = (0..n)
            .map(|k| scaled(&plan.apply(&p[k], &level[k], dep), gs[k]))
            .collect();
        level = (0..n)
            .map(|j| add(&base[j], &integrate(&terms, j)))
            .collect();
        truncated.push((0..n).map(|j| mismatch(j, &level[j])).collect());
    }
    Ok(ResummedResidual {
        tau: taus,
        full,
        truncated,
    })
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{evolve_transient, SolverConfig};
    use crate::udist::{Deposition, InitialProfile, UGrid};

    fn cfg() -> SolverConfig {
        SolverConfig {
            snapshot_stride: 1,
            deposition: Deposition::Node,
            ..SolverConfig::with_grid(30.0, 0.05)
        }
    }

    fn point_run(u0: f64, tau_end: f64) -> TransientSolution {
        let c = cfg();
        let p0 = UDensity::point_mass(c.grid().unwrap(), u0).unwrap();
        let g = GammaTrajectory::constant(0.0, tau_end, c.dtau).unwrap();
        evolve_transient(&p0, &g, tau_end, &c).unwrap()
    }

    #[test]
    fn first_order_is_translation() {
        let c = cfg();
        let p0 = UDensity::from_profile(c.grid().unwrap(), InitialProfile::UExpU).unwrap();
        let g = GammaTrajectory::closed(0.1, 1.0, c.dtau).unwrap();
        let sol = evolve_transient(&p0, &g, 1.0, &c).unwrap();
        let p1 = pm_recursion(&sol, 1, &[1.0, 0.4]).unwrap();
        let expect = crate::udist::drift_shift(sol.at(0.4).unwrap(), 0.6)
            .unwrap()
            .density;
        assert!(p1.l1_distance(&expect).unwrap() < 1e-14);
    }

    #[test]
    fn second_order_contracts_point_masses() {
        // g ≡ 0 keeps the snapshots point masses: p(τ) sits at 2 + τ
        let sol = point_run(2.0, 1.0);
        let p2 = pm_recursion(&sol, 2, &[0.5, 0.0, 0.0]).unwrap();
        let expect = UDensity::point_mass(*sol.grid(), 1.5).unwrap();
        assert!(p2.l1_distance(&expect).unwrap() < 1e-12);
        assert!((p2.mass() - 1.0).abs() < 1e-12);
        let p3 = pm_recursion(&sol, 3, &[1.0, 0.5, 0.5, 0.0]).unwrap();
        assert!((p3.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recursion_preconditions() {
        let sol = point_run(2.0, 1.0);
        assert!(matches!(
            pm_recursion(&sol, 2, &[0.5, 0.8, 0.0]),
            Err(Error::UnorderedTimes)
        ));
        assert!(pm_recursion(&sol, 2, &[0.5, 0.0]).is_err());
        assert!(pm_recursion(&sol, 4, &[1.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(pm_recursion(&sol, 1, &[0.5, 0.33]).is_err());
    }

    #[test]
    fn residual_is_zero_at_origin_and_small_early() {
        let c = cfg();
        let p0 = UDensity::from_profile(c.grid().unwrap(), InitialProfile::UExpU).unwrap();
        let g = GammaTrajectory::closed(0.1, 0.3, c.dtau).unwrap();
        let sol = evolve_transient(&p0, &g, 0.3, &c).unwrap();
        let r = residual_resummed(&sol, &g, 3).unwrap();
        assert!(r.full[0] < 1e-15);
        assert!(r.full.iter().all(|v| *v < 5e-2), "{:?}", r.full);
        let last = r.tau.len() - 1;
        assert!(r.truncated[0][last] > r.truncated[1][last]);
        assert!(r.truncated[1][last] > r.truncated[2][last]);
    }

    #[test]
    fn residual_preconditions() {
        let c = SolverConfig {
            snapshot_stride: 11,
            ..cfg()
        };
        let grid = UGrid::new(30.0, 0.05).unwrap();
        let p0 = UDensity::from_profile(grid, InitialProfile::UExpU).unwrap();
        let g = GammaTrajectory::closed(0.1, 1.1, c.dtau).unwrap();
        let sparse = evolve_transient(&p0, &g, 1.1, &c).unwrap();
        assert!(matches!(
            residual_resummed(&sparse, &g, 2),
            Err(Error::SparseSnapshots { .. })
        ));
        let ones = GammaTrajectory::constant(1.0, 0.2, c.dtau).unwrap();
        let sol = evolve_transient(&p0, &ones, 0.2, &cfg()).unwrap();
        assert!(residual_resummed(&sol, &ones, 2).is_err());
        assert!(residual_resummed(&sol, &ones, 4).is_err());
    }
}
