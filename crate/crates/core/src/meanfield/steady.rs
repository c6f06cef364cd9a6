use super::config::SolverConfig;
use crate::error::{Error, Result};
use crate::udist::{Deposition, KernelPlan, UDensity, UGrid};

/// Result of [`solve_steady_report`].
#[derive(Debug, Clone)]
pub struct SteadyReport {
    pub density: UDensity,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub last_change: f64,
}

/// Fixed point of `p + p' = K[p, p]`, `p(0) = 0`, from the configured
/// initial profile.
pub fn solve_steady(cfg: &SolverConfig) -> Result<UDensity> {
    Ok(solve_steady_report(cfg)?.density)
}

pub fn solve_steady_report(cfg: &SolverConfig) -> Result<SteadyReport> {
    cfg.validate()?;
    let p0 = UDensity::from_profile(cfg.grid()?, cfg.initial)?;
    solve_steady_from(cfg, p0)
}

/// Iterates `p <- (1 - alpha) p + alpha T[p]` with
/// `T[p](u) = ∫_0^u e^{-(u-s)} K[p,p](s) ds`, renormalizing each time.
pub fn solve_steady_from(cfg: &SolverConfig, initial: UDensity) -> Result<SteadyReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    initial.grid().check_same(&grid)?;
    let plan = KernelPlan::for_repeated(grid.n_bins(), cfg.deposition);
    let factor = IntegratingFactor::new(grid);
    let mut p = initial.normalize()?.into_values();
    let mut last_change = f64::INFINITY;
    for iter in 1..=cfg.max_iters {
        let k = kernel_values(&plan, &grid, &p, &p, cfg.deposition);
        let t = factor.apply(&k);
        let mut next: Vec<f64> = p
            .iter()
            .zip(&t)
            .map(|(a, b)| ((1.0 - cfg.alpha) * a + cfg.alpha * b).max(0.0))
            .collect();
        let mass = trapezoid(&grid, &next);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::ZeroMass);
        }
        next.iter_mut().for_each(|v| *v /= mass);
        last_change = l1(&grid, &next, &p);
        p = next;
        if last_change < cfg.tol_fixed_point {
            return Ok(SteadyReport {
                density: UDensity::new(grid, p)?,
                iterations: iter,
                last_change,
            });
        }
    }
    Err(Error::NonConvergence {
        iters: cfg.max_iters,
        last_change,
    })
}

/// Pointwise residual `r = p + p' - K[p, p]` with cell deposition, returned
/// as `(sup |r|, ∫ |r|)`.
pub fn residual_steady(p: &UDensity) -> (f64, f64) {
    residual_steady_with(p, Deposition::default())
}

/// [`residual_steady`] with a chosen kernel deposition. `p'` uses fourth-order
/// central differences in the interior and second-order stencils within two
/// nodes of either end.
pub fn residual_steady_with(p: &UDensity, dep: Deposition) -> (f64, f64) {
    let r = residual_curve(p, dep);
    let grid = p.grid();
    let sup = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l1 = r
        .iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * v.abs())
        .sum();
    (sup, l1)
}

/// `p + p' - K[p, p]` at every node.
pub fn residual_curve(p: &UDensity, dep: Deposition) -> Vec<f64> {
    let grid = *p.grid();
    let plan = KernelPlan::new(grid.n_bins());
    let k = kernel_values(&plan, &grid, p.values(), p.values(), dep);
    let d = derivative(p.values(), grid.h());
    p.values()
        .iter()
        .zip(&d)
        .zip(&k)
        .map(|((v, dv), kv)| v + dv - kv)
        .collect()
}

pub(crate) fn derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        for i in 0..n {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            d[i] = (v[b] - v[a]) / ((b - a).max(1) as f64 * h);
        }
        return d;
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[1] = (v[2] - v[0]) / (2.0 * h);
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
    }
    d[n - 2] = (v[n - 1] - v[n - 3]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

/// `K[p, q]` as node values.
pub(crate) fn kernel_values(
    plan: &KernelPlan,
    grid: &UGrid,
    p: &[f64],
    q: &[f64],
    dep: Deposition,
) -> Vec<f64> {
    let mp = masses(grid, p);
    let mq = masses(grid, q);
    plan.apply(&mp, &mq, dep)
        .into_iter()
        .enumerate()
        .map(|(i, m)| m / grid.weight(i))
        .collect()
}

pub(crate) fn masses(grid: &UGrid, v: &[f64]) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(i, x)| grid.weight(i) * x)
        .collect()
}

fn trapezoid(grid: &UGrid, v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(i, x)| grid.weight(i) * x).sum()
}

fn l1(grid: &UGrid, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| grid.weight(i) * (x - y).abs())
        .sum()
}

/// Solves `y' + y = f`, `y(0) = 0` on the grid through the recurrence
/// `y_{i+1} = e^{-h} y_i + ∫_{u_i}^{u_{i+1}} e^{-(u_{i+1}-s)} f(s) ds`, with `f`
/// replaced on each interval by the cubic through four neighbouring nodes.
struct IntegratingFactor {
    decay: f64,
    first: [f64; 4],
    interior: [f64; 4],
    last: [f64; 4],
}

impl IntegratingFactor {
    fn new(grid: UGrid) -> Self {
        let h = grid.h();
        IntegratingFactor {
            decay: (-h).exp(),
            first: cubic_weights([0, 1, 2, 3], h),
            interior: cubic_weights([-1, 0, 1, 2], h),
            last: cubic_weights([-2, -1, 0, 1], h),
        }
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len() - 1;
        let mut y = vec![0.0; n + 1];
        for i in 0..n {
            let s = if i == 0 {
                dot(&self.first, &f[0..4])
            } else if i == n - 1 {
                dot(&self.last, &f[n - 3..=n])
            } else {
                dot(&self.interior, &f[i - 1..i + 3])
            };
            y[i + 1] = self.decay * y[i] + s;
        }
        y
    }
}

fn dot(w: &[f64; 4], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

/// `h ∫_0^1 e^{-h(1-t)} L_k(t) dt` for the Lagrange basis on the integer
/// nodes `offsets` (relative to the interval start).
fn cubic_weights(offsets: [i32; 4], h: f64) -> [f64; 4] {
    // I_m = ∫_0^1 e^{-h(1-t)} t^m dt = Σ_j (-h)^j m! / (m + j + 1)!
    let moments: Vec<f64> = (0..4)
        .map(|m| {
            let mut term = 1.0 / (m + 1) as f64;
            let mut sum: f64 = 0.0;
            let mut j = 0;
            while term.abs() > 1e-20 * sum.abs().max(1e-300) || j < 2 {
                sum += term;
                j += 1;
                term *= -h / (m + j + 1) as f64;
                if j > 200 {
                    break;
                }
            }
            sum
        })
        .collect();
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        // coefficients of Π_{m≠k} (t - x_m) / (x_k - x_m), lowest degree first
        let mut coef = vec![1.0];
        let mut denom = 1.0;
        for (m, &xm) in offsets.iter().enumerate() {
            if m == k {
                continue;
            }
            let xm = xm as f64;
            denom *= offsets[k] as f64 - xm;
            let mut next = vec![0.0; coef.len() + 1];
            for (d, c) in coef.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= xm * c;
            }
            coef = next;
        }
        *slot = h * coef.iter().zip(&moments).map(|(c, i)| c * i).sum::<f64>() / denom;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_exponential_integral() {
        let h = 0.01;
        let w = cubic_weights([-1, 0, 1, 2], h);
        // f ≡ 1: ∫_0^h e^{-(h-s)} ds = 1 - e^{-h}
        let total: f64 = w.iter().sum();
        assert!((total - (1.0 - (-h).exp())).abs() < 1e-16);
        // f(s) = s³ on nodes -h, 0, h, 2h is reproduced exactly
        let f: Vec<f64> = [-1.0f64, 0.0, 1.0, 2.0]
            .iter()
            .map(|x| (x * h).powi(3))
            .collect();
        let got = dot(&w, &f);
        // ∫_0^h e^{-(h-s)} s³ ds = h⁴ Σ_j 6 (-h)^j / (j + 4)!
        let exact: f64 = (0..30)
            .map(|j| {
                let mut fac = 1.0;
                for k in 1..=(j + 4) {
                    fac *= k as f64;
                }
                6.0 * (-h).powi(j) / fac
            })
            .sum::<f64>()
            * h.powi(4);
        assert!((got - exact).abs() < 1e-22, "{got} vs {exact}");
    }

    #[test]
    fn integrating_factor_solves_linear_ode() {
        // y' + y = 1, y(0) = 0  =>  y = 1 - e^{-u}
        let grid = UGrid::new(5.0, 0.05).unwrap();
        let f = vec![1.0; grid.len()];
        let y = IntegratingFactor::new(grid).apply(&f);
        for (i, v) in y.iter().enumerate() {
            let u = grid.node(i);
            assert!((v - (1.0 - (-u).exp())).abs() < 1e-14);
        }
        // y' + y = u e^{-u}  =>  y = u² e^{-u} / 2, fourth order in h
        let max_err = |h: f64| {
            let grid = UGrid::new(5.0, h).unwrap();
            let f: Vec<f64> = grid.nodes().map(|u| u * (-u).exp()).collect();
            let y = IntegratingFactor::new(grid).apply(&f);
            y.iter()
                .enumerate()
                .map(|(i, v)| (v - 0.5 * grid.node(i).powi(2) * (-grid.node(i)).exp()).abs())
                .fold(0.0f64, f64::max)
        };
        let (coarse, fine) = (max_err(0.05), max_err(0.025));
        assert!(coarse < 5e-7, "{coarse}");
        assert!(coarse / fine > 12.0, "{coarse} / {fine}");
    }

    #[test]
    fn derivative_is_fourth_order_inside() {
        let h = 0.1;
        let v: Vec<f64> = (0..50).map(|i| (i as f64 * h).sin()).collect();
        let d = derivative(&v, h);
        for i in 2..48 {
            assert!((d[i] - (i as f64 * h).cos()).abs() < 5e-6);
        }
        for i in [0, 1, 48, 49] {
            assert!((d[i] - (i as f64 * h).cos()).abs() < 5e-3);
        }
    }

    #[test]
    fn exponential_residual_is_kernel_mass() {
        let grid = UGrid::default();
        let p = UDensity::from_fn(grid, |u| (-u).exp()).unwrap();
        let (_, l1) = residual_steady(&p);
        let k = crate::udist::collision_kernel_with(&p, &p, Deposition::Cell).unwrap();
        assert!((l1 - k.mass()).abs() < 1e-3, "{l1}");
        assert!((l1 - 1.0).abs() < 1e-3);
        assert_eq!(residual_steady(&UDensity::zeros(grid)), (0.0, 0.0));
    }
}
