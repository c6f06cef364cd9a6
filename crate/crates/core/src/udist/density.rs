use std::fmt;
use std::str::FromStr;

use super::grid::UGrid;
use crate::error::{Error, Result};

/// A distribution of dimensionless squared localization lengths, sampled at
/// the nodes of a [`UGrid`]. Integrals use the trapezoid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct UDensity {
    grid: UGrid,
    values: Vec<f64>,
}

impl UDensity {
    pub fn new(grid: UGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "expected {} node values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::domain(format!("density value {v} at node {i}")));
        }
        Ok(UDensity { grid, values })
    }

    pub fn zeros(grid: UGrid) -> Self {
        UDensity {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: UGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    /// Unit mass at `u0`, split linearly between the adjacent nodes when `u0`
    /// is off-grid.
    pub fn point_mass(grid: UGrid, u0: f64) -> Result<Self> {
        let (k, f) = grid
            .locate(u0)
            .ok_or_else(|| Error::domain(format!("point mass at {u0} lies outside the grid")))?;
        let mut d = Self::zeros(grid);
        d.values[k] += (1.0 - f) / grid.weight(k);
        if f > 0.0 {
            d.values[k + 1] += f / grid.weight(k + 1);
        }
        Ok(d)
    }

    pub fn from_profile(grid: UGrid, profile: InitialProfile) -> Result<Self> {
        let d = match profile {
            InitialProfile::UExpU => Self::from_fn(grid, |u| u * (-u).exp())?,
            InitialProfile::Exponential => Self::from_fn(grid, |u| (-u).exp())?,
            InitialProfile::PointMass(u0) => return Self::point_mass(grid, u0),
        };
        d.normalize()
    }

    /// Wraps values produced internally; negative entries are a bug upstream.
    pub(crate) fn from_raw(grid: UGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        UDensity { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &UGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Node masses `w_i p_i`.
    pub fn node_masses(&self) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v)
            .collect()
    }

    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v)
            .sum()
    }

    /// `∫ u^k p(u) du` for `k ∈ {0, 1, 2}`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k > 2 {
            return Err(Error::domain(format!(
                "moment order {k} not in {{0, 1, 2}}"
            )));
        }
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * self.grid.node(i).powi(k as i32) * v)
            .sum())
    }

    /// Mean of the normalized distribution.
    pub fn mean(&self) -> Result<f64> {
        let m = self.mass();
        if m <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(self.moment(1)? / m)
    }

    pub fn normalize(mut self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::ZeroMass);
        }
        let s = 1.0 / m;
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(self)
    }

    /// `∫ p(u) e^{-kappa u} du`: the localized-sector order parameter at
    /// squared wave number `kappa` (dimensionless).
    pub fn laplace(&self, kappa: f64) -> Result<f64> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::domain(format!(
                "kappa must be nonnegative, got {kappa}"
            )));
        }
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v * (-kappa * self.grid.node(i)).exp())
            .sum())
    }

    pub fn l1_distance(&self, other: &UDensity) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| self.grid.weight(i) * (a - b).abs())
            .sum())
    }

    /// Node index of the largest value.
    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            })
            .0
    }

    /// Cumulative trapezoid integrals `∫_0^{u_i} p`, one per node.
    pub fn cumulative(&self) -> Vec<f64> {
        let h = self.grid.h();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.values.len());
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Evaluates `∫_0^x p(u) du / mass` for a piecewise-linear `p`.
    pub fn cdf(&self) -> Result<Cdf> {
        let mass = self.mass();
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(Cdf {
            h: self.grid.h(),
            values: self.values.iter().map(|v| v / mass).collect(),
            cumulative: self.cumulative().into_iter().map(|c| c / mass).collect(),
        })
    }
}

/// Normalized CDF of a piecewise-linear density.
#[derive(Debug, Clone)]
pub struct Cdf {
    h: f64,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Cdf {
    pub fn eval(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        let n = self.values.len() - 1;
        let pos = x / self.h;
        if pos >= n as f64 {
            return 1.0;
        }
        let k = pos.floor() as usize;
        let t = (pos - k as f64) * self.h;
        let (a, b) = (self.values[k], self.values[k + 1]);
        let slope = (b - a) / self.h;
        (self.cumulative[k] + a * t + 0.5 * slope * t * t).min(1.0)
    }

    /// Smallest `x` with `eval(x) >= q`, by bisection to machine precision.
    pub fn inverse(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let top = self.h * (self.values.len() - 1) as f64;
        let k = self.cumulative.partition_point(|&c| c < q);
        let (mut lo, mut hi) = match k {
            0 => return 0.0,
            k if k >= self.cumulative.len() => (self.h * (k - 1) as f64, top),
            k => (self.h * (k - 1) as f64, self.h * k as f64),
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Initial distribution of squared localization lengths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialProfile {
    /// `u e^{-u}`: vanishes at the origin, mean 2.
    #[default]
    UExpU,
    /// `e^{-u}`.
    Exponential,
    /// All mass at one value.
    PointMass(f64),
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialProfile::UExpU => f.write_str("uexpu"),
            InitialProfile::Exponential => f.write_str("exp"),
            InitialProfile::PointMass(u) => write!(f, "point:{u}"),
        }
    }
}

impl FromStr for InitialProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uexpu" => Ok(InitialProfile::UExpU),
            "exp" => Ok(InitialProfile::Exponential),
            other => {
                let u = other
                    .strip_prefix("point:")
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .filter(|u| u.is_finite() && *u >= 0.0)
                    .ok_or_else(|| {
                        Error::config(format!(
                            "unknown initial profile `{other}` (uexpu | exp | point:<u>)"
                        ))
                    })?;
                Ok(InitialProfile::PointMass(u))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> UGrid {
        UGrid::default()
    }

    #[test]
    fn point_mass_moments() {
        let p = UDensity::point_mass(grid(), 2.0).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-14);
        assert!((p.moment(1).unwrap() - 2.0).abs() < 1e-13);
        assert_eq!(p.moment(0).unwrap(), p.mass());
        assert!(p.moment(3).is_err());
    }

    #[test]
    fn off_grid_point_mass_keeps_mean() {
        let p = UDensity::point_mass(grid(), 2.003).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-14);
        assert!((p.mean().unwrap() - 2.003).abs() < 1e-12);
        assert!(UDensity::point_mass(grid(), 31.0).is_err());
    }

    #[test]
    fn gamma_integral_moment() {
        let p = UDensity::from_fn(grid(), |u| u * (-u).exp()).unwrap();
        // ∫ u * u e^{-u} du = Γ(3) = 2; trapezoid error is h²/12 at the origin
        assert!((p.moment(1).unwrap() - 2.0).abs() < 2e-5);
        assert!((p.mass() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn laplace_examples() {
        let p = UDensity::point_mass(grid(), 2.0).unwrap();
        assert!((p.laplace(1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-13);

        let q = UDensity::from_profile(grid(), InitialProfile::UExpU).unwrap();
        assert!((q.laplace(0.0).unwrap() - 1.0).abs() < 1e-14);

        // ∫ e^{-u} e^{-u} du = 1/2
        let e = UDensity::from_fn(grid(), |u| (-u).exp()).unwrap();
        assert!((e.laplace(1.0).unwrap() - 0.5).abs() < 1e-4);
        assert!(e.laplace(-1.0).is_err());
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(
            UDensity::zeros(grid()).normalize(),
            Err(Error::ZeroMass)
        ));
    }

    #[test]
    fn rejects_negative_and_misfit_values() {
        let g = UGrid::with_bins(2, 1.0).unwrap();
        assert!(UDensity::new(g, vec![0.0, -1.0, 0.0]).is_err());
        assert!(UDensity::new(g, vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(UDensity::new(g, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn cdf_of_uniform_is_linear() {
        let g = UGrid::with_bins(10, 0.1).unwrap();
        let p = UDensity::from_fn(g, |_| 1.0).unwrap();
        let cdf = p.cdf().unwrap();
        for x in [0.0, 0.123, 0.5, 0.77, 1.0] {
            assert!((cdf.eval(x) - x).abs() < 1e-14, "x = {x}");
        }
        assert_eq!(cdf.eval(-1.0), 0.0);
        assert_eq!(cdf.eval(2.0), 1.0);
    }

    #[test]
    fn cdf_inverse_round_trips() {
        let p =
            UDensity::from_profile(UGrid::new(30.0, 0.05).unwrap(), InitialProfile::UExpU).unwrap();
        let cdf = p.cdf().unwrap();
        for q in [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
            let x = cdf.inverse(q);
            assert!((cdf.eval(x) - q).abs() < 1e-12, "q = {q}");
        }
        assert_eq!(cdf.inverse(0.0), 0.0);
    }

    #[test]
    fn profile_parsing() {
        assert_eq!(
            "uexpu".parse::<InitialProfile>().unwrap(),
            InitialProfile::UExpU
        );
        assert_eq!(
            "point:2.5".parse::<InitialProfile>().unwrap(),
            InitialProfile::PointMass(2.5)
        );
        assert!("point:-1".parse::<InitialProfile>().is_err());
        assert!("gauss".parse::<InitialProfile>().is_err());
        for p in [
            InitialProfile::UExpU,
            InitialProfile::Exponential,
            InitialProfile::PointMass(1.5),
        ] {
            assert_eq!(p.to_string().parse::<InitialProfile>().unwrap(), p);
        }
    }
}
