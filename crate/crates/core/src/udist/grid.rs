use crate::error::{Error, Result};

/// Uniform grid `u_i = i * h`, `i = 0..=n_bins`, on `[0, u_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UGrid {
    n_bins: usize,
    h: f64,
}

impl UGrid {
    /// Grid on `[0, u_max]` with spacing `h`; `u_max / h` must be integral.
    pub fn new(u_max: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::config(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if !(u_max.is_finite() && u_max > 0.0) {
            return Err(Error::config(format!(
                "u_max must be positive, got {u_max}"
            )));
        }
        let ratio = u_max / h;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::config(format!(
                "u_max = {u_max} is not an integer multiple of h = {h}"
            )));
        }
        Self::with_bins(n as usize, h)
    }

    pub fn with_bins(n_bins: usize, h: f64) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::config("grid needs at least one bin"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::config(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if n_bins > (1 << 24) {
            return Err(Error::config(format!(
                "{n_bins} bins is beyond the supported size"
            )));
        }
        Ok(UGrid { n_bins, h })
    }

    #[inline]
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Number of nodes, `n_bins + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_bins + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn u_max(&self) -> f64 {
        self.node(self.n_bins)
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_bins {
            0.5 * self.h
        } else {
            self.h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Fractional node coordinate `u / h`.
    #[inline]
    pub fn position(&self, u: f64) -> f64 {
        u / self.h
    }

    /// Splits a unit mass at `u` between the two adjacent nodes. Returns the
    /// lower node and the share going to the upper one. `None` outside the grid.
    pub fn locate(&self, u: f64) -> Option<(usize, f64)> {
        if !(u >= 0.0) {
            return None;
        }
        let x = self.position(u);
        let n = self.n_bins as f64;
        if x > n {
            return None;
        }
        if x == n {
            return Some((self.n_bins - 1, 1.0));
        }
        let k = x.floor();
        Some((k as usize, x - k))
    }

    pub(crate) fn check_same(&self, other: &UGrid) -> Result<()> {
        if self.n_bins == other.n_bins && self.h.to_bits() == other.h.to_bits() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl Default for UGrid {
    /// `u_max = 30`, `h = 0.01`.
    fn default() -> Self {
        UGrid {
            n_bins: 3000,
            h: 0.01,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_nodes() {
        let g = UGrid::default();
        assert_eq!(g.len(), 3001);
        assert_eq!(g.node(0), 0.0);
        assert!((g.node(200) - 2.0).abs() < 1e-15);
        assert!((g.u_max() - 30.0).abs() < 1e-12);
        assert!(g.nodes().zip(g.nodes().skip(1)).all(|(a, b)| b > a));
        let total: f64 = g.weights().iter().sum();
        assert!((total - 30.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_integral_extent() {
        assert!(UGrid::new(1.0, 0.3).is_err());
        assert!(UGrid::new(1.0, 0.0).is_err());
        assert!(UGrid::new(-1.0, 0.1).is_err());
        assert_eq!(UGrid::new(30.0, 0.01).unwrap(), UGrid::default());
    }

    #[test]
    fn locate_splits_linearly() {
        let g = UGrid::with_bins(10, 0.5).unwrap();
        assert_eq!(g.locate(1.0), Some((2, 0.0)));
        let (k, f) = g.locate(1.25).unwrap();
        assert_eq!(k, 2);
        assert!((f - 0.5).abs() < 1e-15);
        assert_eq!(g.locate(5.0), Some((9, 1.0)));
        assert_eq!(g.locate(5.1), None);
        assert_eq!(g.locate(-0.1), None);
    }
}
