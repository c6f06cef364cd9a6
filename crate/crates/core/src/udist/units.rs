use crate::error::{Error, Result};

/// Physical parameters and the maps to dimensionless variables
/// `u = ξ² Γ / 2D` and `τ = Γ t`, with `Γ = μ (N/V) v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitsMap {
    /// Measurement-rate control μ (1/time).
    pub mu: f64,
    /// Number density N/V (1/volume).
    pub number_density: f64,
    /// Hypervolume v of the measurement box (volume).
    pub box_volume: f64,
    /// Effective diffusion constant D (length²/time).
    pub diffusion: f64,
}

/// Direction of a [`UnitsMap::convert`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    Xi2ToU,
    UToXi2,
    TimeToTau,
    TauToTime,
}

impl UnitsMap {
    pub fn new(mu: f64, number_density: f64, box_volume: f64, diffusion: f64) -> Result<Self> {
        let map = UnitsMap {
            mu,
            number_density,
            box_volume,
            diffusion,
        };
        map.gamma()?;
        if !(diffusion > 0.0 && diffusion.is_finite()) {
            return Err(Error::domain(format!(
                "diffusion constant must be positive, got {diffusion}"
            )));
        }
        Ok(map)
    }

    /// Effective per-particle measurement rate Γ.
    pub fn gamma(&self) -> Result<f64> {
        let g = self.mu * self.number_density * self.box_volume;
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::domain(format!(
                "effective rate must be positive, got {g}"
            )));
        }
        Ok(g)
    }

    pub fn convert(&self, value: f64, direction: Conversion) -> Result<f64> {
        let gamma = self.gamma()?;
        Ok(match direction {
            Conversion::Xi2ToU => value * gamma / (2.0 * self.diffusion),
            Conversion::UToXi2 => value * 2.0 * self.diffusion / gamma,
            Conversion::TimeToTau => value * gamma,
            Conversion::TauToTime => value / gamma,
        })
    }

    /// Squared length corresponding to `u = 1`, i.e. `2D / Γ`.
    pub fn characteristic_xi2(&self) -> Result<f64> {
        self.convert(1.0, Conversion::UToXi2)
    }
}

/// Advisory check of the scale separation `B ≪ ξ_typ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// `B / ξ_typ`.
    pub ratio: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Warn,
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 0.1;

/// Compares the box diameter to the typical localization length
/// `sqrt(typical_xi2)`. A ratio at or above `threshold` warns.
pub fn validate_regime(
    box_diameter: f64,
    typical_xi2: f64,
    threshold: f64,
) -> Result<RegimeReport> {
    if !(box_diameter > 0.0 && typical_xi2 > 0.0 && threshold > 0.0) {
        return Err(Error::domain("regime check needs positive inputs"));
    }
    let ratio = box_diameter / typical_xi2.sqrt();
    let verdict = if ratio < threshold {
        Verdict::Pass
    } else {
        Verdict::Warn
    };
    Ok(RegimeReport {
        ratio,
        threshold,
        verdict,
    })
}

impl UnitsMap {
    /// [`validate_regime`] with `ξ_typ² = 2D/Γ` when no typical value is given.
    pub fn validate_regime(
        &self,
        box_diameter: f64,
        typical_xi2: Option<f64>,
        threshold: f64,
    ) -> Result<RegimeReport> {
        let xi2 = match typical_xi2 {
            Some(x) => x,
            None => self.characteristic_xi2()?,
        };
        validate_regime(box_diameter, xi2, threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_is_product() {
        let m = UnitsMap::new(1.0, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(m.gamma().unwrap(), 1.0);
        assert!(UnitsMap::new(0.0, 2.0, 0.5, 1.0).is_err());
        assert!(UnitsMap::new(1.0, 2.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn length_and_time_conversions() {
        let m = UnitsMap::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(m.convert(3.0, Conversion::Xi2ToU).unwrap(), 3.0);
        assert_eq!(m.convert(1.5, Conversion::TimeToTau).unwrap(), 3.0);
        assert_eq!(m.convert(3.0, Conversion::TauToTime).unwrap(), 1.5);
        assert_eq!(m.characteristic_xi2().unwrap(), 1.0);

        let m = UnitsMap::new(0.7, 3.1, 0.013, 2.9).unwrap();
        for xi2 in [1e-3, 0.37, 5.0, 1e4] {
            let u = m.convert(xi2, Conversion::Xi2ToU).unwrap();
            let back = m.convert(u, Conversion::UToXi2).unwrap();
            assert!((back - xi2).abs() <= 1e-15 * xi2, "{xi2} -> {back}");
        }
    }

    #[test]
    fn regime_threshold_is_closed() {
        assert_eq!(
            validate_regime(0.01, 1.0, 0.1).unwrap().verdict,
            Verdict::Pass
        );
        assert_eq!(
            validate_regime(0.5, 1.0, 0.1).unwrap().verdict,
            Verdict::Warn
        );
        assert_eq!(
            validate_regime(0.1, 1.0, 0.1).unwrap().verdict,
            Verdict::Warn
        );
        assert!(validate_regime(0.0, 1.0, 0.1).is_err());
    }
}
