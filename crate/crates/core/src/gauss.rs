//! Two Gaussian-localized particles on a line, post-selected on a yes
//! outcome of a proximity measurement. The posterior variances approach the
//! harmonic combination as the box shrinks.

use std::fmt;
use std::str::FromStr;
use std::thread;

use crate::error::{Error, Result};

/// How the box length `𝓑` maps onto the accepted separations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxConvention {
    /// `|r₁ - r₂| < 𝓑/2`: an acceptance interval of total width `𝓑`.
    #[default]
    Diameter,
    /// `|r₁ - r₂| < 𝓑`.
    Radius,
}

impl BoxConvention {
    /// Largest accepted separation.
    pub fn half_width(self, box_length: f64) -> f64 {
        match self {
            BoxConvention::Diameter => 0.5 * box_length,
            BoxConvention::Radius => box_length,
        }
    }
}

impl fmt::Display for BoxConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoxConvention::Diameter => "diameter",
            BoxConvention::Radius => "radius",
        })
    }
}

impl FromStr for BoxConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "diameter" => Ok(BoxConvention::Diameter),
            "radius" => Ok(BoxConvention::Radius),
            other => Err(Error::config(format!(
                "unknown box convention `{other}` (diameter | radius)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPair {
    pub xi1_sq: f64,
    pub xi2_sq: f64,
    pub box_diameter: f64,
    /// Points along `r₁` at the coarsest level.
    pub quad_points: usize,
    /// Window half-width along `r₁` in units of `min(ξ₁, ξ₂)`, widened by
    /// the box and the center offset.
    pub integration_halfwidth: f64,
    pub convention: BoxConvention,
    /// Prior center of particle 2 relative to particle 1.
    pub center_offset: f64,
    /// Relative change between resolutions that ends the doubling.
    pub tol: f64,
}

impl GaussPair {
    pub fn new(xi1_sq: f64, xi2_sq: f64, box_diameter: f64) -> Self {
        GaussPair {
            xi1_sq,
            xi2_sq,
            box_diameter,
            quad_points: 256,
            integration_halfwidth: 10.0,
            convention: BoxConvention::default(),
            center_offset: 0.0,
            tol: 1e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("xi1_sq", self.xi1_sq),
            ("xi2_sq", self.xi2_sq),
            ("box_diameter", self.box_diameter),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.integration_halfwidth >= 8.0) {
            return Err(Error::domain(format!(
                "integration half-width {} is below 8 standard deviations",
                self.integration_halfwidth
            )));
        }
        if self.quad_points < 16 {
            return Err(Error::domain("need at least 16 quadrature points"));
        }
        if !(self.center_offset.is_finite()) {
            return Err(Error::domain("center offset must be finite"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorMoments {
    pub mean1: f64,
    pub mean2: f64,
    pub var1: f64,
    pub var2: f64,
    /// Variance of `r₁ - r₂`.
    pub var_rel: f64,
    /// Probability of the yes outcome.
    pub norm: f64,
    /// `(r₁ points, separation points)` of the accepted level.
    pub resolution: (usize, usize),
}

/// `ξ₁² ξ₂² / (ξ₁² + ξ₂²)`.
pub fn contraction_limit(xi1_sq: f64, xi2_sq: f64) -> f64 {
    if xi1_sq.is_infinite() {
        return xi2_sq;
    }
    if xi2_sq.is_infinite() {
        return xi1_sq;
    }
    xi1_sq * xi2_sq / (xi1_sq + xi2_sq)
}

/// Trapezoid rule on the tensor grid of `r₁` and the separation
/// `d = r₁ - r₂`, the latter spanning exactly the accepted interval.
fn tensor_trapezoid(pair: &GaussPair, nr: usize, nd: usize) -> Result<PosteriorMoments> {
    let (a, b) = (pair.xi1_sq, pair.xi2_sq);
    let w = pair.convention.half_width(pair.box_diameter);
    let c = pair.center_offset;
    let half = pair.integration_halfwidth * a.min(b).sqrt() + w + c.abs();
    let hr = 2.0 * half / (nr - 1) as f64;
    let hd = 2.0 * w / (nd - 1) as f64;
    let norm1 = 1.0 / (2.0 * std::f64::consts::PI * a).sqrt();
    let norm2 = 1.0 / (2.0 * std::f64::consts::PI * b).sqrt();
    let ds: Vec<f64> = (0..nd).map(|k| -w + k as f64 * hd).collect();
    let wd: Vec<f64> = (0..nd)
        .map(|k| if k == 0 || k == nd - 1 { 0.5 * hd } else { hd })
        .collect();

    // sums of 1, r1, r1², d, d², r1 d
    let mut s = [0.0f64; 6];
    for i in 0..nr {
        let r1 = -half + i as f64 * hr;
        let wr = if i == 0 || i == nr - 1 { 0.5 * hr } else { hr };
        let p1 = norm1 * (-0.5 * r1 * r1 / a).exp();
        if p1 == 0.0 {
            continue;
        }
        let mut row = [0.0f64; 3];
        for (d, wk) in ds.iter().zip(&wd) {
            let r2 = r1 - d - c;
            let f = wk * (-0.5 * r2 * r2 / b).exp();
            row[0] += f;
            row[1] += f * d;
            row[2] += f * d * d;
        }
        let f = wr * p1 * norm2;
        s[0] += f * row[0];
        s[1] += f * r1 * row[0];
        s[2] += f * r1 * r1 * row[0];
        s[3] += f * row[1];
        s[4] += f * row[2];
        s[5] += f * r1 * row[1];
    }
    let norm = s[0];
    if !(norm >= 1e-300) {
        return Err(Error::VanishingNorm(norm));
    }
    let m1 = s[1] / norm;
    let md = s[3] / norm;
    let e11 = s[2] / norm;
    let edd = s[4] / norm;
    let e1d = s[5] / norm;
    let var1 = e11 - m1 * m1;
    let var_rel = edd - md * md;
    let cov1d = e1d - m1 * md;
    // r2 = r1 - d
    let var2 = var1 + var_rel - 2.0 * cov1d;
    Ok(PosteriorMoments {
        mean1: m1,
        mean2: m1 - md,
        var1,
        var2,
        var_rel,
        norm,
        resolution: (nr, nd),
    })
}

const MAX_LEVELS: usize = 14;

fn relative_change(a: &PosteriorMoments, b: &PosteriorMoments) -> f64 {
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
    rel(a.var1, b.var1)
        .max(rel(a.var2, b.var2))
        .max(rel(a.var_rel, b.var_rel))
}

/// Posterior moments by the tensor trapezoid rule. Each axis is doubled in
/// turn until `var1`, `var2` and `var_rel` change by less than `pair.tol`
/// relative; the `r₁` axis first, then the separation axis.
pub fn posterior_moments(pair: &GaussPair) -> Result<PosteriorMoments> {
    pair.validate()?;
    let mut nr = pair.quad_points;
    let mut nd = (pair.quad_points / 16).max(8) + 1;
    let mut prev = tensor_trapezoid(pair, nr, nd)?;
    for axis in 0..2 {
        let mut done = false;
        for _ in 0..MAX_LEVELS {
            if axis == 0 {
                nr = 2 * nr - 1;
            } else {
                nd = 2 * nd - 1;
            }
            let next = tensor_trapezoid(pair, nr, nd)?;
            let change = relative_change(&prev, &next);
            prev = next;
            if change < pair.tol {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Quadrature(format!(
                "variances still changing at {nr} x {nd} points"
            )));
        }
    }
    Ok(prev)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub boxes: Vec<f64>,
    pub moments: Vec<PosteriorMoments>,
    /// `|var1 - contraction_limit|` per box.
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log box`.
    pub order: f64,
}

/// Fits the order at which `var1` approaches the harmonic combination as
/// the box shrinks, using `template` for everything but the box.
pub fn convergence_study_with(template: &GaussPair, boxes: &[f64]) -> Result<ConvergenceStudy> {
    if boxes.len() < 2 {
        return Err(Error::domain("need at least two boxes"));
    }
    let scale = template.xi1_sq.min(template.xi2_sq).sqrt();
    if let Some(b) = boxes.iter().find(|b| !(**b > 0.0 && **b <= 0.5 * scale)) {
        return Err(Error::domain(format!(
            "box {b} is not small against the localization length {scale}"
        )));
    }
    let ratios: Vec<f64> = boxes.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios
        .iter()
        .any(|r| !(*r < 1.0) || (r - ratios[0]).abs() > 1e-9 * ratios[0])
    {
        return Err(Error::domain("boxes must decrease geometrically"));
    }
    let moments: Vec<PosteriorMoments> = thread::scope(|s| {
        let handles: Vec<_> = boxes
            .iter()
            .map(|&b| {
                let pair = GaussPair {
                    box_diameter: b,
                    ..*template
                };
                s.spawn(move || posterior_moments(&pair))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("quadrature thread panicked"))
            .collect::<Result<_>>()
    })?;
    let limit = contraction_limit(template.xi1_sq, template.xi2_sq);
    let errors: Vec<f64> = moments.iter().map(|m| (m.var1 - limit).abs()).collect();
    if errors.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Quadrature(format!(
            "errors do not decrease with the box: {errors:?}"
        )));
    }
    let xs: Vec<f64> = boxes.iter().map(|b| b.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(ConvergenceStudy {
        boxes: boxes.to_vec(),
        moments,
        errors,
        order: sxy / sxx,
    })
}

pub fn convergence_study(xi1_sq: f64, xi2_sq: f64, boxes: &[f64]) -> Result<ConvergenceStudy> {
    convergence_study_with(
        &GaussPair::new(xi1_sq, xi2_sq, boxes.first().copied().unwrap_or(1.0)),
        boxes,
    )
}
