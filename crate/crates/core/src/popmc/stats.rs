use log::warn;

use super::population::Population;
use crate::error::{Error, Result};
use crate::udist::{Cdf, UDensity, UGrid};

/// Normalized histogram of the localized particles. Each value is split
/// linearly between its two neighbouring nodes; values past the grid are
/// left out.
pub fn empirical_density(pop: &Population, grid: UGrid) -> Result<UDensity> {
    empirical_values_density(&pop.localized_values(), grid)
}

pub fn empirical_values_density(values: &[f64], grid: UGrid) -> Result<UDensity> {
    if values.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut m = vec![0.0; grid.len()];
    let mut outside = 0usize;
    for &u in values {
        match grid.locate(u) {
            Some((k, f)) => {
                m[k] += 1.0 - f;
                m[k + 1] += f;
            }
            None => outside += 1,
        }
    }
    if outside == values.len() {
        return Err(Error::ZeroMass);
    }
    if outside > 0 {
        warn!(
            "{outside} of {} values lie past u_max = {}",
            values.len(),
            grid.u_max()
        );
    }
    let total = (values.len() - outside) as f64;
    let dens = m
        .iter()
        .enumerate()
        .map(|(i, c)| c / (total * grid.weight(i)))
        .collect();
    UDensity::new(grid, dens)
}

/// `sup |F_emp - F_ref|` over the localized particles.
pub fn ks_distance(pop: &Population, reference: &UDensity) -> Result<f64> {
    ks_statistic(&pop.localized_values(), &reference.cdf()?)
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: &Cdf) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf.eval(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popmc::McOptions;
    use crate::udist::InitialProfile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> UGrid {
        UGrid::new(30.0, 0.05).unwrap()
    }

    #[test]
    fn equal_values_give_a_point_mass() {
        let pop = Population::with_states(vec![2.0; 1000], &McOptions::new(1000, 0)).unwrap();
        let d = empirical_density(&pop, grid()).unwrap();
        let expect = UDensity::point_mass(grid(), 2.0).unwrap();
        assert!(d.l1_distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn inverse_cdf_sample_passes_ks() {
        let reference = UDensity::from_profile(grid(), InitialProfile::UExpU).unwrap();
        let cdf = reference.cdf().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| cdf.inverse(rng.random::<f64>())).collect();
        let d = ks_statistic(&xs, &cdf).unwrap();
        assert!(d < 1.63 / (n as f64).sqrt(), "{d}");
    }

    #[test]
    fn self_comparison_is_grid_limited() {
        let reference = UDensity::from_profile(grid(), InitialProfile::UExpU).unwrap();
        let cdf = reference.cdf().unwrap();
        let xs: Vec<f64> = (0..5000)
            .map(|k| cdf.inverse((k as f64 + 0.5) / 5000.0))
            .collect();
        let pop = Population::with_states(xs, &McOptions::new(5000, 0)).unwrap();
        let own = empirical_density(&pop, grid()).unwrap();
        let d = ks_distance(&pop, &own).unwrap();
        let peak = own.values().iter().cloned().fold(0.0, f64::max);
        assert!(d <= peak * grid().h() + 1.0 / 5000.0, "{d}");
    }

    #[test]
    fn ties_and_empty_sets() {
        let g = UGrid::with_bins(10, 0.1).unwrap();
        let cdf = UDensity::from_fn(g, |_| 1.0).unwrap().cdf().unwrap();
        assert!((ks_statistic(&[0.5, 0.5], &cdf).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(
            ks_statistic(&[], &cdf),
            Err(Error::EmptyPopulation)
        ));
        let none = Population::with_states(vec![f64::INFINITY; 4], &McOptions::new(4, 0)).unwrap();
        assert!(matches!(
            empirical_density(&none, g),
            Err(Error::EmptyPopulation)
        ));
    }
}
