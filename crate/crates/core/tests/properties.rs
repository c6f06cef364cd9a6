use proptest::prelude::*;

use locdyn::csvio::{read_density, write_density, Header};
use locdyn::gamma::gamma_closed;
use locdyn::gauss::{posterior_moments, GaussPair};
use locdyn::popmc::checkpoint::{decode, encode};
use locdyn::popmc::{run_transient, EntrantRule};
use locdyn::udist::{collision_kernel_with, combine, drift_shift, Deposition, UDensity, UGrid};

fn density(n: usize, h: f64, raw: &[f64]) -> UDensity {
    let grid = UGrid::with_bins(n, h).unwrap();
    let values = (0..=n).map(|i| raw[i % raw.len()]).collect();
    UDensity::new(grid, values).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0..5.0f64], 1..64)
}

fn top(p: &UDensity) -> f64 {
    let last = p.values().iter().rposition(|v| *v > 0.0).unwrap_or(0);
    p.grid().node(last)
}

proptest! {
    #[test]
    fn combine_is_bounded_and_symmetric(a in 1e-9..1e9f64, b in 1e-9..1e9f64) {
        let c = combine(a, b).unwrap();
        let m = a.min(b);
        prop_assert!(c <= m && c >= 0.5 * m * (1.0 - 1e-15));
        prop_assert_eq!(c, combine(b, a).unwrap());
        prop_assert_eq!(combine(a, f64::INFINITY).unwrap(), a);
    }

    #[test]
    fn kernel_mass_multiplies(
        n in 4usize..48,
        h in 0.01..0.5f64,
        p in values(),
        q in values(),
        node in any::<bool>(),
    ) {
        let dep = if node { Deposition::Node } else { Deposition::Cell };
        let (p, q) = (density(n, h, &p), density(n, h, &q));
        let k = collision_kernel_with(&p, &q, dep).unwrap();
        let expect = p.mass() * q.mass();
        prop_assert!((k.mass() - expect).abs() <= 1e-12 * expect.max(1.0), "{} vs {}", k.mass(), expect);
    }

    #[test]
    fn kernel_support_stays_below_both(
        n in 4usize..48,
        h in 0.01..0.5f64,
        p in values(),
        q in values(),
    ) {
        let (p, q) = (density(n, h, &p), density(n, h, &q));
        prop_assume!(p.mass() > 0.0 && q.mass() > 0.0);
        let bound = top(&p).min(top(&q));
        let node = collision_kernel_with(&p, &q, Deposition::Node).unwrap();
        prop_assert!(top(&node) <= bound + 1e-12);
        // a cell image may spill into the node above its upper edge
        let cell = collision_kernel_with(&p, &q, Deposition::Cell).unwrap();
        prop_assert!(top(&cell) <= bound + h * (1.0 + 1e-9));
    }

    #[test]
    fn laplace_starts_at_mass_and_decreases(
        n in 4usize..48,
        h in 0.01..0.5f64,
        p in values(),
        kappas in prop::collection::vec(0.0..10.0f64, 2..8),
    ) {
        let p = density(n, h, &p);
        prop_assert!((p.laplace(0.0).unwrap() - p.mass()).abs() <= 1e-15 * p.mass().max(1.0));
        let mut kappas = kappas;
        kappas.sort_by(f64::total_cmp);
        let l: Vec<f64> = kappas.iter().map(|k| p.laplace(*k).unwrap()).collect();
        prop_assert!(l.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn drift_keeps_mass_up_to_the_leak(
        n in 4usize..48,
        h in 0.01..0.5f64,
        p in values(),
        steps in 0.0..60.0f64,
    ) {
        let p = density(n, h, &p);
        let d = drift_shift(&p, steps * h).unwrap();
        prop_assert!((d.density.mass() + d.lost - p.mass()).abs() <= 1e-13 * p.mass().max(1.0));
        prop_assert!(d.lost >= 0.0);
    }

    #[test]
    fn gamma_increases_with_the_seed(tau in 1e-3..40.0f64, a in 1e-6..0.999f64, b in 1e-6..0.999f64) {
        prop_assume!(a < b);
        prop_assert!(gamma_closed(tau, a).unwrap() <= gamma_closed(tau, b).unwrap());
    }

    #[test]
    fn density_csv_round_trips(n in 1usize..64, h in 1e-4..2.0f64, p in values()) {
        let p = density(n, h, &p);
        let mut buf = Vec::new();
        write_density(&mut buf, &p, &Header::new()).unwrap();
        let (q, _) = read_density(buf.as_slice()).unwrap();
        prop_assert_eq!(p, q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn checkpoint_round_trips(seed in any::<u64>(), tau in 0.0..3.0f64, cap in prop::option::of(0.5..5.0f64)) {
        let entrant = cap.map_or(EntrantRule::Adopt, EntrantRule::Cap);
        let run = run_transient(1000, 0.05, tau, seed, entrant, &[]).unwrap();
        let bytes = encode(&run.population);
        let mut back = decode(&bytes).unwrap();
        prop_assert_eq!(encode(&back), bytes);
        let mut pop = run.population;
        pop.run_until(tau + 1.0).unwrap();
        back.run_until(tau + 1.0).unwrap();
        prop_assert_eq!(encode(&pop), encode(&back));
    }

    #[test]
    fn oracle_symmetry_and_monotonicity(a in 0.5..4.0f64, b in 0.5..4.0f64, box_small in 0.02..0.2f64) {
        let m = posterior_moments(&GaussPair::new(a, b, box_small)).unwrap();
        let swapped = posterior_moments(&GaussPair::new(b, a, box_small)).unwrap();
        prop_assert!((m.var1 - swapped.var2).abs() <= 1e-9 * m.var1);
        prop_assert!((m.var_rel - swapped.var_rel).abs() <= 1e-9 * m.var_rel);
        prop_assert!((m.norm - swapped.norm).abs() <= 1e-9 * m.norm);
        let wider = posterior_moments(&GaussPair::new(a, b, 2.0 * box_small)).unwrap();
        prop_assert!(m.var1 < wider.var1);
        prop_assert!(0.0 < m.norm && m.norm < wider.norm && wider.norm < 1.0);
    }
}
