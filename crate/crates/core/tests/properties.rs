//! Invariants as property tests over random piecewise-affine functions,
//! random points and random exponents.

use num_rational::{BigRational, Ratio};
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vicsek::besov::{ks_energy, CellSamples};
use vicsek::energy::{discrete_energy, energy_limit, gradient_norm, self_similarity_check, streaming_energy, Region};
use vicsek::experiments::{
    default_maximal_grid, maximal_function, morrey_check, partition_of_unity, phi_n, poincare_check,
    random_pairs,
};
use vicsek::function::sampler::Constant;
use vicsek::geometry::graph::shared_graph;
use vicsek::geometry::metric;
use vicsek::{Exponent, PaFunction64, PaFunctionQ};

fn ex(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn pa(seed: u64, level: u32) -> PaFunction64 {
    PaFunction64::random(level, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(3.0), 1.0f64..6.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distances_are_a_tree_metric(seed in any::<u64>(), m in 1u32..4) {
        let g = shared_graph(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let [x, y, z] = [0; 3].map(|_| g.point(rng.gen_range(0..g.vertex_count())));
        let d = |a, b| metric::distance(a, b).unwrap().to_f64();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        // four-point condition
        let w = g.point(rng.gen_range(0..g.vertex_count()));
        let mut s = [d(&x, &y) + d(&z, &w), d(&x, &z) + d(&y, &w), d(&x, &w) + d(&y, &z)];
        s.sort_by(f64::total_cmp);
        prop_assert!(s[2] - s[1] <= 1e-12);
    }

    #[test]
    fn energy_is_nondecreasing_in_level(seed in any::<u64>(), n in 0u32..3, p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        let f = PaFunctionQ::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let energies: Vec<BigRational> = (0..=4)
            .map(|m| {
                let g = shared_graph(m).unwrap();
                let v: Vec<BigRational> = if m >= n {
                    f.restrict(m).unwrap()
                } else {
                    g.points().map(|x| f.evaluate_point(&x).unwrap()).collect()
                };
                discrete_energy(&g, &v, ex(p)).unwrap()
            })
            .collect();
        for w in energies.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        // constant from the function's own level on
        prop_assert!(energies[n as usize..].windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn gradient_norm_matches_energy(seed in any::<u64>(), n in 0u32..4, p in exponent()) {
        let f = pa(seed, n);
        let a = energy_limit(&f, ex(p), &Region::Whole).unwrap();
        let b = gradient_norm(&f.weak_gradient(), ex(p), &Region::Whole).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
    }

    #[test]
    fn streaming_agrees_with_the_graph(seed in any::<u64>(), n in 0u32..3, m in 0u32..5) {
        let f = PaFunctionQ::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let g = shared_graph(m).unwrap();
        let v: Vec<BigRational> = g.points().map(|x| f.evaluate_point(&x).unwrap()).collect();
        prop_assert_eq!(streaming_energy(&f, ex(2.0), m).unwrap(), discrete_energy(&g, &v, ex(2.0)).unwrap());
    }

    #[test]
    fn self_similarity_is_exact_in_rationals(seed in any::<u64>(), n in 0u32..3, m in 0u32..3, p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        let f = PaFunctionQ::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let s = self_similarity_check(&f, ex(p), m).unwrap();
        prop_assert_eq!(s.lhs, s.rhs);
    }

    #[test]
    fn morrey_ratio_is_at_most_one(seed in any::<u64>(), n in 0u32..4, p in exponent()) {
        let f = pa(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let pairs = random_pairs(4, &Region::Whole, 100, &mut rng).unwrap();
        prop_assert!(morrey_check(&f, &Region::Whole, ex(p), &pairs).unwrap().max_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn poincare_mean_form_holds(seed in any::<u64>(), n in 0u32..3, k in 0u32..3, p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        use rand::Rng;
        let f = pa(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xba11);
        let g = shared_graph(2).unwrap();
        let c = g.point(rng.gen_range(0..g.vertex_count()));
        let r = poincare_check(&f, &c, &Ratio::new(1, 3i64.pow(k)), ex(p), 1).unwrap();
        prop_assert!(r.mean_form_ratio <= 1.0 + r.mean_form_ratio_err + 1e-12, "{:?}", r);
        prop_assert!(r.integral >= 0.0 && r.integral_err >= 0.0);
    }

    #[test]
    fn weak_norm_is_below_strong_norm(seed in any::<u64>(), n in 0u32..3, m in 1u32..4, p in exponent()) {
        let f = pa(seed, n);
        let r = maximal_function(&f, m, ex(p), &default_maximal_grid(m), 0, 0).unwrap();
        prop_assert!(r.chebyshev_ok(), "{:?}", r);
    }

    #[test]
    fn hats_sum_to_one(seed in any::<u64>(), n in 0u32..3) {
        use rand::Rng;
        let g = shared_graph(n + 2).unwrap();
        let x = g.point(ChaCha8Rng::seed_from_u64(seed).gen_range(0..g.vertex_count()));
        prop_assert!(partition_of_unity::<BigRational>(n, &x).unwrap().is_one());
    }

    #[test]
    fn interpolant_of_constant_is_constant(c in -10.0f64..10.0, n in 0u32..3) {
        let phi = phi_n(&Constant(c), n, n + 2).unwrap();
        prop_assert!(phi.values().iter().all(|v| (v - c).abs() <= 1e-12 * c.abs().max(1.0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ks_bounds_are_ordered(seed in any::<u64>(), n in 0u32..3, k in 0u32..3, p in exponent()) {
        let f = pa(seed, n);
        let samples = CellSamples::from_sampler(&f, 4);
        let v = ks_energy(&samples, &Ratio::new(2, 3i64.pow(k)), ex(p)).unwrap();
        prop_assert!(v.value >= 0.0 && v.err_lo >= 0.0 && v.err_hi >= 0.0);
        prop_assert!(v.lo() <= v.value && v.value <= v.hi());
    }
}
