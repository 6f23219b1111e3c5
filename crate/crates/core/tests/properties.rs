use num_traits::ToPrimitive;
use orbitlab_core::classify::{classify_report, cycle_product, eigenvalues};
use orbitlab_core::polymap::all_multi_indices;
use orbitlab_core::solver::{solve, solve_univariate, Method, SeedPlan, SolveConfig, SolveReport};
use orbitlab_core::{Field, PolyMap, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Random complex map with coefficients in the unit box.
fn arb_map(dim: usize, degree: u32) -> impl Strategy<Value = PolyMap> {
    let len = all_multi_indices(dim, degree).len() * dim;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |v| {
        let values: Vec<C64> = v.into_iter().map(|(re, im)| c(re, im)).collect();
        PolyMap::from_coefficient_vector(dim, degree, Field::Complex, &values).unwrap()
    })
}

fn arb_point(dim: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6), dim)
        .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect())
}

fn arb_case() -> impl Strategy<Value = (PolyMap, Vec<C64>, usize)> {
    (1usize..=2, 2u32..=3, 1usize..=3)
        .prop_flat_map(|(dim, degree, k)| (arb_map(dim, degree), arb_point(dim), Just(k)))
}

/// Greedy nearest matching of two multisets; returns the worst distance.
fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut pool = b.to_vec();
    let mut worst = 0.0f64;
    for x in a {
        let (i, d) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(i);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chain_rule_matches_finite_differences((map, x, k) in arb_case()) {
        let (_, jac) = map.iterate(&x, k).unwrap();
        let h = 1e-6;
        let dim = map.dim();
        for j in 0..dim {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[j] += h;
            minus[j] -= h;
            let (fp, _) = map.iterate(&plus, k).unwrap();
            let (fm, _) = map.iterate(&minus, k).unwrap();
            for i in 0..dim {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                let exact = jac.entry(i, j);
                let err = (fd - exact).norm() / exact.norm().max(1.0);
                prop_assert!(err <= 1e-5, "entry ({i},{j}): {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn symbolic_iterate_agrees_with_orbit((map, x, k) in (2u32..=3, 1usize..=3)
        .prop_flat_map(|(d, k)| (arb_map(1, d), arb_point(1), Just(k))))
    {
        let symbolic = map.compose_symbolic(k, 1 << 12).unwrap();
        let direct = map.iterate(&x, k).unwrap().0[0];
        let via = symbolic.evaluate(&x).unwrap()[0];
        prop_assert!((direct - via).norm() <= 1e-10 * direct.norm().max(1.0));
    }

    #[test]
    fn exact_expansion_matches_floating(coeffs in prop::collection::vec(-3i32..=3, 3), k in 1usize..=3) {
        let real: Vec<f64> = coeffs.iter().map(|&v| v as f64).collect();
        let map = PolyMap::univariate_real(&real).unwrap();
        let exact = map.compose_symbolic_exact(k, 1 << 12).unwrap();
        let float = map.compose_symbolic(k, 1 << 12).unwrap().univariate_coeffs().unwrap();
        for (i, e) in exact.iter().enumerate() {
            let f = float.get(i).map(|z| z.re).unwrap_or(0.0);
            prop_assert_eq!(e.to_f64().unwrap(), f, "coefficient {}", i);
        }
    }

    #[test]
    fn scale_conjugation_preserves_counts_and_multipliers(
        map in arb_map(1, 2).prop_filter("nondegenerate", |m| {
            m.univariate_coeffs().unwrap()[2].norm() > 0.2
        }),
        s in prop_oneof![0.25f64..0.8, 1.25f64..4.0],
        k in 1usize..=3,
    ) {
        let conj = map.conjugate_by_scale(s).unwrap();
        let cfg = SolveConfig::default();
        let a = solve_univariate(&map, k, &cfg).unwrap();
        let b = solve_univariate(&conj, k, &cfg).unwrap();
        prop_assert_eq!(a.complex_count, b.complex_count);
        let mults = |m: &PolyMap, r: &SolveReport| -> Vec<C64> {
            r.points.iter().map(|p| m.iterate(&p.location, k).unwrap().1.entry(0, 0)).collect()
        };
        let (ma, mb) = (mults(&map, &a), mults(&conj, &b));
        let scale = ma.iter().chain(&mb).map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(multiset_distance(&ma, &mb) <= 1e-6 * scale);
    }

    #[test]
    fn cycle_multipliers_do_not_depend_on_base_point(map in arb_map(1, 2), k in 2usize..=4) {
        let report = solve_univariate(&map, k, &SolveConfig::default()).unwrap();
        let orbits = classify_report(&map, &report, 1e-6).unwrap();
        for orbit in orbits.iter().filter(|o| o.least_period == k) {
            let base = eigenvalues(&cycle_product(&map, &orbit.points).unwrap()).unwrap();
            for shift in 1..orbit.points.len() {
                let mut rotated = orbit.points.clone();
                rotated.rotate_left(shift);
                let other = eigenvalues(&cycle_product(&map, &rotated).unwrap()).unwrap();
                let scale = base[0].norm().max(1.0);
                prop_assert!(multiset_distance(&base, &other) <= 1e-6 * scale);
            }
        }
    }
}

#[test]
fn planar_cycle_multipliers_do_not_depend_on_base_point() {
    // (x, y) -> (x^2 + 0.3 y, y^2 - 0.2 x), period-2 cycles
    let map = PolyMap::new(
        2,
        2,
        Field::Complex,
        [
            (vec![2, 0], vec![c(1.0, 0.0), c(0.0, 0.0)]),
            (vec![0, 1], vec![c(0.3, 0.0), c(0.0, 0.0)]),
            (vec![0, 2], vec![c(0.0, 0.0), c(1.0, 0.0)]),
            (vec![1, 0], vec![c(0.0, 0.0), c(-0.2, 0.0)]),
        ],
    )
    .unwrap();
    let config = SolveConfig {
        method: Method::Newton {
            plan: SeedPlan {
                lower: -2.0,
                upper: 2.0,
                resolution: 5,
                random: 200,
                complex: true,
            },
            rng_seed: 1,
        },
        ..SolveConfig::default()
    };
    let report = solve(&map, 2, &config).unwrap();
    let orbits = classify_report(&map, &report, 1e-6).unwrap();
    let cycles: Vec<_> = orbits.iter().filter(|o| o.least_period == 2).collect();
    assert!(!cycles.is_empty());
    for orbit in cycles {
        let base = eigenvalues(&cycle_product(&map, &orbit.points).unwrap()).unwrap();
        let mut rotated = orbit.points.clone();
        rotated.rotate_left(1);
        let other = eigenvalues(&cycle_product(&map, &rotated).unwrap()).unwrap();
        let scale = base.iter().map(|z| z.norm()).fold(1.0, f64::max);
        assert!(multiset_distance(&base, &other) <= 1e-8 * scale);
    }
}
