use netfdm_core::fdm::{
    delta_aggregate, delta_linear_exact, fdm_indicator, fdm_lipschitz, fdm_product_holder, fdm_sum, DeltaMatrix, DeltaMode,
    MomentBook,
};
use netfdm_core::limits::{clt_conditions_sar, min_sums, min_sums_naive};
use netfdm_core::linalg::{DenseMatrix, Lu};
use netfdm_core::netgen::{gen_er, geodesic_distances, row_normalize, shell_sizes, Graph};
use netfdm_core::sar::{compute_splus, splus, LinkFunction, NoiseModel, SPlusStrategy, SarSolver, SarSpec};
use netfdm_core::stats::{ks_normal, normal_cdf};
use netfdm_core::Streams;
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (5usize..40, prop::collection::vec(any::<(u8, u8)>(), 0..80)).prop_map(|(n, pairs)| {
        let mut g = Graph::new(n);
        for (a, b) in pairs {
            let (a, b) = (a as usize % n, b as usize % n);
            if a != b && !g.has_edge(a, b) {
                g.add_edge(a, b, 1.0).unwrap();
            }
        }
        g
    })
}

fn nonneg_matrix(max_n: usize) -> impl Strategy<Value = DenseMatrix> {
    (2usize..max_n).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..2.0, Just(0.5)], n * n)
            .prop_map(move |v| DenseMatrix::from_row_major(n, n, v).unwrap())
    })
}

fn link(kind: u8) -> LinkFunction {
    match kind % 3 {
        0 => LinkFunction::Identity,
        1 => LinkFunction::Tobit,
        _ => LinkFunction::custom("tanh", 1.0, libm::tanh).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesic_triangle_inequality(g in graph_strategy()) {
        let d = geodesic_distances(&g);
        let n = g.n();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..n {
                    if let (Some(ij), Some(jk)) = (d.get(i, j), d.get(j, k)) {
                        prop_assert!(d.get(i, k).unwrap() <= ij + jk);
                    }
                }
            }
        }
    }

    #[test]
    fn shells_cover_component(g in graph_strategy(), node in 0usize..1000) {
        let d = geodesic_distances(&g);
        let i = node % g.n();
        let shells = shell_sizes(&d, i);
        prop_assert_eq!(shells[0], 1);
        let component = (0..g.n()).filter(|&j| d.get(i, j).is_some()).count();
        prop_assert_eq!(shells.iter().sum::<usize>(), component);
    }

    #[test]
    fn normalized_rows_sum_to_one_or_zero(g in graph_strategy()) {
        let w = row_normalize(&g);
        for (j, s) in w.row_sums().into_iter().enumerate() {
            prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-12);
            prop_assert_eq!(w.get(j, j), 0.0);
        }
    }

    #[test]
    fn er_is_seed_deterministic(n in 2usize..200, seed in any::<u64>()) {
        let deg = 1.0 + (seed % 7) as f64 * (n as f64 - 2.0) / 7.0;
        let a = gen_er(n, deg, Streams::new(seed)).unwrap();
        let b = gen_er(n, deg, Streams::new(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn perturbations_stay_inside_splus_envelope(
        g in graph_strategy(),
        lambda in -0.95f64..0.95,
        kind in any::<u8>(),
        seed in any::<u64>(),
    ) {
        let w = row_normalize(&g);
        let spec = SarSpec::centered(w, link(kind), lambda, NoiseModel::gaussian(1.0).unwrap()).unwrap();
        let solver = SarSolver::new(&spec).unwrap();
        let s = compute_splus(&spec).unwrap();
        let streams = Streams::new(seed);
        let e1 = spec.draw_noise(&mut streams.rng(&[1]));
        let e2 = spec.draw_noise(&mut streams.rng(&[2]));
        let y1 = solver.solve(&e1).unwrap();
        let y2 = solver.solve(&e2).unwrap();
        let gap: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| (a - b).abs()).collect();
        let envelope = s.matrix.mul_vec(&gap);
        for j in 0..spec.n() {
            prop_assert!((y1[j] - y2[j]).abs() <= envelope[j] + 1e-8);
        }
    }

    #[test]
    fn identity_fixed_point_matches_direct(g in graph_strategy(), lambda in -0.9f64..0.9, seed in any::<u64>()) {
        let spec = SarSpec::centered(row_normalize(&g), LinkFunction::Identity, lambda, NoiseModel::gaussian(1.0).unwrap()).unwrap();
        let solver = SarSolver::new(&spec).unwrap();
        let e = spec.draw_noise(&mut Streams::new(seed).rng(&[0]));
        let direct = solver.solve(&e).unwrap();
        let traced = solver.solve_traced(&e).unwrap();
        for (a, b) in direct.iter().zip(&traced.solution) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
        for pair in traced.steps.windows(2) {
            prop_assert!(pair[1] <= spec.zeta() * pair[0] + 1e-13);
        }
    }

    #[test]
    fn splus_row_norm_bound(g in graph_strategy(), lambda in -0.95f64..0.95) {
        let w = row_normalize(&g);
        let s = splus(&w, 1.0, lambda, SPlusStrategy::Auto).unwrap();
        prop_assert!(s.matrix.as_slice().iter().all(|&v| v >= 0.0));
        prop_assert!(s.matrix.norm_inf() <= 1.0 / (1.0 - lambda.abs()) + 1e-9);
        for j in 0..w.n() {
            prop_assert!(s.get(j, j) >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn min_sum_variants_ordered_and_exact(d in nonneg_matrix(14)) {
        let fast = min_sums(&d);
        let slow = min_sums_naive(&d);
        for i in 0..d.cols() {
            prop_assert!((fast.literal[i] - slow.literal[i]).abs() <= 1e-12 * (1.0 + slow.literal[i]));
            prop_assert!((fast.order_free[i] - slow.order_free[i]).abs() <= 1e-12 * (1.0 + slow.order_free[i]));
            prop_assert!((fast.ranked[i] - slow.ranked[i]).abs() <= 1e-12 * (1.0 + slow.ranked[i]));
            prop_assert!(fast.literal[i] <= fast.order_free[i] + 1e-12);
            prop_assert!(fast.ranked[i] <= fast.order_free[i] + 1e-12);
        }
    }

    #[test]
    fn order_free_statistic_is_permutation_invariant(g in graph_strategy(), lambda in 0.05f64..0.9, shift in 1usize..100) {
        let w = row_normalize(&g);
        let s = splus(&w, 1.0, lambda, SPlusStrategy::Direct).unwrap();
        let n = w.n();
        let perm: Vec<usize> = (0..n).map(|k| (k * (2 * shift + 1) + shift) % n).collect();
        let mut seen = vec![false; n];
        for &k in &perm { seen[k] = true; }
        prop_assume!(seen.iter().all(|&b| b));
        let mut permuted = s.clone();
        permuted.matrix = DenseMatrix::from_fn(n, n, |j, i| s.get(perm[j], perm[i]));
        let a = clt_conditions_sar(&s, 4.0).unwrap();
        let b = clt_conditions_sar(&permuted, 4.0).unwrap();
        prop_assert!((a.min_sum_order_free - b.min_sum_order_free).abs() <= 1e-10 * a.min_sum_order_free);
        prop_assert!((a.max_influence - b.max_influence).abs() <= 1e-12 * a.max_influence);
    }

    #[test]
    fn statistics_grow_with_lambda(g in graph_strategy()) {
        let w = row_normalize(&g);
        let mut last = (0.0, 0.0, 0.0);
        for lambda in [0.2, 0.3, 0.4, 0.8] {
            let r = clt_conditions_sar(&splus(&w, 1.0, lambda, SPlusStrategy::Auto).unwrap(), 4.0).unwrap();
            prop_assert!(r.max_influence >= last.0 - 1e-12);
            prop_assert!(r.min_sum >= last.1 - 1e-12);
            prop_assert!(r.min_sum_order_free >= last.2 - 1e-12);
            last = (r.max_influence, r.min_sum, r.min_sum_order_free);
        }
    }

    #[test]
    fn exact_deltas_grow_with_order(d in nonneg_matrix(8), p in 1.0f64..6.0, extra in 0.0f64..4.0) {
        let noise = NoiseModel::gaussian(1.3).unwrap();
        let lo = delta_linear_exact(&d, &noise, p).unwrap();
        let hi = delta_linear_exact(&d, &noise, p + extra).unwrap();
        for (a, b) in lo.matrix().as_slice().iter().zip(hi.matrix().as_slice()) {
            prop_assert!(*a <= *b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn aggregate_q1_is_mean_total(d in nonneg_matrix(10)) {
        let delta = DeltaMatrix::new(d.clone(), 2.0, DeltaMode::Exact).unwrap();
        let total: f64 = d.as_slice().iter().sum();
        let agg = delta_aggregate(&delta, 1.0).unwrap();
        prop_assert!((agg.value - total / d.cols() as f64).abs() <= 1e-12 * (1.0 + total));
    }

    #[test]
    fn transformations_are_monotone(d in nonneg_matrix(8), bump in 0.0f64..1.0, c in 0.0f64..3.0) {
        let small = DeltaMatrix::new(d.clone(), 2.0, DeltaMode::Exact).unwrap();
        let large = DeltaMatrix::new(d.map(|v| v + bump), 2.0, DeltaMode::Exact).unwrap();
        let le = |a: &DeltaMatrix, b: &DeltaMatrix| a.matrix().as_slice().iter().zip(b.matrix().as_slice()).all(|(x, y)| *x <= *y + 1e-12);
        prop_assert!(le(&fdm_lipschitz(&small, c).unwrap(), &fdm_lipschitz(&large, c).unwrap()));
        prop_assert!(le(&fdm_indicator(&small, Some(c)).unwrap(), &fdm_indicator(&large, Some(c)).unwrap()));
        prop_assert!(le(&fdm_sum(&small, &small).unwrap(), &fdm_sum(&large, &large).unwrap()));
    }

    #[test]
    fn product_aggregate_inequality(d1 in nonneg_matrix(8), scale in 0.1f64..3.0, zn in 0.1f64..3.0, yn in 0.1f64..3.0) {
        let n = d1.cols();
        let d2 = DenseMatrix::from_fn(n, n, |j, i| scale * d1[(i, j)]);
        let dy = DeltaMatrix::new(d1, 4.0, DeltaMode::Exact).unwrap();
        let dz = DeltaMatrix::new(d2, 4.0, DeltaMode::Exact).unwrap();
        let book = MomentBook::new().with("y", 4.0, yn).unwrap().with("z", 4.0, zn).unwrap();
        let prod = fdm_product_holder(&dy, &dz, &book, ("y", "z"), 2.0).unwrap();
        let lhs = delta_aggregate(&prod, 2.0).unwrap().value;
        let rhs = 2.0 * zn * zn * delta_aggregate(&dy, 2.0).unwrap().value + 2.0 * yn * yn * delta_aggregate(&dz, 2.0).unwrap().value;
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn ks_matches_double_loop(xs in prop::collection::vec(-4.0f64..4.0, 1..300)) {
        let fast = ks_normal(&xs);
        let r = xs.len() as f64;
        let mut slow: f64 = 0.0;
        for &x in &xs {
            let f = normal_cdf(x);
            let le = xs.iter().filter(|&&y| y <= x).count() as f64 / r;
            let lt = xs.iter().filter(|&&y| y < x).count() as f64 / r;
            slow = slow.max((le - f).abs()).max((f - lt).abs());
        }
        prop_assert!((fast - slow).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&fast));
    }
}

#[test]
fn linear_bound_dominates_exact() {
    for seed in 0..10 {
        let g = gen_er(60, 3.0, Streams::new(seed)).unwrap();
        let spec = SarSpec::centered(row_normalize(&g), LinkFunction::Identity, 0.4, NoiseModel::gaussian(1.0).unwrap()).unwrap();
        let a = Lu::factor(&spec.system_matrix()).unwrap().inverse();
        let exact = delta_linear_exact(&a, spec.noise(), 4.0).unwrap();
        let bound = netfdm_core::fdm::delta_sar_bound(&spec, 4.0).unwrap();
        for (e, b) in exact.matrix().as_slice().iter().zip(bound.matrix().as_slice()) {
            assert!(*e <= *b + 1e-12);
        }
    }
}
