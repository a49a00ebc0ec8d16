use chaoslab_core::bounds::gamma_m;
use chaoslab_core::distance::exact_distances;
use chaoslab_core::io::{kernel_to_json, parse_kernel};
use chaoslab_core::kernel::symmetrized_square_norms;
use chaoslab_core::malliavin::{carre_du_champ, gamma0, generator_jump_form};
use chaoslab_core::moments::{fourth_moment, Engine};
use chaoslab_core::{ChaosVector, Kernel, RademacherModel, Subset, ValueTable};
use proptest::prelude::*;

fn model_strategy(max_n: usize) -> impl Strategy<Value = RademacherModel> {
    prop::collection::vec(0.05f64..0.95, 1..=max_n).prop_map(|p| RademacherModel::new(p).unwrap())
}

fn table_for(model: &RademacherModel, seed: &[f64]) -> ValueTable {
    let len = 1usize << model.horizon();
    ValueTable::new(
        model.horizon(),
        (0..len)
            .map(|i| seed[i % seed.len()] * (1.0 + i as f64).ln())
            .collect(),
    )
    .unwrap()
}

fn kernel_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = Kernel> {
    (1..=max_n)
        .prop_flat_map(move |n| (Just(n), 1..=max_m.min(n)))
        .prop_flat_map(|(n, m)| {
            let count = chaoslab_core::numeric::binomial(n, m) as usize;
            (Just(n), Just(m), prop::collection::vec(-1.0f64..1.0, count))
        })
        .prop_map(|(n, m, vals)| {
            let sets = chaoslab_core::numeric::k_subsets(n, m);
            Kernel::from_subset_coefficients(m, n, sets.zip(vals).map(|(s, v)| (Subset(s), v)))
                .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_round_trips(model in model_strategy(6), seed in prop::collection::vec(-3.0f64..3.0, 1..9)) {
        let t = table_for(&model, &seed);
        let c = ChaosVector::decompose(&t, &model).unwrap();
        prop_assert!(c.to_table(&model).unwrap().max_abs_diff(&t) < 1e-11);
        let var = t.variance(&model).unwrap();
        prop_assert!((c.variance() - var).abs() < 1e-10 * (1.0 + var));
    }

    #[test]
    fn gamma_equals_pathwise_form(model in model_strategy(5), a in prop::collection::vec(-2.0f64..2.0, 1..7), b in prop::collection::vec(-2.0f64..2.0, 1..7)) {
        let (f, g) = (table_for(&model, &a), table_for(&model, &b));
        let fc = ChaosVector::decompose(&f, &model).unwrap();
        let gc = ChaosVector::decompose(&g, &model).unwrap();
        let scale = 1.0 + f.sup_norm() * g.sup_norm();
        let diff = carre_du_champ(&fc, &gc, &model).unwrap().max_abs_diff(&gamma0(&f, &g, &model).unwrap());
        prop_assert!(diff <= 1e-10 * scale);
        let spectral = fc.generator().to_table(&model).unwrap();
        prop_assert!(spectral.max_abs_diff(&generator_jump_form(&f, &model)) <= 1e-10 * (1.0 + f.sup_norm()));
    }

    #[test]
    fn influences_sum_to_order_times_mass(f in kernel_strategy(3, 8)) {
        let total: f64 = f.influences().iter().sum();
        let mass: f64 = f.entries().map(|(_, v)| v * v).sum();
        prop_assert!((total - f.order() as f64 * mass).abs() < 1e-12 * (1.0 + total));
        prop_assert!(f.sup_influence() <= total + 1e-15);
    }

    #[test]
    fn diagonal_part_within_gamma_bound(f in kernel_strategy(3, 6)) {
        let n = symmetrized_square_norms(&f);
        let bound = gamma_m(f.order()) * f.second_moment() * f.sup_influence();
        prop_assert!(n.diagonal <= bound * (1.0 + 1e-12) + 1e-300);
        let v = f.second_moment();
        prop_assert!(n.total() - 2.0 * v * v >= -1e-10 * v * v);
    }

    #[test]
    fn engines_agree(f in kernel_strategy(3, 7), p in 0.1f64..0.9) {
        let model = RademacherModel::homogeneous(p, f.horizon()).unwrap();
        let e = fourth_moment(&f, &model, Engine::Enumerate).unwrap();
        let z = fourth_moment(&f, &model, Engine::Factorized).unwrap();
        prop_assert!((e - z).abs() <= 1e-9 * e.abs().max(1e-300));
    }

    #[test]
    fn distances_in_range(f in kernel_strategy(2, 6), p in 0.1f64..0.9) {
        let model = RademacherModel::homogeneous(p, f.horizon()).unwrap();
        let t = ChaosVector::integral(&f.normalized().unwrap()).to_table(&model).unwrap();
        let d = exact_distances(&t, &model).unwrap();
        prop_assert!(d.kolmogorov > 0.0 && d.kolmogorov <= 1.0);
        prop_assert!(d.wasserstein > 0.0);
        // Wasserstein dominates via the density bound of Φ
        prop_assert!(d.kolmogorov <= (2.0 / std::f64::consts::PI).sqrt().sqrt() * d.wasserstein.sqrt() * 1.0001 + 1e-12);
    }

    #[test]
    fn kernel_files_round_trip(f in kernel_strategy(3, 7)) {
        let text = kernel_to_json(&f, None, None);
        let (g, m) = parse_kernel(&text).unwrap();
        prop_assert_eq!(f, g);
        prop_assert!(m.is_none());
    }
}
