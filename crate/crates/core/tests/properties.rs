use std::f64::consts::PI;

use latticeband_core::{
    band_structure, builtin, canonicalize, count_wavevectors, detect_nonmonotonic, dispersion_at,
    oracle_check, reduced_stiffness, LatticeModel, MassNode, PathSpec, RawModel, Spring,
    Wavevector,
};
use proptest::prelude::*;

fn spring_strategy(n: usize, d: usize) -> impl Strategy<Value = Spring> {
    (
        0..n,
        0..n,
        prop::collection::vec(-2i32..=2, d),
        0.01f64..=10.0,
    )
        .prop_filter("zero self spring", |(a, b, o, _)| {
            a != b || o.iter().any(|&c| c != 0)
        })
        .prop_map(|(a, b, offset, k)| Spring {
            a: format!("n{a}"),
            b: format!("n{b}"),
            offset,
            k,
            label: None,
        })
}

fn raw_model() -> impl Strategy<Value = RawModel> {
    (1usize..=4, 1usize..=2).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(0.2f64..=5.0, n),
            prop::collection::vec(spring_strategy(n, d), 1..=7),
        )
            .prop_map(move |(masses, springs)| RawModel {
                name: "random".into(),
                dimension: d,
                nodes: masses
                    .into_iter()
                    .enumerate()
                    .map(|(i, mass)| MassNode {
                        id: format!("n{i}"),
                        mass,
                    })
                    .collect(),
                springs,
            })
    })
}

fn model() -> impl Strategy<Value = LatticeModel> {
    raw_model().prop_map(|raw| raw.into_model().unwrap())
}

fn mu_in(d: usize) -> impl Strategy<Value = Wavevector> {
    prop::collection::vec(-PI..PI, d).prop_map(Wavevector::new)
}

fn model_and_mu() -> impl Strategy<Value = (LatticeModel, Wavevector)> {
    model().prop_flat_map(|m| {
        let d = m.dimension();
        (Just(m), mu_in(d))
    })
}

fn rank(id: &str) -> Option<usize> {
    id.strip_prefix('n').and_then(|s| s.parse().ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalize_is_idempotent(s in spring_strategy(4, 2)) {
        let once = canonicalize(&s, rank).unwrap();
        prop_assert_eq!(canonicalize(&once, rank).unwrap(), once.clone());
        let first = once.offset.iter().find(|&&c| c != 0);
        prop_assert!(first.is_none_or(|&c| c > 0));
    }

    #[test]
    fn reversed_springs_describe_the_same_model(raw in raw_model()) {
        let mut flipped = raw.clone();
        for s in &mut flipped.springs {
            std::mem::swap(&mut s.a, &mut s.b);
            s.offset.iter_mut().for_each(|c| *c = -*c);
        }
        flipped.springs.reverse();
        let sorted = |m: LatticeModel| {
            let mut bonds = m.springs().to_vec();
            bonds.sort_by(|x, y| (x.a, x.b, &x.offset).cmp(&(y.a, y.b, &y.offset)));
            bonds
        };
        let a = sorted(raw.into_model().unwrap());
        let b = sorted(flipped.into_model().unwrap());
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!((x.a, x.b, &x.offset), (y.a, y.b, &y.offset));
            prop_assert!((x.k - y.k).abs() <= 1e-12 * x.k.max(1.0));
        }
    }

    #[test]
    fn json_round_trip(m in model()) {
        prop_assert_eq!(LatticeModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn frequencies_respect_gershgorin((m, mu) in model_and_mu()) {
        let k = reduced_stiffness(&m, &mu);
        let masses = m.masses();
        let bound = (0..m.node_count())
            .map(|i| (0..m.node_count()).map(|j| k[(i, j)].norm() / (masses[i] * masses[j]).sqrt()).sum::<f64>())
            .fold(0.0, f64::max);
        let top = *dispersion_at(&m, &mu).unwrap().omegas.last().unwrap();
        prop_assert!(top * top <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn frequencies_are_even_in_mu((m, mu) in model_and_mu()) {
        let minus = Wavevector::new(mu.components().iter().map(|x| -x).collect::<Vec<_>>());
        let a = dispersion_at(&m, &mu).unwrap().omegas;
        let b = dispersion_at(&m, &minus).unwrap().omegas;
        let tol = 1e-9 * (1.0 + a.last().unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= tol);
        }
    }

    #[test]
    fn full_zone_counts_are_even(omega in 0.05f64..4.0, k1 in 0.1f64..2.0, k2 in 0.0f64..2.0) {
        let m = builtin("chain2n").unwrap().with_overrides(&[("K1", k1), ("K2", k2)]).unwrap();
        let count = count_wavevectors(&m, omega, &PathSpec::segment(vec![-PI], vec![PI], 401)).unwrap();
        prop_assert_eq!(count % 2, 0);
    }

    #[test]
    fn band_table_rows_match_pointwise(m in model()) {
        let spec = PathSpec::new(vec![Wavevector::zero(m.dimension()), Wavevector::new(vec![PI; m.dimension()])], 17);
        let table = band_structure(&m, &spec).unwrap();
        prop_assert_eq!(table.rows.len(), 17);
        for row in &table.rows {
            prop_assert_eq!(&row.omegas, &dispersion_at(&m, &row.mu).unwrap().omegas);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_models_pass_the_oracle(m in model(), n in 1usize..=5) {
        let cells = vec![n; m.dimension()];
        let report = oracle_check(&m, &cells).unwrap();
        prop_assert!(report.passed, "{:?}", report);
    }
}

#[test]
fn nearest_neighbor_three_mass_chain_is_monotone() {
    let m = builtin("trichain3")
        .unwrap()
        .with_overrides(&[("K5", 0.0), ("K6", 0.0), ("K7", 0.0)])
        .unwrap();
    let table = band_structure(&m, &PathSpec::segment(vec![0.0], vec![PI], 1001)).unwrap();
    for band in 0..3 {
        assert!(
            !detect_nonmonotonic(&table, band).unwrap().nonmonotonic,
            "band {band}"
        );
    }
}

#[test]
fn builtins_pass_the_oracle_at_small_sizes() {
    for name in latticeband_core::BUILTIN_NAMES {
        let m = builtin(name).unwrap();
        for n in 1..=4 {
            let r = oracle_check(&m, &vec![n; m.dimension()]).unwrap();
            assert!(r.passed, "{name} N={n}: {r:?}");
        }
    }
}
