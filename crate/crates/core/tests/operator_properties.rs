mod common;

use common::{field_of, random_entries, random_spec};
use opdef_core::linalg::{inner_product, singular_values, DenseMatrix, DenseVector};
use opdef_core::operators::OperatorSpec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec_for(seed: u64) -> OperatorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_spec(&mut rng, field_of(seed), 3)
}

fn sigma_max(m: &DenseMatrix) -> f64 {
    singular_values(m).unwrap()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncation_is_a_leading_block(seed in any::<u64>(), n in 1usize..20, extra in 1usize..12) {
        let t = spec_for(seed);
        let big = t.truncate(n + extra);
        prop_assert_eq!(t.truncate(n), big.block(n, n));
    }

    #[test]
    fn apply_agrees_with_truncation(seed in any::<u64>(), n in 1usize..24) {
        let t = spec_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let x = random_entries(&mut rng, t.field(), n);
        let direct = t.apply(&DenseVector::new(t.field(), x.clone()).unwrap(), n).unwrap();
        let via = t.truncate(n).mul_vec(&x);
        for (a, b) in direct.entries().iter().zip(&via) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn adjoint_is_an_involution(seed in any::<u64>()) {
        let t = spec_for(seed);
        let back = t.adjoint_spec().adjoint_spec();
        let diff = back.truncate(24).sub(&t.truncate(24)).unwrap();
        prop_assert!(diff.max_abs() <= 1e-12, "{}", diff.max_abs());
    }

    #[test]
    fn adjoint_probe_identity(seed in any::<u64>()) {
        let t = spec_for(seed);
        let ta = t.adjoint_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
        for _ in 0..100 {
            let x = DenseVector::new(t.field(), random_entries(&mut rng, t.field(), 16)).unwrap();
            let y = DenseVector::new(t.field(), random_entries(&mut rng, t.field(), 16)).unwrap();
            let lhs = inner_product(&t.apply_exact(&x).unwrap(), &y).unwrap().value();
            let rhs = inner_product(&x, &ta.apply_exact(&y).unwrap()).unwrap().value();
            prop_assert!((lhs - rhs).norm() <= 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn norm_bound_is_sound(seed in any::<u64>()) {
        let t = spec_for(seed);
        let bound = t.norm_bound();
        for n in [4, 16, 40] {
            let s = sigma_max(&t.truncate(n));
            prop_assert!(s <= bound + 1e-10, "N={n}: {s} > {bound}");
        }
    }

    #[test]
    fn tail_bound_is_sound(seed in any::<u64>(), n in 1usize..20) {
        let t = spec_for(seed);
        if let Some(tail) = t.tail_norm_bound(n) {
            let m = n + 24;
            let big = t.truncate(m);
            let mut small = big.clone();
            for i in 0..m {
                for j in 0..m {
                    if i >= n || j >= n {
                        small.set(i, j, opdef_core::linalg::C64::new(0.0, 0.0));
                    }
                }
            }
            let s = sigma_max(&big.sub(&small).unwrap());
            prop_assert!(s <= tail + 1e-10, "N={n}: {s} > {tail}");
        }
    }

    #[test]
    fn json_round_trips_bit_exactly(seed in any::<u64>()) {
        let t = spec_for(seed);
        let text = t.to_json();
        let back = OperatorSpec::from_json(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn random_trees_are_linear(seed in any::<u64>()) {
        let t = spec_for(seed);
        let report = t.linearity_check(20, seed);
        prop_assert!(report.passed, "{:?}", report);
    }

    #[test]
    fn complexify_preserves_truncations(seed in any::<u64>()) {
        let t = spec_for(seed & !1);
        let c = t.complexify().unwrap();
        prop_assert_eq!(c.truncate(16), t.truncate(16).to_complex());
    }
}

