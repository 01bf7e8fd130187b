use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use widths_core::mixed_norm_core::*;
use widths_core::Error;

fn e(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

#[test]
fn exponent_rejects_out_of_range() {
    for bad in [1.0, 0.5, -2.0, f64::INFINITY, f64::NAN] {
        assert!(matches!(Exponent::new(bad), Err(Error::Domain(_))), "{bad}");
    }
}

#[test]
fn dual_exponent_examples() {
    assert_eq!(dual_exponent(e(2.0)).value(), 2.0);
    assert!((dual_exponent(e(4.0)).value() - 4.0 / 3.0).abs() < 1e-15);
    assert!((dual_exponent(e(1.5)).value() - 3.0).abs() < 1e-12);
    for p in [1.1, 1.7, 3.0, 9.5] {
        assert!((dual_exponent(dual_exponent(e(p))).value() - p).abs() < 1e-12);
    }
}

#[test]
fn mixed_norm_examples() {
    let ones = MixedVector::new(2, 2, vec![1.0; 4]).unwrap();
    assert!((mixed_norm(&ones, e(2.0), e(2.0)) - 2.0).abs() < 1e-14);
    // columns (3,0) and (0,4): inner l_1 norms 3 and 4, outer l_2 gives 5
    let x = MixedVector::new(2, 2, vec![3.0, 0.0, 0.0, 4.0]).unwrap();
    let p1 = 1.0 + 1e-12;
    assert!((norm_slice(x.as_slice(), 2, p1, 2.0) - 5.0).abs() < 1e-9);
    assert_eq!(mixed_norm(&MixedVector::zeros(3, 2), e(3.0), e(1.5)), 0.0);
}

#[test]
fn mixed_vector_rejects_bad_shapes() {
    assert!(MixedVector::new(0, 2, vec![]).is_err());
    assert!(MixedVector::new(2, 2, vec![1.0; 3]).is_err());
    assert!(MixedVector::new(1, 1, vec![f64::NAN]).is_err());
}

#[test]
fn rearrangement_examples() {
    assert_eq!(rearrange_nonincreasing(&[-3.0, 1.0, 2.0]), vec![3.0, 2.0, 1.0]);
    assert_eq!(rearrange_nonincreasing(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
    assert_eq!(rearrange_nonincreasing(&[1.0, 1.0, 5.0, 1.0]), vec![5.0, 1.0, 1.0, 1.0]);
}

#[test]
fn interpolation_slack_examples() {
    let s = interpolation_slack(&[1.0], &[1.0], e(2.0), e(4.0), 1.0).unwrap();
    assert!(s.abs() < 1e-12);
    let s = interpolation_slack(&[0.0; 3], &[0.0; 3], e(3.0), e(6.0), 0.5).unwrap();
    assert!(s.abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let a: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
        assert!(interpolation_slack(&a, &b, e(2.0), e(4.0), 1.0).unwrap() >= -1e-12);
    }
}

#[test]
fn interpolation_slack_rejects_bad_lambda() {
    // λ(3, 6) = 1/2
    assert!(interpolation_slack(&[1.0], &[1.0], e(3.0), e(6.0), 0.75).is_err());
    assert!(interpolation_slack(&[1.0], &[1.0], e(1.5), e(6.0), 0.5).is_err());
}

#[test]
fn convexity_slack_examples() {
    // x = 0, r = 4, p = q = 2: slack = r/2 = 2 for every c1
    for c1 in [0.1, 1.0, 7.0] {
        assert!((convexity_bound_slack(&[0.0; 4], e(2.0), e(2.0), c1) - 2.0).abs() < 1e-12);
    }
    // all ones, p = q = 2, r = 2: slack = 3 - 2 c1
    for c1 in [0.5, 1.5, 2.0] {
        let s = convexity_bound_slack(&[1.0, 1.0], e(2.0), e(2.0), c1);
        assert!((s - (3.0 - 2.0 * c1)).abs() < 1e-12);
    }
}

#[test]
fn find_c1_contract() {
    assert!(find_c1(e(2.0), e(2.0), 0, 1).is_err());
    let c = find_c1(e(2.0), e(2.0), 2000, 5).unwrap();
    assert!(c <= 1.5);
    assert_eq!(c, find_c1(e(2.0), e(2.0), 2000, 5).unwrap());
    let c23 = find_c1(e(2.0), e(3.0), 2000, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..2000 {
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..=5.0)).collect();
        assert!(convexity_bound_slack(&x, e(2.0), e(3.0), c23) >= -1e-12);
    }
}

#[test]
fn norm_interpolation_examples() {
    let one = MixedVector::unit(4, 4, 2, 1).scaled(3.0);
    let s = norm_interpolation_slack(&one, e(3.0), e(3.0), e(6.0), e(6.0), LambdaVariant::P).unwrap();
    assert!(s.abs() < 1e-12);
    let z = MixedVector::zeros(4, 4);
    assert_eq!(norm_interpolation_slack(&z, e(3.0), e(3.0), e(6.0), e(6.0), LambdaVariant::Q).unwrap(), 0.0);
    assert!(norm_interpolation_slack(&z, e(1.5), e(3.0), e(6.0), e(6.0), LambdaVariant::P).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let x = MixedVector::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let s = norm_interpolation_slack(&x, e(3.0), e(3.0), e(6.0), e(6.0), LambdaVariant::P).unwrap();
        assert!(s >= -1e-12);
    }
}

fn hoelder_dual(x: &[f64], y: &[f64], m: usize, p: f64, q: f64) -> (f64, f64) {
    let pc = p / (p - 1.0);
    let qc = q / (q - 1.0);
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (dot.abs(), norm_slice(x, m, p, q) * norm_slice(y, m, pc, qc))
}

proptest! {
    #[test]
    fn homogeneity(data in prop::collection::vec(-10.0f64..10.0, 6), t in -50.0f64..50.0, p in 1.1f64..6.0, q in 1.1f64..6.0) {
        let x = MixedVector::new(3, 2, data).unwrap();
        let base = mixed_norm(&x, e(p), e(q));
        let scaled = mixed_norm(&x.scaled(t), e(p), e(q));
        prop_assert!((scaled - t.abs() * base).abs() <= 1e-12 * t.abs() * base + 1e-300);
    }

    #[test]
    fn collapse_to_flat_norm(data in prop::collection::vec(-10.0f64..10.0, 12), p in 1.1f64..6.0) {
        let x = MixedVector::new(4, 3, data.clone()).unwrap();
        let flat = data.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        prop_assert!((mixed_norm(&x, e(p), e(p)) - flat).abs() <= 1e-12 * flat.max(1e-300));
    }

    #[test]
    fn hoelder_pairing(x in prop::collection::vec(-5.0f64..5.0, 6), y in prop::collection::vec(-5.0f64..5.0, 6), p in 1.1f64..6.0, q in 1.1f64..6.0) {
        let (dot, bound) = hoelder_dual(&x, &y, 2, p, q);
        prop_assert!(dot <= bound * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn rearrangement_is_sorted_permutation(x in prop::collection::vec(-100.0f64..100.0, 0..20)) {
        let r = rearrange_nonincreasing(&x);
        prop_assert!(r.windows(2).all(|w| w[0] >= w[1]));
        let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        a.sort_by(|u, v| v.partial_cmp(u).unwrap());
        prop_assert_eq!(r, a);
    }
}
