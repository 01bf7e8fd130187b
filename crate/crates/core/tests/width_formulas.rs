use proptest::prelude::*;
use widths_core::width_formulas::*;
use widths_core::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn lambda_examples() {
    assert_eq!(lambda_vec(2.0, 2.0).unwrap(), 1.0);
    assert_eq!(lambda_vec(4.0, 4.0).unwrap(), 0.0);
    assert!(close(lambda_vec(4.0, 8.0).unwrap(), (0.25 - 0.125) / (0.5 - 0.125), 1e-15));
    assert!(close(lambda_vec(4.0, 8.0).unwrap(), 1.0 / 3.0, 1e-15));
    assert_eq!(lambda_vec(1.5, 6.0).unwrap(), 1.0);
    assert!(matches!(lambda_vec(4.0, 3.0), Err(Error::Domain(_))));
    assert!(matches!(lambda_vec(1.2, 1.8), Err(Error::Domain(_))));
}

#[test]
fn phi_examples() {
    for (p, q) in [(2.0, 4.0), (1.5, 3.0), (1.2, 1.8)] {
        assert_eq!(phi(0, 10, p, q).unwrap(), 1.0);
    }
    // 2 <= p <= q: ν^{1/q} n^{-1/2} = 16^{1/4}/2 = 1
    assert!(close(phi(4, 16, 2.0, 4.0).unwrap(), 1.0, 1e-12));
    // 1 < p < 2 <= q with n = ν: ν^{1/q - 1/p}
    assert!(close(phi(4, 4, 1.5, 2.0).unwrap(), 4f64.powf(0.5 - 1.0 / 1.5), 1e-12));
    assert!(close(phi(4, 4, 1.5, 2.0).unwrap(), 0.7937005259840998, 1e-12));
    assert!(phi(1, 4, 3.0, 2.0).is_err());
}

#[test]
fn psi_examples() {
    // on 1/p + 1/q = 1 both branches agree
    let (p, q) = (1.5, 3.0);
    let v = psi(3, 12, p, q).unwrap();
    assert!(close(v, phi(3, 12, p, q).unwrap(), 1e-12));
    assert!(close(v, phi(3, 12, q / (q - 1.0), p / (p - 1.0)).unwrap(), 1e-12));
    for n in 0..8 {
        assert_eq!(psi(n, 8, 2.0, 2.0).unwrap(), phi(n, 8, 2.0, 2.0).unwrap());
        assert!(close(psi(n, 8, 4.0, 4.0).unwrap(), phi(n, 8, 4.0 / 3.0, 4.0 / 3.0).unwrap(), 1e-12));
    }
}

#[test]
fn phi0_examples() {
    let r = phi0(8, 8, 1, 2.0, 4.0, 2.0, 4.0).unwrap();
    assert_eq!((r.value, r.tag), (1.0, Phi0Tag::Unit));
    // m = k = 16, (2,2,4,4), n = 64: 64^{-1/2} 16^{1/4} 16^{1/4} = 1/2
    let r = phi0(16, 16, 64, 2.0, 4.0, 2.0, 4.0).unwrap();
    assert!(close(r.value, 0.5, 1e-12));
    assert!(!r.extrapolated);
    // λ(p) <= λ(q), p1 > 2, middle range: (n^{-1/2} m^{1/p2} k^{1/q2})^{λ(p)}
    let (m, k, p1, p2, q1, q2) = (16u64, 4u64, 3.0, 6.0, 2.0, 4.0);
    let lp = (1.0 / p1 - 1.0 / p2) / (0.5 - 1.0 / p2);
    let n = 12u64;
    assert!((n as f64) > (m as f64).powf(2.0 / p2) * (k as f64).powf(2.0 / q2));
    assert!((n as f64) <= m as f64 * (k as f64).powf(2.0 / q2));
    let r = phi0(m, k, n, p1, p2, q1, q2).unwrap();
    assert_eq!(r.tag, Phi0Tag::PBranchMid);
    let expect = ((n as f64).powf(-0.5) * (m as f64).powf(1.0 / p2) * (k as f64).powf(1.0 / q2)).powf(lp);
    assert!(close(r.value, expect, 1e-12));
    assert!(phi0(4, 4, 100, 2.0, 4.0, 2.0, 4.0).unwrap().extrapolated);
    assert!(matches!(phi0(4, 4, 2, 2.0, 1.8, 2.0, 4.0), Err(Error::Window(_))));
}

#[test]
fn phi0_branch_continuity_at_unit_threshold() {
    // n = m^{2/p2} k^{2/q2} exactly: 16^{1/2}·4^{1/2}·... choose m = k = 16, p2 = q2 = 4
    let n = 16.0;
    for (p1, q1) in [(2.0, 2.0), (3.0, 3.0), (3.0, 2.0)] {
        let unit = phi0_branch_formula(Phi0Tag::Unit, 16, 16, n, p1, 4.0, q1, 4.0);
        let generic = phi0_branch_formula(Phi0Tag::GenericMin, 16, 16, n, p1, 4.0, q1, 4.0);
        assert!(close(unit, generic, 1e-9), "{p1} {q1}: {unit} vs {generic}");
    }
    // P_BRANCH_MID meets P_BRANCH_HIGH at n = m k^{2/q2}
    let (m, k, p1, p2, q1, q2) = (16u64, 4u64, 3.0, 6.0, 2.5, 4.0);
    let n = m as f64 * (k as f64).powf(2.0 / q2);
    let mid = phi0_branch_formula(Phi0Tag::PBranchMid, m, k, n, p1, p2, q1, q2);
    let high = phi0_branch_formula(Phi0Tag::PBranchHigh, m, k, n, p1, p2, q1, q2);
    assert!(close(mid, high, 1e-9), "{mid} vs {high}");
}

#[test]
fn linear_upper_examples() {
    assert_eq!(linear_width_upper(4, 4, 16, 2.0, 2.0, 2.0, 2.0).unwrap(), 1.0);
    let v = linear_width_upper(64, 64, 100_000, 1.5, 2.0, 4.0, 4.0).unwrap();
    // row exponent max{1/4, 1/3} = 1/3, column exponent max{1/4, 1/2} = 1/2
    let expect = 64f64.powf(1.0 / 3.0) * 64f64.sqrt() / 100_000f64.sqrt();
    assert!(expect < 1.0);
    assert!(close(v, expect, 1e-12));
    assert!(matches!(linear_width_upper(4, 4, 1, 3.0, 2.0, 4.0, 4.0), Err(Error::Window(_))));
}

#[test]
fn stesin_examples() {
    assert_eq!(stesin_exact(2, 5, 3.0, 3.0).unwrap(), 1.0);
    assert!(close(stesin_exact(1, 3, 2.0, 1.0 + 1e-12).unwrap(), 2f64.sqrt(), 1e-9));
    assert!(stesin_exact(1, 3, 2.0, 3.0).is_err());
    assert!(stesin_exact(3, 3, 3.0, 2.0).is_err());
}

proptest! {
    #[test]
    fn phi0_monotone_in_n(m in 1u64..20, k in 1u64..20, p1 in 1.2f64..4.0, dp in 0.0f64..4.0, q1 in 1.2f64..4.0, dq in 0.0f64..4.0) {
        let p2 = (p1 + dp).max(2.0);
        let q2 = (q1 + dq).max(2.0);
        let mut prev = f64::INFINITY;
        for n in 0..(m * k + 4) {
            let r = phi0(m, k, n, p1, p2, q1, q2).unwrap();
            prop_assert!(r.value > 0.0 && r.value <= 1.0);
            prop_assert!(r.value <= prev * (1.0 + 1e-12));
            prev = r.value;
        }
    }

    #[test]
    fn phi_and_linear_upper_monotone(nu in 2u64..40, p in 1.1f64..5.0, dq in 0.0f64..5.0, p1 in 1.1f64..2.0, p2 in 2.0f64..6.0) {
        let q = p + dq;
        let mut prev = f64::INFINITY;
        let mut prev_lin = f64::INFINITY;
        for n in 0..=nu {
            let v = phi(n, nu, p, q).unwrap();
            prop_assert!(v <= prev * (1.0 + 1e-12));
            prev = v;
            let l = linear_width_upper(nu, 3, n, p1, p1, p2, p2).unwrap();
            prop_assert!(l <= prev_lin * (1.0 + 1e-12));
            prev_lin = l;
        }
    }

    #[test]
    fn lambda_in_unit_interval(p1 in 1.05f64..10.0, dp in 0.0f64..10.0) {
        let p2 = (p1 + dp).max(2.0);
        let l = lambda_vec(p1, p2).unwrap();
        prop_assert!((0.0..=1.0).contains(&l));
        if p1 <= 2.0 || p2 == 2.0 {
            prop_assert_eq!(l, 1.0);
        }
        if p1 > 2.0 && p2 > 2.0 {
            prop_assert!(l < 1.0);
        }
    }
}
