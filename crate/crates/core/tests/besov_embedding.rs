mod common;

use common::{params_dir, q, random_part1, Q};
use widths_core::besov_embedding::*;
use widths_core::scalar::Scalar;
use widths_core::Error;

fn reference(alpha_g: f64, alpha_v: f64) -> EmbeddingParams<f64> {
    EmbeddingParams::<f64>::reference(alpha_g, alpha_v)
}

fn exact_reference(alpha_g: Q, alpha_v: Q) -> EmbeddingParams<Q> {
    EmbeddingParams::<Q>::reference(alpha_g, alpha_v)
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

#[test]
fn rho_family() {
    assert_eq!(RhoSpec::ONE.eval(1e6), 1.0);
    let r = RhoSpec::new(1.0, 0.0).unwrap();
    assert!((r.eval(5.0) - (std::f64::consts::E + 5.0).ln()).abs() < 1e-12);
    let prod = r.product(&RhoSpec::new(0.0, 2.0).unwrap());
    assert!((prod.eval(7.0) - r.eval(7.0) * RhoSpec { c1: 0.0, c2: 2.0 }.eval(7.0)).abs() < 1e-9);
    let vals = RhoSpec::new(2.0, -1.0).unwrap().check_slowly_varying().unwrap();
    assert!(vals[3] < 0.1);
    assert!(RhoSpec::new(40.0, 0.0).is_err());
}

#[test]
fn weight_examples() {
    let mut p = reference(0.0, 1.0);
    p.beta_g = 0.75;
    p.beta_v = 1.0;
    // α_g = 0, ρ_g ≡ 1: g(1/4) = 4^{β_g}
    assert!((weight_g(0.25, &p) - 2f64.powf(2.0 * p.beta_g)).abs() < 1e-12);
    assert!((weight_g(2.0, &p) - 2f64.powf(-p.gamma_g)).abs() < 1e-12);
    for x in [1e-6, 0.1, 0.5, 0.7, 3.0] {
        let prod = weight_w1(x, &p) * weight_g(x, &p).powf(p.p1);
        assert!((prod - 1.0).abs() < 1e-9, "{x}: {prod}");
        let v2 = weight_w2(x, &p) / weight_v(x, &p).powf(p.p2);
        assert!((v2 - 1.0).abs() < 1e-9);
    }
}

#[test]
fn params_validation_names_the_violation() {
    let mut p = reference(2.0, 1.0);
    assert!(p.validate().is_ok());
    p.beta_g = 1.0;
    match p.validate() {
        Err(Error::Domain(msg)) => assert!(msg.contains("beta_g + beta_v = delta"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let mut p = reference(-2.0, 1.0);
    assert!(matches!(p.validate(), Err(Error::Domain(m)) if m.contains("alpha")));
    p = reference(2.0, 1.0);
    p.p1 = 5.0;
    assert!(matches!(p.validate(), Err(Error::Domain(m)) if m.contains("p1 <= p2")));
}

#[test]
fn param_files_round_trip() {
    let text = std::fs::read_to_string(params_dir().join("alpha3.txt")).unwrap();
    let pf = parse_params(&text).unwrap();
    assert_eq!(pf.part, Some(Part::One));
    assert_eq!(pf.params, exact_reference(q(2, 1), q(1, 1)));
    let again = parse_params(&canonical_params(&pf.params)).unwrap();
    assert_eq!(again.params, pf.params);
    assert!(matches!(parse_params("d = 1\nfoo = 2\n"), Err(Error::Parse(_))));
    assert!(matches!(parse_params("d = 1\nd = 2\n"), Err(Error::Parse(_))));
    assert!(matches!(parse_params("d = 1\ns1 = 2\n"), Err(Error::Parse(m)) if m.contains("missing")));
}

#[test]
fn muckenhoupt_examples() {
    for p in [1.5, 2.0, 5.0] {
        for r in [1e-3, 1.0, 8.0] {
            assert!((muckenhoupt_ratio(&RadialWeight::Unit, 2, p, r, 1024).unwrap() - 1.0).abs() < 1e-9);
        }
    }
    // d = 1, p = 2, w = |x|^a on [-r, r]: averages r^a/(1+a) and r^{-a}/(1-a), ratio (1-a²)^{-1/2}
    for a in [-0.5, 0.5, 0.25] {
        let expect = 1.0 / (1.0 - a * a as f64).sqrt();
        for r in [2f64.powi(-20), 0.3, 16.0] {
            let v = muckenhoupt_ratio(&RadialWeight::Power(a), 1, 2.0, r, 4096).unwrap();
            assert!((v - expect).abs() < 1e-3 * expect, "a={a} r={r}: {v} vs {expect}");
        }
    }
    assert!(matches!(muckenhoupt_ratio(&RadialWeight::Power(1.0), 1, 2.0, 1.0, 1024), Err(Error::Quadrature(_))));
    let w1 = RadialWeight::W1(reference(2.0, 1.0));
    let vals: Vec<f64> = (-20..=4).map(|k| muckenhoupt_ratio(&w1, 1, 8.0, 2f64.powi(k), 4096).unwrap()).collect();
    assert!(spread(&vals) <= 32.0, "{vals:?}");
}

#[test]
fn cube_mass_examples() {
    for nu in [0u32, 3, 7] {
        for m in [vec![0i64], vec![1], vec![-3]] {
            let v = cube_mass(&RadialWeight::Unit, nu, &m, 1024).unwrap();
            assert!((v - 2f64.powi(-(nu as i32))).abs() < 1e-9 * v, "nu={nu} m={m:?}: {v}");
        }
        let v = cube_mass(&RadialWeight::Unit, nu, &[1, 0], 1024).unwrap();
        assert!((v - 2f64.powi(-2 * nu as i32)).abs() < 1e-9 * v);
    }
    // |x|^a on [(m-1/2)2^{-ν}, (m+1/2)2^{-ν}] integrates to (hi^{a+1} - lo^{a+1})/(a+1)
    let a = 0.7;
    for (nu, m) in [(3u32, 2i64), (5, 7), (2, 1)] {
        let s = 2f64.powi(-(nu as i32));
        let (lo, hi) = ((m as f64 - 0.5) * s, (m as f64 + 0.5) * s);
        let expect = (hi.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0);
        let v = cube_mass(&RadialWeight::Power(a), nu, &[m], 1024).unwrap();
        assert!((v - expect).abs() < 1e-6 * expect, "{v} vs {expect}");
    }
    // m = 0: d = 1 gives 2 r^{a+1}/(a+1), d = 2 gives 8 r^{a+2}/(a+2) with r = 2^{-ν-1}
    let r = 2f64.powi(-5);
    let v1 = cube_mass(&RadialWeight::Power(a), 4, &[0], 4096).unwrap();
    assert!((v1 - 2.0 * r.powf(a + 1.0) / (a + 1.0)).abs() < 1e-6 * v1);
    let v2 = cube_mass(&RadialWeight::Power(a), 4, &[0, 0], 4096).unwrap();
    assert!((v2 - 8.0 * r.powf(a + 2.0) / (a + 2.0)).abs() < 1e-6 * v2);
}

#[test]
fn entry_factor_unweighted_closed_form() {
    // unit weights: 2^{-ν(s1-s2)} (2^{-νd})^{-1/p1} (2^{-νd})^{1/p2}
    let (s1, s2, p1, p2) = (1.5, 0.25, 2.0, 4.0);
    for nu in [0u32, 2, 6] {
        for m in [vec![0i64], vec![3]] {
            let v = entry_factor_with(&RadialWeight::Unit, &RadialWeight::Unit, s1, s2, p1, p2, nu, &m, 1024).unwrap();
            let n = nu as f64;
            let expect = 2f64.powf(-n * (s1 - s2) + n / p1 - n / p2);
            assert!((v - expect).abs() < 1e-9 * expect, "{v} vs {expect}");
        }
    }
}

fn delta_one_alpha_two() -> EmbeddingParams<f64> {
    EmbeddingParams {
        d: 1,
        s1: 1.25,
        s2: 0.0,
        p1: 2.0,
        q1: 2.0,
        p2: 4.0,
        q2: 4.0,
        beta_g: 1.0,
        beta_v: 0.0,
        alpha_g: 1.0,
        alpha_v: 1.0,
        gamma_g: 1.5,
        gamma_v: 0.0,
        rho_g: RhoSpec::ONE,
        rho_v: RhoSpec::ONE,
    }
}

#[test]
fn entry_factor_follows_its_order() {
    let p = delta_one_alpha_two();
    p.validate().unwrap();
    assert!((p.delta() - 1.0).abs() < 1e-12 && (p.alpha() - 2.0).abs() < 1e-12);
    let mut off = Vec::new();
    for nu in 4..=12u32 {
        for m in [1i64, 2, 5, (1 << (nu - 2)) + 1] {
            let e = entry_factor(&p, nu, &[m]).unwrap();
            off.push(e / entry_factor_order(&p, nu, &[m]));
        }
    }
    assert!(off.iter().all(|r| (0.25..=4.0).contains(r)), "{off:?}");
    let at_zero: Vec<f64> = (2..=16u32)
        .map(|nu| entry_factor(&p, nu, &[0]).unwrap() / entry_factor_order(&p, nu, &[0]))
        .collect();
    assert!(spread(&at_zero) <= 16.0, "{at_zero:?}");
    assert!(entry_factor(&p, 3, &[0, 0]).is_err());
}

#[test]
fn cube_mass_of_w1_follows_its_order() {
    let p = reference(2.0, 1.0);
    let r: Vec<f64> = (4..=16u32)
        .map(|nu| cube_mass(&RadialWeight::W1(p.clone()), nu, &[0], 4096).unwrap() / mass_order_w1(&p, nu))
        .collect();
    assert!(spread(&r) <= 4.0, "{r:?}");
}

#[test]
fn sequence_norms_single_coefficient() {
    let p = delta_one_alpha_two();
    for (nu, m) in [(3u32, vec![1i64]), (5, vec![0]), (6, vec![9])] {
        let fam: SeqFamily = vec![(nu, m.clone(), 1.0)];
        assert!((seq_norm_x1_tilde(&fam, p.p1, p.q1) - 1.0).abs() < 1e-12);
        assert!((seq_norm_x2(&fam, p.p2, p.q2) - 1.0).abs() < 1e-12);
        let x1 = seq_norm_x1(&fam, &p).unwrap();
        let e = entry_factor(&p, nu, &m).unwrap();
        assert!((x1 * e - 1.0).abs() < 1e-6, "{x1} {e}");
    }
}

#[test]
fn projection_norm_bounds_the_tilde_norm() {
    let p = delta_one_alpha_two();
    let support: Vec<(u32, Vec<i64>)> = (2..=5u32).flat_map(|nu| (0..4i64).map(move |m| (nu, vec![m]))).collect();
    let norm = projection_norm(&p, &support).unwrap();
    let inv = projection_norm_inverse(&p, &support).unwrap();
    let fam: SeqFamily = support.iter().enumerate().map(|(i, (nu, m))| (*nu, m.clone(), 1.0 + (i % 3) as f64)).collect();
    let x1 = seq_norm_x1(&fam, &p).unwrap();
    let xt = seq_norm_x1_tilde(&fam, p.p1, p.q1);
    assert!(xt <= norm * x1 * (1.0 + 1e-9));
    assert!(x1 <= inv * xt * (1.0 + 1e-9));
    // attained at the coordinate carrying the largest entry factor
    let (nu, m) = support
        .iter()
        .max_by(|a, b| entry_factor(&p, a.0, &a.1).unwrap().total_cmp(&entry_factor(&p, b.0, &b.1).unwrap()))
        .unwrap();
    let one: SeqFamily = vec![(*nu, m.clone(), 1.0)];
    let ratio = seq_norm_x1_tilde(&one, p.p1, p.q1) / seq_norm_x1(&one, &p).unwrap();
    assert!((ratio - norm).abs() < 1e-6 * norm);
}

#[test]
fn theta_tables_exact() {
    let p = exact_reference(q(2, 1), q(1, 1));
    let t = theta_table(&p).unwrap();
    assert_eq!(t.theta, [q(2, 1), q(7, 2), q(13, 4), q(6, 1)]);
    assert_eq!(t.sigma, [q(0, 1), q(0, 1), q(1, 1), q(2, 1)]);
    assert_eq!(t.active, vec![1, 2, 3, 4]);
    let pf = parse_params(&std::fs::read_to_string(params_dir().join("part2.txt")).unwrap()).unwrap();
    let t = tilde_theta_table(&pf.params).unwrap();
    assert_eq!(t.theta, [q(7, 4), q(19, 8), q(25, 6), q(6, 1)]);
    // q2 = 2 drops index 4
    let mut p = exact_reference(q(2, 1), q(1, 1));
    p.q2 = q(2, 1);
    p.q1 = q(2, 1);
    assert_eq!(theta_table(&p).unwrap().active, vec![1, 2, 3]);
    let mut p = exact_reference(q(2, 1), q(1, 1));
    p.p2 = q(3, 2);
    assert!(matches!(theta_table(&p), Err(Error::Window(_)) | Err(Error::Domain(_))));
}

fn classify_file(name: &str) -> widths_core::Result<Asymptotics<Q>> {
    let pf = parse_params(&std::fs::read_to_string(params_dir().join(name)).unwrap()).unwrap();
    classify(&pf.params, pf.part.unwrap())
}

#[test]
fn classify_shipped_files() {
    let a = classify_file("alpha3.txt").unwrap();
    assert_eq!((a.j_star, a.theta, a.sigma), (Some(1), q(2, 1), q(0, 1)));
    let a = classify_file("alpha01.txt").unwrap();
    assert_eq!((a.j_star, a.theta, a.sigma), (Some(4), q(1, 5), q(2, 1)));
    assert!(matches!(classify_file("tie.txt"), Err(Error::NoStrictMinimizer(v)) if v == vec![1, 3]));
    let a = classify_file("part2.txt").unwrap();
    assert_eq!((a.kind, a.j_star, a.theta), (AsymptoticsKind::LinearApprox, Some(1), q(7, 4)));
    let a = classify_file("part3.txt").unwrap();
    assert_eq!((a.theta, a.sigma), (q(1, 2), q(1, 1)));
    assert_eq!(a.case3.unwrap().dominant, Case3Term::Rho);
    assert!(matches!(classify_file("part3_degenerate.txt"), Err(Error::Case3Degenerate)));
    let a = classify_file("d2_alpha3.txt").unwrap();
    assert_eq!((a.j_star, a.theta), (Some(1), q(1, 1)));
}

/// θ_j recomputed in floating point from the defining expressions.
fn oracle_thetas(p: &EmbeddingParams<f64>) -> Vec<(usize, f64)> {
    let lam = |a: f64, b: f64| if a <= 2.0 || b == 2.0 { 1.0 } else { (1.0 / a - 1.0 / b) / (0.5 - 1.0 / b) };
    let d = p.d as f64;
    let delta = p.s1 - p.s2 - d / p.p1 + d / p.p2;
    let alpha = p.alpha_g + p.alpha_v;
    let (lp, lq) = (lam(p.p1, p.p2), lam(p.q1, p.q2));
    let all = [
        delta / d + lp * (0.5 - 1.0 / p.p2),
        p.p2 * delta / (2.0 * d),
        alpha + lq * (0.5 - 1.0 / p.q2),
        p.q2 * alpha / 2.0,
    ];
    let keep = |j: usize| match j {
        1 => p.p2 > 2.0,
        2 => true,
        3 => true,
        _ => p.q2 > 2.0,
    };
    (1..=4).filter(|&j| keep(j)).map(|j| (j, all[j - 1])).collect()
}

#[test]
fn classify_matches_oracle_on_random_draws() {
    let mut checked = 0;
    for draw in 0..200 {
        let p = random_part1(41, draw);
        let pf = p.to_f64();
        let mut th = oracle_thetas(&pf);
        th.sort_by(|a, b| a.1.total_cmp(&b.1));
        let tied = th.len() > 1 && th[1].1 - th[0].1 < 1e-9;
        match classify(&p, Part::One) {
            Err(Error::NoStrictMinimizer(_)) => assert!(tied, "draw {draw}"),
            Ok(a) => {
                assert!(!tied, "draw {draw}");
                assert!((a.theta.to_f64() - th[0].1).abs() < 1e-9);
                assert_eq!(a.j_star, Some(th[0].0));
                // the same answer in floating point and after shifting the smoothness pair
                let f = classify(&pf, Part::One).unwrap();
                assert_eq!(f.j_star, a.j_star);
                let s = classify(&p.shifted(q(3, 7)), Part::One).unwrap();
                assert_eq!((s.j_star, s.theta), (a.j_star, a.theta));
                checked += 1;
            }
            Err(e) => panic!("draw {draw}: {e:?}"),
        }
    }
    assert!(checked >= 150, "{checked}");
}
