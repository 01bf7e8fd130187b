use widths_core::cli_report::*;
use widths_core::Error;

#[test]
fn fmt_g12_matches_printf() {
    let cases: [(f64, &str); 14] = [
        (0.0, "0"),
        (-0.0, "-0"),
        (1.0, "1"),
        (0.2, "0.2"),
        (1.0 / 3.0, "0.333333333333"),
        (-2.5, "-2.5"),
        (123456789012.0, "123456789012"),
        (1234567890123.0, "1.23456789012e+12"),
        (1.5e-5, "1.5e-05"),
        (0.0001, "0.0001"),
        (2f64.sqrt(), "1.41421356237"),
        (1e100, "1e+100"),
        (0.9999999999999, "1"),
        (f64::NAN, "nan"),
    ];
    for (x, want) in cases {
        assert_eq!(fmt_g12(x), want, "{x:e}");
    }
    assert_eq!(fmt_g12(f64::INFINITY), "inf");
    assert_eq!(fmt_g12(f64::NEG_INFINITY), "-inf");
}

#[test]
fn n_grid_forms() {
    assert_eq!(parse_n_grid("4..8").unwrap(), vec![4, 5, 6, 7, 8]);
    assert_eq!(parse_n_grid("4..16:4").unwrap(), vec![4, 8, 12, 16]);
    assert_eq!(parse_n_grid("8, 2,4,2").unwrap(), vec![2, 4, 8]);
    for bad in ["", "a..b", "5..2", "1..4:0", "1,x"] {
        assert!(matches!(parse_n_grid(bad), Err(Error::Parse(_))), "{bad}");
    }
}

#[test]
fn loglog_fit_recovers_power_laws() {
    let pts: Vec<(f64, f64)> = (1..=10).map(|n| (n as f64, 3.0 * (n as f64).powf(-0.75))).collect();
    let (slope, se) = loglog_fit(&pts);
    assert!((slope + 0.75).abs() < 1e-12);
    assert!(se < 1e-10);
    assert!(loglog_fit(&[(1.0, 1.0)]).0.is_nan());
    assert!(loglog_fit(&[(0.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).0.is_nan());
    let (s2, se2) = loglog_fit(&[(1.0, 1.0), (4.0, 0.5)]);
    assert!((s2 + 0.5).abs() < 1e-12 && se2.is_nan());
}

fn small_spec(seed: u64) -> SweepSpec {
    SweepSpec {
        m: 3,
        k: 2,
        p1: 2.0,
        q1: 2.0,
        p2: 4.0,
        q2: 4.0,
        n_grid: vec![1, 2, 3, 4],
        restarts: 2,
        outer: 40,
        seed,
    }
}

#[test]
fn sweep_csv_round_trip_and_determinism() {
    let a = run_sweep(&small_spec(3)).unwrap();
    let b = run_sweep(&small_spec(3)).unwrap();
    let csv = a.result.to_csv_string();
    assert_eq!(csv, b.result.to_csv_string());
    assert!(csv.starts_with("n,formula,estimate,ratio,seed\n"));
    assert_eq!(csv.lines().count(), 5);
    let back = SweepResult::read_csv(csv.as_bytes()).unwrap();
    assert_eq!(back, a.result);
    for r in &a.result.rows {
        assert!(r.estimate > 0.0 && r.estimate <= 1.0 + 1e-9);
        assert!((r.ratio - r.estimate / r.formula).abs() < 1e-9 * r.ratio);
    }
    assert!(a.uncertified.is_empty());
    assert!(SweepResult::read_csv("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn degenerate_sweep_has_nan_slope() {
    let spec = SweepSpec { m: 1, k: 1, n_grid: vec![0, 1], ..small_spec(0) };
    let out = run_sweep(&spec).unwrap();
    assert_eq!(out.result.rows[1].estimate, 0.0);
    assert!(out.result.fitted_slope.is_nan());
    assert!(out.result.summary_line(out.middle_slope, out.local_exponent).starts_with("fitted_slope=nan stderr=nan"));
}

#[test]
fn middle_segment_threshold() {
    let rows = (1..=12)
        .map(|n| SweepRow { n, formula: 1.0, estimate: (n as f64).powf(-0.5), ratio: 1.0, seed: 0 })
        .collect();
    let r = SweepResult::from_rows(rows);
    // 4x4 with p2 = q2 = 4: threshold 2·2·2 = 8
    let mid: Vec<usize> = r.middle_segment(4, 4, 4.0, 4.0).iter().map(|x| x.n).collect();
    assert_eq!(mid, vec![8, 9, 10, 11, 12]);
    assert!((r.middle_slope(4, 4, 4.0, 4.0) + 0.5).abs() < 1e-12);
    // too few rows past the threshold: everything
    assert_eq!(r.middle_segment(8, 8, 2.0, 2.0).len(), 12);
}
