//! Sweep and report plumbing shared by the command-line tool and the tests: float
//! formatting, n-grid parsing, the Kolmogorov sweep against `Φ₀`, log-log fitting and CSV.

use std::io::{Read, Write};
use std::path::Path;

use crate::besov_embedding::{parse_params, ParamFile};
use crate::error::{domain, Error, Result};
use crate::finite_width_lab::{kolmogorov_width_ball_warm, SearchConfig};
use crate::mixed_norm_core::SpaceSpec;
use crate::width_formulas::phi0;

/// `printf("%.12g")`, independent of locale.
pub fn fmt_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (11 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `"4..48"` (inclusive), `"4..48:4"` (with step) or `"1,2,4,8"`; sorted and deduplicated.
pub fn parse_n_grid(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("cannot read n-grid `{text}`"));
    let text = text.trim();
    let mut out: Vec<usize> = if let Some((a, rest)) = text.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, s)) => (b, s.trim().parse::<usize>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if step == 0 || a > b {
            return Err(bad());
        }
        (a..=b).step_by(step).collect()
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn load_param_file(path: &Path) -> Result<ParamFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_params(&text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub formula: f64,
    pub estimate: f64,
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
}

/// Least-squares slope of `ln y` against `ln x` and its standard error, over points with
/// `x, y > 0`. NaN when fewer than two such points (stderr NaN below three).
pub fn loglog_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = pts.len();
    if k < 2 {
        return (f64::NAN, f64::NAN);
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    if k < 3 {
        return (slope, f64::NAN);
    }
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    (slope, (rss / (kf - 2.0) / sxx).sqrt())
}

impl SweepResult {
    pub fn from_rows(mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by_key(|r| r.n);
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.estimate)).collect();
        let (fitted_slope, slope_stderr) = loglog_fit(&pts);
        SweepResult { rows, fitted_slope, slope_stderr }
    }

    /// Rows at or past the `Φ₀` transition `n ≥ 2·m^{2/p2}·k^{2/q2}`, or every row when fewer
    /// than three qualify.
    pub fn middle_segment(&self, m: usize, k: usize, p2: f64, q2: f64) -> Vec<&SweepRow> {
        let threshold = 2.0 * (m as f64).powf(2.0 / p2) * (k as f64).powf(2.0 / q2);
        let mid: Vec<&SweepRow> = self.rows.iter().filter(|r| r.n as f64 >= threshold).collect();
        if mid.len() >= 3 {
            mid
        } else {
            self.rows.iter().collect()
        }
    }

    pub fn middle_slope(&self, m: usize, k: usize, p2: f64, q2: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self.middle_segment(m, k, p2, q2).iter().map(|r| (r.n as f64, r.estimate)).collect();
        loglog_fit(&pts).0
    }

    /// CSV with header `n,formula,estimate,ratio,seed`; floats via [`fmt_g12`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(format!("csv write failed: {e}"));
        w.write_record(["n", "formula", "estimate", "ratio", "seed"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                fmt_g12(r.formula),
                fmt_g12(r.estimate),
                fmt_g12(r.ratio),
                r.seed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(format!("csv write failed: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is UTF-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<SweepResult> {
        let mut r = csv::Reader::from_reader(input);
        let bad = |what: String| Error::Parse(format!("bad sweep csv: {what}"));
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != ["n", "formula", "estimate", "ratio", "seed"] {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let f = |i: usize| -> Result<f64> { rec[i].parse::<f64>().map_err(|e| bad(e.to_string())) };
            rows.push(SweepRow {
                n: rec[0].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                formula: f(1)?,
                estimate: f(2)?,
                ratio: f(3)?,
                seed: rec[4].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            });
        }
        Ok(SweepResult::from_rows(rows))
    }

    pub fn summary_line(&self, middle_slope: f64, local_exponent: f64) -> String {
        format!(
            "fitted_slope={} stderr={} middle_slope={} phi0_local_exponent={}",
            fmt_g12(self.fitted_slope),
            fmt_g12(self.slope_stderr),
            fmt_g12(middle_slope),
            fmt_g12(local_exponent)
        )
    }
}

fn quantise(x: f64) -> f64 {
    fmt_g12(x).parse().unwrap_or(x)
}

/// Inputs of a Kolmogorov sweep against `Φ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub m: usize,
    pub k: usize,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub n_grid: Vec<usize>,
    pub restarts: usize,
    pub outer: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub result: SweepResult,
    /// `d ln Φ₀ / d ln n` at the largest grid point of the middle segment.
    pub local_exponent: f64,
    /// Log-log slope over [`SweepResult::middle_segment`].
    pub middle_slope: f64,
    /// Grid points whose estimate failed certification.
    pub uncertified: Vec<usize>,
}

/// Estimates `d_n(B^{m,k}_{p1,q1}, l^{m,k}_{p2,q2})` over ascending `n` (each search
/// warm-started from the previous subspace) and compares with `Φ₀`. Row values are quantised
/// to 12 significant digits so a CSV round trip reproduces them.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    if spec.n_grid.is_empty() {
        return domain("empty n-grid");
    }
    let src = SpaceSpec::new(spec.m, spec.k, spec.p1, spec.q1)?;
    let dst = SpaceSpec::new(spec.m, spec.k, spec.p2, spec.q2)?;
    let mut cfg = SearchConfig::light(spec.seed);
    cfg.restarts = spec.restarts.max(1);
    cfg.outer_iterations = spec.outer.max(1);
    let (m, k) = (spec.m as u64, spec.k as u64);
    let mut grid = spec.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let mut rows = Vec::with_capacity(grid.len());
    let mut uncertified = Vec::new();
    let mut prev = None;
    for &n in &grid {
        let est = kolmogorov_width_ball_warm(&src, &dst, n, &cfg, prev.as_ref())?;
        if !est.certified(cfg.certify_tolerance) {
            uncertified.push(n);
        }
        prev = est.subspace.clone();
        let f = phi0(m, k, n as u64, spec.p1, spec.p2, spec.q1, spec.q2)?;
        let formula = quantise(f.value);
        let estimate = quantise(est.value);
        let ratio = if formula > 0.0 { quantise(estimate / formula) } else { f64::NAN };
        rows.push(SweepRow { n, formula, estimate, ratio, seed: spec.seed });
    }
    let result = SweepResult::from_rows(rows);
    let mid = result.middle_segment(spec.m, spec.k, spec.p2, spec.q2);
    let n_ref = mid.last().map_or(grid[grid.len() - 1], |r| r.n);
    let local_exponent = phi0(m, k, n_ref as u64, spec.p1, spec.p2, spec.q1, spec.q2)?.local_exponent;
    let middle_slope = result.middle_slope(spec.m, spec.k, spec.p2, spec.q2);
    Ok(SweepOutcome { result, local_exponent, middle_slope, uncertified })
}
