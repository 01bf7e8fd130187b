//! Weights `g`, `v`, `w1 = g^{-p1}`, `w2 = v^{p2}`, their dyadic-cube masses and the radial
//! Muckenhoupt ratio; the sequence norms `X1`, `X̃1`, `X2`; and the exponent classifier
//! (`θ` tables, active index sets, strict minimiser) for the three parameter windows.
//!
//! `|x|` is the sup norm throughout, so the ball of radius `r` is the cube `[-r, r]^d`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{domain, window, Error, Result};
use crate::scalar::{parse_rational, Scalar};
use crate::width_formulas::lambda_unchecked;

/// `ρ(y) = (ln(e + y))^{c1} · (ln(e + ln(e + y)))^{c2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSpec {
    pub c1: f64,
    pub c2: f64,
}

const SLOW_GRID: [f64; 4] = [1e2, 1e4, 1e6, 1e8];

impl RhoSpec {
    pub const ONE: RhoSpec = RhoSpec { c1: 0.0, c2: 0.0 };

    /// Builds the spec and runs the numeric slowly-varying check.
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        let r = RhoSpec { c1, c2 };
        r.check_slowly_varying()?;
        Ok(r)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.ln_eval(y).exp()
    }

    pub fn ln_eval(&self, y: f64) -> f64 {
        let l1 = (std::f64::consts::E + y).ln();
        let mut out = 0.0;
        if self.c1 != 0.0 {
            out += self.c1 * l1.ln();
        }
        if self.c2 != 0.0 {
            out += self.c2 * (std::f64::consts::E + l1).ln().ln();
        }
        out
    }

    /// The family is closed under products: coefficients add.
    pub fn product(&self, other: &RhoSpec) -> RhoSpec {
        RhoSpec { c1: self.c1 + other.c1, c2: self.c2 + other.c2 }
    }

    /// `y ρ'(y) / ρ(y)` by a central difference in `ln y`.
    pub fn log_derivative_ratio(&self, y: f64) -> f64 {
        let h: f64 = 1e-4;
        (self.ln_eval(y * h.exp()) - self.ln_eval(y * (-h).exp())) / (2.0 * h)
    }

    /// `|yρ'/ρ|` on `{1e2, 1e4, 1e6, 1e8}`: must decrease and end below 0.1.
    pub fn check_slowly_varying(&self) -> Result<[f64; 4]> {
        if !self.c1.is_finite() || !self.c2.is_finite() {
            return domain("rho coefficients must be finite");
        }
        let vals = SLOW_GRID.map(|y| self.log_derivative_ratio(y).abs());
        let decreasing = vals.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        if !decreasing || vals[3] >= 0.1 {
            return domain(format!(
                "rho with c1={}, c2={} fails the slowly-varying check: |y rho'/rho| = {:?}",
                self.c1, self.c2, vals
            ));
        }
        Ok(vals)
    }
}

impl Default for RhoSpec {
    fn default() -> Self {
        RhoSpec::ONE
    }
}

/// All parameters of the embedding, over `f64` or exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingParams<T = f64> {
    pub d: u32,
    pub s1: T,
    pub s2: T,
    pub p1: T,
    pub q1: T,
    pub p2: T,
    pub q2: T,
    pub beta_g: T,
    pub beta_v: T,
    pub alpha_g: T,
    pub alpha_v: T,
    pub gamma_g: T,
    pub gamma_v: T,
    pub rho_g: RhoSpec,
    pub rho_v: RhoSpec,
}

fn conj<T: Scalar>(p: &T) -> T {
    p.clone() / (p.clone() - T::int(1))
}

impl<T: Scalar> EmbeddingParams<T> {
    fn dt(&self) -> T {
        T::int(self.d as i64)
    }

    /// `δ = s1 − s2 + d/p2 − d/p1`.
    pub fn delta(&self) -> T {
        let d = self.dt();
        self.s1.clone() - self.s2.clone() + d.clone() / self.p2.clone() - d / self.p1.clone()
    }

    pub fn alpha(&self) -> T {
        self.alpha_g.clone() + self.alpha_v.clone()
    }

    pub fn rho(&self) -> RhoSpec {
        self.rho_g.product(&self.rho_v)
    }

    pub fn lambda_p(&self) -> T {
        lambda_unchecked(self.p1.clone(), self.p2.clone())
    }

    pub fn lambda_q(&self) -> T {
        lambda_unchecked(self.q1.clone(), self.q2.clone())
    }

    /// Checks every standing inequality, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let one = T::int(1);
        let zero = T::int(0);
        if self.d == 0 {
            return domain("d >= 1 violated");
        }
        for (name, v) in [("p1", &self.p1), ("q1", &self.q1), ("p2", &self.p2), ("q2", &self.q2)] {
            if !(*v > one) || !v.to_f64().is_finite() {
                return domain(format!("{name} > 1 violated ({name} = {})", v.to_f64()));
            }
        }
        if self.p1 > self.p2 {
            return domain("p1 <= p2 violated");
        }
        if self.q1 > self.q2 {
            return domain("q1 <= q2 violated");
        }
        let delta = self.delta();
        if !(delta > zero) {
            return domain(format!("delta > 0 violated (delta = {})", delta.to_f64()));
        }
        let gap = (self.beta_g.clone() + self.beta_v.clone() - delta.clone()).abs_val();
        if gap > T::tie_tolerance() {
            return domain("beta_g + beta_v = delta violated");
        }
        let d = self.dt();
        let lo = -(d.clone() / self.p1.clone());
        let hi = d / self.p2.clone();
        if !(self.beta_g > lo) {
            return domain("beta_g > -d/p1 violated");
        }
        if !(self.beta_v < hi) {
            return domain("beta_v < d/p2 violated");
        }
        if !(self.gamma_g > lo) {
            return domain("gamma_g > -d/p1 violated");
        }
        if !(self.gamma_v < hi) {
            return domain("gamma_v < d/p2 violated");
        }
        if !(self.gamma_g.clone() + self.gamma_v.clone() > delta) {
            return domain("gamma_g + gamma_v > delta violated");
        }
        if !(self.alpha() > zero) {
            return domain("alpha_g + alpha_v > 0 violated");
        }
        self.rho_g.check_slowly_varying()?;
        self.rho_v.check_slowly_varying()?;
        Ok(())
    }

    pub fn to_f64(&self) -> EmbeddingParams<f64> {
        EmbeddingParams {
            d: self.d,
            s1: self.s1.to_f64(),
            s2: self.s2.to_f64(),
            p1: self.p1.to_f64(),
            q1: self.q1.to_f64(),
            p2: self.p2.to_f64(),
            q2: self.q2.to_f64(),
            beta_g: self.beta_g.to_f64(),
            beta_v: self.beta_v.to_f64(),
            alpha_g: self.alpha_g.to_f64(),
            alpha_v: self.alpha_v.to_f64(),
            gamma_g: self.gamma_g.to_f64(),
            gamma_v: self.gamma_v.to_f64(),
            rho_g: self.rho_g,
            rho_v: self.rho_v,
        }
    }

    /// `(s1, s2) → (s1 + c, s2 + c)`; `δ` and every exponent are unchanged.
    pub fn shifted(&self, c: T) -> Self {
        let mut out = self.clone();
        out.s1 = out.s1 + c.clone();
        out.s2 = out.s2 + c;
        out
    }
}

// ---------------------------------------------------------------------------------------
// Parameter files

const PARAM_KEYS: [&str; 13] = [
    "s1", "s2", "p1", "q1", "p2", "q2", "beta_g", "beta_v", "alpha_g", "alpha_v", "gamma_g", "gamma_v", "d",
];
const RHO_KEYS: [&str; 4] = ["rho_g_c1", "rho_g_c2", "rho_v_c1", "rho_v_c2"];

/// A parsed parameter file: the exact parameters plus an optional `part` selector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFile {
    pub params: EmbeddingParams<BigRational>,
    pub part: Option<Part>,
}

/// Parses the flat `name = value` format (`#` starts a comment). Rational fields accept
/// `a/b`, integers and finite decimals, all read exactly. Unknown or repeated keys are errors;
/// `rho_*` coefficients default to 0.
pub fn parse_params(text: &str) -> Result<ParamFile> {
    let mut vals: BTreeMap<String, String> = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!("line {}: expected `name = value`", ln + 1)));
        };
        let k = k.trim().to_string();
        let known = PARAM_KEYS.contains(&k.as_str()) || RHO_KEYS.contains(&k.as_str()) || k == "part";
        if !known {
            return Err(Error::Parse(format!("line {}: unknown key `{k}`", ln + 1)));
        }
        if vals.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate key `{k}`", ln + 1)));
        }
    }
    let rat = |k: &str| -> Result<BigRational> {
        let s = vals.get(k).ok_or_else(|| Error::Parse(format!("missing key `{k}`")))?;
        parse_rational(s).ok_or_else(|| Error::Parse(format!("`{k}`: cannot read `{s}` as a rational")))
    };
    let float = |k: &str| -> Result<f64> {
        match vals.get(k) {
            None => Ok(0.0),
            Some(s) => s.parse::<f64>().map_err(|_| Error::Parse(format!("`{k}`: cannot read `{s}`"))),
        }
    };
    let d_str = vals.get("d").ok_or_else(|| Error::Parse("missing key `d`".into()))?;
    let d: u32 = d_str.parse().map_err(|_| Error::Parse(format!("`d`: expected a positive integer, got `{d_str}`")))?;
    let part = match vals.get("part") {
        None => None,
        Some(s) => Some(s.parse::<Part>()?),
    };
    let params = EmbeddingParams {
        d,
        s1: rat("s1")?,
        s2: rat("s2")?,
        p1: rat("p1")?,
        q1: rat("q1")?,
        p2: rat("p2")?,
        q2: rat("q2")?,
        beta_g: rat("beta_g")?,
        beta_v: rat("beta_v")?,
        alpha_g: rat("alpha_g")?,
        alpha_v: rat("alpha_v")?,
        gamma_g: rat("gamma_g")?,
        gamma_v: rat("gamma_v")?,
        rho_g: RhoSpec { c1: float("rho_g_c1")?, c2: float("rho_g_c2")? },
        rho_v: RhoSpec { c1: float("rho_v_c1")?, c2: float("rho_v_c2")? },
    };
    Ok(ParamFile { params, part })
}

/// Canonical form: every field once, in a fixed order, rationals reduced.
pub fn canonical_params(p: &EmbeddingParams<BigRational>) -> String {
    let mut s = format!("d = {}\n", p.d);
    let fields = [
        ("s1", &p.s1),
        ("s2", &p.s2),
        ("p1", &p.p1),
        ("q1", &p.q1),
        ("p2", &p.p2),
        ("q2", &p.q2),
        ("beta_g", &p.beta_g),
        ("beta_v", &p.beta_v),
        ("alpha_g", &p.alpha_g),
        ("alpha_v", &p.alpha_v),
        ("gamma_g", &p.gamma_g),
        ("gamma_v", &p.gamma_v),
    ];
    for (k, v) in fields {
        s.push_str(&format!("{k} = {v}\n"));
    }
    for (k, v) in [
        ("rho_g_c1", p.rho_g.c1),
        ("rho_g_c2", p.rho_g.c2),
        ("rho_v_c1", p.rho_v.c1),
        ("rho_v_c2", p.rho_v.c2),
    ] {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}

// ---------------------------------------------------------------------------------------
// Weights

/// A radial weight `w(|x|)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialWeight {
    Unit,
    /// `|x|^a`.
    Power(f64),
    W1(EmbeddingParams<f64>),
    W2(EmbeddingParams<f64>),
}

const LN2: f64 = std::f64::consts::LN_2;

/// `ln g` at `|x| = e^{lt}`.
fn ln_g_like(lt: f64, beta: f64, alpha: f64, gamma: f64, rho: &RhoSpec) -> f64 {
    if lt <= -LN2 {
        let l = -lt / LN2;
        -beta * lt - alpha * l.ln() + rho.ln_eval(l)
    } else {
        -gamma * lt
    }
}

pub fn weight_g(x_norm: f64, p: &EmbeddingParams<f64>) -> f64 {
    ln_g_like(x_norm.ln(), p.beta_g, p.alpha_g, p.gamma_g, &p.rho_g).exp()
}

pub fn weight_v(x_norm: f64, p: &EmbeddingParams<f64>) -> f64 {
    ln_g_like(x_norm.ln(), p.beta_v, p.alpha_v, p.gamma_v, &p.rho_v).exp()
}

pub fn weight_w1(x_norm: f64, p: &EmbeddingParams<f64>) -> f64 {
    RadialWeight::W1(p.clone()).eval(x_norm)
}

pub fn weight_w2(x_norm: f64, p: &EmbeddingParams<f64>) -> f64 {
    RadialWeight::W2(p.clone()).eval(x_norm)
}

impl RadialWeight {
    /// `ln w` at `|x| = e^{lt}`; working in logs keeps tiny radii representable.
    pub fn ln_eval(&self, lt: f64) -> f64 {
        match self {
            RadialWeight::Unit => 0.0,
            RadialWeight::Power(a) => a * lt,
            RadialWeight::W1(p) => -p.p1 * ln_g_like(lt, p.beta_g, p.alpha_g, p.gamma_g, &p.rho_g),
            RadialWeight::W2(p) => p.p2 * ln_g_like(lt, p.beta_v, p.alpha_v, p.gamma_v, &p.rho_v),
        }
    }

    pub fn eval(&self, x_norm: f64) -> f64 {
        self.ln_eval(x_norm.ln()).exp()
    }

    /// Power of `|x|` governing integrability at the origin.
    pub fn power_at_zero(&self) -> f64 {
        match self {
            RadialWeight::Unit => 0.0,
            RadialWeight::Power(a) => *a,
            RadialWeight::W1(p) => p.beta_g * p.p1,
            RadialWeight::W2(p) => -p.beta_v * p.p2,
        }
    }
}

/// Three-point Gauss-Legendre on `[a, a + h]`.
fn gauss3(f: impl Fn(f64) -> f64, a: f64, h: f64) -> f64 {
    let c = a + 0.5 * h;
    let o = 0.5 * h * 0.6f64.sqrt();
    h * (5.0 * f(c - o) + 8.0 * f(c) + 5.0 * f(c + o)) / 18.0
}

/// `∫_{|x| ≤ r} exp(s · ln w(|x|)) dx` in dimension `d`, by Gauss-Legendre cells in
/// `u = log2(r/|x|)` below the seam `|x| = 1/2` and in `ln |x|` above it.
fn radial_integral(w: &RadialWeight, s: f64, d: u32, r: f64, nodes: usize) -> Result<f64> {
    let df = d as f64;
    let decay = df + s * w.power_at_zero();
    if !(decay > 0.0) {
        return Err(Error::Quadrature(format!(
            "weight power {} is not integrable at the origin in dimension {d}",
            s * w.power_at_zero()
        )));
    }
    let nodes = nodes.max(1024);
    // d/dt of the cube volume (2t)^d is d 2^d t^{d-1}; with dt = t ln 2 du this gives d 2^d t^d ln 2.
    let ln_jac = (df * 2f64.powf(df) * LN2).ln();
    let inner = r.min(0.5);
    let span = (80.0 / decay).clamp(40.0, 1000.0);
    let h = span / nodes as f64;
    let ln_inner = inner.ln();
    let mut total: f64 = (0..nodes)
        .map(|i| gauss3(|x| {
            let lt = ln_inner - x * LN2;
            (s * w.ln_eval(lt) + df * lt + ln_jac).exp()
        }, i as f64 * h, h))
        .sum();
    if r > 0.5 {
        let (a, b) = ((0.5f64).ln(), r.ln());
        let hs = (b - a) / nodes as f64;
        let jac = (df * 2f64.powf(df)).ln();
        total += (0..nodes)
            .map(|i| gauss3(|lt| (s * w.ln_eval(lt) + df * lt + jac).exp(), a + i as f64 * hs, hs))
            .sum::<f64>();
    }
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::Quadrature(format!("non-finite radial integral at r = {r}")));
    }
    Ok(total)
}

/// `(|B|^{-1}∫_B w)^{1/p} (|B|^{-1}∫_B w^{-p'/p})^{1/p'}` for the sup-norm ball of radius
/// `radius` about the origin.
pub fn muckenhoupt_ratio(w: &RadialWeight, d: u32, p: f64, radius: f64, nodes: usize) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return domain(format!("Muckenhoupt exponent must be > 1, got {p}"));
    }
    if !(radius > 0.0) || d == 0 {
        return domain("radius must be positive and d >= 1");
    }
    let vol = (2.0 * radius).powi(d as i32);
    let pd = p / (p - 1.0);
    let a = radial_integral(w, 1.0, d, radius, nodes)? / vol;
    let b = radial_integral(w, -pd / p, d, radius, nodes)? / vol;
    Ok(a.powf(1.0 / p) * b.powf(1.0 / pd))
}

/// `w(Q_{ν,m})`, the weight mass of the cube with centre `2^{-ν} m` and side `2^{-ν}`.
///
/// The cube at `m = 0` is the sup-norm ball of radius `2^{-ν-1}` and is integrated radially;
/// other cubes use a tensor midpoint rule, doubled until two levels agree to `1e-6` or the
/// node count reaches `2^20`.
pub fn cube_mass(w: &RadialWeight, nu: u32, m_idx: &[i64], nodes: usize) -> Result<f64> {
    let d = m_idx.len() as u32;
    if d == 0 {
        return domain("lattice point must have at least one coordinate");
    }
    let side = 2f64.powi(-(nu as i32));
    if m_idx.iter().all(|&c| c == 0) {
        return radial_integral(w, 1.0, d, side / 2.0, nodes);
    }
    let lo: Vec<f64> = m_idx.iter().map(|&c| (c as f64 - 0.5) * side).collect();
    let eval = |k: usize| -> f64 {
        let h = side / k as f64;
        let total_pts = k.pow(d);
        let mut acc = 0.0;
        let mut idx = vec![0usize; d as usize];
        for _ in 0..total_pts {
            let mut norm = 0.0f64;
            for (a, &i) in idx.iter().enumerate() {
                norm = norm.max((lo[a] + (i as f64 + 0.5) * h).abs());
            }
            acc += w.ln_eval(norm.ln()).exp();
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < k {
                    break;
                }
                *slot = 0;
            }
        }
        acc * h.powi(d as i32)
    };
    let mut k = 4usize;
    let mut prev = eval(k);
    loop {
        let next_k = k * 2;
        if next_k.pow(d) > 1 << 20 {
            break;
        }
        let cur = eval(next_k);
        let rel = ((cur - prev) / cur).abs();
        prev = cur;
        k = next_k;
        if rel < 1e-6 {
            break;
        }
    }
    if !prev.is_finite() || prev <= 0.0 {
        return Err(Error::Quadrature(format!("non-finite mass on cube nu={nu}, m={m_idx:?}")));
    }
    Ok(prev)
}

/// `2^{-ν(s1−s2)} w1(Q)^{-1/p1} w2(Q)^{1/p2}` for explicit weights.
#[allow(clippy::too_many_arguments)]
pub fn entry_factor_with(
    w1: &RadialWeight,
    w2: &RadialWeight,
    s1: f64,
    s2: f64,
    p1: f64,
    p2: f64,
    nu: u32,
    m_idx: &[i64],
    nodes: usize,
) -> Result<f64> {
    let a = cube_mass(w1, nu, m_idx, nodes)?;
    let b = cube_mass(w2, nu, m_idx, nodes)?;
    Ok(2f64.powf(-(nu as f64) * (s1 - s2)) * a.powf(-1.0 / p1) * b.powf(1.0 / p2))
}

pub fn entry_factor(params: &EmbeddingParams<f64>, nu: u32, m_idx: &[i64]) -> Result<f64> {
    if m_idx.len() != params.d as usize {
        return domain(format!("lattice point has {} coordinates, d = {}", m_idx.len(), params.d));
    }
    entry_factor_with(
        &RadialWeight::W1(params.clone()),
        &RadialWeight::W2(params.clone()),
        params.s1,
        params.s2,
        params.p1,
        params.p2,
        nu,
        m_idx,
        4096,
    )
}

/// The order the entry factor follows: `|m|^{-δ} L^{-α} ρ(L)` with `L = log2(2^ν/|m|)`
/// for `m ≠ 0`, and `ν^{-α} ρ(ν)` at `m = 0`.
pub fn entry_factor_order(params: &EmbeddingParams<f64>, nu: u32, m_idx: &[i64]) -> f64 {
    let a = params.alpha();
    let rho = params.rho();
    let mn = m_idx.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    if mn == 0 {
        let v = nu as f64;
        return v.powf(-a) * rho.eval(v);
    }
    let m = mn as f64;
    let l = nu as f64 - m.log2();
    m.powf(-params.delta()) * l.powf(-a) * rho.eval(l)
}

/// Order of `w1(Q_{ν,0})`: `r^{β_g p1 + d} |log2 r|^{α_g p1} ρ_g(|log2 r|)^{-p1}` at `r = 2^{-ν}`.
pub fn mass_order_w1(params: &EmbeddingParams<f64>, nu: u32) -> f64 {
    let r = 2f64.powi(-(nu as i32));
    let l = nu as f64;
    r.powf(params.beta_g * params.p1 + params.d as f64)
        * l.powf(params.alpha_g * params.p1)
        * params.rho_g.eval(l).powf(-params.p1)
}

/// Order of `w2(Q_{ν,0})`: `r^{-β_v p2 + d} |log2 r|^{-α_v p2} ρ_v(|log2 r|)^{p2}`.
pub fn mass_order_w2(params: &EmbeddingParams<f64>, nu: u32) -> f64 {
    let r = 2f64.powi(-(nu as i32));
    let l = nu as f64;
    r.powf(-params.beta_v * params.p2 + params.d as f64)
        * l.powf(-params.alpha_v * params.p2)
        * params.rho_v.eval(l).powf(params.p2)
}

// ---------------------------------------------------------------------------------------
// Sequence norms

/// A finitely supported coefficient family `(ν, m) ↦ λ_{ν,m}`.
pub type SeqFamily = Vec<(u32, Vec<i64>, f64)>;

fn mixed_levels(family: &SeqFamily, p: f64, q: f64, level_weight: impl Fn(u32, &[i64]) -> Result<(f64, f64)>) -> Result<f64> {
    // level -> Σ_m weight_m |λ|^p
    let mut levels: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for (nu, m, v) in family {
        let (inner_w, level_w) = level_weight(*nu, m)?;
        let e = levels.entry(*nu).or_insert((0.0, level_w));
        e.0 += inner_w * v.abs().powf(p);
    }
    let total: f64 = levels.values().map(|(s, lw)| lw * s.powf(q / p)).sum();
    Ok(total.powf(1.0 / q))
}

/// `‖λ‖_{X1}` with weights `2^{ν q1 (s1−s2)}` and `w1(Q) w2(Q)^{-p1/p2}`.
pub fn seq_norm_x1(family: &SeqFamily, params: &EmbeddingParams<f64>) -> Result<f64> {
    let w1 = RadialWeight::W1(params.clone());
    let w2 = RadialWeight::W2(params.clone());
    let masses: Vec<Result<(f64, f64)>> = family
        .par_iter()
        .map(|(nu, m, _)| Ok((cube_mass(&w1, *nu, m, 4096)?, cube_mass(&w2, *nu, m, 4096)?)))
        .collect();
    let mut table: BTreeMap<(u32, Vec<i64>), (f64, f64)> = BTreeMap::new();
    for ((nu, m, _), r) in family.iter().zip(masses) {
        table.insert((*nu, m.clone()), r?);
    }
    let (p1, q1, p2) = (params.p1, params.q1, params.p2);
    let ds = params.s1 - params.s2;
    mixed_levels(family, p1, q1, |nu, m| {
        let (a, b) = table[&(nu, m.to_vec())];
        Ok((a * b.powf(-p1 / p2), 2f64.powf(nu as f64 * q1 * ds)))
    })
}

pub fn seq_norm_x1_tilde(family: &SeqFamily, p1: f64, q1: f64) -> f64 {
    mixed_levels(family, p1, q1, |_, _| Ok((1.0, 1.0))).unwrap_or(f64::NAN)
}

pub fn seq_norm_x2(family: &SeqFamily, p2: f64, q2: f64) -> f64 {
    mixed_levels(family, p2, q2, |_, _| Ok((1.0, 1.0))).unwrap_or(f64::NAN)
}

/// `‖P_𝒩‖_{X1 → X̃1}`: the supremum of the entry factor over the support.
pub fn projection_norm(params: &EmbeddingParams<f64>, support: &[(u32, Vec<i64>)]) -> Result<f64> {
    let vals: Vec<Result<f64>> = support.par_iter().map(|(nu, m)| entry_factor(params, *nu, m)).collect();
    let mut best = 0.0f64;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

/// `‖P_𝒩‖_{X̃1 → X1}`: the supremum of the reciprocal entry factor.
pub fn projection_norm_inverse(params: &EmbeddingParams<f64>, support: &[(u32, Vec<i64>)]) -> Result<f64> {
    let vals: Vec<Result<f64>> = support.par_iter().map(|(nu, m)| entry_factor(params, *nu, m)).collect();
    let mut best = 0.0f64;
    for v in vals {
        best = best.max(1.0 / v?);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------------------
// Classifier

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    One,
    Two,
    Three,
}

impl std::str::FromStr for Part {
    type Err = Error;
    fn from_str(s: &str) -> Result<Part> {
        match s.trim() {
            "1" => Ok(Part::One),
            "2" => Ok(Part::Two),
            "3" => Ok(Part::Three),
            other => Err(Error::Parse(format!("part must be 1, 2 or 3, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AsymptoticsKind {
    Kolmogorov,
    LinearApprox,
    Case3Max,
}

impl fmt::Display for AsymptoticsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AsymptoticsKind::Kolmogorov => "KOLMOGOROV",
            AsymptoticsKind::LinearApprox => "LINEAR_APPROX",
            AsymptoticsKind::Case3Max => "CASE3_MAX",
        })
    }
}

/// `θ_1..θ_4` (index 0..3), `σ_1..σ_4` and the active index set (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable<T> {
    pub theta: [T; 4],
    pub sigma: [T; 4],
    pub active: Vec<usize>,
}

/// Which term of `max{n^{-δ/d}, n^{-α} ρ(n)}` dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case3Term {
    Power,
    Rho,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Case3<T> {
    /// `δ/d`.
    pub power_exponent: T,
    /// `α`, the exponent of the `ρ(n)` term.
    pub rho_exponent: T,
    pub dominant: Case3Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Asymptotics<T> {
    pub kind: AsymptoticsKind,
    pub theta: T,
    pub sigma: T,
    pub j_star: Option<usize>,
    /// `(j, θ_j, σ_j)` for every `j ∈ J`.
    pub candidates: Vec<(usize, T, T)>,
    pub case3: Option<Case3<T>>,
}

fn active_set(a_gt: bool, b_gt: bool) -> Vec<usize> {
    match (a_gt, b_gt) {
        (true, true) => vec![1, 2, 3, 4],
        (true, false) => vec![1, 2, 3],
        (false, true) => vec![2, 3, 4],
        // Both equal to 2: θ1 = θ2 and θ3 = θ4, so one index of each pair is kept.
        (false, false) => vec![2, 3],
    }
}

fn window_part1<T: Scalar>(p: &EmbeddingParams<T>) -> Result<()> {
    let two = T::int(2);
    if p.p2 < two {
        return window("p2 >= 2 violated");
    }
    if p.q2 < two {
        return window("q2 >= 2 violated");
    }
    Ok(())
}

fn window_part2<T: Scalar>(p: &EmbeddingParams<T>) -> Result<()> {
    let two = T::int(2);
    if p.p1 > two || p.p2 < two {
        return window("p1 <= 2 <= p2 violated");
    }
    if p.q1 > two || p.q2 < two {
        return window("q1 <= 2 <= q2 violated");
    }
    Ok(())
}

/// `θ_j`, `σ_j` and `J*` for the Kolmogorov case (`p2, q2 ≥ 2`).
pub fn theta_table<T: Scalar>(p: &EmbeddingParams<T>) -> Result<ThetaTable<T>> {
    p.validate()?;
    window_part1(p)?;
    let d = T::int(p.d as i64);
    let half = T::ratio(1, 2);
    let two = T::int(2);
    let delta = p.delta();
    let alpha = p.alpha();
    let lp = p.lambda_p();
    let lq = p.lambda_q();
    let th1 = delta.clone() / d.clone() + lp.clone() * half.clone() - lp / p.p2.clone();
    let th2 = p.p2.clone() * delta / (two.clone() * d);
    let th3 = alpha.clone() + lq.clone() * half - lq / p.q2.clone();
    let th4 = p.q2.clone() * alpha / two.clone();
    Ok(ThetaTable {
        theta: [th1, th2, th3, th4],
        sigma: [T::int(0), T::int(0), T::int(1), p.q2.clone() / two.clone()],
        active: active_set(p.p2 > two, p.q2 > two),
    })
}

/// `θ̃_j`, `σ̃_j` and `J**` for the linear case (`p1 ≤ 2 ≤ p2`, `q1 ≤ 2 ≤ q2`).
pub fn tilde_theta_table<T: Scalar>(p: &EmbeddingParams<T>) -> Result<ThetaTable<T>> {
    p.validate()?;
    window_part2(p)?;
    let one = T::int(1);
    let two = T::int(2);
    let half = T::ratio(1, 2);
    let d = T::int(p.d as i64);
    let delta = p.delta();
    let alpha = p.alpha();
    let pm = T::min_of(p.p2.clone(), conj(&p.p1));
    let qm = T::min_of(p.q2.clone(), conj(&p.q1));
    let gp = T::min_of(half.clone() - one.clone() / p.p2.clone(), one.clone() / p.p1.clone() - half.clone());
    let gq = T::min_of(half.clone() - one.clone() / p.q2.clone(), one / p.q1.clone() - half);
    let th1 = delta.clone() / d.clone() + gp;
    let th2 = pm.clone() * delta / (two.clone() * d);
    let th3 = alpha.clone() + gq;
    let th4 = qm.clone() * alpha / two.clone();
    Ok(ThetaTable {
        theta: [th1, th2, th3, th4],
        sigma: [T::int(0), T::int(0), T::int(1), qm.clone() / two.clone()],
        active: active_set(pm > two, qm > two),
    })
}

fn strict_min<T: Scalar>(t: &ThetaTable<T>) -> Result<(usize, T, T)> {
    let mut best: Option<(usize, T)> = None;
    for &j in &t.active {
        let v = t.theta[j - 1].clone();
        best = match best {
            Some((bj, bv)) if !(v < bv) => Some((bj, bv)),
            _ => Some((j, v)),
        };
    }
    let (j, v) = best.expect("active set is never empty");
    let tol = T::tie_tolerance();
    let tied: Vec<usize> = t
        .active
        .iter()
        .copied()
        .filter(|&i| (t.theta[i - 1].clone() - v.clone()).abs_val() <= tol)
        .collect();
    if tied.len() > 1 {
        return Err(Error::NoStrictMinimizer(tied));
    }
    Ok((j, v, t.sigma[j - 1].clone()))
}

/// Order of the widths: `n^{-θ} ρ(n^σ)` for parts 1 and 2, or the two-term maximum of part 3.
pub fn classify<T: Scalar>(p: &EmbeddingParams<T>, part: Part) -> Result<Asymptotics<T>> {
    let (table, kind) = match part {
        Part::One => (theta_table(p)?, AsymptoticsKind::Kolmogorov),
        Part::Two => (tilde_theta_table(p)?, AsymptoticsKind::LinearApprox),
        Part::Three => return classify_part3(p),
    };
    let (j, theta, sigma) = strict_min(&table)?;
    let candidates = table
        .active
        .iter()
        .map(|&i| (i, table.theta[i - 1].clone(), table.sigma[i - 1].clone()))
        .collect();
    Ok(Asymptotics { kind, theta, sigma, j_star: Some(j), candidates, case3: None })
}

fn classify_part3<T: Scalar>(p: &EmbeddingParams<T>) -> Result<Asymptotics<T>> {
    p.validate()?;
    let two = T::int(2);
    let low = p.p2 <= two && p.q2 <= two;
    let high = p.p1 >= two && p.q1 >= two;
    if !low && !high {
        return window("(p2 <= 2 and q2 <= 2) or (p1 >= 2 and q1 >= 2) violated");
    }
    let power = p.delta() / T::int(p.d as i64);
    let alpha = p.alpha();
    if (power.clone() - alpha.clone()).abs_val() <= T::tie_tolerance() {
        return Err(Error::Case3Degenerate);
    }
    // The larger term has the smaller exponent.
    let (theta, sigma, dominant) = if alpha < power {
        (alpha.clone(), T::int(1), Case3Term::Rho)
    } else {
        (power.clone(), T::int(0), Case3Term::Power)
    };
    Ok(Asymptotics {
        kind: AsymptoticsKind::Case3Max,
        theta,
        sigma,
        j_star: None,
        candidates: Vec::new(),
        case3: Some(Case3 { power_exponent: power, rho_exponent: alpha, dominant }),
    })
}

impl<T: Scalar> EmbeddingParams<T> {
    /// The one-dimensional reference configuration `s1 = 2, s2 = 0, p1 = q1 = 2, p2 = q2 = 4`
    /// (`δ = 7/4`) with the given split of `α`; `ρ ≡ 1`.
    pub fn reference(alpha_g: T, alpha_v: T) -> Self {
        EmbeddingParams {
            d: 1,
            s1: T::int(2),
            s2: T::int(0),
            p1: T::int(2),
            q1: T::int(2),
            p2: T::int(4),
            q2: T::int(4),
            beta_g: T::ratio(7, 4),
            beta_v: T::int(0),
            alpha_g,
            alpha_v,
            gamma_g: T::int(2),
            gamma_v: T::int(0),
            rho_g: RhoSpec::ONE,
            rho_v: RhoSpec::ONE,
        }
    }
}
