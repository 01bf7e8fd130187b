//! Mixed norms on `R^{m×k}`, dual exponents, and the pointwise inequalities behind the
//! width bounds (the convexity bound with constant `c1`, the Hölder-type interpolation
//! inequality and its mixed-norm consequence).
//!
//! Vectors are stored column-major: entry `(i, j)` lives at `j * m + i`, so a column is the
//! inner `l_p` block and the columns are combined in `l_q`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::width_formulas::lambda_vec;

/// An exponent in the open interval `(1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 1.0 {
            return domain(format!("exponent must be finite and > 1, got {value}"));
        }
        Ok(Exponent(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `p' = p / (p - 1)`.
    pub fn dual(self) -> Exponent {
        Exponent(conjugate(self.0))
    }
}

impl TryFrom<f64> for Exponent {
    type Error = crate::Error;
    fn try_from(v: f64) -> Result<Self> {
        Exponent::new(v)
    }
}

/// Conjugate exponent on raw values, written so that `conjugate(conjugate(p))` round-trips.
pub(crate) fn conjugate(p: f64) -> f64 {
    1.0 / (1.0 - 1.0 / p)
}

pub fn dual_exponent(p: Exponent) -> Exponent {
    p.dual()
}

/// An `m × k` real array, the element of `l_{p,q}^{m,k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedVector {
    m: usize,
    k: usize,
    data: Vec<f64>,
}

impl MixedVector {
    /// Builds from column-major data (`data[j * m + i]` is entry `(i, j)`).
    pub fn new(m: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 || k == 0 {
            return domain("mixed vector needs m >= 1 and k >= 1");
        }
        if data.len() != m * k {
            return domain(format!("expected {} entries, got {}", m * k, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return domain("mixed vector entries must be finite");
        }
        Ok(MixedVector { m, k, data })
    }

    pub fn zeros(m: usize, k: usize) -> Self {
        assert!(m > 0 && k > 0, "mixed vector needs m >= 1 and k >= 1");
        MixedVector { m, k, data: vec![0.0; m * k] }
    }

    pub fn from_fn(m: usize, k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut x = MixedVector::zeros(m, k);
        for j in 0..k {
            for i in 0..m {
                x.data[j * m + i] = f(i, j);
            }
        }
        x
    }

    /// Unit vector `e_{ij}`.
    pub fn unit(m: usize, k: usize, i: usize, j: usize) -> Self {
        let mut x = MixedVector::zeros(m, k);
        x.data[j * m + i] = 1.0;
        x
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.m + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.m + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn scaled(&self, t: f64) -> Self {
        MixedVector { m: self.m, k: self.k, data: self.data.iter().map(|v| v * t).collect() }
    }
}

/// Shape and exponents of `l_{p,q}^{m,k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceSpec {
    pub m: usize,
    pub k: usize,
    pub p: Exponent,
    pub q: Exponent,
}

impl SpaceSpec {
    pub fn new(m: usize, k: usize, p: f64, q: f64) -> Result<Self> {
        if m == 0 || k == 0 {
            return domain("space needs m >= 1 and k >= 1");
        }
        Ok(SpaceSpec { m, k, p: Exponent::new(p)?, q: Exponent::new(q)? })
    }

    pub fn dim(&self) -> usize {
        self.m * self.k
    }

    /// The dual space `l_{p',q'}^{m,k}`.
    pub fn dual(&self) -> SpaceSpec {
        SpaceSpec { m: self.m, k: self.k, p: self.p.dual(), q: self.q.dual() }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        norm_slice(x, self.m, self.p.value(), self.q.value())
    }
}

pub fn mixed_norm(x: &MixedVector, p: Exponent, q: Exponent) -> f64 {
    norm_slice(&x.data, x.m, p.value(), q.value())
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `l_{p,q}` norm of a column-major slice with inner block length `m`.
///
/// Entries are scaled by the largest magnitude first so that large exponents cannot
/// overflow or underflow.
pub fn norm_slice(x: &[f64], m: usize, p: f64, q: f64) -> f64 {
    let a = max_abs(x);
    if a == 0.0 {
        return 0.0;
    }
    let mut outer = 0.0;
    for col in x.chunks(m) {
        let s: f64 = col.iter().map(|v| (v.abs() / a).powf(p)).sum::<f64>();
        if s > 0.0 {
            outer += s.powf(q / p);
        }
    }
    a * outer.powf(1.0 / q)
}

/// Gradient of `x ↦ ‖x‖_{p,q}` written into `out`; returns the norm.
///
/// The gradient has dual norm one and pairs with `x` to give `‖x‖`. At `x = 0` the output
/// is zero.
pub fn norm_gradient(x: &[f64], m: usize, p: f64, q: f64, out: &mut [f64]) -> f64 {
    let a = max_abs(x);
    if a == 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        return 0.0;
    }
    let k = x.len() / m;
    let mut col_norms = vec![0.0; k];
    let mut outer = 0.0;
    for (j, col) in x.chunks(m).enumerate() {
        let s: f64 = col.iter().map(|v| (v.abs() / a).powf(p)).sum::<f64>();
        let s = s.powf(1.0 / p);
        col_norms[j] = s;
        if s > 0.0 {
            outer += s.powf(q);
        }
    }
    let f = outer.powf(1.0 / q);
    for (j, col) in x.chunks(m).enumerate() {
        let s = col_norms[j];
        let o = &mut out[j * m..(j + 1) * m];
        if s == 0.0 {
            o.iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        let outer_factor = (s / f).powf(q - 1.0);
        for (oi, xi) in o.iter_mut().zip(col) {
            let t = xi.abs() / a / s;
            *oi = if t == 0.0 { 0.0 } else { xi.signum() * t.powf(p - 1.0) * outer_factor };
        }
    }
    a * f
}

/// Maximiser of `⟨f, x⟩` over the unit ball of `l_{p,q}`; returns the maximum `‖f‖_{p',q'}`.
pub fn support_point(f: &[f64], m: usize, p: f64, q: f64, out: &mut [f64]) -> f64 {
    norm_gradient(f, m, conjugate(p), conjugate(q), out)
}

pub fn rearrange_nonincreasing(x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|t| t.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `x^e` for `x ≥ 0`; a zero exponent gives one and a zero base otherwise contributes zero.
fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

/// Right side minus left side of the Hölder-type interpolation inequality
/// `(Σ a^{v1'λ} b^{v1'(1-λ)})^{1/v1'} ≤ (Σ a²)^{λ/2} (Σ b^{v2'})^{(1-λ)/v2'}`.
///
/// `a` and `b` are rescaled to unit maximum first; both sides are homogeneous of the same
/// degree in each of them.
pub fn interpolation_slack(a: &[f64], b: &[f64], v1: Exponent, v2: Exponent, lam: f64) -> Result<f64> {
    let (v1, v2) = (v1.value(), v2.value());
    if v1 < 2.0 || v2 < v1 {
        return domain(format!("need 2 <= v1 <= v2, got v1={v1}, v2={v2}"));
    }
    if a.len() != b.len() {
        return domain("a and b must have the same length");
    }
    if a.iter().chain(b).any(|t| !t.is_finite() || *t < 0.0) {
        return domain("a and b must be finite and nonnegative");
    }
    let limit = lambda_vec(v1, v2)?;
    if !(lam > 0.0) || lam > limit + 1e-15 {
        return domain(format!("lambda {lam} outside (0, {limit}]"));
    }
    let sa = max_abs(a);
    let sb = max_abs(b);
    let sa = if sa > 0.0 { sa } else { 1.0 };
    let sb = if sb > 0.0 { sb } else { 1.0 };
    let w1 = conjugate(v1);
    let w2 = conjugate(v2);
    let lhs = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| pow0(x / sa, w1 * lam) * pow0(y / sb, w1 * (1.0 - lam)))
        .sum::<f64>()
        .powf(1.0 / w1);
    let ra = pow0(a.iter().map(|x| (x / sa) * (x / sa)).sum::<f64>(), lam / 2.0);
    let rb = pow0(b.iter().map(|&y| pow0(y / sb, w2)).sum::<f64>(), (1.0 - lam) / w2);
    Ok(ra * rb - lhs)
}

/// Left side minus right side of the convexity bound
/// `(Σ|1-x_i|^p)^{q/p} ≥ r^{q/p}/2 + c1 (Σ|x_i|^p)^{q/p} - q r^{q/p-1} Σ x_i`.
pub fn convexity_bound_slack(x: &[f64], p: Exponent, q: Exponent, c1: f64) -> f64 {
    let (lhs, base, norm_term) = convexity_parts(x, p.value(), q.value());
    lhs - base - c1 * norm_term
}

/// Splits the bound into (left side, right side without the c1 term, c1 coefficient).
fn convexity_parts(x: &[f64], p: f64, q: f64) -> (f64, f64, f64) {
    let r = x.len() as f64;
    let lhs = x.iter().map(|v| (1.0 - v).abs().powf(p)).sum::<f64>().powf(q / p);
    let norm_term = x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(q / p);
    let sum: f64 = x.iter().sum();
    let base = r.powf(q / p) / 2.0 - q * r.powf(q / p - 1.0) * sum;
    (lhs, base, norm_term)
}

/// Grid `2^{-20}, …, 2^1` searched by [`find_c1`].
pub const C1_GRID_MIN_LOG2: i32 = -20;
pub const C1_GRID_MAX_LOG2: i32 = 1;

/// Largest `c = 2^e`, `e ∈ {-20, …, 1}`, for which the convexity bound holds on every sampled
/// `x` (dimensions 1..=8, entries uniform in `[-10, 10]`, plus constant and one-hot probes).
///
/// Falls back to the grid minimum when even `2^{-20}` fails.
pub fn find_c1(p: Exponent, q: Exponent, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return domain("find_c1 needs at least one trial");
    }
    let (pv, qv) = (p.value(), q.value());
    let mut cap = f64::INFINITY;
    let mut samples: Vec<Vec<f64>> = Vec::new();
    // Structured probes: constant vectors and one-hot vectors along a fine grid.
    for r in 1..=8usize {
        for step in -400..=400 {
            let t = step as f64 / 40.0;
            samples.push(vec![t; r]);
            let mut v = vec![0.0; r];
            v[0] = t;
            samples.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let r = rng.random_range(1..=8usize);
        samples.push((0..r).map(|_| rng.random_range(-10.0..=10.0)).collect());
    }
    for x in &samples {
        let (lhs, base, norm_term) = convexity_parts(x, pv, qv);
        if norm_term > 0.0 {
            cap = cap.min((lhs - base) / norm_term);
        }
    }
    let mut e = C1_GRID_MAX_LOG2;
    while e > C1_GRID_MIN_LOG2 {
        let c = 2f64.powi(e);
        if c <= cap && samples.iter().all(|x| convexity_bound_slack(x, p, q, c) >= 0.0) {
            return Ok(c);
        }
        e -= 1;
    }
    Ok(2f64.powi(C1_GRID_MIN_LOG2))
}

/// Which interpolation parameter the mixed-norm inequality uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaVariant {
    /// `λ(p) = λ(p1, p2)`.
    P,
    /// `λ(q) = λ(q1, q2)`.
    Q,
}

/// Right side minus left side of `‖x‖_{p1',q1'} ≤ ‖x‖_{2,2}^λ ‖x‖_{p2',q2'}^{1-λ}`.
///
/// Applying the scalar inequality to rows and then to columns needs `λ` not to exceed
/// either `λ(p)` or `λ(q)`, so the selected variant must be the smaller of the two.
pub fn norm_interpolation_slack(
    x: &MixedVector,
    p1: Exponent,
    q1: Exponent,
    p2: Exponent,
    q2: Exponent,
    variant: LambdaVariant,
) -> Result<f64> {
    let (p1, q1, p2, q2) = (p1.value(), q1.value(), p2.value(), q2.value());
    if p1 < 2.0 || p2 < p1 || q1 < 2.0 || q2 < q1 {
        return domain(format!(
            "need 2 <= p1 <= p2 and 2 <= q1 <= q2, got p=({p1},{p2}) q=({q1},{q2})"
        ));
    }
    let lp = lambda_vec(p1, p2)?;
    let lq = lambda_vec(q1, q2)?;
    let lam = match variant {
        LambdaVariant::P if lp <= lq => lp,
        LambdaVariant::Q if lq <= lp => lq,
        _ => {
            return domain(format!(
                "selected lambda must not exceed the other one (lambda(p)={lp}, lambda(q)={lq})"
            ))
        }
    };
    let s = max_abs(&x.data);
    if s == 0.0 {
        return Ok(0.0);
    }
    let y: Vec<f64> = x.data.iter().map(|v| v / s).collect();
    let lhs = norm_slice(&y, x.m, conjugate(p1), conjugate(q1));
    let n22 = norm_slice(&y, x.m, 2.0, 2.0);
    let n2 = norm_slice(&y, x.m, conjugate(p2), conjugate(q2));
    Ok(n22.powf(lam) * n2.powf(1.0 - lam) - lhs)
}
