//! Closed-form order formulas for widths of finite-dimensional balls: the interpolation
//! parameter `λ`, the Gluskin-type `Φ`/`Ψ`, the mixed-norm `Φ₀` with its regime tags, the
//! linear-width upper bound and the exact Pietsch–Stesin values.
//!
//! All values are bare orders: the constants hidden in `≍` are not modelled.

use std::fmt;

use crate::error::{domain, window, Result};
use crate::mixed_norm_core::conjugate;
use crate::scalar::Scalar;

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 1.0 {
        return domain(format!("{name} must be finite and > 1, got {v}"));
    }
    Ok(())
}

/// `λ(p1, p2) = min{(1/p1 − 1/p2)/(1/2 − 1/p2), 1}`, and 1 when `p2 = 2`.
pub fn lambda_vec(p1: f64, p2: f64) -> Result<f64> {
    check_exponent("p1", p1)?;
    check_exponent("p2", p2)?;
    if p1 > p2 {
        return domain(format!("lambda needs p1 <= p2, got p1={p1} > p2={p2}"));
    }
    if p2 < 2.0 {
        return domain(format!("lambda needs p2 >= 2, got {p2}"));
    }
    Ok(lambda_unchecked(p1, p2))
}

pub(crate) fn lambda_unchecked<T: Scalar>(p1: T, p2: T) -> T {
    let two = T::int(2);
    if p2 == two {
        return T::int(1);
    }
    let one = T::int(1);
    let num = one.clone() / p1 - one.clone() / p2.clone();
    let den = T::ratio(1, 2) - one.clone() / p2;
    T::min_of(num / den, one)
}

/// `Φ(n, ν, p, q)` for `1 < p ≤ q`, by the three-branch display (branch chosen by the
/// position of `p, q` relative to 2).
pub fn phi(n: u64, nu: u64, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if p > q {
        return domain(format!("phi needs p <= q, got p={p} > q={q}"));
    }
    if nu == 0 {
        return domain("phi needs nu >= 1");
    }
    if n > nu {
        return domain(format!("phi needs n <= nu, got n={n} > nu={nu}"));
    }
    let nuf = nu as f64;
    let nf = n as f64;
    // n^{-1/2} with n = 0 read as +inf.
    let base = if n == 0 { f64::INFINITY } else { nuf.powf(1.0 / q) / nf.sqrt() };
    if p >= 2.0 {
        let e = if q == 2.0 { 1.0 } else { (1.0 / p - 1.0 / q) / (0.5 - 1.0 / q) };
        let t = if e == 0.0 { 1.0 } else { base.powf(e) };
        Ok(t.min(1.0))
    } else if q >= 2.0 {
        let a = nuf.powf(1.0 / q - 1.0 / p);
        let b = base.min(1.0) * (1.0 - nf / nuf).max(0.0).sqrt();
        Ok(a.max(b))
    } else {
        let a = nuf.powf(1.0 / q - 1.0 / p);
        let e = (1.0 / q - 1.0 / p) / (1.0 - 2.0 / p);
        let b = (1.0 - nf / nuf).max(0.0).powf(e);
        Ok(a.max(b))
    }
}

/// `Ψ(n, ν, p, q)`: `Φ(n, ν, p, q)` when `1/p + 1/q ≥ 1`, otherwise `Φ(n, ν, q', p')`.
pub fn psi(n: u64, nu: u64, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if p > q {
        return domain(format!("psi needs p <= q, got p={p} > q={q}"));
    }
    if 1.0 / p + 1.0 / q >= 1.0 {
        phi(n, nu, p, q)
    } else {
        phi(n, nu, conjugate(q), conjugate(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phi0Tag {
    Unit,
    PBranchMid,
    PBranchHigh,
    QBranchMid,
    QBranchHigh,
    GenericMin,
}

impl fmt::Display for Phi0Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phi0Tag::Unit => "UNIT",
            Phi0Tag::PBranchMid => "P_BRANCH_MID",
            Phi0Tag::PBranchHigh => "P_BRANCH_HIGH",
            Phi0Tag::QBranchMid => "Q_BRANCH_MID",
            Phi0Tag::QBranchHigh => "Q_BRANCH_HIGH",
            Phi0Tag::GenericMin => "GENERIC_MIN",
        };
        f.write_str(s)
    }
}

/// Value of `Φ₀` with its simplification tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi0Regime {
    pub tag: Phi0Tag,
    pub value: f64,
    /// `d ln Φ₀ / d ln n` of the term attaining the minimum.
    pub local_exponent: f64,
    /// `n > m·k`: outside the range where the two-sided estimate is asserted.
    pub extrapolated: bool,
}

/// Exponents `(p1, q1) → (p2, q2)` of a source/target pair of mixed-norm spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentQuad {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl ExponentQuad {
    pub fn new(p1: f64, q1: f64, p2: f64, q2: f64) -> Self {
        ExponentQuad { p1, q1, p2, q2 }
    }

    /// The dual pair `(p2', q2') → (p1', q1')`.
    pub fn dual_swap(&self) -> Self {
        ExponentQuad {
            p1: conjugate(self.p2),
            q1: conjugate(self.q2),
            p2: conjugate(self.p1),
            q2: conjugate(self.q1),
        }
    }
}

fn check_phi0_window(m: u64, k: u64, p1: f64, p2: f64, q1: f64, q2: f64) -> Result<()> {
    for (name, v) in [("p1", p1), ("p2", p2), ("q1", q1), ("q2", q2)] {
        check_exponent(name, v)?;
    }
    if m == 0 || k == 0 {
        return domain("m and k must be positive");
    }
    if p1 > p2 {
        return window(format!("p1 <= p2 violated: {p1} > {p2}"));
    }
    if q1 > q2 {
        return window(format!("q1 <= q2 violated: {q1} > {q2}"));
    }
    if p2 < 2.0 {
        return window(format!("p2 >= 2 violated: {p2}"));
    }
    if q2 < 2.0 {
        return window(format!("q2 >= 2 violated: {q2}"));
    }
    Ok(())
}

/// `Φ₀(m, k, n)` for `p1 ≤ p2`, `q1 ≤ q2`, `p2, q2 ≥ 2`, with the regime tag of the
/// simplification list.
pub fn phi0(m: u64, k: u64, n: u64, p1: f64, p2: f64, q1: f64, q2: f64) -> Result<Phi0Regime> {
    check_phi0_window(m, k, p1, p2, q1, q2)?;
    let (mf, kf, nf) = (m as f64, k as f64, n as f64);
    let extrapolated = n > m * k;
    let inv_sqrt_n = if n == 0 { f64::INFINITY } else { 1.0 / nf.sqrt() };
    let lp = lambda_unchecked(p1, p2);
    let lq = lambda_unchecked(q1, q2);
    let a = inv_sqrt_n * mf.powf(1.0 / p2) * kf.powf(1.0 / q2);

    // Candidate terms as (value, local exponent).
    let mut terms: Vec<(f64, f64)> = vec![(1.0, 0.0)];
    if p1 <= 2.0 && q1 <= 2.0 {
        terms.push((a, -0.5));
    } else if lp <= lq && lp < 1.0 {
        let b = inv_sqrt_n * mf.sqrt() * kf.powf(1.0 / q2);
        terms.push((pow_pos(a, lp), -lp / 2.0));
        terms.push((mf.powf(1.0 / p2 - 1.0 / p1) * pow_pos(b, lq), -lq / 2.0));
    } else {
        let c = inv_sqrt_n * mf.powf(1.0 / p2) * kf.sqrt();
        terms.push((pow_pos(a, lq), -lq / 2.0));
        terms.push((kf.powf(1.0 / q2 - 1.0 / q1) * pow_pos(c, lp), -lp / 2.0));
    }
    let (value, local_exponent) = terms
        .iter()
        .copied()
        .fold((f64::INFINITY, 0.0), |acc, t| if t.0 < acc.0 { t } else { acc });

    let unit_threshold = mf.powf(2.0 / p2) * kf.powf(2.0 / q2);
    let tag = if nf <= unit_threshold {
        Phi0Tag::Unit
    } else if lp <= lq && p1 > 2.0 && nf <= mf * kf.powf(2.0 / q2) {
        Phi0Tag::PBranchMid
    } else if lp <= lq && p1 > 2.0 && n <= m * k {
        Phi0Tag::PBranchHigh
    } else if lq <= lp && q1 > 2.0 && nf <= kf * mf.powf(2.0 / p2) {
        Phi0Tag::QBranchMid
    } else if lq <= lp && q1 > 2.0 && n <= m * k {
        Phi0Tag::QBranchHigh
    } else {
        Phi0Tag::GenericMin
    };
    let local_exponent = if tag == Phi0Tag::Unit { 0.0 } else { local_exponent };
    Ok(Phi0Regime { tag, value: value.min(1.0), local_exponent, extrapolated })
}

fn pow_pos(base: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        base.powf(e)
    }
}

/// The simplified formula the regime list attaches to `tag` (the full minimum for
/// `GenericMin`). Used to check that adjacent regimes agree on their common boundary.
pub fn phi0_branch_formula(tag: Phi0Tag, m: u64, k: u64, n: f64, p1: f64, p2: f64, q1: f64, q2: f64) -> f64 {
    let (mf, kf) = (m as f64, k as f64);
    let lp = lambda_unchecked(p1, p2);
    let lq = lambda_unchecked(q1, q2);
    let a = mf.powf(1.0 / p2) * kf.powf(1.0 / q2) / n.sqrt();
    match tag {
        Phi0Tag::Unit => 1.0,
        Phi0Tag::PBranchMid => pow_pos(a, lp),
        Phi0Tag::PBranchHigh => {
            let b = mf.sqrt() * kf.powf(1.0 / q2) / n.sqrt();
            mf.powf(1.0 / p2 - 1.0 / p1) * pow_pos(b, lq)
        }
        Phi0Tag::QBranchMid => pow_pos(a, lq),
        Phi0Tag::QBranchHigh => {
            let c = mf.powf(1.0 / p2) * kf.sqrt() / n.sqrt();
            kf.powf(1.0 / q2 - 1.0 / q1) * pow_pos(c, lp)
        }
        Phi0Tag::GenericMin => {
            if p1 <= 2.0 && q1 <= 2.0 {
                a.min(1.0)
            } else if lp <= lq && lp < 1.0 {
                let b = mf.sqrt() * kf.powf(1.0 / q2) / n.sqrt();
                1f64.min(pow_pos(a, lp)).min(mf.powf(1.0 / p2 - 1.0 / p1) * pow_pos(b, lq))
            } else {
                let c = mf.powf(1.0 / p2) * kf.sqrt() / n.sqrt();
                1f64.min(pow_pos(a, lq)).min(kf.powf(1.0 / q2 - 1.0 / q1) * pow_pos(c, lp))
            }
        }
    }
}

/// Linear-width upper bound `min{n^{-1/2} m^{max(1/p2, 1/p1')} k^{max(1/q2, 1/q1')}, 1}` for
/// `1 < p1 ≤ 2 ≤ p2`, `1 < q1 ≤ 2 ≤ q2`.
pub fn linear_width_upper(m: u64, k: u64, n: u64, p1: f64, q1: f64, p2: f64, q2: f64) -> Result<f64> {
    for (name, v) in [("p1", p1), ("q1", q1), ("p2", p2), ("q2", q2)] {
        check_exponent(name, v)?;
    }
    if !(p1 <= 2.0 && 2.0 <= p2) {
        return window(format!("p1 <= 2 <= p2 violated: p1={p1}, p2={p2}"));
    }
    if !(q1 <= 2.0 && 2.0 <= q2) {
        return window(format!("q1 <= 2 <= q2 violated: q1={q1}, q2={q2}"));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let rm = (1.0 / p2).max(1.0 / conjugate(p1));
    let rk = (1.0 / q2).max(1.0 / conjugate(q1));
    let v = (m as f64).powf(rm) * (k as f64).powf(rk) / (n as f64).sqrt();
    Ok(v.min(1.0))
}

/// Exact `d_n(B_p^ν, l_q^ν) = (ν − n)^{1/q − 1/p}` for `q ≤ p`, `n < ν`.
pub fn stesin_exact(n: u64, nu: u64, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if p < q {
        return domain(format!("stesin_exact needs q <= p, got p={p} < q={q}"));
    }
    if n >= nu {
        return domain(format!("stesin_exact needs n < nu, got n={n}, nu={nu}"));
    }
    Ok(((nu - n) as f64).powf(1.0 / q - 1.0 / p))
}
