//! Covering of the dyadic index set `{(ν, m) : 2^{-ν} m ∈ [-1/2, 1/2]^d}` by the families
//! `N1(j,l)`, `N2(j,l)`, `N3(s)`, `N4`, `N5(j)`, `N6(s)` at level `n = 2^{Nd}`; their exact
//! cardinalities and rank budget; the corner selection for the piecewise-affine exponent maps
//! `F¹`, `F²`, `Σ*`; and a numeric check of the summation bound over piecewise-affine regions.
//!
//! Every `[·]` is a floor. Predicates see a lattice point only through its sup-norm shell
//! `e(m) = ⌈log2 |m|∞⌉`, which is what lets points at very deep levels be represented.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::besov_embedding::{EmbeddingParams, RhoSpec};
use crate::cli_report::fmt_g12;
use crate::error::{domain, window, Error, Result};
use crate::rng::keyed;
use crate::scalar::Scalar;

const MAX_FAMILIES: usize = 1 << 22;
const NU_CAP_LIMIT: u64 = 1 << 16;
const EXHAUSTIVE_NU: u64 = 12;
const EXHAUSTIVE_POINTS: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JStar {
    Zero,
    Top,
}

impl std::str::FromStr for JStar {
    type Err = Error;
    fn from_str(s: &str) -> Result<JStar> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "zero" => Ok(JStar::Zero),
            "top" | "nd" | "max" => Ok(JStar::Top),
            other => Err(Error::Parse(format!("jstar must be `0` or `top`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyTag {
    N1 { j: u32, l: i64 },
    N2 { j: u32, l: i64 },
    N3,
    N4,
    N5 { j: u32 },
    N6,
}

impl FamilyTag {
    pub fn kind(&self) -> &'static str {
        match self {
            FamilyTag::N1 { .. } => "N1",
            FamilyTag::N2 { .. } => "N2",
            FamilyTag::N3 => "N3",
            FamilyTag::N4 => "N4",
            FamilyTag::N5 { .. } => "N5",
            FamilyTag::N6 => "N6",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::N1 { j, l } | FamilyTag::N2 { j, l } => write!(f, "{}({j},{l})", self.kind()),
            FamilyTag::N5 { j } => write!(f, "N5({j})"),
            _ => f.write_str(self.kind()),
        }
    }
}

/// A lattice point seen through its sup-norm shell: `shell = None` means `m = 0`, otherwise
/// `m ≠ 0` with `⌈log2 |m|∞⌉ = shell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexPoint {
    pub nu: u64,
    pub shell: Option<u64>,
}

fn ceil_log2(a: u64) -> u64 {
    if a <= 1 {
        0
    } else {
        64 - u64::from((a - 1).leading_zeros())
    }
}

fn floor_log2(a: u64) -> u64 {
    63 - u64::from(a.leading_zeros())
}

impl IndexPoint {
    pub fn from_lattice(nu: u64, m: &[i64]) -> Self {
        let sup = m.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        IndexPoint { nu, shell: if sup == 0 { None } else { Some(ceil_log2(sup)) } }
    }

    /// Inside `[-1/2, 1/2]^d` at level `ν`: `|m|∞ ≤ 2^{ν-1}`.
    pub fn in_domain(&self) -> bool {
        match self.shell {
            None => true,
            Some(e) => self.nu >= 1 && e < self.nu,
        }
    }
}

/// Inputs of the construction. `params` supplies `q1, q2` for the thresholds `j_s(N)` and the
/// exponents behind weight factors and Step-5 budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverConfig {
    pub n_level: u32,
    pub d: u32,
    pub eps: f64,
    pub j_star: JStar,
    pub s: u8,
    pub params: EmbeddingParams<f64>,
}

/// The reference exponents (`p1 = q1 = 2`, `p2 = q2 = 4`, `α = 3`) adapted to dimension `d`.
pub fn reference_params_for_dim(d: u32) -> EmbeddingParams<f64> {
    let mut p = EmbeddingParams::<f64>::reference(2.0, 1.0);
    p.d = d.max(1);
    p.beta_g = p.delta();
    p.gamma_g = p.delta() + 0.25;
    p
}

impl CoverConfig {
    pub fn new(n_level: u32, d: u32, eps: f64, j_star: JStar, s: u8) -> Self {
        CoverConfig { n_level, d, eps, j_star, s, params: reference_params_for_dim(d) }
    }

    pub fn with_params(mut self, params: EmbeddingParams<f64>) -> Self {
        self.params = params;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverFamily {
    pub tag: FamilyTag,
    /// Inner block size (lattice points per level); `None` when unbounded.
    pub m_dim: Option<u64>,
    /// Outer block count (levels); `None` when unbounded.
    pub k_dim: Option<u64>,
    /// `log2` of the norm prefactor the family contributes.
    pub log2_weight: f64,
    pub mu: u64,
}

impl CoverFamily {
    pub fn weight_factor(&self) -> f64 {
        self.log2_weight.exp2()
    }

    /// `m_dim · k_dim` when both are finite.
    pub fn size(&self) -> Option<u64> {
        self.m_dim?.checked_mul(self.k_dim?)
    }
}

#[derive(Debug, Clone)]
pub struct CoverAtlas {
    pub config: CoverConfig,
    /// `Nd`, so `n = 2^{Nd}`.
    pub nd: u32,
    /// `j_s(N)` before flooring.
    pub j_s: f64,
    pub nu_cap: u64,
    pub families: Vec<CoverFamily>,
    index: HashMap<FamilyTag, usize>,
}

/// `(2^{e+1} + 1)^d − (2[2^{e−1}] + 1)^d`: lattice points with `|m|∞ ∈ (2^{e−1}, 2^e]`.
pub fn shell_card(e: i64, d: u32) -> Option<u64> {
    if e < 0 {
        return Some(0);
    }
    let outer = 1u64.checked_shl((e + 1) as u32)?.checked_add(1)?;
    let inner_half = if e == 0 { 0 } else { 1u64 << (e - 1) };
    let inner = inner_half.checked_mul(2)? + 1;
    outer.checked_pow(d)?.checked_sub(inner.checked_pow(d)?)
}

fn log2_rho_pow2(rho: &RhoSpec, x: f64) -> f64 {
    let y = if x > 1000.0 { f64::MAX } else { x.exp2() };
    if rho.c1 == 0.0 && rho.c2 == 0.0 {
        return 0.0;
    }
    if x > 1000.0 {
        let l1 = x * std::f64::consts::LN_2;
        return (rho.c1 * l1.ln() + rho.c2 * (std::f64::consts::E + l1).ln().ln()) / std::f64::consts::LN_2;
    }
    rho.ln_eval(y) / std::f64::consts::LN_2
}

fn pow2_floor(nd: u32, k: i64) -> u64 {
    if k > nd as i64 {
        0
    } else {
        1u64 << (nd as i64 - k.max(0)) as u32
    }
}

/// Step-5 budget data for one of the `F¹`, `F²` blocks.
struct BudgetPlan {
    j_anchor: f64,
    /// `l̂(j)` as `slope·j + coef·Nd`.
    lhat: (f64, f64),
    /// `l̄(j)` as `slope·j + coef·Nd`.
    lbar: (f64, f64),
}

impl CoverAtlas {
    pub fn n(&self) -> u64 {
        1u64 << self.nd
    }

    pub fn j_s_floor(&self) -> u64 {
        self.j_s.floor() as u64
    }

    pub fn j_star_value(&self) -> u32 {
        match self.config.j_star {
            JStar::Zero => 0,
            JStar::Top => self.nd,
        }
    }

    /// `[c_N(j)]` with `c_N(j) = ε |j − j*|`.
    pub fn c_floor(&self, j: u32) -> i64 {
        (self.config.eps * (j as f64 - self.j_star_value() as f64).abs()).floor() as i64
    }

    /// `e = N + l − [j/d] − [c_N(j)]`, the shell exponent of `N1(j,l)`.
    pub fn n1_shell(&self, j: u32, l: i64) -> i64 {
        self.config.n_level as i64 + l - (j / self.config.d) as i64 - self.c_floor(j)
    }

    pub fn family(&self, tag: &FamilyTag) -> Option<&CoverFamily> {
        self.index.get(tag).map(|&i| &self.families[i])
    }

    /// `2^{e d}` with `e` the `N1` shell exponent: the order of `card M¹`. It differs from
    /// `2^{Nd + ld − j − [c]d}` by the factor `2^{j − d[j/d]} ∈ [1, 2^{d−1}]`.
    pub fn nominal_m_dim(&self, tag: &FamilyTag) -> Option<f64> {
        match *tag {
            FamilyTag::N1 { j, l } => Some(((self.n1_shell(j, l) * self.config.d as i64) as f64).exp2()),
            FamilyTag::N2 { l, .. } => Some(((l * self.config.d as i64) as f64).exp2()),
            _ => None,
        }
    }

    /// The family's own membership predicate.
    pub fn member(&self, tag: &FamilyTag, pt: IndexPoint) -> bool {
        let nd = self.nd as u64;
        match (*tag, pt.shell) {
            (FamilyTag::N1 { j, l }, Some(e)) => {
                let t = pt.nu as i64 - e as i64;
                let lo = 1i64 << j;
                t >= lo && t < 2 * lo && e as i64 == self.n1_shell(j, l)
            }
            (FamilyTag::N2 { j, l }, Some(e)) => {
                let t = pt.nu as i64 - e as i64;
                let shift = j as u64 + nd;
                if shift >= 62 {
                    return false;
                }
                let lo = 1i64 << shift;
                t >= lo && t < 2 * lo && e as i64 == l
            }
            (FamilyTag::N3, Some(e)) => {
                let shift = self.j_s_floor() + nd;
                shift < 62 && pt.nu >= (1u64 << shift) && e <= pt.nu - (1u64 << shift)
            }
            (FamilyTag::N4, None) => pt.nu < (1u64 << nd),
            (FamilyTag::N5 { j }, None) => {
                let lo = 1u64 << (j as u64 + nd);
                pt.nu >= lo && pt.nu < 2 * lo && (j as u64) < self.j_s_floor()
            }
            (FamilyTag::N6, None) => pt.nu >= (1u64 << (nd + self.j_s_floor())),
            _ => false,
        }
    }

    /// Families that could hold the point, found by inverting the index maps; membership is
    /// confirmed separately by [`CoverAtlas::member`].
    pub fn candidate_tags(&self, pt: IndexPoint) -> Vec<FamilyTag> {
        let nd = self.nd as u64;
        let mut out = Vec::new();
        match pt.shell {
            None => {
                out.push(FamilyTag::N4);
                if pt.nu >= (1u64 << nd) {
                    let j = floor_log2(pt.nu) - nd;
                    if j <= u32::MAX as u64 {
                        out.push(FamilyTag::N5 { j: j as u32 });
                    }
                }
                out.push(FamilyTag::N6);
            }
            Some(e) => {
                if pt.nu > e {
                    let t = pt.nu - e;
                    let j = floor_log2(t);
                    if j <= nd {
                        let j = j as u32;
                        let l = e as i64 - self.config.n_level as i64 + (j / self.config.d) as i64 + self.c_floor(j);
                        out.push(FamilyTag::N1 { j, l });
                    }
                    if j >= nd {
                        out.push(FamilyTag::N2 { j: (j - nd) as u32, l: e as i64 });
                    }
                }
                out.push(FamilyTag::N3);
            }
        }
        out
    }

    /// The first materialised family whose predicate holds, if any.
    pub fn covering_family(&self, pt: IndexPoint) -> Option<FamilyTag> {
        self.candidate_tags(pt)
            .into_iter()
            .find(|tag| self.index.contains_key(tag) && self.member(tag, pt))
    }

    /// One line per family: `tag j l m_dim k_dim weight_factor mu`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<u64>| v.map_or_else(|| "inf".to_string(), |x| x.to_string());
        for f in &self.families {
            let (j, l) = match f.tag {
                FamilyTag::N1 { j, l } | FamilyTag::N2 { j, l } => (j.to_string(), l.to_string()),
                FamilyTag::N5 { j } => (j.to_string(), "-".into()),
                _ => ("-".into(), "-".into()),
            };
            s.push_str(&format!(
                "{} {} {} {} {} {} {}\n",
                f.tag.kind(),
                j,
                l,
                opt(f.m_dim),
                opt(f.k_dim),
                fmt_g12(f.weight_factor()),
                f.mu
            ));
        }
        s
    }

    /// `Σ μ / n` over every family: the empirical constant in `Σ μ ≲ n`.
    pub fn budget_ratio(&self) -> f64 {
        self.families.iter().map(|f| f.mu as f64).sum::<f64>() / self.n() as f64
    }

    fn budget(&self, plan: &Option<BudgetPlan>, j: u32, l: i64) -> u64 {
        let Some(plan) = plan else { return 0 };
        let (jf, lf, nd) = (j as f64, l as f64, self.nd as f64);
        let lbar = plan.lbar.0 * jf + plan.lbar.1 * nd;
        if lf > lbar + 1e-9 {
            return 0;
        }
        let sigma = (self.config.eps * (jf - plan.j_anchor).abs()).floor() as i64;
        let lhat = plan.lhat.0 * jf + plan.lhat.1 * nd;
        let tau = (self.config.eps * (lf - lhat).abs()).floor() as i64;
        pow2_floor(self.nd, sigma + tau)
    }
}

fn budget_plan(params: &EmbeddingParams<f64>, family: StepFamily, j_anchor: Option<f64>, nd: u32) -> Option<BudgetPlan> {
    let layout = step5_layout(params, family).ok()?;
    let corner = corner_argmax::<f64>(params, family).ok()?;
    let lbar_idx = layout.alphas.len() - 1;
    Some(BudgetPlan {
        j_anchor: j_anchor.unwrap_or(corner.x * nd as f64),
        lhat: (layout.alphas[corner.boundary], layout.betas[corner.boundary]),
        lbar: (layout.alphas[lbar_idx], layout.betas[lbar_idx]),
    })
}

/// Builds every family that meets levels `ν ≤ ν_cap`, with `ν_cap = min(2^{Nd+[j_s]} + 64, 2^16)`.
pub fn build_cover(config: &CoverConfig) -> Result<CoverAtlas> {
    if config.n_level > 8 || config.d == 0 || config.d > 3 {
        return domain("build_cover needs N <= 8 and 1 <= d <= 3");
    }
    if !(config.eps >= 0.0) || !config.eps.is_finite() {
        return domain(format!("eps >= 0 violated (eps = {})", config.eps));
    }
    if config.s > 1 {
        return domain("s must be 0 or 1");
    }
    let p = &config.params;
    let nd = config.n_level * config.d;
    let q1c = p.q1 / (p.q1 - 1.0);
    let r = if config.s == 0 { p.q2 } else { p.q2.min(q1c) };
    let j_s = nd as f64 * (r / 2.0 - 1.0).max(0.0);
    let js_floor = j_s.floor() as u64;
    let top = nd as u64 + js_floor;
    let nu_cap = if top >= 16 { NU_CAP_LIMIT } else { ((1u64 << top) + 64).min(NU_CAP_LIMIT) };
    let mut atlas = CoverAtlas {
        config: config.clone(),
        nd,
        j_s,
        nu_cap,
        families: Vec::new(),
        index: HashMap::new(),
    };
    let delta = p.delta();
    let alpha = p.alpha();
    let rho = p.rho();
    let n_level = config.n_level as i64;
    let plan1 = budget_plan(p, StepFamily::F1, Some(atlas.j_star_value() as f64), nd);
    let plan2 = budget_plan(p, StepFamily::F2, None, nd);
    let mut fams: Vec<CoverFamily> = Vec::new();
    let push = |fams: &mut Vec<CoverFamily>, f: CoverFamily| -> Result<()> {
        if fams.len() >= MAX_FAMILIES {
            return Err(Error::Budget(format!("more than {MAX_FAMILIES} families")));
        }
        fams.push(f);
        Ok(())
    };

    for j in 0..=nd {
        if j >= 62 || (1u64 << j) > nu_cap {
            break;
        }
        let base = (j / config.d) as i64 + atlas.c_floor(j) - n_level;
        let l_min = base;
        let l_max = nu_cap as i64 - n_level - (1i64 << j) + (j / config.d) as i64 + atlas.c_floor(j);
        for l in l_min..=l_max {
            let e = atlas.n1_shell(j, l);
            let card = shell_card(e, config.d);
            let k = 1u64 << j;
            let mu = if l < 0 {
                card.and_then(|c| c.checked_mul(k)).unwrap_or(u64::MAX)
            } else {
                atlas.budget(&plan1, j, l)
            };
            push(
                &mut fams,
                CoverFamily {
                    tag: FamilyTag::N1 { j, l },
                    m_dim: card,
                    k_dim: Some(k),
                    log2_weight: -delta * e as f64 - alpha * j as f64 + log2_rho_pow2(&rho, j as f64),
                    mu,
                },
            )?;
        }
    }
    for j in 0..=js_floor {
        let shift = j + nd as u64;
        if shift >= 62 || (1u64 << shift) > nu_cap {
            break;
        }
        let l_max = (nu_cap - (1u64 << shift)) as i64;
        for l in 0..=l_max {
            push(
                &mut fams,
                CoverFamily {
                    tag: FamilyTag::N2 { j: j as u32, l },
                    m_dim: shell_card(l, config.d),
                    k_dim: Some(1u64 << shift),
                    log2_weight: -delta * l as f64 - alpha * shift as f64 + log2_rho_pow2(&rho, shift as f64),
                    mu: atlas.budget(&plan2, j as u32, l),
                },
            )?;
        }
    }
    let deep = j_s + nd as f64;
    let deep_w = -alpha * deep + log2_rho_pow2(&rho, deep);
    push(&mut fams, CoverFamily { tag: FamilyTag::N3, m_dim: None, k_dim: None, log2_weight: deep_w, mu: 0 })?;
    push(
        &mut fams,
        CoverFamily { tag: FamilyTag::N4, m_dim: Some(1), k_dim: Some(1u64 << nd), log2_weight: 0.0, mu: 1u64 << nd },
    )?;
    // N5 anchor: 0 when α ≥ λ(q)/q2, otherwise j0(N).
    let lq = crate::width_formulas::lambda_unchecked(p.q1, p.q2);
    let j5 = if alpha >= lq / p.q2 { 0.0 } else { nd as f64 * (p.q2 / 2.0 - 1.0).max(0.0) };
    for j in 0..js_floor {
        let shift = j + nd as u64;
        let sigma = (config.eps * (j as f64 - j5).abs()).floor() as i64;
        push(
            &mut fams,
            CoverFamily {
                tag: FamilyTag::N5 { j: j as u32 },
                m_dim: Some(1),
                k_dim: 1u64.checked_shl(shift as u32),
                log2_weight: -alpha * shift as f64 + log2_rho_pow2(&rho, shift as f64),
                mu: pow2_floor(nd, sigma),
            },
        )?;
    }
    push(&mut fams, CoverFamily { tag: FamilyTag::N6, m_dim: None, k_dim: None, log2_weight: deep_w, mu: 0 })?;

    atlas.index = fams.iter().enumerate().map(|(i, f)| (f.tag, i)).collect();
    atlas.families = fams;
    Ok(atlas)
}

/// `Σ_{j, l<0} |N¹_{j,l}| / n`, counted exactly.
pub fn rank_budget_ratio(atlas: &CoverAtlas) -> f64 {
    let total: u128 = atlas
        .families
        .iter()
        .filter(|f| matches!(f.tag, FamilyTag::N1 { l, .. } if l < 0))
        .map(|f| f.size().map_or(u128::MAX / 4, u128::from))
        .sum();
    total as f64 / atlas.n() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub checked: u64,
    pub gaps: Vec<IndexPoint>,
}

fn check_point(atlas: &CoverAtlas, pt: IndexPoint, checked: &mut u64, gaps: &mut Vec<IndexPoint>) {
    *checked += 1;
    if atlas.covering_family(pt).is_none() {
        gaps.push(pt);
    }
}

/// Checks that every `(ν, m)` in the domain with `ν ≤ nu_cap` lies in some family.
///
/// Levels `ν ≤ 12` are enumerated over every lattice point when `(2^ν + 1)^d ≤ 2^18`, and over
/// every shell otherwise (membership depends on `m` only through its shell). Deeper levels are
/// drawn at random, together with every level adjacent to a family threshold; each is checked
/// on `m = 0`, the shells next to each threshold and a few random shells.
pub fn verify_cover(atlas: &CoverAtlas, nu_cap: u64, samples: usize, seed: u64) -> CoverReport {
    let nu_cap = nu_cap.min(NU_CAP_LIMIT);
    let d = atlas.config.d;
    let mut checked = 0u64;
    let mut gaps = Vec::new();
    for nu in 0..=nu_cap.min(EXHAUSTIVE_NU) {
        let half = if nu == 0 { 0i64 } else { 1i64 << (nu - 1) };
        let side = (2 * half + 1) as u64;
        if side.pow(d) <= EXHAUSTIVE_POINTS {
            let mut m = vec![-half; d as usize];
            loop {
                check_point(atlas, IndexPoint::from_lattice(nu, &m), &mut checked, &mut gaps);
                let mut a = 0;
                while a < m.len() {
                    m[a] += 1;
                    if m[a] <= half {
                        break;
                    }
                    m[a] = -half;
                    a += 1;
                }
                if a == m.len() {
                    break;
                }
            }
        } else {
            check_point(atlas, IndexPoint { nu, shell: None }, &mut checked, &mut gaps);
            for e in 0..nu {
                check_point(atlas, IndexPoint { nu, shell: Some(e) }, &mut checked, &mut gaps);
            }
        }
    }
    if nu_cap > EXHAUSTIVE_NU {
        let mut rng = keyed(seed, 0, 0);
        let nd = atlas.nd as u64;
        let mut thresholds: Vec<u64> = (0..=(nd + atlas.j_s_floor() + 1).min(40)).map(|k| 1u64 << k).collect();
        thresholds.push(nu_cap);
        let mut levels: Vec<u64> = Vec::new();
        for &t in &thresholds {
            for dv in [-1i64, 0, 1] {
                let v = t as i64 + dv;
                if v > EXHAUSTIVE_NU as i64 && v as u64 <= nu_cap {
                    levels.push(v as u64);
                }
            }
        }
        for _ in 0..samples {
            levels.push(rng.random_range(EXHAUSTIVE_NU + 1..=nu_cap));
        }
        levels.sort_unstable();
        levels.dedup();
        for nu in levels {
            check_point(atlas, IndexPoint { nu, shell: None }, &mut checked, &mut gaps);
            let mut shells: Vec<u64> = vec![0, nu - 1];
            for &t in &thresholds {
                for dt in [-1i64, 0, 1] {
                    let e = nu as i64 - t as i64 + dt;
                    if e >= 0 && (e as u64) < nu {
                        shells.push(e as u64);
                    }
                }
            }
            for _ in 0..4 {
                shells.push(rng.random_range(0..nu));
            }
            shells.sort_unstable();
            shells.dedup();
            for e in shells {
                check_point(atlas, IndexPoint { nu, shell: Some(e) }, &mut checked, &mut gaps);
            }
        }
    }
    CoverReport { checked, gaps }
}

// ---------------------------------------------------------------------------------------
// Step-5 corner selection

/// Which block of the upper-bound sum a layout describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepFamily {
    F1,
    F2,
    SigmaStar,
}

impl fmt::Display for StepFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepFamily::F1 => "F1",
            StepFamily::F2 => "F2",
            StepFamily::SigmaStar => "SIGMA_STAR",
        })
    }
}

/// The exponent case fixed by `λ(p)`, `λ(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step5Case {
    /// `p1 ≤ 2`, `q1 ≤ 2`.
    A,
    /// `λ(p) ≤ λ(q)`, `λ(p) < 1`.
    B,
    /// `λ(p) > λ(q)`, `λ(q) < 1`.
    C,
}

/// A piece of `log2 F / log2 n` in normalised coordinates `x = j / log2 n`, `y = l / log2 n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutPiece<T> {
    pub c: T,
    pub lambda: T,
    pub mu: T,
}

/// Boundaries `φ_s(x) = alphas[s]·x + betas[s]` (ascending), the pieces between them (the
/// last is unbounded above) and the range `x ∈ [0, x_cap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step5Layout<T> {
    pub family: StepFamily,
    pub case: Step5Case,
    pub alphas: Vec<T>,
    pub betas: Vec<T>,
    pub pieces: Vec<LayoutPiece<T>>,
    pub x_cap: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corner<T> {
    pub x: T,
    pub y: T,
    pub exponent: T,
    /// Index of the boundary the corner lies on.
    pub boundary: usize,
    /// Index of the piece used to evaluate it.
    pub piece: usize,
}

fn piece<T>(c: T, lambda: T, mu: T) -> LayoutPiece<T> {
    LayoutPiece { c, lambda, mu }
}

/// The piecewise layout of `F¹`, `F²` or `Σ*` for part-1 parameters.
pub fn step5_layout<T: Scalar>(p: &EmbeddingParams<T>, family: StepFamily) -> Result<Step5Layout<T>> {
    let two = T::int(2);
    if p.p2 < two || p.q2 < two {
        return window("p2 >= 2 and q2 >= 2 violated");
    }
    let zero = T::int(0);
    let one = T::int(1);
    let half = T::ratio(1, 2);
    let d = T::int(p.d as i64);
    let delta = p.delta();
    let alpha = p.alpha();
    let (p1, q1, p2, q2) = (p.p1.clone(), p.q1.clone(), p.p2.clone(), p.q2.clone());
    let lp = p.lambda_p();
    let lq = p.lambda_q();
    let case = if lp == one && lq == one {
        Step5Case::A
    } else if lp <= lq {
        Step5Case::B
    } else {
        Step5Case::C
    };
    let dd = delta.clone() / d.clone();
    let inv = |x: &T| one.clone() / x.clone();
    let x2 = T::max_of(q2.clone() / two.clone() - one.clone(), zero.clone());
    let layout = |alphas: Vec<T>, betas: Vec<T>, pieces: Vec<LayoutPiece<T>>, x_cap: T| Step5Layout {
        family,
        case,
        alphas,
        betas,
        pieces,
        x_cap,
    };
    Ok(match family {
        StepFamily::F1 => {
            let lbar = (
                (one.clone() - p2.clone() / q2.clone()) / d.clone(),
                (p2.clone() / two.clone() - one.clone()) / d.clone(),
            );
            let last = piece(-dd.clone(), -alpha.clone() + dd.clone(), -delta.clone());
            match case {
                Step5Case::A => layout(
                    vec![zero.clone(), lbar.0],
                    vec![zero.clone(), lbar.1],
                    vec![
                        piece(
                            -dd.clone() + inv(&p2) - half.clone(),
                            -alpha.clone() + dd.clone() - inv(&p2) + inv(&q2),
                            -delta.clone() + d.clone() / p2.clone(),
                        ),
                        last,
                    ],
                    one.clone(),
                ),
                Step5Case::B => layout(
                    vec![zero.clone(), (one.clone() - two.clone() / q2.clone()) / d.clone(), lbar.0],
                    vec![zero.clone(), zero.clone(), lbar.1],
                    vec![
                        piece(
                            -dd.clone() - inv(&p1) + inv(&p2),
                            -alpha.clone() + dd.clone() - inv(&p2) + inv(&p1) + lq.clone() / q2.clone()
                                - lq.clone() / two.clone(),
                            -delta.clone() + d.clone() / p2.clone() - d.clone() / p1.clone()
                                + lq.clone() * d.clone() / two.clone(),
                        ),
                        piece(
                            -dd.clone() - lp.clone() / two.clone() + lp.clone() / p2.clone(),
                            -alpha.clone() + dd.clone() - lp.clone() / p2.clone() + lp.clone() / q2.clone(),
                            -delta.clone() + lp.clone() * d.clone() / p2.clone(),
                        ),
                        last,
                    ],
                    one.clone(),
                ),
                Step5Case::C => {
                    let k = (p2.clone() / two.clone() - one.clone()) / d.clone();
                    layout(
                        vec![zero.clone(), -k.clone(), lbar.0],
                        vec![zero.clone(), k, lbar.1],
                        vec![
                            piece(
                                -dd.clone() - lp.clone() / two.clone() + lp.clone() / p2.clone(),
                                -alpha.clone() + dd.clone() + lp.clone() / two.clone() - lp.clone() / p2.clone()
                                    + inv(&q2)
                                    - inv(&q1),
                                -delta.clone() + lp.clone() * d.clone() / p2.clone(),
                            ),
                            piece(
                                -dd.clone() - lq.clone() / two.clone() + lq.clone() / p2.clone(),
                                -alpha.clone() + dd.clone() - lq.clone() / p2.clone() + lq.clone() / q2.clone(),
                                -delta.clone() + lq.clone() * d.clone() / p2.clone(),
                            ),
                            last,
                        ],
                        one.clone(),
                    )
                }
            }
        }
        StepFamily::F2 => {
            let lbar = (-p2.clone() / (q2.clone() * d.clone()), p2.clone() * (half.clone() - inv(&q2)) / d.clone());
            let last = piece(-alpha.clone(), -alpha.clone(), -delta.clone());
            match case {
                Step5Case::A => layout(
                    vec![zero.clone(), lbar.0],
                    vec![zero.clone(), lbar.1],
                    vec![
                        piece(
                            -alpha.clone() + inv(&q2) - half.clone(),
                            -alpha.clone() + inv(&q2),
                            -delta.clone() + d.clone() / p2.clone(),
                        ),
                        last,
                    ],
                    x2,
                ),
                Step5Case::B => layout(
                    vec![zero.clone(), -two.clone() / (q2.clone() * d.clone()), lbar.0],
                    vec![zero.clone(), (one.clone() - two.clone() / q2.clone()) / d.clone(), lbar.1],
                    vec![
                        piece(
                            -alpha.clone() - lq.clone() / two.clone() + lq.clone() / q2.clone(),
                            -alpha.clone() + lq.clone() / q2.clone(),
                            -delta.clone() + d.clone() / p2.clone() - d.clone() / p1.clone()
                                + lq.clone() * d.clone() / two.clone(),
                        ),
                        piece(
                            -alpha.clone() - lp.clone() / two.clone() + lp.clone() / q2.clone(),
                            -alpha.clone() + lp.clone() / q2.clone(),
                            -delta.clone() + lp.clone() * d.clone() / p2.clone(),
                        ),
                        last,
                    ],
                    x2,
                ),
                Step5Case::C => layout(
                    vec![zero.clone(), lbar.0],
                    vec![zero.clone(), lbar.1],
                    vec![
                        piece(
                            -alpha.clone() - inv(&q1) + inv(&q2),
                            -alpha.clone() + lq.clone() / q2.clone(),
                            -delta.clone() + lq.clone() * d.clone() / p2.clone(),
                        ),
                        last,
                    ],
                    x2,
                ),
            }
        }
        StepFamily::SigmaStar => layout(
            vec![zero.clone()],
            vec![zero.clone()],
            vec![piece(
                -alpha.clone() + lq.clone() / q2.clone() - lq.clone() / two.clone(),
                -alpha.clone() + lq.clone() / q2,
                zero.clone(),
            )],
            x2,
        ),
    })
}

impl<T: Scalar> Step5Layout<T> {
    pub fn phi(&self, s: usize, x: &T) -> T {
        self.alphas[s].clone() * x.clone() + self.betas[s].clone()
    }

    /// The highest piece whose lower boundary is at or below `y`.
    pub fn piece_at(&self, x: &T, y: &T) -> usize {
        let mut idx = 0;
        for s in 0..self.alphas.len() {
            if self.phi(s, x) <= y.clone() {
                idx = s;
            }
        }
        idx
    }

    pub fn exponent(&self, s: usize, x: &T, y: &T) -> T {
        let pc = &self.pieces[s];
        pc.c.clone() + pc.lambda.clone() * x.clone() + pc.mu.clone() * y.clone()
    }

    /// `V = {(0, φ_s(0)), (x_cap, φ_s(x_cap))}` with the exponent at each.
    pub fn corners(&self) -> Vec<Corner<T>> {
        let zero = T::int(0);
        let mut xs = vec![zero.clone()];
        if self.x_cap > zero {
            xs.push(self.x_cap.clone());
        }
        let mut out = Vec::new();
        for x in &xs {
            for s in 0..self.alphas.len() {
                let y = self.phi(s, x);
                let piece = self.piece_at(x, &y);
                let exponent = self.exponent(piece, x, &y);
                out.push(Corner { x: x.clone(), y, exponent, boundary: s, piece });
            }
        }
        out
    }

    pub fn to_f64(&self) -> Step5Layout<f64> {
        Step5Layout {
            family: self.family,
            case: self.case,
            alphas: self.alphas.iter().map(Scalar::to_f64).collect(),
            betas: self.betas.iter().map(Scalar::to_f64).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| piece(p.c.to_f64(), p.lambda.to_f64(), p.mu.to_f64()))
                .collect(),
            x_cap: self.x_cap.to_f64(),
        }
    }
}

/// The corner with the largest exponent (the first one in corner order on ties).
pub fn corner_argmax<T: Scalar>(p: &EmbeddingParams<T>, family: StepFamily) -> Result<Corner<T>> {
    p.validate()?;
    let layout = step5_layout(p, family)?;
    let mut best: Option<Corner<T>> = None;
    for c in layout.corners() {
        best = match best {
            Some(b) if !(c.exponent > b.exponent) => Some(b),
            _ => Some(c),
        };
    }
    Ok(best.expect("a layout always has a corner"))
}

/// The largest corner exponent over `F¹`, `F²` and `Σ*`.
pub fn max_corner_exponent<T: Scalar>(p: &EmbeddingParams<T>) -> Result<T> {
    let mut best: Option<T> = None;
    for fam in [StepFamily::F1, StepFamily::F2, StepFamily::SigmaStar] {
        let e = corner_argmax(p, fam)?.exponent;
        best = Some(match best {
            Some(b) => T::max_of(b, e),
            None => e,
        });
    }
    Ok(best.expect("three families"))
}

// ---------------------------------------------------------------------------------------
// Piecewise-affine summation

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePiece {
    pub lambda: f64,
    pub mu: f64,
    /// `ν_{s,n} = nu · log2 n`.
    pub nu: f64,
}

/// `ψ_n(j, l) = λ_s j + μ_s l + ν_s log2 n` on `φ_s(j) ≤ l < φ_{s+1}(j)`, `0 ≤ j ≤ x_cap log2 n`,
/// with `φ_s(j) = alphas[s] j + betas[s] log2 n`. The anchor is `(j*, l*) = anchor · log2 n`
/// and `Ñ_n = [n_tilde_coef · log2 n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffineSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub pieces: Vec<AffinePiece>,
    pub x_cap: f64,
    pub anchor: (f64, f64),
    pub n_tilde_coef: f64,
}

/// Per-piece coefficient shifts `(Δλ_s, Δμ_s)` defining `ψ̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub d_lambda: Vec<f64>,
    pub d_mu: Vec<f64>,
}

const SPEC_TOL: f64 = 1e-9;

impl PiecewiseAffineSpec {
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    fn phi_hat(&self, s: usize, x: f64) -> f64 {
        self.alphas[s] * x + self.betas[s]
    }

    fn upper_hat(&self, s: usize, x: f64) -> f64 {
        if s + 1 < self.len() {
            self.phi_hat(s + 1, x)
        } else {
            f64::INFINITY
        }
    }

    fn psi_hat(&self, s: usize, x: f64, y: f64) -> f64 {
        let p = &self.pieces[s];
        p.lambda * x + p.mu * y + p.nu
    }

    fn piece_at(&self, x: f64, y: f64) -> usize {
        let mut idx = 0;
        for s in 0..self.len() {
            if self.phi_hat(s, x) <= y + SPEC_TOL {
                idx = s;
            }
        }
        idx
    }

    pub fn n_tilde(&self, n: u64) -> u64 {
        (self.n_tilde_coef * (n as f64).log2()).round().max(0.0) as u64
    }

    /// Checks ordering, continuity, the anchor value and `μ_m < 0`.
    pub fn validate(&self) -> Result<()> {
        let m = self.len();
        if m == 0 || self.alphas.len() != m || self.betas.len() != m {
            return domain("spec needs one boundary per piece");
        }
        if !(self.x_cap >= 0.0) {
            return domain("x_cap >= 0 violated");
        }
        if !(self.pieces[m - 1].mu < 0.0) {
            return domain("mu_m < 0 violated");
        }
        for x in [0.0, self.x_cap] {
            for s in 1..m {
                if self.phi_hat(s - 1, x) > self.phi_hat(s, x) + SPEC_TOL {
                    return domain(format!("boundary ordering phi_{s} <= phi_{} violated", s + 1));
                }
                let y = self.phi_hat(s, x);
                if (self.psi_hat(s - 1, x, y) - self.psi_hat(s, x, y)).abs() > SPEC_TOL {
                    return domain(format!("psi is discontinuous across boundary {}", s + 1));
                }
            }
        }
        let (ax, ay) = self.anchor;
        if ay < self.phi_hat(0, ax) - SPEC_TOL {
            return domain("anchor lies below the region");
        }
        if self.psi_hat(self.piece_at(ax, ay), ax, ay).abs() > SPEC_TOL {
            return domain("psi(anchor) = 0 violated");
        }
        Ok(())
    }

    fn corner_points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for x in [0.0, self.x_cap] {
            for s in 0..self.len() {
                out.push((x, self.phi_hat(s, x)));
            }
        }
        out
    }

    /// `γ`: the smallest gap `−ψ / log2 n` over corners other than the anchor.
    pub fn gamma(&self) -> f64 {
        let (ax, ay) = self.anchor;
        self.corner_points()
            .into_iter()
            .filter(|&(x, y)| (x - ax).abs() > SPEC_TOL || (y - ay).abs() > SPEC_TOL)
            .map(|(x, y)| -self.psi_hat(self.piece_at(x, y), x, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// `c` with `N_n ≤ c log2 n` and `|φ_s| ≤ c log2 n`.
    pub fn c_bound(&self) -> f64 {
        self.corner_points().into_iter().map(|(_, y)| y.abs()).fold(self.x_cap, f64::max).max(1e-12)
    }

    /// The admissible radius `ε₀` of the summation bound, term by term.
    pub fn est_eps(&self) -> Result<f64> {
        self.validate()?;
        let gamma = self.gamma();
        if !(gamma > 0.0) {
            return domain("the anchor is not the strict maximum over the corners");
        }
        let c = self.c_bound();
        let m = self.len();
        let mut eps = (self.pieces[m - 1].mu.abs() / 2.0).min(gamma / (4.0 * (c + 1.0)));
        let (ax, ay) = self.anchor;
        let set: Vec<usize> = (0..m).filter(|&s| (self.phi_hat(s, ax) - ay).abs() <= SPEC_TOL).collect();
        if let (Some(&sm), Some(&sp)) = (set.first(), set.last()) {
            let a = set.iter().map(|&s| self.alphas[s].abs()).fold(0.0, f64::max);
            let t = |s: usize| -> usize {
                if s == sp {
                    sp
                } else if s + 1 == sm {
                    sm
                } else if self.pieces[s].mu <= 0.0 {
                    s
                } else {
                    s + 1
                }
            };
            let start = if sm >= 1 { sm - 1 } else { sm };
            for s in start..=sp {
                let p = &self.pieces[s];
                eps = eps.min(p.mu.abs() / 2.0);
                eps = eps.min((p.lambda + p.mu * self.alphas[t(s)]).abs() / (8.0 * (a + 1.0)));
            }
        }
        Ok(eps)
    }

    /// Perturbed coefficients `(λ̃_s, μ̃_s, ν̃_s)`; each `ν̃_s` keeps `ψ̃_s = ψ_s` at the point of
    /// piece `s` nearest to the anchor on the line `j = j*`.
    fn perturbed(&self, pert: Option<&Perturbation>) -> Vec<(f64, f64, f64)> {
        let (ax, ay) = self.anchor;
        (0..self.len())
            .map(|s| {
                let p = &self.pieces[s];
                let Some(pt) = pert else { return (p.lambda, p.mu, p.nu) };
                let (lt, mt) = (p.lambda + pt.d_lambda[s], p.mu + pt.d_mu[s]);
                let ry = ay.clamp(self.phi_hat(s, ax), self.upper_hat(s, ax).max(self.phi_hat(s, ax)));
                (lt, mt, self.psi_hat(s, ax, ry) - lt * ax - mt * ry)
            })
            .collect()
    }

    /// `max |ψ − ψ̃| / log2 n` over the bounded part `φ_1 ≤ l ≤ φ_m` of the region.
    pub fn perturbation_size(&self, pert: &Perturbation) -> f64 {
        let tilde = self.perturbed(Some(pert));
        let mut worst = 0.0f64;
        for s in 0..self.len() {
            for x in [0.0, self.x_cap] {
                let lo = self.phi_hat(s, x);
                let hi = if s + 1 < self.len() { self.phi_hat(s + 1, x) } else { lo };
                for y in [lo, hi] {
                    let (lt, mt, nt) = tilde[s];
                    worst = worst.max((self.psi_hat(s, x, y) - (lt * x + mt * y + nt)).abs());
                }
            }
        }
        worst
    }
}

/// Uniform shifts in `[−ε₀/2, ε₀/2]`, scaled down if needed so that `|ψ − ψ̃| < ε₀ log2 n`
/// on the bounded part of the region.
pub fn perturb(spec: &PiecewiseAffineSpec, eps0: f64, seed: u64, draw: u64) -> Perturbation {
    let mut rng = keyed(seed, draw, 0);
    let m = spec.len();
    let mut pert = Perturbation {
        d_lambda: (0..m).map(|_| rng.random_range(-0.5..=0.5) * eps0).collect(),
        d_mu: (0..m).map(|_| rng.random_range(-0.5..=0.5) * eps0).collect(),
    };
    let size = spec.perturbation_size(&pert);
    if size >= 0.9 * eps0 && size > 0.0 {
        let k = 0.9 * eps0 / size;
        pert.d_lambda.iter_mut().for_each(|v| *v *= k);
        pert.d_mu.iter_mut().for_each(|v| *v *= k);
    }
    pert
}

/// `Σ_{(j,l) ∈ Z² ∩ Eⁿ} 2^{ψ̃_n(j,l)} ρ(2^{j+Ñ})`, with the unbounded top piece summed in
/// closed form.
pub fn osn_sum(
    spec: &PiecewiseAffineSpec,
    rho: &RhoSpec,
    n: u64,
    n_tilde: u64,
    pert: Option<&Perturbation>,
) -> Result<f64> {
    spec.validate()?;
    if n < 2 {
        return domain("n >= 2 violated");
    }
    if let Some(p) = pert {
        if p.d_lambda.len() != spec.len() || p.d_mu.len() != spec.len() {
            return domain("perturbation must have one shift per piece");
        }
    }
    let coeffs = spec.perturbed(pert);
    let m = spec.len();
    if !(coeffs[m - 1].1 < 0.0) {
        return domain("perturbed mu_m < 0 violated");
    }
    let big_l = (n as f64).log2();
    let j_max = (spec.x_cap * big_l + SPEC_TOL).floor() as i64;
    let first_lattice = |v: f64| (v - SPEC_TOL).ceil() as i64;
    let mut total = 0.0;
    for j in 0..=j_max {
        let jf = j as f64;
        let w = rho.eval(((j as u64 + n_tilde) as f64).exp2());
        let mut col = 0.0;
        for (s, &(lt, mt, nt)) in coeffs.iter().enumerate() {
            let lo = first_lattice(spec.alphas[s] * jf + spec.betas[s] * big_l);
            let base = lt * jf + nt * big_l;
            if s + 1 < m {
                let hi = first_lattice(spec.alphas[s + 1] * jf + spec.betas[s + 1] * big_l);
                for l in lo..hi {
                    col += (base + mt * l as f64).exp2();
                }
            } else {
                col += (base + mt * lo as f64).exp2() / (1.0 - mt.exp2());
            }
        }
        total += col * w;
    }
    Ok(total)
}

/// `osn_sum / ρ(2^{j* + Ñ})`.
pub fn osn_ratio(spec: &PiecewiseAffineSpec, rho: &RhoSpec, n: u64, pert: Option<&Perturbation>) -> Result<f64> {
    let nt = spec.n_tilde(n);
    let js = (spec.anchor.0 * (n as f64).log2()).round() as u64;
    Ok(osn_sum(spec, rho, n, nt, pert)? / rho.eval(((js + nt) as f64).exp2()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsnCheck {
    pub ratios: Vec<(u64, f64)>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Least-squares slope of `ln r(n)` against `ln ln n`.
    pub trend_slope: f64,
}

pub fn osn_bound_check(
    spec: &PiecewiseAffineSpec,
    rho: &RhoSpec,
    n_grid: &[u64],
    pert: Option<&Perturbation>,
) -> Result<OsnCheck> {
    spec.validate()?;
    let ratios: Vec<(u64, f64)> = n_grid
        .par_iter()
        .map(|&n| osn_ratio(spec, rho, n, pert).map(|r| (n, r)))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = ratios.iter().map(|&(n, _)| (n as f64).ln().ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|&(_, r)| r.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let trend_slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(OsnCheck {
        max_ratio: ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
        min_ratio: ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        ratios,
        trend_slope,
    })
}

/// `ψ = log2 F − max corner`, anchored at the maximising corner. `Ñ = 0` for `F¹` (weights
/// `ρ(2^j)`) and `Ñ = log2 n` for `F²` (weights `ρ(2^j n)`).
pub fn step5_spec(p: &EmbeddingParams<f64>, family: StepFamily) -> Result<PiecewiseAffineSpec> {
    if family == StepFamily::SigmaStar {
        return domain("the SIGMA_STAR block has no l-direction and is not a two-dimensional spec");
    }
    let layout = step5_layout(p, family)?;
    let best = corner_argmax::<f64>(p, family)?;
    let spec = PiecewiseAffineSpec {
        alphas: layout.alphas.clone(),
        betas: layout.betas.clone(),
        pieces: layout
            .pieces
            .iter()
            .map(|pc| AffinePiece { lambda: pc.lambda, mu: pc.mu, nu: pc.c - best.exponent })
            .collect(),
        x_cap: layout.x_cap,
        anchor: (best.x, best.y),
        n_tilde_coef: if family == StepFamily::F1 { 0.0 } else { 1.0 },
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step5Instance {
    pub name: &'static str,
    pub spec: PiecewiseAffineSpec,
    pub rho: RhoSpec,
}

/// The shipped instances: `F¹` for `α = 3` and `α = 1/10`, `F²` for `α = 3`, and `F¹` for
/// `α = 3` with `ρ(y) = ln(e + y)`.
pub fn shipped_step5_instances() -> Vec<Step5Instance> {
    let a3 = EmbeddingParams::<f64>::reference(2.0, 1.0);
    let a01 = EmbeddingParams::<f64>::reference(0.05, 0.05);
    let f1_a3 = step5_spec(&a3, StepFamily::F1).expect("reference F1 spec");
    vec![
        Step5Instance { name: "F1 alpha=3", spec: f1_a3.clone(), rho: RhoSpec::ONE },
        Step5Instance {
            name: "F1 alpha=0.1",
            spec: step5_spec(&a01, StepFamily::F1).expect("reference F1 spec"),
            rho: RhoSpec::ONE,
        },
        Step5Instance {
            name: "F2 alpha=3",
            spec: step5_spec(&a3, StepFamily::F2).expect("reference F2 spec"),
            rho: RhoSpec::ONE,
        },
        Step5Instance { name: "F1 alpha=3 rho=ln", spec: f1_a3, rho: RhoSpec { c1: 1.0, c2: 0.0 } },
    ]
}
