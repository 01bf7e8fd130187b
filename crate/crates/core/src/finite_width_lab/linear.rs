use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::kolmogorov::support;
use super::{check_pair, Method, NormShape, SearchConfig, Subspace, WidthEstimate, WidthKind};
use crate::error::Result;
use crate::mixed_norm_core::{norm_gradient, SpaceSpec};
use crate::rng::keyed;

#[derive(Debug, Clone)]
struct OpPoint {
    x: Vec<f64>,
    value: f64,
    /// Unit functional attaining `‖(I − UVᵀ)x‖_dst`.
    g: Vec<f64>,
    /// Relative fixed-point gap `(‖Tᵀg‖_src* − value) / value`.
    gap: f64,
}

#[derive(Clone, Copy)]
struct Problem<'a> {
    src: NormShape,
    dst: NormShape,
    ambient: usize,
    k: usize,
    cfg: &'a SearchConfig,
}

fn apply(u: &DMatrix<f64>, v: &DMatrix<f64>, x: &[f64]) -> DVector<f64> {
    let xv = DVector::from_column_slice(x);
    if u.ncols() == 0 {
        return xv;
    }
    let t = v.tr_mul(&xv);
    xv - u * t
}

fn apply_t(u: &DMatrix<f64>, v: &DMatrix<f64>, g: &[f64]) -> DVector<f64> {
    let gv = DVector::from_column_slice(g);
    if u.ncols() == 0 {
        return gv;
    }
    let t = u.tr_mul(&gv);
    gv - v * t
}

fn evaluate(prob: &Problem, u: &DMatrix<f64>, v: &DMatrix<f64>, x: Vec<f64>) -> OpPoint {
    let y = apply(u, v, &x);
    let mut g = vec![0.0; x.len()];
    let value = norm_gradient(y.as_slice(), prob.dst.m, prob.dst.p, prob.dst.q, &mut g);
    let h = apply_t(u, v, &g);
    let hn = prob.src.dual_norm(h.as_slice());
    let gap = if value > 0.0 { ((hn - value) / value).max(0.0) } else { 0.0 };
    OpPoint { x, value, g, gap }
}

/// Power-type ascent for `sup_{‖x‖_src ≤ 1} ‖Tx‖_dst`: `x ← argmax ⟨Tᵀg, x⟩`; monotone.
fn ascend(prob: &Problem, u: &DMatrix<f64>, v: &DMatrix<f64>, x0: &[f64]) -> Option<OpPoint> {
    let nx = prob.src.norm(x0);
    if nx == 0.0 || !nx.is_finite() {
        return None;
    }
    let mut cur = evaluate(prob, u, v, x0.iter().map(|a| a / nx).collect());
    for _ in 0..prob.cfg.ascent_iterations {
        if cur.value == 0.0 {
            break;
        }
        let h = apply_t(u, v, &cur.g);
        let xn = support(h.as_slice(), prob.src);
        let next = evaluate(prob, u, v, xn);
        if next.value <= cur.value * (1.0 + 1e-13) {
            break;
        }
        cur = next;
    }
    Some(cur)
}

fn same_up_to_sign(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-7) || a.iter().zip(b).all(|(x, y)| (x + y).abs() < 1e-7)
}

fn refresh(prob: &Problem, u: &DMatrix<f64>, v: &DMatrix<f64>, current: &[OpPoint], rng: &mut impl Rng, full: bool) -> Vec<OpPoint> {
    let mut starts: Vec<Vec<f64>> = current.iter().map(|p| p.x.clone()).collect();
    if full && prob.cfg.unit_starts {
        for i in 0..prob.ambient {
            let mut e = vec![0.0; prob.ambient];
            e[i] = 1.0;
            starts.push(e);
        }
    }
    for _ in 0..prob.cfg.vertex_starts {
        let m = prob.src.m;
        let mut x = vec![0.0; prob.ambient];
        let rows: Vec<bool> = (0..m).map(|_| rng.random::<bool>()).collect();
        for j in 0..prob.k {
            if rng.random::<bool>() {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                for i in 0..m {
                    if rows[i] {
                        x[j * m + i] = s;
                    }
                }
            }
        }
        starts.push(x);
    }
    for _ in 0..prob.cfg.random_starts {
        starts.push((0..prob.ambient).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
    }
    let mut pts: Vec<OpPoint> = starts.iter().filter_map(|s| ascend(prob, u, v, s)).collect();
    pts.sort_by(|a, b| b.value.total_cmp(&a.value));
    let mut out: Vec<OpPoint> = Vec::new();
    for p in pts {
        if out.len() >= prob.cfg.working_set {
            break;
        }
        if !out.iter().any(|q| same_up_to_sign(&q.x, &p.x)) {
            out.push(p);
        }
    }
    out
}

fn soft_max(ds: &[f64], t: f64) -> (f64, Vec<f64>) {
    let dmax = ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ex: Vec<f64> = ds.iter().map(|d| (t * (d - dmax)).exp()).collect();
    let s: f64 = ex.iter().sum();
    (dmax + s.ln() / t, ex.iter().map(|e| e / s).collect())
}

fn max_value(pts: &[OpPoint]) -> f64 {
    pts.iter().map(|p| p.value).fold(0.0, f64::max)
}

/// `U ← Q`, `V ← V Rᵀ` from `U = QR`: same operator, orthonormal left factor.
fn rebalance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = u.clone().qr();
    let r = qr.r();
    (qr.q(), v * r.transpose())
}

struct RestartResult {
    value: f64,
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    points: Vec<OpPoint>,
}

fn run_restart(prob: &Problem, n: usize, restart: usize) -> RestartResult {
    let cfg = prob.cfg;
    let mut init_rng = keyed(cfg.seed, restart as u64, 0);
    let q0 = match restart {
        0 => Subspace::coordinate(prob.ambient, n),
        1 => Subspace::balanced(prob.ambient, n),
        _ => Subspace::random(prob.ambient, n, &mut init_rng),
    };
    let mut u = q0.basis().clone();
    let mut v = u.clone();
    let mut rng = keyed(cfg.seed, restart as u64, 1);
    let mut pts = refresh(prob, &u, &v, &[], &mut rng, true);
    if n == 0 || pts.is_empty() {
        return RestartResult { value: max_value(&pts), u, v, points: pts };
    }
    // Only values measured right after a full refresh count: between refreshes the working set
    // underestimates the operator norm.
    let mut best = (max_value(&pts), u.clone(), v.clone());
    let mut eta = 0.2;
    let iters = cfg.outer_iterations.max(1);
    for it in 0..cfg.outer_iterations {
        if it > 0 && cfg.refresh_every > 0 && it % cfg.refresh_every == 0 {
            let mut r2 = keyed(cfg.seed, restart as u64, 2 + it as u64);
            pts = refresh(prob, &u, &v, &pts, &mut r2, true);
            let now = max_value(&pts);
            if now < best.0 {
                best = (now, u.clone(), v.clone());
            }
        }
        let frac = if iters > 1 { it as f64 / (iters - 1) as f64 } else { 1.0 };
        let tau = cfg.temperature_start * (cfg.temperature_end / cfg.temperature_start).powf(frac);
        let ds: Vec<f64> = pts.iter().map(|p| p.value).collect();
        let dref = ds.iter().cloned().fold(0.0, f64::max);
        if dref <= 0.0 {
            break;
        }
        let t = tau / dref;
        let (sval, w) = soft_max(&ds, t);
        // d‖(I − UVᵀ)x‖: −g (Vᵀx)ᵀ in U and −x (Uᵀg)ᵀ in V.
        let mut gu = DMatrix::zeros(prob.ambient, n);
        let mut gv = DMatrix::zeros(prob.ambient, n);
        for (p, wi) in pts.iter().zip(&w) {
            if *wi < 1e-16 {
                continue;
            }
            let x = DVector::from_column_slice(&p.x);
            let g = DVector::from_column_slice(&p.g);
            gu.ger(-wi, &g, &v.tr_mul(&x), 1.0);
            gv.ger(-wi, &x, &u.tr_mul(&g), 1.0);
        }
        let gn = (gu.norm_squared() + gv.norm_squared()).sqrt();
        if gn < 1e-14 {
            break;
        }
        let mut accepted = false;
        for _ in 0..10 {
            let un = &u - &gu * (eta / gn);
            let vn = &v - &gv * (eta / gn);
            let np: Vec<OpPoint> = pts.iter().map(|p| evaluate(prob, &un, &vn, p.x.clone())).collect();
            let nds: Vec<f64> = np.iter().map(|p| p.value).collect();
            let (nval, _) = soft_max(&nds, t);
            if nval < sval - 1e-4 * eta * gn {
                let (ru, rv) = rebalance(&un, &vn);
                u = ru;
                v = rv;
                pts = np;
                eta = (eta * 1.5).min(1.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted && eta < 1e-10 {
            break;
        }
        if !accepted {
            eta = eta.max(1e-6);
        }
    }
    let mut rf = keyed(cfg.seed, restart as u64, u64::MAX >> 33);
    let end = refresh(prob, &u, &v, &pts, &mut rf, true);
    if max_value(&end) < best.0 {
        return RestartResult { value: max_value(&end), u, v, points: end };
    }
    let (_, u, v) = best;
    let pts: Vec<OpPoint> = end.iter().map(|p| evaluate(prob, &u, &v, p.x.clone())).collect();
    let mut rf = keyed(cfg.seed, restart as u64, (u64::MAX >> 33) + 1);
    let pts = refresh(prob, &u, &v, &pts, &mut rf, true);
    RestartResult { value: max_value(&pts), u, v, points: pts }
}

fn shape(spec: &SpaceSpec) -> NormShape {
    NormShape { m: spec.m, p: spec.p.value(), q: spec.q.value() }
}

/// `λ_n(B_src, dst)`: best rank-`n` operator `A = UVᵀ` for `sup_x ‖x − Ax‖_dst`.
///
/// When both spaces are Euclidean the search is skipped: truncating the identity's singular
/// values gives `1` for `n < mk`.
pub fn linear_width_estimate(src: &SpaceSpec, dst: &SpaceSpec, n: usize, cfg: &SearchConfig) -> Result<WidthEstimate> {
    check_pair(src, dst)?;
    let ambient = src.dim();
    if n >= ambient {
        let mut e = WidthEstimate::trivial(WidthKind::Linear, Method::OperatorDescent, n, 0.0, src.m, src.k, cfg.seed);
        let id = DMatrix::identity(ambient, ambient);
        e.operator = Some((id.clone(), id));
        return Ok(e);
    }
    let euclid = [src.p, src.q, dst.p, dst.q].iter().all(|e| e.value() == 2.0);
    if euclid {
        let mut e = WidthEstimate::trivial(WidthKind::Linear, Method::OperatorDescent, n, 1.0, src.m, src.k, cfg.seed);
        let u = Subspace::coordinate(ambient, n).basis().clone();
        let mut worst = vec![0.0; ambient];
        worst[n] = 1.0;
        e.operator = Some((u.clone(), u));
        e.worst_points = vec![worst];
        return Ok(e);
    }
    let prob = Problem { src: shape(src), dst: shape(dst), ambient, k: src.k, cfg };
    let restarts = if n == 0 { 1 } else { cfg.restarts.max(1) };
    let results: Vec<RestartResult> = (0..restarts).into_par_iter().map(|r| run_restart(&prob, n, r)).collect();
    let mut best_idx = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best_idx].value {
            best_idx = i;
        }
    }
    let best = results.into_iter().nth(best_idx).expect("at least one restart");
    let residual = best.points.iter().map(|p| p.gap).fold(0.0, f64::max);
    Ok(WidthEstimate {
        kind: WidthKind::Linear,
        value: best.value,
        n,
        method: Method::OperatorDescent,
        restarts,
        seed: cfg.seed,
        worst_point_residual: residual,
        subspace: None,
        operator: Some((best.u, best.v)),
        worst_points: best.points.into_iter().map(|p| p.x).collect(),
        m: src.m,
        k: src.k,
    })
}

/// Max over the stored worst points of `‖x − UVᵀx‖_dst`.
pub fn reevaluate_linear(est: &WidthEstimate, dst: &SpaceSpec) -> f64 {
    let Some((u, v)) = &est.operator else {
        return est.value;
    };
    let sh = shape(dst);
    est.worst_points.iter().map(|x| sh.norm(apply(u, v, x).as_slice())).fold(0.0, f64::max)
}

/// `|λ̂_n(primal) − λ̂_n(dual)| / max` where the dual problem maps
/// `(p1, q1) → (p2, q2)` to `(p2', q2') → (p1', q1')`.
pub fn duality_gap(src: &SpaceSpec, dst: &SpaceSpec, n: usize, cfg: &SearchConfig) -> Result<f64> {
    check_pair(src, dst)?;
    let a = linear_width_estimate(src, dst, n, cfg)?.value;
    let dual_src = dst.dual();
    let dual_dst = src.dual();
    let b = linear_width_estimate(&dual_src, &dual_dst, n, cfg)?.value;
    let top = a.max(b);
    if top == 0.0 {
        return Ok(0.0);
    }
    Ok((a - b).abs() / top)
}
