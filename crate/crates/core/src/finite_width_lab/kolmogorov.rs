use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::projection::Projection;
use super::subspace::orthonormalize;
use super::{check_pair, project, Method, NormShape, SearchConfig, Subspace, WidthEstimate, WidthKind};
use crate::error::{domain, Result};
use crate::mixed_norm_core::{support_point, MixedVector, SpaceSpec};
use crate::rng::keyed;

const NEWTON_CAP: usize = 100;

#[derive(Debug, Clone)]
pub(crate) struct Point {
    pub x: Vec<f64>,
    pub proj: Projection,
}

/// What the sup ranges over: the source unit ball (searched by ascent) or a fixed list.
#[derive(Clone, Copy)]
enum Target<'a> {
    Ball(NormShape),
    Points(&'a [Vec<f64>]),
}

#[derive(Clone, Copy)]
struct Problem<'a> {
    target: Target<'a>,
    dst: NormShape,
    ambient: usize,
    k: usize,
    cfg: &'a SearchConfig,
}

pub(crate) fn support(f: &[f64], src: NormShape) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    support_point(f, src.m, src.p, src.q, &mut out);
    out
}

/// Worst-point ascent: `x ← argmax_{‖x‖_src ≤ 1} ⟨f, x⟩` with `f` the unit functional
/// certifying the distance of the current `x`. Each step cannot decrease the distance.
fn ascend(prob: &Problem, src: NormShape, basis: &DMatrix<f64>, x0: &[f64]) -> Option<Point> {
    let nx = src.norm(x0);
    if nx == 0.0 || !nx.is_finite() {
        return None;
    }
    let mut x: Vec<f64> = x0.iter().map(|v| v / nx).collect();
    let mut proj = project(&x, basis, prob.dst, None, prob.cfg.tolerance, NEWTON_CAP);
    for _ in 0..prob.cfg.ascent_iterations {
        if proj.distance == 0.0 {
            break;
        }
        let xn = support(&proj.dual, src);
        if xn.iter().all(|v| *v == 0.0) {
            break;
        }
        let pn = project(&xn, basis, prob.dst, Some(&proj.coeffs), prob.cfg.tolerance, NEWTON_CAP);
        if pn.distance <= proj.distance * (1.0 + 1e-12) {
            break;
        }
        x = xn;
        proj = pn;
    }
    Some(Point { x, proj })
}

fn random_vertex(m: usize, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let r = rng.random_range(1..=m);
    let l = rng.random_range(1..=k);
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..k).collect();
    for i in 0..r {
        let s = rng.random_range(i..m);
        rows.swap(i, s);
    }
    for j in 0..l {
        let s = rng.random_range(j..k);
        cols.swap(j, s);
    }
    let mut v = vec![0.0; m * k];
    let eps: Vec<f64> = (0..r).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    for (b, &j) in cols[..l].iter().enumerate() {
        let eta = if b == 0 || rng.random::<bool>() { 1.0 } else { -1.0 };
        for (a, &i) in rows[..r].iter().enumerate() {
            v[j * m + i] = eps[a] * eta;
        }
    }
    v
}

fn same_up_to_sign(a: &[f64], b: &[f64]) -> bool {
    let plus = a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-7);
    plus || a.iter().zip(b).all(|(x, y)| (x + y).abs() < 1e-7)
}

/// Sorts by distance (descending), drops duplicates up to sign and truncates.
fn select(mut pts: Vec<Point>, keep: usize) -> Vec<Point> {
    pts.sort_by(|a, b| b.proj.distance.total_cmp(&a.proj.distance));
    let mut out: Vec<Point> = Vec::with_capacity(keep);
    for p in pts {
        if out.len() >= keep {
            break;
        }
        if !out.iter().any(|q| same_up_to_sign(&q.x, &p.x)) {
            out.push(p);
        }
    }
    out
}

/// Rebuilds the working set at `basis`: re-ascends the current points and adds fresh starts.
fn refresh(prob: &Problem, basis: &DMatrix<f64>, current: &[Point], rng: &mut impl Rng, full: bool) -> Vec<Point> {
    match prob.target {
        Target::Points(list) => list
            .iter()
            .map(|x| Point { x: x.clone(), proj: project(x, basis, prob.dst, None, prob.cfg.tolerance, NEWTON_CAP) })
            .collect(),
        Target::Ball(src) => {
            let m = prob.dst.m;
            let mut starts: Vec<Vec<f64>> = current.iter().map(|p| p.x.clone()).collect();
            if full && prob.cfg.unit_starts {
                for i in 0..prob.ambient {
                    let mut e = vec![0.0; prob.ambient];
                    e[i] = 1.0;
                    starts.push(e);
                }
            }
            for _ in 0..prob.cfg.vertex_starts {
                starts.push(random_vertex(m, prob.k, rng));
            }
            for _ in 0..prob.cfg.random_starts {
                starts.push((0..prob.ambient).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
            }
            let pts: Vec<Point> = starts.iter().filter_map(|s| ascend(prob, src, basis, s)).collect();
            select(pts, prob.cfg.working_set)
        }
    }
}

fn reproject(prob: &Problem, basis: &DMatrix<f64>, pts: &[Point]) -> Vec<Point> {
    pts.iter()
        .map(|p| Point {
            x: p.x.clone(),
            proj: project(&p.x, basis, prob.dst, Some(&p.proj.coeffs), prob.cfg.tolerance, NEWTON_CAP),
        })
        .collect()
}

/// `(1/t) log Σ exp(t d_i)` and the softmax weights.
fn soft_max(ds: &[f64], t: f64) -> (f64, Vec<f64>) {
    let dmax = ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ex: Vec<f64> = ds.iter().map(|d| (t * (d - dmax)).exp()).collect();
    let s: f64 = ex.iter().sum();
    (dmax + s.ln() / t, ex.iter().map(|e| e / s).collect())
}

fn max_distance(pts: &[Point]) -> f64 {
    pts.iter().map(|p| p.proj.distance).fold(0.0, f64::max)
}

struct RestartResult {
    value: f64,
    basis: DMatrix<f64>,
    points: Vec<Point>,
}

fn run_restart(prob: &Problem, n: usize, restart: usize, warm: Option<&Subspace>) -> RestartResult {
    let cfg = prob.cfg;
    let mut init_rng = keyed(cfg.seed, restart as u64, 0);
    let warm_offset = usize::from(warm.is_some());
    let mut q = match (restart, warm) {
        (0, Some(w)) => {
            let mut s = w.clone();
            while s.dim() < n {
                s = s.extended(&mut init_rng);
            }
            s.basis().columns(0, n).into_owned()
        }
        (r, _) if r == warm_offset => Subspace::coordinate(prob.ambient, n).basis().clone(),
        (r, _) if r == warm_offset + 1 => Subspace::balanced(prob.ambient, n).basis().clone(),
        _ => Subspace::random(prob.ambient, n, &mut init_rng).basis().clone(),
    };
    let mut rng = keyed(cfg.seed, restart as u64, 1);
    let mut pts = refresh(prob, &q, &[], &mut rng, true);
    if n == 0 || pts.is_empty() {
        let value = max_distance(&pts);
        return RestartResult { value, basis: q, points: pts };
    }

    let q_init = q.clone();
    let mut best = (max_distance(&pts), q.clone());
    let mut eta = 0.2;
    let iters = cfg.outer_iterations.max(1);
    for it in 0..cfg.outer_iterations {
        if it > 0 && cfg.refresh_every > 0 && it % cfg.refresh_every == 0 {
            let mut r2 = keyed(cfg.seed, restart as u64, 2 + it as u64);
            pts = refresh(prob, &q, &pts, &mut r2, false);
        }
        let frac = if iters > 1 { it as f64 / (iters - 1) as f64 } else { 1.0 };
        let tau = cfg.temperature_start * (cfg.temperature_end / cfg.temperature_start).powf(frac);
        let ds: Vec<f64> = pts.iter().map(|p| p.proj.distance).collect();
        let dref = ds.iter().cloned().fold(0.0, f64::max);
        if dref <= 0.0 {
            break;
        }
        if dref < best.0 {
            best = (dref, q.clone());
        }
        let t = tau / dref;
        let (sval, w) = soft_max(&ds, t);
        // Envelope gradient of the distances in the basis: −Σ w_i f_i c_iᵀ.
        let mut g = DMatrix::zeros(prob.ambient, n);
        for (p, wi) in pts.iter().zip(&w) {
            if *wi < 1e-16 {
                continue;
            }
            let f = DVector::from_column_slice(&p.proj.dual);
            let c = DVector::from_column_slice(&p.proj.coeffs);
            g.ger(-wi, &f, &c, 1.0);
        }
        let gh = &g - &q * q.tr_mul(&g);
        let gn = gh.norm();
        if gn < 1e-14 {
            break;
        }
        let dir = gh / gn;
        let mut accepted = false;
        for _ in 0..10 {
            let qn = orthonormalize(&q - &dir * eta);
            let np = reproject(prob, &qn, &pts);
            let nds: Vec<f64> = np.iter().map(|p| p.proj.distance).collect();
            let (nval, _) = soft_max(&nds, t);
            if nval < sval - 1e-4 * eta * gn {
                q = qn;
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
    // The working set can miss the true worst point of a subspace, so the starting, the
    // best-looking and the final subspace are all certified with a full refresh.
    let mut candidates = vec![q_init, best.1];
    candidates.push(q);
    let mut out: Option<RestartResult> = None;
    for (ci, cq) in candidates.into_iter().enumerate() {
        let seeded = reproject(prob, &cq, &pts);
        let mut rf = keyed(cfg.seed, restart as u64, (u64::MAX >> 33) - ci as u64);
        let cp = refresh(prob, &cq, &seeded, &mut rf, true);
        let value = max_distance(&cp);
        if out.as_ref().is_none_or(|o| value < o.value) {
            out = Some(RestartResult { value, basis: cq, points: cp });
        }
    }
    out.expect("three candidates")
}

fn search(prob: &Problem, n: usize, warm: Option<&Subspace>) -> (usize, RestartResult) {
    let restarts = if n == 0 { 1 } else { prob.cfg.restarts.max(1) + usize::from(warm.is_some()) };
    let results: Vec<RestartResult> = (0..restarts).into_par_iter().map(|r| run_restart(prob, n, r, warm)).collect();
    let mut best_idx = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best_idx].value {
            best_idx = i;
        }
    }
    let best = results.into_iter().nth(best_idx).expect("at least one restart");
    (restarts, best)
}

fn to_estimate(prob: &Problem, n: usize, restarts: usize, res: RestartResult) -> WidthEstimate {
    let residual = res.points.iter().map(|p| p.proj.gap).fold(0.0, f64::max);
    WidthEstimate {
        kind: WidthKind::Kolmogorov,
        value: res.value,
        n,
        method: Method::MultistartAlternate,
        restarts,
        seed: prob.cfg.seed,
        worst_point_residual: residual,
        subspace: Some(Subspace::from_orthonormal(res.basis)),
        operator: None,
        worst_points: res.points.into_iter().map(|p| p.x).collect(),
        m: prob.dst.m,
        k: prob.k,
    }
}

fn shape(spec: &SpaceSpec) -> NormShape {
    NormShape { m: spec.m, p: spec.p.value(), q: spec.q.value() }
}

/// `d_n(B_src, dst)` by multistart subspace search.
pub fn kolmogorov_width_ball(src: &SpaceSpec, dst: &SpaceSpec, n: usize, cfg: &SearchConfig) -> Result<WidthEstimate> {
    kolmogorov_width_ball_warm(src, dst, n, cfg, None)
}

/// As [`kolmogorov_width_ball`], with an extra restart seeded from `warm` (padded with random
/// directions up to dimension `n`).
pub fn kolmogorov_width_ball_warm(
    src: &SpaceSpec,
    dst: &SpaceSpec,
    n: usize,
    cfg: &SearchConfig,
    warm: Option<&Subspace>,
) -> Result<WidthEstimate> {
    check_pair(src, dst)?;
    let ambient = src.dim();
    if n >= ambient {
        let mut e = WidthEstimate::trivial(WidthKind::Kolmogorov, Method::MultistartAlternate, n, 0.0, src.m, src.k, cfg.seed);
        e.subspace = Some(Subspace::coordinate(ambient, ambient));
        return Ok(e);
    }
    let warm = warm.filter(|w| w.ambient_dim() == ambient && w.dim() <= n);
    let prob = Problem { target: Target::Ball(shape(src)), dst: shape(dst), ambient, k: src.k, cfg };
    let (restarts, best) = search(&prob, n, warm);
    Ok(to_estimate(&prob, n, restarts, best))
}

/// Estimates at every `n` of `ns` (ascending), each search warm-started from the previous
/// subspace plus fresh directions.
pub fn kolmogorov_sweep(src: &SpaceSpec, dst: &SpaceSpec, ns: &[usize], cfg: &SearchConfig) -> Result<Vec<WidthEstimate>> {
    let mut sorted = ns.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::with_capacity(sorted.len());
    let mut prev: Option<Subspace> = None;
    for &n in &sorted {
        let est = kolmogorov_width_ball_warm(src, dst, n, cfg, prev.as_ref())?;
        prev = est.subspace.clone();
        out.push(est);
    }
    Ok(out)
}

/// `d_n` of a finite point set: the sup is an exact max over `points`.
pub fn kolmogorov_width_points(points: &[MixedVector], n: usize, p: f64, q: f64, cfg: &SearchConfig) -> Result<WidthEstimate> {
    let Some(first) = points.first() else {
        return domain("point list is empty");
    };
    let (m, k) = (first.m(), first.k());
    if points.iter().any(|x| x.m() != m || x.k() != k) {
        return domain("points have different shapes");
    }
    if !(p > 1.0 && q > 1.0) {
        return domain("exponents must exceed 1");
    }
    let ambient = m * k;
    if n >= ambient {
        return Ok(WidthEstimate::trivial(WidthKind::Kolmogorov, Method::MultistartAlternate, n, 0.0, m, k, cfg.seed));
    }
    let list: Vec<Vec<f64>> = points.iter().map(|x| x.as_slice().to_vec()).collect();
    let prob = Problem { target: Target::Points(&list), dst: NormShape { m, p, q }, ambient, k, cfg };
    let (restarts, best) = search(&prob, n, None);
    Ok(to_estimate(&prob, n, restarts, best))
}

/// Max over the stored worst points of a fresh (cold-start) distance to the stored subspace.
pub fn reevaluate_kolmogorov(est: &WidthEstimate, dst: &SpaceSpec) -> f64 {
    let Some(l) = &est.subspace else {
        return est.value;
    };
    let sh = shape(dst);
    est.worst_points
        .iter()
        .map(|x| project(x, l.basis(), sh, None, 1e-10, 400).distance)
        .fold(0.0, f64::max)
}

/// `d_1` for `m = 2, k = 1` by scanning lines `span(cos φ, sin φ)`.
///
/// In the plane the functional vanishing on the line is unique up to scale, so the distance
/// sup over the source ball is `‖f‖_{p'} / ‖f‖_{q'}` with `f = (−sin φ, cos φ)`.
pub fn angle_grid_width(p_src: f64, q_dst: f64, steps: usize) -> Result<WidthEstimate> {
    if !(p_src > 1.0 && q_dst > 1.0) {
        return domain("exponents must exceed 1");
    }
    if steps < 4 {
        return domain("angle grid needs at least 4 steps");
    }
    let src = NormShape { m: 2, p: p_src, q: p_src };
    let dst = NormShape { m: 2, p: q_dst, q: q_dst };
    let value_at = |phi: f64| {
        let f = [-phi.sin(), phi.cos()];
        src.dual_norm(&f) / dst.dual_norm(&f)
    };
    let h = std::f64::consts::PI / steps as f64;
    let (mut best_phi, mut best) = (0.0, value_at(0.0));
    for i in 1..steps {
        let phi = i as f64 * h;
        let v = value_at(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    // Golden-section refinement inside the bracketing cell.
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_phi - h, best_phi + h);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if value_at(c) < value_at(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let phi = 0.5 * (a + b);
    let v = value_at(phi);
    if v < best {
        best = v;
        best_phi = phi;
    }
    let basis = DMatrix::from_column_slice(2, 1, &[best_phi.cos(), best_phi.sin()]);
    let f = [-best_phi.sin(), best_phi.cos()];
    let worst = support(&f, src);
    Ok(WidthEstimate {
        kind: WidthKind::Kolmogorov,
        value: best,
        n: 1,
        method: Method::BruteAngle,
        restarts: 0,
        seed: 0,
        worst_point_residual: 0.0,
        subspace: Some(Subspace::from_orthonormal(basis)),
        operator: None,
        worst_points: vec![worst],
        m: 2,
        k: 1,
    })
}
