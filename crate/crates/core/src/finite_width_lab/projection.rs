//! Nearest point of a subspace in a mixed norm.
//!
//! Minimises `G(c) = Σ_j s_j^q / q`, `s_j = ‖(x − Qc)_{·j}‖_p`, by damped Newton steps with an
//! Armijo line search. `G` is a monotone transform of the norm, so both share minimisers, and
//! its Hessian in the residual is block diagonal over columns:
//! `(q − p) s^{q−2p} u uᵀ + (p − 1) s^{q−p} diag(|r|^{p−2})` with `u = |r|^{p−1} sign r`.

use nalgebra::{DMatrix, DVector};

use crate::mixed_norm_core::{conjugate, norm_gradient, norm_slice};

/// Accepted relative duality gap.
pub(crate) const GAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct Projection {
    pub distance: f64,
    pub coeffs: Vec<f64>,
    /// Unit functional (dual norm one) vanishing on the subspace; `⟨dual, x⟩` is a lower
    /// bound on the distance and matches it at the optimum.
    pub dual: Vec<f64>,
    /// `‖Qᵀ ∇‖x − Qc‖‖₂`, the first-order residual of the normalised problem.
    pub grad_residual: f64,
    pub gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NormShape {
    pub m: usize,
    pub p: f64,
    pub q: f64,
}

impl NormShape {
    pub fn norm(&self, x: &[f64]) -> f64 {
        norm_slice(x, self.m, self.p, self.q)
    }

    pub fn dual_norm(&self, f: &[f64]) -> f64 {
        norm_slice(f, self.m, conjugate(self.p), conjugate(self.q))
    }
}

fn objective(r: &[f64], sh: NormShape) -> f64 {
    let mut g = 0.0;
    for col in r.chunks(sh.m) {
        let s = col.iter().map(|v| v.abs().powf(sh.p)).sum::<f64>().powf(1.0 / sh.p);
        if s > 0.0 {
            g += s.powf(sh.q);
        }
    }
    g / sh.q
}

fn residual(xs: &DVector<f64>, basis: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
    xs - basis * c
}

/// Nearest point of `span(basis)` (orthonormal columns) to `x`.
pub(crate) fn project(
    x: &[f64],
    basis: &DMatrix<f64>,
    sh: NormShape,
    warm: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Projection {
    let n = basis.ncols();
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Projection {
            distance: 0.0,
            coeffs: vec![0.0; n],
            dual: vec![0.0; x.len()],
            grad_residual: 0.0,
            gap: 0.0,
            converged: true,
        };
    }
    let xs = DVector::from_iterator(x.len(), x.iter().map(|v| v / scale));
    let mut c = match warm {
        Some(w) if w.len() == n => DVector::from_iterator(n, w.iter().map(|v| v / scale)),
        _ => basis.tr_mul(&xs),
    };
    if n == 0 || (sh.p == 2.0 && sh.q == 2.0) {
        c = basis.tr_mul(&xs);
        return finish(&xs, basis, c, sh, scale, tol);
    }

    let mut mu = 1e-10;
    let mut stalls = 0;
    let mut g_val = objective(residual(&xs, basis, &c).as_slice(), sh);
    for _ in 0..max_iter {
        let r = residual(&xs, basis, &c);
        let (grad_r, col_s) = scaled_gradient(r.as_slice(), sh);
        let norm = (sh.q * g_val).powf(1.0 / sh.q);
        if norm == 0.0 {
            break;
        }
        let qg = basis.tr_mul(&grad_r);
        let gres = qg.norm() / norm.powf(sh.q - 1.0);
        if gres <= tol || certificate_gap(&xs, basis, &grad_r, norm, sh) <= GAP_TOL {
            break;
        }
        let grad_c = -qg;
        let hess = hessian(r.as_slice(), &col_s, basis, sh);
        let trace = (0..n).map(|i| hess[(i, i)]).sum::<f64>() / n as f64;
        let base = if trace > 0.0 && trace.is_finite() { trace } else { 1.0 };

        let mut stepped = false;
        for _ in 0..12 {
            let mut h = hess.clone();
            for i in 0..n {
                h[(i, i)] += mu * base;
            }
            let Some(chol) = h.cholesky() else {
                mu = (mu * 10.0).max(1e-8);
                continue;
            };
            let d = chol.solve(&(-&grad_c));
            let slope = grad_c.dot(&d);
            if !(slope < 0.0) {
                mu = (mu * 10.0).max(1e-8);
                continue;
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let trial = &c + &d * t;
                let gv = objective(residual(&xs, basis, &trial).as_slice(), sh);
                if gv <= g_val + 1e-4 * t * slope {
                    accepted = Some((trial, gv));
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, gv)) => {
                    stepped = gv < g_val;
                    c = trial;
                    g_val = gv;
                    mu = if t == 1.0 { (mu * 0.25).max(1e-14) } else { mu * 4.0 };
                    break;
                }
                None => mu = (mu * 10.0).max(1e-8),
            }
        }
        if stepped {
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        }
    }
    finish(&xs, basis, c, sh, scale, tol)
}

/// Gradient of `G` in the residual, plus the column norms.
fn scaled_gradient(r: &[f64], sh: NormShape) -> (DVector<f64>, Vec<f64>) {
    let mut g = DVector::zeros(r.len());
    let mut col_s = Vec::with_capacity(r.len() / sh.m);
    for (j, col) in r.chunks(sh.m).enumerate() {
        let s = col.iter().map(|v| v.abs().powf(sh.p)).sum::<f64>().powf(1.0 / sh.p);
        col_s.push(s);
        if s == 0.0 {
            continue;
        }
        let outer = s.powf(sh.q - sh.p);
        for (i, v) in col.iter().enumerate() {
            if *v != 0.0 {
                g[j * sh.m + i] = v.signum() * v.abs().powf(sh.p - 1.0) * outer;
            }
        }
    }
    (g, col_s)
}

fn hessian(r: &[f64], col_s: &[f64], basis: &DMatrix<f64>, sh: NormShape) -> DMatrix<f64> {
    let n = basis.ncols();
    let rmax = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor_r = 1e-9 * rmax.max(1e-300);
    let mut weighted = basis.clone();
    for (j, &s) in col_s.iter().enumerate() {
        let s = s.max(1e-12 * rmax.max(1e-300));
        let outer = (sh.p - 1.0) * s.powf(sh.q - sh.p);
        for i in 0..sh.m {
            let row = j * sh.m + i;
            let b = outer * r[row].abs().max(floor_r).powf(sh.p - 2.0);
            let w = b.sqrt();
            for c in 0..n {
                weighted[(row, c)] *= w;
            }
        }
    }
    let mut h = weighted.tr_mul(&weighted);
    if sh.q != sh.p {
        for (j, &s) in col_s.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let coef = (sh.q - sh.p) * s.powf(sh.q - 2.0 * sh.p);
            let block = basis.rows(j * sh.m, sh.m);
            let u = DVector::from_iterator(
                sh.m,
                r[j * sh.m..(j + 1) * sh.m].iter().map(|v| v.signum() * v.abs().powf(sh.p - 1.0)),
            );
            let a = block.tr_mul(&u);
            h.ger(coef, &a, &a, 1.0);
        }
    }
    h
}

/// Relative gap between the residual norm and the lower bound from the functional
/// `∇‖r‖` projected onto the orthogonal complement of the subspace.
fn certificate_gap(xs: &DVector<f64>, basis: &DMatrix<f64>, grad_r: &DVector<f64>, norm: f64, sh: NormShape) -> f64 {
    let f = grad_r / norm.powf(sh.q - 1.0);
    let fperp = &f - basis * basis.tr_mul(&f);
    let dn = sh.dual_norm(fperp.as_slice());
    if dn == 0.0 {
        return f64::INFINITY;
    }
    let lower = fperp.dot(xs) / dn;
    (norm - lower) / norm
}

fn finish(xs: &DVector<f64>, basis: &DMatrix<f64>, c: DVector<f64>, sh: NormShape, scale: f64, tol: f64) -> Projection {
    let r = residual(xs, basis, &c);
    let mut f = vec![0.0; r.len()];
    let norm = norm_gradient(r.as_slice(), sh.m, sh.p, sh.q, &mut f);
    if norm == 0.0 {
        return Projection {
            distance: 0.0,
            coeffs: c.iter().map(|v| v * scale).collect(),
            dual: vec![0.0; r.len()],
            grad_residual: 0.0,
            gap: 0.0,
            converged: true,
        };
    }
    let f = DVector::from_vec(f);
    let gres = basis.tr_mul(&f).norm();
    let fperp = &f - basis * basis.tr_mul(&f);
    let dn = sh.dual_norm(fperp.as_slice());
    let (gap, dual) = if dn > 0.0 {
        let lower = fperp.dot(xs) / dn;
        ((norm - lower) / norm, fperp.iter().map(|v| v / dn).collect())
    } else {
        (f64::INFINITY, vec![0.0; r.len()])
    };
    Projection {
        distance: norm * scale,
        coeffs: c.iter().map(|v| v * scale).collect(),
        dual,
        grad_residual: gres,
        gap: gap.max(0.0),
        converged: gres <= tol || gap <= GAP_TOL,
    }
}
