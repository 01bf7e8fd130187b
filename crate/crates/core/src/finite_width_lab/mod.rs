//! Desk-scale numerical estimation of Kolmogorov and linear widths of mixed-norm balls and
//! Gluskin polytopes.
//!
//! Kolmogorov widths are searched over subspaces (multistart, smoothed-max descent on the
//! Grassmannian with a working set of worst points); linear widths over rank-`n` operators
//! `A = UVᵀ`. In both cases the reported value is the exact maximum over the stored worst
//! points at the final subspace/operator, so it can be re-evaluated independently.

mod gluskin;
mod kolmogorov;
mod linear;
mod projection;
mod subspace;

pub use gluskin::{averaged_lower_bound, binomial, gluskin_vertices, GluskinPolytope};
pub use kolmogorov::{
    angle_grid_width, kolmogorov_sweep, kolmogorov_width_ball, kolmogorov_width_ball_warm,
    kolmogorov_width_points, reevaluate_kolmogorov,
};
pub use linear::{duality_gap, linear_width_estimate, reevaluate_linear};
pub use subspace::Subspace;

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::mixed_norm_core::{MixedVector, SpaceSpec};
use crate::mixed_norm_core::Exponent;

pub(crate) use projection::{project, NormShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WidthKind {
    Kolmogorov,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BruteAngle,
    MultistartAlternate,
    OperatorDescent,
}

/// Search budget and tolerances shared by the width estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub outer_iterations: usize,
    pub seed: u64,
    /// Random starting points per worst-point refresh.
    pub random_starts: usize,
    /// Gluskin-vertex starting points per refresh (sampled from small `(r, l)`).
    pub vertex_starts: usize,
    /// Use every `e_ij` as a starting point on each refresh.
    pub unit_starts: bool,
    pub refresh_every: usize,
    pub working_set: usize,
    pub ascent_iterations: usize,
    /// First-order residual accepted by the projection solver.
    pub tolerance: f64,
    /// Relative duality gap a worst point may carry and still count as certified.
    pub certify_tolerance: f64,
    pub temperature_start: f64,
    pub temperature_end: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 32,
            outer_iterations: 500,
            seed: 0,
            random_starts: 8,
            vertex_starts: 8,
            unit_starts: true,
            refresh_every: 50,
            working_set: 32,
            ascent_iterations: 60,
            tolerance: 1e-8,
            certify_tolerance: 1e-6,
            temperature_start: 10.0,
            temperature_end: 1e3,
        }
    }
}

impl SearchConfig {
    /// A reduced budget for sweeps and tests: fewer restarts and outer iterations.
    pub fn light(seed: u64) -> Self {
        SearchConfig {
            restarts: 4,
            outer_iterations: 120,
            seed,
            refresh_every: 30,
            working_set: 24,
            ..SearchConfig::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthEstimate {
    pub kind: WidthKind,
    pub value: f64,
    pub n: usize,
    pub method: Method,
    pub restarts: usize,
    pub seed: u64,
    /// Largest relative duality gap among the stored worst points (how far each stored
    /// distance may sit above the true distance to the subspace).
    pub worst_point_residual: f64,
    /// Subspace of a Kolmogorov estimate.
    pub subspace: Option<Subspace>,
    /// Factors `(U, V)` of the operator `A = UVᵀ` of a linear estimate.
    pub operator: Option<(DMatrix<f64>, DMatrix<f64>)>,
    /// Points at which the maximum was attained (column-major, inner length `m`).
    pub worst_points: Vec<Vec<f64>>,
    pub m: usize,
    pub k: usize,
}

impl WidthEstimate {
    pub fn certified(&self, tol: f64) -> bool {
        self.worst_point_residual <= tol
    }

    pub(crate) fn trivial(kind: WidthKind, method: Method, n: usize, value: f64, m: usize, k: usize, seed: u64) -> Self {
        WidthEstimate {
            kind,
            value,
            n,
            method,
            restarts: 0,
            seed,
            worst_point_residual: 0.0,
            subspace: None,
            operator: None,
            worst_points: Vec::new(),
            m,
            k,
        }
    }
}

/// `min_{y ∈ L} ‖x − y‖_{p,q}` and the minimiser `y`.
///
/// Fails with [`Error::NonConvergence`] (carrying the best iterate) when neither the
/// first-order residual drops below `1e-8` nor the duality gap closes.
pub fn distance_to_subspace(x: &MixedVector, l: &Subspace, p: Exponent, q: Exponent) -> Result<(f64, MixedVector)> {
    if l.ambient_dim() != x.m() * x.k() {
        return domain(format!(
            "subspace lives in R^{} but the vector has {} entries",
            l.ambient_dim(),
            x.m() * x.k()
        ));
    }
    let sh = NormShape { m: x.m(), p: p.value(), q: q.value() };
    let pr = project(x.as_slice(), l.basis(), sh, None, 1e-8, 200);
    let c = nalgebra::DVector::from_vec(pr.coeffs.clone());
    let y = l.basis() * c;
    let y = MixedVector::new(x.m(), x.k(), y.as_slice().to_vec())?;
    if !pr.converged {
        return Err(Error::NonConvergence {
            iterations: 200,
            residual: pr.grad_residual,
            best: y.into_vec(),
        });
    }
    Ok((pr.distance, y))
}

/// `Σ value_k − joint value` for a split `n = Σ n_k`.
pub fn subadditivity_check(estimates: &[(usize, f64)], joint: (usize, f64)) -> Result<f64> {
    let total: usize = estimates.iter().map(|e| e.0).sum();
    if total != joint.0 {
        return Err(Error::Budget(format!("block budgets sum to {total}, joint budget is {}", joint.0)));
    }
    Ok(estimates.iter().map(|e| e.1).sum::<f64>() - joint.1)
}

pub(crate) fn check_pair(src: &SpaceSpec, dst: &SpaceSpec) -> Result<()> {
    if src.m != dst.m || src.k != dst.k {
        return domain(format!(
            "source is {}x{} but target is {}x{}",
            src.m, src.k, dst.m, dst.k
        ));
    }
    if src.dim() > 64 {
        return domain(format!("m*k = {} exceeds the desk-scale limit 64", src.dim()));
    }
    Ok(())
}
