use rand::Rng;

use super::{project, NormShape, Subspace};
use crate::error::{domain, Error, Result};
use crate::mixed_norm_core::MixedVector;
use crate::rng::keyed;

/// Largest vertex list [`gluskin_vertices`] will materialise.
pub const VERTEX_BUDGET: u128 = 1_000_000;

/// Vertex set of `V^{m,k}_{r,l}`: every rank-one `±1` pattern on an `r × l` support grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GluskinPolytope {
    pub m: usize,
    pub k: usize,
    pub r: usize,
    pub l: usize,
    pub vertices: Vec<MixedVector>,
}

impl GluskinPolytope {
    /// `C(m,r) C(k,l) 2^{r+l-1}`.
    pub fn expected_count(m: usize, k: usize, r: usize, l: usize) -> u128 {
        binomial(m, r) * binomial(k, l) * (1u128 << (r + l - 1))
    }
}

pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Enumerates the distinct vertices `γ(e)`. The sign of the first support column is fixed
/// to `+`, which picks one representative of each rank-one pattern `ε ηᵀ ~ (−ε)(−η)ᵀ`.
pub fn gluskin_vertices(m: usize, k: usize, r: usize, l: usize) -> Result<GluskinPolytope> {
    if m == 0 || k == 0 || r == 0 || l == 0 {
        return domain("gluskin polytope needs m, k, r, l >= 1");
    }
    if r > m || l > k {
        return domain(format!("need r <= m and l <= k, got r={r}, m={m}, l={l}, k={k}"));
    }
    let count = GluskinPolytope::expected_count(m, k, r, l);
    if count > VERTEX_BUDGET {
        return Err(Error::Budget(format!("{count} vertices exceed the budget {VERTEX_BUDGET}")));
    }
    let rows = subsets(m, r);
    let cols = subsets(k, l);
    let mut vertices = Vec::with_capacity(count as usize);
    for rs in &rows {
        for cs in &cols {
            for eps_bits in 0..(1u64 << r) {
                for eta_bits in 0..(1u64 << (l - 1)) {
                    let mut v = MixedVector::zeros(m, k);
                    for (a, &i) in rs.iter().enumerate() {
                        let ei = if eps_bits >> a & 1 == 1 { -1.0 } else { 1.0 };
                        for (b, &j) in cs.iter().enumerate() {
                            let hj = if b > 0 && eta_bits >> (b - 1) & 1 == 1 { -1.0 } else { 1.0 };
                            v.set(i, j, ei * hj);
                        }
                    }
                    vertices.push(v);
                }
            }
        }
    }
    Ok(GluskinPolytope { m, k, r, l, vertices })
}

/// `(mean over sampled γ of dist(γ(e), Y)^{q2})^{1/q2}`.
///
/// `γ` uniform on the group maps to a uniform vertex (all stabilisers have equal size), so
/// vertices are sampled uniformly from the enumerated list.
pub fn averaged_lower_bound(poly: &GluskinPolytope, y: &Subspace, p2: f64, q2: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return domain("averaged_lower_bound needs at least one sample");
    }
    if y.ambient_dim() != poly.m * poly.k {
        return domain("subspace dimension does not match the polytope");
    }
    if !(p2 > 1.0 && q2 > 1.0) {
        return domain("target exponents must exceed 1");
    }
    let sh = NormShape { m: poly.m, p: p2, q: q2 };
    let mut rng = keyed(seed, 0, 0);
    let mut acc = 0.0;
    for _ in 0..samples {
        let v = &poly.vertices[rng.random_range(0..poly.vertices.len())];
        let d = project(v.as_slice(), y.basis(), sh, None, 1e-10, 200).distance;
        acc += d.powf(q2);
    }
    Ok((acc / samples as f64).powf(1.0 / q2))
}
