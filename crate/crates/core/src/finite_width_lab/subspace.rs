use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};

/// An `n`-dimensional subspace of `R^{mk}`, stored by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Spans the columns of `basis` (ambient × n). Columns must be linearly independent:
    /// after normalising each column the smallest singular value must exceed `1e-10`.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = basis.shape();
        if rows == 0 {
            return domain("subspace needs a positive ambient dimension");
        }
        if cols == 0 {
            return Ok(Subspace::zero(rows));
        }
        if cols > rows {
            return domain(format!("{cols} columns cannot be independent in R^{rows}"));
        }
        let mut normalised = basis.clone();
        for mut c in normalised.column_iter_mut() {
            let norm = c.norm();
            if norm == 0.0 || !norm.is_finite() {
                return domain("subspace basis has a zero or non-finite column");
            }
            c /= norm;
        }
        let sv = normalised.clone().singular_values();
        let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smallest <= 1e-10 {
            return domain(format!("basis columns are dependent (smallest singular value {smallest:e})"));
        }
        Ok(Subspace { basis: orthonormalize(normalised) })
    }

    /// The zero subspace `{0}` of `R^ambient`.
    pub fn zero(ambient: usize) -> Self {
        Subspace { basis: DMatrix::zeros(ambient, 0) }
    }

    /// Span of the first `n` coordinate vectors.
    pub fn coordinate(ambient: usize, n: usize) -> Self {
        let n = n.min(ambient);
        Subspace { basis: DMatrix::from_fn(ambient, n, |i, j| if i == j { 1.0 } else { 0.0 }) }
    }

    pub fn random(ambient: usize, n: usize, rng: &mut impl Rng) -> Self {
        let n = n.min(ambient);
        let g = DMatrix::from_fn(ambient, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        Subspace { basis: orthonormalize(g) }
    }

    /// Span of `n` Walsh-type sign vectors: every basis vector spreads evenly over all
    /// coordinates.
    pub fn balanced(ambient: usize, n: usize) -> Self {
        let n = n.min(ambient);
        let g = DMatrix::from_fn(ambient, n, |i, j| {
            // Small deterministic jitter keeps the columns independent when `ambient` is not a
            // power of two.
            let jitter = 1e-3 * ((i * 7 + j * 13) % 11) as f64;
            if (i & (j + 1)).count_ones() % 2 == 0 {
                1.0 + jitter
            } else {
                -1.0 + jitter
            }
        });
        Subspace { basis: orthonormalize(g) }
    }

    pub(crate) fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Subspace { basis }
    }

    /// This subspace plus one more direction (a random one orthogonal to it).
    pub fn extended(&self, rng: &mut impl Rng) -> Self {
        let (rows, cols) = self.basis.shape();
        if cols >= rows {
            return self.clone();
        }
        let mut g = DMatrix::zeros(rows, cols + 1);
        g.columns_mut(0, cols).copy_from(&self.basis);
        let v = nalgebra::DVector::from_fn(rows, |_, _| rng.sample::<f64, _>(StandardNormal));
        g.set_column(cols, &v);
        Subspace { basis: orthonormalize(g) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }
}

/// Orthonormal basis of the column span (thin QR, with a sign fix for determinism).
pub(crate) fn orthonormalize(a: DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return a;
    }
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut c = q.column_mut(j);
            c *= -1.0;
        }
    }
    q
}
