//! Linear algebra of possibly degenerate bivectors.
//!
//! A [`Bivector`] is an antisymmetric matrix whose entries are the values
//! `sigma(v^i, v^j)` on a basis of the dual space. Its rank is always even,
//! `2r`, and a symplectic Gram-Schmidt sweep produces a [`DarbouxFrame`] in
//! which it becomes the block matrix
//!
//! ```text
//!   (  0    1_r  0 )
//!   ( -1_r  0    0 )
//!   (  0    0    0 )
//! ```
//!
//! The columns past `2r` span the kernel, which [`kernel_split`] exposes
//! together with its annihilator in the primal space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the antisymmetry check.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Singular values below `max_sv * n * RANK_RTOL` count as zero.
pub const RANK_RTOL: f64 = 1e-12;

/// The underlying real vector space `V` (and its dual).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorSpaceSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl VectorSpaceSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadInput("vector space dimension must be at least 1".into()));
        }
        Ok(Self { n, labels: None })
    }

    pub fn with_labels(n: usize, labels: Vec<String>) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
        }
        let mut spec = Self::new(n)?;
        spec.labels = Some(labels);
        Ok(spec)
    }
}

/// An antisymmetric bilinear form on `V*`, stored in a fixed basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivector {
    space: VectorSpaceSpec,
    matrix: DMatrix<f64>,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

impl Bivector {
    /// Wraps `matrix`, rejecting non-square or non-antisymmetric input.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadInput("bivector entries must be finite".into()));
        }
        let scale = max_abs(&matrix);
        let asymmetry = max_abs(&(&matrix + matrix.transpose()));
        if asymmetry > ANTISYMMETRY_TOL * scale {
            return Err(Error::NonAntisymmetric { asymmetry, scale });
        }
        let space = VectorSpaceSpec::new(matrix.nrows())?;
        Ok(Self { space, matrix })
    }

    /// Builds from row vectors (the JSON layout).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Antisymmetrizes `matrix` before wrapping; use for products such as
    /// `g sigma g^T` that are antisymmetric only up to rounding.
    pub fn antisymmetrized(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        Self::new((&matrix - matrix.transpose()) * 0.5)
    }

    pub fn zero(n: usize) -> Self {
        Self { space: VectorSpaceSpec { n, labels: None }, matrix: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.space.n
    }

    pub fn space(&self) -> &VectorSpaceSpec {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// `sigma(xi, eta) = xi^T sigma eta`.
    pub fn pair(&self, xi: &[f64], eta: &[f64]) -> f64 {
        let n = self.dim();
        debug_assert!(xi.len() == n && eta.len() == n);
        let mut acc = 0.0;
        for (i, &x) in xi.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row: f64 = eta.iter().enumerate().map(|(j, &e)| self.matrix[(i, j)] * e).sum();
            acc += x * row;
        }
        acc
    }

    /// Pulls the form back along `basis`: the result is `basis^T sigma basis`.
    pub fn in_basis(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        basis.transpose() * &self.matrix * basis
    }

    /// Pushes the form forward by `g`: `g sigma g^T`.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Result<Self> {
        if g.nrows() != self.dim() || g.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: g.nrows() });
        }
        Self::antisymmetrized(g * &self.matrix * g.transpose())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * c }
    }

    pub fn max_abs_diff(&self, other: &Bivector) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}

/// Darboux basis of `V*` (as columns, in the original coordinates) plus the
/// half-rank `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct DarbouxFrame {
    pub basis: DMatrix<f64>,
    pub r: usize,
}

impl DarbouxFrame {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Largest entrywise deviation of `D^T sigma D` from the standard form.
    pub fn residual(&self, sigma: &Bivector) -> f64 {
        let target = standard_matrix(self.dim(), self.r);
        max_abs(&(sigma.in_basis(&self.basis) - target))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.basis.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Kernel / complement decomposition of `V*` together with the annihilator
/// of the kernel in `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSplit {
    /// `n x (n - 2r)`; columns span `ker sigma`.
    pub kernel_basis: DMatrix<f64>,
    /// `n x 2r`; columns span a complement `V'` on which sigma is nondegenerate.
    pub complement_basis: DMatrix<f64>,
    /// `n x 2r`; columns span `(ker sigma)^perp` inside `V`.
    pub annihilator_basis: DMatrix<f64>,
    /// The restriction of sigma to `V'` in the complement basis.
    pub restricted: DMatrix<f64>,
}

impl KernelSplit {
    pub fn r(&self) -> usize {
        self.complement_basis.ncols() / 2
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.ncols()
    }

    /// Coordinates of `xi` in the basis `[complement | kernel]`.
    pub fn coordinates(&self, xi: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.kernel_basis.nrows();
        let full = DMatrix::from_fn(n, n, |i, j| {
            if j < self.complement_basis.ncols() {
                self.complement_basis[(i, j)]
            } else {
                self.kernel_basis[(i, j - self.complement_basis.ncols())]
            }
        });
        let c = full.lu().solve(&DVector::from_column_slice(xi))?;
        let split = self.complement_basis.ncols();
        Some((c.rows(0, split).iter().copied().collect(), c.rows(split, n - split).iter().copied().collect()))
    }
}

/// Numerical rank, always even.
pub fn rank(sigma: &Bivector) -> usize {
    let n = sigma.dim();
    let sv = sigma.matrix().clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if max == 0.0 {
        return 0;
    }
    let threshold = max * n as f64 * RANK_RTOL;
    let count = sv.iter().filter(|&&s| s > threshold).count();
    // Singular values of an antisymmetric matrix come in equal pairs; a pair
    // straddling the threshold is kept whole.
    count + (count & 1)
}

fn standard_matrix(n: usize, r: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..r {
        m[(j, r + j)] = 1.0;
        m[(r + j, j)] = -1.0;
    }
    m
}

/// The block matrix with `r` canonical pairs and an `(n - 2r)`-dimensional kernel.
pub fn standard_form(n: usize, r: usize) -> Result<Bivector> {
    if n == 0 {
        return Err(Error::BadInput("dimension must be at least 1".into()));
    }
    if 2 * r > n {
        return Err(Error::RankTooLarge { n, r });
    }
    Bivector::new(standard_matrix(n, r))
}

/// Symplectic Gram-Schmidt with largest-entry pivoting.
///
/// Each step picks the pair of remaining vectors with the largest
/// `|sigma(u_i, u_j)|`, normalizes it to a canonical pair `(e, f)` with
/// `sigma(e, f) = 1`, and projects it out of every remaining vector. After
/// `rank / 2` steps the leftovers span the kernel.
pub fn darboux_frame(sigma: &Bivector) -> DarbouxFrame {
    let n = sigma.dim();
    let r = rank(sigma) / 2;
    let m = sigma.matrix();
    let form = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(m * b));

    let mut work: Vec<DVector<f64>> = (0..n).map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })).collect();
    let mut es = Vec::with_capacity(r);
    let mut fs = Vec::with_capacity(r);

    for _ in 0..r {
        let mut best = (0, 1, 0.0_f64);
        for i in 0..work.len() {
            for j in (i + 1)..work.len() {
                let v = form(&work[i], &work[j]);
                if v.abs() > best.2.abs() {
                    best = (i, j, v);
                }
            }
        }
        let (i, j, s) = best;
        let f = work.remove(j) / s;
        let e = work.remove(i);
        for u in work.iter_mut() {
            let uf = form(u, &f);
            let ue = form(u, &e);
            *u -= &e * uf;
            *u += &f * ue;
        }
        es.push(e);
        fs.push(f);
    }

    // Second projection pass against all pairs for the kernel vectors.
    for u in work.iter_mut() {
        for (e, f) in es.iter().zip(&fs) {
            let uf = form(u, f);
            let ue = form(u, e);
            *u -= e * uf;
            *u += f * ue;
        }
    }

    let mut basis = DMatrix::zeros(n, n);
    for (col, v) in es.iter().chain(fs.iter()).chain(work.iter()).enumerate() {
        basis.set_column(col, v);
    }
    DarbouxFrame { basis, r }
}

/// Splits `V*` into `ker sigma` and a Darboux complement.
pub fn kernel_split(sigma: &Bivector) -> KernelSplit {
    let frame = darboux_frame(sigma);
    let n = frame.dim();
    let two_r = 2 * frame.r;
    let complement_basis = frame.basis.columns(0, two_r).into_owned();
    let kernel_basis = frame.basis.columns(two_r, n - two_r).into_owned();
    let dual = frame
        .basis
        .clone()
        .try_inverse()
        .expect("Darboux basis is invertible")
        .transpose();
    let annihilator_basis = dual.columns(0, two_r).into_owned();
    let restricted = sigma.in_basis(&complement_basis);
    KernelSplit { kernel_basis, complement_basis, annihilator_basis, restricted }
}
