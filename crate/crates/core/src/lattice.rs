//! Periodic lattices in `V` and `V*` and sampled phase-space functions.
//!
//! A [`LatticeSpec`] fixes `K = points_per_axis` samples per axis and a box
//! length `L_a` per axis. Axis `a` of the dual lattice is generated by the
//! covector `Delta_a F e_a` with `Delta_a = 2 pi / L_a`, where `F` is an
//! optional frame (identity by default). The primal lattice is generated by
//! `h_a F^{-T} e_a` with `h_a = L_a / K`, so that `<xi_k, x_j> = (2 pi / K) sum_a k_a j_a`.
//!
//! Indices are stored row-major (last axis fastest). Integer coordinates are
//! centered: index `i` on an axis stands for `i - floor(K / 2)`.
//!
//! Transforms use
//!
//! ```text
//!   f^(xi) = (2 pi)^-n  sum_x f(x) e^{-i<xi,x>} |cell_V|
//!   f(x)   =            sum_xi f^(xi) e^{ i<xi,x>} |cell_V*|
//! ```
//!
//! whose cell weights make the pair exact inverses.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAME_TOL: f64 = 1e-12;

/// Discretization of `V` and `V*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n: usize,
    pub points_per_axis: usize,
    pub box_length: Vec<f64>,
    /// Row-major `n x n` matrix whose columns are the dual axis directions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<f64>>>,
}

impl LatticeSpec {
    pub fn new(n: usize, points_per_axis: usize, box_length: Vec<f64>) -> Result<Self> {
        let spec = Self { n, points_per_axis, box_length, frame: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(n: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        Self::new(n, points_per_axis, vec![box_length; n])
    }

    pub fn with_frame(mut self, frame: &DMatrix<f64>) -> Result<Self> {
        if frame.nrows() != self.n || frame.ncols() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: frame.nrows() });
        }
        let is_identity = (frame - DMatrix::<f64>::identity(self.n, self.n)).amax() == 0.0;
        self.frame = if is_identity { None } else { Some(frame.row_iter().map(|r| r.iter().copied().collect()).collect()) };
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::BadInput("lattice dimension must be at least 1".into()));
        }
        if self.points_per_axis < 2 {
            return Err(Error::BadInput(format!("points_per_axis must be >= 2, got {}", self.points_per_axis)));
        }
        if self.box_length.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: self.box_length.len() });
        }
        if let Some(bad) = self.box_length.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::BadInput(format!("box_length entries must be positive and finite, got {bad}")));
        }
        if self.total_points().is_none() {
            return Err(Error::BadInput("lattice has too many points".into()));
        }
        if let Some(rows) = &self.frame {
            if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                return Err(Error::BadInput("lattice frame must be an n x n matrix".into()));
            }
            let det = self.frame_matrix().determinant();
            if !(det.is_finite() && det.abs() > FRAME_TOL) {
                return Err(Error::BadInput("lattice frame must be invertible".into()));
            }
        }
        Ok(())
    }

    fn total_points(&self) -> Option<usize> {
        (0..self.n).try_fold(1usize, |acc, _| acc.checked_mul(self.points_per_axis))
    }

    /// `K^n`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frame_matrix(&self) -> DMatrix<f64> {
        match &self.frame {
            Some(rows) => DMatrix::from_fn(self.n, self.n, |i, j| rows[i][j]),
            None => DMatrix::identity(self.n, self.n),
        }
    }

    /// Primal spacing `h_a = L_a / K`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.box_length[axis] / self.points_per_axis as f64
    }

    /// Dual spacing `Delta_a = 2 pi / L_a`.
    pub fn dual_spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.box_length[axis]
    }

    /// Columns are the dual lattice generators `Delta_a F e_a` in `V*`.
    pub fn dual_generators(&self) -> DMatrix<f64> {
        let mut g = self.frame_matrix();
        for a in 0..self.n {
            let d = self.dual_spacing(a);
            g.column_mut(a).scale_mut(d);
        }
        g
    }

    /// Columns are the primal lattice generators `h_a F^{-T} e_a` in `V`.
    pub fn primal_generators(&self) -> DMatrix<f64> {
        let mut g = self
            .frame_matrix()
            .try_inverse()
            .expect("validated frame is invertible")
            .transpose();
        for a in 0..self.n {
            let h = self.spacing(a);
            g.column_mut(a).scale_mut(h);
        }
        g
    }

    fn frame_det(&self) -> f64 {
        self.frame.as_ref().map_or(1.0, |_| self.frame_matrix().determinant().abs())
    }

    /// Volume of one dual cell.
    pub fn dual_cell(&self) -> f64 {
        self.frame_det() * (0..self.n).map(|a| self.dual_spacing(a)).product::<f64>()
    }

    /// Volume of one primal cell.
    pub fn primal_cell(&self) -> f64 {
        (0..self.n).map(|a| self.spacing(a)).product::<f64>() / self.frame_det()
    }

    /// Offset subtracted from raw indices to get centered coordinates.
    pub fn offset(&self) -> i64 {
        (self.points_per_axis / 2) as i64
    }

    pub fn centered(&self, raw: usize) -> i64 {
        raw as i64 - self.offset()
    }

    /// Raw index on one axis for a centered coordinate, wrapped periodically.
    pub fn wrap(&self, centered: i64) -> usize {
        (centered + self.offset()).rem_euclid(self.points_per_axis as i64) as usize
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let k = self.points_per_axis;
        let mut out = vec![0; self.n];
        let mut rest = flat;
        for a in (0..self.n).rev() {
            out[a] = rest % k;
            rest /= k;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    /// Centered integer coordinates of a flat index.
    pub fn coords(&self, flat: usize) -> Vec<i64> {
        self.multi_index(flat).into_iter().map(|i| self.centered(i)).collect()
    }

    /// Flat index of centered coordinates, wrapped periodically.
    pub fn flat_from_coords(&self, coords: &[i64]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.points_per_axis + self.wrap(c))
    }

    fn apply(&self, gens: &DMatrix<f64>, coords: &[i64]) -> Vec<f64> {
        let c = DVector::from_iterator(self.n, coords.iter().map(|&c| c as f64));
        (gens * c).iter().copied().collect()
    }

    /// Point of `V` at a flat primal index.
    pub fn primal_point(&self, flat: usize) -> Vec<f64> {
        self.apply(&self.primal_generators(), &self.coords(flat))
    }

    /// Covector of `V*` at a flat dual index.
    pub fn dual_point(&self, flat: usize) -> Vec<f64> {
        self.apply(&self.dual_generators(), &self.coords(flat))
    }

    pub fn primal_points(&self) -> Vec<Vec<f64>> {
        let g = self.primal_generators();
        (0..self.len()).map(|i| self.apply(&g, &self.coords(i))).collect()
    }

    pub fn dual_points(&self) -> Vec<Vec<f64>> {
        let g = self.dual_generators();
        (0..self.len()).map(|i| self.apply(&g, &self.coords(i))).collect()
    }

    /// Flat index of `-k`.
    pub fn negated(&self, flat: usize) -> usize {
        let c: Vec<i64> = self.coords(flat).into_iter().map(|c| -c).collect();
        self.flat_from_coords(&c)
    }

    /// Same discretization up to `tol` in every real parameter.
    pub fn matches(&self, other: &LatticeSpec, tol: f64) -> bool {
        self.n == other.n
            && self.points_per_axis == other.points_per_axis
            && self.box_length.iter().zip(&other.box_length).all(|(a, b)| (a - b).abs() <= tol * a.abs().max(1.0))
            && (self.frame_matrix() - other.frame_matrix()).amax() <= tol
    }
}

/// Direction of an unnormalized centered DFT along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sign {
    /// `sum_j x_j e^{-2 pi i c_k c_j / K}`
    Minus,
    /// `sum_k x_k e^{+2 pi i c_k c_j / K}`
    Plus,
}

/// In-place centered DFT of `data` (shape `[K; n]`, row-major) along `axis`.
///
/// With `c_i = i - a`, `a = floor(K / 2)`, the kernel factors as
/// `e^{s 2 pi i (k j - a k - a j + a^2) / K}`, so a plain FFT with pre- and
/// post-twiddles computes it.
pub(crate) fn centered_dft_axis(data: &mut [Complex64], k: usize, n: usize, axis: usize, sign: Sign) {
    let stride = k.pow((n - 1 - axis) as u32);
    let block = stride * k;
    let a = (k / 2) as f64;
    let s = match sign {
        Sign::Minus => -1.0,
        Sign::Plus => 1.0,
    };
    let twiddle: Vec<Complex64> = (0..k).map(|i| Complex64::from_polar(1.0, -s * 2.0 * PI * a * i as f64 / k as f64)).collect();
    let constant = Complex64::from_polar(1.0, s * 2.0 * PI * a * a / k as f64);
    let dir = match sign {
        Sign::Minus => FftDirection::Forward,
        Sign::Plus => FftDirection::Inverse,
    };
    let fft = FftPlanner::new().plan_fft(k, dir);
    let mut line = vec![Complex64::new(0.0, 0.0); k];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[base + i * stride] * twiddle[i];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (i, v) in line.iter().enumerate() {
                data[base + i * stride] = v * twiddle[i] * constant;
            }
        }
    }
}

pub(crate) fn centered_dft(data: &mut [Complex64], k: usize, n: usize, axes: &[usize], sign: Sign) {
    for &axis in axes {
        centered_dft_axis(data, k, n, axis, sign);
    }
}

fn inverse_transform(lattice: &LatticeSpec, values: &[Complex64]) -> Vec<Complex64> {
    let mut out = values.to_vec();
    let axes: Vec<usize> = (0..lattice.n).collect();
    centered_dft(&mut out, lattice.points_per_axis, lattice.n, &axes, Sign::Minus);
    let w = lattice.primal_cell() / (2.0 * PI).powi(lattice.n as i32);
    out.iter_mut().for_each(|v| *v *= w);
    out
}

fn forward_transform(lattice: &LatticeSpec, dual: &[Complex64]) -> Vec<Complex64> {
    let mut out = dual.to_vec();
    let axes: Vec<usize> = (0..lattice.n).collect();
    centered_dft(&mut out, lattice.points_per_axis, lattice.n, &axes, Sign::Plus);
    let w = lattice.dual_cell();
    out.iter_mut().for_each(|v| *v *= w);
    out
}

/// Closed-form test input `exp(-|x - c|^2_w / 2) e^{i <p, x>}` (coordinates of `V`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    #[serde(default)]
    pub momentum: Vec<f64>,
}

impl GaussianSpec {
    pub fn centered(n: usize, width: f64) -> Self {
        Self { center: vec![0.0; n], width: vec![width; n], momentum: vec![0.0; n] }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, v) in [("center", &self.center), ("width", &self.width)] {
            if v.len() != n {
                return Err(Error::BadInput(format!("gaussian {name} has length {}, expected {n}", v.len())));
            }
        }
        if !self.momentum.is_empty() && self.momentum.len() != n {
            return Err(Error::BadInput(format!("gaussian momentum has length {}, expected {n}", self.momentum.len())));
        }
        if self.width.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::BadInput("gaussian widths must be positive".into()));
        }
        Ok(())
    }

    fn momentum(&self, a: usize) -> f64 {
        self.momentum.get(a).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut expo = Complex64::new(0.0, 0.0);
        for (a, &xa) in x.iter().enumerate() {
            let d = (xa - self.center[a]) / self.width[a];
            expo += Complex64::new(-0.5 * d * d, self.momentum(a) * xa);
        }
        expo.exp()
    }

    /// Continuum inverse Fourier transform at `xi`.
    pub fn inverse_fourier(&self, xi: &[f64]) -> Complex64 {
        let mut out = Complex64::new(1.0, 0.0);
        for (a, &x) in xi.iter().enumerate() {
            let k = x - self.momentum(a);
            let w = self.width[a];
            let mag = w * (2.0 * PI).sqrt() * (-0.5 * w * w * k * k).exp() / (2.0 * PI);
            out *= Complex64::from_polar(mag, -k * self.center[a]);
        }
        out
    }
}

/// Samples of `f` on the primal lattice, with its inverse Fourier transform
/// on the dual lattice computed on first use.
#[derive(Clone, Debug)]
pub struct PhaseSpaceFunction {
    lattice: Arc<LatticeSpec>,
    values: Vec<Complex64>,
    dual: OnceLock<Vec<Complex64>>,
}

impl PartialEq for PhaseSpaceFunction {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.values == other.values
    }
}

impl PhaseSpaceFunction {
    pub fn from_values(lattice: Arc<LatticeSpec>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::DimensionMismatch { expected: lattice.len(), found: values.len() });
        }
        Ok(Self { lattice, values, dual: OnceLock::new() })
    }

    /// The function whose inverse transform is `dual`.
    pub fn from_dual(lattice: Arc<LatticeSpec>, dual: Vec<Complex64>) -> Result<Self> {
        if dual.len() != lattice.len() {
            return Err(Error::DimensionMismatch { expected: lattice.len(), found: dual.len() });
        }
        let values = forward_transform(&lattice, &dual);
        let cache = OnceLock::new();
        let _ = cache.set(dual);
        Ok(Self { lattice, values, dual: cache })
    }

    pub fn from_fn(lattice: Arc<LatticeSpec>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = lattice.primal_points().iter().map(|x| f(x)).collect();
        Self { lattice, values, dual: OnceLock::new() }
    }

    pub fn zero(lattice: Arc<LatticeSpec>) -> Self {
        Self::constant(lattice, Complex64::new(0.0, 0.0))
    }

    pub fn constant(lattice: Arc<LatticeSpec>, c: Complex64) -> Self {
        let values = vec![c; lattice.len()];
        Self { lattice, values, dual: OnceLock::new() }
    }

    /// Plane wave `e^{i<eta, x>}` for the dual lattice point with centered coordinates `k`.
    pub fn character(lattice: Arc<LatticeSpec>, k: &[i64]) -> Result<Self> {
        if k.len() != lattice.n {
            return Err(Error::DimensionMismatch { expected: lattice.n, found: k.len() });
        }
        let kk = lattice.points_per_axis as f64;
        let values = (0..lattice.len())
            .map(|i| {
                let j = lattice.coords(i);
                let phase: i64 = j.iter().zip(k).map(|(a, b)| a * b).sum();
                let phase = phase.rem_euclid(lattice.points_per_axis as i64) as f64;
                Complex64::from_polar(1.0, 2.0 * PI * phase / kk)
            })
            .collect();
        let mut dual = vec![Complex64::new(0.0, 0.0); lattice.len()];
        dual[lattice.flat_from_coords(k)] = Complex64::new(1.0 / lattice.dual_cell(), 0.0);
        let cache = OnceLock::new();
        let _ = cache.set(dual);
        Ok(Self { lattice, values, dual: cache })
    }

    pub fn gaussian(lattice: Arc<LatticeSpec>, spec: &GaussianSpec) -> Result<Self> {
        spec.validate(lattice.n)?;
        Ok(Self::from_fn(lattice, |x| spec.eval(x)))
    }

    pub fn lattice(&self) -> &Arc<LatticeSpec> {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Inverse Fourier samples, computed once and cached.
    pub fn dual_values(&self) -> &[Complex64] {
        self.dual.get_or_init(|| inverse_transform(&self.lattice, &self.values))
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn conj(&self) -> Self {
        let values = self.values.iter().map(|v| v.conj()).collect();
        Self { lattice: self.lattice.clone(), values, dual: OnceLock::new() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let values = self.values.iter().map(|v| v * c).collect();
        Self { lattice: self.lattice.clone(), values, dual: OnceLock::new() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise (commutative) product.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same_lattice(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        Ok(Self { lattice: self.lattice.clone(), values, dual: OnceLock::new() })
    }

    pub fn check_same_lattice(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice.matches(&other.lattice, 1e-12) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch("phase-space functions live on different lattices".into()))
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| f64::max(m, (a - b).norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.norm()))
    }
}

/// Inverse Fourier transform (`f -> f^`).
pub fn inv_fourier(f: &PhaseSpaceFunction) -> Vec<Complex64> {
    f.dual_values().to_vec()
}

/// Fourier transform (`f^ -> f`).
pub fn fourier(lattice: Arc<LatticeSpec>, dual: Vec<Complex64>) -> Result<PhaseSpaceFunction> {
    PhaseSpaceFunction::from_dual(lattice, dual)
}
