//! Truncated-grid Schrödinger representation on `L^2(R^d)`.
//!
//! Wave functions are sampled on `K` points per axis over a box of length
//! `L`, centered at the origin. `Q_j` multiplies by `x_j`; `P_j = -i d/dx_j`
//! is applied spectrally, so both are hermitian exactly and the commutator
//! `[P_j, Q_k] = -i delta_jk` holds up to aliasing on smooth, well-localized
//! vectors.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{centered_dft_axis, Sign};
use crate::weyl::WeylOperator;

#[derive(Clone, Debug, PartialEq)]
pub struct GridRep {
    pub points_per_axis: usize,
    pub box_length: f64,
    pub dims: usize,
}

/// Canonical operator on a [`GridRep`], applied without forming a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridOperator {
    Position(usize),
    Momentum(usize),
}

impl GridRep {
    pub fn new(points_per_axis: usize, box_length: f64, dims: usize) -> Result<Self> {
        if points_per_axis < 2 {
            return Err(Error::BadInput(format!("points_per_axis must be at least 2, got {points_per_axis}")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::BadInput(format!("box_length must be positive, got {box_length}")));
        }
        if dims == 0 {
            return Err(Error::BadInput("grid needs at least one dimension".into()));
        }
        Ok(Self { points_per_axis, box_length, dims })
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.points_per_axis / 2) as f64) * self.spacing()
    }

    fn axis_index(&self, flat: usize, axis: usize) -> usize {
        let stride = self.points_per_axis.pow((self.dims - 1 - axis) as u32);
        (flat / stride) % self.points_per_axis
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        (0..self.dims).map(|a| self.coordinate(self.axis_index(flat, a))).collect()
    }

    /// Samples of `exp(-|x - c|^2 / (2 w^2))`, normalized in the discrete `l^2` norm.
    pub fn gaussian(&self, center: &[f64], width: f64) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..self.len())
            .map(|flat| {
                let r2: f64 = self.point(flat).iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
                Complex64::new((-0.5 * r2 / (width * width)).exp(), 0.0)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        v
    }

    pub fn apply(&self, op: GridOperator, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: psi.len() });
        }
        match op {
            GridOperator::Position(a) => {
                self.check_axis(a)?;
                Ok(psi.iter().enumerate().map(|(flat, z)| z * self.coordinate(self.axis_index(flat, a))).collect())
            }
            GridOperator::Momentum(a) => {
                self.check_axis(a)?;
                let k = self.points_per_axis;
                let mut out = psi.to_vec();
                centered_dft_axis(&mut out, k, self.dims, a, Sign::Minus);
                let dp = 2.0 * PI / self.box_length;
                let half = (k / 2) as f64;
                for (flat, z) in out.iter_mut().enumerate() {
                    *z *= (self.axis_index(flat, a) as f64 - half) * dp / k as f64;
                }
                centered_dft_axis(&mut out, k, self.dims, a, Sign::Plus);
                Ok(out)
            }
        }
    }

    fn check_axis(&self, a: usize) -> Result<()> {
        if a >= self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, found: a + 1 });
        }
        Ok(())
    }

    /// `[A, B] psi`.
    pub fn commutator(&self, a: GridOperator, b: GridOperator, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let ab = self.apply(a, &self.apply(b, psi)?)?;
        let ba = self.apply(b, &self.apply(a, psi)?)?;
        Ok(ab.iter().zip(&ba).map(|(x, y)| x - y).collect())
    }

    /// Dense matrix of `op`, built column by column.
    pub fn to_matrix(&self, op: GridOperator) -> Result<WeylOperator> {
        let d = self.len();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        for col in 0..d {
            e[col] = Complex64::new(1.0, 0.0);
            let image = self.apply(op, &e)?;
            for (row, z) in image.into_iter().enumerate() {
                m[(row, col)] = z;
            }
            e[col] = Complex64::new(0.0, 0.0);
        }
        Ok(WeylOperator::new(m))
    }
}

/// `(P, Q)` for every axis of the grid.
pub fn schrodinger_pq(rep: &GridRep) -> (Vec<GridOperator>, Vec<GridOperator>) {
    ((0..rep.dims).map(GridOperator::Momentum).collect(), (0..rep.dims).map(GridOperator::Position).collect())
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
