//! The linear Poisson structure of `su(2)* = R^3` and its spherical leaves.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bundle::{BasePoint, BaseSample, PoissonBundleSample};
use crate::error::{Error, Result};
use crate::linalg::Bivector;

/// `sigma^{ij}(x) = eps^{ijk} x_k`.
pub fn su2_poisson(x: &[f64; 3]) -> Bivector {
    let [a, b, c] = *x;
    let m = DMatrix::from_row_slice(3, 3, &[0.0, c, -b, -c, 0.0, a, b, -a, 0.0]);
    Bivector::new(m).expect("antisymmetric by construction")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearPoissonSample {
    pub points: Vec<[f64; 3]>,
    pub sigmas: Vec<Vec<Vec<f64>>>,
}

impl LinearPoissonSample {
    pub fn from_points(points: Vec<[f64; 3]>) -> Self {
        let sigmas = points.iter().map(|x| su2_poisson(x).rows()).collect();
        Self { points, sigmas }
    }

    pub fn to_bundle(&self) -> Result<PoissonBundleSample> {
        let base = BaseSample::new(self.points.iter().map(|x| BasePoint::new(x.to_vec())).collect())?;
        let sigmas = self.sigmas.iter().map(|s| Bivector::from_rows(s)).collect::<Result<Vec<_>>>()?;
        PoissonBundleSample::new(base, sigmas)
    }
}

/// `count` nearly uniform points on the sphere of the given radius
/// (Fibonacci lattice), consecutive points close together.
pub fn leaf_sample(radius: f64, count: usize) -> Result<LinearPoissonSample> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::BadInput(format!("leaf radius must be positive, got {radius}")));
    }
    if count == 0 {
        return Err(Error::BadInput("leaf sample needs at least one point".into()));
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let points = (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [radius * rho * phi.cos(), radius * rho * phi.sin(), radius * z]
        })
        .collect();
    Ok(LinearPoissonSample::from_points(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kernel_split, rank};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        let s = su2_poisson(&[0.0, 0.0, 0.0]);
        assert_eq!(rank(&s), 0);
        let s = su2_poisson(&[0.0, 0.0, 1.0]);
        assert_eq!(s.rows(), vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
        assert_eq!(rank(&s), 2);
    }

    #[test]
    fn position_spans_the_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let s = su2_poisson(&x);
            let sx = s.matrix() * nalgebra::DVector::from_column_slice(&x);
            assert!(sx.amax() < 1e-14);
            let k = kernel_split(&s).kernel_basis;
            assert_eq!(k.ncols(), 1);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cos = (k.column(0).iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / (k.column(0).norm() * norm)).abs();
            assert!((cos - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn leaf_has_constant_rank() {
        let leaf = leaf_sample(1.5, 30).unwrap();
        for (x, s) in leaf.points.iter().zip(&leaf.sigmas) {
            assert!((x.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.5).abs() < 1e-12);
            assert_eq!(rank(&Bivector::from_rows(s).unwrap()), 2);
        }
        assert_eq!(leaf.to_bundle().unwrap().len(), 30);
        assert!(leaf_sample(0.0, 5).is_err());
        assert!(leaf_sample(1.0, 0).is_err());
    }
}
