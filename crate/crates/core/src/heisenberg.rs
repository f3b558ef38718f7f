//! The Heisenberg Lie algebra `V* (+) R` and group `V* x R` of a bivector.
//!
//! Elements are kept in the original basis and the bivector is passed to
//! every operation, so the same element type serves all fibers of a bundle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Bivector;

/// `(xi, lambda)` with `xi` in `V*` and `lambda` central.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergElement {
    pub xi: Vec<f64>,
    pub lambda: f64,
}

impl HeisenbergElement {
    pub fn new(xi: Vec<f64>, lambda: f64) -> Self {
        Self { xi, lambda }
    }

    pub fn identity(n: usize) -> Self {
        Self { xi: vec![0.0; n], lambda: 0.0 }
    }

    pub fn central(n: usize, lambda: f64) -> Self {
        Self { xi: vec![0.0; n], lambda }
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite() && self.xi.iter().all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.xi
            .iter()
            .zip(&other.xi)
            .fold((self.lambda - other.lambda).abs(), |m, (a, b)| m.max((a - b).abs()))
    }
}

fn check_dims(a: &HeisenbergElement, b: &HeisenbergElement, sigma: &Bivector) -> Result<()> {
    for found in [a.dim(), b.dim()] {
        if found != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: sigma.dim(), found });
        }
    }
    Ok(())
}

/// Lie bracket `[(xi, l), (eta, m)] = (0, sigma(xi, eta))`.
pub fn bracket(a: &HeisenbergElement, b: &HeisenbergElement, sigma: &Bivector) -> Result<HeisenbergElement> {
    check_dims(a, b, sigma)?;
    Ok(HeisenbergElement::central(a.dim(), sigma.pair(&a.xi, &b.xi)))
}

/// Group law `(xi, l)(eta, m) = (xi + eta, l + m - sigma(xi, eta) / 2)`.
pub fn group_product(a: &HeisenbergElement, b: &HeisenbergElement, sigma: &Bivector) -> Result<HeisenbergElement> {
    check_dims(a, b, sigma)?;
    let xi = a.xi.iter().zip(&b.xi).map(|(x, y)| x + y).collect();
    Ok(HeisenbergElement { xi, lambda: a.lambda + b.lambda - 0.5 * sigma.pair(&a.xi, &b.xi) })
}

pub fn group_inverse(a: &HeisenbergElement) -> HeisenbergElement {
    HeisenbergElement { xi: a.xi.iter().map(|x| -x).collect(), lambda: -a.lambda }
}

/// Group commutator `a b a^-1 b^-1`; equals `(0, -sigma(xi_a, xi_b))`.
pub fn group_commutator(a: &HeisenbergElement, b: &HeisenbergElement, sigma: &Bivector) -> Result<HeisenbergElement> {
    let ab = group_product(a, b, sigma)?;
    let ab_ainv = group_product(&ab, &group_inverse(a), sigma)?;
    group_product(&ab_ainv, &group_inverse(b), sigma)
}
