//! The Lorentz orbit of the standard symplectic form on Minkowski space.
//!
//! Coordinates are `(x0, x1, x2, x3)` with `eta = diag(1, -1, -1, -1)`. The
//! Lorentz group acts on bivectors by congruence, `sigma -> g sigma g^T`. The
//! orbit of the standard form splits into two components, told apart by the
//! sign of the Pfaffian relative to the base point: `Pf(g sigma g^T) = det g Pf(sigma)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank, standard_form, Bivector};

pub const LORENTZ_TOL: f64 = 1e-10;

pub fn minkowski() -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, -1.0, -1.0]))
}

/// The base point of the orbit, `((0, 1_2), (-1_2, 0))`.
pub fn dfr_sigma0() -> Bivector {
    standard_form(4, 2).expect("2r = n")
}

/// Boost with the given rapidity along spatial axis `axis` (1, 2 or 3).
pub fn boost(axis: usize, rapidity: f64) -> DMatrix<f64> {
    assert!((1..4).contains(&axis), "spatial axis must be 1, 2 or 3");
    let mut g = DMatrix::identity(4, 4);
    let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
    g[(0, 0)] = ch;
    g[(axis, axis)] = ch;
    g[(0, axis)] = sh;
    g[(axis, 0)] = sh;
    g
}

/// Rotation by `angle` in the spatial plane `(a, b)`.
pub fn rotation(a: usize, b: usize, angle: f64) -> DMatrix<f64> {
    assert!(a != b && (1..4).contains(&a) && (1..4).contains(&b), "rotation plane must be two distinct spatial axes");
    let mut g = DMatrix::identity(4, 4);
    let (c, s) = (angle.cos(), angle.sin());
    g[(a, a)] = c;
    g[(b, b)] = c;
    g[(a, b)] = -s;
    g[(b, a)] = s;
    g
}

/// Space inversion `diag(1, -1, -1, -1)`.
pub fn parity() -> DMatrix<f64> {
    minkowski()
}

/// Parameters of `g = R_z R_y R_x B_z B_y B_x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    #[serde(default)]
    pub rapidity: [f64; 3],
    #[serde(default)]
    pub angle: [f64; 3],
}

impl LorentzParams {
    pub fn matrix(&self) -> DMatrix<f64> {
        let [bx, by, bz] = self.rapidity;
        let [ax, ay, az] = self.angle;
        rotation(1, 2, az) * rotation(3, 1, ay) * rotation(2, 3, ax) * boost(3, bz) * boost(2, by) * boost(1, bx)
    }
}

/// `max |g^T eta g - eta|`.
pub fn lorentz_defect(g: &DMatrix<f64>) -> f64 {
    let eta = minkowski();
    (g.transpose() * &eta * g - eta).amax()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub group_elements: Vec<Vec<Vec<f64>>>,
    pub sigmas: Vec<Vec<Vec<f64>>>,
    /// `sign(det g)` per element.
    pub component: Vec<i32>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Transforms the base point by every sampled `g` (and by `P g` when
/// `include_parity` is set), checking each `g` is Lorentz.
pub fn lorentz_orbit_sample(params: &[LorentzParams], include_parity: bool) -> Result<OrbitSample> {
    let sigma0 = dfr_sigma0();
    let mut out = OrbitSample { group_elements: Vec::new(), sigmas: Vec::new(), component: Vec::new() };
    for p in params {
        if p.rapidity.iter().chain(&p.angle).any(|v| !v.is_finite()) {
            return Err(Error::BadInput("Lorentz parameters must be finite".into()));
        }
        let g = p.matrix();
        let mut elements = vec![g.clone()];
        if include_parity {
            elements.push(parity() * g);
        }
        for g in elements {
            let defect = lorentz_defect(&g);
            if defect > LORENTZ_TOL {
                return Err(Error::NotLorentz(defect));
            }
            let sigma = sigma0.congruence(&g)?;
            out.component.push(if g.determinant() > 0.0 { 1 } else { -1 });
            out.group_elements.push(rows(&g));
            out.sigmas.push(sigma.rows());
        }
    }
    Ok(out)
}

/// `a01 a23 - a02 a13 + a03 a12`.
pub fn pfaffian4(sigma: &Bivector) -> Result<f64> {
    if sigma.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: sigma.dim() });
    }
    let a = sigma.matrix();
    Ok(a[(0, 1)] * a[(2, 3)] - a[(0, 2)] * a[(1, 3)] + a[(0, 3)] * a[(1, 2)])
}

/// Which orbit component `sigma` lies in: `+1` for the component of the base
/// point, `-1` for the other one.
pub fn orbit_component(sigma: &Bivector) -> Result<i32> {
    let pf = pfaffian4(sigma)?;
    let r = rank(sigma);
    if r < 4 {
        return Err(Error::Degenerate { rank: r });
    }
    let base = pfaffian4(&dfr_sigma0())?;
    Ok(if pf * base > 0.0 { 1 } else { -1 })
}

/// Boosts along the axis paired with `x0` by the base point.
pub fn stabilizer_boost(rapidity: f64) -> DMatrix<f64> {
    boost(2, rapidity)
}

/// Rotations in the spatial plane paired with itself by the base point.
pub fn stabilizer_rotation(angle: f64) -> DMatrix<f64> {
    rotation(1, 3, angle)
}

/// `[g, u0] -> (g sigma0 g^T, g u0)`, the trivialization of the associated
/// bundle `G x_H R^4` over the orbit.
pub fn trivialize(g: &DMatrix<f64>, u0: &[f64]) -> Result<(Bivector, Vec<f64>)> {
    if u0.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: u0.len() });
    }
    if g.nrows() != 4 || g.ncols() != 4 {
        return Err(Error::NotSquare { rows: g.nrows(), cols: g.ncols() });
    }
    let u = g * DVector::from_column_slice(u0);
    Ok((dfr_sigma0().congruence(g)?, u.iter().copied().collect()))
}
