//! Sections of a Poisson vector bundle sampled over finitely many base points.
//!
//! Every fiber is the same vector space `R^n` with its own bivector `sigma(m)`,
//! whose rank may jump from point to point. A section assigns to each point a
//! phase-space function on one common lattice; products, norms and
//! representations are taken fiber by fiber with that fiber's bivector.
//! Points flagged `at_infinity` stand in for the boundary of a
//! compactification: sections must be negligible there.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, PhaseSpaceFunction};
use crate::linalg::{kernel_split, Bivector, KernelSplit};
use crate::par::{map_indexed, try_map_indexed, Exec};
use crate::star::{cstar_norm_estimate, l1check_norm, star_with};
use crate::weyl::{
    highest_weight_rep, operator_norm, quantize_highest_weight, FiniteWeylSystem, HighestWeight, HighestWeightRep,
    WeylOperator,
};

/// Default bound on `l1check_norm` at points at infinity.
pub const DECAY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub coords: Vec<f64>,
    #[serde(default)]
    pub at_infinity: bool,
}

impl BasePoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords, at_infinity: false }
    }

    pub fn at_infinity(coords: Vec<f64>) -> Self {
        Self { coords, at_infinity: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseSample {
    pub points: Vec<BasePoint>,
}

impl BaseSample {
    pub fn new(points: Vec<BasePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::BadInput("base sample has no points".into()));
        }
        if let Some(i) = points.iter().position(|p| p.coords.iter().any(|c| !c.is_finite())) {
            return Err(Error::BadInput(format!("base point {i} has non-finite coordinates")));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonBundleSample {
    pub base: BaseSample,
    pub fiber_dim: usize,
    pub sigma_field: Vec<Bivector>,
}

impl PoissonBundleSample {
    pub fn new(base: BaseSample, sigma_field: Vec<Bivector>) -> Result<Self> {
        if sigma_field.len() != base.len() {
            return Err(Error::BadInput(format!(
                "sigma_field has {} entries for {} base points",
                sigma_field.len(),
                base.len()
            )));
        }
        let fiber_dim = sigma_field[0].dim();
        if let Some(s) = sigma_field.iter().find(|s| s.dim() != fiber_dim) {
            return Err(Error::DimensionMismatch { expected: fiber_dim, found: s.dim() });
        }
        Ok(Self { base, fiber_dim, sigma_field })
    }

    /// `m -> sigma(m)` evaluated on the given base points.
    pub fn from_fn(base: BaseSample, field: impl Fn(&BasePoint) -> Result<Bivector>) -> Result<Self> {
        let sigma_field = base.points.iter().map(field).collect::<Result<Vec<_>>>()?;
        Self::new(base, sigma_field)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn sigma(&self, m: usize) -> Result<&Bivector> {
        self.sigma_field.get(m).ok_or(Error::UnknownPoint(m))
    }

    /// The finite model of each fiber on `lattice`, where one exists.
    pub fn fiber_systems(&self, lattice: &LatticeSpec) -> Vec<Result<FiniteWeylSystem>> {
        self.sigma_field.iter().map(|s| FiniteWeylSystem::for_lattice(s, lattice)).collect()
    }
}

/// A bounded scalar function on the base, acting on sections.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(base: &BaseSample, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != base.len() {
            return Err(Error::BaseMismatch(format!("{} scalar values for {} base points", values.len(), base.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadInput("scalar field must be bounded".into()));
        }
        Ok(Self { values })
    }

    pub fn constant(base: &BaseSample, c: Complex64) -> Self {
        Self { values: vec![c; base.len()] }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `true` when the field vanishes at every point at infinity.
    pub fn vanishes_at_infinity(&self, base: &BaseSample, tol: f64) -> bool {
        base.points.iter().zip(&self.values).all(|(p, v)| !p.at_infinity || v.norm() <= tol)
    }
}

#[derive(Clone, Debug)]
pub struct SectionField {
    bundle: Arc<PoissonBundleSample>,
    values: Vec<PhaseSpaceFunction>,
}

impl SectionField {
    /// Validates a common lattice of the fiber dimension and decay at infinity.
    pub fn new(bundle: Arc<PoissonBundleSample>, values: Vec<PhaseSpaceFunction>) -> Result<Self> {
        Self::with_decay_tol(bundle, values, DECAY_TOL)
    }

    pub fn with_decay_tol(bundle: Arc<PoissonBundleSample>, values: Vec<PhaseSpaceFunction>, decay_tol: f64) -> Result<Self> {
        if values.len() != bundle.len() {
            return Err(Error::BaseMismatch(format!("section has {} values for {} base points", values.len(), bundle.len())));
        }
        let lattice = values[0].lattice();
        if lattice.n != bundle.fiber_dim {
            return Err(Error::DimensionMismatch { expected: bundle.fiber_dim, found: lattice.n });
        }
        for (i, f) in values.iter().enumerate() {
            if !Arc::ptr_eq(f.lattice(), lattice) && f.lattice().as_ref() != lattice.as_ref() {
                return Err(Error::LatticeMismatch(format!("section value at point {i} uses a different lattice")));
            }
            if bundle.base.points[i].at_infinity {
                let norm = l1check_norm(f);
                if norm > decay_tol {
                    return Err(Error::NotVanishing { point: i, norm });
                }
            }
        }
        Ok(Self { bundle, values })
    }

    /// Extends one fiber function to a section, constant in `m`.
    pub fn constant(bundle: Arc<PoissonBundleSample>, f: PhaseSpaceFunction) -> Result<Self> {
        let values = vec![f; bundle.len()];
        Self::new(bundle, values)
    }

    pub fn zero(bundle: Arc<PoissonBundleSample>, lattice: Arc<LatticeSpec>) -> Result<Self> {
        Self::constant(bundle, PhaseSpaceFunction::zero(lattice))
    }

    pub fn bundle(&self) -> &Arc<PoissonBundleSample> {
        &self.bundle
    }

    pub fn values(&self) -> &[PhaseSpaceFunction] {
        &self.values
    }

    pub fn lattice(&self) -> &Arc<LatticeSpec> {
        self.values[0].lattice()
    }

    fn same_bundle(&self, other: &SectionField) -> Result<()> {
        if !Arc::ptr_eq(&self.bundle, &other.bundle) && self.bundle != other.bundle {
            return Err(Error::BaseMismatch("sections live on different bundles".into()));
        }
        if self.lattice().as_ref() != other.lattice().as_ref() {
            return Err(Error::LatticeMismatch("sections use different lattices".into()));
        }
        Ok(())
    }

    /// Pointwise conjugation in every fiber.
    pub fn conj(&self) -> Self {
        Self { bundle: self.bundle.clone(), values: self.values.iter().map(|f| f.conj()).collect() }
    }

    pub fn add(&self, other: &SectionField) -> Result<Self> {
        self.same_bundle(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Self { bundle: self.bundle.clone(), values })
    }

    pub fn max_abs_diff(&self, other: &SectionField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    /// Largest sample modulus over all fibers.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }
}

/// `sup_m |phi(m)|_L1check`.
pub fn section_sup_l1_norm(phi: &SectionField) -> f64 {
    phi.values.iter().map(l1check_norm).fold(0.0, f64::max)
}

fn check_system(phi: &SectionField, m: usize, sys: &FiniteWeylSystem) -> Result<()> {
    let sigma = &phi.bundle.sigma_field[m];
    let scale = sigma.matrix().amax().max(1.0);
    let diff = sys.sigma().max_abs_diff(sigma);
    if diff > 1e-10 * scale {
        return Err(Error::SystemMismatch { point: m, reason: format!("system bivector differs from sigma(m) by {diff:e}") });
    }
    Ok(())
}

/// `sup_m |W_sigma(m) phi(m)|` with one finite model per point.
pub fn section_cstar_norm(phi: &SectionField, systems: &[FiniteWeylSystem]) -> Result<f64> {
    if systems.len() != phi.bundle.len() {
        return Err(Error::SystemMismatch {
            point: systems.len().min(phi.bundle.len()),
            reason: format!("{} systems for {} base points", systems.len(), phi.bundle.len()),
        });
    }
    let norms = try_map_indexed(systems.len(), Exec::default(), |m| {
        check_system(phi, m, &systems[m])?;
        cstar_norm_estimate(&phi.values[m], &systems[m]).map_err(|e| match e {
            Error::LatticeMismatch(reason) => Error::SystemMismatch { point: m, reason },
            other => other,
        })
    })?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// `sup_[v] |W_[v] f|` over all highest weights periodic on the lattice of `f`.
///
/// For a degenerate fiber one representation sees only part of the algebra;
/// the whole family of irreducibles is needed to separate functions.
pub fn fiber_norm_over_weights(f: &PhaseSpaceFunction, sys: &FiniteWeylSystem) -> Result<f64> {
    let split = kernel_split(sys.sigma());
    let weights = sys.periodic_weights(f.lattice().points_per_axis);
    let norms = try_map_indexed(weights.len(), Exec::default(), |i| {
        let rep = highest_weight_rep(&split, sys, &weights[i])?;
        Ok::<_, Error>(operator_norm(&quantize_highest_weight(&rep, f)?))
    })?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// `sup_m fiber_norm_over_weights(phi(m))`.
pub fn section_norm_over_irreps(phi: &SectionField, systems: &[FiniteWeylSystem]) -> Result<f64> {
    if systems.len() != phi.bundle.len() {
        return Err(Error::SystemMismatch { point: 0, reason: format!("{} systems for {} base points", systems.len(), phi.bundle.len()) });
    }
    let mut worst = 0.0_f64;
    for (m, sys) in systems.iter().enumerate() {
        check_system(phi, m, sys)?;
        worst = worst.max(fiber_norm_over_weights(&phi.values[m], sys)?);
    }
    Ok(worst)
}

/// `delta_m(phi)`.
pub fn evaluate(phi: &SectionField, m: usize) -> Result<&PhaseSpaceFunction> {
    phi.values.get(m).ok_or(Error::UnknownPoint(m))
}

/// `(f phi)(m) = f(m) phi(m)`.
pub fn module_action(f: &ScalarField, phi: &SectionField) -> Result<SectionField> {
    if f.values.len() != phi.bundle.len() {
        return Err(Error::BaseMismatch(format!("scalar field has {} values for {} base points", f.values.len(), phi.bundle.len())));
    }
    let values = phi.values.iter().zip(&f.values).map(|(g, &c)| g.scale(c)).collect();
    Ok(SectionField { bundle: phi.bundle.clone(), values })
}

/// Fiberwise `phi(m) *_sigma(m) psi(m)`.
pub fn section_star(phi: &SectionField, psi: &SectionField) -> Result<SectionField> {
    section_star_with(phi, psi, Exec::default())
}

pub fn section_star_with(phi: &SectionField, psi: &SectionField, exec: Exec) -> Result<SectionField> {
    phi.same_bundle(psi).map_err(|e| match e {
        Error::LatticeMismatch(s) => Error::BaseMismatch(s),
        other => other,
    })?;
    let values = try_map_indexed(phi.bundle.len(), exec, |m| {
        star_with(&phi.values[m], &psi.values[m], &phi.bundle.sigma_field[m], Exec::Sequential)
    })?;
    Ok(SectionField { bundle: phi.bundle.clone(), values })
}

/// The irreducible representation `pi_[v] o delta_m` of the section algebra.
#[derive(Clone, Debug)]
pub struct PointIrrep {
    pub point: usize,
    pub split: KernelSplit,
    pub rep: HighestWeightRep,
    base_len: usize,
}

impl PointIrrep {
    pub fn dim(&self) -> usize {
        self.rep.system().dim()
    }

    pub fn represent(&self, phi: &SectionField) -> Result<WeylOperator> {
        if phi.bundle.len() != self.base_len {
            return Err(Error::BaseMismatch(format!("section over {} points, irrep over {}", phi.bundle.len(), self.base_len)));
        }
        quantize_highest_weight(&self.rep, evaluate(phi, self.point)?)
    }

    /// A scalar field acts through its value at the point.
    pub fn represent_scalar(&self, f: &ScalarField) -> Result<WeylOperator> {
        let c = f.values.get(self.point).ok_or(Error::UnknownPoint(self.point))?;
        Ok(WeylOperator::identity(self.dim()).scale(*c))
    }
}

/// Builds `pi_[v] o delta_m` on the finite model of fiber `m` over `lattice`.
pub fn irrep_at_point(bundle: &PoissonBundleSample, m: usize, v: &HighestWeight, lattice: &LatticeSpec) -> Result<PointIrrep> {
    let sigma = bundle.sigma(m)?;
    let sys = FiniteWeylSystem::for_lattice(sigma, lattice)?;
    let split = kernel_split(sigma);
    let rep = highest_weight_rep(&split, &sys, v)?;
    if !rep.is_periodic_on(lattice) {
        return Err(Error::LatticeMismatch(format!(
            "highest weight at point {m} is not periodic on the section lattice"
        )));
    }
    Ok(PointIrrep { point: m, split, rep, base_len: bundle.len() })
}

/// Largest fiber-to-fiber difference between consecutive points, per pair.
pub fn adjacent_differences(phi: &SectionField) -> Vec<f64> {
    let n = phi.values.len();
    map_indexed(n.saturating_sub(1), Exec::Sequential, |i| phi.values[i].max_abs_diff(&phi.values[i + 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GaussianSpec;
    use crate::linalg::standard_form;
    use crate::star::star;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn line_base(ms: &[f64]) -> BaseSample {
        BaseSample::new(ms.iter().map(|&m| BasePoint::new(vec![m])).collect()).unwrap()
    }

    fn model_lattice(n: usize, big_n: usize) -> Arc<LatticeSpec> {
        Arc::new(LatticeSpec::uniform(n, 2 * big_n, (2.0 * std::f64::consts::PI * big_n as f64).sqrt()).unwrap())
    }

    fn random_fn(lat: &Arc<LatticeSpec>, rng: &mut ChaCha8Rng) -> PhaseSpaceFunction {
        let v = (0..lat.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        PhaseSpaceFunction::from_values(lat.clone(), v).unwrap()
    }

    fn jump_bundle(ms: &[f64]) -> Arc<PoissonBundleSample> {
        let j = standard_form(2, 1).unwrap();
        Arc::new(PoissonBundleSample::from_fn(line_base(ms), |p| Ok(j.scaled(p.coords[0]))).unwrap())
    }

    #[test]
    fn sup_l1_examples() {
        let b = jump_bundle(&[0.0, 1.0]);
        let lat = Arc::new(LatticeSpec::uniform(2, 32, 16.0).unwrap());
        let zero = SectionField::zero(b.clone(), lat.clone()).unwrap();
        assert_eq!(section_sup_l1_norm(&zero), 0.0);
        let e = PhaseSpaceFunction::character(lat.clone(), &[1, 2]).unwrap();
        let single = Arc::new(PoissonBundleSample::new(line_base(&[0.0]), vec![Bivector::zero(2)]).unwrap());
        let s = SectionField::constant(single, e).unwrap();
        assert!((section_sup_l1_norm(&s) - 1.0).abs() < 1e-12);
        let g1 = PhaseSpaceFunction::gaussian(lat.clone(), &GaussianSpec::centered(2, 1.0)).unwrap();
        let g2 = PhaseSpaceFunction::gaussian(lat.clone(), &GaussianSpec::centered(2, 0.5)).unwrap();
        let s = SectionField::new(b, vec![g1.clone(), g2.clone()]).unwrap();
        assert_eq!(section_sup_l1_norm(&s), l1check_norm(&g1).max(l1check_norm(&g2)));
    }

    #[test]
    fn decay_at_infinity_is_enforced() {
        let base = BaseSample::new(vec![BasePoint::new(vec![0.0]), BasePoint::at_infinity(vec![1e6])]).unwrap();
        let b = Arc::new(PoissonBundleSample::new(base, vec![Bivector::zero(2); 2]).unwrap());
        let lat = Arc::new(LatticeSpec::uniform(2, 8, 8.0).unwrap());
        let one = PhaseSpaceFunction::constant(lat.clone(), c(1.0));
        assert!(matches!(SectionField::constant(b.clone(), one.clone()), Err(Error::NotVanishing { point: 1, .. })));
        assert!(SectionField::new(b, vec![one, PhaseSpaceFunction::zero(lat)]).is_ok());
    }

    #[test]
    fn cstar_norm_examples() {
        let lat = model_lattice(2, 3);
        let b = jump_bundle(&[1.0, 0.0, -1.0]);
        let systems: Vec<_> = b.fiber_systems(&lat).into_iter().map(|s| s.unwrap()).collect();
        let zero = SectionField::zero(b.clone(), lat.clone()).unwrap();
        assert_eq!(section_cstar_norm(&zero, &systems).unwrap(), 0.0);
        let e = SectionField::constant(b.clone(), PhaseSpaceFunction::character(lat.clone(), &[1, -1]).unwrap()).unwrap();
        assert!((section_cstar_norm(&e, &systems).unwrap() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<_> = (0..3).map(|_| random_fn(&lat, &mut rng)).collect();
        let phi = SectionField::new(b.clone(), values.clone()).unwrap();
        let expect = (0..3).map(|m| operator_norm(&crate::weyl::weyl_quantize(&systems[m], &values[m]).unwrap())).fold(0.0, f64::max);
        assert!((section_cstar_norm(&phi, &systems).unwrap() - expect).abs() < 1e-12);
        assert!(section_cstar_norm(&phi, &systems).unwrap() <= section_sup_l1_norm(&phi) + 1e-12);

        let mut swapped = systems.clone();
        swapped.swap(0, 2);
        assert!(matches!(section_cstar_norm(&phi, &swapped), Err(Error::SystemMismatch { point: 0, .. })));
    }

    #[test]
    fn evaluation_module_and_star() {
        let lat = model_lattice(2, 3);
        let b = jump_bundle(&[1.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = SectionField::new(b.clone(), vec![random_fn(&lat, &mut rng), random_fn(&lat, &mut rng)]).unwrap();
        let psi = SectionField::new(b.clone(), vec![random_fn(&lat, &mut rng), random_fn(&lat, &mut rng)]).unwrap();
        let f = ScalarField::new(&b.base, vec![Complex64::new(0.5, -2.0), c(3.0)]).unwrap();
        let fphi = module_action(&f, &phi).unwrap();
        for m in 0..2 {
            assert_eq!(evaluate(&fphi, m).unwrap(), &evaluate(&phi, m).unwrap().scale(f.values[m]));
        }
        assert!(section_sup_l1_norm(&fphi) <= f.sup_norm() * section_sup_l1_norm(&phi) + 1e-12);
        assert_eq!(module_action(&ScalarField::constant(&b.base, c(1.0)), &phi).unwrap().max_abs_diff(&phi), 0.0);
        assert_eq!(module_action(&ScalarField::constant(&b.base, c(0.0)), &phi).unwrap().max_abs(), 0.0);

        let prod = section_star(&phi, &psi).unwrap();
        for m in 0..2 {
            let direct = star(evaluate(&phi, m).unwrap(), evaluate(&psi, m).unwrap(), b.sigma(m).unwrap()).unwrap();
            assert!(evaluate(&prod, m).unwrap().max_abs_diff(&direct) < 1e-12);
        }
        assert!(matches!(evaluate(&phi, 7), Err(Error::UnknownPoint(7))));
        let other = jump_bundle(&[1.0, 0.0, 2.0]);
        let f3 = ScalarField::constant(&other.base, c(1.0));
        assert!(matches!(module_action(&f3, &phi), Err(Error::BaseMismatch(_))));
    }

    #[test]
    fn rank_jump_products_vary_continuously() {
        let ms = [-1.0, -0.1, 0.0, 0.1, 1.0];
        let b = jump_bundle(&ms);
        let lat = Arc::new(LatticeSpec::uniform(2, 32, 16.0).unwrap());
        let g = PhaseSpaceFunction::gaussian(lat.clone(), &GaussianSpec { center: vec![0.5, 0.0], width: vec![1.0, 1.0], momentum: vec![0.0, 1.0] }).unwrap();
        let h = PhaseSpaceFunction::gaussian(lat.clone(), &GaussianSpec { center: vec![0.0, -0.5], width: vec![1.2, 0.8], momentum: vec![]}).unwrap();
        let prod = section_star(&SectionField::constant(b.clone(), g).unwrap(), &SectionField::constant(b, h).unwrap()).unwrap();
        let d = adjacent_differences(&prod);
        // steps of 0.9, 0.1, 0.1, 0.9
        assert!(d[1] < 0.25 * d[0] && d[2] < 0.25 * d[3]);
        assert!(d[1] > 0.0 && d[2] > 0.0);
    }

    #[test]
    fn irrep_at_point_examples() {
        let lat = model_lattice(2, 3);
        let b = jump_bundle(&[1.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = SectionField::new(b.clone(), vec![random_fn(&lat, &mut rng), random_fn(&lat, &mut rng)]).unwrap();
        let psi = SectionField::new(b.clone(), vec![random_fn(&lat, &mut rng), random_fn(&lat, &mut rng)]).unwrap();
        let f = ScalarField::new(&b.base, vec![c(2.0), Complex64::new(0.0, 1.0)]).unwrap();
        for m in 0..2 {
            let pi = irrep_at_point(&b, m, &HighestWeight::zero(2), &lat).unwrap();
            let lhs = pi.represent(&section_star(&phi, &psi).unwrap()).unwrap();
            let rhs = pi.represent(&phi).unwrap().mul(&pi.represent(&psi).unwrap());
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            let fphi = pi.represent(&module_action(&f, &phi).unwrap()).unwrap();
            let expect = pi.represent_scalar(&f).unwrap().mul(&pi.represent(&phi).unwrap());
            assert!(fphi.max_abs_diff(&expect) < 1e-12);
        }
        let pi = irrep_at_point(&b, 0, &HighestWeight::zero(2), &lat).unwrap();
        let sys = FiniteWeylSystem::for_lattice(b.sigma(0).unwrap(), &lat).unwrap();
        let w = crate::weyl::weyl_quantize(&sys, evaluate(&phi, 0).unwrap()).unwrap();
        assert!(pi.represent(&phi).unwrap().max_abs_diff(&w) < 1e-12);
        assert!(matches!(irrep_at_point(&b, 5, &HighestWeight::zero(2), &lat), Err(Error::UnknownPoint(5))));
    }

    #[test]
    fn degenerate_fiber_needs_all_weights() {
        let lat = model_lattice(2, 3);
        let sys = FiniteWeylSystem::for_lattice(&Bivector::zero(2), &lat).unwrap();
        // vanishes at x = 0 only
        let f = PhaseSpaceFunction::from_fn(lat.clone(), |x| c(x[0] * x[0] + x[1] * x[1]));
        assert!(operator_norm(&crate::weyl::weyl_quantize(&sys, &f).unwrap()) < 1e-12);
        assert!(fiber_norm_over_weights(&f, &sys).unwrap() > 1.0);
    }
}
