//! Concrete Weyl systems and Weyl quantization.
//!
//! [`FiniteWeylSystem`] realizes `pi(xi) pi(eta) = e^{-(i/2) sigma(xi, eta)} pi(xi + eta)`
//! exactly on `C^{N_1} x ... x C^{N_r}`. Covectors are addressed by integer
//! coordinates `k` against a set of lattice generators `g_1 .. g_n` of `V*`.
//! The generators come in canonical pairs `(g_p, g_q)` with
//! `sigma(g_p, g_q) = 2 pi t / N`, plus kernel generators on which the
//! system acts trivially. Each pair is carried by a clock-and-shift block
//!
//! ```text
//!   D(a, b) = tau^{t a b} X^a Z^{t b},   tau = e^{i pi / N},  Z X = e^{2 pi i / N} X Z
//! ```
//!
//! which satisfies the Weyl relation for all integer `a, b` without
//! reduction. All phases are exact `2N`-th roots of unity taken from a table.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, PhaseSpaceFunction};
use crate::linalg::{darboux_frame, Bivector, DarbouxFrame, KernelSplit};
use crate::par::{map_indexed, Exec};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Spot-check tolerance for user-supplied Weyl systems.
pub const WEYL_SPOT_TOL: f64 = 1e-8;

/// A bounded operator on the model Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylOperator {
    pub matrix: DMatrix<Complex64>,
}

impl WeylOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { matrix: &self.matrix * c }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix - &other.matrix }
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, v| f64::max(m, v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint()).max_abs_diff(&Self::identity(self.dim())) <= tol
    }

    /// Smallest `|A - c 1|` entrywise over scalars `c` (taking `c = tr A / d`).
    pub fn distance_from_scalar(&self) -> f64 {
        let d = self.dim();
        let c = self.matrix.trace() / d as f64;
        self.max_abs_diff(&Self::identity(d).scale(c))
    }
}

/// Largest singular value.
pub fn operator_norm(a: &WeylOperator) -> f64 {
    if a.dim() == 0 {
        return 0.0;
    }
    a.matrix.clone().singular_values().iter().fold(0.0, |m: f64, &s| m.max(s))
}

/// A matrix with exactly one entry per row: row `i` holds `phases[i]` at `cols[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub cols: Vec<usize>,
    pub phases: Vec<Complex64>,
}

impl Monomial {
    pub fn to_operator(&self) -> WeylOperator {
        let d = self.cols.len();
        let mut m = DMatrix::zeros(d, d);
        for (row, (&col, &p)) in self.cols.iter().zip(&self.phases).enumerate() {
            m[(row, col)] = p;
        }
        WeylOperator::new(m)
    }

    /// `acc += c * self`.
    pub fn accumulate_into(&self, acc: &mut DMatrix<Complex64>, c: Complex64) {
        for (row, (&col, &p)) in self.cols.iter().zip(&self.phases).enumerate() {
            acc[(row, col)] += c * p;
        }
    }
}

/// One canonical pair of lattice generators carried by a clock-and-shift block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalPair {
    /// Axis index of the shift generator.
    pub first: usize,
    /// Axis index of the clock generator.
    pub second: usize,
    /// `sigma(g_first, g_second) = 2 pi twist / modulus`, `gcd(twist, modulus) = 1`.
    pub twist: i64,
    pub modulus: usize,
}

impl CanonicalPair {
    /// Row `j` of `D(a, b)`: column and exponent of `e^{i pi / N}`.
    ///
    /// `D(a, b) |j> = e^{i pi t (a b + 2 b j) / N} |j + a>`, so row `j + a`
    /// holds column `j`.
    fn entry(&self, a: i64, b: i64, col: usize) -> (usize, i64) {
        let n = self.modulus as i64;
        let row = (col as i64 + a).rem_euclid(n) as usize;
        let two_n = 2 * n;
        let ab = (a.rem_euclid(two_n) * b.rem_euclid(two_n)).rem_euclid(two_n);
        let bj = (2 * b.rem_euclid(two_n) * col as i64).rem_euclid(two_n);
        let expo = (self.twist.rem_euclid(two_n) * ((ab + bj) % two_n)).rem_euclid(two_n);
        (row, expo)
    }
}

/// Exact finite model of the Weyl relations for a bivector.
#[derive(Clone, Debug)]
pub struct FiniteWeylSystem {
    sigma: Bivector,
    /// Columns are the lattice generators in `V*`.
    generators: DMatrix<f64>,
    generators_inv: DMatrix<f64>,
    pairs: Vec<CanonicalPair>,
    kernel_axes: Vec<usize>,
    darboux: DarbouxFrame,
    dim: usize,
    /// Exact `2N`-th roots of unity per pair.
    roots: Vec<Vec<Complex64>>,
    canonical: Option<Arc<LatticeSpec>>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl FiniteWeylSystem {
    /// Canonical model: Darboux frame of `sigma`, generators
    /// `sqrt(2 pi / N) * (Darboux vector)` so every canonical pair has
    /// `sigma = 2 pi / N`, acting on `C^(N^r)`.
    pub fn new(sigma: &Bivector, n_model: usize) -> Result<Self> {
        if n_model < 2 {
            return Err(Error::BadInput(format!("model size N must be at least 2, got {n_model}")));
        }
        let frame = darboux_frame(sigma);
        let unit = (2.0 * PI / n_model as f64).sqrt();
        let lattice = LatticeSpec::uniform(sigma.dim(), 2 * n_model, 2.0 * PI / unit)?.with_frame(&frame.basis)?;
        let pairs = (0..frame.r)
            .map(|j| CanonicalPair { first: j, second: frame.r + j, twist: 1, modulus: n_model })
            .collect();
        let kernel_axes = (2 * frame.r..sigma.dim()).collect();
        let generators = lattice.dual_generators();
        let mut sys = Self::assemble(sigma.clone(), generators, pairs, kernel_axes, frame)?;
        sys.canonical = Some(Arc::new(lattice));
        Ok(sys)
    }

    /// Model carried by an existing lattice.
    ///
    /// Succeeds when, on the lattice generators, sigma pairs each axis with
    /// at most one other axis, every pairing value is `2 pi p / K` for an
    /// even integer `p` (so the Weyl phase is periodic on the lattice), and
    /// unpaired axes lie in the kernel.
    pub fn for_lattice(sigma: &Bivector, lattice: &LatticeSpec) -> Result<Self> {
        let n = lattice.n;
        if sigma.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: sigma.dim() });
        }
        let k = lattice.points_per_axis as i64;
        let generators = lattice.dual_generators();
        let form = sigma.in_basis(&generators) / (2.0 * PI);
        let scale = form.amax().max(1.0);
        let tol = 1e-9 * scale;
        let mut partner: Vec<Option<usize>> = vec![None; n];
        for a in 0..n {
            for b in 0..n {
                if a != b && form[(a, b)].abs() > tol {
                    if partner[a].is_some_and(|p| p != b) {
                        return Err(Error::LatticeMismatch(format!(
                            "axis {a} is paired with more than one other axis; no finite model on this lattice"
                        )));
                    }
                    partner[a] = Some(b);
                }
            }
        }
        let mut pairs = Vec::new();
        let mut kernel_axes = Vec::new();
        for a in 0..n {
            match partner[a] {
                None => kernel_axes.push(a),
                Some(b) if a < b => {
                    let p_real = form[(a, b)] * k as f64;
                    let p = p_real.round();
                    if (p_real - p).abs() > 1e-7 * p_real.abs().max(1.0) || (p as i64) % 2 != 0 {
                        return Err(Error::LatticeMismatch(format!(
                            "sigma(g_{a}, g_{b}) * K / 2pi = {p_real} is not an even integer; the Weyl phase is not periodic on this lattice"
                        )));
                    }
                    let p = p as i64;
                    let g = gcd(p, k);
                    pairs.push(CanonicalPair { first: a, second: b, twist: p / g, modulus: (k / g) as usize });
                }
                Some(_) => {}
            }
        }
        // Darboux frame read off the generators.
        let mut basis = DMatrix::zeros(n, n);
        let r = pairs.len();
        for (j, pair) in pairs.iter().enumerate() {
            let c = (pair.modulus as f64 / (2.0 * PI * pair.twist.abs() as f64)).sqrt();
            let sign = pair.twist.signum() as f64;
            basis.set_column(j, &(generators.column(pair.first) * c));
            basis.set_column(r + j, &(generators.column(pair.second) * (c * sign)));
        }
        for (j, &a) in kernel_axes.iter().enumerate() {
            basis.set_column(2 * r + j, &generators.column(a));
        }
        let frame = DarbouxFrame { basis, r };
        let residual = frame.residual(sigma);
        if residual > 1e-8 * scale {
            return Err(Error::LatticeMismatch(format!("lattice generators do not form a Darboux frame (residual {residual:e})")));
        }
        Self::assemble(sigma.clone(), generators, pairs, kernel_axes, frame)
    }

    fn assemble(
        sigma: Bivector,
        generators: DMatrix<f64>,
        pairs: Vec<CanonicalPair>,
        kernel_axes: Vec<usize>,
        darboux: DarbouxFrame,
    ) -> Result<Self> {
        let generators_inv = generators
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::BadInput("lattice generators are singular".into()))?;
        let dim = pairs.iter().map(|p| p.modulus).product();
        let roots = pairs
            .iter()
            .map(|p| {
                let two_n = 2 * p.modulus;
                (0..two_n).map(|e| Complex64::from_polar(1.0, PI * e as f64 / p.modulus as f64)).collect()
            })
            .collect();
        Ok(Self { sigma, generators, generators_inv, pairs, kernel_axes, darboux, dim, roots, canonical: None })
    }

    pub fn sigma(&self) -> &Bivector {
        &self.sigma
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> usize {
        self.pairs.len()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_axes.len()
    }

    pub fn kernel_axes(&self) -> &[usize] {
        &self.kernel_axes
    }

    pub fn pairs(&self) -> &[CanonicalPair] {
        &self.pairs
    }

    pub fn darboux(&self) -> &DarbouxFrame {
        &self.darboux
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    /// `(r, kernel_dim, hilbert dim)`; constant along a symplectic leaf.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.r(), self.kernel_dim(), self.dim)
    }

    /// The `2N`-periodic lattice this model was built on, for canonical models.
    pub fn canonical_lattice(&self) -> Option<Arc<LatticeSpec>> {
        self.canonical.clone()
    }

    /// Real covector for integer coordinates.
    pub fn covector(&self, k: &[i64]) -> Vec<f64> {
        let c = DVector::from_iterator(k.len(), k.iter().map(|&v| v as f64));
        (&self.generators * c).iter().copied().collect()
    }

    /// Integer coordinates of a covector, if it lies on the lattice.
    pub fn lattice_coords(&self, xi: &[f64]) -> Result<Vec<i64>> {
        if xi.len() != self.sigma.dim() {
            return Err(Error::DimensionMismatch { expected: self.sigma.dim(), found: xi.len() });
        }
        let c = &self.generators_inv * DVector::from_column_slice(xi);
        c.iter()
            .map(|&v| {
                let r = v.round();
                if (v - r).abs() <= 1e-8 * v.abs().max(1.0) {
                    Ok(r as i64)
                } else {
                    Err(Error::OffLattice(format!("coordinate {v} is not an integer")))
                }
            })
            .collect()
    }

    /// `sigma(xi, eta)` for integer coordinates, using the exact pair values.
    pub fn lattice_sigma(&self, k: &[i64], m: &[i64]) -> f64 {
        self.pairs
            .iter()
            .map(|p| {
                let s = k[p.first] * m[p.second] - k[p.second] * m[p.first];
                2.0 * PI * p.twist as f64 * s as f64 / p.modulus as f64
            })
            .sum()
    }

    /// `pi(xi)` in monomial form.
    pub fn monomial(&self, k: &[i64]) -> Monomial {
        let d = self.dim;
        let mut cols = Vec::with_capacity(d);
        let mut phases = Vec::with_capacity(d);
        for col in 0..d {
            // mixed-radix digits, first pair most significant
            let mut rest = col;
            let mut digits = vec![0usize; self.pairs.len()];
            for (i, p) in self.pairs.iter().enumerate().rev() {
                digits[i] = rest % p.modulus;
                rest /= p.modulus;
            }
            let mut row = 0usize;
            let mut phase = ONE;
            for (i, p) in self.pairs.iter().enumerate() {
                let (r, e) = p.entry(k[p.first], k[p.second], digits[i]);
                row = row * p.modulus + r;
                phase *= self.roots[i][e as usize];
            }
            cols.push(row);
            phases.push(phase);
        }
        // `cols[col] = row` so far; invert to one entry per row.
        let mut row_cols = vec![0usize; d];
        let mut row_phases = vec![ZERO; d];
        for (col, (&row, &ph)) in cols.iter().zip(&phases).enumerate() {
            row_cols[row] = col;
            row_phases[row] = ph;
        }
        Monomial { cols: row_cols, phases: row_phases }
    }

    /// `pi_sigma(xi)` for integer lattice coordinates (kernel coordinates act trivially).
    pub fn weyl_unitary(&self, k: &[i64]) -> Result<WeylOperator> {
        if k.len() != self.sigma.dim() {
            return Err(Error::DimensionMismatch { expected: self.sigma.dim(), found: k.len() });
        }
        Ok(self.monomial(k).to_operator())
    }

    /// `pi_sigma(xi)` for a real covector on the model lattice.
    pub fn weyl_unitary_at(&self, xi: &[f64]) -> Result<WeylOperator> {
        let k = self.lattice_coords(xi)?;
        self.weyl_unitary(&k)
    }

    /// A weight `v` with `<g_a, v> = pairings[a]` for every axis `a`.
    pub fn weight_with_pairings(&self, pairings: &[f64]) -> HighestWeight {
        let c = DVector::from_column_slice(pairings);
        HighestWeight::new((self.generators_inv.transpose() * c).iter().copied().collect())
    }

    /// All weights whose kernel character is periodic with period `k`, one per
    /// class: `<g_a, v> = 2 pi j_a / k` on kernel axes, zero elsewhere.
    pub fn periodic_weights(&self, k: usize) -> Vec<HighestWeight> {
        let kd = self.kernel_axes.len();
        let count = k.pow(kd as u32);
        (0..count)
            .map(|mut idx| {
                let mut pairings = vec![0.0; self.sigma.dim()];
                for &a in self.kernel_axes.iter().rev() {
                    pairings[a] = 2.0 * PI * (idx % k) as f64 / k as f64;
                    idx /= k;
                }
                self.weight_with_pairings(&pairings)
            })
            .collect()
    }

    /// Checks that `lattice` has this model's generators and a compatible period.
    pub fn check_lattice(&self, lattice: &LatticeSpec) -> Result<()> {
        if lattice.n != self.sigma.dim() {
            return Err(Error::LatticeMismatch(format!(
                "lattice dimension {} differs from model dimension {}",
                lattice.n,
                self.sigma.dim()
            )));
        }
        let diff = (lattice.dual_generators() - &self.generators).amax();
        if diff > 1e-9 * self.generators.amax().max(1.0) {
            return Err(Error::LatticeMismatch(format!("dual lattice generators differ from the model's by {diff:e}")));
        }
        let k = lattice.points_per_axis as i64;
        for p in &self.pairs {
            let n = p.modulus as i64;
            if k % n != 0 || (p.twist * k).rem_euclid(2 * n) != 0 {
                return Err(Error::LatticeMismatch(format!(
                    "lattice period {k} is incompatible with a pair of modulus {n}; use a multiple of {}",
                    2 * n
                )));
            }
        }
        Ok(())
    }
}

/// A unitary representation `xi -> pi(xi)` of the Heisenberg group.
pub trait WeylSystem: Sync {
    fn dim(&self) -> usize;
    fn sigma(&self) -> &Bivector;
    fn operator_at(&self, xi: &[f64]) -> Result<WeylOperator>;
}

impl WeylSystem for FiniteWeylSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sigma(&self) -> &Bivector {
        &self.sigma
    }

    fn operator_at(&self, xi: &[f64]) -> Result<WeylOperator> {
        self.weyl_unitary_at(xi)
    }
}

/// Wraps a closure as a Weyl system; the relation is only spot-checked on use.
pub struct FnWeylSystem<F> {
    pub sigma: Bivector,
    pub dim: usize,
    pub map: F,
}

impl<F> WeylSystem for FnWeylSystem<F>
where
    F: Fn(&[f64]) -> Result<WeylOperator> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn sigma(&self) -> &Bivector {
        &self.sigma
    }

    fn operator_at(&self, xi: &[f64]) -> Result<WeylOperator> {
        (self.map)(xi)
    }
}

/// `W_sigma f = sum_xi f^(xi) pi_sigma(xi) |cell_V*|` on the finite model.
pub fn weyl_quantize(sys: &FiniteWeylSystem, f: &PhaseSpaceFunction) -> Result<WeylOperator> {
    weyl_quantize_with(sys, f, Exec::default())
}

pub fn weyl_quantize_with(sys: &FiniteWeylSystem, f: &PhaseSpaceFunction, exec: Exec) -> Result<WeylOperator> {
    let lattice = f.lattice();
    sys.check_lattice(lattice)?;
    let dual = f.dual_values();
    let w = lattice.dual_cell();
    let d = sys.dim();
    // Split the dual lattice into chunks, accumulate each, then sum in order.
    let chunks = 64.min(lattice.len()).max(1);
    let per = lattice.len().div_ceil(chunks);
    let partial = map_indexed(chunks, exec, |c| {
        let mut acc = DMatrix::zeros(d, d);
        let end = ((c + 1) * per).min(lattice.len());
        for (flat, &v) in dual.iter().enumerate().take(end).skip(c * per) {
            if v == ZERO {
                continue;
            }
            sys.monomial(&lattice.coords(flat)).accumulate_into(&mut acc, v * w);
        }
        acc
    });
    let matrix = partial.into_iter().fold(DMatrix::zeros(d, d), |a, b| a + b);
    Ok(WeylOperator::new(matrix))
}

/// Largest violation of the Weyl relation over pairs of lattice generators
/// (and their sums), using the sigma the system reports.
pub fn weyl_relation_defect(pi: &dyn WeylSystem, lattice: &LatticeSpec) -> Result<f64> {
    let gens = lattice.dual_generators();
    let n = lattice.n;
    let mut probes: Vec<Vec<f64>> = (0..n).map(|a| gens.column(a).iter().copied().collect()).collect();
    for a in 0..n {
        for b in (a + 1)..n {
            probes.push(gens.column(a).iter().zip(gens.column(b).iter()).map(|(x, y)| x + y).collect());
        }
    }
    let mut worst = 0.0_f64;
    let id = pi.operator_at(&vec![0.0; n])?;
    worst = worst.max(id.max_abs_diff(&WeylOperator::identity(pi.dim())));
    for xi in &probes {
        for eta in &probes {
            let lhs = pi.operator_at(xi)?.mul(&pi.operator_at(eta)?);
            let sum: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a + b).collect();
            let rhs = pi.operator_at(&sum)?.scale(Complex64::from_polar(1.0, -0.5 * pi.sigma().pair(xi, eta)));
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
    }
    Ok(worst)
}

/// `W_pi f = sum_xi f^(xi) pi(xi) |cell_V*|` for any Weyl system.
pub fn weyl_quantize_rep(pi: &dyn WeylSystem, f: &PhaseSpaceFunction) -> Result<WeylOperator> {
    let lattice = f.lattice();
    if pi.sigma().dim() != lattice.n {
        return Err(Error::DimensionMismatch { expected: lattice.n, found: pi.sigma().dim() });
    }
    let defect = weyl_relation_defect(pi, lattice)?;
    if defect > WEYL_SPOT_TOL {
        return Err(Error::NotAWeylSystem { defect });
    }
    let dual = f.dual_values();
    let w = lattice.dual_cell();
    let mut acc = WeylOperator::zeros(pi.dim());
    for (flat, xi) in lattice.dual_points().iter().enumerate() {
        if dual[flat] == ZERO {
            continue;
        }
        acc.matrix += pi.operator_at(xi)?.matrix * (dual[flat] * w);
    }
    Ok(acc)
}

/// A highest weight `v` in `V`, meaningful modulo `(ker sigma)^perp`.
#[derive(Clone, Debug, PartialEq)]
pub struct HighestWeight {
    pub v: Vec<f64>,
}

impl HighestWeight {
    pub fn new(v: Vec<f64>) -> Self {
        Self { v }
    }

    pub fn zero(n: usize) -> Self {
        Self { v: vec![0.0; n] }
    }

    /// `true` when `v - other` pairs to zero with every kernel vector.
    pub fn same_class(&self, other: &HighestWeight, split: &KernelSplit, tol: f64) -> bool {
        let diff = DVector::from_iterator(self.v.len(), self.v.iter().zip(&other.v).map(|(a, b)| a - b));
        (split.kernel_basis.transpose() * diff).amax() <= tol
    }
}

/// The irreducible representation `pi_[v](xi + eta) = e^{i<xi, v>} pi_sigma'(eta)`
/// for `xi` in the kernel and `eta` in the complement spanned by the model's pairs.
#[derive(Clone, Debug)]
pub struct HighestWeightRep {
    system: FiniteWeylSystem,
    weight: HighestWeight,
    /// `<g_a, v>` for each kernel axis `a`.
    kernel_pairings: Vec<(usize, f64)>,
}

impl HighestWeightRep {
    pub fn system(&self) -> &FiniteWeylSystem {
        &self.system
    }

    pub fn weight(&self) -> &HighestWeight {
        &self.weight
    }

    /// Value of the kernel character at integer coordinates.
    pub fn character(&self, k: &[i64]) -> Complex64 {
        let phase: f64 = self.kernel_pairings.iter().map(|&(a, p)| k[a] as f64 * p).sum();
        Complex64::from_polar(1.0, phase)
    }

    pub fn operator(&self, k: &[i64]) -> Result<WeylOperator> {
        Ok(self.system.weyl_unitary(k)?.scale(self.character(k)))
    }
}

impl HighestWeightRep {
    /// `true` when every kernel pairing is a multiple of `2 pi / K`.
    pub fn is_periodic_on(&self, lattice: &LatticeSpec) -> bool {
        let step = 2.0 * PI / lattice.points_per_axis as f64;
        self.kernel_pairings.iter().all(|&(_, p)| {
            let q = p / step;
            (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
        })
    }
}

impl WeylSystem for HighestWeightRep {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn sigma(&self) -> &Bivector {
        self.system.sigma()
    }

    fn operator_at(&self, xi: &[f64]) -> Result<WeylOperator> {
        let k = self.system.lattice_coords(xi)?;
        self.operator(&k)
    }
}

/// Builds `pi_[v]` on the finite model `sys`.
pub fn highest_weight_rep(split: &KernelSplit, sys: &FiniteWeylSystem, v: &HighestWeight) -> Result<HighestWeightRep> {
    let n = sys.sigma().dim();
    if v.v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.v.len() });
    }
    if split.kernel_dim() != sys.kernel_dim() {
        return Err(Error::DimensionMismatch { expected: sys.kernel_dim(), found: split.kernel_dim() });
    }
    let kernel_pairings = sys
        .kernel_axes()
        .iter()
        .map(|&a| (a, sys.generators().column(a).iter().zip(&v.v).map(|(x, y)| x * y).sum()))
        .collect();
    Ok(HighestWeightRep { system: sys.clone(), weight: v.clone(), kernel_pairings })
}

/// `W_[v] f` for a highest-weight representation, accumulated exactly.
///
/// The sampled algebra is periodic, so the result is multiplicative only when
/// the kernel character is periodic on the lattice of `f`; this is checked.
pub fn quantize_highest_weight(rep: &HighestWeightRep, f: &PhaseSpaceFunction) -> Result<WeylOperator> {
    let lattice = f.lattice();
    let sys = rep.system();
    sys.check_lattice(lattice)?;
    if !rep.is_periodic_on(lattice) {
        return Err(Error::LatticeMismatch(
            "highest weight pairs with a kernel generator outside (2 pi / K) Z; its character is not periodic on this lattice".into(),
        ));
    }
    let dual = f.dual_values();
    let w = lattice.dual_cell();
    let mut acc = DMatrix::zeros(sys.dim(), sys.dim());
    for (flat, &c) in dual.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let k = lattice.coords(flat);
        sys.monomial(&k).accumulate_into(&mut acc, c * w * rep.character(&k));
    }
    Ok(WeylOperator::new(acc))
}

/// Basis of the commutant `{X : A X = X A for all A in ops}`, from the null
/// space of the stacked commutator map.
pub fn commutant_basis(ops: &[WeylOperator], rel_tol: f64) -> Vec<WeylOperator> {
    let Some(first) = ops.first() else { return Vec::new() };
    let d = first.dim();
    let d2 = d * d;
    let mut stacked = DMatrix::<Complex64>::zeros(ops.len() * d2, d2);
    // vec(X) row-major: index (i, j) -> i * d + j
    for (o, a) in ops.iter().enumerate() {
        let base = o * d2;
        for i in 0..d {
            for j in 0..d {
                let row = base + i * d + j;
                for k in 0..d {
                    // (A X)_{ij} = sum_k A_ik X_kj
                    stacked[(row, k * d + j)] += a.matrix[(i, k)];
                    // (X A)_{ij} = sum_k X_ik A_kj
                    stacked[(row, i * d + k)] -= a.matrix[(k, j)];
                }
            }
        }
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s)).max(1.0);
    let mut out = Vec::new();
    // Right singular vectors with zero singular value; nalgebra only returns
    // min(rows, cols) of them, which is all d2 here since rows >= cols.
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s <= rel_tol * max {
            let row = v_t.row(idx);
            out.push(WeylOperator::new(DMatrix::from_fn(d, d, |i, j| row[i * d + j].conj())));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kernel_split, standard_form};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_at_origin_and_inverse() {
        let sys = FiniteWeylSystem::new(&standard_form(2, 1).unwrap(), 4).unwrap();
        assert_eq!(sys.weyl_unitary(&[0, 0]).unwrap(), WeylOperator::identity(4));
        let a = sys.weyl_unitary(&[3, -5]).unwrap();
        let b = sys.weyl_unitary(&[-3, 5]).unwrap();
        assert!(a.mul(&b).max_abs_diff(&WeylOperator::identity(4)) < 1e-15);
        assert!(a.is_unitary(1e-14));
    }

    #[test]
    fn weyl_phase_for_n4() {
        // Brute force: explicit 4x4 clock and shift products.
        let sys = FiniteWeylSystem::new(&standard_form(2, 1).unwrap(), 4).unwrap();
        let x = sys.weyl_unitary(&[1, 0]).unwrap();
        let y = sys.weyl_unitary(&[0, 1]).unwrap();
        let xy = sys.weyl_unitary(&[1, 1]).unwrap();
        let ratio = x.mul(&y).mul(&xy.adjoint());
        let expect = WeylOperator::identity(4).scale(Complex64::from_polar(1.0, -PI / 4.0));
        assert!(ratio.max_abs_diff(&expect) < 1e-15);
        assert!((sys.lattice_sigma(&[1, 0], &[0, 1]) - 2.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn off_lattice_covector() {
        let sys = FiniteWeylSystem::new(&standard_form(2, 1).unwrap(), 3).unwrap();
        assert!(matches!(sys.weyl_unitary_at(&[0.1, 0.0]), Err(Error::OffLattice(_))));
        let xi = sys.covector(&[2, -1]);
        assert_eq!(sys.weyl_unitary_at(&xi).unwrap(), sys.weyl_unitary(&[2, -1]).unwrap());
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&WeylOperator::identity(5)) - 1.0).abs() < 1e-14);
        let sys = FiniteWeylSystem::new(&standard_form(4, 2).unwrap(), 3).unwrap();
        assert!((operator_norm(&sys.weyl_unitary(&[1, 2, 0, -1]).unwrap()) - 1.0).abs() < 1e-13);
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(3.0, 0.0);
        m[(1, 1)] = c(0.0, -4.0);
        assert!((operator_norm(&WeylOperator::new(m)) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn quantize_constant_and_character() {
        let sys = FiniteWeylSystem::new(&standard_form(2, 1).unwrap(), 5).unwrap();
        let lat = sys.canonical_lattice().unwrap();
        let one = PhaseSpaceFunction::constant(lat.clone(), c(1.0, 0.0));
        assert!(weyl_quantize(&sys, &one).unwrap().max_abs_diff(&WeylOperator::identity(5)) < 1e-12);
        let e = PhaseSpaceFunction::character(lat.clone(), &[2, -3]).unwrap();
        assert!(weyl_quantize(&sys, &e).unwrap().max_abs_diff(&sys.weyl_unitary(&[2, -3]).unwrap()) < 1e-12);
    }

    #[test]
    fn quantize_rejects_foreign_lattice() {
        let sys = FiniteWeylSystem::new(&standard_form(2, 1).unwrap(), 3).unwrap();
        let lat = Arc::new(LatticeSpec::uniform(2, 6, 3.0).unwrap());
        let f = PhaseSpaceFunction::zero(lat);
        assert!(matches!(weyl_quantize(&sys, &f), Err(Error::LatticeMismatch(_))));
        let lat = Arc::new(LatticeSpec::uniform(2, 3, (6.0 * PI).sqrt()).unwrap());
        let f = PhaseSpaceFunction::zero(lat);
        assert!(matches!(weyl_quantize(&sys, &f), Err(Error::LatticeMismatch(_))));
    }

    #[test]
    fn for_lattice_recovers_canonical_model() {
        let sigma = Bivector::from_rows(&[vec![0.0, 1.5, 0.2], vec![-1.5, 0.0, -0.7], vec![-0.2, 0.7, 0.0]]).unwrap();
        let sys = FiniteWeylSystem::new(&sigma, 3).unwrap();
        let lat = sys.canonical_lattice().unwrap();
        let again = FiniteWeylSystem::for_lattice(&sigma, &lat).unwrap();
        assert_eq!(again.shape(), sys.shape());
        assert_eq!(again.pairs(), sys.pairs());
        assert!(again.darboux().residual(&sigma) < 1e-10);
    }

    #[test]
    fn for_lattice_handles_scaled_and_negated_forms() {
        let lat = LatticeSpec::uniform(2, 12, (12.0 * PI).sqrt()).unwrap();
        // Delta^2 = 2 pi / 6, so sigma = -2 J gives pair value -2 pi / 3.
        let sigma = standard_form(2, 1).unwrap().scaled(-2.0);
        let sys = FiniteWeylSystem::for_lattice(&sigma, &lat).unwrap();
        assert_eq!(sys.pairs()[0].modulus, 3);
        assert_eq!(sys.pairs()[0].twist, -1);
        let f = PhaseSpaceFunction::character(Arc::new(lat.clone()), &[1, 1]).unwrap();
        let w = weyl_quantize(&sys, &f).unwrap();
        assert!(w.is_unitary(1e-12));
        assert!(sys.weyl_unitary(&[0, 0]).unwrap().max_abs_diff(&WeylOperator::identity(3)) == 0.0);

        let zero = FiniteWeylSystem::for_lattice(&Bivector::zero(2), &lat).unwrap();
        assert_eq!(zero.shape(), (0, 2, 1));

        let bad = standard_form(2, 1).unwrap().scaled(0.37);
        assert!(matches!(FiniteWeylSystem::for_lattice(&bad, &lat), Err(Error::LatticeMismatch(_))));
    }

    #[test]
    fn involution_and_rep_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = FiniteWeylSystem::new(&standard_form(2, 1).unwrap(), 3).unwrap();
        let lat = sys.canonical_lattice().unwrap();
        let values = (0..lat.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f = PhaseSpaceFunction::from_values(lat, values).unwrap();
        let w = weyl_quantize(&sys, &f).unwrap();
        let wc = weyl_quantize(&sys, &f.conj()).unwrap();
        assert!(wc.max_abs_diff(&w.adjoint()) < 1e-12);
        let wr = weyl_quantize_rep(&sys, &f).unwrap();
        assert!(wr.max_abs_diff(&w) < 1e-12);
    }

    #[test]
    fn rejects_fake_weyl_system() {
        let sigma = standard_form(2, 1).unwrap();
        let sys = FiniteWeylSystem::new(&sigma, 3).unwrap();
        let lat = sys.canonical_lattice().unwrap();
        let fake = FnWeylSystem { sigma: sigma.clone(), dim: 3, map: |_: &[f64]| Ok(WeylOperator::identity(3)) };
        let f = PhaseSpaceFunction::constant(lat, c(1.0, 0.0));
        assert!(matches!(weyl_quantize_rep(&fake, &f), Err(Error::NotAWeylSystem { .. })));
    }

    #[test]
    fn highest_weight_examples() {
        let sigma = standard_form(3, 1).unwrap();
        let split = kernel_split(&sigma);
        let sys = FiniteWeylSystem::new(&sigma, 3).unwrap();
        let zero = highest_weight_rep(&split, &sys, &HighestWeight::zero(3)).unwrap();
        // v in the annihilator is in the class of 0
        let ann = HighestWeight::new(split.annihilator_basis.column(0).iter().map(|x| x * 2.5).collect());
        assert!(ann.same_class(&HighestWeight::zero(3), &split, 1e-12));
        let same = highest_weight_rep(&split, &sys, &ann).unwrap();
        for k in [[1, 0, 0], [0, 1, 2], [2, 2, -1]] {
            assert!(zero.operator(&k).unwrap().max_abs_diff(&same.operator(&k).unwrap()) < 1e-12);
        }
        // pure kernel direction: scalar e^{i<xi, v>}
        let v = HighestWeight::new(vec![0.0, 0.0, 0.8]);
        let rep = highest_weight_rep(&split, &sys, &v).unwrap();
        let xi = sys.covector(&[0, 0, 1]);
        let expect = Complex64::from_polar(1.0, xi[2] * 0.8);
        assert!(rep.operator(&[0, 0, 1]).unwrap().max_abs_diff(&WeylOperator::identity(3).scale(expect)) < 1e-14);
        // different classes separate on the kernel generator
        let diff = rep.operator(&[0, 0, 1]).unwrap().max_abs_diff(&zero.operator(&[0, 0, 1]).unwrap());
        assert!(diff > 0.1);
    }

    #[test]
    fn commutant_of_irreducible_model_is_scalar() {
        let sys = FiniteWeylSystem::new(&standard_form(2, 1).unwrap(), 4).unwrap();
        let ops = vec![sys.weyl_unitary(&[1, 0]).unwrap(), sys.weyl_unitary(&[0, 1]).unwrap()];
        let basis = commutant_basis(&ops, 1e-10);
        assert_eq!(basis.len(), 1);
        assert!(basis[0].distance_from_scalar() < 1e-10);
        // a reducible family has a bigger commutant
        let ops = vec![sys.weyl_unitary(&[2, 0]).unwrap()];
        assert!(commutant_basis(&ops, 1e-10).len() > 1);
    }
}
