//! The Weyl-Moyal star product as a twisted convolution on the dual lattice,
//! and the three norms (sup, L1-check, C*-estimate).
//!
//! On the lattice the product is
//!
//! ```text
//!   (f * g)^(xi) = |cell_V*| sum_eta f^(eta) g^(xi - eta) e^{(i/2) sigma(xi, eta)}
//! ```
//!
//! with `xi` and `eta` taken at their centered representatives and
//! `xi - eta` wrapped periodically. The phase equals
//! `e^{-(i/2) sigma(eta, xi - eta)}`, which is exactly the one that makes
//! Weyl quantization multiplicative. When the lattice carries a finite Weyl
//! model (`sigma` of lattice generators in `(2 pi / N) Z` with period
//! `2N`), the phase is periodic and the product is associative to rounding.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{centered_dft, LatticeSpec, PhaseSpaceFunction, Sign};
use crate::linalg::{Bivector, KernelSplit};
use crate::par::{map_indexed, Exec};
use crate::weyl::{operator_norm, weyl_quantize, FiniteWeylSystem};

/// Tolerance used to classify lattice axes as kernel or symplectic.
const ALIGN_TOL: f64 = 1e-9;

fn check_inputs(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction, sigma: &Bivector) -> Result<()> {
    f.check_same_lattice(g)?;
    if sigma.dim() != f.lattice().n {
        return Err(Error::DimensionMismatch { expected: f.lattice().n, found: sigma.dim() });
    }
    Ok(())
}

/// `sigma` evaluated on pairs of dual lattice generators.
fn lattice_form(lattice: &LatticeSpec, sigma: &Bivector) -> DMatrix<f64> {
    sigma.in_basis(&lattice.dual_generators())
}

/// Per-axis index tables shared by the blocked kernels.
struct Tables {
    k: usize,
    n: usize,
    strides: Vec<usize>,
    centered: Vec<f64>,
}

impl Tables {
    fn new(lattice: &LatticeSpec) -> Self {
        let k = lattice.points_per_axis;
        let n = lattice.n;
        let strides = (0..n).map(|a| k.pow((n - 1 - a) as u32)).collect();
        let centered = (0..k).map(|i| lattice.centered(i) as f64).collect();
        Self { k, n, strides, centered }
    }
}

/// Twisted convolution on an arbitrary set of axes with the given form.
///
/// `form` is `sigma` on generator pairs of the lattice (an `n x n` matrix;
/// rows and columns for axes outside the convolution must vanish when used
/// on a sub-block). The outer sum over output indices runs in parallel.
fn twisted_convolution_blocked(
    tables: &Tables,
    form: &DMatrix<f64>,
    fd: &[Complex64],
    gd: &[Complex64],
    weight: f64,
    exec: Exec,
) -> Vec<Complex64> {
    let Tables { k, n, ref strides, ref centered } = *tables;
    let len = fd.len();
    // Only terms with nonzero f^ contribute.
    let support: Vec<usize> = (0..len).filter(|&i| fd[i] != Complex64::new(0.0, 0.0)).collect();
    let eta_digits: Vec<Vec<usize>> = support
        .iter()
        .map(|&flat| {
            let mut out = vec![0; n];
            let mut rest = flat;
            for a in (0..n).rev() {
                out[a] = rest % k;
                rest /= k;
            }
            out
        })
        .collect();

    map_indexed(len, exec, |xi_flat| {
        let mut xi = vec![0usize; n];
        let mut rest = xi_flat;
        for a in (0..n).rev() {
            xi[a] = rest % k;
            rest /= k;
        }
        // sigma(xi, eta) = u . c_eta with u = form^T c_xi; phase table per axis.
        let phase_tables: Vec<Vec<Complex64>> = (0..n)
            .map(|b| {
                let u: f64 = (0..n).map(|a| form[(a, b)] * centered[xi[a]]).sum();
                if u == 0.0 {
                    Vec::new()
                } else {
                    centered.iter().map(|&c| Complex64::from_polar(1.0, 0.5 * u * c)).collect()
                }
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (&eta_flat, digits) in support.iter().zip(&eta_digits) {
            let mut diff = 0usize;
            let mut phase = Complex64::new(1.0, 0.0);
            for a in 0..n {
                let d = if xi[a] >= digits[a] { xi[a] - digits[a] } else { xi[a] + k - digits[a] };
                // index difference of raw indices equals the wrapped centered difference
                // up to the offset, which we restore here
                let d = (d + k / 2) % k;
                diff += d * strides[a];
                if !phase_tables[a].is_empty() {
                    phase *= phase_tables[a][digits[a]];
                }
            }
            acc += fd[eta_flat] * gd[diff] * phase;
        }
        acc * weight
    })
}

/// Star product through the blocked twisted convolution.
pub fn star(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction, sigma: &Bivector) -> Result<PhaseSpaceFunction> {
    star_with(f, g, sigma, Exec::default())
}

/// [`star`] with an explicit execution mode.
pub fn star_with(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction, sigma: &Bivector, exec: Exec) -> Result<PhaseSpaceFunction> {
    check_inputs(f, g, sigma)?;
    let lattice = f.lattice();
    let form = lattice_form(lattice, sigma);
    let tables = Tables::new(lattice);
    let t = twisted_convolution_blocked(&tables, &form, f.dual_values(), g.dual_values(), lattice.dual_cell(), exec);
    PhaseSpaceFunction::from_dual(lattice.clone(), t)
}

/// Reference star product: the double sum evaluated term by term with real
/// covectors and a fresh exponential per term. `O(K^2n)`; used to pin the
/// blocked path.
pub fn star_reference(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction, sigma: &Bivector) -> Result<PhaseSpaceFunction> {
    check_inputs(f, g, sigma)?;
    let lattice = f.lattice();
    let points = lattice.dual_points();
    let fd = f.dual_values();
    let gd = g.dual_values();
    let mut out = vec![Complex64::new(0.0, 0.0); lattice.len()];
    for (xi_flat, xi) in points.iter().enumerate() {
        let xi_c = lattice.coords(xi_flat);
        let mut acc = Complex64::new(0.0, 0.0);
        for (eta_flat, eta) in points.iter().enumerate() {
            let eta_c = lattice.coords(eta_flat);
            let diff: Vec<i64> = xi_c.iter().zip(&eta_c).map(|(a, b)| a - b).collect();
            let mu = lattice.flat_from_coords(&diff);
            acc += fd[eta_flat] * gd[mu] * Complex64::from_polar(1.0, 0.5 * sigma.pair(xi, eta));
        }
        out[xi_flat] = acc * lattice.dual_cell();
    }
    PhaseSpaceFunction::from_dual(lattice.clone(), out)
}

/// Which lattice axes are kernel directions and how sigma pairs the rest,
/// read off from a kernel split.
struct Alignment {
    kernel_axes: Vec<usize>,
    form: DMatrix<f64>,
}

fn align(lattice: &LatticeSpec, split: &KernelSplit) -> Result<Alignment> {
    let n = lattice.n;
    if split.kernel_basis.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: split.kernel_basis.nrows() });
    }
    let gens = lattice.dual_generators();
    let two_r = split.complement_basis.ncols();
    let mut kernel_axes = Vec::new();
    let mut sym_coords = vec![vec![0.0; two_r]; n];
    for (a, slot) in sym_coords.iter_mut().enumerate() {
        let col: Vec<f64> = gens.column(a).iter().copied().collect();
        let (comp, kern) = split
            .coordinates(&col)
            .ok_or_else(|| Error::LatticeMismatch("kernel split basis is singular".into()))?;
        let scale = col.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
        let comp_size = comp.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let kern_size = kern.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if comp_size <= ALIGN_TOL * scale {
            kernel_axes.push(a);
        } else if kern_size <= ALIGN_TOL * scale {
            *slot = comp;
        } else {
            return Err(Error::LatticeMismatch(format!(
                "lattice axis {a} mixes kernel and symplectic directions; use a lattice aligned with the Darboux frame"
            )));
        }
    }
    if kernel_axes.len() != split.kernel_dim() {
        return Err(Error::LatticeMismatch(format!(
            "lattice has {} kernel axes but the kernel has dimension {}",
            kernel_axes.len(),
            split.kernel_dim()
        )));
    }
    let form = DMatrix::from_fn(n, n, |a, b| {
        let (ca, cb) = (&sym_coords[a], &sym_coords[b]);
        let mut acc = 0.0;
        for (i, &x) in ca.iter().enumerate() {
            for (j, &y) in cb.iter().enumerate() {
                acc += x * split.restricted[(i, j)] * y;
            }
        }
        acc
    });
    Ok(Alignment { kernel_axes, form })
}

/// Star product through the kernel factorization: Moyal product on the
/// symplectic axes for every sample of the kernel axes, pointwise product
/// along the kernel axes.
///
/// The lattice must be aligned with the split: every axis generator lies
/// either in `ker sigma` or in the complement `V'`.
pub fn star_degenerate_factor(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction, split: &KernelSplit) -> Result<PhaseSpaceFunction> {
    f.check_same_lattice(g)?;
    let lattice = f.lattice();
    let Alignment { kernel_axes, form } = align(lattice, split)?;
    let (k, n) = (lattice.points_per_axis, lattice.n);

    // Mixed representation: dual on symplectic axes, (unweighted) primal on kernel axes.
    let mut fm = f.dual_values().to_vec();
    let mut gm = g.dual_values().to_vec();
    centered_dft(&mut fm, k, n, &kernel_axes, Sign::Plus);
    centered_dft(&mut gm, k, n, &kernel_axes, Sign::Plus);

    let sym_axes: Vec<usize> = (0..n).filter(|a| !kernel_axes.contains(a)).collect();
    let kernel_count = k.pow(kernel_axes.len() as u32);
    let sym_count = k.pow(sym_axes.len() as u32);
    let sub_form = DMatrix::from_fn(sym_axes.len(), sym_axes.len(), |i, j| form[(sym_axes[i], sym_axes[j])]);
    let sub_lattice = LatticeSpec::uniform(sym_axes.len().max(1), k, 1.0)?;
    let tables = Tables::new(&sub_lattice);

    // Flat index in the full array for (symplectic index, kernel index).
    let place = |s: usize, q: usize| {
        let mut digits = vec![0usize; n];
        let mut rest = s;
        for &a in sym_axes.iter().rev() {
            digits[a] = rest % k;
            rest /= k;
        }
        let mut rest = q;
        for &a in kernel_axes.iter().rev() {
            digits[a] = rest % k;
            rest /= k;
        }
        digits.iter().fold(0, |acc, &d| acc * k + d)
    };

    let mut mixed = vec![Complex64::new(0.0, 0.0); lattice.len()];
    for q in 0..kernel_count {
        let fs: Vec<Complex64> = (0..sym_count).map(|s| fm[place(s, q)]).collect();
        let gs: Vec<Complex64> = (0..sym_count).map(|s| gm[place(s, q)]).collect();
        let ts = if sym_axes.is_empty() {
            vec![fs[0] * gs[0]]
        } else {
            twisted_convolution_blocked(&tables, &sub_form, &fs, &gs, 1.0, Exec::Sequential)
        };
        for (s, v) in ts.into_iter().enumerate() {
            mixed[place(s, q)] = v;
        }
    }
    centered_dft(&mut mixed, k, n, &kernel_axes, Sign::Minus);
    let weight = lattice.dual_cell() / kernel_count as f64;
    mixed.iter_mut().for_each(|v| *v *= weight);
    PhaseSpaceFunction::from_dual(Arc::clone(lattice), mixed)
}

/// `sum |f^(xi)| |cell_V*|`.
pub fn l1check_norm(f: &PhaseSpaceFunction) -> f64 {
    f.dual_values().iter().map(|v| v.norm()).sum::<f64>() * f.lattice().dual_cell()
}

/// `max |f(x)|` over the lattice.
pub fn sup_norm(f: &PhaseSpaceFunction) -> f64 {
    f.max_abs()
}

/// Operator norm of the Weyl quantization of `f` in the finite model.
pub fn cstar_norm_estimate(f: &PhaseSpaceFunction, sys: &FiniteWeylSystem) -> Result<f64> {
    Ok(operator_norm(&weyl_quantize(sys, f)?))
}
