//! JSON document shapes for bivectors, frames, functions, operators and bundles.
//!
//! The types here are plain serde mirrors; conversion to the numeric types
//! validates and reports the offending field by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::{BaseSample, PoissonBundleSample, SectionField};
use crate::error::{Error, Result};
use crate::lattice::{GaussianSpec, LatticeSpec, PhaseSpaceFunction};
use crate::linalg::{Bivector, DarbouxFrame};
use crate::weyl::{FiniteWeylSystem, WeylOperator};

fn matrix_from_rows(field: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::BadInput(format!("`{field}` must be a {n}x{n} matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::BadInput(format!("`{field}` has non-finite entries")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivectorDoc {
    pub n: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl BivectorDoc {
    pub fn from_bivector(s: &Bivector) -> Self {
        Self { n: s.dim(), matrix: s.rows() }
    }

    pub fn to_bivector(&self) -> Result<Bivector> {
        Bivector::new(matrix_from_rows("matrix", &self.matrix, self.n)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarbouxFrameDoc {
    pub r: usize,
    pub basis: Vec<Vec<f64>>,
}

impl DarbouxFrameDoc {
    pub fn from_frame(f: &DarbouxFrame) -> Self {
        Self { r: f.r, basis: f.rows() }
    }

    pub fn to_frame(&self) -> Result<DarbouxFrame> {
        let n = self.basis.len();
        Ok(DarbouxFrame { basis: matrix_from_rows("basis", &self.basis, n)?, r: self.r })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Gaussian,
}

/// A closed-form function; the lattice may be supplied by the caller instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDoc {
    #[serde(rename = "type")]
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    #[serde(default)]
    pub momentum: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplesDoc {
    pub lattice: LatticeSpec,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionDoc {
    Generator(GeneratorDoc),
    Samples(SamplesDoc),
}

impl FunctionDoc {
    pub fn from_function(f: &PhaseSpaceFunction) -> Self {
        FunctionDoc::Samples(SamplesDoc {
            lattice: f.lattice().as_ref().clone(),
            re: f.values().iter().map(|z| z.re).collect(),
            im: f.values().iter().map(|z| z.im).collect(),
        })
    }

    /// The document's own lattice, if it carries one.
    pub fn lattice(&self) -> Option<&LatticeSpec> {
        match self {
            FunctionDoc::Generator(g) => g.lattice.as_ref(),
            FunctionDoc::Samples(s) => Some(&s.lattice),
        }
    }

    /// Builds the function, sampling generators on `fallback` when the
    /// document names no lattice.
    pub fn to_function(&self, fallback: Option<&Arc<LatticeSpec>>) -> Result<PhaseSpaceFunction> {
        match self {
            FunctionDoc::Generator(g) => {
                let lattice = match (&g.lattice, fallback) {
                    (Some(l), _) => {
                        l.validate()?;
                        Arc::new(l.clone())
                    }
                    (None, Some(l)) => l.clone(),
                    (None, None) => return Err(Error::BadInput("gaussian generator needs a `lattice`".into())),
                };
                let spec = GaussianSpec { center: g.center.clone(), width: g.width.clone(), momentum: g.momentum.clone() };
                PhaseSpaceFunction::gaussian(lattice, &spec)
            }
            FunctionDoc::Samples(s) => {
                s.lattice.validate()?;
                let lattice = match fallback {
                    Some(l) if l.as_ref() == &s.lattice => l.clone(),
                    _ => Arc::new(s.lattice.clone()),
                };
                if s.re.len() != lattice.len() || s.im.len() != lattice.len() {
                    return Err(Error::BadInput(format!(
                        "`re`/`im` need {} samples, got {}/{}",
                        lattice.len(),
                        s.re.len(),
                        s.im.len()
                    )));
                }
                let values = s.re.iter().zip(&s.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
                PhaseSpaceFunction::from_values(lattice, values)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylOperatorDoc {
    pub size: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl WeylOperatorDoc {
    pub fn from_operator(a: &WeylOperator) -> Self {
        let d = a.dim();
        let row = |i: usize, f: fn(&Complex64) -> f64| (0..d).map(|j| f(&a.matrix[(i, j)])).collect();
        Self { size: d, re: (0..d).map(|i| row(i, |z| z.re)).collect(), im: (0..d).map(|i| row(i, |z| z.im)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylSystemDoc {
    #[serde(rename = "N")]
    pub modulus: Vec<usize>,
    pub r: usize,
    pub kernel_dim: usize,
}

impl WeylSystemDoc {
    pub fn from_system(s: &FiniteWeylSystem) -> Self {
        Self { modulus: s.pairs().iter().map(|p| p.modulus).collect(), r: s.r(), kernel_dim: s.kernel_dim() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleDoc {
    pub base: BaseSample,
    pub fiber_dim: usize,
    pub sigma_field: Vec<Vec<Vec<f64>>>,
}

impl BundleDoc {
    pub fn from_bundle(b: &PoissonBundleSample) -> Self {
        Self { base: b.base.clone(), fiber_dim: b.fiber_dim, sigma_field: b.sigma_field.iter().map(|s| s.rows()).collect() }
    }

    pub fn to_bundle(&self) -> Result<PoissonBundleSample> {
        let base = BaseSample::new(self.base.points.clone())?;
        let sigmas = self
            .sigma_field
            .iter()
            .enumerate()
            .map(|(i, rows)| Bivector::new(matrix_from_rows(&format!("sigma_field[{i}]"), rows, self.fiber_dim)?))
            .collect::<Result<Vec<_>>>()?;
        PoissonBundleSample::new(base, sigmas)
    }
}

/// Point index (as a string key) to function document.
pub type SectionDoc = BTreeMap<String, FunctionDoc>;

pub fn section_from_doc(bundle: Arc<PoissonBundleSample>, doc: &SectionDoc, fallback: Option<&Arc<LatticeSpec>>) -> Result<SectionField> {
    let mut values = Vec::with_capacity(bundle.len());
    let mut lattice = fallback.cloned();
    for m in 0..bundle.len() {
        let f = doc
            .get(&m.to_string())
            .ok_or_else(|| Error::BadInput(format!("section has no value for point `{m}`")))?;
        let value = f.to_function(lattice.as_ref())?;
        lattice.get_or_insert_with(|| value.lattice().clone());
        values.push(value);
    }
    if let Some(extra) = doc.keys().find(|k| k.parse::<usize>().map_or(true, |m| m >= bundle.len())) {
        return Err(Error::BadInput(format!("section key `{extra}` is not a base point index")));
    }
    SectionField::new(bundle, values)
}

pub fn section_to_doc(phi: &SectionField) -> SectionDoc {
    phi.values().iter().enumerate().map(|(m, f)| (m.to_string(), FunctionDoc::from_function(f))).collect()
}
