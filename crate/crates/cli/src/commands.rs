use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use weylmoyal::bundle::{
    evaluate, irrep_at_point, module_action, section_star, section_sup_l1_norm, PoissonBundleSample, ScalarField,
    SectionField,
};
use weylmoyal::dfr::{
    dfr_sigma0, lorentz_defect, lorentz_orbit_sample, orbit_component, parity, stabilizer_boost, stabilizer_rotation,
    trivialize, LorentzParams,
};
use weylmoyal::io::{
    section_from_doc, BivectorDoc, BundleDoc, DarbouxFrameDoc, FunctionDoc, SectionDoc, WeylOperatorDoc, WeylSystemDoc,
};
use weylmoyal::leaves::{leaf_sample, LinearPoissonSample};
use weylmoyal::linalg::{darboux_frame, rank, Bivector};
use weylmoyal::star::{cstar_norm_estimate, l1check_norm, star, star_reference};
use weylmoyal::weyl::{operator_norm, weyl_quantize, FiniteWeylSystem};
use weylmoyal::{LatticeSpec, PhaseSpaceFunction};

use crate::{read_json, Report, RunConfig};

/// Lattices above this size skip the quadratic reference product.
const REFERENCE_LIMIT: usize = 4096;

pub(crate) fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("document serializes")
}

pub(crate) fn random_fn(lat: &Arc<LatticeSpec>, rng: &mut ChaCha8Rng) -> PhaseSpaceFunction {
    let values = (0..lat.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    PhaseSpaceFunction::from_values(lat.clone(), values).expect("length matches lattice")
}

pub(crate) fn model_lattice(n: usize, big_n: usize) -> Result<Arc<LatticeSpec>> {
    Ok(Arc::new(LatticeSpec::uniform(n, 2 * big_n, (2.0 * PI * big_n as f64).sqrt())?))
}

/// `max |a - b| / max(1, max |b|)`.
pub(crate) fn rel_diff(a: &PhaseSpaceFunction, b: &PhaseSpaceFunction) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

fn read_bivector(path: &Path) -> Result<Bivector> {
    let doc: BivectorDoc = read_json(path, "bivector")?;
    doc.to_bivector().with_context(|| format!("bivector in `{}`", path.display()))
}

fn read_function_doc(path: &Path) -> Result<FunctionDoc> {
    read_json(path, "function")
}

fn function_dim(doc: &FunctionDoc) -> usize {
    match doc {
        FunctionDoc::Generator(g) => g.lattice.as_ref().map_or(g.center.len(), |l| l.n),
        FunctionDoc::Samples(s) => s.lattice.n,
    }
}

pub(crate) fn darboux(config: &RunConfig, report: &mut Report) -> Result<()> {
    let sigma = read_bivector(config.input(0, "bivector")?)?;
    let frame = report.timed("darboux", || darboux_frame(&sigma));
    let scale = sigma.matrix().amax().max(1.0);
    report.check("residual", frame.residual(&sigma), config.bound(1e-10 * scale));
    let rk = rank(&sigma);
    report.check("rank_matches_frame", (2 * frame.r).abs_diff(rk) as f64, 0.0);
    report.result = Some(json!({
        "rank": rk,
        "kernel_dim": sigma.dim() - rk,
        "frame": DarbouxFrameDoc::from_frame(&frame),
    }));
    Ok(())
}

pub(crate) fn star_cmd(config: &RunConfig, report: &mut Report) -> Result<()> {
    let (sigma, f_path, g_path) = match config.inputs.len() {
        2 => (None, &config.inputs[0], &config.inputs[1]),
        3 => (Some(read_bivector(&config.inputs[0])?), &config.inputs[1], &config.inputs[2]),
        k => bail!("`star` takes [bivector] f g as inputs, got {k} file(s)"),
    };
    let f_doc = read_function_doc(f_path)?;
    let g_doc = read_function_doc(g_path)?;
    let n = sigma.as_ref().map_or_else(|| function_dim(&f_doc), Bivector::dim);
    let sigma = sigma.unwrap_or_else(|| Bivector::zero(n));
    let fallback = match f_doc.lattice().or(g_doc.lattice()) {
        Some(l) => Arc::new(l.clone()),
        None => Arc::new(LatticeSpec::uniform(n, config.lattice_points.unwrap_or(32), config.box_length.unwrap_or(12.0))?),
    };
    let f = f_doc.to_function(Some(&fallback)).with_context(|| format!("function in `{}`", f_path.display()))?;
    let g = g_doc.to_function(Some(&fallback)).with_context(|| format!("function in `{}`", g_path.display()))?;
    let prod = report.timed("star", || star(&f, &g, &sigma))?;
    if sigma.matrix().amax() == 0.0 {
        report.check("pointwise_product", rel_diff(&prod, &f.pointwise_mul(&g)?), config.bound(1e-10));
    }
    if f.lattice().len() <= REFERENCE_LIMIT {
        let reference = report.timed("reference", || star_reference(&f, &g, &sigma))?;
        report.check("reference_agreement", rel_diff(&prod, &reference), config.bound(1e-10));
    }
    let banach = l1check_norm(&prod) - l1check_norm(&f) * l1check_norm(&g);
    report.check("l1_submultiplicative", banach, config.bound(1e-10));
    report.result = Some(to_value(&FunctionDoc::from_function(&prod)));
    Ok(())
}

pub(crate) fn quantize(config: &RunConfig, report: &mut Report) -> Result<()> {
    let sigma = read_bivector(config.input(0, "bivector")?)?;
    let f_path = config.input(1, "function")?;
    let doc = read_function_doc(f_path)?;
    let sys = match doc.lattice() {
        Some(l) => FiniteWeylSystem::for_lattice(&sigma, l)
            .with_context(|| format!("lattice of `{}` carries no finite Weyl model", f_path.display()))?,
        None => FiniteWeylSystem::new(&sigma, config.model_n())?,
    };
    let lattice = match doc.lattice() {
        Some(l) => Arc::new(l.clone()),
        None => sys.canonical_lattice().ok_or_else(|| anyhow!("model has no canonical lattice"))?,
    };
    let f = doc.to_function(Some(&lattice)).with_context(|| format!("function in `{}`", f_path.display()))?;
    let w = report.timed("quantize", || weyl_quantize(&sys, &f))?;
    let cs = operator_norm(&w);
    let l1 = l1check_norm(&f);
    report.check("cstar_le_l1", cs - l1, config.bound(1e-12 * l1.max(1.0)));
    let wbar = weyl_quantize(&sys, &f.conj())?;
    report.check("involution", wbar.max_abs_diff(&w.adjoint()) / w.max_abs().max(1.0), config.bound(1e-12));
    report.result = Some(json!({
        "system": WeylSystemDoc::from_system(&sys),
        "cstar_norm": cs,
        "l1check_norm": l1,
        "operator": WeylOperatorDoc::from_operator(&w),
    }));
    Ok(())
}

fn read_bundle(path: &Path) -> Result<(PoissonBundleSample, bool)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading bundle from `{}`", path.display()))?;
    if let Ok(doc) = serde_json::from_str::<BundleDoc>(&text) {
        return Ok((doc.to_bundle().with_context(|| format!("bundle in `{}`", path.display()))?, false));
    }
    match serde_json::from_str::<LinearPoissonSample>(&text) {
        Ok(leaf) => Ok((leaf.to_bundle().with_context(|| format!("leaf sample in `{}`", path.display()))?, true)),
        Err(e) => bail!(
            "`{}` is neither a bundle document (`base`, `fiber_dim`, `sigma_field`) nor a leaf sample (`points`, `sigmas`): {e}",
            path.display()
        ),
    }
}

/// Random section whose fibers have dual support in `|c| <= (K - 1) / 4`, so
/// no product of two of them wraps around the lattice.
fn random_section(bundle: &Arc<PoissonBundleSample>, lat: &Arc<LatticeSpec>, rng: &mut ChaCha8Rng) -> Result<SectionField> {
    let band = ((lat.points_per_axis - 1) / 4) as i64;
    let mut values = Vec::with_capacity(bundle.len());
    for p in &bundle.base.points {
        if p.at_infinity {
            values.push(PhaseSpaceFunction::zero(lat.clone()));
            continue;
        }
        let dual = (0..lat.len())
            .map(|flat| {
                if lat.coords(flat).iter().all(|c| c.abs() <= band) {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        values.push(PhaseSpaceFunction::from_dual(lat.clone(), dual)?);
    }
    Ok(SectionField::new(bundle.clone(), values)?)
}

pub(crate) fn bundle(config: &RunConfig, report: &mut Report) -> Result<()> {
    let (bundle, is_leaf) = read_bundle(config.input(0, "bundle or leaf sample")?)?;
    let bundle = Arc::new(bundle);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model = model_lattice(bundle.fiber_dim, config.model_n())?;
    let generated = config.inputs.len() < 2;
    let (phi, psi) = match config.inputs.get(1) {
        Some(path) => {
            let doc: SectionDoc = read_json(path, "section")?;
            let phi = section_from_doc(bundle.clone(), &doc, Some(&model)).with_context(|| format!("section in `{}`", path.display()))?;
            let psi = match config.inputs.get(2) {
                Some(p2) => {
                    let doc: SectionDoc = read_json(p2, "section")?;
                    section_from_doc(bundle.clone(), &doc, Some(phi.lattice()))
                        .with_context(|| format!("section in `{}`", p2.display()))?
                }
                None => phi.conj(),
            };
            (phi, psi)
        }
        None => {
            let phi = random_section(&bundle, &model, &mut rng)?;
            let psi = random_section(&bundle, &model, &mut rng)?;
            (phi, psi)
        }
    };
    let lat = phi.lattice().clone();
    let prod = report.timed("section_star", || section_star(&phi, &psi))?;

    let mut eval = 0.0_f64;
    let mut invol = Vec::with_capacity(bundle.len());
    let use_reference = lat.len() <= REFERENCE_LIMIT;
    for m in 0..bundle.len() {
        let sigma = bundle.sigma(m)?;
        let (a, b) = (evaluate(&phi, m)?, evaluate(&psi, m)?);
        let pm = evaluate(&prod, m)?;
        let direct = if use_reference { star_reference(a, b, sigma)? } else { star(a, b, sigma)? };
        eval = eval.max(rel_diff(pm, &direct));
        invol.push(rel_diff(&pm.conj(), &star(&b.conj(), &a.conj(), sigma)?));
    }
    report.check("evaluation_homomorphism", eval, config.bound(1e-10));

    let scalars: Vec<Complex64> =
        (0..bundle.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let f = ScalarField::new(&bundle.base, scalars.clone())?;
    let fphi = module_action(&f, &phi)?;
    let mut module = 0.0_f64;
    for (m, c) in scalars.iter().enumerate() {
        let expect = evaluate(&phi, m)?.scale(*c);
        module = module.max(evaluate(&fphi, m)?.max_abs_diff(&expect));
    }
    report.check("module_action", module, 0.0);

    let systems = report.timed("fiber_systems", || bundle.fiber_systems(&lat));
    let sup_l1 = section_sup_l1_norm(&phi);
    let mut cstar = 0.0_f64;
    let mut irrep = 0.0_f64;
    let mut available = Vec::new();
    let mut skipped = Vec::new();
    for (m, sys) in systems.into_iter().enumerate() {
        let sys = match sys {
            Ok(s) => s,
            Err(e) => {
                skipped.push(json!({ "point": m, "reason": e.to_string() }));
                continue;
            }
        };
        available.push(m);
        cstar = cstar.max(cstar_norm_estimate(evaluate(&phi, m)?, &sys)?);
        let weights = sys.periodic_weights(lat.points_per_axis);
        let v = &weights[rng.gen_range(0..weights.len())];
        let pi = irrep_at_point(&bundle, m, v, &lat)?;
        let (a, b) = (pi.represent(&phi)?, pi.represent(&psi)?);
        let scale = (operator_norm(&a) * operator_norm(&b)).max(1.0);
        irrep = irrep.max(operator_norm(&pi.represent(&prod)?.sub(&a.mul(&b))) / scale);
    }
    // Supplied sections may alias on lattices that carry no model, where the
    // reversal identity is only approximate.
    let exact: Vec<usize> = if generated { (0..bundle.len()).collect() } else { available.clone() };
    if !exact.is_empty() {
        report.check("involution", exact.iter().map(|&m| invol[m]).fold(0.0, f64::max), config.bound(1e-10));
    }
    if !available.is_empty() {
        report.check("cstar_le_sup_l1", cstar - sup_l1, config.bound(1e-12 * sup_l1.max(1.0)));
        report.check("irrep_multiplicative", irrep, config.bound(1e-10));
    }
    if is_leaf {
        let ranks: Vec<usize> = bundle.sigma_field.iter().map(rank).collect();
        let distinct = ranks.iter().filter(|&&r| r != ranks[0]).count();
        report.check("leaf_rank_constant", distinct as f64, 0.0);
    }
    report.result = Some(json!({
        "points": bundle.len(),
        "fiber_dim": bundle.fiber_dim,
        "lattice": to_value(lat.as_ref()),
        "section_sup_l1_norm": sup_l1,
        "max_fiber_cstar_norm": if available.is_empty() { Value::Null } else { json!(cstar) },
        "available_points": available,
        "skipped_points": skipped,
    }));
    Ok(())
}

pub(crate) fn orbit(config: &RunConfig, report: &mut Report) -> Result<()> {
    let params: Vec<LorentzParams> = match config.inputs.first() {
        Some(path) => read_json(path, "Lorentz parameter list")?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            (0..config.count)
                .map(|_| LorentzParams {
                    rapidity: [0; 3].map(|_| rng.gen_range(-1.0..1.0)),
                    angle: [0; 3].map(|_| rng.gen_range(-PI..PI)),
                })
                .collect()
        }
    };
    if params.is_empty() {
        bail!("orbit needs at least one parameter set");
    }
    let sample = report.timed("orbit", || lorentz_orbit_sample(&params, config.include_parity))?;
    let u0 = [1.0, 0.0, 0.0, 0.0];
    let (mut defect, mut triv) = (0.0_f64, 0.0_f64);
    let (mut bad_rank, mut bad_component) = (0usize, 0usize);
    let elements = params.iter().flat_map(|p| {
        let g = p.matrix();
        let with_parity = config.include_parity.then(|| parity() * &g);
        std::iter::once(g).chain(with_parity)
    });
    for ((g, s_rows), &component) in elements.zip(&sample.sigmas).zip(&sample.component) {
        defect = defect.max(lorentz_defect(&g));
        let sigma = Bivector::from_rows(s_rows)?;
        if rank(&sigma) != 4 {
            bad_rank += 1;
            continue;
        }
        bad_component += usize::from(orbit_component(&sigma)? != component);
        let (t, _) = trivialize(&g, &u0)?;
        triv = triv.max(t.max_abs_diff(&sigma));
    }
    let sigma0 = dfr_sigma0();
    let mut stab = 0.0_f64;
    for t in [-1.0, 0.3, 2.0] {
        stab = stab.max(sigma0.congruence(&stabilizer_boost(t))?.max_abs_diff(&sigma0));
        stab = stab.max(sigma0.congruence(&stabilizer_rotation(t))?.max_abs_diff(&sigma0));
    }
    report.check("lorentz_defect", defect, config.bound(1e-10));
    report.check("rank_four", bad_rank as f64, 0.0);
    report.check("component_matches_determinant", bad_component as f64, 0.0);
    report.check("trivialization", triv, config.bound(1e-10));
    report.check("stabilizer_fixes_base", stab, config.bound(1e-10));
    report.result = Some(to_value(&sample));
    Ok(())
}

pub(crate) fn leaf(config: &RunConfig, report: &mut Report) -> Result<()> {
    let sample = leaf_sample(config.radius, config.count)?;
    let mut bad_rank = 0usize;
    let mut kernel = 0.0_f64;
    for (x, rows) in sample.points.iter().zip(&sample.sigmas) {
        let sigma = Bivector::from_rows(rows)?;
        bad_rank += usize::from(rank(&sigma) != 2);
        let sx = sigma.pair(&[1.0, 0.0, 0.0], x).abs()
            .max(sigma.pair(&[0.0, 1.0, 0.0], x).abs())
            .max(sigma.pair(&[0.0, 0.0, 1.0], x).abs());
        kernel = kernel.max(sx);
    }
    report.check("rank_two", bad_rank as f64, 0.0);
    report.check("position_in_kernel", kernel, config.bound(1e-12 * config.radius.max(1.0)));
    report.result = Some(to_value(&sample));
    Ok(())
}
