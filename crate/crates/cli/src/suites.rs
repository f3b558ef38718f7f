//! Seeded identity checks on the finite Weyl model.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use weylmoyal::leaves::su2_poisson;
use weylmoyal::linalg::{darboux_frame, kernel_split, rank, standard_form, Bivector};
use weylmoyal::star::{cstar_norm_estimate, l1check_norm, star, star_degenerate_factor, sup_norm};
use weylmoyal::weyl::{commutant_basis, operator_norm, weyl_quantize, weyl_relation_defect, FiniteWeylSystem, WeylOperator};
use weylmoyal::LatticeSpec;

use crate::commands::{random_fn, rel_diff};
use crate::{Report, RunConfig};

/// Sum of `r` random wedge products `u ^ v`: rank at most `2r`.
fn random_bivector(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Result<Bivector> {
    let mut m = vec![vec![0.0; n]; n];
    for _ in 0..r {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in 0..n {
            for j in 0..n {
                m[i][j] += u[i] * v[j] - v[i] * u[j];
            }
        }
    }
    Ok(Bivector::from_rows(&m)?)
}

fn rel_op(a: &WeylOperator, b: &WeylOperator, scale: f64) -> f64 {
    operator_norm(&a.sub(b)) / scale.max(1e-300)
}

pub(crate) fn verify(config: &RunConfig, report: &mut Report) -> Result<()> {
    let big_n = config.model_n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let models = [
        (standard_form(2, 1)?, big_n),
        (standard_form(3, 1)?, big_n),
        (standard_form(4, 2)?, big_n.min(2)),
        (Bivector::zero(2), big_n),
    ];
    let systems = models
        .iter()
        .map(|(s, k)| FiniteWeylSystem::new(s, *k))
        .collect::<weylmoyal::Result<Vec<_>>>()?;

    let mut relation = 0.0_f64;
    report.timed("weyl_relation", || -> Result<()> {
        for sys in &systems {
            let lat = sys.canonical_lattice().expect("built from new");
            relation = relation.max(weyl_relation_defect(sys, &lat)?);
        }
        Ok(())
    })?;
    report.check("weyl_relation", relation, config.bound(1e-12));

    let (mut hom, mut assoc, mut invol, mut cstar_id) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let (mut sup_gap, mut cstar_gap, mut banach_gap) = (f64::MIN, f64::MIN, f64::MIN);
    report.timed("algebra", || -> Result<()> {
        for i in 0..24 {
            let sys = &systems[i % systems.len()];
            let sigma = sys.sigma();
            let lat = sys.canonical_lattice().expect("built from new");
            let (f, g, h) = (random_fn(&lat, &mut rng), random_fn(&lat, &mut rng), random_fn(&lat, &mut rng));
            let wf = weyl_quantize(sys, &f)?;
            let wg = weyl_quantize(sys, &g)?;
            let fg = star(&f, &g, sigma)?;
            let (nf, ng) = (operator_norm(&wf), operator_norm(&wg));
            hom = hom.max(rel_op(&weyl_quantize(sys, &fg)?, &wf.mul(&wg), nf * ng));
            let left = star(&fg, &h, sigma)?;
            let right = star(&f, &star(&g, &h, sigma)?, sigma)?;
            let scale = l1check_norm(&f) * l1check_norm(&g) * l1check_norm(&h);
            assoc = assoc.max(left.max_abs_diff(&right) / scale.max(1.0));
            invol = invol.max(rel_op(&weyl_quantize(sys, &f.conj())?, &wf.adjoint(), nf));
            let ff = weyl_quantize(sys, &star(&f.conj(), &f, sigma)?)?;
            cstar_id = cstar_id.max((operator_norm(&ff) - nf * nf).abs() / (nf * nf).max(1e-300));
            let (l1f, l1g) = (l1check_norm(&f), l1check_norm(&g));
            sup_gap = sup_gap.max((sup_norm(&f) - l1f) / l1f);
            cstar_gap = cstar_gap.max((cstar_norm_estimate(&f, sys)? - l1f) / l1f);
            banach_gap = banach_gap.max((l1check_norm(&fg) - l1f * l1g) / (l1f * l1g));
        }
        Ok(())
    })?;
    report.check("homomorphism", hom, config.bound(1e-11));
    report.check("associativity", assoc, config.bound(1e-10));
    report.check("involution", invol, config.bound(1e-12));
    report.check("cstar_identity", cstar_id, config.bound(1e-10));
    report.check("sup_le_l1", sup_gap, config.bound(1e-12));
    report.check("cstar_le_l1", cstar_gap, config.bound(1e-12));
    report.check("l1_submultiplicative", banach_gap, config.bound(1e-12));

    // Irreducibility: the generators' commutant is the scalars.
    let mut commutant_excess = 0usize;
    for sys in &systems {
        let ops = (0..sys.sigma().dim())
            .map(|a| {
                let mut k = vec![0i64; sys.sigma().dim()];
                k[a] = 1;
                sys.weyl_unitary(&k)
            })
            .collect::<weylmoyal::Result<Vec<_>>>()?;
        commutant_excess += commutant_basis(&ops, 1e-10).len().abs_diff(1);
    }
    report.check("commutant_is_scalar", commutant_excess as f64, 0.0);

    let mut factor = 0.0_f64;
    report.timed("degenerate", || -> Result<()> {
        for i in 0..8 {
            let sigma = if i % 2 == 0 { su2_poisson(&[0.6, -0.3, 0.9]) } else { random_bivector(3, 1, &mut rng)? };
            let frame = darboux_frame(&sigma);
            let lat = std::sync::Arc::new(LatticeSpec::uniform(3, 6, 5.0)?.with_frame(&frame.basis)?);
            let (f, g) = (random_fn(&lat, &mut rng), random_fn(&lat, &mut rng));
            let full = star(&f, &g, &sigma)?;
            factor = factor.max(rel_diff(&star_degenerate_factor(&f, &g, &kernel_split(&sigma))?, &full));
        }
        Ok(())
    })?;
    report.check("degenerate_factorization", factor, config.bound(1e-9));

    let (mut residual, mut rank_mismatch) = (0.0_f64, 0usize);
    for i in 0..50 {
        let n = 2 + i % 5;
        let r = rng.gen_range(0..=n / 2);
        let sigma = random_bivector(n, r, &mut rng)?;
        let frame = darboux_frame(&sigma);
        residual = residual.max(frame.residual(&sigma) / sigma.matrix().amax().max(1.0));
        rank_mismatch += usize::from(frame.r != r || rank(&sigma) != 2 * r);
    }
    report.check("darboux_residual", residual, config.bound(1e-10));
    report.check("darboux_rank", rank_mismatch as f64, 0.0);

    report.result = Some(json!({
        "model_n": big_n,
        "models": systems.iter().map(|s| json!({ "n": s.sigma().dim(), "r": s.r(), "dim": s.dim() })).collect::<Vec<_>>(),
    }));
    Ok(())
}
