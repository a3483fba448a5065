//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use yindex::assembly::{assemble_forms, constraint_basis, reduce};
use yindex::geometry::canonical_surface;
use yindex::hopf::{
    certificate_residuals, derivative_grids, sample_spec, DerivMethod, Perturbation, ResidualReport, Thresholds,
};
use yindex::linalg::dense_generalized_eigen;
use yindex::mesh::{build_ymesh_with, MeshOptions};
use yindex::spectra::{dtn_index, inertia_counts, tolerance, GammaCondition, DEFAULT_C0};
use yindex_cli::commands::{self, fit_order};
use yindex_cli::Common;

const LEVELS: [f64; 3] = [0.1, 0.05, 0.025];

type Criterion = fn() -> Result<Outcome, String>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn common() -> Common {
    Common {
        c0: DEFAULT_C0,
        seed: 0,
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn counts_at_levels(
    surface: &str,
    want: (usize, usize),
    notes: &mut Vec<String>,
) -> Result<(bool, Vec<Vec<f64>>), String> {
    let mut ok = true;
    let mut spectra = Vec::new();
    for h in LEVELS {
        let start = Instant::now();
        let (res, _) = commands::index(surface, h, 10, true, (None, None), &common()).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let bulk = (res.bulk.index, res.bulk.nullity);
        let dtn = res.dtn.as_ref().map(|d| (d.index, d.nullity));
        let inertia = res.bulk.inertia_check.as_ref().map(|c| (c.index, c.nullity));
        let level_ok = bulk == want && dtn == Some(want) && inertia.is_none_or(|c| c == want) && secs < 60.0;
        ok &= level_ok;
        notes.push(format!(
            "h={h}: bulk {bulk:?}, dtn {dtn:?}, inertia {inertia:?}, {secs:.1}s{}",
            if level_ok { "" } else { " <-" }
        ));
        spectra.push(res.bulk.eigenvalues.clone());
    }
    Ok((ok, spectra))
}

fn criterion_1() -> Result<Outcome, String> {
    let want = (2, 5);
    let mut notes = Vec::new();
    let (mut ok, spectra) = counts_at_levels("ycone", want, &mut notes)?;
    // the five eigenvalues following the negative pair at every level
    let mut orders = Vec::new();
    for c in want.0..want.0 + want.1 {
        let v: Vec<f64> = spectra.iter().map(|s| s[c]).collect();
        let o = fit_order(&LEVELS, &v);
        let monotone = v.windows(2).all(|w| w[1].abs() < w[0].abs());
        ok &= o >= 1.7 && monotone;
        orders.push(format!("lambda_{}: [{}] order {o:.2}", c + 1, fmt_list(&v)));
    }
    notes.extend(orders);
    Ok(Outcome {
        pass: ok,
        detail: format!("expected (index, nullity) = {want:?}; {}", notes.join("; ")),
    })
}

fn criterion_2() -> Result<Outcome, String> {
    let mut notes = Vec::new();
    let (ok, _) = counts_at_levels("equatorial-disk", (1, 2), &mut notes)?;
    Ok(Outcome {
        pass: ok,
        detail: format!("expected (1, 2); {}", notes.join("; ")),
    })
}

fn criterion_3() -> Result<Outcome, String> {
    let mut ok = true;
    let mut notes = Vec::new();
    for (gamma, modes, label) in [
        (GammaCondition::Neumann, 6, "neumann"),
        (GammaCondition::Dirichlet, 5, "dirichlet"),
    ] {
        let (res, checks) = commands::steklov(gamma, 0.02, modes, 0.01, &common()).map_err(|e| e.to_string())?;
        ok &= checks.iter().all(|c| c.pass);
        let worst = res.rows.iter().map(|r| r.error).fold(0.0, f64::max);
        let deltas: Vec<f64> = res.rows.iter().map(|r| r.delta).collect();
        notes.push(format!(
            "{label}: [{}], worst error {worst:.2e}",
            deltas.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(", ")
        ));
    }
    Ok(Outcome {
        pass: ok,
        detail: notes.join("; "),
    })
}

fn criterion_4() -> Result<Outcome, String> {
    let (_, checks) = commands::fields(0.05, 1e-3).map_err(|e| e.to_string())?;
    let ok = checks.iter().all(|c| c.pass) && checks.len() == 5;
    let detail = checks
        .iter()
        .map(|c| format!("{} {}", c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome { pass: ok, detail })
}

fn criterion_5() -> Result<Outcome, String> {
    let spec = canonical_surface("ycone", &Default::default()).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let h: f64 = rng.random_range(0.12..0.2);
        let n = (1.0 / h).ceil() as usize;
        let mut nodes: Vec<f64> = (0..=n)
            .map(|i| {
                let base = i as f64 / n as f64;
                if i == 0 || i == n {
                    base
                } else {
                    base + rng.random_range(-0.2..0.2) / n as f64
                }
            })
            .collect();
        nodes.sort_by(f64::total_cmp);
        let mesh = build_ymesh_with(&spec, h, Some(&nodes), &MeshOptions::default()).map_err(|e| e.to_string())?;
        let forms = assemble_forms(&mesh, &spec).map_err(|e| e.to_string())?;
        let basis = constraint_basis(&mesh);
        let pencil = reduce(&forms, &basis, mesh.h, "ycone").map_err(|e| e.to_string())?;
        let tol = tolerance(mesh.h, DEFAULT_C0);
        let all = dense_generalized_eigen(&pencil.a.to_dense(), &pencil.m.to_dense()).map_err(|e| e.to_string())?;
        let dense = (
            all.values.iter().filter(|&&l| l < -tol).count(),
            all.values.iter().filter(|&&l| l.abs() <= tol).count(),
        );
        let inertia = inertia_counts(&pencil, tol).map_err(|e| e.to_string())?;
        let d = dtn_index(&mesh, &forms, DEFAULT_C0, "ycone").map_err(|e| e.to_string())?;
        let agree = pencil.dim() <= 400 && dense == inertia && dense == (d.index, d.nullity);
        ok &= agree;
        notes.push(format!(
            "seed {seed} h={h:.3} dim {}: dense {dense:?} inertia {inertia:?} dtn {:?}",
            pencil.dim(),
            (d.index, d.nullity)
        ));
    }
    Ok(Outcome {
        pass: ok,
        detail: notes.join("; "),
    })
}

fn criterion_6() -> Result<Outcome, String> {
    let (res, checks) = commands::null_basis(&LEVELS, 1.7).map_err(|e| e.to_string())?;
    let ok = checks.iter().all(|c| c.pass) && res.vectors.len() == 5;
    let detail = res
        .vectors
        .iter()
        .map(|v| {
            format!(
                "{}: [{}] order {:.2}",
                v.label,
                fmt_list(&v.residuals),
                v.order.unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome {
        pass: ok,
        detail: format!("gram rank {}; {detail}", res.gram_rank),
    })
}

fn ycone_report(n: usize, method: DerivMethod) -> Result<ResidualReport, String> {
    let spec = canonical_surface("ycone", &Default::default()).map_err(|e| e.to_string())?;
    let g = sample_spec(&spec, n, n).map_err(|e| e.to_string())?;
    let d = derivative_grids(&g, method).map_err(|e| e.to_string())?;
    certificate_residuals(&d, &Thresholds::for_derivs(&d)).map_err(|e| e.to_string())
}

fn criterion_7() -> Result<Outcome, String> {
    let mut ok = true;
    let mut notes = Vec::new();

    let exact = ycone_report(64, DerivMethod::Exact)?;
    let worst = exact.checks.iter().map(|c| c.max).fold(0.0, f64::max);
    let exact_ok = exact.checks.iter().all(|c| c.max <= 1e-10) && exact.skipped.is_empty();
    ok &= exact_ok;
    notes.push(format!("exact n=64 worst {worst:.1e}"));

    let ns = [16usize, 32, 64];
    let fd: Vec<ResidualReport> = ns
        .iter()
        .map(|&n| ycone_report(n, DerivMethod::FiniteDifference))
        .collect::<Result<_, _>>()?;
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let mut slopes = Vec::new();
    for c in &fd[0].checks {
        let v: Vec<f64> = fd.iter().map(|r| r.max(&c.name)).collect();
        if v[0] <= 1e-12 {
            continue;
        }
        let o = fit_order(&hs, &v);
        ok &= o >= 1.7;
        slopes.push(format!("{} {o:.2}", c.name));
    }
    notes.push(format!("fd orders: {}", slopes.join(", ")));

    let base = &fd[2];
    for p in [
        Perturbation::AngleImbalance,
        Perturbation::BoundaryTilt { alpha_deg: 10.0 },
        Perturbation::NonGreatCircle { eps: 0.1 },
    ] {
        let g = p.sample(64, 64).map_err(|e| e.to_string())?;
        let d = derivative_grids(&g, DerivMethod::FiniteDifference).map_err(|e| e.to_string())?;
        let r = certificate_residuals(&d, &Thresholds::for_derivs(&d)).map_err(|e| e.to_string())?;
        let check = p.target_check();
        let (v, b) = (r.max(check), base.max(check));
        let detected = v >= 10.0 * b;
        ok &= detected;
        notes.push(format!(
            "{} {check} {v:.2e} vs baseline {b:.2e} (ratio {:.1e})",
            p.name(),
            v / b
        ));
    }
    Ok(Outcome {
        pass: ok,
        detail: notes.join("; "),
    })
}

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("ycone index and nullity", criterion_1),
        ("equatorial disk", criterion_2),
        ("half-disk Steklov spectrum", criterion_3),
        ("constant modes and coordinate fields", criterion_4),
        ("route equivalence on coarse meshes", criterion_5),
        ("null-basis projection", criterion_6),
        ("Hopf certificate", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.1}s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
