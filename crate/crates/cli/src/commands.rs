//! Computations behind each subcommand. Every function returns a typed
//! result plus the list of checks it evaluated; writing files is left to
//! [`crate::execute`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use yindex::assembly::{assemble_forms, constraint_basis, reduce, ConstraintBasis, QuadFormSet, ReducedPencil};
use yindex::geometry::{canonical_surface, FaceDomain, YSurfaceSpec};
use yindex::hopf::{
    certificate_residuals, derivative_grids, sample_spec, DerivMethod, ImmersionFile, Perturbation, ResidualReport,
    Thresholds, INPUT_TOL,
};
use yindex::mesh::{build_ymesh, mesh_face, YMesh};
use yindex::spectra::{
    analytic_null_basis, bulk_report, coordinate_field_test, dtn_index, inertia_counts, null_projection_residuals,
    steklov_face, tolerance, CoordinateField, GammaCondition, SpectrumReport, SteklovSpectrum,
};

use crate::{Check, CliError, Common};

/// Least-squares slope of `ln v` against `ln h`.
pub fn fit_order(h: &[f64], v: &[f64]) -> f64 {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let y: Vec<f64> = v.iter().map(|y| y.abs().ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshStats {
    pub h: f64,
    pub faces: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub junction_nodes: usize,
    pub reduced_dim: usize,
}

pub struct Problem {
    pub spec: YSurfaceSpec,
    pub mesh: YMesh,
    pub forms: QuadFormSet,
    pub basis: ConstraintBasis,
    pub pencil: ReducedPencil,
}

impl Problem {
    pub fn build(surface: &str, h: f64) -> Result<Self, CliError> {
        let spec = canonical_surface(surface, &Default::default())?;
        let mesh = build_ymesh(&spec, h)?;
        let forms = assemble_forms(&mesh, &spec)?;
        let basis = constraint_basis(&mesh);
        let pencil = reduce(&forms, &basis, h, surface)?;
        Ok(Problem {
            spec,
            mesh,
            forms,
            basis,
            pencil,
        })
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            h: self.mesh.h,
            faces: self.mesh.faces.len(),
            vertices: self.mesh.num_dofs(),
            triangles: self.mesh.faces.iter().map(|f| f.triangles.len()).sum(),
            junction_nodes: self.mesh.junction.len(),
            reduced_dim: self.pencil.dim(),
        }
    }

    pub fn is_ycone(&self) -> bool {
        self.spec.is_flat_ycone()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexResult {
    pub mesh: MeshStats,
    pub bulk: SpectrumReport,
    pub dtn: Option<SpectrumReport>,
    /// Relative gap between `Q(Z y)` and `y^T A_r y` for a seeded random `y`.
    pub congruence_gap: f64,
}

pub fn index(
    surface: &str,
    h: f64,
    k: usize,
    with_dtn: bool,
    expect: (Option<usize>, Option<usize>),
    common: &Common,
) -> Result<(IndexResult, Vec<Check>), CliError> {
    let p = Problem::build(surface, h)?;
    let mut bulk = bulk_report(&p.pencil, k, common.c0)?;
    if p.is_ycone() {
        let null = analytic_null_basis(&p.mesh)?;
        bulk.null_projection_residuals = null_projection_residuals(&null, &p.basis, &p.pencil)?;
    }
    let mut checks = Vec::new();
    let ic = bulk.inertia_check.clone().expect("bulk reports carry an inertia check");
    checks.push(Check::new(
        "inertia-agrees",
        ic.agrees,
        format!(
            "eigenvalues give ({}, {}), inertia gives ({}, {})",
            bulk.index, bulk.nullity, ic.index, ic.nullity
        ),
    ));
    let dtn = if with_dtn {
        let d = dtn_index(&p.mesh, &p.forms, common.c0, surface)?;
        let rep = d.report(common.c0, surface);
        checks.push(Check::new(
            "routes-agree",
            (rep.index, rep.nullity) == (bulk.index, bulk.nullity),
            format!(
                "bulk ({}, {}), dtn ({}, {})",
                bulk.index, bulk.nullity, rep.index, rep.nullity
            ),
        ));
        Some(rep)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let y: Vec<f64> = (0..p.basis.m()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let direct = p.forms.apply_form(&p.basis.expand(&y)?)?;
    let reduced = p.pencil.a.quad_form(&y);
    let congruence_gap = (direct - reduced).abs() / direct.abs().max(reduced.abs()).max(1e-300);
    checks.push(Check::new(
        "congruence",
        congruence_gap <= 1e-10,
        format!("relative gap {congruence_gap:.3e}"),
    ));
    push_expectations(&mut checks, expect, bulk.index, bulk.nullity);
    Ok((
        IndexResult {
            mesh: p.stats(),
            bulk,
            dtn,
            congruence_gap,
        },
        checks,
    ))
}

fn push_expectations(checks: &mut Vec<Check>, expect: (Option<usize>, Option<usize>), index: usize, nullity: usize) {
    if let Some(e) = expect.0 {
        checks.push(Check::new(
            "expected-index",
            index == e,
            format!("index {index}, expected {e}"),
        ));
    }
    if let Some(e) = expect.1 {
        checks.push(Check::new(
            "expected-nullity",
            nullity == e,
            format!("nullity {nullity}, expected {e}"),
        ));
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteklovRow {
    pub n: usize,
    pub delta: f64,
    pub analytic: f64,
    /// Relative error, or absolute error when the analytic value is 0.
    pub error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SteklovResult {
    pub spectrum: SteklovSpectrum,
    pub rows: Vec<SteklovRow>,
    pub max_rel_err: f64,
}

pub fn steklov(
    gamma: GammaCondition,
    h: f64,
    modes: usize,
    max_rel_err: f64,
    common: &Common,
) -> Result<(SteklovResult, Vec<Check>), CliError> {
    let mesh = mesh_face(FaceDomain::half_disk(), h, None)?;
    let spectrum = steklov_face(&mesh, gamma, common.c0)?;
    let first = if gamma == GammaCondition::Neumann { 0 } else { 1 };
    if spectrum.eigenvalues.len() < modes {
        return Err(CliError::Usage(format!(
            "only {} Steklov modes available at h = {h}",
            spectrum.eigenvalues.len()
        )));
    }
    let rows: Vec<SteklovRow> = (0..modes)
        .map(|i| {
            let analytic = (first + i) as f64;
            let delta = spectrum.eigenvalues[i];
            let error = if analytic == 0.0 {
                delta.abs()
            } else {
                (delta - analytic).abs() / analytic
            };
            SteklovRow {
                n: first + i,
                delta,
                analytic,
                error,
                pass: error <= max_rel_err,
            }
        })
        .collect();
    let checks = rows
        .iter()
        .map(|r| {
            Check::new(
                &format!("delta-{}", r.n),
                r.pass,
                format!("{:.6} vs {} (error {:.2e})", r.delta, r.analytic, r.error),
            )
        })
        .collect();
    Ok((
        SteklovResult {
            spectrum,
            rows,
            max_rel_err,
        },
        checks,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct DtnOutput {
    pub mesh: MeshStats,
    pub spectrum: SteklovSpectrum,
    pub index: usize,
    pub nullity: usize,
    pub threshold_negative: usize,
    pub bulk_index: usize,
    pub bulk_nullity: usize,
}

pub fn dtn(surface: &str, h: f64, modes: usize, common: &Common) -> Result<(DtnOutput, Vec<Check>), CliError> {
    let p = Problem::build(surface, h)?;
    let d = dtn_index(&p.mesh, &p.forms, common.c0, surface)?;
    let (bi, bn) = inertia_counts(&p.pencil, tolerance(h, common.c0))?;
    let mut spectrum = d.spectrum.clone();
    spectrum.eigenvalues.truncate(modes);
    let checks = vec![
        Check::new(
            "matches-bulk",
            (d.index, d.nullity) == (bi, bn),
            format!("dtn ({}, {}), bulk ({bi}, {bn})", d.index, d.nullity),
        ),
        Check::new(
            "threshold-identity",
            d.threshold_negative == d.index,
            format!(
                "#negative(S - W) = {}, #(delta < 1 - tol) = {}",
                d.threshold_negative, d.index
            ),
        ),
    ];
    Ok((
        DtnOutput {
            mesh: p.stats(),
            spectrum,
            index: d.index,
            nullity: d.nullity,
            threshold_negative: d.threshold_negative,
            bulk_index: bi,
            bulk_nullity: bn,
        },
        checks,
    ))
}

pub enum VerifySource<'a> {
    Surface(&'a str),
    File(&'a str),
    Perturbed(Perturbation),
}

pub fn verify(
    source: VerifySource<'_>,
    n_r: usize,
    n_theta: usize,
    method: Option<DerivMethod>,
) -> Result<(ResidualReport, Vec<Check>), CliError> {
    let (grids, default_method) = match source {
        VerifySource::Surface(name) => {
            let spec = canonical_surface(name, &Default::default())?;
            (sample_spec(&spec, n_r, n_theta)?, DerivMethod::Exact)
        }
        VerifySource::File(text) => (
            ImmersionFile::parse(text)?.into_grids(INPUT_TOL)?,
            DerivMethod::FiniteDifference,
        ),
        VerifySource::Perturbed(p) => (p.sample(n_r, n_theta)?, DerivMethod::FiniteDifference),
    };
    let method = method.unwrap_or(default_method);
    let d = derivative_grids(&grids, method)?;
    let report = certificate_residuals(&d, &Thresholds::for_derivs(&d))?;
    let checks = report
        .checks
        .iter()
        .map(|c| {
            Check::new(
                &c.name,
                c.pass,
                format!("max {:.3e}, rms {:.3e}, threshold {:.1e}", c.max, c.rms, c.threshold),
            )
        })
        .collect();
    Ok((report, checks))
}

#[derive(Clone, Debug, Serialize)]
pub struct Level {
    pub mesh: MeshStats,
    pub index: usize,
    pub nullity: usize,
    pub dtn_index: Option<usize>,
    pub dtn_nullity: Option<usize>,
    /// Eigenvalues classified as zero, ascending.
    pub null_cluster: Vec<f64>,
    pub report: SpectrumReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeResult {
    pub levels: Vec<Level>,
    /// Fitted order of each zero-cluster eigenvalue (by position) over the levels.
    pub cluster_orders: Vec<f64>,
    pub null_residual_orders: Vec<f64>,
}

pub fn converge(
    surface: &str,
    hs: &[f64],
    k: usize,
    expect: (Option<usize>, Option<usize>),
    common: &Common,
) -> Result<(ConvergeResult, Vec<Check>), CliError> {
    let mut levels = Vec::new();
    let mut checks = Vec::new();
    for &h in hs {
        let p = Problem::build(surface, h)?;
        let mut report = bulk_report(&p.pencil, k, common.c0)?;
        if p.is_ycone() {
            let null = analytic_null_basis(&p.mesh)?;
            report.null_projection_residuals = null_projection_residuals(&null, &p.basis, &p.pencil)?;
        }
        let (dtn_index_v, dtn_nullity_v) = if p.spec.is_flat() {
            let d = dtn_index(&p.mesh, &p.forms, common.c0, surface)?;
            checks.push(Check::new(
                &format!("routes-agree-h{h}"),
                (d.index, d.nullity) == (report.index, report.nullity),
                format!(
                    "bulk ({}, {}), dtn ({}, {})",
                    report.index, report.nullity, d.index, d.nullity
                ),
            ));
            (Some(d.index), Some(d.nullity))
        } else {
            (None, None)
        };
        let null_cluster: Vec<f64> = report
            .eigenvalues
            .iter()
            .copied()
            .filter(|l| l.abs() <= report.tolerance)
            .collect();
        push_expectations(&mut checks, expect, report.index, report.nullity);
        levels.push(Level {
            mesh: p.stats(),
            index: report.index,
            nullity: report.nullity,
            dtn_index: dtn_index_v,
            dtn_nullity: dtn_nullity_v,
            null_cluster,
            report,
        });
    }
    let stable = levels
        .windows(2)
        .all(|w| (w[0].index, w[0].nullity) == (w[1].index, w[1].nullity));
    checks.push(Check::new(
        "counts-stable",
        stable,
        hs.iter()
            .zip(&levels)
            .map(|(h, l)| format!("h={h}: ({}, {})", l.index, l.nullity))
            .collect::<Vec<_>>()
            .join("; "),
    ));
    let width = levels.iter().map(|l| l.null_cluster.len()).min().unwrap_or(0);
    let cluster_orders: Vec<f64> = (0..width)
        .map(|c| fit_order(hs, &levels.iter().map(|l| l.null_cluster[c]).collect::<Vec<_>>()))
        .collect();
    if hs.len() >= 2 {
        for (c, o) in cluster_orders.iter().enumerate() {
            checks.push(Check::new(
                &format!("cluster-order-{}", c + 1),
                *o >= 1.7,
                format!("fitted order {o:.3}"),
            ));
        }
        for c in 0..width {
            let mags: Vec<f64> = levels.iter().map(|l| l.null_cluster[c].abs()).collect();
            let dec = mags.windows(2).all(|w| w[1] < w[0]);
            let detail = mags.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>().join(" > ");
            checks.push(Check::new(&format!("cluster-monotone-{}", c + 1), dec, detail));
        }
    }
    let nres = levels.first().map_or(0, |l| l.report.null_projection_residuals.len());
    let null_residual_orders: Vec<f64> = (0..nres)
        .map(|c| {
            fit_order(
                hs,
                &levels
                    .iter()
                    .map(|l| l.report.null_projection_residuals[c])
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    Ok((
        ConvergeResult {
            levels,
            cluster_orders,
            null_residual_orders,
        },
        checks,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct NullVectorRow {
    pub label: String,
    pub residuals: Vec<f64>,
    pub q_values: Vec<f64>,
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NullBasisResult {
    pub h: Vec<f64>,
    pub gram_rank: usize,
    pub vectors: Vec<NullVectorRow>,
}

pub fn null_basis(hs: &[f64], min_order: f64) -> Result<(NullBasisResult, Vec<Check>), CliError> {
    let mut rows: Vec<NullVectorRow> = Vec::new();
    let mut gram_rank = 0;
    for (level, &h) in hs.iter().enumerate() {
        let p = Problem::build("ycone", h)?;
        let null = analytic_null_basis(&p.mesh)?;
        let res = null_projection_residuals(&null, &p.basis, &p.pencil)?;
        if level == 0 {
            gram_rank = mass_gram_rank(&null.vectors, &p.forms);
            rows = null
                .labels
                .iter()
                .map(|l| NullVectorRow {
                    label: l.clone(),
                    residuals: vec![],
                    q_values: vec![],
                    order: None,
                })
                .collect();
        }
        for (i, f) in null.vectors.iter().enumerate() {
            rows[i].residuals.push(res[i]);
            rows[i].q_values.push(p.forms.apply_form(f)?);
        }
    }
    let mut checks = vec![Check::new(
        "gram-rank",
        gram_rank == 5,
        format!("rank {gram_rank} of 5"),
    )];
    for r in &mut rows {
        if hs.len() >= 2 {
            let o = fit_order(hs, &r.residuals);
            r.order = Some(o);
            checks.push(Check::new(
                &format!("order-{}", r.label),
                o >= min_order,
                format!("fitted order {o:.3}, residuals {:?}", r.residuals),
            ));
        }
    }
    Ok((
        NullBasisResult {
            h: hs.to_vec(),
            gram_rank,
            vectors: rows,
        },
        checks,
    ))
}

/// Numerical rank of the mass Gram matrix at relative tolerance 1e-10.
fn mass_gram_rank(vectors: &[Vec<f64>], forms: &QuadFormSet) -> usize {
    let n = vectors.len();
    let mv: Vec<Vec<f64>> = vectors.iter().map(|v| forms.mass.mul_vec(v)).collect();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = vectors[i].iter().zip(&mv[j]).map(|(a, b)| a * b).sum();
        }
    }
    let m = yindex::linalg::CsrMatrix::from_triplets(
        n,
        n,
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, g[i][j]))
            .collect(),
    );
    let eig = m.to_dense().symmetric_eigenvalues();
    let top = eig.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    eig.iter().filter(|v| v.abs() > 1e-10 * top).count()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantMode {
    pub coefficients: [f64; 3],
    pub q: f64,
    pub expected: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldsResult {
    pub mesh: MeshStats,
    pub fields: Vec<CoordinateField>,
    pub constants: Vec<ConstantMode>,
}

pub fn fields(h: f64, rel_tol: f64) -> Result<(FieldsResult, Vec<Check>), CliError> {
    let p = Problem::build("ycone", h)?;
    let mut checks = Vec::new();
    let mut out = Vec::new();
    for (name, e) in [
        ("e1", [1.0, 0.0, 0.0]),
        ("e2", [0.0, 1.0, 0.0]),
        ("e3", [0.0, 0.0, 1.0]),
    ] {
        let f = coordinate_field_test(&p.mesh, &p.spec, &p.forms, e)?;
        if name == "e1" {
            checks.push(Check::new(
                "e1-tangential",
                f.tangent && f.q == 0.0,
                format!("Q = {:e}", f.q),
            ));
        } else {
            let expected = -1.5 * PI;
            let err = (f.q - expected).abs() / expected.abs();
            checks.push(Check::new(
                &format!("{name}-value"),
                err <= rel_tol && !f.tangent,
                format!("Q = {:.6}, expected {expected:.6}", f.q),
            ));
        }
        out.push(f);
    }
    let mut constants = Vec::new();
    for (c, expected) in [([1.0, -1.0, 0.0], -2.0 * PI), ([1.0, 1.0, -2.0], -6.0 * PI)] {
        let mut f = vec![0.0; p.mesh.num_dofs()];
        for (j, face) in p.mesh.faces.iter().enumerate() {
            for v in 0..face.num_vertices() {
                f[p.mesh.dof(j, v)] = c[j];
            }
        }
        let q = p.forms.apply_form(&f)?;
        let err = (q - expected).abs() / expected.abs();
        checks.push(Check::new(
            &format!("constants-{}-{}-{}", c[0], c[1], c[2]),
            err <= rel_tol,
            format!("Q = {q:.6}, expected {expected:.6}"),
        ));
        constants.push(ConstantMode {
            coefficients: c,
            q,
            expected,
        });
    }
    Ok((
        FieldsResult {
            mesh: p.stats(),
            fields: out,
            constants,
        },
        checks,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_order_recovers_power() {
        let h = [0.1, 0.05, 0.025];
        let v: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((fit_order(&h, &v) - 2.0).abs() < 1e-12);
    }
}
