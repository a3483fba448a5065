//! Morse index and nullity of the reduced pencil.
//!
//! Two independent routes are provided: Sylvester inertia of the shifted
//! bulk pencil `A_r - s M_r`, and a Dirichlet-to-Neumann reduction onto the
//! traces on sigma for flat surfaces. Per-face Steklov spectra, the analytic
//! w_1 interpolants and the coordinate-field test live here as well.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assembly::{constraint_basis, flat_face_forms, ConstraintBasis, QuadFormSet, ReducedPencil};
use crate::error::{Error, Result};
use crate::geometry::{evaluate_frame, DomainKind, YSurfaceSpec};
use crate::linalg::{
    dense_generalized_eigen, dense_inertia, relative_residual, subspace_lowest, CsrMatrix, Eigenpairs, EnvelopeLdl,
    Inertia,
};
use crate::mesh::{FaceMesh, VertexTag, YMesh};

/// Default constant in `tol(h) = c0 h^2`.
pub const DEFAULT_C0: f64 = 5.0;

/// Reduced dimension below which eigenpairs come from a dense solve.
pub const DENSE_LIMIT: usize = 2000;

pub fn tolerance(h: f64, c0: f64) -> f64 {
    c0 * h * h
}

/// Inertia of `A_r - shift M_r`.
pub fn inertia_count(pencil: &ReducedPencil, shift: f64) -> Result<Inertia> {
    let shifted = CsrMatrix::linear_combination(&[(1.0, &pencil.a), (-shift, &pencil.m)]);
    Ok(EnvelopeLdl::factor(&shifted)?.inertia())
}

/// `(index, nullity)` counted by factorization at shifts `-tol` and `+tol`.
pub fn inertia_counts(pencil: &ReducedPencil, tol: f64) -> Result<(usize, usize)> {
    let below = inertia_count(pencil, -tol)?.negative;
    let upto = inertia_count(pencil, tol)?.negative;
    Ok((below, upto.saturating_sub(below)))
}

/// The `k` smallest eigenpairs of `A_r y = lambda M_r y`.
pub fn low_spectrum(pencil: &ReducedPencil, k: usize) -> Result<Eigenpairs> {
    let m = pencil.dim();
    if k > m {
        return Err(Error::TooManyEigenpairs { k, m });
    }
    if m < DENSE_LIMIT {
        let all = dense_generalized_eigen(&pencil.a.to_dense(), &pencil.m.to_dense())?;
        Ok(Eigenpairs {
            values: all.values[..k].to_vec(),
            vectors: all.vectors.columns(0, k).into_owned(),
        })
    } else {
        subspace_lowest(&pencil.a, &pencil.m, k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Bulk,
    Dtn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenClass {
    Negative,
    Zero,
    Positive,
}

impl EigenClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EigenClass::Negative => "negative",
            EigenClass::Zero => "zero",
            EigenClass::Positive => "positive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertiaCheck {
    pub index: usize,
    pub nullity: usize,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub surface: String,
    pub h: f64,
    pub dim: usize,
    pub route: Route,
    /// Ascending. Pencil eigenvalues for the bulk route, `delta - 1` for the DtN route.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub index: usize,
    pub nullity: usize,
    pub c0: f64,
    pub tolerance: f64,
    pub ambiguous: bool,
    pub ambiguous_values: Vec<f64>,
    pub inertia_check: Option<InertiaCheck>,
    pub null_projection_residuals: Vec<f64>,
}

impl SpectrumReport {
    pub fn classes(&self) -> Vec<EigenClass> {
        self.eigenvalues
            .iter()
            .map(|&l| classify_value(l, self.tolerance))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn classify_value(lambda: f64, tol: f64) -> EigenClass {
    if lambda < -tol {
        EigenClass::Negative
    } else if lambda > tol {
        EigenClass::Positive
    } else {
        EigenClass::Zero
    }
}

/// Index and nullity of ascending eigenvalues under `tol(h) = c0 h^2`.
///
/// A value is ambiguous when `|lambda|` falls in `[tol/2, 2 tol]`, or when it
/// is classified nonzero while smaller than `DEFAULT_C0 h^2`, the size of the
/// discretization error of a true zero.
pub fn classify(eigs: &[f64], h: f64, c0: f64, route: Route, surface: &str) -> SpectrumReport {
    let tol = tolerance(h, c0);
    let floor = tolerance(h, DEFAULT_C0);
    let ambiguous_values: Vec<f64> = eigs
        .iter()
        .copied()
        .filter(|l| {
            let a = l.abs();
            (0.5 * tol..=2.0 * tol).contains(&a) || (a > tol && a < floor)
        })
        .collect();
    SpectrumReport {
        surface: surface.to_string(),
        h,
        dim: 0,
        route,
        eigenvalues: eigs.to_vec(),
        residuals: Vec::new(),
        index: eigs.iter().filter(|&&l| l < -tol).count(),
        nullity: eigs.iter().filter(|&&l| l.abs() <= tol).count(),
        c0,
        tolerance: tol,
        ambiguous: !ambiguous_values.is_empty(),
        ambiguous_values,
        inertia_check: None,
        null_projection_residuals: Vec::new(),
    }
}

/// Bulk route: low spectrum, classification and inertia cross-check.
///
/// At least `k` eigenvalues are computed, and always two more than the
/// inertia count below `+tol`, so the classified list covers the whole
/// nonpositive cluster.
pub fn bulk_report(pencil: &ReducedPencil, k: usize, c0: f64) -> Result<SpectrumReport> {
    let tol = tolerance(pencil.h, c0);
    let (index, nullity) = inertia_counts(pencil, tol)?;
    let k = k.max(index + nullity + 2).min(pencil.dim());
    let pairs = low_spectrum(pencil, k)?;
    let mut report = classify(&pairs.values, pencil.h, c0, Route::Bulk, &pencil.surface);
    report.dim = pencil.dim();
    report.residuals = (0..k)
        .map(|c| {
            relative_residual(
                &pencil.a,
                &pencil.m,
                pairs.values[c],
                pairs.vectors.column(c).as_slice(),
            )
        })
        .collect();
    report.inertia_check = Some(InertiaCheck {
        index,
        nullity,
        agrees: index == report.index && nullity == report.nullity,
    });
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaCondition {
    Neumann,
    Dirichlet,
    ConstrainedY,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteklovSpectrum {
    pub label: String,
    pub condition: GammaCondition,
    pub h: f64,
    pub eigenvalues: Vec<f64>,
    pub tolerance: f64,
    /// `#{delta < 1 - tol}`
    pub below_one: usize,
    /// `#{|delta - 1| <= tol}`
    pub at_one: usize,
}

impl SteklovSpectrum {
    fn new(label: String, condition: GammaCondition, h: f64, eigenvalues: Vec<f64>, tol: f64) -> Self {
        SteklovSpectrum {
            label,
            condition,
            h,
            below_one: eigenvalues.iter().filter(|&&d| d < 1.0 - tol).count(),
            at_one: eigenvalues.iter().filter(|&&d| (d - 1.0).abs() <= tol).count(),
            eigenvalues,
            tolerance: tol,
        }
    }
}

/// Schur complement `S = K_BB - K_BI K_II^{-1} K_IB` as a dense matrix.
pub fn schur_complement(k: &CsrMatrix, boundary: &[usize], interior: &[usize]) -> Result<DMatrix<f64>> {
    let kbb = k.submatrix(boundary, boundary).to_dense();
    if interior.is_empty() {
        return Ok(kbb);
    }
    let kii = k.submatrix(interior, interior);
    let kib = k.submatrix(interior, boundary).to_dense();
    let factor = EnvelopeLdl::factor(&kii)?;
    let inertia = factor.inertia();
    if inertia.negative > 0 || inertia.zero > 0 {
        return Err(Error::Breakdown {
            index: 0,
            pivot: f64::NAN,
            scale: kii.max_abs(),
        });
    }
    let mut x = DMatrix::zeros(interior.len(), boundary.len());
    for c in 0..boundary.len() {
        let col: Vec<f64> = kib.column(c).iter().copied().collect();
        let sol = factor.solve(&col);
        for (r, v) in sol.into_iter().enumerate() {
            x[(r, c)] = v;
        }
    }
    let s = kbb - kib.transpose() * x;
    Ok(0.5 * (&s + s.transpose()))
}

/// Discrete Dirichlet-to-Neumann spectrum of one flat half-disk face.
///
/// Neumann: every vertex off sigma is eliminated. Dirichlet: the vertices on
/// gamma (corners included) are removed first.
pub fn steklov_face(mesh: &FaceMesh, condition: GammaCondition, c0: f64) -> Result<SteklovSpectrum> {
    if mesh.domain.kind != DomainKind::HalfDisk {
        return Err(Error::Unsupported(
            "per-face Steklov spectra need a half-disk face".into(),
        ));
    }
    let (k, w) = flat_face_forms(mesh);
    let (boundary, interior): (Vec<usize>, Vec<usize>) = match condition {
        GammaCondition::Neumann => {
            let b = (0..mesh.num_vertices())
                .filter(|&v| mesh.vertex_tags[v].on_sigma())
                .collect();
            let i = (0..mesh.num_vertices())
                .filter(|&v| !mesh.vertex_tags[v].on_sigma())
                .collect();
            (b, i)
        }
        GammaCondition::Dirichlet => {
            let b = (0..mesh.num_vertices())
                .filter(|&v| mesh.vertex_tags[v] == VertexTag::Sigma)
                .collect();
            let i = (0..mesh.num_vertices())
                .filter(|&v| mesh.vertex_tags[v] == VertexTag::Interior)
                .collect();
            (b, i)
        }
        GammaCondition::ConstrainedY => {
            return Err(Error::Unsupported("use dtn_index for the constrained problem".into()));
        }
    };
    let s = schur_complement(&k, &boundary, &interior)?;
    let wbb = w.submatrix(&boundary, &boundary).to_dense();
    let pairs = dense_generalized_eigen(&s, &wbb)?;
    let label = match condition {
        GammaCondition::Neumann => "half-disk/neumann",
        _ => "half-disk/dirichlet",
    };
    Ok(SteklovSpectrum::new(
        label.into(),
        condition,
        mesh.h,
        pairs.values,
        tolerance(mesh.h, c0),
    ))
}

/// Constrained-Y Steklov spectrum with the derived counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtnResult {
    pub spectrum: SteklovSpectrum,
    pub index: usize,
    pub nullity: usize,
    /// Negative eigenvalues of `S - W`, counted directly.
    pub threshold_negative: usize,
}

impl DtnResult {
    /// The same counts in report form, with `delta - 1` as eigenvalues.
    pub fn report(&self, c0: f64, surface: &str) -> SpectrumReport {
        let shifted: Vec<f64> = self.spectrum.eigenvalues.iter().map(|d| d - 1.0).collect();
        let mut r = classify(&shifted, self.spectrum.h, c0, Route::Dtn, surface);
        r.dim = shifted.len();
        r
    }
}

/// DtN route for flat surfaces with a straight junction.
///
/// The admissible subspace is parametrized by the constraint basis, so the
/// junction condition of the harmonic extension arises variationally.
/// Reduced unknowns touching sigma are kept; all others are eliminated.
pub fn dtn_index(mesh: &YMesh, forms: &QuadFormSet, c0: f64, surface: &str) -> Result<DtnResult> {
    if forms.potential.max_abs() != 0.0 || forms.gamma.max_abs() != 0.0 {
        return Err(Error::Unsupported(format!(
            "the DtN route needs flat faces and a straight junction; `{surface}` is not flat"
        )));
    }
    let basis = constraint_basis(mesh);
    let k = basis.congruence(&forms.stiffness)?;
    let w = basis.congruence(&CsrMatrix::linear_combination(&[(-1.0, &forms.sigma)]))?;
    let on_sigma: Vec<bool> = (0..basis.m()).map(|i| w.row(i).any(|(_, v)| v != 0.0)).collect();
    let boundary: Vec<usize> = (0..basis.m()).filter(|&i| on_sigma[i]).collect();
    let interior: Vec<usize> = (0..basis.m()).filter(|&i| !on_sigma[i]).collect();
    let s = schur_complement(&k, &boundary, &interior)?;
    let wbb = w.submatrix(&boundary, &boundary).to_dense();
    let pairs = dense_generalized_eigen(&s, &wbb)?;
    let tol = tolerance(mesh.h, c0);
    let spectrum = SteklovSpectrum::new(
        format!("{surface}/constrained-y"),
        GammaCondition::ConstrainedY,
        mesh.h,
        pairs.values,
        tol,
    );
    let threshold_negative = dense_inertia(&(&s - &wbb), 0.0).negative;
    Ok(DtnResult {
        index: spectrum.below_one,
        nullity: spectrum.at_one,
        spectrum,
        threshold_negative,
    })
}

/// Nodal interpolants of the linear Steklov modes on the Y-cone.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticNullBasis {
    pub labels: Vec<String>,
    /// Full nodal vectors of length `n`.
    pub vectors: Vec<Vec<f64>>,
}

pub fn analytic_null_basis(mesh: &YMesh) -> Result<AnalyticNullBasis> {
    if mesh.faces.len() != 3 || mesh.faces.iter().any(|f| f.domain.kind != DomainKind::HalfDisk) {
        return Err(Error::Unsupported(
            "the analytic null basis is defined on the Y-cone mesh".into(),
        ));
    }
    let n = mesh.num_dofs();
    let mut labels = Vec::new();
    let mut vectors = Vec::new();
    for j in 0..3 {
        let mut f = vec![0.0; n];
        for (v, p) in mesh.faces[j].vertices.iter().enumerate() {
            f[mesh.dof(j, v)] = p[1];
        }
        labels.push(format!("sine-{}", j + 1));
        vectors.push(f);
    }
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    for (name, c) in [
        ("cosine-a", [1.0 / s2, -1.0 / s2, 0.0]),
        ("cosine-b", [1.0 / s6, 1.0 / s6, -2.0 / s6]),
    ] {
        let mut f = vec![0.0; n];
        for (j, face) in mesh.faces.iter().enumerate() {
            for (v, p) in face.vertices.iter().enumerate() {
                f[mesh.dof(j, v)] = c[j] * p[0];
            }
        }
        labels.push(name.to_string());
        vectors.push(f);
    }
    Ok(AnalyticNullBasis { labels, vectors })
}

/// Pencil residual `|A_r z| / |z|_{M_r}` of an admissible nodal vector,
/// with `z = Z^T f`.
pub fn pencil_residual(pencil: &ReducedPencil, basis: &ConstraintBasis, f: &[f64]) -> Result<f64> {
    if basis.m() != pencil.dim() {
        return Err(Error::Dimension {
            expected: pencil.dim(),
            got: basis.m(),
        });
    }
    let z = basis.restrict(f)?;
    let az = pencil.a.mul_vec(&z);
    let norm = az.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(norm / pencil.m.quad_form(&z).sqrt())
}

pub fn null_projection_residuals(
    null: &AnalyticNullBasis,
    basis: &ConstraintBasis,
    pencil: &ReducedPencil,
) -> Result<Vec<f64>> {
    null.vectors.iter().map(|f| pencil_residual(pencil, basis, f)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateField {
    pub e: [f64; 3],
    /// `<E, N_j>` per face.
    pub face_values: Vec<f64>,
    pub q: f64,
    pub tangent: bool,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

/// Tolerance below which `<E, N_j>` counts as zero.
const TANGENCY_TOL: f64 = 1e-12;

/// Normal variation induced by a fixed direction `E` on a surface with
/// constant face normals.
pub fn coordinate_field_test(
    mesh: &YMesh,
    spec: &YSurfaceSpec,
    forms: &QuadFormSet,
    e: [f64; 3],
) -> Result<CoordinateField> {
    let len = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit(len));
    }
    if !spec.is_flat() {
        return Err(Error::Unsupported(
            "coordinate fields need constant face normals".into(),
        ));
    }
    let mut face_values = Vec::with_capacity(mesh.faces.len());
    for j in 0..mesh.faces.len() {
        let theta = 0.5 * spec.faces[j].domain.theta_max();
        let normal = evaluate_frame(spec, j, 0.5, theta)?.normal;
        let v = e[0] * normal[0] + e[1] * normal[1] + e[2] * normal[2];
        face_values.push(if v.abs() <= TANGENCY_TOL { 0.0 } else { v });
    }
    let tangent = face_values.iter().all(|&v| v == 0.0);
    let mut vector = vec![0.0; mesh.num_dofs()];
    for (j, face) in mesh.faces.iter().enumerate() {
        for v in 0..face.num_vertices() {
            vector[mesh.dof(j, v)] = face_values[j];
        }
    }
    let q = forms.apply_form(&vector)?;
    Ok(CoordinateField {
        e,
        face_values,
        q,
        tangent,
        vector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_forms, reduce};
    use crate::geometry::{canonical_surface, FaceDomain};
    use crate::mesh::{build_ymesh, mesh_face};
    use std::f64::consts::PI;

    fn pencil(name: &str, h: f64) -> (YSurfaceSpec, YMesh, QuadFormSet, ConstraintBasis, ReducedPencil) {
        let spec = canonical_surface(name, &Default::default()).unwrap();
        let mesh = build_ymesh(&spec, h).unwrap();
        let forms = assemble_forms(&mesh, &spec).unwrap();
        let basis = constraint_basis(&mesh);
        let p = reduce(&forms, &basis, h, name).unwrap();
        (spec, mesh, forms, basis, p)
    }

    #[test]
    fn ycone_counts() {
        let (_, _, _, _, p) = pencil("ycone", 0.1);
        let r = bulk_report(&p, 10, DEFAULT_C0).unwrap();
        assert_eq!(r.index, 2);
        assert_eq!(r.nullity, 3, "{:?}", r.eigenvalues);
        assert!(r.inertia_check.as_ref().unwrap().agrees);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn disk_counts() {
        let (_, _, _, _, p) = pencil("equatorial-disk", 0.1);
        let r = bulk_report(&p, 6, DEFAULT_C0).unwrap();
        assert_eq!((r.index, r.nullity), (1, 2), "{:?}", r.eigenvalues);
    }

    #[test]
    fn tiny_tolerance_is_flagged() {
        let (_, _, _, _, p) = pencil("ycone", 0.1);
        let eigs = low_spectrum(&p, 8).unwrap().values;
        let r = classify(&eigs, 0.1, 1e-99 / 0.01, Route::Bulk, "ycone");
        assert_eq!(r.nullity, 0);
        assert!(r.ambiguous);
    }

    #[test]
    fn steklov_half_disk() {
        let mesh = mesh_face(FaceDomain::half_disk(), 0.05, None).unwrap();
        let neu = steklov_face(&mesh, GammaCondition::Neumann, DEFAULT_C0).unwrap();
        assert!(neu.eigenvalues[0].abs() < 1e-8);
        for n in 1..6 {
            let d = neu.eigenvalues[n];
            assert!((d - n as f64).abs() < 0.03 * n as f64, "neumann {n}: {d}");
        }
        let dir = steklov_face(&mesh, GammaCondition::Dirichlet, DEFAULT_C0).unwrap();
        for n in 1..6 {
            let d = dir.eigenvalues[n - 1];
            assert!((d - n as f64).abs() < 0.03 * n as f64, "dirichlet {n}: {d}");
        }
    }

    #[test]
    fn dtn_matches_bulk() {
        for name in ["ycone", "equatorial-disk"] {
            let (_, mesh, forms, _, p) = pencil(name, 0.1);
            let bulk = bulk_report(&p, 10, DEFAULT_C0).unwrap();
            let dtn = dtn_index(&mesh, &forms, DEFAULT_C0, name).unwrap();
            assert_eq!((dtn.index, dtn.nullity), (bulk.index, bulk.nullity), "{name}");
            assert_eq!(dtn.threshold_negative, bulk.index);
        }
    }

    #[test]
    fn dtn_rejects_catenoid() {
        let (_, mesh, forms, _, _) = pencil("critical-catenoid", 0.2);
        assert!(matches!(
            dtn_index(&mesh, &forms, DEFAULT_C0, "critical-catenoid"),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn null_basis_is_admissible() {
        let (_, mesh, _, basis, _) = pencil("ycone", 0.1);
        let null = analytic_null_basis(&mesh).unwrap();
        assert_eq!(null.vectors.len(), 5);
        for f in &null.vectors {
            assert_eq!(basis.violation(f), 0.0);
        }
        for &v in &mesh.faces[0].gamma_vertices() {
            assert_eq!(null.vectors[0][mesh.dof(0, v)], 0.0);
        }
    }

    #[test]
    fn coordinate_fields() {
        let (spec, mesh, forms, _, _) = pencil("ycone", 0.05);
        let axis = coordinate_field_test(&mesh, &spec, &forms, [1.0, 0.0, 0.0]).unwrap();
        assert!(axis.tangent);
        assert_eq!(axis.q, 0.0);
        for e in [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]] {
            let c = coordinate_field_test(&mesh, &spec, &forms, e).unwrap();
            assert!(!c.tangent);
            assert!((c.face_values.iter().sum::<f64>()).abs() < 1e-12);
            assert!((c.q + 1.5 * PI).abs() < 1e-3 * 1.5 * PI, "{e:?}: {}", c.q);
        }
        assert!(matches!(
            coordinate_field_test(&mesh, &spec, &forms, [1.0, 1.0, 0.0]),
            Err(Error::NotUnit(_))
        ));
    }
}
