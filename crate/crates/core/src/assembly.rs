//! Discrete second-variation form on a Y-mesh.
//!
//! For nodal values `f` (one unknown per vertex per face) the index form is
//!
//! ```text
//! Q(f, f) = sum_j  int_{Sigma_j} |grad f_j|^2 - |A|^2 f_j^2
//!                + int_{sigma_j} (H . tau) f_j^2
//!                - int_{gamma_j} (H . tau) f_j^2
//! ```
//!
//! assembled with piecewise-linear elements from the induced metric of the
//! immersion. Admissible variations satisfy `f_1 + f_2 + f_3 = 0` at every
//! junction node; [`constraint_basis`] spans that subspace and [`reduce`]
//! restricts the pencil to it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{boundary_frame, frame_unchecked, BoundaryPart, YSurfaceSpec};
use crate::linalg::CsrMatrix;
use crate::mesh::{polar, EdgeTag, FaceMesh, YMesh};

/// Three-point, degree-two rule in barycentric coordinates.
const TRI_RULE: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// Two-point Gauss abscissae on `[0, 1]` (weights 1/2 each).
fn gauss2() -> [f64; 2] {
    let d = 0.5 / 3f64.sqrt();
    [0.5 - d, 0.5 + d]
}

/// Which metric the element integrals use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricChoice {
    /// Metric induced by the immersion (the default).
    Immersion,
    /// Flat metric of the parameter plane.
    Parameter,
}

/// Assembled symmetric forms, all `n x n` over the per-face unknowns.
#[derive(Clone, Debug)]
pub struct QuadFormSet {
    /// `int |grad f|^2`
    pub stiffness: CsrMatrix,
    /// `int |A|^2 f^2`
    pub potential: CsrMatrix,
    /// `int_sigma (H . tau) f^2`
    pub sigma: CsrMatrix,
    /// `- int_gamma (H . tau) f^2`
    pub gamma: CsrMatrix,
    /// `int f^2`
    pub mass: CsrMatrix,
    pub n: usize,
}

impl QuadFormSet {
    /// `K - P + B_sigma + B_gamma`.
    pub fn index_matrix(&self) -> CsrMatrix {
        CsrMatrix::linear_combination(&[
            (1.0, &self.stiffness),
            (-1.0, &self.potential),
            (1.0, &self.sigma),
            (1.0, &self.gamma),
        ])
    }

    pub fn apply_form(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: f.len(),
            });
        }
        Ok(self.stiffness.quad_form(f) - self.potential.quad_form(f)
            + self.sigma.quad_form(f)
            + self.gamma.quad_form(f))
    }
}

pub fn apply_form(forms: &QuadFormSet, f: &[f64]) -> Result<f64> {
    forms.apply_form(f)
}

type Triplet = (usize, usize, f64);

#[derive(Default)]
struct ElementOut {
    stiffness: Vec<Triplet>,
    potential: Vec<Triplet>,
    mass: Vec<Triplet>,
}

fn barycentric_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let grads = [
        [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
        [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
        [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
    ];
    (grads, 0.5 * det)
}

/// Cartesian parameter derivatives `(u_x, u_y)` from polar ones.
fn cartesian_tangents(
    u_r: &crate::geometry::Vec3,
    u_t: &crate::geometry::Vec3,
    r: f64,
    theta: f64,
) -> (crate::geometry::Vec3, crate::geometry::Vec3) {
    let (s, c) = theta.sin_cos();
    (u_r * c - u_t * (s / r), u_r * s + u_t * (c / r))
}

fn face_elements(
    spec: &YSurfaceSpec,
    face: usize,
    mesh: &FaceMesh,
    offset: usize,
    metric: MetricChoice,
) -> Result<Vec<ElementOut>> {
    mesh.triangles
        .par_iter()
        .enumerate()
        .map(|(t, tri)| {
            let p = tri.map(|v| mesh.vertices[v]);
            let (grads, area) = barycentric_gradients(p);
            let mut k = [[0.0; 3]; 3];
            let mut pot = [[0.0; 3]; 3];
            let mut mass = [[0.0; 3]; 3];
            for bary in TRI_RULE {
                let q = [
                    bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
                    bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
                ];
                let (r, theta) = polar(q);
                let (ginv, sqrt_det, a2) = match metric {
                    MetricChoice::Parameter => ([[1.0, 0.0], [0.0, 1.0]], 1.0, 0.0),
                    MetricChoice::Immersion => {
                        let fr = frame_unchecked(spec, face, r, theta)?;
                        let (ux, uy) = cartesian_tangents(&fr.u_r, &fr.u_theta, r, theta);
                        let (g11, g12, g22) = (ux.dot(&ux), ux.dot(&uy), uy.dot(&uy));
                        let det = g11 * g22 - g12 * g12;
                        if !(det > 0.0) {
                            return Err(Error::DegenerateMetric { face, triangle: t, det });
                        }
                        (
                            [[g22 / det, -g12 / det], [-g12 / det, g11 / det]],
                            det.sqrt(),
                            fr.a_squared,
                        )
                    }
                };
                let w = area / 3.0 * sqrt_det;
                for a in 0..3 {
                    for b in a..3 {
                        let ga = grads[a];
                        let gb = grads[b];
                        let gg = ga[0] * (ginv[0][0] * gb[0] + ginv[0][1] * gb[1])
                            + ga[1] * (ginv[1][0] * gb[0] + ginv[1][1] * gb[1]);
                        k[a][b] += w * gg;
                        mass[a][b] += w * bary[a] * bary[b];
                        pot[a][b] += w * a2 * bary[a] * bary[b];
                    }
                }
            }
            let mut out = ElementOut::default();
            for a in 0..3 {
                for b in 0..3 {
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    let (i, j) = (offset + tri[a], offset + tri[b]);
                    out.stiffness.push((i, j, k[lo][hi]));
                    out.mass.push((i, j, mass[lo][hi]));
                    if pot[lo][hi] != 0.0 {
                        out.potential.push((i, j, pot[lo][hi]));
                    }
                }
            }
            Ok(out)
        })
        .collect()
}

/// Boundary edge mass weighted by a coefficient evaluated at each Gauss point.
fn edge_terms(
    spec: &YSurfaceSpec,
    face: usize,
    mesh: &FaceMesh,
    offset: usize,
    tag: EdgeTag,
    metric: MetricChoice,
) -> Result<Vec<Triplet>> {
    let edges: Vec<[usize; 2]> = mesh.edges_tagged(tag).collect();
    let per_edge: Vec<Vec<Triplet>> = edges
        .par_iter()
        .map(|&[a, b]| {
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let mut e = [[0.0; 2]; 2];
            for s in gauss2() {
                let q = [pa[0] + s * d[0], pa[1] + s * d[1]];
                let (r, theta) = polar(q);
                let (coef, r_b, theta_b) = match tag {
                    EdgeTag::Sigma => {
                        let r_b = if mesh.domain.kind == crate::geometry::DomainKind::AnnulusBand
                            && (polar(pa).0 - mesh.domain.inner_radius).abs() < 1e-9
                        {
                            mesh.domain.inner_radius
                        } else {
                            1.0
                        };
                        let bf = boundary_frame(spec, face, r_b, theta, BoundaryPart::Sigma)?;
                        (bf.h_dot_tau, r, theta)
                    }
                    EdgeTag::Gamma => {
                        let theta_b = if q[0] >= 0.0 { 0.0 } else { std::f64::consts::PI };
                        let bf = boundary_frame(spec, face, r, theta_b, BoundaryPart::Gamma)?;
                        (-bf.h_dot_tau, r, theta_b)
                    }
                };
                if coef == 0.0 {
                    continue;
                }
                let speed = match metric {
                    MetricChoice::Parameter => d[0].hypot(d[1]),
                    MetricChoice::Immersion => {
                        let fr = frame_unchecked(spec, face, r_b, theta_b)?;
                        let (ux, uy) = cartesian_tangents(&fr.u_r, &fr.u_theta, r_b, theta_b);
                        (ux * d[0] + uy * d[1]).norm()
                    }
                };
                let phi = [1.0 - s, s];
                for i in 0..2 {
                    for j in 0..2 {
                        e[i][j] += 0.5 * speed * coef * phi[i] * phi[j];
                    }
                }
            }
            let idx = [offset + a, offset + b];
            let mut out = Vec::with_capacity(4);
            for i in 0..2 {
                for j in 0..2 {
                    if e[i][j] != 0.0 {
                        out.push((idx[i], idx[j], e[i][j]));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_edge.into_iter().flatten().collect())
}

pub fn assemble_forms(mesh: &YMesh, spec: &YSurfaceSpec) -> Result<QuadFormSet> {
    assemble_forms_with(mesh, spec, MetricChoice::Immersion)
}

/// Element-by-element assembly. Element contributions are computed in
/// parallel and summed in mesh order, so the result is bit-identical for
/// any number of worker threads.
pub fn assemble_forms_with(mesh: &YMesh, spec: &YSurfaceSpec, metric: MetricChoice) -> Result<QuadFormSet> {
    if mesh.faces.len() != spec.faces.len() {
        return Err(Error::MeshSpecMismatch(format!(
            "mesh has {} faces, surface has {}",
            mesh.faces.len(),
            spec.faces.len()
        )));
    }
    for (j, (m, f)) in mesh.faces.iter().zip(&spec.faces).enumerate() {
        if m.domain.kind != f.domain.kind || (m.domain.inner_radius - f.domain.inner_radius).abs() > 1e-12 {
            return Err(Error::MeshSpecMismatch(format!(
                "face {j} domain differs from the surface"
            )));
        }
    }
    let n = mesh.num_dofs();
    let (mut k, mut p, mut m, mut bs, mut bg) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (j, face) in mesh.faces.iter().enumerate() {
        let offset = mesh.offsets[j];
        for e in face_elements(spec, j, face, offset, metric)? {
            k.extend(e.stiffness);
            p.extend(e.potential);
            m.extend(e.mass);
        }
        bs.extend(edge_terms(spec, j, face, offset, EdgeTag::Sigma, metric)?);
        bg.extend(edge_terms(spec, j, face, offset, EdgeTag::Gamma, metric)?);
    }
    Ok(QuadFormSet {
        stiffness: CsrMatrix::from_triplets(n, n, k),
        potential: CsrMatrix::from_triplets(n, n, p),
        sigma: CsrMatrix::from_triplets(n, n, bs),
        gamma: CsrMatrix::from_triplets(n, n, bg),
        mass: CsrMatrix::from_triplets(n, n, m),
        n,
    })
}

/// Stiffness matrix and unit-weight sigma mass of a single flat face in its
/// parameter metric.
pub fn flat_face_forms(mesh: &FaceMesh) -> (CsrMatrix, CsrMatrix) {
    let n = mesh.num_vertices();
    let mut k = Vec::with_capacity(9 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let p = tri.map(|v| mesh.vertices[v]);
        let (grads, area) = barycentric_gradients(p);
        for a in 0..3 {
            for b in 0..3 {
                let g = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                k.push((tri[a], tri[b], area * g));
            }
        }
    }
    let mut w = Vec::new();
    for [a, b] in mesh.edges_tagged(EdgeTag::Sigma) {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        w.extend([
            (a, a, len / 3.0),
            (b, b, len / 3.0),
            (a, b, len / 6.0),
            (b, a, len / 6.0),
        ]);
    }
    (CsrMatrix::from_triplets(n, n, k), CsrMatrix::from_triplets(n, n, w))
}

/// Basis of the admissible subspace `{f : f_1 + f_2 + f_3 = 0 at every
/// junction node}`.
///
/// Each junction node contributes the two orthonormal columns
/// `(1, -1, 0) / sqrt 2` and `(1, 1, -2) / sqrt 6` on its three unknowns;
/// every other unknown gets an identity column. The columns are orthonormal,
/// so `Z^T Z = I` and `Z^T f` recovers the coordinates of an admissible `f`.
#[derive(Clone, Debug)]
pub struct ConstraintBasis {
    /// `n x m` basis matrix.
    pub z: CsrMatrix,
    /// One row per junction node summing its three unknowns.
    pub constraint: CsrMatrix,
}

impl ConstraintBasis {
    pub fn n(&self) -> usize {
        self.z.n_rows
    }

    pub fn m(&self) -> usize {
        self.z.n_cols
    }

    /// `Z y`
    pub fn expand(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.m() {
            return Err(Error::Dimension {
                expected: self.m(),
                got: y.len(),
            });
        }
        Ok(self.z.mul_vec(y))
    }

    /// `Z^T f`
    pub fn restrict(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: f.len(),
            });
        }
        let mut y = vec![0.0; self.m()];
        for (i, j, v) in self.z.triplets() {
            y[j] += v * f[i];
        }
        Ok(y)
    }

    /// Largest junction-sum violation `max |C f|`.
    pub fn violation(&self, f: &[f64]) -> f64 {
        self.constraint.mul_vec(f).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Z^T A Z`, symmetrized.
    pub fn congruence(&self, a: &CsrMatrix) -> Result<CsrMatrix> {
        if a.n_rows != self.n() || a.n_cols != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: a.n_rows,
            });
        }
        let mut t = Vec::with_capacity(a.nnz() * 2);
        for (i, j, v) in a.triplets() {
            for (p, zp) in self.z.row(i) {
                for (q, zq) in self.z.row(j) {
                    t.push((p, q, zp * v * zq));
                }
            }
        }
        Ok(CsrMatrix::from_triplets(self.m(), self.m(), t).symmetrized())
    }
}

pub fn constraint_basis(mesh: &YMesh) -> ConstraintBasis {
    let n = mesh.num_dofs();
    if mesh.junction.is_empty() {
        return ConstraintBasis {
            z: CsrMatrix::identity(n),
            constraint: CsrMatrix::zeros(0, n),
        };
    }
    // junction node owning each face-0 junction dof; other faces' junction dofs are skipped
    let mut owner = vec![None; n];
    let mut skipped = vec![false; n];
    for (g, triple) in mesh.junction.iter().enumerate() {
        owner[mesh.dof(0, triple[0])] = Some(g);
        for (j, &v) in triple.iter().enumerate().skip(1) {
            skipped[mesh.dof(j, v)] = true;
        }
    }
    let (a, b) = (1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt());
    let mut t = Vec::with_capacity(n + 4 * mesh.junction.len());
    let mut col = 0;
    for dof in 0..n {
        if skipped[dof] {
            continue;
        }
        match owner[dof] {
            Some(g) => {
                let d: Vec<usize> = mesh.junction[g]
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| mesh.dof(j, v))
                    .collect();
                t.extend([(d[0], col, a), (d[1], col, -a)]);
                t.extend([(d[0], col + 1, b), (d[1], col + 1, b), (d[2], col + 1, -2.0 * b)]);
                col += 2;
            }
            None => {
                t.push((dof, col, 1.0));
                col += 1;
            }
        }
    }
    let z = CsrMatrix::from_triplets(n, col, t);
    let c: Vec<Triplet> = mesh
        .junction
        .iter()
        .enumerate()
        .flat_map(|(g, triple)| triple.iter().enumerate().map(move |(j, &v)| (g, mesh.dof(j, v), 1.0)))
        .collect();
    ConstraintBasis {
        z,
        constraint: CsrMatrix::from_triplets(mesh.junction.len(), n, c),
    }
}

/// The index form and mass restricted to the admissible subspace.
#[derive(Clone, Debug)]
pub struct ReducedPencil {
    /// `Z^T (K - P + B_sigma + B_gamma) Z`
    pub a: CsrMatrix,
    /// `Z^T M Z`
    pub m: CsrMatrix,
    pub h: f64,
    pub surface: String,
}

impl ReducedPencil {
    pub fn dim(&self) -> usize {
        self.a.n_rows
    }
}

pub fn reduce(forms: &QuadFormSet, basis: &ConstraintBasis, h: f64, surface: &str) -> Result<ReducedPencil> {
    if forms.n != basis.n() {
        return Err(Error::Dimension {
            expected: basis.n(),
            got: forms.n,
        });
    }
    Ok(ReducedPencil {
        a: basis.congruence(&forms.index_matrix())?,
        m: basis.congruence(&forms.mass)?,
        h,
        surface: surface.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical_surface;
    use crate::mesh::build_ymesh;
    use std::f64::consts::PI;

    fn setup(name: &str, h: f64) -> (YSurfaceSpec, YMesh, QuadFormSet) {
        let spec = canonical_surface(name, &Default::default()).unwrap();
        let mesh = build_ymesh(&spec, h).unwrap();
        let forms = assemble_forms(&mesh, &spec).unwrap();
        (spec, mesh, forms)
    }

    /// Nodal vector equal to `c[j]` on face `j`.
    fn face_constants(mesh: &YMesh, c: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; mesh.num_dofs()];
        for (j, face) in mesh.faces.iter().enumerate() {
            for v in 0..face.num_vertices() {
                f[mesh.dof(j, v)] = c[j];
            }
        }
        f
    }

    #[test]
    fn ycone_flat_terms_vanish_exactly() {
        let (_, _, forms) = setup("ycone", 0.2);
        assert_eq!(forms.potential.max_abs(), 0.0);
        assert_eq!(forms.gamma.max_abs(), 0.0);
        assert_eq!(forms.stiffness.max_asymmetry(), 0.0);
        assert_eq!(forms.mass.max_asymmetry(), 0.0);
    }

    #[test]
    fn sigma_term_integrates_boundary_length() {
        let (_, mesh, forms) = setup("ycone", 0.05);
        let f = face_constants(&mesh, &[1.0, 0.0, 0.0]);
        let v = forms.sigma.quad_form(&f);
        assert!((v + PI).abs() <= 1e-3 * PI, "{v}");
        let (_, mesh, forms) = setup("equatorial-disk", 0.05);
        let f = face_constants(&mesh, &[1.0]);
        let v = forms.sigma.quad_form(&f);
        assert!((v + 2.0 * PI).abs() <= 1e-3 * 2.0 * PI, "{v}");
    }

    #[test]
    fn compatible_constants() {
        let (_, mesh, forms) = setup("ycone", 0.05);
        let basis = constraint_basis(&mesh);
        for (c, expected) in [([1.0, -1.0, 0.0], -2.0 * PI), ([1.0, 1.0, -2.0], -6.0 * PI)] {
            let f = face_constants(&mesh, &c);
            assert_eq!(basis.violation(&f), 0.0);
            let q = forms.apply_form(&f).unwrap();
            assert!((q - expected).abs() <= 1e-3 * expected.abs(), "{q} vs {expected}");
        }
    }

    #[test]
    fn linear_mode_on_one_face_is_isotropic() {
        // r sin(theta) on a half-disk: Dirichlet energy pi/2 equals the boundary integral
        let (_, mesh, forms) = setup("ycone", 0.05);
        let mut f = vec![0.0; mesh.num_dofs()];
        for (v, p) in mesh.faces[0].vertices.iter().enumerate() {
            f[mesh.dof(0, v)] = p[1];
        }
        let q = forms.apply_form(&f).unwrap();
        assert!(q.abs() < 5.0 * 0.05 * 0.05, "{q}");
        let (_, mesh2, forms2) = setup("ycone", 0.025);
        let mut f2 = vec![0.0; mesh2.num_dofs()];
        for (v, p) in mesh2.faces[0].vertices.iter().enumerate() {
            f2[mesh2.dof(0, v)] = p[1];
        }
        let q2 = forms2.apply_form(&f2).unwrap();
        assert!(q2.abs() < q.abs() / 3.0, "{q} -> {q2}");
    }

    #[test]
    fn constraint_basis_shape() {
        let (_, mesh, _) = setup("ycone", 0.1);
        let basis = constraint_basis(&mesh);
        assert_eq!(mesh.junction.len(), 21);
        assert_eq!(basis.m(), mesh.num_dofs() - 21);
        let ones = face_constants(&mesh, &[1.0, 1.0, 1.0]);
        assert!(basis.violation(&ones) > 0.0);
        let y = basis.restrict(&ones).unwrap();
        let back = basis.expand(&y).unwrap();
        assert!(back.iter().zip(&ones).any(|(a, b)| (a - b).abs() > 0.5));

        // (1, -1, 0) on the junction, arbitrary elsewhere, lies in the span
        let mut f: Vec<f64> = (0..mesh.num_dofs()).map(|i| (i as f64 * 0.37).sin()).collect();
        for t in &mesh.junction {
            f[mesh.dof(0, t[0])] = 1.0;
            f[mesh.dof(1, t[1])] = -1.0;
            f[mesh.dof(2, t[2])] = 0.0;
        }
        let back = basis.expand(&basis.restrict(&f).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn reduce_identity_for_disk() {
        let (_, mesh, forms) = setup("equatorial-disk", 0.2);
        let basis = constraint_basis(&mesh);
        let pencil = reduce(&forms, &basis, mesh.h, "equatorial-disk").unwrap();
        assert_eq!(pencil.a, forms.index_matrix());
        assert_eq!(pencil.m, forms.mass);
    }

    #[test]
    fn parameter_and_induced_metric_agree_on_flat_faces() {
        let (spec, mesh, forms) = setup("ycone", 0.1);
        let flat = assemble_forms_with(&mesh, &spec, MetricChoice::Parameter).unwrap();
        for (a, b) in forms.stiffness.values.iter().zip(&flat.stiffness.values) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        assert_eq!(forms.stiffness.indices, flat.stiffness.indices);
    }

    #[test]
    fn mismatch_is_rejected() {
        let (_, mesh, _) = setup("ycone", 0.2);
        let disk = canonical_surface("equatorial-disk", &Default::default()).unwrap();
        assert!(matches!(assemble_forms(&mesh, &disk), Err(Error::MeshSpecMismatch(_))));
        let (_, _, forms) = setup("ycone", 0.2);
        assert!(matches!(forms.apply_form(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn catenoid_forms_assemble() {
        let (_, _, forms) = setup("critical-catenoid", 0.1);
        assert!(forms.potential.max_abs() > 0.0);
        assert!(forms.stiffness.max_asymmetry() < 1e-14);
        // conformal invariance of the Dirichlet energy: induced and flat stiffness agree
        let spec = canonical_surface("critical-catenoid", &Default::default()).unwrap();
        let mesh = build_ymesh(&spec, 0.1).unwrap();
        let flat = assemble_forms_with(&mesh, &spec, MetricChoice::Parameter).unwrap();
        let diff = CsrMatrix::linear_combination(&[(1.0, &forms.stiffness), (-1.0, &flat.stiffness)]);
        assert!(diff.max_abs() < 1e-10, "{}", diff.max_abs());
    }
}
