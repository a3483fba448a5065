//! Structured polar triangulations of face domains.
//!
//! Meshes are built ring by ring: concentric rings at the prescribed radii,
//! each split into roughly `pi r / dr` arcs so triangles stay close to
//! equilateral, stitched together by the shorter-diagonal rule. All three
//! faces of a Y-surface use the same ring radii, so their meshes are
//! combinatorially identical and share one junction discretization.
//!
//! Vertex coordinates are Cartesian parameter coordinates
//! `(x, y) = (r cos theta, r sin theta)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainKind, FaceDomain, YSurfaceSpec};

/// Tolerance used when matching junction vertices across faces.
pub const JUNCTION_TOL: f64 = 1e-9;
/// Smallest admissible triangle angle, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;
pub const DEFAULT_MAX_NODES: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeTag {
    Sigma,
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexTag {
    Interior,
    Sigma,
    Gamma,
    /// Both sigma and gamma: the two points `(r, theta) = (1, 0), (1, pi)`.
    Corner,
}

impl VertexTag {
    pub fn on_sigma(self) -> bool {
        matches!(self, VertexTag::Sigma | VertexTag::Corner)
    }

    pub fn on_gamma(self) -> bool {
        matches!(self, VertexTag::Gamma | VertexTag::Corner)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MeshOptions {
    pub max_nodes: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceMesh {
    pub domain: FaceDomain,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges as sorted vertex pairs.
    pub boundary_edges: Vec<([usize; 2], EdgeTag)>,
    pub vertex_tags: Vec<VertexTag>,
    pub h: f64,
}

/// Polar coordinates of a parameter point, with `theta` in `[0, pi]` on the
/// closed upper half plane and in `(-pi, pi]` otherwise.
pub fn polar(p: [f64; 2]) -> (f64, f64) {
    (p[0].hypot(p[1]), p[1].atan2(p[0]))
}

fn sorted(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl FaceMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// All edges as sorted pairs, in a deterministic order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|t| [sorted(t[0], t[1]), sorted(t[1], t[2]), sorted(t[2], t[0])])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    pub fn gamma_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertex_tags[v].on_gamma())
            .collect()
    }

    pub fn sigma_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertex_tags[v].on_sigma())
            .collect()
    }

    pub fn edges_tagged(&self, tag: EdgeTag) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.boundary_edges
            .iter()
            .filter(move |(_, t)| *t == tag)
            .map(|(e, _)| *e)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let p = t.map(|v| self.vertices[v]);
                (0..3)
                    .map(|i| {
                        let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
                        let u = [b[0] - a[0], b[1] - a[1]];
                        let w = [c[0] - a[0], c[1] - a[1]];
                        let cos = (u[0] * w[0] + u[1] * w[1]) / ((u[0].hypot(u[1])) * (w[0].hypot(w[1])));
                        cos.clamp(-1.0, 1.0).acos().to_degrees()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Check every structural invariant of a face mesh.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.vertex_tags.len() != nv {
            return Err(Error::MeshInvariant(
                "vertex tag count differs from vertex count".into(),
            ));
        }
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::MeshInvariant(format!(
                    "triangle {i} references a missing vertex"
                )));
            }
            if signed_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]) <= 0.0 {
                return Err(Error::MeshInvariant(format!("triangle {i} is not counter-clockwise")));
            }
        }
        let mut count: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for t in &self.triangles {
            for e in [sorted(t[0], t[1]), sorted(t[1], t[2]), sorted(t[2], t[0])] {
                *count.entry(e).or_default() += 1;
            }
        }
        if let Some((e, _)) = count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::MeshInvariant(format!(
                "edge {e:?} shared by more than two triangles"
            )));
        }
        let mut tagged: BTreeMap<[usize; 2], EdgeTag> = BTreeMap::new();
        for &(e, tag) in &self.boundary_edges {
            if tagged.insert(e, tag).is_some() {
                return Err(Error::MeshInvariant(format!("boundary edge {e:?} tagged twice")));
            }
            if count.get(&e) != Some(&1) {
                return Err(Error::MeshInvariant(format!(
                    "tagged edge {e:?} is not a boundary edge"
                )));
            }
        }
        if let Some((e, _)) = count.iter().find(|(e, &c)| c == 1 && !tagged.contains_key(*e)) {
            return Err(Error::MeshInvariant(format!("boundary edge {e:?} carries no tag")));
        }
        for (&e, &tag) in &tagged {
            for v in e {
                let ok = match tag {
                    EdgeTag::Sigma => self.vertex_tags[v].on_sigma(),
                    EdgeTag::Gamma => self.vertex_tags[v].on_gamma(),
                };
                if !ok {
                    return Err(Error::MeshInvariant(format!(
                        "vertex {v} on a {tag:?} edge has tag {:?}",
                        self.vertex_tags[v]
                    )));
                }
            }
        }
        for (v, (&p, &tag)) in self.vertices.iter().zip(&self.vertex_tags).enumerate() {
            let (r, _) = polar(p);
            if tag.on_sigma() {
                let off = (r - 1.0).abs().min(if self.domain.kind == DomainKind::AnnulusBand {
                    (r - self.domain.inner_radius).abs()
                } else {
                    f64::INFINITY
                });
                if off > 1e-12 {
                    return Err(Error::MeshInvariant(format!(
                        "sigma vertex {v} is off the circle by {off:e}"
                    )));
                }
            }
            if tag.on_gamma() && p[1] != 0.0 {
                return Err(Error::MeshInvariant(format!(
                    "gamma vertex {v} is off the junction rays"
                )));
            }
        }
        let expected_chi = if self.domain.kind == DomainKind::AnnulusBand {
            0
        } else {
            1
        };
        let chi = self.euler_characteristic();
        if chi != expected_chi {
            return Err(Error::MeshInvariant(format!(
                "Euler characteristic {chi}, expected {expected_chi}"
            )));
        }
        let angle = self.min_angle_deg();
        if angle < MIN_ANGLE_DEG {
            return Err(Error::MeshInvariant(format!(
                "minimum angle {angle:.2} deg below {MIN_ANGLE_DEG}"
            )));
        }
        Ok(())
    }
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub fn mesh_face(domain: FaceDomain, h: f64, gamma_nodes: Option<&[f64]>) -> Result<FaceMesh> {
    mesh_face_with(domain, h, gamma_nodes, &MeshOptions::default())
}

/// Triangulate a face domain with rings at spacing `h`, or at the radii of
/// `gamma_nodes` (half-disk only; must run from 0 to 1).
pub fn mesh_face_with(domain: FaceDomain, h: f64, gamma_nodes: Option<&[f64]>, opts: &MeshOptions) -> Result<FaceMesh> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Mesh(format!("mesh size h = {h} must lie in (0, 1)")));
    }
    let radii: Vec<f64> = match (domain.kind, gamma_nodes) {
        (DomainKind::HalfDisk, Some(nodes)) => {
            check_gamma_nodes(nodes)?;
            nodes.to_vec()
        }
        (_, Some(_)) => return Err(Error::Mesh("gamma nodes given for a domain without a junction".into())),
        (DomainKind::AnnulusBand, None) => {
            let r0 = domain.inner_radius;
            if !(r0 > 0.0 && r0 < 1.0) {
                return Err(Error::Mesh(format!("annulus inner radius {r0} not in (0, 1)")));
            }
            let n = ((1.0 - r0) / h - 1e-9).ceil().max(1.0) as usize;
            (0..=n).map(|i| r0 + (1.0 - r0) * i as f64 / n as f64).collect()
        }
        (_, None) => {
            let n = (1.0 / h - 1e-9).ceil() as usize;
            (0..=n)
                .map(|i| if i == n { 1.0 } else { i as f64 / n as f64 })
                .collect()
        }
    };
    let h_eff = radii.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);

    let half = domain.kind == DomainKind::HalfDisk;
    let arc = if half { PI } else { 2.0 * PI };
    let min_segments = if half { 3 } else { 6 };
    // ring 0 is the center point for disks and the inner circle for the annulus
    let has_center = domain.kind != DomainKind::AnnulusBand;
    let mut segments = vec![0usize; radii.len()];
    for i in 0..radii.len() {
        if i == 0 && has_center {
            continue;
        }
        let dr = if i == 0 {
            radii[1] - radii[0]
        } else {
            radii[i] - radii[i - 1]
        };
        let s = ((arc * radii[i] / dr).round() as usize).max(min_segments);
        let prev = if i > 0 { segments[i - 1] } else { 0 };
        segments[i] = s.max(prev);
    }
    let needed: usize = segments
        .iter()
        .map(|&s| {
            if s == 0 {
                1
            } else if half {
                s + 1
            } else {
                s
            }
        })
        .sum();
    if needed > opts.max_nodes {
        return Err(Error::NodeBudget {
            needed,
            cap: opts.max_nodes,
        });
    }

    let mut vertices = Vec::with_capacity(needed);
    let mut vertex_tags = Vec::with_capacity(needed);
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(radii.len());
    let last = radii.len() - 1;
    for (i, (&r, &s)) in radii.iter().zip(&segments).enumerate() {
        if s == 0 {
            vertices.push([0.0, 0.0]);
            vertex_tags.push(if half { VertexTag::Gamma } else { VertexTag::Interior });
            rings.push(vec![vertices.len() - 1]);
            continue;
        }
        let on_sigma = i == last || (!has_center && i == 0);
        let count = if half { s + 1 } else { s };
        let mut ring = Vec::with_capacity(count);
        for k in 0..count {
            let p = if half && k == 0 {
                [r, 0.0]
            } else if half && k == s {
                [-r, 0.0]
            } else {
                let t = arc * k as f64 / s as f64;
                [r * t.cos(), r * t.sin()]
            };
            let end = half && (k == 0 || k == s);
            vertex_tags.push(match (on_sigma, end) {
                (true, true) => VertexTag::Corner,
                (true, false) => VertexTag::Sigma,
                (false, true) => VertexTag::Gamma,
                (false, false) => VertexTag::Interior,
            });
            vertices.push(p);
            ring.push(vertices.len() - 1);
        }
        rings.push(ring);
    }

    let mut triangles = Vec::new();
    for w in rings.windows(2) {
        let (inner, outer) = (&w[0], &w[1]);
        let close = |ring: &Vec<usize>| {
            let mut r = ring.clone();
            if !half && ring.len() > 1 {
                r.push(ring[0]);
            }
            r
        };
        if inner.len() == 1 {
            let outer = close(outer);
            for k in 0..outer.len() - 1 {
                triangles.push([inner[0], outer[k], outer[k + 1]]);
            }
        } else {
            stitch(&vertices, &close(inner), &close(outer), &mut triangles);
        }
    }
    for t in &mut triangles {
        if signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }

    let mut boundary_edges = Vec::new();
    let closed_ring_edges = |ring: &Vec<usize>, out: &mut Vec<([usize; 2], EdgeTag)>| {
        for k in 0..ring.len() - 1 {
            out.push((sorted(ring[k], ring[k + 1]), EdgeTag::Sigma));
        }
        if !half {
            out.push((sorted(ring[ring.len() - 1], ring[0]), EdgeTag::Sigma));
        }
    };
    closed_ring_edges(&rings[last], &mut boundary_edges);
    if !has_center {
        closed_ring_edges(&rings[0], &mut boundary_edges);
    }
    if half {
        for w in rings.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            boundary_edges.push((sorted(a[0], b[0]), EdgeTag::Gamma));
            boundary_edges.push((sorted(a[a.len() - 1], b[b.len() - 1]), EdgeTag::Gamma));
        }
    }
    boundary_edges.sort_unstable();

    Ok(FaceMesh {
        domain,
        vertices,
        triangles,
        boundary_edges,
        vertex_tags,
        h: h_eff,
    })
}

fn check_gamma_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 || nodes[0] != 0.0 || nodes[nodes.len() - 1] != 1.0 {
        return Err(Error::Mesh("gamma nodes must start at r = 0 and end at r = 1".into()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Mesh("gamma nodes must be strictly increasing".into()));
    }
    Ok(())
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Triangulate the band between two open vertex chains running in the same
/// angular direction, always taking the shorter diagonal.
fn stitch(v: &[[f64; 2]], inner: &[usize], outer: &[usize], out: &mut Vec<[usize; 3]>) {
    let (mut i, mut j) = (0, 0);
    while i + 1 < inner.len() || j + 1 < outer.len() {
        let advance_outer = if i + 1 == inner.len() {
            true
        } else if j + 1 == outer.len() {
            false
        } else {
            dist(v[inner[i]], v[outer[j + 1]]) <= dist(v[inner[i + 1]], v[outer[j]])
        };
        if advance_outer {
            out.push([inner[i], outer[j], outer[j + 1]]);
            j += 1;
        } else {
            out.push([inner[i], outer[j], inner[i + 1]]);
            i += 1;
        }
    }
}

/// Uniform refinement: each triangle is split into four, midpoints of sigma
/// edges are projected back onto their circle.
pub fn refine_face(mesh: &FaceMesh, opts: &MeshOptions) -> Result<FaceMesh> {
    let edges = mesh.edges();
    let needed = mesh.vertices.len() + edges.len();
    if needed > opts.max_nodes {
        return Err(Error::NodeBudget {
            needed,
            cap: opts.max_nodes,
        });
    }
    let tags: BTreeMap<[usize; 2], EdgeTag> = mesh.boundary_edges.iter().copied().collect();
    let mut vertices = mesh.vertices.clone();
    let mut vertex_tags = mesh.vertex_tags.clone();
    let mut midpoint: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for e in &edges {
        let (a, b) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
        let mut p = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let tag = match tags.get(e) {
            Some(EdgeTag::Sigma) => {
                let (ra, _) = polar(a);
                let target =
                    if mesh.domain.kind == DomainKind::AnnulusBand && (ra - mesh.domain.inner_radius).abs() < 1e-9 {
                        mesh.domain.inner_radius
                    } else {
                        1.0
                    };
                let (r, _) = polar(p);
                p = [p[0] * target / r, p[1] * target / r];
                VertexTag::Sigma
            }
            Some(EdgeTag::Gamma) => {
                p[1] = 0.0;
                VertexTag::Gamma
            }
            None => VertexTag::Interior,
        };
        vertices.push(p);
        vertex_tags.push(tag);
        midpoint.insert(*e, vertices.len() - 1);
    }
    let mid = |a: usize, b: usize| midpoint[&sorted(a, b)];
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for &([a, b], tag) in &mesh.boundary_edges {
        let m = mid(a, b);
        boundary_edges.push((sorted(a, m), tag));
        boundary_edges.push((sorted(m, b), tag));
    }
    boundary_edges.sort_unstable();
    Ok(FaceMesh {
        domain: mesh.domain,
        vertices,
        triangles,
        boundary_edges,
        vertex_tags,
        h: 0.5 * mesh.h,
    })
}

/// Meshes of all faces of a surface with the junction identification.
///
/// Each face keeps its own unknowns: the global number of vertex `v` on face
/// `j` is `offsets[j] + v`, and junction values are tied only through the
/// linear constraint built in the assembly module.
#[derive(Clone, Debug, PartialEq)]
pub struct YMesh {
    pub faces: Vec<FaceMesh>,
    /// For each junction node, its vertex index on every face.
    pub junction: Vec<Vec<usize>>,
    pub offsets: Vec<usize>,
    pub h: f64,
}

impl YMesh {
    pub fn new(faces: Vec<FaceMesh>) -> Result<Self> {
        let junction = if faces.iter().any(|f| f.domain.has_gamma()) {
            match_junction(&faces)?
        } else {
            Vec::new()
        };
        let mut offsets = Vec::with_capacity(faces.len());
        let mut acc = 0;
        for f in &faces {
            offsets.push(acc);
            acc += f.vertices.len();
        }
        let h = faces.iter().map(|f| f.h).fold(0.0, f64::max);
        Ok(Self {
            faces,
            junction,
            offsets,
            h,
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.faces.iter().map(|f| f.vertices.len()).sum()
    }

    pub fn dof(&self, face: usize, vertex: usize) -> usize {
        self.offsets[face] + vertex
    }

    /// Face and local vertex of a global degree of freedom.
    pub fn locate(&self, dof: usize) -> (usize, usize) {
        let face = self.offsets.partition_point(|&o| o <= dof) - 1;
        (face, dof - self.offsets[face])
    }

    pub fn validate(&self) -> Result<()> {
        if self.faces.iter().any(|f| f.domain.has_gamma()) {
            let expected = match_junction(&self.faces)?;
            if expected != self.junction {
                return Err(Error::MeshInvariant(
                    "junction map is not the coordinate matching".into(),
                ));
            }
        } else if !self.junction.is_empty() {
            return Err(Error::MeshInvariant(
                "junction map on a surface without junction".into(),
            ));
        }
        for (j, f) in self.faces.iter().enumerate() {
            f.validate()
                .map_err(|e| Error::MeshInvariant(format!("face {j}: {e}")))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MeshDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeshDoc = serde_json::from_str(text)?;
        let mesh = YMesh::try_from(doc)?;
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Pair up the gamma vertices of all faces by parameter coordinates. Every
/// face must carry the same gamma discretization to within `JUNCTION_TOL`.
fn match_junction(faces: &[FaceMesh]) -> Result<Vec<Vec<usize>>> {
    let mut per_face: Vec<Vec<usize>> = Vec::with_capacity(faces.len());
    for (j, f) in faces.iter().enumerate() {
        if !f.domain.has_gamma() {
            return Err(Error::MeshInvariant(format!("face {j} has no junction but others do")));
        }
        let mut g = f.gamma_vertices();
        g.sort_by(|&a, &b| f.vertices[a][0].total_cmp(&f.vertices[b][0]));
        per_face.push(g);
    }
    let n = per_face[0].len();
    if let Some(j) = per_face.iter().position(|g| g.len() != n) {
        return Err(Error::MeshInvariant(format!(
            "face {j} has {} junction vertices, face 0 has {n}",
            per_face[j].len()
        )));
    }
    let mut junction = Vec::with_capacity(n);
    for k in 0..n {
        let triple: Vec<usize> = per_face.iter().map(|g| g[k]).collect();
        let p0 = faces[0].vertices[triple[0]];
        for (j, &v) in triple.iter().enumerate().skip(1) {
            let d = dist(p0, faces[j].vertices[v]);
            if d > JUNCTION_TOL {
                return Err(Error::MeshInvariant(format!(
                    "junction node {k}: face {j} vertex {v} is {d:e} away from face 0"
                )));
            }
        }
        junction.push(triple);
    }
    Ok(junction)
}

pub fn build_ymesh(spec: &YSurfaceSpec, h: f64) -> Result<YMesh> {
    build_ymesh_with(spec, h, None, &MeshOptions::default())
}

/// Mesh every face of `spec`. With a junction, the gamma discretization
/// (uniform at spacing `h` unless `gamma_nodes` is given) is generated once
/// and shared by all three faces.
pub fn build_ymesh_with(spec: &YSurfaceSpec, h: f64, gamma_nodes: Option<&[f64]>, opts: &MeshOptions) -> Result<YMesh> {
    let shared: Option<Vec<f64>> = if spec.has_junction() {
        Some(match gamma_nodes {
            Some(nodes) => nodes.to_vec(),
            None => {
                if !(h > 0.0 && h < 1.0) {
                    return Err(Error::Mesh(format!("mesh size h = {h} must lie in (0, 1)")));
                }
                let n = (1.0 / h - 1e-9).ceil() as usize;
                (0..=n)
                    .map(|i| if i == n { 1.0 } else { i as f64 / n as f64 })
                    .collect()
            }
        })
    } else {
        None
    };
    let faces = spec
        .faces
        .iter()
        .map(|f| mesh_face_with(f.domain, h, shared.as_deref().filter(|_| f.domain.has_gamma()), opts))
        .collect::<Result<Vec<_>>>()?;
    let mesh = YMesh::new(faces)?;
    mesh.validate()?;
    Ok(mesh)
}

pub fn refine(mesh: &YMesh) -> Result<YMesh> {
    refine_with(mesh, &MeshOptions::default())
}

pub fn refine_with(mesh: &YMesh, opts: &MeshOptions) -> Result<YMesh> {
    let total: usize = mesh.faces.iter().map(|f| f.vertices.len() + f.edges().len()).sum();
    if total > opts.max_nodes {
        return Err(Error::NodeBudget {
            needed: total,
            cap: opts.max_nodes,
        });
    }
    let faces = mesh
        .faces
        .iter()
        .map(|f| refine_face(f, opts))
        .collect::<Result<Vec<_>>>()?;
    YMesh::new(faces)
}

// JSON form: {h, faces: [{kind, inner_radius, vertices, triangles,
// edge_tags, vertex_tags, h}], junction_map}.

#[derive(Serialize, Deserialize)]
struct MeshDoc {
    h: f64,
    faces: Vec<FaceDoc>,
    junction_map: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct FaceDoc {
    kind: DomainKind,
    inner_radius: f64,
    h: f64,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edge_tags: Vec<(usize, usize, EdgeTag)>,
    vertex_tags: Vec<VertexTag>,
}

impl From<&YMesh> for MeshDoc {
    fn from(m: &YMesh) -> Self {
        MeshDoc {
            h: m.h,
            faces: m
                .faces
                .iter()
                .map(|f| FaceDoc {
                    kind: f.domain.kind,
                    inner_radius: f.domain.inner_radius,
                    h: f.h,
                    vertices: f.vertices.clone(),
                    triangles: f.triangles.clone(),
                    edge_tags: f.boundary_edges.iter().map(|&([a, b], t)| (a, b, t)).collect(),
                    vertex_tags: f.vertex_tags.clone(),
                })
                .collect(),
            junction_map: m.junction.clone(),
        }
    }
}

impl TryFrom<MeshDoc> for YMesh {
    type Error = Error;

    fn try_from(doc: MeshDoc) -> Result<Self> {
        let faces: Vec<FaceMesh> = doc
            .faces
            .into_iter()
            .map(|f| FaceMesh {
                domain: FaceDomain {
                    kind: f.kind,
                    inner_radius: f.inner_radius,
                },
                vertices: f.vertices,
                triangles: f.triangles,
                boundary_edges: f.edge_tags.into_iter().map(|(a, b, t)| (sorted(a, b), t)).collect(),
                vertex_tags: f.vertex_tags,
                h: f.h,
            })
            .collect();
        let mut offsets = Vec::with_capacity(faces.len());
        let mut acc = 0;
        for f in &faces {
            offsets.push(acc);
            acc += f.vertices.len();
        }
        Ok(YMesh {
            faces,
            junction: doc.junction_map,
            offsets,
            h: doc.h,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical_surface;

    fn ycone() -> YSurfaceSpec {
        canonical_surface("ycone", &Default::default()).unwrap()
    }

    #[test]
    fn half_disk_topology() {
        let m = mesh_face(FaceDomain::half_disk(), 0.5, None).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        m.validate().unwrap();
    }

    #[test]
    fn prescribed_gamma_nodes() {
        let nodes: Vec<f64> = (0..=10).map(|i| if i == 10 { 1.0 } else { i as f64 / 10.0 }).collect();
        let m = mesh_face(FaceDomain::half_disk(), 0.1, Some(&nodes)).unwrap();
        assert_eq!(m.gamma_vertices().len(), 21);
        m.validate().unwrap();
        let mut xs: Vec<f64> = m.gamma_vertices().iter().map(|&v| m.vertices[v][0].abs()).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        assert_eq!(xs, nodes);
    }

    #[test]
    fn full_disk_has_no_gamma() {
        let m = mesh_face(FaceDomain::full_disk(), 0.25, None).unwrap();
        assert!(m.gamma_vertices().is_empty());
        assert!(m.edges_tagged(EdgeTag::Gamma).next().is_none());
        m.validate().unwrap();
    }

    #[test]
    fn annulus_band_mesh() {
        let m = mesh_face(FaceDomain::annulus(0.3), 0.1, None).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        m.validate().unwrap();
    }

    #[test]
    fn bad_inputs() {
        assert!(mesh_face(FaceDomain::half_disk(), 1.5, None).is_err());
        assert!(mesh_face(FaceDomain::half_disk(), 0.1, Some(&[0.0, 0.5, 0.4, 1.0])).is_err());
        assert!(mesh_face(FaceDomain::half_disk(), 0.1, Some(&[0.1, 1.0])).is_err());
        assert!(mesh_face(FaceDomain::full_disk(), 0.1, Some(&[0.0, 1.0])).is_err());
        let opts = MeshOptions { max_nodes: 100 };
        assert!(matches!(
            mesh_face_with(FaceDomain::half_disk(), 0.01, None, &opts),
            Err(Error::NodeBudget { .. })
        ));
    }

    #[test]
    fn ycone_mesh_shares_junction() {
        let m = build_ymesh(&ycone(), 0.2).unwrap();
        assert_eq!(m.faces.len(), 3);
        assert_eq!(m.faces[0], m.faces[1]);
        assert_eq!(m.faces[0], m.faces[2]);
        assert_eq!(m.junction.len(), 11);
        for j in 0..3 {
            let mut used: Vec<usize> = m.junction.iter().map(|t| t[j]).collect();
            used.sort_unstable();
            assert_eq!(used, m.faces[j].gamma_vertices());
        }
        let disk = canonical_surface("equatorial-disk", &Default::default()).unwrap();
        let d = build_ymesh(&disk, 0.2).unwrap();
        assert_eq!(d.faces.len(), 1);
        assert!(d.junction.is_empty());
    }

    #[test]
    fn perturbed_junction_is_rejected() {
        let mut m = build_ymesh(&ycone(), 0.2).unwrap();
        let v = m.junction[3][1];
        m.faces[1].vertices[v][0] += 1e-3;
        assert!(matches!(m.validate(), Err(Error::MeshInvariant(_))));
    }

    #[test]
    fn refinement_counts() {
        let m = build_ymesh(&ycone(), 0.2).unwrap();
        let r = refine(&m).unwrap();
        r.validate().unwrap();
        assert_eq!(r.faces[0].triangles.len(), 4 * m.faces[0].triangles.len());
        assert_eq!(r.junction.len(), 2 * m.junction.len() - 1);
        assert!((r.h - 0.1).abs() < 1e-15);
        for f in &r.faces {
            for v in f.sigma_vertices() {
                assert!((polar(f.vertices[v]).0 - 1.0).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = refine(&build_ymesh(&ycone(), 0.25).unwrap()).unwrap();
        let text = m.to_json().unwrap();
        let back = YMesh::from_json(&text).unwrap();
        assert_eq!(m, back);
        assert_eq!(text, back.to_json().unwrap());
    }
}
