//! Minimality certificate for sampled Y-immersions.
//!
//! Each face is sampled on the polar grid `r_i = i / n_r` (`i = 1..n_r`),
//! `theta_k = k theta_max / n_theta` (`k = 0..n_theta`), with `theta_max = pi`
//! for half-disk faces and `2 pi` for a single full-disk face. Derivatives
//! come from exact closures for analytic sources or from second-order finite
//! differences. The residuals test harmonicity, conformality, the free
//! boundary condition on sigma and the junction conditions on gamma; the Hopf
//! function `H = z^4 sum_j Q_j . Q_j` with `Q_j = u_zz` is checked for reality
//! on the boundary and holomorphy inside.
//!
//! With `z = r e^{i theta}`, `u_z = e^{-i theta} (u_r - i u_theta / r) / 2`
//! and
//!
//! ```text
//! u_zz = e^{-2 i theta} / 4 [u_rr - u_r / r - u_thth / r^2
//!                            - i (2 u_rth / r - 2 u_th / r^2)].
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotation_about_e1, DomainKind, PolarJet, Vec3, YSurfaceSpec};

/// Smallest admissible grid size in either direction.
pub const MIN_GRID: usize = 8;
/// `|u_r x u_theta|` below which a node is treated as a branch point.
pub const BRANCH_TOL: f64 = 1e-10;
/// Default tolerance for junction and free-boundary validation of inputs.
pub const INPUT_TOL: f64 = 1e-8;

pub type JetFn = Arc<dyn Fn(usize, f64, f64) -> PolarJet + Send + Sync>;

/// A tensor-product grid of vectors, `r`-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub n_r: usize,
    pub n_theta: usize,
    pub data: Vec<Vec3>,
}

impl Grid {
    fn from_fn(n_r: usize, n_theta: usize, f: impl Fn(usize, usize) -> Vec3) -> Self {
        let mut data = Vec::with_capacity(n_r * (n_theta + 1));
        for i in 0..n_r {
            for k in 0..=n_theta {
                data.push(f(i, k));
            }
        }
        Grid { n_r, n_theta, data }
    }

    /// Sample at ring `i` (radius `(i + 1) / n_r`) and angle index `k`.
    pub fn at(&self, i: usize, k: usize) -> Vec3 {
        self.data[i * (self.n_theta + 1) + k]
    }
}

/// Sampled immersion, one grid per face.
#[derive(Clone)]
pub struct PolarGridSet {
    pub n_r: usize,
    pub n_theta: usize,
    pub theta_max: f64,
    pub free_boundary: bool,
    pub faces: Vec<Grid>,
    pub closure: Option<JetFn>,
}

impl fmt::Debug for PolarGridSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarGridSet")
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .field("theta_max", &self.theta_max)
            .field("free_boundary", &self.free_boundary)
            .field("faces", &self.faces.len())
            .field("closure", &self.closure.is_some())
            .finish()
    }
}

impl PolarGridSet {
    pub fn r(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.n_r as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.theta_max / self.n_theta as f64
    }

    pub fn periodic(&self) -> bool {
        self.faces.len() == 1 && (self.theta_max - 2.0 * PI).abs() < 1e-12
    }

    pub fn has_junction(&self) -> bool {
        self.faces.len() == 3
    }

    /// Sample a position map on the grid.
    pub fn from_fn(
        n_faces: usize,
        theta_max: f64,
        n_r: usize,
        n_theta: usize,
        free_boundary: bool,
        f: impl Fn(usize, f64, f64) -> Vec3 + Sync,
    ) -> Result<Self> {
        check_dims(n_r, n_theta)?;
        let faces = (0..n_faces)
            .into_par_iter()
            .map(|j| {
                Grid::from_fn(n_r, n_theta, |i, k| {
                    f(j, (i + 1) as f64 / n_r as f64, k as f64 * theta_max / n_theta as f64)
                })
            })
            .collect();
        let set = PolarGridSet {
            n_r,
            n_theta,
            theta_max,
            free_boundary,
            faces,
            closure: None,
        };
        set.validate(INPUT_TOL)?;
        Ok(set)
    }

    /// Sample from an analytic jet, keeping it as the exact closure.
    pub fn from_jet(n_faces: usize, theta_max: f64, n_r: usize, n_theta: usize, jet: JetFn) -> Result<Self> {
        let j2 = jet.clone();
        let mut set = Self::from_fn(n_faces, theta_max, n_r, n_theta, true, move |j, r, t| j2(j, r, t).u)?;
        set.closure = Some(jet);
        Ok(set)
    }

    /// Grid invariants: matching junction columns and, if claimed, samples
    /// on the unit sphere at `r = 1`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if !(self.faces.len() == 1 || self.faces.len() == 3) {
            return Err(Error::Input(format!(
                "expected 1 or 3 faces, found {}",
                self.faces.len()
            )));
        }
        for g in &self.faces {
            if g.n_r != self.n_r || g.n_theta != self.n_theta || g.data.len() != self.n_r * (self.n_theta + 1) {
                return Err(Error::Input("face grid dimensions disagree".into()));
            }
            if g.data.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
                return Err(Error::Input("non-finite sample".into()));
            }
        }
        if self.has_junction() {
            for j in 1..3 {
                for i in 0..self.n_r {
                    for k in [0, self.n_theta] {
                        let distance = (self.faces[j].at(i, k) - self.faces[0].at(i, k)).norm();
                        if distance > tol {
                            return Err(Error::JunctionMismatch {
                                face: j,
                                i,
                                k,
                                distance,
                                tol,
                            });
                        }
                    }
                }
            }
        }
        if self.free_boundary {
            let i = self.n_r - 1;
            for (j, g) in self.faces.iter().enumerate() {
                for k in 0..=self.n_theta {
                    let d = (g.at(i, k).norm() - 1.0).abs();
                    if d > tol {
                        return Err(Error::Input(format!(
                            "face {j}: sample (i = {i}, k = {k}) is off the unit sphere by {d:e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_dims(n_r: usize, n_theta: usize) -> Result<()> {
    if n_r < MIN_GRID || n_theta < MIN_GRID {
        return Err(Error::Input(format!(
            "grid must be at least {MIN_GRID} x {MIN_GRID}, got {n_r} x {n_theta}"
        )));
    }
    Ok(())
}

/// Sample a canonical surface exactly. Annulus faces are not supported.
pub fn sample_spec(spec: &YSurfaceSpec, n_r: usize, n_theta: usize) -> Result<PolarGridSet> {
    let kind = spec.faces[0].domain.kind;
    if kind == DomainKind::AnnulusBand {
        return Err(Error::Unsupported(
            "the certificate grids cover disk and half-disk faces only".into(),
        ));
    }
    let theta_max = spec.faces[0].domain.theta_max();
    let spec2 = spec.clone();
    let jet: JetFn = Arc::new(move |j, r, t| spec2.jet(j, r, t).expect("face index within range"));
    PolarGridSet::from_jet(spec.faces.len(), theta_max, n_r, n_theta, jet)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImmersionFace {
    pub samples: Vec<[f64; 3]>,
}

/// Immersion input file. `samples` are `r`-major: entry `i (n_theta + 1) + k`
/// holds `u(r_{i+1}, theta_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImmersionFile {
    pub n_r: usize,
    pub n_theta: usize,
    pub faces: Vec<ImmersionFace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(default = "default_true")]
    pub free_boundary: bool,
}

fn default_true() -> bool {
    true
}

impl ImmersionFile {
    pub fn from_grids(set: &PolarGridSet) -> Self {
        ImmersionFile {
            n_r: set.n_r,
            n_theta: set.n_theta,
            faces: set
                .faces
                .iter()
                .map(|g| ImmersionFace {
                    samples: g.data.iter().map(|p| [p[0], p[1], p[2]]).collect(),
                })
                .collect(),
            theta_max: Some(set.theta_max),
            free_boundary: set.free_boundary,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed immersion file: {e}")))
    }

    pub fn into_grids(self, tol: f64) -> Result<PolarGridSet> {
        check_dims(self.n_r, self.n_theta)?;
        let expected = self.n_r * (self.n_theta + 1);
        let theta_max = self
            .theta_max
            .unwrap_or(if self.faces.len() == 1 { 2.0 * PI } else { PI });
        let mut faces = Vec::with_capacity(self.faces.len());
        for (j, f) in self.faces.into_iter().enumerate() {
            if f.samples.len() != expected {
                return Err(Error::Input(format!(
                    "face {j} has {} samples, expected n_r (n_theta + 1) = {expected}",
                    f.samples.len()
                )));
            }
            faces.push(Grid {
                n_r: self.n_r,
                n_theta: self.n_theta,
                data: f.samples.into_iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect(),
            });
        }
        let set = PolarGridSet {
            n_r: self.n_r,
            n_theta: self.n_theta,
            theta_max,
            free_boundary: self.free_boundary,
            faces,
            closure: None,
        };
        set.validate(tol)?;
        Ok(set)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivMethod {
    Exact,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceDerivs {
    pub u: Grid,
    pub u_r: Grid,
    pub u_t: Grid,
    pub u_rr: Grid,
    pub u_rt: Grid,
    pub u_tt: Grid,
    pub normal: Grid,
    pub u_rr_perp: Grid,
    pub u_rt_perp: Grid,
    pub u_tt_perp: Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivGrids {
    pub n_r: usize,
    pub n_theta: usize,
    pub theta_max: f64,
    pub free_boundary: bool,
    pub method: DerivMethod,
    pub faces: Vec<FaceDerivs>,
}

impl DerivGrids {
    pub fn r(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.n_r as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.theta_max / self.n_theta as f64
    }

    pub fn has_junction(&self) -> bool {
        self.faces.len() == 3
    }
}

/// Second-order first derivative along a line of samples with spacing `d`.
fn diff1(v: &[Vec3], d: f64, periodic: bool) -> Vec<Vec3> {
    let n = v.len();
    (0..n)
        .map(|p| {
            if periodic {
                let (a, b) = ((p + n - 1) % n, (p + 1) % n);
                (v[b] - v[a]) / (2.0 * d)
            } else if p == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * d)
            } else if p == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * d)
            } else {
                (v[p + 1] - v[p - 1]) / (2.0 * d)
            }
        })
        .collect()
}

/// Second-order second derivative along a line of samples with spacing `d`.
fn diff2(v: &[Vec3], d: f64, periodic: bool) -> Vec<Vec3> {
    let n = v.len();
    let d2 = d * d;
    (0..n)
        .map(|p| {
            if periodic {
                let (a, b) = ((p + n - 1) % n, (p + 1) % n);
                (v[b] - 2.0 * v[p] + v[a]) / d2
            } else if p == 0 {
                (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / d2
            } else if p == n - 1 {
                (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / d2
            } else {
                (v[p + 1] - 2.0 * v[p] + v[p - 1]) / d2
            }
        })
        .collect()
}

fn along_r(g: &Grid, f: impl Fn(&[Vec3]) -> Vec<Vec3>) -> Grid {
    let mut out = g.clone();
    for k in 0..=g.n_theta {
        let line: Vec<Vec3> = (0..g.n_r).map(|i| g.at(i, k)).collect();
        for (i, v) in f(&line).into_iter().enumerate() {
            out.data[i * (g.n_theta + 1) + k] = v;
        }
    }
    out
}

/// Derivative along theta. Periodic grids drop the duplicated column `k =
/// n_theta` from the stencil and copy column 0 back into it.
fn along_theta(g: &Grid, periodic: bool, f: impl Fn(&[Vec3]) -> Vec<Vec3>) -> Grid {
    let mut out = g.clone();
    let w = g.n_theta + 1;
    for i in 0..g.n_r {
        let row = &g.data[i * w..(i + 1) * w];
        let line = if periodic { &row[..g.n_theta] } else { row };
        let d = f(line);
        out.data[i * w..i * w + d.len()].copy_from_slice(&d);
        if periodic {
            out.data[i * w + g.n_theta] = d[0];
        }
    }
    out
}

fn face_derivs(set: &PolarGridSet, j: usize, method: DerivMethod) -> Result<FaceDerivs> {
    let u = set.faces[j].clone();
    let (n_r, n_t) = (set.n_r, set.n_theta);
    let (u_r, u_t, u_rr, u_rt, u_tt) = match method {
        DerivMethod::Exact => {
            let jet = set
                .closure
                .as_ref()
                .ok_or_else(|| Error::Unsupported("exact derivatives need an analytic source".into()))?;
            let jets: Vec<PolarJet> = (0..n_r)
                .flat_map(|i| (0..=n_t).map(move |k| (i, k)))
                .map(|(i, k)| jet(j, set.r(i), set.theta(k)))
                .collect();
            let pick = |f: fn(&PolarJet) -> Vec3| Grid {
                n_r,
                n_theta: n_t,
                data: jets.iter().map(f).collect(),
            };
            (
                pick(|p| p.u_r),
                pick(|p| p.u_t),
                pick(|p| p.u_rr),
                pick(|p| p.u_rt),
                pick(|p| p.u_tt),
            )
        }
        DerivMethod::FiniteDifference => {
            let dr = 1.0 / n_r as f64;
            let dt = set.theta_max / n_t as f64;
            let periodic = set.periodic();
            let u_r = along_r(&u, |l| diff1(l, dr, false));
            let u_t = along_theta(&u, periodic, |l| diff1(l, dt, periodic));
            let u_rr = along_r(&u, |l| diff2(l, dr, false));
            let u_rt = along_theta(&u_r, periodic, |l| diff1(l, dt, periodic));
            let u_tt = along_theta(&u, periodic, |l| diff2(l, dt, periodic));
            (u_r, u_t, u_rr, u_rt, u_tt)
        }
    };
    let mut normal = u.clone();
    for i in 0..n_r {
        for k in 0..=n_t {
            let p = i * (n_t + 1) + k;
            let c = u_r.data[p].cross(&u_t.data[p]);
            let cross = c.norm();
            if cross < BRANCH_TOL {
                return Err(Error::BranchPoint { face: j, i, k, cross });
            }
            normal.data[p] = c / cross;
        }
    }
    let perp = |g: &Grid| Grid {
        n_r,
        n_theta: n_t,
        data: g.data.iter().zip(&normal.data).map(|(x, nu)| nu * x.dot(nu)).collect(),
    };
    Ok(FaceDerivs {
        u_rr_perp: perp(&u_rr),
        u_rt_perp: perp(&u_rt),
        u_tt_perp: perp(&u_tt),
        u,
        u_r,
        u_t,
        u_rr,
        u_rt,
        u_tt,
        normal,
    })
}

pub fn derivative_grids(set: &PolarGridSet, method: DerivMethod) -> Result<DerivGrids> {
    let faces = (0..set.faces.len())
        .into_par_iter()
        .map(|j| face_derivs(set, j, method))
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivGrids {
        n_r: set.n_r,
        n_theta: set.n_theta,
        theta_max: set.theta_max,
        free_boundary: set.free_boundary,
        method,
        faces,
    })
}

/// Complex grid, `r`-major like [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn at(&self, i: usize, k: usize) -> Complex64 {
        self.data[i * (self.n_theta + 1) + k]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopfField {
    /// `Q_j = u_{j,zz}`, three complex components per node.
    pub q: Vec<Vec<[Complex64; 3]>>,
    pub h: ComplexGrid,
    pub big_h: ComplexGrid,
    pub max_im_sigma: f64,
    pub max_im_gamma: f64,
    pub max_cauchy_riemann: f64,
    pub max_abs_inner_ring: f64,
}

fn hopf_q(d: &FaceDerivs, p: usize, r: f64, theta: f64) -> [Complex64; 3] {
    let re = d.u_rr.data[p] - d.u_r.data[p] / r - d.u_tt.data[p] / (r * r);
    let im = -(2.0 * d.u_rt.data[p] / r - 2.0 * d.u_t.data[p] / (r * r));
    let phase = Complex64::from_polar(0.25, -2.0 * theta);
    [0, 1, 2].map(|c| phase * Complex64::new(re[c], im[c]))
}

pub fn hopf_field(d: &DerivGrids) -> Result<HopfField> {
    if !d.has_junction() {
        return Err(Error::Unsupported(
            "the Hopf function is defined as a sum over three faces".into(),
        ));
    }
    let (n_r, n_t) = (d.n_r, d.n_theta);
    let w = n_t + 1;
    let q: Vec<Vec<[Complex64; 3]>> = d
        .faces
        .iter()
        .map(|f| (0..n_r * w).map(|p| hopf_q(f, p, d.r(p / w), d.theta(p % w))).collect())
        .collect();
    let h: Vec<Complex64> = (0..n_r * w)
        .map(|p| q.iter().map(|qj| qj[p].iter().map(|c| c * c).sum::<Complex64>()).sum())
        .collect();
    let big_h: Vec<Complex64> = h
        .iter()
        .enumerate()
        .map(|(p, hp)| Complex64::from_polar(d.r(p / w), d.theta(p % w)).powu(4) * hp)
        .collect();
    let h = ComplexGrid {
        n_r,
        n_theta: n_t,
        data: h,
    };
    let big_h = ComplexGrid {
        n_r,
        n_theta: n_t,
        data: big_h,
    };

    let max_im_sigma = (0..w).map(|k| big_h.at(n_r - 1, k).im.abs()).fold(0.0, f64::max);
    let max_im_gamma = (0..n_r)
        .flat_map(|i| [big_h.at(i, 0), big_h.at(i, n_t)])
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let max_abs_inner_ring = (0..w).map(|k| big_h.at(0, k).norm()).fold(0.0, f64::max);
    let dr = 1.0 / n_r as f64;
    let dt = d.theta_max / n_t as f64;
    let mut max_cauchy_riemann: f64 = 0.0;
    for i in 0..n_r - 1 {
        for k in 0..n_t {
            let (a, b, c, e) = (
                big_h.at(i, k),
                big_h.at(i + 1, k),
                big_h.at(i, k + 1),
                big_h.at(i + 1, k + 1),
            );
            let h_r = (b - a + e - c) / (2.0 * dr);
            let h_t = (c - a + e - b) / (2.0 * dt);
            let r = d.r(i) + 0.5 * dr;
            let res = (h_t - Complex64::i() * r * h_r).norm();
            max_cauchy_riemann = max_cauchy_riemann.max(res);
        }
    }
    Ok(HopfField {
        q,
        h,
        big_h,
        max_im_sigma,
        max_im_gamma,
        max_cauchy_riemann,
        max_abs_inner_ring,
    })
}

/// Check names in report order.
pub const CHECKS: [&str; 12] = [
    "harmonic",
    "conformal-angle",
    "conformal-scale",
    "free-boundary-radius",
    "free-boundary-orthogonality",
    "junction-match",
    "theta2-match",
    "y-balance",
    "hopf-im-sigma",
    "hopf-im-gamma",
    "hopf-cauchy-riemann",
    "hopf-inner-ring",
];

/// Pass thresholds, one per check in [`CHECKS`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub values: Vec<f64>,
}

impl Thresholds {
    pub fn uniform(t: f64) -> Self {
        Thresholds {
            values: vec![t; CHECKS.len()],
        }
    }

    /// `1e-10` for exact closures, `FD_THRESHOLD_C * spacing^2` for finite
    /// differences, where `spacing` is the larger of the two grid steps.
    pub fn for_grid(method: DerivMethod, n_r: usize, n_theta: usize, theta_max: f64) -> Self {
        match method {
            DerivMethod::Exact => Self::uniform(EXACT_THRESHOLD),
            DerivMethod::FiniteDifference => {
                let spacing = (1.0 / n_r as f64).max(theta_max / n_theta as f64);
                Self::uniform(FD_THRESHOLD_C * spacing * spacing)
            }
        }
    }

    pub fn for_derivs(d: &DerivGrids) -> Self {
        Self::for_grid(d.method, d.n_r, d.n_theta, d.theta_max)
    }

    pub fn get(&self, name: &str) -> f64 {
        let idx = CHECKS.iter().position(|c| *c == name).expect("known check name");
        self.values[idx]
    }
}

pub const EXACT_THRESHOLD: f64 = 1e-10;
pub const FD_THRESHOLD_C: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max: f64,
    pub rms: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub n_r: usize,
    pub n_theta: usize,
    pub faces: usize,
    pub method: DerivMethod,
    pub checks: Vec<CheckResult>,
    /// Checks that do not apply to this input.
    pub skipped: Vec<String>,
    /// Hopf diagnostics are only meaningful for harmonic conformal input.
    pub hopf_meaningful: bool,
    pub pass: bool,
}

impl ResidualReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max(&self, name: &str) -> f64 {
        self.check(name).map_or(0.0, |c| c.max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Max and root-mean-square of a list of nonnegative values.
fn stats(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    (max, rms)
}

pub fn certificate_residuals(d: &DerivGrids, thresholds: &Thresholds) -> Result<ResidualReport> {
    let (n_r, n_t) = (d.n_r, d.n_theta);
    let w = n_t + 1;
    let mut values: Vec<(&str, Vec<f64>)> = Vec::new();
    let mut skipped = Vec::new();

    let all_nodes = |f: &dyn Fn(&FaceDerivs, usize, f64) -> f64| -> Vec<f64> {
        d.faces
            .iter()
            .flat_map(|fd| (0..n_r * w).map(move |p| (fd, p)))
            .map(|(fd, p)| f(fd, p, d.r(p / w)))
            .collect()
    };
    values.push((
        "harmonic",
        all_nodes(&|f, p, r| (r * r * f.u_rr.data[p] + r * f.u_r.data[p] + f.u_tt.data[p]).norm()),
    ));
    values.push((
        "conformal-angle",
        all_nodes(&|f, p, _| f.u_r.data[p].dot(&f.u_t.data[p]).abs()),
    ));
    values.push((
        "conformal-scale",
        all_nodes(&|f, p, r| (f.u_r.data[p].norm_squared() - f.u_t.data[p].norm_squared() / (r * r)).abs()),
    ));

    if d.free_boundary {
        let outer = n_r - 1;
        let ring = |f: &dyn Fn(&FaceDerivs, usize) -> f64| -> Vec<f64> {
            d.faces
                .iter()
                .flat_map(|fd| (0..w).map(move |k| (fd, outer * w + k)))
                .map(|(fd, p)| f(fd, p))
                .collect()
        };
        values.push(("free-boundary-radius", ring(&|f, p| (f.u.data[p].norm() - 1.0).abs())));
        values.push((
            "free-boundary-orthogonality",
            ring(&|f, p| {
                let (u, ur) = (f.u.data[p], f.u_r.data[p]);
                ur.cross(&u).norm() / (ur.norm() * u.norm())
            }),
        ));
    } else {
        skipped.extend([
            "free-boundary-radius".to_string(),
            "free-boundary-orthogonality".to_string(),
        ]);
    }

    if d.has_junction() {
        let gamma: Vec<usize> = (0..n_r).flat_map(|i| [i * w, i * w + n_t]).collect();
        let f0 = &d.faces[0];
        let mut jm = Vec::new();
        let mut t2 = Vec::new();
        let mut yb = Vec::new();
        for &p in &gamma {
            for f in &d.faces[1..] {
                jm.push(
                    (f.u.data[p] - f0.u.data[p])
                        .norm()
                        .max((f.u_r.data[p] - f0.u_r.data[p]).norm())
                        .max((f.u_rr.data[p] - f0.u_rr.data[p]).norm()),
                );
                t2.push((f.u_tt.data[p] - f0.u_tt.data[p]).norm());
            }
            yb.push(d.faces.iter().map(|f| f.u_t.data[p]).sum::<Vec3>().norm());
        }
        values.push(("junction-match", jm));
        values.push(("theta2-match", t2));
        values.push(("y-balance", yb));
    } else {
        skipped.extend([
            "junction-match".to_string(),
            "theta2-match".to_string(),
            "y-balance".to_string(),
        ]);
    }

    let hopf = if d.has_junction() { Some(hopf_field(d)?) } else { None };
    match &hopf {
        Some(hf) => {
            values.push(("hopf-im-sigma", vec![hf.max_im_sigma]));
            values.push(("hopf-im-gamma", vec![hf.max_im_gamma]));
            values.push(("hopf-cauchy-riemann", vec![hf.max_cauchy_riemann]));
            values.push(("hopf-inner-ring", vec![hf.max_abs_inner_ring]));
        }
        None => skipped.extend(
            [
                "hopf-im-sigma",
                "hopf-im-gamma",
                "hopf-cauchy-riemann",
                "hopf-inner-ring",
            ]
            .map(String::from),
        ),
    }

    let mut checks = Vec::new();
    for (name, v) in values {
        let (max, rms) = stats(&v);
        let threshold = thresholds.get(name);
        checks.push(CheckResult {
            name: name.to_string(),
            max,
            rms,
            threshold,
            pass: max <= threshold,
        });
    }
    let passed = |n: &str| checks.iter().find(|c| c.name == n).is_some_and(|c| c.pass);
    let hopf_meaningful =
        hopf.is_some() && passed("harmonic") && passed("conformal-angle") && passed("conformal-scale");
    let pass = checks.iter().all(|c| c.pass);
    Ok(ResidualReport {
        n_r,
        n_theta: n_t,
        faces: d.faces.len(),
        method: d.method,
        checks,
        skipped,
        hopf_meaningful,
        pass,
    })
}

/// Perturbations of the Y-cone used to test that the certificate detects
/// each failure mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    /// Faces at 0, 115 and 235 degrees about the junction axis.
    AngleImbalance,
    /// Face 1 twisted about `e1` by `tan(alpha) (r - 1)`, so it meets the
    /// sphere at angle `alpha` from orthogonal.
    BoundaryTilt { alpha_deg: f64 },
    /// Face 1 bent out of its plane by `eps r^2 sin^2 theta` and rescaled to
    /// keep `|u| = r`; its boundary arc is not a great circle.
    NonGreatCircle { eps: f64 },
    /// Every face reparametrized by `r -> r^2`.
    NonConformal,
}

impl Perturbation {
    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::AngleImbalance => "angle-imbalance",
            Perturbation::BoundaryTilt { .. } => "boundary-tilt",
            Perturbation::NonGreatCircle { .. } => "non-great-circle",
            Perturbation::NonConformal => "non-conformal",
        }
    }

    pub fn position(&self, face: usize, r: f64, theta: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        let base = [0.0, 120.0, 240.0];
        match *self {
            Perturbation::AngleImbalance => {
                let rot = [0.0f64, 115.0, 235.0][face];
                rotation_about_e1(rot.to_radians()) * Vec3::new(r * c, r * s, 0.0)
            }
            Perturbation::BoundaryTilt { alpha_deg } if face == 0 => {
                let t = alpha_deg.to_radians().tan() * (r - 1.0);
                Vec3::new(r * c, r * s * t.cos(), r * s * t.sin())
            }
            Perturbation::NonGreatCircle { eps } if face == 0 => {
                let v = Vec3::new(r * c, r * s, eps * r * r * s * s);
                v * (r / v.norm())
            }
            Perturbation::NonConformal => {
                let q = r * r;
                rotation_about_e1(f64::to_radians(base[face])) * Vec3::new(q * c, q * s, 0.0)
            }
            _ => rotation_about_e1(f64::to_radians(base[face])) * Vec3::new(r * c, r * s, 0.0),
        }
    }

    /// The check this family is designed to trip.
    pub fn target_check(&self) -> &'static str {
        match self {
            Perturbation::AngleImbalance => "y-balance",
            Perturbation::BoundaryTilt { .. } => "free-boundary-orthogonality",
            Perturbation::NonGreatCircle { .. } => "hopf-im-sigma",
            Perturbation::NonConformal => "conformal-scale",
        }
    }

    pub fn sample(&self, n_r: usize, n_theta: usize) -> Result<PolarGridSet> {
        let p = *self;
        PolarGridSet::from_fn(3, PI, n_r, n_theta, true, move |j, r, t| p.position(j, r, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical_surface;

    fn ycone(n: usize) -> PolarGridSet {
        sample_spec(&canonical_surface("ycone", &Default::default()).unwrap(), n, n).unwrap()
    }

    #[test]
    fn junction_columns_identical() {
        let g = ycone(32);
        for i in 0..g.n_r {
            for k in [0, g.n_theta] {
                for j in 1..3 {
                    assert!((g.faces[j].at(i, k) - g.faces[0].at(i, k)).norm() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn exact_ycone_passes() {
        let d = derivative_grids(&ycone(32), DerivMethod::Exact).unwrap();
        let rep = certificate_residuals(&d, &Thresholds::for_derivs(&d)).unwrap();
        assert!(rep.pass, "{rep:#?}");
        assert!(rep.hopf_meaningful);
        assert!(rep.skipped.is_empty());
        for c in &rep.checks {
            assert!(c.max <= 1e-12, "{}: {}", c.name, c.max);
        }
    }

    #[test]
    fn affine_faces_have_zero_hopf_field() {
        let d = derivative_grids(&ycone(16), DerivMethod::Exact).unwrap();
        let hf = hopf_field(&d).unwrap();
        assert!(hf.big_h.data.iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn disk_skips_junction_checks() {
        let spec = canonical_surface("equatorial-disk", &Default::default()).unwrap();
        let g = sample_spec(&spec, 16, 32).unwrap();
        assert!(g.periodic());
        let d = derivative_grids(&g, DerivMethod::FiniteDifference).unwrap();
        let rep = certificate_residuals(&d, &Thresholds::for_derivs(&d)).unwrap();
        assert!(rep.skipped.contains(&"y-balance".to_string()));
        assert!(rep.check("y-balance").is_none());
        assert!(!rep.hopf_meaningful);
        assert!(matches!(hopf_field(&d), Err(Error::Unsupported(_))));
    }

    #[test]
    fn perturbed_junction_is_rejected() {
        let g = ycone(16);
        let mut file = ImmersionFile::from_grids(&g);
        let k = g.n_theta;
        file.faces[1].samples[5 * (k + 1)][1] += 1e-3;
        match file.into_grids(INPUT_TOL) {
            Err(Error::JunctionMismatch {
                face: 1, i: 5, k: 0, ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        let spec = canonical_surface("ycone", &Default::default()).unwrap();
        assert!(matches!(sample_spec(&spec, 4, 16), Err(Error::Input(_))));
    }

    #[test]
    fn branch_point_is_refused() {
        let spec = canonical_surface("ycone", &Default::default()).unwrap();
        let jet: JetFn = Arc::new(move |j, r, t| {
            let mut p = spec.jet(j, r, t).unwrap();
            if j == 0 && (r - 0.5).abs() < 1e-12 && (t - PI / 2.0).abs() < 1e-12 {
                p.u_t = Vec3::zeros();
            }
            p
        });
        let g = PolarGridSet::from_jet(3, PI, 8, 8, jet).unwrap();
        match derivative_grids(&g, DerivMethod::Exact) {
            Err(Error::BranchPoint {
                face: 0, i: 3, k: 4, ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tilt_residual_tracks_sine() {
        for alpha in [5.0f64, 10.0] {
            let g = Perturbation::BoundaryTilt { alpha_deg: alpha }.sample(64, 64).unwrap();
            let d = derivative_grids(&g, DerivMethod::FiniteDifference).unwrap();
            let rep = certificate_residuals(&d, &Thresholds::for_derivs(&d)).unwrap();
            let v = rep.max("free-boundary-orthogonality");
            assert!((v - alpha.to_radians().sin()).abs() < 1e-3, "{alpha}: {v}");
        }
    }

    #[test]
    fn angle_imbalance_breaks_balance() {
        let g = Perturbation::AngleImbalance.sample(32, 32).unwrap();
        let d = derivative_grids(&g, DerivMethod::FiniteDifference).unwrap();
        let rep = certificate_residuals(&d, &Thresholds::for_derivs(&d)).unwrap();
        assert!(rep.max("y-balance") >= 0.05);
        assert!(!rep.check("y-balance").unwrap().pass);
    }
}
