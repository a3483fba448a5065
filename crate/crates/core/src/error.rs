use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown surface `{0}` (expected ycone, equatorial-disk or critical-catenoid)")]
    UnknownSurface(String),

    #[error("invalid surface parameters: {0}")]
    InvalidParams(String),

    #[error("face index {face} out of range (surface has {count} faces)")]
    NoSuchFace { face: usize, count: usize },

    #[error("frame undefined at the cone point r = 0 (face {face}, theta = {theta})")]
    SingularPoint { face: usize, theta: f64 },

    #[error("parameter point (r = {r}, theta = {theta}) lies outside the face domain")]
    OutsideDomain { r: f64, theta: f64 },

    #[error("point (r = {r}, theta = {theta}) is not on the {which} boundary")]
    NotOnBoundary { r: f64, theta: f64, which: &'static str },

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("node budget exceeded: {needed} nodes requested, cap is {cap}")]
    NodeBudget { needed: usize, cap: usize },

    #[error("mesh/spec mismatch: {0}")]
    MeshSpecMismatch(String),

    #[error("degenerate element metric on face {face}, triangle {triangle}: det = {det:e}")]
    DegenerateMetric { face: usize, triangle: usize, det: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("factorization breakdown at pivot {index}: value {pivot:e} (row scale {scale:e})")]
    Breakdown { index: usize, pivot: f64, scale: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("requested {k} eigenpairs but the pencil has dimension {m}")]
    TooManyEigenpairs { k: usize, m: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate immersion at face {face}, node (i = {i}, k = {k}): |u_r x u_theta| = {cross:e}")]
    BranchPoint {
        face: usize,
        i: usize,
        k: usize,
        cross: f64,
    },

    #[error("immersion input: {0}")]
    Input(String),

    #[error("junction mismatch on face {face} at node (i = {i}, k = {k}): {distance:e} exceeds tolerance {tol:e}")]
    JunctionMismatch {
        face: usize,
        i: usize,
        k: usize,
        distance: f64,
        tol: f64,
    },

    #[error("vector E must have unit length, |E| = {0}")]
    NotUnit(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
