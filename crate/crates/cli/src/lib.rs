//! Batch front end for the index and certificate computations.
//!
//! Each subcommand writes a JSON report (and a CSV table where one applies)
//! into the output directory: `--out`, else `$YINDEX_OUT_DIR`, else the
//! current directory. Reports echo the full configuration and contain no
//! timings, so identical configurations give byte-identical files.

pub mod commands;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use yindex::hopf::{DerivMethod, Perturbation};
use yindex::spectra::{GammaCondition, DEFAULT_C0};

use commands::VerifySource;

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "YINDEX_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] yindex::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser, Debug)]
#[command(
    name = "yindex",
    version,
    about = "Morse index and minimality certificates for free-boundary Y-surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory (default: $YINDEX_OUT_DIR or the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Zero-classification constant c0 in tol(h) = c0 h^2.
    #[arg(long, global = true, default_value_t = DEFAULT_C0)]
    pub c0: f64,
    /// Seed for the random-vector consistency check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Build, assemble and count index and nullity.
    Index(IndexArgs),
    /// Per-face half-disk Steklov spectrum against delta_n = n.
    Steklov(SteklovArgs),
    /// Constrained-Y Dirichlet-to-Neumann route.
    Dtn(DtnArgs),
    /// Minimality certificate for a canonical surface, file or perturbation.
    Verify(VerifyArgs),
    /// Counts and zero-cluster convergence over several mesh sizes.
    Converge(ConvergeArgs),
    /// Pencil residuals of the analytic w_1 interpolants.
    NullBasis(NullBasisArgs),
    /// Coordinate-field and compatible-constant values of Q.
    Fields(FieldsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    Bulk,
    Dtn,
    Both,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IndexArgs {
    #[arg(long, default_value = "ycone")]
    pub surface: String,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Number of eigenvalues to report.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// `both` and `dtn` need a flat surface; the default picks `both` when possible.
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    #[arg(long)]
    pub expect_index: Option<usize>,
    #[arg(long)]
    pub expect_nullity: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaArg {
    Neumann,
    Dirichlet,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SteklovArgs {
    #[arg(long, value_enum, default_value_t = GammaArg::Neumann)]
    pub gamma: GammaArg,
    #[arg(long, default_value_t = 0.02)]
    pub h: f64,
    #[arg(long, default_value_t = 6)]
    pub modes: usize,
    /// Relative error bound (absolute for the zero mode).
    #[arg(long, default_value_t = 0.01)]
    pub max_rel_err: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DtnArgs {
    #[arg(long, default_value = "ycone")]
    pub surface: String,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Number of Steklov eigenvalues kept in the report.
    #[arg(long, default_value_t = 12)]
    pub modes: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Exact,
    Fd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbArg {
    AngleImbalance,
    BoundaryTilt,
    NonGreatCircle,
    NonConformal,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with = "input")]
    pub surface: Option<String>,
    /// Immersion JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Perturbed Y-cone instead of a surface or file.
    #[arg(long, value_enum, conflicts_with_all = ["surface", "input"])]
    pub perturb: Option<PerturbArg>,
    /// Tilt angle in degrees for `boundary-tilt`.
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Bending amplitude for `non-great-circle`.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Radial grid size (and angular, unless --n-theta is given).
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Derivatives: exact closures (canonical surfaces) or finite differences.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConvergeArgs {
    #[arg(long, default_value = "ycone")]
    pub surface: String,
    /// Mesh sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
    pub h: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub expect_index: Option<usize>,
    #[arg(long)]
    pub expect_nullity: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NullBasisArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
    pub h: Vec<f64>,
    /// Minimum fitted order of each residual.
    #[arg(long, default_value_t = 1.7)]
    pub min_order: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FieldsArgs {
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub rel_tol: f64,
}

/// Settings shared by all subcommands.
#[derive(Clone, Debug, Serialize)]
pub struct Common {
    pub c0: f64,
    pub seed: u64,
}

/// Validated configuration of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub common: Common,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let out_dir = match cli.out {
            Some(p) => p,
            None => std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        let cfg = RunConfig {
            command: cli.command,
            common: Common {
                c0: cli.c0,
                seed: cli.seed,
            },
            out_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("c0", self.common.c0)?;
        let mesh_h = |h: f64| -> Result<(), CliError> {
            if h > 0.0 && h < 1.0 {
                Ok(())
            } else {
                Err(CliError::Usage(format!("--h must lie in (0, 1), got {h}")))
            }
        };
        match &self.command {
            Command::Index(a) => {
                mesh_h(a.h)?;
                count("k", a.k)?;
            }
            Command::Steklov(a) => {
                mesh_h(a.h)?;
                count("modes", a.modes)?;
                positive("max-rel-err", a.max_rel_err)?;
            }
            Command::Dtn(a) => mesh_h(a.h)?,
            Command::Verify(a) => {
                count("n", a.n)?;
                if let Some(n) = a.n_theta {
                    count("n-theta", n)?;
                }
                positive("alpha", a.alpha)?;
                positive("eps", a.eps)?;
                if a.surface.is_none() && a.input.is_none() && a.perturb.is_none() {
                    return Err(CliError::Usage("verify needs --surface, --input or --perturb".into()));
                }
                if a.method == Some(MethodArg::Exact) && a.surface.is_none() {
                    return Err(CliError::Usage(
                        "exact derivatives are available for canonical surfaces only".into(),
                    ));
                }
                if let Some(p) = &a.input {
                    if !p.is_file() {
                        return Err(CliError::Usage(format!("input file {} does not exist", p.display())));
                    }
                }
            }
            Command::Converge(a) => {
                if a.h.is_empty() {
                    return Err(CliError::Usage("--h needs at least one value".into()));
                }
                a.h.iter().try_for_each(|&h| mesh_h(h))?;
                count("k", a.k)?;
            }
            Command::NullBasis(a) => {
                if a.h.is_empty() {
                    return Err(CliError::Usage("--h needs at least one value".into()));
                }
                a.h.iter().try_for_each(|&h| mesh_h(h))?;
            }
            Command::Fields(a) => {
                mesh_h(a.h)?;
                positive("rel-tol", a.rel_tol)?;
            }
        }
        if self.out_dir.exists() && !self.out_dir.is_dir() {
            return Err(CliError::Usage(format!(
                "output path {} is not a directory",
                self.out_dir.display()
            )));
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn count(name: &str, v: usize) -> Result<(), CliError> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    config: &'a RunConfig,
    pass: bool,
    checks: &'a [Check],
    result: &'a T,
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            2
        }
    }
}

fn fmt_h(h: f64) -> String {
    format!("{h}")
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    cfg: &RunConfig,
    checks: &[Check],
    result: &T,
) -> Result<PathBuf, CliError> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        pass: checks.iter().all(|c| c.pass),
        checks,
        result,
    };
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn write_csv<R: Serialize>(dir: &Path, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

/// One row of an eigenvalue table.
#[derive(Serialize)]
pub struct EigenRow {
    pub h: f64,
    pub k: usize,
    pub lambda: f64,
    pub class: &'static str,
}

pub fn eigen_rows(report: &yindex::spectra::SpectrumReport) -> Vec<EigenRow> {
    report
        .eigenvalues
        .iter()
        .zip(report.classes())
        .enumerate()
        .map(|(k, (&lambda, c))| EigenRow {
            h: report.h,
            k: k + 1,
            lambda,
            class: c.as_str(),
        })
        .collect()
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    let dir = cfg.out_dir.as_path();
    let common = &cfg.common;
    let (checks, files) = match &cfg.command {
        Command::Index(a) => {
            let spec = yindex::geometry::canonical_surface(&a.surface, &Default::default())?;
            let route = a
                .route
                .unwrap_or(if spec.is_flat() { RouteArg::Both } else { RouteArg::Bulk });
            if route != RouteArg::Bulk && !spec.is_flat() {
                return Err(CliError::Usage(format!(
                    "the DtN route needs a flat surface; `{}` is not flat",
                    a.surface
                )));
            }
            let (res, mut checks) = commands::index(
                &a.surface,
                a.h,
                a.k,
                route != RouteArg::Bulk,
                (a.expect_index, a.expect_nullity),
                common,
            )?;
            if route == RouteArg::Dtn {
                checks.retain(|c| c.name != "inertia-agrees");
            }
            let stem = format!("index-{}-h{}", a.surface, fmt_h(a.h));
            let mut rows = eigen_rows(&res.bulk);
            if let Some(d) = &res.dtn {
                rows.extend(eigen_rows(d));
            }
            let files = vec![
                write_json(dir, &format!("{stem}.json"), cfg, &checks, &res)?,
                write_csv(dir, &format!("{stem}.csv"), &rows)?,
            ];
            (checks, files)
        }
        Command::Steklov(a) => {
            let gamma = match a.gamma {
                GammaArg::Neumann => GammaCondition::Neumann,
                GammaArg::Dirichlet => GammaCondition::Dirichlet,
            };
            let (res, checks) = commands::steklov(gamma, a.h, a.modes, a.max_rel_err, common)?;
            let stem = format!(
                "steklov-{}-h{}",
                if gamma == GammaCondition::Neumann {
                    "neumann"
                } else {
                    "dirichlet"
                },
                fmt_h(a.h)
            );
            let files = vec![
                write_json(dir, &format!("{stem}.json"), cfg, &checks, &res)?,
                write_csv(dir, &format!("{stem}.csv"), &res.rows)?,
            ];
            (checks, files)
        }
        Command::Dtn(a) => {
            let (res, checks) = commands::dtn(&a.surface, a.h, a.modes, common)?;
            let stem = format!("dtn-{}-h{}", a.surface, fmt_h(a.h));
            (
                checks.clone(),
                vec![write_json(dir, &format!("{stem}.json"), cfg, &checks, &res)?],
            )
        }
        Command::Verify(a) => {
            let n_theta = a.n_theta.unwrap_or(a.n);
            let method = a.method.map(|m| match m {
                MethodArg::Exact => DerivMethod::Exact,
                MethodArg::Fd => DerivMethod::FiniteDifference,
            });
            let text;
            let (source, stem) = if let Some(p) = a.perturb {
                let pert = match p {
                    PerturbArg::AngleImbalance => Perturbation::AngleImbalance,
                    PerturbArg::BoundaryTilt => Perturbation::BoundaryTilt { alpha_deg: a.alpha },
                    PerturbArg::NonGreatCircle => Perturbation::NonGreatCircle { eps: a.eps },
                    PerturbArg::NonConformal => Perturbation::NonConformal,
                };
                (VerifySource::Perturbed(pert), format!("verify-{}", pert.name()))
            } else if let Some(path) = &a.input {
                text = fs::read_to_string(path)?;
                let stem = path
                    .file_stem()
                    .map_or("input".into(), |s| s.to_string_lossy().into_owned());
                (VerifySource::File(&text), format!("verify-{stem}"))
            } else {
                let s = a.surface.as_deref().expect("validated: one source is present");
                (VerifySource::Surface(s), format!("verify-{s}"))
            };
            let (report, checks) = commands::verify(source, a.n, n_theta, method)?;
            let stem = format!("{stem}-n{}", a.n);
            (
                checks.clone(),
                vec![write_json(dir, &format!("{stem}.json"), cfg, &checks, &report)?],
            )
        }
        Command::Converge(a) => {
            let (res, checks) = commands::converge(&a.surface, &a.h, a.k, (a.expect_index, a.expect_nullity), common)?;
            let stem = format!("converge-{}", a.surface);
            let rows: Vec<EigenRow> = res.levels.iter().flat_map(|l| eigen_rows(&l.report)).collect();
            let files = vec![
                write_json(dir, &format!("{stem}.json"), cfg, &checks, &res)?,
                write_csv(dir, &format!("{stem}.csv"), &rows)?,
            ];
            (checks, files)
        }
        Command::NullBasis(a) => {
            let (res, checks) = commands::null_basis(&a.h, a.min_order)?;
            (
                checks.clone(),
                vec![write_json(dir, "null-basis-ycone.json", cfg, &checks, &res)?],
            )
        }
        Command::Fields(a) => {
            let (res, checks) = commands::fields(a.h, a.rel_tol)?;
            let stem = format!("fields-ycone-h{}", fmt_h(a.h));
            (
                checks.clone(),
                vec![write_json(dir, &format!("{stem}.json"), cfg, &checks, &res)?],
            )
        }
    };
    Ok(Outcome { checks, files })
}

/// Parse, run and map the result to the exit-code contract: 0 when every
/// check passes, 2 when a check fails, 1 on usage or I/O errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match execute(&cfg) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
