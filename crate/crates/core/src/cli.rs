//! `ehglue` command line: argument parsing, dispatch and report emission.

use crate::ehspace::{verify_identities, DiffConfig, VerifyGrid};
use crate::error::{Error, Result};
use crate::gluing::{residual_scan, Builder, ChartKind, OrbifoldChart, ScanGrid};
use crate::jets::{curvature_at_origin, curvature_operator, einstein_check, load_jet, QuadJet};
use crate::lin4::{GaugeElement, Mat3};
use crate::obstruction::{
    align_gauge_with, aligned_lambda, lambda_coefficients, rplus_of, wall_condition, Degeneracy, QUAD_TOL, WALL_TOL,
};
use crate::report::to_json;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_ACCURACY: i32 = 4;
pub const EXIT_INTERNAL: i32 = 1;

pub const DEFAULT_T_LIST: &str = "1e-2,3e-3,1e-3,3e-4";
const DEFAULT_VERIFY_POINTS: usize = 60;
const DEFAULT_SCAN_RADII: usize = 24;
const VERIFY_R_MIN: f64 = 0.3;
const VERIFY_R_MAX: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(name = "ehglue", version, about = "Eguchi-Hanson gluing diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Jet file, or `catalog:NAME`.
    #[arg(long, global = true)]
    pub input: Option<String>,

    /// Catalog entry: flat, real-hyperbolic or complex-hyperbolic.
    #[arg(long, global = true)]
    pub catalog: Option<String>,

    /// Comma-separated gluing parameters for glue-scan.
    #[arg(long, global = true, default_value = DEFAULT_T_LIST)]
    pub t_list: String,

    /// Sample points (eh-verify) or radii per t (glue-scan).
    #[arg(long, global = true)]
    pub grid: Option<usize>,

    /// Relative eigenvalue threshold for the wall condition.
    #[arg(long, global = true, default_value_t = WALL_TOL)]
    pub wall_tol: f64,

    /// Finite-difference step.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub diff_step: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for sample directions.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Uniform residual tolerance for eh-verify, replacing the per-identity ones.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    #[arg(long, global = true, default_value = "naive")]
    pub builder: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Curvature at the origin of a quadratic jet.
    JetCurvature,
    /// Obstruction coefficients, wall condition and aligned gauge of a jet.
    Obstruction,
    /// Pointwise Eguchi-Hanson identities on a sample grid.
    EhVerify,
    /// Einstein residual of the glued metric against t.
    GlueScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub wall_tol: f64,
    pub diff_step: f64,
    pub quad_tol: f64,
    pub residual_tol: Option<f64>,
}

/// Everything that determines a report. The output path is not part of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<String>,
    pub tolerances: Tolerances,
    pub grid: usize,
    pub t_list: Vec<f64>,
    pub builder: Builder,
    pub format: Format,
    pub seed: u64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("--{name} must be positive, got {v}")))
    }
}

pub fn parse_t_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            let v: f64 = p.parse().map_err(|_| Error::InvalidInput(format!("bad t value {p:?}")))?;
            positive("t-list", v)
        })
        .collect()
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let input = match (&cli.input, &cli.catalog) {
            (Some(_), Some(_)) => return Err(Error::InvalidInput("give either --input or --catalog".into())),
            (Some(p), None) => Some(p.clone()),
            (None, Some(c)) => Some(format!("catalog:{c}")),
            (None, None) => None,
        };
        let tol = cli.tol.map(|t| positive("tol", t)).transpose()?;
        let grid = cli.grid.unwrap_or(match cli.command {
            Command::GlueScan => DEFAULT_SCAN_RADII,
            _ => DEFAULT_VERIFY_POINTS,
        });
        if grid == 0 {
            return Err(Error::InvalidInput("--grid must be positive".into()));
        }
        Ok(RunConfig {
            command: cli.command,
            input,
            tolerances: Tolerances {
                wall_tol: positive("wall-tol", cli.wall_tol)?,
                diff_step: positive("diff-step", cli.diff_step)?,
                quad_tol: QUAD_TOL,
                residual_tol: tol,
            },
            grid,
            t_list: parse_t_list(&cli.t_list)?,
            builder: Builder::from_name(&cli.builder)?,
            format: cli.format,
            seed: cli.seed,
        })
    }

    fn diff_config(&self) -> DiffConfig {
        DiffConfig {
            step: self.tolerances.diff_step,
            ..DiffConfig::default()
        }
    }

    fn input(&self) -> Result<&str> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidInput(format!("{:?} needs --input or --catalog", self.command)))
    }

    fn catalog_kind(&self) -> Result<Option<ChartKind>> {
        match self.input()?.strip_prefix("catalog:") {
            Some(name) => ChartKind::from_name(name).map(Some),
            None => Ok(None),
        }
    }

    fn jet(&self) -> Result<QuadJet> {
        match self.catalog_kind()? {
            Some(kind) => Ok(OrbifoldChart::catalog(kind)?.jet()),
            None => load_jet(Path::new(self.input()?)),
        }
    }
}

/// A run's outcome: the rendered report and the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Accuracy(_) => EXIT_ACCURACY,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

fn mat3(m: &Mat3) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct OperatorBlocks {
    rplus: [[f64; 3]; 3],
    rminus: [[f64; 3]; 3],
    ric0: [[f64; 3]; 3],
    wplus: [[f64; 3]; 3],
    wminus: [[f64; 3]; 3],
    scal: f64,
}

#[derive(Serialize)]
struct EinsteinBlock {
    is_einstein: bool,
    lambda: f64,
    defect: f64,
}

#[derive(Serialize)]
struct CurvatureReport {
    /// `R_abcd`, indices 0-based in the nesting order.
    curvature: Vec<Vec<Vec<Vec<f64>>>>,
    operator: OperatorBlocks,
    einstein: EinsteinBlock,
    wall: crate::obstruction::WallReport,
}

fn jet_curvature(cfg: &RunConfig) -> Result<String> {
    let h = cfg.jet()?;
    let r = curvature_at_origin(&h);
    let op = curvature_operator(&r);
    let e = einstein_check(&h);
    let body = CurvatureReport {
        curvature: (0..4)
            .map(|a| (0..4).map(|b| (0..4).map(|c| (0..4).map(|d| r.get(a, b, c, d)).collect()).collect()).collect())
            .collect(),
        operator: OperatorBlocks {
            rplus: mat3(&op.rplus()),
            rminus: mat3(&op.rminus()),
            ric0: mat3(&op.ric0()),
            wplus: mat3(&op.wplus()),
            wminus: mat3(&op.wminus()),
            scal: op.scal(),
        },
        einstein: EinsteinBlock {
            is_einstein: e.is_einstein,
            lambda: e.lambda,
            defect: e.defect,
        },
        wall: wall_condition(&op.rplus(), cfg.tolerances.wall_tol)?,
    };
    to_json(&Envelope { config: cfg, body })
}

#[derive(Serialize)]
struct Gauge {
    quaternion: [f64; 4],
    aligned_rplus: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct ObstructionReport {
    rplus: [[f64; 3]; 3],
    eigenvalues: [f64; 3],
    det: f64,
    on_wall: bool,
    kernel_dim: usize,
    kernel: Vec<[f64; 3]>,
    degeneracy: Degeneracy,
    wall_tolerance: f64,
    /// `null` off the wall.
    gauge: Option<Gauge>,
    /// In the aligned frame on the wall, in the input frame otherwise.
    lambda: [f64; 3],
    lambda_input_frame: [f64; 3],
    raw_input_frame: [f64; 3],
    omega_norm_sq: f64,
}

fn obstruction(cfg: &RunConfig) -> Result<String> {
    let h = cfg.jet()?;
    let rplus = rplus_of(&h);
    let wall = wall_condition(&rplus, cfg.tolerances.wall_tol)?;
    let input = lambda_coefficients(&h)?;
    let (gauge, lambda) = if wall.on_wall {
        let al = align_gauge_with(&rplus, cfg.tolerances.wall_tol)?;
        let lam = aligned_lambda(&h, &al)?;
        (
            Some(Gauge {
                quaternion: al.phi.quaternion(),
                aligned_rplus: mat3(&al.conjugated),
            }),
            lam.lambda,
        )
    } else {
        (None, input.lambda)
    };
    let body = ObstructionReport {
        rplus: wall.rplus,
        eigenvalues: wall.eigenvalues,
        det: wall.det,
        on_wall: wall.on_wall,
        kernel_dim: wall.kernel_dim,
        kernel: wall.kernel.clone(),
        degeneracy: wall.degeneracy,
        wall_tolerance: wall.tolerance,
        gauge,
        lambda,
        lambda_input_frame: input.lambda,
        raw_input_frame: input.raw,
        omega_norm_sq: input.omega_norm_sq,
    };
    to_json(&Envelope { config: cfg, body })
}

fn eh_verify(cfg: &RunConfig) -> Result<Outcome> {
    let grid = VerifyGrid::log_radial(cfg.grid, VERIFY_R_MIN, VERIFY_R_MAX, cfg.seed)?;
    let report = verify_identities(&grid, &cfg.diff_config(), cfg.tolerances.residual_tol)?;
    let exit = if report.all_passed() { EXIT_OK } else { EXIT_VALIDATION };
    let text = match cfg.format {
        Format::Csv => report.to_csv(),
        Format::Json => to_json(&Envelope { config: cfg, body: &report })?,
    };
    Ok(Outcome { text, exit })
}

fn glue_scan(cfg: &RunConfig) -> Result<String> {
    let kind = match cfg.input.as_deref() {
        None => ChartKind::RealHyperbolic,
        Some(_) => cfg
            .catalog_kind()?
            .ok_or_else(|| Error::InvalidInput("glue-scan takes a catalog chart, not a jet file".into()))?,
    };
    let chart = OrbifoldChart::catalog(kind)?;
    let scan = residual_scan(
        cfg.builder,
        &chart,
        GaugeElement::identity(),
        &cfg.t_list,
        &ScanGrid::new(cfg.grid),
        &cfg.diff_config(),
    )?;
    match cfg.format {
        Format::Csv => Ok(scan.to_csv()),
        Format::Json => to_json(&Envelope { config: cfg, body: &scan }),
    }
}

fn json_only(cfg: &RunConfig) -> Result<()> {
    if cfg.format == Format::Csv {
        return Err(Error::InvalidInput(format!(
            "csv output is available for eh-verify and glue-scan only, not {:?}",
            cfg.command
        )));
    }
    Ok(())
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let ok = |text| Outcome { text, exit: EXIT_OK };
    match cfg.command {
        Command::JetCurvature => {
            json_only(cfg)?;
            jet_curvature(cfg).map(ok)
        }
        Command::Obstruction => {
            json_only(cfg)?;
            obstruction(cfg).map(ok)
        }
        Command::EhVerify => eh_verify(cfg),
        Command::GlueScan => glue_scan(cfg).map(ok),
    }
}

/// Parses `args`, runs, writes the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::from_cli(&cli).and_then(|cfg| execute(&cfg));
    match result {
        Ok(out) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &out.text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            match written {
                Ok(()) => out.exit,
                Err(e) => {
                    eprintln!("ehglue: {e}");
                    exit_code(&e)
                }
            }
        }
        Err(e) => {
            eprintln!("ehglue: {e}");
            exit_code(&e)
        }
    }
}
