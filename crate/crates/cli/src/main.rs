//! `shapeflow` command-line front end.

mod commands;
mod error;
mod field_spec;
mod output;
mod render;
mod shapes;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use field_spec::FieldSpec;
use shapes::ShapeKind;

const FORMATS: &str = "\
Output files:
  run.json          command, arguments and resolved parameters (every command)
  contour.json      {\"points\": [[x, y], ...]}, counter-clockwise (generate)
  potential.csv     vertex,x,y,boundary,u,S    nodal potential; S is the divergence constant
  gradient.csv      triangle,cx,cy,gx,gy       per-triangle gradient at the centroid
  lift.json         S, norms and the interior/boundary gradient magnitude ratio
  decomposition.json  v_trans, lambda, component norms, orthogonality, reconstruction error
  steps/step_NNNN.json  {\"step\", \"t\", \"points\", \"speeds\"}: contour and normal speeds per step
  diagnostics.csv   step,t,kinetic_norm,divergence_spread,div_constant,area,density,total_mass,continuity_residual,log_det_mean,log_det_std
  trajectories.csv  particle,step,t,x,y
  summary.json      status, length and transport statistics of a shoot
  verify.csv        step,t,continuity_residual,log_det_mean,log_det_std,pass

Exit codes: 0 success, 1 numerical failure, 2 usage or format error, 3 geodesic breakdown.";

#[derive(Debug, Parser)]
#[command(name = "shapeflow", version, about = "Shape measures of planar contours: lifting, decomposition and geodesic shooting", after_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a sampled test contour.
    Generate(GenerateArgs),
    /// Lift a boundary field to its constant-divergence interior field.
    Lift(LiftArgs),
    /// Split a lifted field into translation, scale and deformation.
    Decompose(FieldArgs),
    /// Shoot a geodesic from a contour and an initial boundary field.
    Geodesic(GeodesicArgs),
    /// Re-lift a stored path and check continuity and density uniformity.
    Verify(VerifyArgs),
    /// Redraw the SVGs of a path directory or a contour file.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RenderOptions {
    /// SVG width in pixels.
    #[arg(long, default_value_t = 800.0)]
    pub width: f64,
    /// Contour stroke width in pixels.
    #[arg(long, default_value_t = 1.5)]
    pub stroke: f64,
    /// Multiplier on the automatic arrow length.
    #[arg(long, default_value_t = 1.0)]
    pub arrow_scale: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: ShapeKind,
    /// Number of contour samples.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Radius, or the semi-axis along x for ellipses.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Ellipse semi-axis along y.
    #[arg(long, default_value_t = 0.6)]
    pub minor: f64,
    /// Star λ in r = R(1 + λ/n·sin nθ) (default 0.3), or relative bump height (default 0.35).
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Star lobe count n.
    #[arg(long, default_value_t = 5)]
    pub lobes: u32,
    /// Bump variance in θ.
    #[arg(long, default_value_t = 0.1)]
    pub spread: f64,
    /// Bump centre angle in radians.
    #[arg(long, default_value_t = 1.0)]
    pub center: f64,
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
    #[command(flatten)]
    pub render: RenderOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct FieldArgs {
    /// Contour JSON file.
    pub contour: PathBuf,
    /// Boundary field, e.g. "const:1+cos:2" or "file:speeds.json".
    #[arg(long)]
    #[serde(serialize_with = "output::display")]
    pub field: FieldSpec,
    /// Target mesh edge length; defaults to diameter / 40.
    #[arg(long)]
    pub mesh_size: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LiftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: FieldArgs,
    #[command(flatten)]
    pub render: RenderOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct GeodesicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: FieldArgs,
    /// Final time T.
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Number of time steps; defaults to 64 unless --dt is given.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Time step; must divide the horizon.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Rebuild the field from its boundary trace every this many steps.
    #[arg(long, default_value_t = 5)]
    pub relift_every: usize,
    /// Number of tracked particles.
    #[arg(long, default_value_t = 64)]
    pub particles: usize,
    #[command(flatten)]
    pub render: RenderOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Directory written by `shapeflow geodesic`.
    pub path: PathBuf,
    /// Largest accepted relative continuity residual.
    #[arg(long, default_value_t = 0.02)]
    pub continuity_tol: f64,
    /// Largest accepted spread of log det J across particles.
    #[arg(long, default_value_t = 1e-6)]
    pub uniformity_tol: f64,
    /// Number of tracked particles.
    #[arg(long, default_value_t = 64)]
    pub particles: usize,
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    /// Path directory or contour JSON file.
    pub input: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
    #[command(flatten)]
    pub render: RenderOptions,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Lift(a) => commands::lift(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Geodesic(a) => commands::geodesic(a),
        Command::Verify(a) => commands::verify(a),
        Command::Render(a) => commands::render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shapeflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
