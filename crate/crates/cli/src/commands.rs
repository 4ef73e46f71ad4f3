//! One function per subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shapeflow::dynamics::{
    chord_deviation, density_uniformity, hessian_departure, shoot_geodesic_with, GeodesicPath,
    PathStatus, ShootOptions, UniformityReport, MIN_STEPS,
};
use shapeflow::geometry::polygon_distance;
use shapeflow::tangent::{TangentSpace, TangentVector};
use shapeflow::{BoundaryScalarField, Contour, Vec2};

use crate::error::{CliError, CliResult};
use crate::output::{read_contour, read_text, require_positive, to_json, OutputDir};
use crate::render::{contour_svg, filmstrip_svg, lift_svg, trajectories_svg};
use crate::shapes::{self, ShapeKind, ShapeParams};
use crate::{
    FieldArgs, GenerateArgs, GeodesicArgs, LiftArgs, RenderArgs, RenderOptions, VerifyArgs,
};

const STEPS_DIR: &str = "steps";
const DEFAULT_STEPS: usize = 64;

fn check_render(o: &RenderOptions) -> CliResult<()> {
    require_positive("width", o.width)?;
    require_positive("stroke", o.stroke)?;
    require_positive("arrow-scale", o.arrow_scale)?;
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> CliResult<()> {
    check_render(&a.render)?;
    let default_amplitude = if a.kind == ShapeKind::Bump { 0.35 } else { 0.3 };
    let params = ShapeParams {
        samples: a.samples,
        radius: a.radius,
        minor: a.minor,
        amplitude: a.amplitude.unwrap_or(default_amplitude),
        lobes: a.lobes,
        spread: a.spread,
        center: a.center,
    };
    let c = shapes::generate(a.kind, params)?;
    let out = OutputDir::create(&a.output, "generate", a, &params)?;
    out.write("contour.json", &format!("{}\n", c.to_json()))?;
    out.write("contour.svg", &contour_svg(&c, &a.render))?;
    println!(
        "{} samples, area {:.9}, perimeter {:.9}",
        c.len(),
        c.area(),
        c.perimeter()
    );
    Ok(())
}

/// Contour, boundary data and mesh size of a field command.
struct FieldInput {
    contour: Contour,
    data: BoundaryScalarField,
    h: f64,
}

fn field_input(a: &FieldArgs) -> CliResult<FieldInput> {
    let contour = read_contour(&a.contour)?;
    let data = a.field.evaluate(&contour)?;
    let h = match a.mesh_size {
        Some(h) => require_positive("mesh-size", h)?,
        None => contour.diameter() / 40.0,
    };
    Ok(FieldInput { contour, data, h })
}

#[derive(Serialize)]
struct MeshResolved {
    mesh_size: f64,
    samples: usize,
}

/// Mean gradient magnitude on triangles touching the boundary and on the
/// deep interior (centroids at least half the largest depth inside).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MagnitudeProfile {
    pub boundary_mean: f64,
    pub interior_mean: f64,
    pub ratio: f64,
}

pub fn magnitude_profile(c: &Contour, alpha: &TangentVector) -> MagnitudeProfile {
    let mesh = &alpha.mesh;
    let depth: Vec<f64> = (0..mesh.triangle_count())
        .map(|t| polygon_distance(mesh.centroid(t), c.points()))
        .collect();
    let deepest = depth.iter().copied().fold(0.0, f64::max);
    let mean = |sel: &dyn Fn(usize) -> bool| {
        let v: Vec<f64> = (0..mesh.triangle_count())
            .filter(|&t| sel(t))
            .map(|t| alpha.grad.vectors()[t].norm())
            .collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let boundary_mean = mean(&|t| mesh.triangles()[t].iter().any(|&v| mesh.is_boundary(v)));
    let interior_mean = mean(&|t| depth[t] >= 0.5 * deepest);
    let ratio = if boundary_mean > 0.0 {
        interior_mean / boundary_mean
    } else {
        0.0
    };
    MagnitudeProfile {
        boundary_mean,
        interior_mean,
        ratio,
    }
}

#[derive(Serialize)]
struct LiftReport {
    #[serde(rename = "S")]
    s: f64,
    norm: f64,
    divergence_spread: f64,
    vertices: usize,
    triangles: usize,
    mesh_size: f64,
    magnitude: MagnitudeProfile,
}

pub fn lift(a: &LiftArgs) -> CliResult<()> {
    check_render(&a.render)?;
    let input = field_input(&a.input)?;
    let resolved = MeshResolved {
        mesh_size: input.h,
        samples: input.contour.len(),
    };
    let out = OutputDir::create(&a.input.output, "lift", a, &resolved)?;
    let space = TangentSpace::new(input.contour.clone(), input.h)?;
    let alpha = space.lift(&input.data)?;
    let report = LiftReport {
        s: alpha.div_constant,
        norm: alpha.norm(),
        divergence_spread: alpha.divergence_spread(),
        vertices: alpha.mesh.vertex_count(),
        triangles: alpha.mesh.triangle_count(),
        mesh_size: input.h,
        magnitude: magnitude_profile(&input.contour, &alpha),
    };
    out.write("potential.csv", &alpha.potential_csv())?;
    out.write("gradient.csv", &alpha.gradient_csv())?;
    out.write("lift.json", &to_json(&report))?;
    out.write("lift.svg", &lift_svg(&input.contour, &alpha, &a.render))?;
    println!(
        "S = {:.9}, norm = {:.6e}, interior/boundary magnitude ratio = {:.4}",
        report.s, report.norm, report.magnitude.ratio
    );
    Ok(())
}

pub fn decompose(a: &FieldArgs) -> CliResult<()> {
    let input = field_input(a)?;
    let resolved = MeshResolved {
        mesh_size: input.h,
        samples: input.contour.len(),
    };
    let out = OutputDir::create(&a.output, "decompose", a, &resolved)?;
    let space = TangentSpace::new(input.contour, input.h)?;
    let d = space.decompose(&space.lift(&input.data)?)?;
    out.write("decomposition.json", &format!("{}\n", d.to_json()))?;
    println!(
        "v_trans = ({:.6e}, {:.6e}), lambda = {:.6e}, max orthogonality residual = {:.3e}",
        d.v_trans.x,
        d.v_trans.y,
        d.lambda_scale,
        d.orthogonality.max()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct StepFile {
    step: usize,
    t: f64,
    points: Vec<Vec2>,
    speeds: Vec<f64>,
}

#[derive(Serialize)]
struct GeodesicResolved {
    mesh_size: f64,
    samples: usize,
    steps: usize,
    dt: f64,
}

#[derive(Serialize)]
struct Breakdown<'a> {
    step: usize,
    time: f64,
    reason: &'a str,
}

#[derive(Serialize)]
struct GeodesicSummary<'a> {
    status: &'a str,
    breakdown: Option<Breakdown<'a>>,
    steps_completed: usize,
    length: f64,
    final_area: f64,
    max_continuity_residual: Option<f64>,
    initial_hessian_departure: f64,
    chord_deviation: Option<f64>,
    log_det_mean_final: Option<f64>,
    log_det_std_max: Option<f64>,
}

fn resolve_steps(a: &GeodesicArgs) -> CliResult<usize> {
    require_positive("horizon", a.horizon)?;
    let steps = match (a.steps, a.dt) {
        (Some(n), None) => n,
        (None, None) => DEFAULT_STEPS,
        (steps, Some(dt)) => {
            require_positive("dt", dt)?;
            let n = (a.horizon / dt).round();
            if (n * dt - a.horizon).abs() > 1e-9 * a.horizon || steps.is_some_and(|s| s as f64 != n)
            {
                return Err(CliError::usage(format!(
                    "--dt {dt} does not divide --horizon {} into the requested steps",
                    a.horizon
                )));
            }
            n as usize
        }
    };
    if steps < MIN_STEPS {
        return Err(CliError::usage(format!(
            "at least {MIN_STEPS} steps are required, got {steps}"
        )));
    }
    Ok(steps)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:?}"))
}

fn diagnostics_csv(path: &GeodesicPath, report: Option<&UniformityReport>) -> String {
    let mut s = String::from(
        "step,t,kinetic_norm,divergence_spread,div_constant,area,density,total_mass,continuity_residual,log_det_mean,log_det_std\n",
    );
    for (k, d) in path.diagnostics.iter().enumerate() {
        let (m, sd) = report.map_or((None, None), |r| {
            (r.mean.get(k).copied(), r.std.get(k).copied())
        });
        s.push_str(&format!(
            "{k},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{}\n",
            d.t,
            d.kinetic_norm,
            d.divergence_spread,
            d.div_constant,
            d.area,
            d.density,
            d.total_mass,
            fmt_opt(d.continuity_residual),
            fmt_opt(m),
            fmt_opt(sd)
        ));
    }
    s
}

/// Per-particle position sequences from a report's history.
fn tracks(report: &UniformityReport) -> Vec<Vec<Vec2>> {
    let history = report.particles.history.as_deref().unwrap_or(&[]);
    (0..report.particles.len())
        .map(|i| history.iter().map(|(_, pos)| pos[i]).collect())
        .collect()
}

fn trajectories_csv(report: &UniformityReport) -> String {
    let mut s = String::from("particle,step,t,x,y\n");
    let history = report.particles.history.as_deref().unwrap_or(&[]);
    for i in 0..report.particles.len() {
        for (k, (t, pos)) in history.iter().enumerate() {
            s.push_str(&format!("{i},{k},{t:?},{:?},{:?}\n", pos[i].x, pos[i].y));
        }
    }
    s
}

pub fn geodesic(a: &GeodesicArgs) -> CliResult<()> {
    check_render(&a.render)?;
    let steps = resolve_steps(a)?;
    let input = field_input(&a.input)?;
    let dt = a.horizon / steps as f64;
    let resolved = GeodesicResolved {
        mesh_size: input.h,
        samples: input.contour.len(),
        steps,
        dt,
    };
    let out = OutputDir::create(&a.input.output, "geodesic", a, &resolved)?;

    let options = ShootOptions {
        relift_every: a.relift_every,
    };
    let path = shoot_geodesic_with(
        &input.contour,
        &input.data,
        a.horizon,
        steps,
        input.h,
        &options,
    )?;
    let speeds = path.boundary_speeds()?;
    for (k, (c, v)) in path.contours.iter().zip(&speeds).enumerate() {
        let file = StepFile {
            step: k,
            t: path.times[k],
            points: c.points().to_vec(),
            speeds: v.values.clone(),
        };
        out.write(&format!("{STEPS_DIR}/step_{k:04}.json"), &to_json(&file))?;
    }

    let report = match (&path.status, a.particles) {
        (PathStatus::Complete, n) if n > 0 => Some(density_uniformity(&path, n)?),
        _ => None,
    };
    out.write("diagnostics.csv", &diagnostics_csv(&path, report.as_ref()))?;
    out.write(
        "filmstrip.svg",
        &filmstrip_svg(&path.contours, &path.times, &a.render),
    )?;
    if let Some(r) = &report {
        out.write("trajectories.csv", &trajectories_csv(r))?;
        out.write(
            "trajectories.svg",
            &trajectories_svg(
                &path.contours[0],
                path.final_contour(),
                &tracks(r),
                &a.render,
            ),
        )?;
    }

    let (status, breakdown) = match &path.status {
        PathStatus::Complete => ("complete", None),
        PathStatus::Breakdown { step, time, reason } => (
            "breakdown",
            Some(Breakdown {
                step: *step,
                time: *time,
                reason,
            }),
        ),
    };
    let summary = GeodesicSummary {
        status,
        breakdown,
        steps_completed: path.times.len() - 1,
        length: path.length,
        final_area: path.final_contour().area(),
        max_continuity_residual: path
            .diagnostics
            .iter()
            .filter_map(|d| d.continuity_residual)
            .reduce(f64::max),
        initial_hessian_departure: hessian_departure(&path.potentials[0]),
        chord_deviation: report.as_ref().map(|r| chord_deviation(&r.particles)),
        log_det_mean_final: report.as_ref().and_then(|r| r.mean.last().copied()),
        log_det_std_max: report.as_ref().map(UniformityReport::max_std),
    };
    out.write("summary.json", &to_json(&summary))?;

    if let PathStatus::Breakdown { step, time, reason } = path.status {
        return Err(CliError::Breakdown { step, time, reason });
    }
    println!(
        "complete: {} steps, length {:.6}, final area {:.6}",
        steps, summary.length, summary.final_area
    );
    Ok(())
}

/// Step files of a path directory, checked for contiguous numbering,
/// increasing times and matching sample counts.
fn read_steps(dir: &Path) -> CliResult<(Vec<f64>, Vec<Contour>, Vec<BoundaryScalarField>)> {
    let steps_dir = dir.join(STEPS_DIR);
    let entries = std::fs::read_dir(&steps_dir)
        .map_err(|e| CliError::usage(format!("cannot list {}: {e}", steps_dir.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("step_") && n.ends_with(".json"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::usage(format!(
            "{} holds no step files",
            steps_dir.display()
        )));
    }
    let (mut times, mut contours, mut speeds) = (Vec::new(), Vec::new(), Vec::new());
    for (k, name) in names.iter().enumerate() {
        let path = steps_dir.join(name);
        let bad = |m: String| CliError::usage(format!("{}: {m}", path.display()));
        let file: StepFile =
            serde_json::from_str(&read_text(&path)?).map_err(|e| bad(e.to_string()))?;
        if file.step != k || *name != format!("step_{k:04}.json") {
            return Err(bad(format!("expected step {k}")));
        }
        if file.speeds.len() != file.points.len() || file.speeds.iter().any(|v| !v.is_finite()) {
            return Err(bad("speeds do not match the contour samples".into()));
        }
        if !file.t.is_finite() || times.last().is_some_and(|&t| file.t <= t) {
            return Err(bad("times must increase".into()));
        }
        contours.push(Contour::new(file.points).map_err(|e| bad(e.to_string()))?);
        speeds.push(BoundaryScalarField::new(file.speeds));
        times.push(file.t);
    }
    Ok((times, contours, speeds))
}

fn path_mesh_size(dir: &Path) -> CliResult<f64> {
    let run = dir.join("run.json");
    let value: serde_json::Value = serde_json::from_str(&read_text(&run)?)
        .map_err(|e| CliError::usage(format!("{}: {e}", run.display())))?;
    if value["command"] != "geodesic" {
        return Err(CliError::usage(format!(
            "{} was not written by `shapeflow geodesic`",
            run.display()
        )));
    }
    value["resolved"]["mesh_size"]
        .as_f64()
        .filter(|h| *h > 0.0)
        .ok_or_else(|| {
            CliError::usage(format!(
                "{} lacks a positive resolved.mesh_size",
                run.display()
            ))
        })
}

#[derive(Serialize)]
struct VerifyResolved {
    mesh_size: f64,
    steps: usize,
}

#[derive(Serialize)]
struct VerifySummary {
    steps: usize,
    max_continuity_residual: f64,
    max_log_det_std: f64,
    continuity_tol: f64,
    uniformity_tol: f64,
    pass: bool,
}

pub fn verify(a: &VerifyArgs) -> CliResult<()> {
    require_positive("continuity-tol", a.continuity_tol)?;
    require_positive("uniformity-tol", a.uniformity_tol)?;
    let h = path_mesh_size(&a.path)?;
    let (times, contours, speeds) = read_steps(&a.path)?;
    if times.len() < 2 {
        return Err(CliError::usage("a path needs at least two steps"));
    }
    let out = OutputDir::create(
        &a.output,
        "verify",
        a,
        &VerifyResolved {
            mesh_size: h,
            steps: times.len() - 1,
        },
    )?;

    let fields = contours
        .iter()
        .zip(&speeds)
        .map(|(c, v)| TangentSpace::new(c.clone(), h)?.lift(v))
        .collect::<shapeflow::Result<Vec<_>>>()?;
    let path = GeodesicPath::from_fields(times, contours, fields, PathStatus::Complete, h)?;
    let report = if a.particles > 0 {
        Some(density_uniformity(&path, a.particles)?)
    } else {
        None
    };

    let mut csv = String::from("step,t,continuity_residual,log_det_mean,log_det_std,pass\n");
    let (mut worst_c, mut worst_u) = (0.0f64, 0.0f64);
    for (k, d) in path.diagnostics.iter().enumerate() {
        let (m, sd) = report.as_ref().map_or((None, None), |r| {
            (r.mean.get(k).copied(), r.std.get(k).copied())
        });
        let ok = d.continuity_residual.is_none_or(|r| r <= a.continuity_tol)
            && sd.is_none_or(|s| s <= a.uniformity_tol);
        worst_c = worst_c.max(d.continuity_residual.unwrap_or(0.0));
        worst_u = worst_u.max(sd.unwrap_or(0.0));
        csv.push_str(&format!(
            "{k},{:?},{},{},{},{}\n",
            d.t,
            fmt_opt(d.continuity_residual),
            fmt_opt(m),
            fmt_opt(sd),
            u8::from(ok)
        ));
    }
    let pass = worst_c <= a.continuity_tol && worst_u <= a.uniformity_tol;
    let summary = VerifySummary {
        steps: path.times.len() - 1,
        max_continuity_residual: worst_c,
        max_log_det_std: worst_u,
        continuity_tol: a.continuity_tol,
        uniformity_tol: a.uniformity_tol,
        pass,
    };
    out.write("verify.csv", &csv)?;
    out.write("verify.json", &to_json(&summary))?;
    println!(
        "{}: max continuity residual {worst_c:.3e} (tol {}), max log det J spread {worst_u:.3e} (tol {})",
        if pass { "PASS" } else { "FAIL" },
        a.continuity_tol,
        a.uniformity_tol
    );
    if pass {
        Ok(())
    } else {
        Err(CliError::Numerical(
            "verification thresholds exceeded".into(),
        ))
    }
}

fn read_tracks(path: &Path) -> CliResult<Vec<Vec<Vec2>>> {
    let text = read_text(path)?;
    let mut tracks: Vec<Vec<Vec2>> = Vec::new();
    for (line_no, line) in text.lines().enumerate().skip(1) {
        let bad = || CliError::usage(format!("{}:{}: malformed row", path.display(), line_no + 1));
        let cols: Vec<&str> = line.split(',').collect();
        let [i, _, _, x, y] = cols[..] else {
            return Err(bad());
        };
        let i: usize = i.parse().map_err(|_| bad())?;
        let p = Vec2::new(x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?);
        if i == tracks.len() {
            tracks.push(Vec::new());
        }
        tracks.get_mut(i).ok_or_else(bad)?.push(p);
    }
    Ok(tracks)
}

pub fn render(a: &RenderArgs) -> CliResult<()> {
    check_render(&a.render)?;
    if a.input.is_dir() {
        let (times, contours, _) = read_steps(&a.input)?;
        let tracks_file = a.input.join("trajectories.csv");
        let tracks = if tracks_file.is_file() {
            Some(read_tracks(&tracks_file)?)
        } else {
            None
        };
        let out = OutputDir::create(&a.output, "render", a, &())?;
        out.write(
            "filmstrip.svg",
            &filmstrip_svg(&contours, &times, &a.render),
        )?;
        if let Some(t) = tracks {
            out.write(
                "trajectories.svg",
                &trajectories_svg(&contours[0], &contours[contours.len() - 1], &t, &a.render),
            )?;
        }
    } else {
        let c = read_contour(&a.input)?;
        let out = OutputDir::create(&a.output, "render", a, &())?;
        out.write("contour.svg", &contour_svg(&c, &a.render))?;
    }
    Ok(())
}
