//! Geodesic shooting in material form.
//!
//! Each step moves the mesh with the recovered velocity `G = ∇u` and updates
//! the potential along the moving vertices by
//! `u⁺ = u + dt·(‖∇u‖² - ŵ)`, where `ŵ` is the tangent-space projection of
//! `w = ½‖∇u‖²`. The boundary is then resampled by arclength, the interior
//! re-triangulated, and the potential transferred and projected back onto
//! the tangent space. Every `relift_every` steps the field is rebuilt from
//! the normal trace of its own gradient.

use std::sync::Arc;

use crate::contour::{BoundaryScalarField, Contour};
use crate::error::{invalid, Result, ShapeError};
use crate::geometry::Vec2;
use crate::mesh::{TriMesh, TriangleLocator};
use crate::poisson::ScalarField;
use crate::recovery::{area_weighted_scalars, quadratic_recovery};
use crate::tangent::{TangentSpace, TangentVector};

use super::diagnostics::{verify_continuity, Polynomial};

/// Fewest steps a shoot may take.
pub const MIN_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Rebuild the field from its boundary trace every this many steps;
    /// 0 disables re-lifting.
    pub relift_every: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { relift_every: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathStatus {
    Complete,
    /// The contour stopped being simple (or orientable) after `step`.
    Breakdown {
        step: usize,
        time: f64,
        reason: String,
    },
}

/// Per-time diagnostics of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub t: f64,
    /// `‖α_t‖` in the OT metric.
    pub kinetic_norm: f64,
    /// Standard deviation of the interior weak divergence of `α_t`.
    pub divergence_spread: f64,
    pub div_constant: f64,
    pub area: f64,
    /// Uniform density `1 / area`.
    pub density: f64,
    /// Mesh quadrature of `∫ dμ_t`.
    pub total_mass: f64,
    /// Largest relative continuity residual over the default test
    /// polynomials; `None` at the end points.
    pub continuity_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub contours: Vec<Contour>,
    pub potentials: Vec<TangentVector>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub length: f64,
    pub status: PathStatus,
    pub h: f64,
    pub dt: f64,
}

impl GeodesicPath {
    pub fn is_complete(&self) -> bool {
        self.status == PathStatus::Complete
    }

    pub fn final_contour(&self) -> &Contour {
        self.contours.last().expect("path has an initial contour")
    }

    /// Assembles a path from stored samples and recomputes its diagnostics,
    /// length and continuity residuals. `dt` is the first time increment.
    pub fn from_fields(
        times: Vec<f64>,
        contours: Vec<Contour>,
        potentials: Vec<TangentVector>,
        status: PathStatus,
        h: f64,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != contours.len() || times.len() != potentials.len() {
            return Err(invalid(format!(
                "{} times, {} contours and {} fields",
                times.len(),
                contours.len(),
                potentials.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("times must increase strictly"));
        }
        if contours
            .iter()
            .zip(&potentials)
            .any(|(c, a)| !a.mesh.matches_contour(c))
        {
            return Err(invalid("field was not built on its contour"));
        }
        let diagnostics = times
            .iter()
            .zip(&contours)
            .zip(&potentials)
            .map(|((&t, c), a)| diagnose(t, c, a))
            .collect();
        let dt = times.get(1).map_or(0.0, |t1| t1 - times[0]);
        let mut path = GeodesicPath {
            times,
            contours,
            potentials,
            diagnostics,
            length: 0.0,
            status,
            h,
            dt,
        };
        path.length = path_length(&path);
        for r in verify_continuity(&path, &Polynomial::monomials(3)) {
            path.diagnostics[r.step].continuity_residual = Some(r.max_relative());
        }
        Ok(path)
    }

    /// Normal velocity at each contour sample of every stored time.
    pub fn boundary_speeds(&self) -> Result<Vec<BoundaryScalarField>> {
        self.contours
            .iter()
            .zip(&self.potentials)
            .map(|(c, a)| normal_trace(c, &a.potential))
            .collect()
    }
}

/// Trapezoidal integral of the kinetic norms over the stored times.
pub fn path_length(p: &GeodesicPath) -> f64 {
    trapezoid(
        &p.times,
        &p.diagnostics
            .iter()
            .map(|d| d.kinetic_norm)
            .collect::<Vec<_>>(),
    )
}

pub(crate) fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

pub fn shoot_geodesic(
    c0: &Contour,
    a0: &BoundaryScalarField,
    horizon: f64,
    steps: usize,
    h: f64,
) -> Result<GeodesicPath> {
    shoot_geodesic_with(c0, a0, horizon, steps, h, &ShootOptions::default())
}

pub fn shoot_geodesic_with(
    c0: &Contour,
    a0: &BoundaryScalarField,
    horizon: f64,
    steps: usize,
    h: f64,
    options: &ShootOptions,
) -> Result<GeodesicPath> {
    if a0.len() != c0.len() {
        return Err(invalid(format!(
            "{} boundary values for {} samples",
            a0.len(),
            c0.len()
        )));
    }
    if steps < MIN_STEPS {
        return Err(invalid(format!(
            "at least {MIN_STEPS} steps required, got {steps}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let dt = horizon / steps as f64;
    let n_samples = c0.len();

    let mut space = TangentSpace::new(c0.clone(), h)?;
    let mut alpha = space.lift(a0)?;
    let mut times = vec![0.0];
    let mut contours = vec![c0.clone()];
    let mut potentials = vec![alpha.clone()];
    let mut status = PathStatus::Complete;

    for step in 0..steps {
        let t_next = (step + 1) as f64 * dt;
        let mesh = space.mesh().clone();
        let grads = quadratic_recovery(&alpha.potential).gradients;

        let w = kinetic_energy_density(&alpha);
        let w_hat = space.project(&w)?;
        let moved: Vec<Vec2> = mesh
            .vertices()
            .iter()
            .zip(&grads)
            .map(|(&x, &g)| x + g * dt)
            .collect();
        let boundary: Vec<Vec2> = (0..n_samples)
            .map(|s| moved[mesh.boundary_vertex(s)])
            .collect();

        let next_contour =
            match Contour::new(boundary).and_then(|c| c.resample_arclength(n_samples)) {
                Ok(c) => c,
                Err(e) => {
                    status = PathStatus::Breakdown {
                        step: step + 1,
                        time: t_next,
                        reason: e.to_string(),
                    };
                    break;
                }
            };
        let next_space = TangentSpace::new(next_contour, h)?;

        let updated: Vec<f64> = (0..mesh.vertex_count())
            .map(|v| {
                alpha.potential.values()[v]
                    + dt * (2.0 * w.values()[v] - w_hat.potential.values()[v])
            })
            .collect();
        let transferred = transfer(&moved, mesh.triangles(), &updated, next_space.mesh())?;
        let projected = next_space.project(&transferred)?;
        alpha = if options.relift_every > 0 && (step + 1) % options.relift_every == 0 {
            let a = normal_trace(next_space.contour(), &projected.potential)?;
            next_space.lift(&a)?
        } else {
            projected
        };
        space = next_space;

        times.push(t_next);
        contours.push(space.contour().clone());
        potentials.push(alpha.clone());
    }

    let mut path = GeodesicPath::from_fields(times, contours, potentials, status, h)?;
    path.dt = dt;
    Ok(path)
}

/// `w = ½‖∇u‖²` at the vertices, from area-weighted averages of the squared
/// triangle gradients.
pub fn kinetic_energy_density(alpha: &TangentVector) -> ScalarField {
    let sq: Vec<f64> = alpha
        .grad
        .vectors()
        .iter()
        .map(|g| 0.5 * g.norm_sq())
        .collect();
    let values = area_weighted_scalars(&alpha.mesh, &sq);
    ScalarField::new(alpha.mesh.clone(), values).expect("one value per vertex")
}

/// Normal component of the recovered gradient of `u` at each sample of `c`.
pub fn normal_trace(c: &Contour, u: &ScalarField) -> Result<BoundaryScalarField> {
    let mesh = u.mesh();
    if !mesh.matches_contour(c) {
        return Err(invalid("potential was not built on this contour"));
    }
    let grads = quadratic_recovery(u).gradients;
    let normals = c.normal_field()?;
    Ok(BoundaryScalarField::new(
        normals
            .vectors
            .iter()
            .enumerate()
            .map(|(s, n)| grads[mesh.boundary_vertex(s)].dot(*n))
            .collect(),
    ))
}

/// Interpolates P1 data living on `(positions, triangles)` at the vertices of
/// `target`.
fn transfer(
    positions: &[Vec2],
    triangles: &[[usize; 3]],
    values: &[f64],
    target: &Arc<TriMesh>,
) -> Result<ScalarField> {
    let locator = TriangleLocator::new(positions.to_vec(), triangles.to_vec());
    let out = target
        .vertices()
        .iter()
        .map(|&p| {
            let loc = locator.locate_or_nearest(p);
            if loc.distance > target.h() {
                return Err(ShapeError::OutOfDomain(format!(
                    "new vertex ({}, {}) lies {:.3e} outside the advected mesh",
                    p.x, p.y, loc.distance
                )));
            }
            let tri = triangles[loc.triangle];
            Ok((0..3).map(|k| loc.weights[k] * values[tri[k]]).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    ScalarField::new(target.clone(), out)
}

fn diagnose(t: f64, contour: &Contour, alpha: &TangentVector) -> StepDiagnostics {
    let area = contour.area();
    let density = 1.0 / area;
    StepDiagnostics {
        t,
        kinetic_norm: alpha.norm(),
        divergence_spread: alpha.divergence_spread(),
        div_constant: alpha.div_constant,
        area,
        density,
        total_mass: alpha.mesh.total_area() * density,
        continuity_residual: None,
    }
}
