//! Particle advection through time-dependent flow fields, with the
//! log-Jacobian carried along each trajectory.

use std::sync::Arc;

use crate::error::{invalid, Result, ShapeError};
use crate::geometry::Vec2;
use crate::mesh::{TriMesh, TriangleLocator};
use crate::poisson::divergence;
use crate::recovery::quadratic_recovery;
use crate::tangent::TangentVector;

/// A velocity field that can be evaluated anywhere in its domain.
pub trait FlowField {
    fn velocity(&self, t: f64, x: Vec2) -> Result<Vec2>;
    fn divergence(&self, t: f64, x: Vec2) -> Result<f64>;
}

/// `α(x) = v`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub Vec2);

impl FlowField for ConstantField {
    fn velocity(&self, _: f64, _: Vec2) -> Result<Vec2> {
        Ok(self.0)
    }

    fn divergence(&self, _: f64, _: Vec2) -> Result<f64> {
        Ok(0.0)
    }
}

/// `α(x) = A x + b`.
#[derive(Debug, Clone, Copy)]
pub struct LinearField {
    pub matrix: [[f64; 2]; 2],
    pub offset: Vec2,
}

impl LinearField {
    pub fn scaling(s: f64) -> Self {
        Self {
            matrix: [[s, 0.0], [0.0, s]],
            offset: Vec2::ZERO,
        }
    }
}

impl FlowField for LinearField {
    fn velocity(&self, _: f64, x: Vec2) -> Result<Vec2> {
        let a = self.matrix;
        Ok(Vec2::new(a[0][0] * x.x + a[0][1] * x.y, a[1][0] * x.x + a[1][1] * x.y) + self.offset)
    }

    fn divergence(&self, _: f64, _: Vec2) -> Result<f64> {
        Ok(self.matrix[0][0] + self.matrix[1][1])
    }
}

/// A tangent vector frozen in time: nodal velocities and divergences
/// interpolated linearly inside each triangle.
#[derive(Debug)]
pub struct MeshFlow {
    mesh: Arc<TriMesh>,
    locator: TriangleLocator,
    velocity: Vec<Vec2>,
    divergence: Vec<f64>,
}

impl MeshFlow {
    pub fn new(mesh: Arc<TriMesh>, velocity: Vec<Vec2>, divergence: Vec<f64>) -> Result<Self> {
        if velocity.len() != mesh.vertex_count() || divergence.len() != mesh.vertex_count() {
            return Err(invalid(
                "one nodal velocity and divergence per vertex required",
            ));
        }
        Ok(Self {
            locator: mesh.locator(),
            mesh,
            velocity,
            divergence,
        })
    }

    /// Quadratic-fit gradients as velocity; the lumped weak divergence at
    /// interior vertices, with each boundary vertex taking the mean over its
    /// interior neighbours.
    pub fn from_tangent(alpha: &TangentVector) -> Self {
        let mesh = alpha.mesh.clone();
        let velocity = quadratic_recovery(&alpha.potential).gradients;
        let weak = divergence(&alpha.grad);
        let interior_mean = weak.interior_mean_std().0;
        let div = (0..mesh.vertex_count())
            .map(|v| {
                if weak.reliable[v] {
                    return weak.values[v];
                }
                let inner: Vec<f64> = mesh
                    .neighbours(v)
                    .into_iter()
                    .filter(|&w| weak.reliable[w])
                    .map(|w| weak.values[w])
                    .collect();
                if inner.is_empty() {
                    interior_mean
                } else {
                    inner.iter().sum::<f64>() / inner.len() as f64
                }
            })
            .collect();
        Self::new(mesh, velocity, div).expect("one value per vertex")
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn nodal_velocity(&self) -> &[Vec2] {
        &self.velocity
    }

    /// Velocity and divergence at `x`. Points outside the mesh are evaluated
    /// on the nearest triangle when they are within `h` of it.
    pub fn evaluate(&self, x: Vec2) -> Result<(Vec2, f64)> {
        let loc = self.locator.locate_or_nearest(x);
        if loc.distance > self.mesh.h() {
            return Err(ShapeError::OutOfDomain(format!(
                "({}, {}) is {:.3e} outside the mesh",
                x.x, x.y, loc.distance
            )));
        }
        let tri = self.mesh.triangles()[loc.triangle];
        let v = (0..3).fold(Vec2::ZERO, |acc, k| {
            acc + self.velocity[tri[k]] * loc.weights[k]
        });
        let d = (0..3)
            .map(|k| self.divergence[tri[k]] * loc.weights[k])
            .sum();
        Ok((v, d))
    }
}

impl FlowField for MeshFlow {
    fn velocity(&self, _: f64, x: Vec2) -> Result<Vec2> {
        Ok(self.evaluate(x)?.0)
    }

    fn divergence(&self, _: f64, x: Vec2) -> Result<f64> {
        Ok(self.evaluate(x)?.1)
    }
}

/// Snapshots at increasing times, blended linearly in between and held
/// constant outside the covered interval.
#[derive(Debug)]
pub struct PathFlow {
    times: Vec<f64>,
    snapshots: Vec<MeshFlow>,
}

impl PathFlow {
    pub fn new(times: Vec<f64>, snapshots: Vec<MeshFlow>) -> Result<Self> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(invalid("one snapshot per time required"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("snapshot times must increase"));
        }
        Ok(Self { times, snapshots })
    }

    fn evaluate(&self, t: f64, x: Vec2) -> Result<(Vec2, f64)> {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.snapshots[0].evaluate(x);
        }
        if t >= self.times[n - 1] {
            return self.snapshots[n - 1].evaluate(x);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let s = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        let (v0, d0) = self.snapshots[k].evaluate(x)?;
        if s == 0.0 {
            return Ok((v0, d0));
        }
        let (v1, d1) = self.snapshots[k + 1].evaluate(x)?;
        Ok((v0 * (1.0 - s) + v1 * s, d0 * (1.0 - s) + d1 * s))
    }
}

impl FlowField for PathFlow {
    fn velocity(&self, t: f64, x: Vec2) -> Result<Vec2> {
        Ok(self.evaluate(t, x)?.0)
    }

    fn divergence(&self, t: f64, x: Vec2) -> Result<f64> {
        Ok(self.evaluate(t, x)?.1)
    }
}

/// Advected points with `log det J` of the flow map at each.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    pub positions: Vec<Vec2>,
    pub log_det_j: Vec<f64>,
    /// `(t, positions)` after every step, starting with the initial state.
    pub history: Option<Vec<(f64, Vec<Vec2>)>>,
}

impl ParticleSet {
    pub fn new(positions: Vec<Vec2>) -> Self {
        let n = positions.len();
        Self {
            positions,
            log_det_j: vec![0.0; n],
            history: None,
        }
    }

    pub fn with_history(mut self) -> Self {
        self.history = Some(Vec::new());
        self
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Mean and population standard deviation of `log det J`.
    pub fn log_det_stats(&self) -> (f64, f64) {
        crate::poisson::mean_std(&self.log_det_j)
    }
}

/// Classical RK4 on `(x, log det J)` from `t0` to `t1`, with the step shrunk
/// so that it divides the interval.
pub fn integrate_flow(
    field: &dyn FlowField,
    mut particles: ParticleSet,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<ParticleSet> {
    if !(dt > 0.0) || !(t1 >= t0) {
        return Err(invalid(format!(
            "need dt > 0 and t1 >= t0, got dt={dt}, [{t0}, {t1}]"
        )));
    }
    let steps = ((t1 - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 {
        0.0
    } else {
        (t1 - t0) / steps as f64
    };
    if let Some(hist) = particles.history.as_mut() {
        if hist.is_empty() {
            hist.push((t0, particles.positions.clone()));
        }
    }
    let eval = |t: f64, x: Vec2| -> Result<(Vec2, f64)> {
        Ok((field.velocity(t, x)?, field.divergence(t, x)?))
    };
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        for (x, l) in particles
            .positions
            .iter_mut()
            .zip(particles.log_det_j.iter_mut())
        {
            let (v1, d1) = eval(t, *x)?;
            let (v2, d2) = eval(t + 0.5 * h, *x + v1 * (0.5 * h))?;
            let (v3, d3) = eval(t + 0.5 * h, *x + v2 * (0.5 * h))?;
            let (v4, d4) = eval(t + h, *x + v3 * h)?;
            *x += (v1 + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0);
            *l += (d1 + 2.0 * d2 + 2.0 * d3 + d4) * (h / 6.0);
        }
        if let Some(hist) = particles.history.as_mut() {
            hist.push((t + h, particles.positions.clone()));
        }
    }
    Ok(particles)
}

/// Largest distance of any recorded particle position from the chord joining
/// that particle's first and last positions.
pub fn chord_deviation(particles: &ParticleSet) -> f64 {
    let Some(hist) = particles.history.as_ref() else {
        return 0.0;
    };
    let (Some(first), Some(last)) = (hist.first(), hist.last()) else {
        return 0.0;
    };
    let mut worst: f64 = 0.0;
    for i in 0..particles.len() {
        let (a, b) = (first.1[i], last.1[i]);
        for (_, pos) in hist {
            worst = worst.max(crate::geometry::point_segment_distance(pos[i], a, b));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::Contour;
    use crate::mesh::triangulate;
    use crate::tangent::TangentSpace;
    use std::f64::consts::E;

    fn grid() -> Vec<Vec2> {
        (0..5)
            .flat_map(|i| {
                (0..5).map(move |j| Vec2::new(i as f64 * 0.1 - 0.2, j as f64 * 0.1 - 0.2))
            })
            .collect()
    }

    #[test]
    fn constant_field_translates_exactly() {
        let p = ParticleSet::new(grid());
        let out = integrate_flow(
            &ConstantField(Vec2::new(1.0, 0.0)),
            p.clone(),
            0.0,
            1.0,
            0.01,
        )
        .unwrap();
        for (a, b) in out.positions.iter().zip(&p.positions) {
            assert!(a.distance(*b + Vec2::new(1.0, 0.0)) < 1e-13);
        }
        assert!(out.log_det_j.iter().all(|&l| l == 0.0));
        let still = integrate_flow(&ConstantField(Vec2::ZERO), p.clone(), 0.0, 1.0, 0.1).unwrap();
        assert_eq!(still.positions, p.positions);
    }

    #[test]
    fn identity_field_scales_by_e() {
        let p = ParticleSet::new(grid());
        let out = integrate_flow(&LinearField::scaling(1.0), p.clone(), 0.0, 1.0, 0.01).unwrap();
        for (a, b) in out.positions.iter().zip(&p.positions) {
            assert!(a.distance(*b * E) <= 1e-5 * (1.0 + b.norm()));
        }
        assert!(out.log_det_j.iter().all(|&l| (l - 2.0).abs() < 1e-12));
    }

    #[test]
    fn mesh_flow_of_scale_lift() {
        let c = Contour::circle(128, 1.0).unwrap();
        let ts = TangentSpace::new(c, 0.1).unwrap();
        let a = crate::contour::BoundaryScalarField::new(vec![1.0; 128]);
        let flow = MeshFlow::from_tangent(&ts.lift(&a).unwrap());
        let (v, d) = flow.evaluate(Vec2::new(0.3, -0.2)).unwrap();
        assert!(v.distance(Vec2::new(0.3, -0.2)) < 0.02);
        assert!((d - 2.0).abs() < 1e-3);
        assert!(matches!(
            flow.evaluate(Vec2::new(3.0, 0.0)),
            Err(ShapeError::OutOfDomain(_))
        ));
    }

    #[test]
    fn path_flow_blends_in_time() {
        let m = Arc::new(triangulate(&Contour::circle(64, 1.0).unwrap(), 0.2).unwrap());
        let nv = m.vertex_count();
        let f0 = MeshFlow::new(m.clone(), vec![Vec2::new(1.0, 0.0); nv], vec![0.0; nv]).unwrap();
        let f1 = MeshFlow::new(m.clone(), vec![Vec2::new(0.0, 1.0); nv], vec![1.0; nv]).unwrap();
        let path = PathFlow::new(vec![0.0, 1.0], vec![f0, f1]).unwrap();
        let v = path.velocity(0.25, Vec2::ZERO).unwrap();
        assert!(v.distance(Vec2::new(0.75, 0.25)) < 1e-14);
        assert!((path.divergence(0.25, Vec2::ZERO).unwrap() - 0.25).abs() < 1e-14);
        assert!(PathFlow::new(vec![1.0, 0.0], vec![]).is_err());
    }

    #[test]
    fn straight_trajectories_have_no_chord_deviation() {
        let p = ParticleSet::new(grid()).with_history();
        let out = integrate_flow(&LinearField::scaling(0.5), p, 0.0, 1.0, 0.05).unwrap();
        assert!(chord_deviation(&out) < 1e-12);
        let rot = LinearField {
            matrix: [[0.0, -1.0], [1.0, 0.0]],
            offset: Vec2::ZERO,
        };
        let out = integrate_flow(
            &rot,
            ParticleSet::new(grid()).with_history(),
            0.0,
            1.0,
            0.05,
        )
        .unwrap();
        assert!(chord_deviation(&out) > 0.01);
    }
}
