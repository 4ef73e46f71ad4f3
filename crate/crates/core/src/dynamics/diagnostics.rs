//! Checks along shape paths: the continuity equation, density uniformity of
//! the induced flow and the Hessian departure of a tangent field.

use crate::error::Result;
use crate::geometry::Vec2;
use crate::mesh::TriMesh;
use crate::poisson::{mean_std, VectorField};
use crate::recovery::{hessian_frobenius, quadratic_recovery};
use crate::tangent::TangentVector;

use super::flow::{integrate_flow, MeshFlow, ParticleSet, PathFlow};
use super::geodesic::GeodesicPath;

/// `Σ c·x^a·y^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(f64, u32, u32)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Self { terms }
    }

    pub fn monomial(a: u32, b: u32) -> Self {
        Self {
            terms: vec![(1.0, a, b)],
        }
    }

    /// `x^a y^b` for every `a + b <= degree`, ordered by degree.
    pub fn monomials(degree: u32) -> Vec<Polynomial> {
        (0..=degree)
            .flat_map(|d| (0..=d).rev().map(move |a| Polynomial::monomial(a, d - a)))
            .collect()
    }

    /// `‖x‖²`.
    pub fn norm_sq() -> Self {
        Self {
            terms: vec![(1.0, 2, 0), (1.0, 0, 2)],
        }
    }

    pub fn value(&self, p: Vec2) -> f64 {
        self.terms
            .iter()
            .map(|&(c, a, b)| c * p.x.powi(a as i32) * p.y.powi(b as i32))
            .sum()
    }

    pub fn gradient(&self, p: Vec2) -> Vec2 {
        self.terms.iter().fold(Vec2::ZERO, |acc, &(c, a, b)| {
            let dx = if a == 0 {
                0.0
            } else {
                c * a as f64 * p.x.powi(a as i32 - 1) * p.y.powi(b as i32)
            };
            let dy = if b == 0 {
                0.0
            } else {
                c * b as f64 * p.x.powi(a as i32) * p.y.powi(b as i32 - 1)
            };
            acc + Vec2::new(dx, dy)
        })
    }

    pub fn label(&self) -> String {
        self.terms
            .iter()
            .map(|&(c, a, b)| format!("{c}*x^{a}*y^{b}"))
            .collect::<Vec<_>>()
            .join("+")
    }
}

// Seven-point rule, exact for polynomials of degree 5 on a triangle.
fn quadrature() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let (b1, b2) = ((6.0 + s15) / 21.0, (6.0 - s15) / 21.0);
    let (a1, a2) = (1.0 - 2.0 * b1, 1.0 - 2.0 * b2);
    let (w1, w2) = ((155.0 + s15) / 1200.0, (155.0 - s15) / 1200.0);
    [
        ([1.0 / 3.0; 3], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

/// `∫ f dμ` over the mesh, with `μ` the normalized area measure.
pub fn mesh_average(mesh: &TriMesh, f: impl Fn(usize, Vec2) -> f64) -> f64 {
    let rule = quadrature();
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = tri.map(|i| mesh.vertices()[i]);
        let s: f64 = rule
            .iter()
            .map(|(l, w)| w * f(t, a * l[0] + b * l[1] + c * l[2]))
            .sum();
        acc += s * mesh.triangle_area(t);
    }
    acc / mesh.total_area()
}

/// Both sides of `d/dt ∫φ dμ_t = ∫⟨∇φ, α_t⟩ dμ_t` for one test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityEntry {
    pub lhs: f64,
    pub rhs: f64,
    /// Cauchy-Schwarz bound `‖∇φ‖·‖α_t‖` on the right side.
    pub scale: f64,
}

impl ContinuityEntry {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// Residual over `max(|lhs|, scale)`; the absolute residual when the
    /// right side vanishes identically.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual() / self.lhs.abs().max(self.scale)
        } else {
            self.residual()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityStep {
    pub step: usize,
    pub t: f64,
    pub entries: Vec<ContinuityEntry>,
}

impl ContinuityStep {
    pub fn max_relative(&self) -> f64 {
        self.entries
            .iter()
            .map(ContinuityEntry::relative)
            .fold(0.0, f64::max)
    }
}

/// Continuity residuals at every interior time of the path, one entry per
/// test polynomial. The time derivative is a centered difference of the mesh
/// quadrature of `∫φ dμ_t`.
pub fn verify_continuity(path: &GeodesicPath, tests: &[Polynomial]) -> Vec<ContinuityStep> {
    let n = path.times.len();
    if n < 3 {
        return Vec::new();
    }
    let moments: Vec<Vec<f64>> = path
        .potentials
        .iter()
        .map(|a| {
            tests
                .iter()
                .map(|phi| mesh_average(&a.mesh, |_, p| phi.value(p)))
                .collect()
        })
        .collect();
    (1..n - 1)
        .map(|k| {
            let alpha = &path.potentials[k];
            let grads = alpha.grad.vectors();
            let alpha_norm = alpha.norm();
            let span = path.times[k + 1] - path.times[k - 1];
            let entries = tests
                .iter()
                .enumerate()
                .map(|(j, phi)| {
                    let lhs = (moments[k + 1][j] - moments[k - 1][j]) / span;
                    let rhs = mesh_average(&alpha.mesh, |t, p| phi.gradient(p).dot(grads[t]));
                    let grad_norm =
                        mesh_average(&alpha.mesh, |_, p| phi.gradient(p).norm_sq()).sqrt();
                    ContinuityEntry {
                        lhs,
                        rhs,
                        scale: grad_norm * alpha_norm,
                    }
                })
                .collect();
            ContinuityStep {
                step: k,
                t: path.times[k],
                entries,
            }
        })
        .collect()
}

/// Up to `n` interior vertices of `mesh`, evenly strided in index order.
pub fn seed_particles(mesh: &TriMesh, n: usize) -> Vec<Vec2> {
    let interior: Vec<Vec2> = (0..mesh.vertex_count())
        .filter(|&v| !mesh.is_boundary(v))
        .map(|v| mesh.vertices()[v])
        .collect();
    if n >= interior.len() {
        return interior;
    }
    (0..n).map(|k| interior[k * interior.len() / n]).collect()
}

/// Per-time statistics of `log det J` over particles advected along a path.
#[derive(Debug, Clone)]
pub struct UniformityReport {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Final particle state with its full trajectory history.
    pub particles: ParticleSet,
}

impl UniformityReport {
    pub fn max_std(&self) -> f64 {
        self.std.iter().copied().fold(0.0, f64::max)
    }
}

/// The flow of a path's fields, linear in time between stored steps.
pub fn path_flow(path: &GeodesicPath) -> Result<PathFlow> {
    PathFlow::new(
        path.times.clone(),
        path.potentials.iter().map(MeshFlow::from_tangent).collect(),
    )
}

/// Seeds particles at interior vertices of the initial mesh and advects them
/// with RK4, one step per stored interval.
pub fn density_uniformity(path: &GeodesicPath, n_particles: usize) -> Result<UniformityReport> {
    let flow = path_flow(path)?;
    let mut particles =
        ParticleSet::new(seed_particles(&path.potentials[0].mesh, n_particles)).with_history();
    let (m0, s0) = particles.log_det_stats();
    let (mut mean, mut std) = (vec![m0], vec![s0]);
    for w in path.times.windows(2) {
        particles = integrate_flow(&flow, particles, w[0], w[1], w[1] - w[0])?;
        let (m, s) = particles.log_det_stats();
        mean.push(m);
        std.push(s);
    }
    Ok(UniformityReport {
        times: path.times.clone(),
        mean,
        std,
        particles,
    })
}

/// Mean and standard deviation of the recovered Hessian Frobenius norm over
/// interior vertices.
pub fn hessian_stats(alpha: &TangentVector) -> (f64, f64) {
    let rec = quadratic_recovery(&alpha.potential);
    let m = &alpha.mesh;
    let vals: Vec<f64> = (0..m.vertex_count())
        .filter(|&v| !m.is_boundary(v))
        .map(|v| hessian_frobenius(rec.hessians[v]))
        .collect();
    mean_std(&vals)
}

/// Spatial standard deviation of the Hessian Frobenius norm; zero when
/// straight-line transport along `α` keeps the density uniform.
pub fn hessian_departure(alpha: &TangentVector) -> f64 {
    hessian_stats(alpha).1
}

/// `∫ ⟨∇φ, α⟩ dμ` with exact quadrature of the polynomial gradient.
pub fn transport_rate(alpha: &VectorField, phi: &Polynomial) -> f64 {
    let g = alpha.vectors();
    mesh_average(alpha.mesh(), |t, p| phi.gradient(p).dot(g[t]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::Contour;
    use crate::mesh::triangulate;

    #[test]
    fn polynomial_values_and_gradients() {
        let p = Polynomial::new(vec![(2.0, 2, 1), (-1.0, 0, 3), (0.5, 0, 0)]);
        let x = Vec2::new(0.3, -0.7);
        assert!((p.value(x) - (2.0 * 0.09 * -0.7 + 0.343 + 0.5)).abs() < 1e-15);
        let g = p.gradient(x);
        assert!((g.x - 4.0 * 0.3 * -0.7).abs() < 1e-15);
        assert!((g.y - (2.0 * 0.09 - 3.0 * 0.49)).abs() < 1e-15);
        assert_eq!(Polynomial::monomials(3).len(), 10);
    }

    #[test]
    fn quadrature_reproduces_square_moments() {
        let pts = (0..64)
            .map(|i| {
                let s = i as f64 / 16.0;
                match i / 16 {
                    0 => Vec2::new(s, 0.0),
                    1 => Vec2::new(1.0, s - 1.0),
                    2 => Vec2::new(3.0 - s, 1.0),
                    _ => Vec2::new(0.0, 4.0 - s),
                }
            })
            .collect();
        let m = triangulate(&Contour::new(pts).unwrap(), 0.1).unwrap();
        // ∫ x^a y^b over the unit square is 1/((a+1)(b+1))
        for (a, b) in [(0, 0), (1, 0), (2, 1), (3, 2), (5, 0)] {
            let avg = mesh_average(&m, |_, p| p.x.powi(a) * p.y.powi(b));
            let exact = 1.0 / ((a + 1) * (b + 1)) as f64;
            assert!((avg - exact).abs() < 1e-12, "x^{a} y^{b}: {avg} vs {exact}");
        }
    }

    #[test]
    fn seeding_is_strided_and_interior() {
        let m = triangulate(&Contour::circle(64, 1.0).unwrap(), 0.15).unwrap();
        let all = seed_particles(&m, usize::MAX);
        let some = seed_particles(&m, 10);
        assert_eq!(some.len(), 10);
        assert!(some.iter().all(|p| all.contains(p)));
        assert!(all.iter().all(|p| p.norm() < 1.0 - 0.01));
    }
}
