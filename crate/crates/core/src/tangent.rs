//! Tangent vectors of the shape manifold: gradients of potentials whose
//! Laplacian is constant on the shape.
//!
//! [`TangentSpace`] bundles a contour, its mesh and the cached solver so that
//! repeated lifts and projections on one shape share factorizations. The free
//! functions are one-shot conveniences over it.

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::contour::{BoundaryScalarField, Contour};
use crate::error::{invalid, Result, ShapeError};
use crate::geometry::Vec2;
use crate::mesh::{triangulate, TriMesh};
use crate::poisson::{
    divergence, gradient, inner_product, ot_norm, same_mesh, PoissonSolver, ScalarField,
    VectorField,
};
use crate::recovery::quadratic_recovery;

/// A potential with constant weak Laplacian and its gradient.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub mesh: Arc<TriMesh>,
    pub potential: ScalarField,
    pub grad: VectorField,
    pub div_constant: f64,
}

impl TangentVector {
    fn from_potential(potential: ScalarField, div_constant: f64) -> Self {
        let grad = gradient(&potential);
        Self {
            mesh: potential.mesh().clone(),
            potential,
            grad,
            div_constant,
        }
    }

    pub fn zero(mesh: Arc<TriMesh>) -> Self {
        Self::from_potential(ScalarField::zeros(mesh), 0.0)
    }

    /// `√⟨α, α⟩`.
    pub fn norm(&self) -> f64 {
        ot_norm(&self.grad)
    }

    /// Population standard deviation of the weak divergence over interior
    /// vertices.
    pub fn divergence_spread(&self) -> f64 {
        divergence(&self.grad).interior_mean_std().1
    }

    /// Whether the recovered divergence is constant within `5%·|S| + 1e-6`.
    pub fn has_constant_divergence(&self) -> bool {
        self.divergence_spread() <= 0.05 * self.div_constant.abs() + 1e-6
    }

    /// Rows `vertex,x,y,boundary,u,S`, with `S` the divergence constant
    /// repeated on every row.
    pub fn potential_csv(&self) -> String {
        let mut s = String::from("vertex,x,y,boundary,u,S\n");
        for (v, (p, u)) in self
            .mesh
            .vertices()
            .iter()
            .zip(self.potential.values())
            .enumerate()
        {
            let b = u8::from(self.mesh.is_boundary(v));
            s.push_str(&format!(
                "{v},{:?},{:?},{b},{:?},{:?}\n",
                p.x, p.y, u, self.div_constant
            ));
        }
        s
    }

    /// Rows `triangle,gx,gy` for the gradient.
    pub fn gradient_csv(&self) -> String {
        let mut s = String::from("triangle,cx,cy,gx,gy\n");
        for (t, g) in self.grad.vectors().iter().enumerate() {
            let c = self.mesh.centroid(t);
            s.push_str(&format!("{t},{:?},{:?},{:?},{:?}\n", c.x, c.y, g.x, g.y));
        }
        s
    }
}

/// `α = v_trans + λ·α_scale + α_def`.
#[derive(Debug, Clone)]
pub struct TangentDecomposition {
    pub v_trans: Vec2,
    pub lambda_scale: f64,
    pub alpha_def: VectorField,
    pub norms: ComponentNorms,
    /// Normalized pairwise inner products, see [`Orthogonality`].
    pub orthogonality: Orthogonality,
    /// OT norm of `α - (v_trans + λ·α_scale + α_def)`.
    pub reconstruction_error: f64,
}

/// OT norms of the translation, scale and deformation components.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComponentNorms {
    pub translation: f64,
    pub scale: f64,
    pub deformation: f64,
    pub total: f64,
}

/// `|⟨a, b⟩| / ‖α‖²` for each pair of components, 0 for the zero field.
/// The total energy is the denominator because a component may vanish up to
/// roundoff, which makes a per-pair cosine meaningless.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Orthogonality {
    pub translation_scale: f64,
    pub translation_deformation: f64,
    pub scale_deformation: f64,
}

impl Orthogonality {
    pub fn max(&self) -> f64 {
        self.translation_scale
            .max(self.translation_deformation)
            .max(self.scale_deformation)
    }
}

#[derive(Serialize)]
struct DecompositionReport<'a> {
    v_trans: [f64; 2],
    lambda: f64,
    norms: &'a ComponentNorms,
    orthogonality: &'a Orthogonality,
    reconstruction_error: f64,
}

impl TangentDecomposition {
    pub fn to_json(&self) -> String {
        let report = DecompositionReport {
            v_trans: self.v_trans.into(),
            lambda: self.lambda_scale,
            norms: &self.norms,
            orthogonality: &self.orthogonality,
            reconstruction_error: self.reconstruction_error,
        };
        serde_json::to_string_pretty(&report).expect("report serializes")
    }
}

/// A contour, its mesh and the cached operators of the tangent space there.
#[derive(Debug)]
pub struct TangentSpace {
    contour: Contour,
    solver: PoissonSolver,
    scale: OnceLock<Result<TangentVector>>,
}

impl TangentSpace {
    pub fn new(contour: Contour, h: f64) -> Result<Self> {
        let mesh = Arc::new(triangulate(&contour, h)?);
        Ok(Self::from_mesh(contour, mesh))
    }

    /// `mesh` must have been built on `contour`.
    pub fn with_mesh(contour: Contour, mesh: Arc<TriMesh>) -> Result<Self> {
        if !mesh.matches_contour(&contour) {
            return Err(invalid("mesh boundary does not match the contour"));
        }
        Ok(Self::from_mesh(contour, mesh))
    }

    fn from_mesh(contour: Contour, mesh: Arc<TriMesh>) -> Self {
        Self {
            contour,
            solver: PoissonSolver::new(mesh),
            scale: OnceLock::new(),
        }
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        self.solver.mesh()
    }

    pub fn solver(&self) -> &PoissonSolver {
        &self.solver
    }

    /// Constant-divergence field whose normal boundary component is `a`.
    pub fn lift(&self, a: &BoundaryScalarField) -> Result<TangentVector> {
        let s = self.contour.boundary_integral(a)? / self.contour.area();
        let u = self.solver.solve_neumann(a, s)?;
        Ok(TangentVector::from_potential(u, s))
    }

    /// Normal component of `alpha` at each contour sample.
    pub fn delift(&self, alpha: &TangentVector) -> Result<BoundaryScalarField> {
        same_mesh(self.mesh(), &alpha.mesh)?;
        delift_on(&self.contour, alpha)
    }

    /// `Δu_scale = 1`, `u_scale = 0` on the boundary.
    pub fn scale_component(&self) -> Result<&TangentVector> {
        self.scale
            .get_or_init(|| {
                let u = self.solver.solve_dirichlet(1.0)?;
                Ok(TangentVector::from_potential(u, 1.0))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn decompose(&self, alpha: &TangentVector) -> Result<TangentDecomposition> {
        let mesh = self.mesh();
        same_mesh(mesh, &alpha.mesh)?;
        let scale = self.scale_component()?;
        let lambda = alpha.div_constant;
        let v_trans = alpha.grad.mean() - scale.grad.mean() * lambda;
        let trans = VectorField::constant(mesh.clone(), v_trans);
        let scaled = VectorField::constant(mesh.clone(), Vec2::ZERO).axpy(lambda, &scale.grad)?;
        let alpha_def = alpha.grad.axpy(-1.0, &trans)?.axpy(-1.0, &scaled)?;

        let recon = trans
            .axpy(1.0, &scaled)?
            .axpy(1.0, &alpha_def)?
            .axpy(-1.0, &alpha.grad)?;
        let norms = ComponentNorms {
            translation: ot_norm(&trans),
            scale: ot_norm(&scaled),
            deformation: ot_norm(&alpha_def),
            total: alpha.norm(),
        };
        let energy = norms.total * norms.total;
        let rel = |a: &VectorField, b: &VectorField| -> Result<f64> {
            Ok(if energy > 0.0 {
                inner_product(mesh, a, b)?.abs() / energy
            } else {
                0.0
            })
        };
        let orthogonality = Orthogonality {
            translation_scale: rel(&trans, &scaled)?,
            translation_deformation: rel(&trans, &alpha_def)?,
            scale_deformation: rel(&scaled, &alpha_def)?,
        };
        Ok(TangentDecomposition {
            v_trans,
            lambda_scale: lambda,
            alpha_def,
            norms,
            orthogonality,
            reconstruction_error: ot_norm(&recon),
        })
    }

    /// `û = u - u_⊥ + λ·u_scale`, shifted to zero mean.
    pub fn project(&self, u: &ScalarField) -> Result<TangentVector> {
        same_mesh(self.mesh(), u.mesh())?;
        let scale = self.scale_component()?;
        let u_perp = self.solver.solve_dirichlet_field(u)?;
        let ss = self.solver.energy(&scale.potential, &scale.potential)?;
        if !(ss > 0.0) {
            return Err(ShapeError::Internal(
                "scale component has zero energy".into(),
            ));
        }
        let lambda = self.solver.energy(&u_perp, &scale.potential)? / ss;
        let projected = u.axpy(-1.0, &u_perp)?.axpy(lambda, &scale.potential)?;
        let mean = projected.mean();
        Ok(TangentVector::from_potential(
            projected.shifted(-mean),
            lambda,
        ))
    }

    /// Lifts of [`battery_fields`] on this contour.
    pub fn battery(&self) -> Result<Vec<(&'static str, TangentVector)>> {
        battery_fields(self.contour.len())
            .into_iter()
            .map(|(name, a)| Ok((name, self.lift(&a)?)))
            .collect()
    }
}

/// Boundary fields `1, cos θ, sin θ, cos 2θ, sin 2θ, cos 3θ` at `θ_i = 2πi/n`.
pub fn battery_fields(n: usize) -> Vec<(&'static str, BoundaryScalarField)> {
    let theta: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let field =
        |f: &dyn Fn(f64) -> f64| BoundaryScalarField::new(theta.iter().map(|&t| f(t)).collect());
    vec![
        ("1", field(&|_| 1.0)),
        ("cos1", field(&f64::cos)),
        ("sin1", field(&f64::sin)),
        ("cos2", field(&|t| (2.0 * t).cos())),
        ("sin2", field(&|t| (2.0 * t).sin())),
        ("cos3", field(&|t| (3.0 * t).cos())),
    ]
}

fn delift_on(c: &Contour, alpha: &TangentVector) -> Result<BoundaryScalarField> {
    if !alpha.mesh.matches_contour(c) {
        return Err(invalid("tangent vector was not built on this contour"));
    }
    let nodal = quadratic_recovery(&alpha.potential).gradients;
    let normals = c.normal_field()?;
    Ok(BoundaryScalarField::new(
        normals
            .vectors
            .iter()
            .enumerate()
            .map(|(s, n)| nodal[alpha.mesh.boundary_vertex(s)].dot(*n))
            .collect(),
    ))
}

pub fn lift(c: &Contour, a: &BoundaryScalarField, h: f64) -> Result<TangentVector> {
    if a.len() != c.len() {
        return Err(invalid(format!(
            "{} boundary values for {} samples",
            a.len(),
            c.len()
        )));
    }
    TangentSpace::new(c.clone(), h)?.lift(a)
}

pub fn delift(c: &Contour, alpha: &TangentVector) -> Result<BoundaryScalarField> {
    delift_on(c, alpha)
}

pub fn scale_component(c: &Contour, h: f64) -> Result<TangentVector> {
    TangentSpace::new(c.clone(), h)?.scale_component().cloned()
}

pub fn decompose(c: &Contour, alpha: &TangentVector) -> Result<TangentDecomposition> {
    TangentSpace::with_mesh(c.clone(), alpha.mesh.clone())?.decompose(alpha)
}

pub fn project_to_stan(c: &Contour, u: &ScalarField) -> Result<TangentVector> {
    TangentSpace::with_mesh(c.clone(), u.mesh().clone())?.project(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::inner_product;

    fn disk_space(h: f64) -> TangentSpace {
        TangentSpace::new(Contour::circle(256, 1.0).unwrap(), h).unwrap()
    }

    fn field(name: &str, n: usize) -> BoundaryScalarField {
        battery_fields(n)
            .into_iter()
            .find(|(k, _)| *k == name)
            .unwrap()
            .1
    }

    fn distance(a: &VectorField, b: &VectorField) -> f64 {
        ot_norm(&a.axpy(-1.0, b).unwrap())
    }

    #[test]
    fn lift_of_constant_is_identity_field() {
        let ts = disk_space(0.05);
        let alpha = ts.lift(&field("1", 256)).unwrap();
        assert!((alpha.div_constant - 2.0).abs() < 1e-3);
        let id = VectorField::from_centroids(ts.mesh().clone(), |p| p);
        assert!(distance(&alpha.grad, &id) < 0.01 * ot_norm(&id));
        assert!(alpha.has_constant_divergence());
    }

    #[test]
    fn lift_of_cosine_is_translation() {
        let ts = disk_space(0.05);
        let alpha = ts.lift(&field("cos1", 256)).unwrap();
        assert!(alpha.div_constant.abs() < 1e-12);
        let ex = VectorField::constant(ts.mesh().clone(), Vec2::new(1.0, 0.0));
        assert!(distance(&alpha.grad, &ex) < 0.01);
        let zero = ts.lift(&BoundaryScalarField::zeros(256)).unwrap();
        assert!(zero.norm() < 1e-14 && zero.div_constant == 0.0);
    }

    #[test]
    fn delift_round_trip_and_constant_field() {
        let ts = disk_space(0.05);
        for name in ["1", "cos1", "cos3"] {
            let a = field(name, 256);
            let back = ts.delift(&ts.lift(&a).unwrap()).unwrap();
            let err = back
                .values
                .iter()
                .zip(&a.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(err <= 0.05 * a.max_abs() + 1e-6, "{name}: {err}");
        }
        let m = ts.mesh().clone();
        let ex = TangentVector::from_potential(ScalarField::interpolate(m.clone(), |p| p.x), 0.0);
        let d = ts.delift(&ex).unwrap();
        let cos = field("cos1", 256);
        assert!(d
            .values
            .iter()
            .zip(&cos.values)
            .all(|(x, y)| (x - y).abs() < 1e-3));
        assert_eq!(ts.delift(&TangentVector::zero(m)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn delift_rejects_foreign_contour() {
        let ts = disk_space(0.1);
        let alpha = ts.lift(&field("cos1", 256)).unwrap();
        let other = Contour::circle(256, 1.1).unwrap();
        assert!(matches!(
            delift(&other, &alpha),
            Err(ShapeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn scale_component_on_disk() {
        let ts = disk_space(0.05);
        let s = ts.scale_component().unwrap();
        let half_x = VectorField::from_centroids(ts.mesh().clone(), |p| p * 0.5);
        assert!(distance(&s.grad, &half_x) < 0.01 * ot_norm(&half_x));
        let n2 = s.norm().powi(2);
        assert!((n2 - 0.125).abs() < 0.01 * 0.125);
        let t = ts.lift(&field("cos1", 256)).unwrap();
        let ip = inner_product(ts.mesh(), &s.grad, &t.grad).unwrap();
        assert!(ip.abs() <= 1e-3 * s.norm() * t.norm());
    }

    #[test]
    fn decomposition_of_pure_modes() {
        let ts = disk_space(0.05);
        let d = ts.decompose(&ts.lift(&field("1", 256)).unwrap()).unwrap();
        assert!(d.v_trans.norm() < 1e-10 && (d.lambda_scale - 2.0).abs() < 1e-3);
        assert!(d.norms.deformation < 0.01 * d.norms.total);

        let d = ts
            .decompose(&ts.lift(&field("cos1", 256)).unwrap())
            .unwrap();
        assert!(d.v_trans.distance(Vec2::new(1.0, 0.0)) < 0.01 && d.lambda_scale.abs() < 1e-12);
        assert!(d.norms.deformation < 0.01 * d.norms.total);

        let d = ts
            .decompose(&ts.lift(&field("cos2", 256)).unwrap())
            .unwrap();
        assert!(d.v_trans.norm() < 1e-6 && d.lambda_scale.abs() < 1e-12);
        assert!((d.norms.deformation - d.norms.total).abs() < 1e-6 * d.norms.total);
    }

    #[test]
    fn decomposition_invariants_on_battery() {
        let c = Contour::from_polar(128, |t| 1.0 + 0.25 * (2.0 * t).sin() + 0.1 * t.cos()).unwrap();
        let ts = TangentSpace::new(c, 0.08).unwrap();
        for (name, alpha) in ts.battery().unwrap() {
            let d = ts.decompose(&alpha).unwrap();
            assert!(
                d.reconstruction_error <= 1e-8 * (1.0 + d.norms.total),
                "{name}"
            );
            assert!(
                d.orthogonality.max() <= 1e-6,
                "{name}: {:?}",
                d.orthogonality
            );
        }
    }

    #[test]
    fn projection_fixes_range_and_is_idempotent() {
        let ts = disk_space(0.08);
        let m = ts.mesh().clone();
        let x = ScalarField::interpolate(m.clone(), |p| p.x);
        let px = ts.project(&x).unwrap();
        let gx = gradient(&x);
        assert!(distance(&px.grad, &gx) <= 1e-3 * ot_norm(&gx));

        let quartic = ScalarField::interpolate(m.clone(), |p| p.norm_sq().powi(2));
        let p1 = ts.project(&quartic).unwrap();
        let p2 = ts.project(&p1.potential).unwrap();
        assert!(distance(&p1.grad, &p2.grad) <= 1e-8);
        assert!(p1.has_constant_divergence());

        let residual = gradient(&quartic).axpy(-1.0, &p1.grad).unwrap();
        for (name, w) in ts.battery().unwrap() {
            let ip = inner_product(&m, &residual, &w.grad).unwrap();
            assert!(ip.abs() <= 1e-3 * ot_norm(&residual) * w.norm(), "{name}");
        }
    }

    #[test]
    fn projection_is_self_adjoint_on_lifts() {
        let ts = disk_space(0.08);
        let m = ts.mesh().clone();
        let u =
            ScalarField::interpolate(m.clone(), |p| p.x.powi(3) - 0.5 * p.x * p.y + p.y.powi(4));
        let pu = ts.project(&u).unwrap();
        for (name, w) in ts.battery().unwrap() {
            let pw = ts.project(&w.potential).unwrap();
            let lhs = inner_product(&m, &pu.grad, &w.grad).unwrap();
            let rhs = inner_product(&m, &gradient(&u), &pw.grad).unwrap();
            assert!((lhs - rhs).abs() <= 1e-3 * pu.norm() * w.norm(), "{name}");
        }
    }
}
