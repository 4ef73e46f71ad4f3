//! P1 finite elements on a [`TriMesh`]: the pure Neumann problem with a mean
//! constraint, the homogeneous Dirichlet problem, gradients, the weak
//! divergence and the optimal-transport inner product.
//!
//! Discrete conventions used throughout:
//! - `K` is the stiffness matrix, `(Ku)_i = ∫ ∇u·∇φ_i`.
//! - `m_i = ∫ φ_i` is the consistent load of a unit source (a third of the
//!   incident triangle area), also used as the lumped mass.
//! - A potential has weak Laplacian `c` at interior vertex `i` when
//!   `(Ku)_i = -c m_i`.

use std::sync::{Arc, OnceLock};

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Side};

use crate::contour::BoundaryScalarField;
use crate::error::{invalid, Result, ShapeError};
use crate::geometry::Vec2;
use crate::mesh::TriMesh;

type Llt = faer::sparse::linalg::solvers::Llt<usize, f64>;
type Lu = faer::sparse::linalg::solvers::Lu<usize, f64>;

/// Relative residual accepted after a direct solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Nodal P1 field.
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
}

/// Piecewise-constant vector field, one vector per triangle.
#[derive(Debug, Clone)]
pub struct VectorField {
    mesh: Arc<TriMesh>,
    vectors: Vec<Vec2>,
}

/// Weak divergence per vertex. Values at boundary vertices include the
/// boundary flux and are flagged unreliable.
#[derive(Debug, Clone)]
pub struct DivergenceField {
    pub values: Vec<f64>,
    pub reliable: Vec<bool>,
}

impl DivergenceField {
    pub fn interior_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.reliable)
            .filter(|(_, &r)| r)
            .map(|(&v, _)| v)
    }

    /// Mean and population standard deviation over interior vertices.
    pub fn interior_mean_std(&self) -> (f64, f64) {
        let vals: Vec<f64> = self.interior_values().collect();
        mean_std(&vals)
    }
}

pub(crate) fn mean_std(vals: &[f64]) -> (f64, f64) {
    if vals.is_empty() {
        return (0.0, 0.0);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl ScalarField {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.vertex_count() {
            return Err(invalid(format!(
                "{} nodal values for {} vertices",
                values.len(),
                mesh.vertex_count()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<TriMesh>) -> Self {
        let n = mesh.vertex_count();
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<TriMesh>, f: impl Fn(Vec2) -> f64) -> Self {
        let values = mesh.vertices().iter().map(|&p| f(p)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Mass-weighted mean.
    pub fn mean(&self) -> f64 {
        let m = self.mesh.lumped_mass();
        let total: f64 = m.iter().sum();
        m.iter().zip(&self.values).map(|(w, v)| w * v).sum::<f64>() / total
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Result<ScalarField> {
        same_mesh(&self.mesh, &other.mesh)?;
        Ok(ScalarField {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    pub fn shifted(&self, c: f64) -> ScalarField {
        ScalarField {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

impl VectorField {
    pub fn new(mesh: Arc<TriMesh>, vectors: Vec<Vec2>) -> Result<Self> {
        if vectors.len() != mesh.triangle_count() {
            return Err(invalid(format!(
                "{} vectors for {} triangles",
                vectors.len(),
                mesh.triangle_count()
            )));
        }
        Ok(Self { mesh, vectors })
    }

    pub fn constant(mesh: Arc<TriMesh>, v: Vec2) -> Self {
        let n = mesh.triangle_count();
        Self {
            mesh,
            vectors: vec![v; n],
        }
    }

    /// Samples `f` at triangle centroids.
    pub fn from_centroids(mesh: Arc<TriMesh>, f: impl Fn(Vec2) -> Vec2) -> Self {
        let vectors = (0..mesh.triangle_count())
            .map(|t| f(mesh.centroid(t)))
            .collect();
        Self { mesh, vectors }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn vectors(&self) -> &[Vec2] {
        &self.vectors
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &VectorField) -> Result<VectorField> {
        same_mesh(&self.mesh, &other.mesh)?;
        Ok(VectorField {
            mesh: self.mesh.clone(),
            vectors: self
                .vectors
                .iter()
                .zip(&other.vectors)
                .map(|(&a, &b)| a + b * s)
                .collect(),
        })
    }

    /// Mean of the field under the normalized area measure.
    pub fn mean(&self) -> Vec2 {
        let m = &self.mesh;
        let mut acc = Vec2::ZERO;
        for (t, v) in self.vectors.iter().enumerate() {
            acc += *v * m.triangle_area(t);
        }
        acc / m.total_area()
    }
}

pub(crate) fn same_mesh(a: &Arc<TriMesh>, b: &Arc<TriMesh>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(invalid("fields live on different meshes"))
    }
}

/// Compressed sparse row matrix, rows with sorted column indices.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            self.row(i).all(|(j, v)| {
                self.row(j)
                    .find(|&(k, _)| k == i)
                    .is_some_and(|(_, w)| (v - w).abs() <= tol)
            })
        })
    }
}

/// P1 stiffness matrix.
pub fn assemble_stiffness(mesh: &TriMesh) -> CsrMatrix {
    let mut entries = Vec::with_capacity(9 * mesh.triangle_count());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let grads = mesh.hat_gradients(t);
        let area = mesh.triangle_area(t);
        for a in 0..3 {
            for b in 0..3 {
                entries.push((tri[a], tri[b], area * grads[a].dot(grads[b])));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.vertex_count(), entries)
}

/// Consistent boundary load `∫_∂Ω g φ_i ds` for P1 data `g` on the polyline.
pub fn boundary_load(mesh: &TriMesh, g: &BoundaryScalarField) -> Result<Vec<f64>> {
    let nb = mesh.boundary_map().len();
    if g.len() != nb {
        return Err(invalid(format!(
            "boundary field has {} values for {nb} boundary vertices",
            g.len()
        )));
    }
    let mut load = vec![0.0; mesh.vertex_count()];
    for s in 0..nb {
        let (i, j) = (mesh.boundary_vertex(s), mesh.boundary_vertex((s + 1) % nb));
        let len = mesh.vertices()[i].distance(mesh.vertices()[j]);
        let (gi, gj) = (g.values[s], g.values[(s + 1) % nb]);
        load[i] += len / 6.0 * (2.0 * gi + gj);
        load[j] += len / 6.0 * (gi + 2.0 * gj);
    }
    Ok(load)
}

/// Divergence constant compatible with Neumann data `g`: `|Ω|⁻¹ ∫_∂Ω g`.
pub fn compatible_divergence(mesh: &TriMesh, g: &BoundaryScalarField) -> Result<f64> {
    Ok(boundary_load(mesh, g)?.iter().sum::<f64>() / mesh.total_area())
}

/// Assembled operators and cached factorizations for one mesh.
#[derive(Debug)]
pub struct PoissonSolver {
    mesh: Arc<TriMesh>,
    stiffness: CsrMatrix,
    mass: Vec<f64>,
    interior: Vec<usize>,
    interior_slot: Vec<Option<usize>>,
    dirichlet: OnceLock<std::result::Result<Llt, String>>,
    neumann: OnceLock<std::result::Result<Lu, String>>,
}

impl PoissonSolver {
    pub fn new(mesh: Arc<TriMesh>) -> Self {
        let stiffness = assemble_stiffness(&mesh);
        let mass = mesh.lumped_mass();
        let mut interior = Vec::new();
        let mut interior_slot = vec![None; mesh.vertex_count()];
        for v in 0..mesh.vertex_count() {
            if !mesh.is_boundary(v) {
                interior_slot[v] = Some(interior.len());
                interior.push(v);
            }
        }
        Self {
            mesh,
            stiffness,
            mass,
            interior,
            interior_slot,
            dirichlet: OnceLock::new(),
            neumann: OnceLock::new(),
        }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// `m_i = ∫ φ_i`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `∫_Ω ∇u·∇v`.
    pub fn energy(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        same_mesh(&self.mesh, &u.mesh)?;
        same_mesh(&self.mesh, &v.mesh)?;
        Ok(self.stiffness.bilinear(&u.values, &v.values))
    }

    /// Weak Laplacian load `(Ku)_i`.
    pub fn stiffness_action(&self, u: &ScalarField) -> Result<Vec<f64>> {
        same_mesh(&self.mesh, &u.mesh)?;
        Ok(self.stiffness.mul_vec(&u.values))
    }

    fn dirichlet_factor(&self) -> Result<&Llt> {
        self.dirichlet
            .get_or_init(|| {
                let n = self.interior.len();
                if n == 0 {
                    return Err("mesh has no interior vertices".into());
                }
                let mut trip = Vec::new();
                for (r, &v) in self.interior.iter().enumerate() {
                    for (w, val) in self.stiffness.row(v) {
                        if let Some(c) = self.interior_slot[w] {
                            trip.push(Triplet::new(r, c, val));
                        }
                    }
                }
                let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
                    .map_err(|e| format!("{e:?}"))?;
                a.sp_cholesky(Side::Lower).map_err(|e| format!("{e:?}"))
            })
            .as_ref()
            .map_err(|e| ShapeError::SolverFailure(format!("Dirichlet factorization: {e}")))
    }

    fn neumann_factor(&self) -> Result<&Lu> {
        self.neumann
            .get_or_init(|| {
                let n = self.mesh.vertex_count();
                let mut trip = Vec::new();
                for i in 0..n {
                    for (j, val) in self.stiffness.row(i) {
                        trip.push(Triplet::new(i, j, val));
                    }
                    trip.push(Triplet::new(i, n, self.mass[i]));
                    trip.push(Triplet::new(n, i, self.mass[i]));
                }
                let a = SparseColMat::<usize, f64>::try_new_from_triplets(n + 1, n + 1, &trip)
                    .map_err(|e| format!("{e:?}"))?;
                a.sp_lu().map_err(|e| format!("{e:?}"))
            })
            .as_ref()
            .map_err(|e| ShapeError::SolverFailure(format!("Neumann factorization: {e}")))
    }

    /// Solves `K_II u_I = load_I` with `u = 0` on the boundary.
    fn solve_interior(&self, load_interior: &[f64]) -> Result<ScalarField> {
        let llt = self.dirichlet_factor()?;
        let n = self.interior.len();
        let rhs = Col::<f64>::from_fn(n, |i| load_interior[i]);
        let x = llt.solve(&rhs);
        let mut values = vec![0.0; self.mesh.vertex_count()];
        for (r, &v) in self.interior.iter().enumerate() {
            values[v] = x[r];
        }
        // residual on interior rows
        let ku = self.stiffness.mul_vec(&values);
        let mut res: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (r, &v) in self.interior.iter().enumerate() {
            res = res.max((ku[v] - load_interior[r]).abs());
            scale = scale.max(load_interior[r].abs());
        }
        let ref_scale = scale.max(self.stiffness.norm_inf() * max_abs(&values));
        if !(res <= RESIDUAL_TOL * ref_scale) && ref_scale > 0.0 {
            return Err(ShapeError::SolverFailure(format!(
                "Dirichlet residual {res:e} exceeds tolerance (scale {ref_scale:e})"
            )));
        }
        ScalarField::new(self.mesh.clone(), values)
    }

    /// `Δu = rhs` in Ω, `u = 0` on ∂Ω.
    pub fn solve_dirichlet(&self, rhs: f64) -> Result<ScalarField> {
        let load: Vec<f64> = self.interior.iter().map(|&v| -rhs * self.mass[v]).collect();
        self.solve_interior(&load)
    }

    /// Zero-trace `u_⊥` whose weak Laplacian equals that of `u` at every
    /// interior vertex.
    pub fn solve_dirichlet_field(&self, u: &ScalarField) -> Result<ScalarField> {
        let ku = self.stiffness_action(u)?;
        let load: Vec<f64> = self.interior.iter().map(|&v| ku[v]).collect();
        self.solve_interior(&load)
    }

    /// `Δu = s` in Ω, `∂u/∂n = g` on ∂Ω, with zero mass-weighted mean.
    pub fn solve_neumann(&self, g: &BoundaryScalarField, s: f64) -> Result<ScalarField> {
        let b = boundary_load(&self.mesh, g)?;
        let total_area = self.mesh.total_area();
        let flux: f64 = b.iter().sum();
        let s_star = flux / total_area;
        let scale = s_star
            .abs()
            .max(b.iter().map(|v| v.abs()).sum::<f64>() / total_area);
        if !((s - s_star).abs() <= 1e-8 * scale + 1e-15) {
            return Err(ShapeError::IncompatibleData(format!(
                "divergence {s} does not match boundary flux / area = {s_star}"
            )));
        }
        let n = self.mesh.vertex_count();
        let f: Vec<f64> = (0..n).map(|i| b[i] - s * self.mass[i]).collect();
        let lu = self.neumann_factor()?;
        let rhs = Col::<f64>::from_fn(n + 1, |i| if i < n { f[i] } else { 0.0 });
        let x = lu.solve(&rhs);
        let mut values: Vec<f64> = (0..n).map(|i| x[i]).collect();
        let lambda = x[n];

        let ku = self.stiffness.mul_vec(&values);
        let res = (0..n)
            .map(|i| (ku[i] + lambda * self.mass[i] - f[i]).abs())
            .fold(0.0, f64::max);
        let ref_scale = max_abs(&f).max(self.stiffness.norm_inf() * max_abs(&values));
        if !(res <= RESIDUAL_TOL * ref_scale) && ref_scale > 0.0 {
            return Err(ShapeError::SolverFailure(format!(
                "Neumann residual {res:e} exceeds tolerance (scale {ref_scale:e})"
            )));
        }
        let mean = self
            .mass
            .iter()
            .zip(&values)
            .map(|(m, v)| m * v)
            .sum::<f64>()
            / total_area;
        values.iter_mut().for_each(|v| *v -= mean);
        ScalarField::new(self.mesh.clone(), values)
    }

    /// Weak divergence `-(Σ_T A_T α_T·∇φ_i) / m_i`.
    pub fn divergence(&self, alpha: &VectorField) -> Result<DivergenceField> {
        same_mesh(&self.mesh, &alpha.mesh)?;
        Ok(divergence(alpha))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn solve_neumann(mesh: &Arc<TriMesh>, g: &BoundaryScalarField, s: f64) -> Result<ScalarField> {
    PoissonSolver::new(mesh.clone()).solve_neumann(g, s)
}

pub fn solve_dirichlet(mesh: &Arc<TriMesh>, rhs: f64) -> Result<ScalarField> {
    PoissonSolver::new(mesh.clone()).solve_dirichlet(rhs)
}

pub fn solve_dirichlet_field(mesh: &Arc<TriMesh>, u: &ScalarField) -> Result<ScalarField> {
    same_mesh(mesh, &u.mesh)?;
    PoissonSolver::new(mesh.clone()).solve_dirichlet_field(u)
}

/// Exact per-triangle gradient of a P1 field.
pub fn gradient(u: &ScalarField) -> VectorField {
    let m = &u.mesh;
    let vectors = (0..m.triangle_count())
        .map(|t| {
            let g = m.hat_gradients(t);
            let tri = m.triangles()[t];
            g[0] * u.values[tri[0]] + g[1] * u.values[tri[1]] + g[2] * u.values[tri[2]]
        })
        .collect();
    VectorField {
        mesh: m.clone(),
        vectors,
    }
}

/// `|Ω|⁻¹ Σ_T |T| ⟨α_T, β_T⟩`.
pub fn inner_product(mesh: &Arc<TriMesh>, alpha: &VectorField, beta: &VectorField) -> Result<f64> {
    same_mesh(mesh, &alpha.mesh)?;
    same_mesh(mesh, &beta.mesh)?;
    let acc: f64 = alpha
        .vectors
        .iter()
        .zip(&beta.vectors)
        .zip(mesh.areas())
        .map(|((a, b), area)| area * a.dot(*b))
        .sum();
    Ok(acc / mesh.total_area())
}

/// Norm induced by [`inner_product`].
pub fn ot_norm(alpha: &VectorField) -> f64 {
    inner_product(&alpha.mesh, alpha, alpha)
        .expect("same mesh")
        .max(0.0)
        .sqrt()
}

/// Lumped weak divergence per vertex.
pub fn divergence(alpha: &VectorField) -> DivergenceField {
    let m = &alpha.mesh;
    let mass = m.lumped_mass();
    let mut acc = vec![0.0; m.vertex_count()];
    for (t, tri) in m.triangles().iter().enumerate() {
        let g = m.hat_gradients(t);
        let a = m.triangle_area(t);
        for k in 0..3 {
            acc[tri[k]] -= a * alpha.vectors[t].dot(g[k]);
        }
    }
    DivergenceField {
        values: acc.iter().zip(&mass).map(|(a, w)| a / w).collect(),
        reliable: (0..m.vertex_count()).map(|v| !m.is_boundary(v)).collect(),
    }
}
