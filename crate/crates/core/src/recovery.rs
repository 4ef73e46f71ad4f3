//! Nodal derivatives of P1 fields.
//!
//! Two recoveries are provided. The area-weighted average of incident
//! triangle gradients is cheap and exact for linear fields. The local
//! quadratic least-squares fit over the two-ring is exact for quadratic
//! fields at every vertex, including boundary vertices, where the averaged
//! gradient is biased towards the interior by a fraction of `h`.

use crate::geometry::Vec2;
use crate::mesh::TriMesh;
use crate::poisson::{ScalarField, VectorField};

/// Symmetric 2x2 Hessian stored as `[xx, xy, yy]`.
pub type Hessian = [f64; 3];

pub fn hessian_frobenius(h: Hessian) -> f64 {
    (h[0] * h[0] + 2.0 * h[1] * h[1] + h[2] * h[2]).sqrt()
}

/// Area-weighted average of the incident triangle values at every vertex.
pub fn area_weighted_vectors(alpha: &VectorField) -> Vec<Vec2> {
    let m = alpha.mesh();
    (0..m.vertex_count())
        .map(|v| {
            let (mut acc, mut w) = (Vec2::ZERO, 0.0);
            for &t in m.triangles_of(v) {
                let a = m.triangle_area(t);
                acc += alpha.vectors()[t] * a;
                w += a;
            }
            acc / w
        })
        .collect()
}

/// Area-weighted average of incident triangle scalars at every vertex.
pub fn area_weighted_scalars(mesh: &TriMesh, per_triangle: &[f64]) -> Vec<f64> {
    (0..mesh.vertex_count())
        .map(|v| {
            let (mut acc, mut w) = (0.0, 0.0);
            for &t in mesh.triangles_of(v) {
                let a = mesh.triangle_area(t);
                acc += per_triangle[t] * a;
                w += a;
            }
            acc / w
        })
        .collect()
}

/// Nodal gradient and Hessian from a quadratic fit.
#[derive(Debug, Clone)]
pub struct QuadraticRecovery {
    pub gradients: Vec<Vec2>,
    pub hessians: Vec<Hessian>,
}

/// Fits `u(x_j) - u(x_i) ≈ g·d + ½ dᵀHd`, `d = x_j - x_i`, over the two-ring
/// of each vertex (grown to the three-ring when the two-ring is too small or
/// degenerate).
pub fn quadratic_recovery(u: &ScalarField) -> QuadraticRecovery {
    let m = u.mesh();
    let n = m.vertex_count();
    let rings: Vec<Vec<usize>> = (0..n).map(|v| m.neighbours(v)).collect();
    let mut gradients = Vec::with_capacity(n);
    let mut hessians = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];
    for v in 0..n {
        let mut patch = vec![v];
        mark[v] = v;
        let mut frontier = 0;
        let mut fit = None;
        for depth in 0..4 {
            let end = patch.len();
            for k in frontier..end {
                for &w in &rings[patch[k]] {
                    if mark[w] != v {
                        mark[w] = v;
                        patch.push(w);
                    }
                }
            }
            frontier = end;
            if depth >= 1 && patch.len() >= 9 {
                fit = fit_quadratic(m.vertices(), u.values(), v, &patch[1..], m.h());
                if fit.is_some() {
                    break;
                }
            }
        }
        let (g, h) = fit.unwrap_or_else(|| (averaged_gradient(u, v), [0.0; 3]));
        gradients.push(g);
        hessians.push(h);
    }
    QuadraticRecovery {
        gradients,
        hessians,
    }
}

fn averaged_gradient(u: &ScalarField, v: usize) -> Vec2 {
    let m = u.mesh();
    let (mut acc, mut w) = (Vec2::ZERO, 0.0);
    for &t in m.triangles_of(v) {
        let g = m.hat_gradients(t);
        let tri = m.triangles()[t];
        let grad =
            g[0] * u.values()[tri[0]] + g[1] * u.values()[tri[1]] + g[2] * u.values()[tri[2]];
        acc += grad * m.triangle_area(t);
        w += m.triangle_area(t);
    }
    acc / w
}

fn fit_quadratic(
    pts: &[Vec2],
    vals: &[f64],
    v: usize,
    patch: &[usize],
    h: f64,
) -> Option<(Vec2, Hessian)> {
    // unknowns: gx, gy, hxx, hxy, hyy in h-scaled coordinates
    let mut ata = [[0.0; 5]; 5];
    let mut atb = [0.0; 5];
    let (p0, u0) = (pts[v], vals[v]);
    for &w in patch {
        let d = (pts[w] - p0) / h;
        let row = [d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y];
        let rhs = vals[w] - u0;
        for a in 0..5 {
            atb[a] += row[a] * rhs;
            for b in 0..5 {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    let x = solve_spd5(ata, atb)?;
    Some((
        Vec2::new(x[0], x[1]) / h,
        [x[2] / (h * h), x[3] / (h * h), x[4] / (h * h)],
    ))
}

/// Cholesky solve of a small symmetric positive definite system; `None` when
/// the pivots show it is numerically singular.
fn solve_spd5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    let scale = (0..5).map(|i| a[i][i]).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    for j in 0..5 {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 1e-10 * scale) {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..5 {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..5 {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..5).rev() {
        for k in i + 1..5 {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Some(b)
}
