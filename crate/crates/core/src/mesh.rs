//! Quality triangulations of a contour's interior.
//!
//! Interior vertices are seeded on a hexagonal lattice of spacing `h`, pruned
//! away from the boundary and relaxed by a few rounds of Laplacian smoothing.
//! The constrained Delaunay triangulation and the final angle refinement are
//! delegated to `spade`; the contour samples are never split, so the mesh
//! boundary is exactly the input polyline.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use crate::contour::Contour;
use crate::error::{invalid, Result, ShapeError};
use crate::geometry::{
    barycentric, orient, point_in_polygon, point_segment_distance, polygon_distance, Vec2,
};

/// Smallest interior angle every accepted mesh must have, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;

const SMOOTHING_ROUNDS: usize = 4;
const REFINE_ANGLE_DEG: f64 = 21.0;

/// Conforming triangulation of a polygon interior.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    /// `(mesh vertex, contour sample)` pairs, ordered by contour sample.
    boundary_map: Vec<(usize, usize)>,
    h: f64,
    areas: Vec<f64>,
    is_boundary: Vec<bool>,
    vertex_tri_offsets: Vec<usize>,
    vertex_tri_list: Vec<usize>,
}

impl TriMesh {
    /// Assembles a mesh from raw parts, checking indices, orientation and the
    /// boundary map.
    pub fn from_parts(
        vertices: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        boundary_map: Vec<(usize, usize)>,
        h: f64,
    ) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(invalid("mesh has no triangles"));
        }
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(invalid(format!("triangle {t} references a missing vertex")));
            }
            let a = 0.5 * orient(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(a > 0.0) {
                return Err(ShapeError::DegenerateGeometry(format!(
                    "triangle {t} is inverted or flat"
                )));
            }
            areas.push(a);
        }
        let mut is_boundary = vec![false; nv];
        for (k, &(v, s)) in boundary_map.iter().enumerate() {
            if s != k || v >= nv || is_boundary[v] {
                return Err(invalid(
                    "boundary map must pair each contour sample with one distinct vertex",
                ));
            }
            is_boundary[v] = true;
        }

        let mut counts = vec![0usize; nv + 1];
        for tri in &triangles {
            for &i in tri {
                counts[i + 1] += 1;
            }
        }
        for i in 0..nv {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut list = vec![0; counts[nv]];
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                list[fill[i]] = t;
                fill[i] += 1;
            }
        }
        if let Some(v) = (0..nv).find(|&v| counts[v] == counts[v + 1]) {
            return Err(invalid(format!("vertex {v} belongs to no triangle")));
        }

        Ok(Self {
            vertices,
            triangles,
            boundary_map,
            h,
            areas,
            is_boundary,
            vertex_tri_offsets: counts,
            vertex_tri_list: list,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_map(&self) -> &[(usize, usize)] {
        &self.boundary_map
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    /// Mesh vertex carrying contour sample `s`.
    pub fn boundary_vertex(&self, s: usize) -> usize {
        self.boundary_map[s].0
    }

    pub fn triangles_of(&self, v: usize) -> &[usize] {
        &self.vertex_tri_list[self.vertex_tri_offsets[v]..self.vertex_tri_offsets[v + 1]]
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangles[t];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }

    /// Gradients of the three P1 hat functions of triangle `t`.
    pub fn hat_gradients(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let two_area = 2.0 * self.areas[t];
        [
            (b - c).rot_cw() / two_area,
            (c - a).rot_cw() / two_area,
            (a - b).rot_cw() / two_area,
        ]
    }

    /// Vertices sharing a triangle with `v`, sorted, excluding `v`.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .triangles_of(v)
            .iter()
            .flat_map(|&t| self.triangles[t])
            .filter(|&w| w != v)
            .collect();
        set.into_iter().collect()
    }

    /// Lumped (row-sum) mass of each vertex: a third of the incident area.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.vertex_count()];
        for (tri, a) in self.triangles.iter().zip(&self.areas) {
            for &i in tri {
                m[i] += a / 3.0;
            }
        }
        m
    }

    /// The boundary polyline as a contour, in contour-sample order.
    pub fn boundary_contour(&self) -> Result<Contour> {
        Contour::new(
            self.boundary_map
                .iter()
                .map(|&(v, _)| self.vertices[v])
                .collect(),
        )
    }

    /// Whether this mesh was built on exactly the samples of `c`.
    pub fn matches_contour(&self, c: &Contour) -> bool {
        self.boundary_map.len() == c.len()
            && self
                .boundary_map
                .iter()
                .zip(c.points())
                .all(|(&(v, _), &p)| self.vertices[v] == p)
    }

    pub fn statistics(&self) -> MeshStatistics {
        mesh_statistics(self)
    }

    /// OFF text export (planar, z = 0).
    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF");
        let _ = writeln!(s, "{} {} 0", self.vertex_count(), self.triangle_count());
        for p in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e} 0", p.x, p.y);
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(s, "3 {a} {b} {c}");
        }
        s
    }

    pub fn locator(&self) -> TriangleLocator {
        TriangleLocator::new(self.vertices.clone(), self.triangles.clone())
    }
}

/// Interior angles of a triangle, in radians.
pub fn triangle_angles(a: Vec2, b: Vec2, c: Vec2) -> [f64; 3] {
    let angle = |p: Vec2, q: Vec2, r: Vec2| {
        let u = q - p;
        let v = r - p;
        u.cross(v).abs().atan2(u.dot(v))
    };
    [angle(a, b, c), angle(b, c, a), angle(c, a, b)]
}

/// Quality report of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshStatistics {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub boundary_vertex_count: usize,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    /// Counts of edge lengths in ten equal bins spanning `[0, 2h]`; longer
    /// edges land in the last bin.
    pub edge_histogram: [usize; 10],
    pub total_area: f64,
}

impl MeshStatistics {
    pub fn edge_ratio(&self) -> f64 {
        self.max_edge / self.min_edge
    }
}

pub fn mesh_statistics(m: &TriMesh) -> MeshStatistics {
    let mut min_angle = f64::INFINITY;
    let mut max_angle: f64 = 0.0;
    let mut edges = BTreeSet::new();
    for tri in &m.triangles {
        let [a, b, c] = tri.map(|i| m.vertices[i]);
        for ang in triangle_angles(a, b, c) {
            min_angle = min_angle.min(ang);
            max_angle = max_angle.max(ang);
        }
        for k in 0..3 {
            let (i, j) = (tri[k], tri[(k + 1) % 3]);
            edges.insert((i.min(j), i.max(j)));
        }
    }
    let mut hist = [0usize; 10];
    let mut min_edge = f64::INFINITY;
    let mut max_edge: f64 = 0.0;
    for &(i, j) in &edges {
        let len = m.vertices[i].distance(m.vertices[j]);
        min_edge = min_edge.min(len);
        max_edge = max_edge.max(len);
        let bin = ((len / (2.0 * m.h)) * 10.0) as usize;
        hist[bin.min(9)] += 1;
    }
    MeshStatistics {
        vertex_count: m.vertex_count(),
        triangle_count: m.triangle_count(),
        boundary_vertex_count: m.boundary_map.len(),
        min_angle_deg: min_angle.to_degrees(),
        max_angle_deg: max_angle.to_degrees(),
        min_edge,
        max_edge,
        edge_histogram: hist,
        total_area: m.total_area(),
    }
}

/// Default mesh size: the mean spacing of the contour samples.
pub fn default_mesh_size(c: &Contour) -> f64 {
    c.perimeter() / c.len() as f64
}

/// Triangulates the interior of `c` with target edge length `h`. The contour
/// samples become mesh vertices `0..N` in order.
pub fn triangulate(c: &Contour, h: f64) -> Result<TriMesh> {
    let perimeter = c.perimeter();
    if !(h > 0.0) || h > perimeter / 16.0 {
        return Err(invalid(format!(
            "mesh size {h} outside (0, perimeter/16 = {}]",
            perimeter / 16.0
        )));
    }
    let boundary = c.points();
    let n = boundary.len();
    // All work happens relative to the first sample so that translated
    // contours give translated meshes.
    let origin = boundary[0];
    let local: Vec<Vec2> = boundary.iter().map(|&p| p - origin).collect();

    let mut interior = seed_lattice(&local, h);
    let mut last_err = None;
    for round in 0..=SMOOTHING_ROUNDS {
        let cdt = build_cdt(&local, &interior)?;
        let (verts, tris) = extract_inner(&cdt, &local);
        if round < SMOOTHING_ROUNDS {
            interior = smooth(&verts, &tris, n, &local, h);
            continue;
        }
        let mut cdt = cdt;
        let budget = 2 * cdt.num_vertices() + 64;
        let min_area = 1e-3 * h * h;
        let result = cdt.refine(
            RefinementParameters::new()
                .keep_constraint_edges()
                .exclude_outer_faces(true)
                .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
                .with_min_required_area(min_area)
                .with_max_additional_vertices(budget),
        );
        if !result.refinement_complete {
            last_err = Some(ShapeError::MeshQuality(
                "refinement budget exhausted".into(),
            ));
            break;
        }
        let (verts, tris) = extract_inner(&cdt, &local);
        let (verts, tris) = compact(verts, tris, n);
        let vertices: Vec<Vec2> = verts
            .iter()
            .enumerate()
            .map(|(i, &p)| if i < n { boundary[i] } else { p + origin })
            .collect();
        let mesh = TriMesh::from_parts(vertices, tris, (0..n).map(|i| (i, i)).collect(), h)?;
        let stats = mesh.statistics();
        if stats.min_angle_deg < MIN_ANGLE_DEG {
            last_err = Some(ShapeError::MeshQuality(format!(
                "minimum angle {:.2} deg below {MIN_ANGLE_DEG}",
                stats.min_angle_deg
            )));
            break;
        }
        return Ok(mesh);
    }
    Err(last_err.unwrap_or_else(|| ShapeError::MeshQuality("triangulation failed".into())))
}

/// Hexagonal lattice points inside the polygon, kept clear of the boundary by
/// about half the local spacing.
fn seed_lattice(boundary: &[Vec2], h: f64) -> Vec<Vec2> {
    let n = boundary.len();
    let (mut lo, mut hi) = (boundary[0], boundary[0]);
    for p in boundary {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let row = h * 3f64.sqrt() / 2.0;
    let j0 = (lo.y / row).floor() as i64 - 1;
    let j1 = (hi.y / row).ceil() as i64 + 1;
    let mut pts = Vec::new();
    for j in j0..=j1 {
        let y = j as f64 * row;
        let shift = if j.rem_euclid(2) == 1 { 0.5 * h } else { 0.0 };
        let i0 = ((lo.x - shift) / h).floor() as i64 - 1;
        let i1 = ((hi.x - shift) / h).ceil() as i64 + 1;
        for i in i0..=i1 {
            let p = Vec2::new(i as f64 * h + shift, y);
            if !point_in_polygon(p, boundary) {
                continue;
            }
            let (mut dist, mut seg_len) = (f64::INFINITY, 0.0);
            for s in 0..n {
                let (a, b) = (boundary[s], boundary[(s + 1) % n]);
                let d = point_segment_distance(p, a, b);
                if d < dist {
                    dist = d;
                    seg_len = a.distance(b);
                }
            }
            if dist >= 0.55 * h.max(seg_len) {
                pts.push(p);
            }
        }
    }
    pts
}

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

fn build_cdt(boundary: &[Vec2], interior: &[Vec2]) -> Result<Cdt> {
    let mut cdt = Cdt::new();
    let mut handles = Vec::with_capacity(boundary.len());
    for p in boundary.iter().chain(interior) {
        let h = cdt.insert(Point2::new(p.x, p.y)).map_err(|e| {
            ShapeError::DegenerateGeometry(format!("vertex insertion failed: {e:?}"))
        })?;
        handles.push(h);
    }
    if cdt.num_vertices() != boundary.len() + interior.len() {
        return Err(ShapeError::DegenerateGeometry(
            "duplicate mesh vertices".into(),
        ));
    }
    let n = boundary.len();
    for i in 0..n {
        let (a, b) = (handles[i], handles[(i + 1) % n]);
        if !cdt.can_add_constraint(a, b) {
            return Err(ShapeError::DegenerateGeometry(format!(
                "boundary segment {i} crosses another"
            )));
        }
        cdt.add_constraint(a, b);
    }
    Ok(cdt)
}

/// Vertices in spade order and CCW inner triangles (centroid inside the
/// boundary polygon).
fn extract_inner(cdt: &Cdt, boundary: &[Vec2]) -> (Vec<Vec2>, Vec<[usize; 3]>) {
    let verts: Vec<Vec2> = cdt
        .vertices()
        .map(|v| Vec2::new(v.position().x, v.position().y))
        .collect();
    let mut tris = Vec::new();
    for f in cdt.inner_faces() {
        let idx = f.vertices().map(|v| v.fix().index());
        let centroid = (verts[idx[0]] + verts[idx[1]] + verts[idx[2]]) / 3.0;
        if point_in_polygon(centroid, boundary) {
            tris.push(idx);
        }
    }
    (verts, tris)
}

/// Drops vertices used by no inner triangle, keeping the first `n` in place.
fn compact(verts: Vec<Vec2>, tris: Vec<[usize; 3]>, n: usize) -> (Vec<Vec2>, Vec<[usize; 3]>) {
    let mut used = vec![false; verts.len()];
    used[..n].iter_mut().for_each(|u| *u = true);
    for t in &tris {
        for &i in t {
            used[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; verts.len()];
    let mut out = Vec::with_capacity(verts.len());
    for (i, p) in verts.into_iter().enumerate() {
        if used[i] {
            remap[i] = out.len();
            out.push(p);
        }
    }
    let tris = tris.into_iter().map(|t| t.map(|i| remap[i])).collect();
    (out, tris)
}

/// One Laplacian smoothing pass over the interior vertices (indices `n..`).
fn smooth(verts: &[Vec2], tris: &[[usize; 3]], n: usize, boundary: &[Vec2], h: f64) -> Vec<Vec2> {
    let mut sum = vec![Vec2::ZERO; verts.len()];
    let mut count = vec![0usize; verts.len()];
    let mut seen = BTreeSet::new();
    for t in tris {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            if seen.insert((i.min(j), i.max(j))) {
                sum[i] += verts[j];
                sum[j] += verts[i];
                count[i] += 1;
                count[j] += 1;
            }
        }
    }
    (n..verts.len())
        .filter(|&i| count[i] > 0)
        .map(|i| {
            let target = sum[i] / count[i] as f64;
            if point_in_polygon(target, boundary) && polygon_distance(target, boundary) > 0.25 * h {
                target
            } else {
                verts[i]
            }
        })
        .collect()
}

/// Uniform-grid point location over a triangle soup.
#[derive(Debug)]
pub struct TriangleLocator {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    offsets: Vec<usize>,
    items: Vec<usize>,
}

/// A located point: triangle index, barycentric weights and the distance from
/// the triangle (zero when inside).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub weights: [f64; 3],
    pub distance: f64,
}

impl TriangleLocator {
    pub fn new(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>) -> Self {
        let (mut lo, mut hi) = (vertices[0], vertices[0]);
        for p in &vertices {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let extent = (hi - lo).x.max((hi - lo).y).max(1e-300);
        let target_cells = (triangles.len() as f64 / 2.0).max(1.0);
        let cell = (((hi - lo).x.max(extent * 1e-3)) * ((hi - lo).y.max(extent * 1e-3))
            / target_cells)
            .sqrt();
        let nx = (((hi - lo).x / cell).floor() as usize + 1).max(1);
        let ny = (((hi - lo).y / cell).floor() as usize + 1).max(1);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| vertices[i]);
            let x0 = clamp((a.x.min(b.x).min(c.x) - lo.x) / cell, nx);
            let x1 = clamp((a.x.max(b.x).max(c.x) - lo.x) / cell, nx);
            let y0 = clamp((a.y.min(b.y).min(c.y) - lo.y) / cell, ny);
            let y1 = clamp((a.y.max(b.y).max(c.y) - lo.y) / cell, ny);
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    buckets[iy * nx + ix].push(t);
                }
            }
        }
        let mut offsets = Vec::with_capacity(nx * ny + 1);
        let mut items = Vec::new();
        offsets.push(0);
        for b in buckets {
            items.extend(b);
            offsets.push(items.len());
        }
        Self {
            vertices,
            triangles,
            origin: lo,
            cell,
            nx,
            ny,
            offsets,
            items,
        }
    }

    /// Triangle containing `p` (with a small barycentric tolerance).
    pub fn locate(&self, p: Vec2) -> Option<Location> {
        let ix = ((p.x - self.origin.x) / self.cell).floor();
        let iy = ((p.y - self.origin.y) / self.cell).floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.nx as f64 || iy >= self.ny as f64 {
            return None;
        }
        let cell = iy as usize * self.nx + ix as usize;
        let mut best: Option<(f64, Location)> = None;
        for &t in &self.items[self.offsets[cell]..self.offsets[cell + 1]] {
            let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
            let w = barycentric(p, a, b, c);
            let worst = w[0].min(w[1]).min(w[2]);
            if worst >= -1e-12 && best.is_none_or(|(score, _)| worst > score) {
                best = Some((
                    worst,
                    Location {
                        triangle: t,
                        weights: w,
                        distance: 0.0,
                    },
                ));
            }
        }
        best.map(|(_, loc)| loc)
    }

    /// Like [`TriangleLocator::locate`], falling back to the nearest triangle
    /// with the weights of the closest point on it.
    pub fn locate_or_nearest(&self, p: Vec2) -> Location {
        if let Some(loc) = self.locate(p) {
            return loc;
        }
        let mut best = Location {
            triangle: 0,
            weights: [1.0, 0.0, 0.0],
            distance: f64::INFINITY,
        };
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| self.vertices[i]);
            let (q, d) = closest_on_triangle(p, a, b, c);
            if d < best.distance {
                best = Location {
                    triangle: t,
                    weights: barycentric(q, a, b, c),
                    distance: d,
                };
            }
        }
        best
    }
}

fn closest_on_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> (Vec2, f64) {
    let w = barycentric(p, a, b, c);
    if w.iter().all(|&x| x >= 0.0) {
        return (p, 0.0);
    }
    let mut best = (a, f64::INFINITY);
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let uv = v - u;
        let t = ((p - u).dot(uv) / uv.norm_sq()).clamp(0.0, 1.0);
        let q = u + uv * t;
        let d = p.distance(q);
        if d < best.1 {
            best = (q, d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square(per_side: usize) -> Contour {
        let corners = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let mut pts = Vec::new();
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            for j in 0..per_side {
                pts.push(a + (b - a) * (j as f64 / per_side as f64));
            }
        }
        Contour::new(pts).unwrap()
    }

    fn assert_valid(m: &TriMesh, c: &Contour) {
        let stats = m.statistics();
        assert!(
            stats.min_angle_deg >= MIN_ANGLE_DEG,
            "min angle {}",
            stats.min_angle_deg
        );
        assert!(
            (stats.total_area - c.area()).abs() < 1e-12,
            "area {} vs {}",
            stats.total_area,
            c.area()
        );
        assert!(m.matches_contour(c));
        for (k, &(v, s)) in m.boundary_map().iter().enumerate() {
            assert_eq!(s, k);
            assert_eq!(m.vertices()[v], c.points()[s]);
        }
    }

    #[test]
    fn unit_circle_mesh() {
        let c = Contour::circle(128, 1.0).unwrap();
        let m = triangulate(&c, 0.1).unwrap();
        assert_valid(&m, &c);
        let nv = m.vertex_count();
        assert!((350..=460).contains(&nv), "vertex count {nv}");
    }

    #[test]
    fn square_keeps_corners() {
        let c = square(8);
        let m = triangulate(&c, 0.1).unwrap();
        assert_valid(&m, &c);
        for corner in [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ] {
            assert!(m.vertices().contains(&corner));
        }
    }

    #[test]
    fn uniform_disk_edges_are_even() {
        let c = Contour::circle(126, 1.0).unwrap();
        let m = triangulate(&c, default_mesh_size(&c)).unwrap();
        assert_valid(&m, &c);
        assert!(m.statistics().edge_ratio() < 3.0, "{:?}", m.statistics());
    }

    #[test]
    fn nonconvex_shapes_mesh() {
        let star = Contour::from_polar(200, |t| 1.0 + 0.3 / 5.0 * (5.0 * t).sin()).unwrap();
        let m = triangulate(&star, 0.05).unwrap();
        assert_valid(&m, &star);
        let flower = Contour::from_polar(256, |t| 1.0 + 0.3 * (5.0 * t).cos()).unwrap();
        let m = triangulate(&flower, 0.04).unwrap();
        assert_valid(&m, &flower);
    }

    #[test]
    fn deterministic_and_translation_covariant() {
        let c = Contour::from_polar(96, |t| 1.0 + 0.2 * (3.0 * t).cos()).unwrap();
        let a = triangulate(&c, 0.08).unwrap();
        let b = triangulate(&c, 0.08).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.triangles(), b.triangles());
        let z = Vec2::new(0.25, -0.5);
        let t = triangulate(&c.translated(z), 0.08).unwrap();
        assert_eq!(t.triangles(), a.triangles());
        for (p, q) in t.vertices().iter().zip(a.vertices()) {
            assert!(p.distance(*q + z) < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_mesh_size() {
        let c = Contour::circle(64, 1.0).unwrap();
        assert!(matches!(
            triangulate(&c, 0.0),
            Err(ShapeError::InvalidArgument(_))
        ));
        assert!(matches!(
            triangulate(&c, 2.0 * PI / 15.0),
            Err(ShapeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn locator_finds_points() {
        let c = Contour::circle(64, 1.0).unwrap();
        let m = triangulate(&c, 0.15).unwrap();
        let loc = m.locator();
        for t in 0..m.triangle_count() {
            let p = m.centroid(t);
            let l = loc.locate(p).unwrap();
            assert_eq!(l.triangle, t);
        }
        let outside = loc.locate_or_nearest(Vec2::new(1.2, 0.0));
        assert!((outside.distance - 0.2).abs() < 1e-9);
        assert!(loc.locate(Vec2::new(5.0, 5.0)).is_none());
    }

    #[test]
    fn off_export_counts() {
        let c = Contour::circle(32, 1.0).unwrap();
        let m = triangulate(&c, 0.3).unwrap();
        let off = m.to_off();
        let mut lines = off.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(
            lines.next().unwrap(),
            format!("{} {} 0", m.vertex_count(), m.triangle_count())
        );
        assert_eq!(
            off.lines().count(),
            2 + m.vertex_count() + m.triangle_count()
        );
    }
}
