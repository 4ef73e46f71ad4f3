//! Closed planar curves sampled as counter-clockwise simple polylines, with the
//! boundary quadratures used by the lifting operators.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ShapeError};
use crate::geometry::{point_segment_distance, segments_touch, signed_area, Vec2};

/// Fewest samples a contour may carry.
pub const MIN_SAMPLES: usize = 16;

const DUPLICATE_TOL: f64 = 1e-12;
const TOUCH_TOL: f64 = 1e-12;

/// Ordered, implicitly closed sample of a simple CCW curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    points: Vec<Vec2>,
}

/// Normal deformation speed, one value per contour sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScalarField {
    pub values: Vec<f64>,
}

/// One planar vector per contour sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryVectorField {
    pub vectors: Vec<Vec2>,
}

#[derive(Deserialize)]
struct ContourFile {
    points: Vec<Vec2>,
}

impl BoundaryScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let field: BoundaryScalarField =
            serde_json::from_str(text).map_err(|e| invalid(format!("boundary field JSON: {e}")))?;
        if field.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("boundary field contains non-finite values"));
        }
        Ok(field)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

impl Contour {
    /// Validates the sample count, distinct consecutive samples, simplicity and
    /// counter-clockwise orientation.
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        let n = points.len();
        if n < MIN_SAMPLES {
            return Err(invalid(format!(
                "contour needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(invalid(format!("non-finite contour sample {p:?}")));
        }
        for i in 0..n {
            let gap = points[i].distance(points[(i + 1) % n]);
            if gap <= DUPLICATE_TOL {
                return Err(ShapeError::DegenerateGeometry(format!(
                    "samples {i} and {} coincide (gap {gap:e})",
                    (i + 1) % n
                )));
            }
        }
        if let Some((i, j)) = first_self_intersection(&points) {
            return Err(ShapeError::DegenerateGeometry(format!(
                "polyline is not simple: segments {i} and {j} touch"
            )));
        }
        let area = signed_area(&points);
        if area <= 0.0 {
            return Err(ShapeError::DegenerateGeometry(format!(
                "contour must be counter-clockwise (signed area {area:e})"
            )));
        }
        Ok(Self { points })
    }

    /// Samples `r(θ)·(cos θ, sin θ)` at `n` equispaced angles starting at θ = 0.
    pub fn from_polar(n: usize, radius: impl Fn(f64) -> f64) -> Result<Self> {
        let points = (0..n)
            .map(|i| {
                let theta = std::f64::consts::TAU * i as f64 / n as f64;
                let r = radius(theta);
                Vec2::new(r * theta.cos(), r * theta.sin())
            })
            .collect();
        Self::new(points)
    }

    pub fn circle(n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("circle radius must be positive"));
        }
        Self::from_polar(n, |_| radius)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ContourFile =
            serde_json::from_str(text).map_err(|e| invalid(format!("contour JSON: {e}")))?;
        Self::new(file.points)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Length of segment `i -> i+1` (periodic).
    pub fn segment_length(&self, i: usize) -> f64 {
        let n = self.len();
        self.points[i].distance(self.points[(i + 1) % n])
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| self.segment_length(i)).sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.len();
        let mut c = Vec2::ZERO;
        let mut a2 = 0.0;
        for i in 0..n {
            let p = self.points[i];
            let q = self.points[(i + 1) % n];
            let w = p.cross(q);
            a2 += w;
            c += (p + q) * w;
        }
        c / (3.0 * a2)
    }

    /// Largest distance between two samples.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max(p.distance(*q));
            }
        }
        d
    }

    pub fn translated(&self, offset: Vec2) -> Contour {
        Contour {
            points: self.points.iter().map(|&p| p + offset).collect(),
        }
    }

    /// Symmetric Hausdorff distance between the two polylines, measured from
    /// the samples of each to the segments of the other.
    pub fn hausdorff(&self, other: &Contour) -> f64 {
        fn one_sided(a: &Contour, b: &Contour) -> f64 {
            a.points
                .iter()
                .map(|&p| crate::geometry::polygon_distance(p, &b.points))
                .fold(0.0, f64::max)
        }
        one_sided(self, other).max(one_sided(other, self))
    }

    /// Redistributes `m` samples equispaced in arclength along the polyline,
    /// starting at the first sample.
    pub fn resample_arclength(&self, m: usize) -> Result<Contour> {
        if m < MIN_SAMPLES {
            return Err(invalid(format!("resample count {m} below {MIN_SAMPLES}")));
        }
        let n = self.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let prev = cumulative[i];
            cumulative.push(prev + self.segment_length(i));
        }
        let total = cumulative[n];
        let mut out = Vec::with_capacity(m);
        out.push(self.points[0]);
        let mut seg = 0;
        for k in 1..m {
            let target = total * k as f64 / m as f64;
            while seg + 1 < n && cumulative[seg + 1] <= target {
                seg += 1;
            }
            let a = self.points[seg];
            let b = self.points[(seg + 1) % n];
            let t = (target - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg]);
            out.push(a + (b - a) * t);
        }
        Contour::new(out)
    }

    /// Outward unit normals from centered differences of neighbouring samples.
    pub fn normal_field(&self) -> Result<BoundaryVectorField> {
        let n = self.len();
        let mut vectors = Vec::with_capacity(n);
        for i in 0..n {
            let t = self.points[(i + 1) % n] - self.points[(i + n - 1) % n];
            let len = t.norm();
            if len <= DUPLICATE_TOL {
                return Err(ShapeError::DegenerateGeometry(format!(
                    "zero centered tangent at sample {i}"
                )));
            }
            vectors.push(t.rot_cw() / len);
        }
        Ok(BoundaryVectorField { vectors })
    }

    /// Unit tangents matching [`Contour::normal_field`].
    pub fn tangent_field(&self) -> Result<BoundaryVectorField> {
        let normals = self.normal_field()?;
        Ok(BoundaryVectorField {
            vectors: normals.vectors.into_iter().map(Vec2::rot_ccw).collect(),
        })
    }

    /// Trapezoidal quadrature of `g` against arclength.
    pub fn boundary_integral(&self, g: &BoundaryScalarField) -> Result<f64> {
        self.check_len(g.len())?;
        Ok(self.trapezoid(&g.values))
    }

    /// Rate of change of `∫_Ω φ` when the boundary moves with normal speed `a`.
    pub fn shape_derivative(
        &self,
        a: &BoundaryScalarField,
        phi: impl Fn(Vec2) -> f64,
    ) -> Result<f64> {
        self.check_len(a.len())?;
        let integrand: Vec<f64> = self
            .points
            .iter()
            .zip(&a.values)
            .map(|(&p, &ai)| phi(p) * ai)
            .collect();
        Ok(self.trapezoid(&integrand))
    }

    /// Normal component of a general deformation field.
    pub fn horizontal_project(&self, v: &BoundaryVectorField) -> Result<BoundaryScalarField> {
        self.check_len(v.vectors.len())?;
        let normals = self.normal_field()?;
        Ok(BoundaryScalarField {
            values: normals
                .vectors
                .iter()
                .zip(&v.vectors)
                .map(|(n, w)| n.dot(*w))
                .collect(),
        })
    }

    /// Per-sample arclength weights of the trapezoidal rule.
    pub fn arclength_weights(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| 0.5 * (self.segment_length((i + n - 1) % n) + self.segment_length(i)))
            .collect()
    }

    fn trapezoid(&self, values: &[f64]) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| 0.5 * self.segment_length(i) * (values[i] + values[(i + 1) % n]))
            .sum()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(invalid(format!(
                "boundary field has {len} entries but the contour has {} samples",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Sweep over segments sorted by their left end; returns the first touching
/// pair of non-adjacent segments, or a fold-back at a shared vertex.
fn first_self_intersection(points: &[Vec2]) -> Option<(usize, usize)> {
    let n = points.len();
    let seg = |i: usize| (points[i], points[(i + 1) % n]);

    for i in 0..n {
        let (a, b) = seg(i);
        let c = points[(i + 2) % n];
        // the next segment doubling back onto this one
        if point_segment_distance(c, a, b) <= TOUCH_TOL
            || point_segment_distance(a, b, c) <= TOUCH_TOL
        {
            return Some((i, (i + 1) % n));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |i: usize| {
        let (a, b) = seg(i);
        a.x.min(b.x)
    };
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)).then(i.cmp(&j)));
    for (k, &i) in order.iter().enumerate() {
        let (a, b) = seg(i);
        let xmax = a.x.max(b.x) + TOUCH_TOL;
        let (ylo, yhi) = (a.y.min(b.y) - TOUCH_TOL, a.y.max(b.y) + TOUCH_TOL);
        for &j in &order[k + 1..] {
            if xmin(j) > xmax {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (c, d) = seg(j);
            if c.y.max(d.y) < ylo || c.y.min(d.y) > yhi {
                continue;
            }
            if segments_touch(a, b, c, d, TOUCH_TOL) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn densified_square(per_side: usize) -> Contour {
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

    fn angles(n: usize) -> Vec<f64> {
        (0..n).map(|i| TAU * i as f64 / n as f64).collect()
    }

    #[test]
    fn rejects_short_clockwise_and_self_intersecting_input() {
        let ccw = Contour::circle(32, 1.0).unwrap();
        let mut cw = ccw.points().to_vec();
        cw.reverse();
        assert!(matches!(
            Contour::new(cw),
            Err(ShapeError::DegenerateGeometry(_))
        ));
        assert!(matches!(
            Contour::new(ccw.points()[..8].to_vec()),
            Err(ShapeError::InvalidArgument(_))
        ));

        // figure eight
        let eight: Vec<Vec2> = angles(40)
            .iter()
            .map(|&t| Vec2::new(t.sin(), (2.0 * t).sin() * 0.5))
            .collect();
        assert!(matches!(
            Contour::new(eight),
            Err(ShapeError::DegenerateGeometry(_))
        ));

        let mut dup = ccw.points().to_vec();
        dup[5] = dup[4];
        assert!(Contour::new(dup).is_err());
    }

    #[test]
    fn resample_circle_stays_on_circle() {
        let c = Contour::circle(64, 1.0).unwrap();
        let r = c.resample_arclength(128).unwrap();
        assert_eq!(r.len(), 128);
        // new samples sit on chord midpoints of the 64-gon
        let sagitta = 1.0 - (PI / 64.0).cos();
        for p in r.points() {
            assert!((p.norm() - 1.0).abs() <= sagitta + 1e-12);
        }
        let fine = Contour::circle(256, 1.0)
            .unwrap()
            .resample_arclength(128)
            .unwrap();
        for p in fine.points() {
            assert!((p.norm() - 1.0).abs() < 1e-3);
        }
        assert!(r.area() > 0.0);
    }

    #[test]
    fn resample_equispaced_is_identity() {
        let c = Contour::circle(100, 1.3).unwrap();
        let r = c.resample_arclength(100).unwrap();
        for (p, q) in c.points().iter().zip(r.points()) {
            assert!(p.distance(*q) < 1e-12);
        }
    }

    #[test]
    fn resample_square_keeps_perimeter() {
        let sq = densified_square(4);
        assert_eq!(sq.len(), 16);
        let r = sq.resample_arclength(32).unwrap();
        assert!((r.perimeter() - sq.perimeter()).abs() < 1e-12);
        assert!((r.perimeter() - 4.0).abs() < 1e-12);
        assert!(matches!(
            sq.resample_arclength(8),
            Err(ShapeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn circle_normals_are_radial() {
        let n = 128;
        let c = Contour::circle(n, 1.0).unwrap();
        let normals = c.normal_field().unwrap();
        for (nv, t) in normals.vectors.iter().zip(angles(n)) {
            assert!((nv.norm() - 1.0).abs() < 1e-12);
            assert!(nv.distance(Vec2::new(t.cos(), t.sin())) < 1.0 / (n * n) as f64);
        }
    }

    #[test]
    fn ellipse_normals_match_analytic() {
        let n = 256;
        let pts: Vec<Vec2> = angles(n)
            .iter()
            .map(|&t| Vec2::new(2.0 * t.cos(), t.sin()))
            .collect();
        let c = Contour::new(pts).unwrap();
        let normals = c.normal_field().unwrap();
        let mut worst: f64 = 0.0;
        for (nv, t) in normals.vectors.iter().zip(angles(n)) {
            let exact = Vec2::new(t.cos(), 2.0 * t.sin());
            worst = worst.max(nv.distance(exact / exact.norm()));
        }
        assert!(worst < 1e-3, "worst normal error {worst}");
    }

    #[test]
    fn areas() {
        let n = 256;
        let c1 = Contour::circle(n, 1.0).unwrap();
        let inscribed = 0.5 * n as f64 * (TAU / n as f64).sin();
        assert!((c1.area() - inscribed).abs() < 1e-12);
        assert!((c1.area() - PI).abs() / PI < 1e-3);
        let c2 = Contour::circle(n, 2.0).unwrap();
        assert!((c2.area() / c1.area() - 4.0).abs() < 1e-14);
        assert!((densified_square(4).area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_integrals() {
        let n = 256;
        let c = Contour::circle(n, 1.0).unwrap();
        let ones = BoundaryScalarField::new(vec![1.0; n]);
        assert!((c.boundary_integral(&ones).unwrap() - TAU).abs() / TAU < 1e-3);
        let cos = BoundaryScalarField::new(angles(n).iter().map(|t| t.cos()).collect());
        assert!(c.boundary_integral(&cos).unwrap().abs() < 1e-8);
        assert_eq!(
            c.boundary_integral(&BoundaryScalarField::zeros(n)).unwrap(),
            0.0
        );
        assert!(c
            .boundary_integral(&BoundaryScalarField::zeros(n - 1))
            .is_err());
    }

    #[test]
    fn shape_derivative_cases() {
        let n = 256;
        let c = Contour::circle(n, 1.0).unwrap();
        let ones = BoundaryScalarField::new(vec![1.0; n]);
        // d/dt π(1+t)² at t = 0
        let growth = c.shape_derivative(&ones, |_| 1.0).unwrap();
        assert!((growth - TAU).abs() / TAU < 1e-3);
        assert_eq!(growth, c.boundary_integral(&ones).unwrap());
        assert_eq!(
            c.shape_derivative(&BoundaryScalarField::zeros(n), |p| p.x + 3.0)
                .unwrap(),
            0.0
        );
        assert!(c.shape_derivative(&ones, |p| p.x).unwrap().abs() < 1e-8);
    }

    #[test]
    fn horizontal_projection() {
        let n = 128;
        let c = Contour::circle(n, 1.0).unwrap();
        let normals = c.normal_field().unwrap();
        let tangents = c.tangent_field().unwrap();
        for v in c.horizontal_project(&normals).unwrap().values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        for v in c.horizontal_project(&tangents).unwrap().values {
            assert!(v.abs() < 1e-12);
        }
        let ex = BoundaryVectorField {
            vectors: vec![Vec2::new(1.0, 0.0); n],
        };
        for (v, t) in c
            .horizontal_project(&ex)
            .unwrap()
            .values
            .iter()
            .zip(angles(n))
        {
            assert!((v - t.cos()).abs() < 1e-3);
        }
    }

    #[test]
    fn json_round_trip_validates() {
        let c = Contour::circle(20, 1.0).unwrap();
        let back = Contour::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(Contour::from_json(r#"{"points": [[0,0],[1,0],[0,1]]}"#).is_err());
        let g = BoundaryScalarField::from_json(r#"{"values": [1, 2.5]}"#).unwrap();
        assert_eq!(g.values, vec![1.0, 2.5]);
    }
}
