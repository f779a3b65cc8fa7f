//! Exact convex-polygon arithmetic: areas, half-plane clipping, affine
//! images, shared boundary lengths.
//!
//! Everything downstream (partitions, transfer matrices, comparison sets)
//! reduces to intersections and areas of convex polygons, so clipping here
//! is exact up to floating point. Conventions:
//!
//! - Polygons are counter-clockwise vertex lists; the empty polygon is a
//!   first-class value (clipping disjoint sets yields it).
//! - Point-on-edge classification uses [`EDGE_TOL`] in coordinate units;
//!   clip outputs with area below [`AREA_EPS`] collapse to empty. The
//!   underlying theory works mod sets of measure zero; the thresholds make
//!   that operational.

use nalgebra::{Matrix2, Vector2};

use crate::{Error, Result};

/// A point of the plane.
pub type Point2 = Vector2<f64>;

/// Point-on-edge classification tolerance, in coordinate units.
pub const EDGE_TOL: f64 = 1e-12;

/// Polygons with area below this are normalized to empty.
pub const AREA_EPS: f64 = 1e-14;

/// Convex polygon as a counter-clockwise vertex list; may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Validating constructor: requires at least 3 finite vertices forming a
    /// convex, counter-clockwise, positive-area polygon.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "{} vertices, need at least 3",
                vertices.len()
            )));
        }
        if vertices
            .iter()
            .any(|v| !v.x.is_finite() || !v.y.is_finite())
        {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let p = Polygon { vertices };
        let signed = p.signed_area();
        if signed <= 0.0 {
            return Err(Error::InvalidPolygon(format!(
                "not counter-clockwise or degenerate (signed area {signed:e})"
            )));
        }
        // Convexity: every turn is left (within tolerance scaled by edge length).
        let n = p.vertices.len();
        for i in 0..n {
            let a = p.vertices[i];
            let b = p.vertices[(i + 1) % n];
            let c = p.vertices[(i + 2) % n];
            let ab = b - a;
            let cr = cross(ab, c - b);
            if cr < -EDGE_TOL * ab.norm().max(1.0) {
                return Err(Error::InvalidPolygon(format!(
                    "reflex turn at vertex {} (cross {cr:e})",
                    (i + 1) % n
                )));
            }
        }
        Ok(p)
    }

    /// The empty polygon.
    pub fn empty() -> Self {
        Polygon {
            vertices: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Normalizes a raw clip-output chain: deduplicates near-coincident
    /// consecutive vertices, enforces counter-clockwise order, and collapses
    /// anything below the degeneracy threshold to empty.
    fn from_chain(mut chain: Vec<Point2>) -> Self {
        if chain.len() >= 2 {
            let mut dedup: Vec<Point2> = Vec::with_capacity(chain.len());
            for p in chain.drain(..) {
                if dedup.last().is_none_or(|q| (p - q).norm() > EDGE_TOL) {
                    dedup.push(p);
                }
            }
            while dedup.len() >= 2 && (dedup[0] - *dedup.last().unwrap()).norm() <= EDGE_TOL {
                dedup.pop();
            }
            chain = dedup;
        }
        if chain.len() < 3 {
            return Polygon::empty();
        }
        let mut p = Polygon { vertices: chain };
        if p.signed_area() < 0.0 {
            p.vertices.reverse();
        }
        if p.signed_area().abs() < AREA_EPS {
            return Polygon::empty();
        }
        p
    }

    fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = Kahan::new();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc.add(a.x * b.y - b.x * a.y);
        }
        acc.sum() / 2.0
    }

    /// Shoelace area; 0 for the empty polygon.
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.signed_area().abs()
        }
    }

    /// Total boundary length; 0 for the empty polygon.
    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = Kahan::new();
        for i in 0..n {
            acc.add((self.vertices[(i + 1) % n] - self.vertices[i]).norm());
        }
        acc.sum()
    }

    /// Area centroid. Falls back to the vertex mean for near-degenerate
    /// polygons (not produced by normalized clipping).
    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let a = self.signed_area();
        if a.abs() < AREA_EPS {
            let mut c = Point2::zeros();
            for v in &self.vertices {
                c += v;
            }
            return c / (n.max(1) as f64);
        }
        let mut cx = Kahan::new();
        let mut cy = Kahan::new();
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.x * q.y - q.x * p.y;
            cx.add((p.x + q.x) * w);
            cy.add((p.y + q.y) * w);
        }
        Point2::new(cx.sum() / (6.0 * a), cy.sum() / (6.0 * a))
    }

    /// Membership test with a boundary tolerance in coordinate units.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let ab = b - a;
            if cross(ab, p - a) < -tol * ab.norm().max(1.0) {
                return false;
            }
        }
        true
    }

    /// Axis-aligned bounding box `(min, max)`; `None` for empty.
    pub fn bounding_box(&self) -> Option<(Point2, Point2)> {
        let first = *self.vertices.first()?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices[1..] {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        Some((lo, hi))
    }
}

/// Affine map of the plane, `x ↦ L·x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap2 {
    pub linear: Matrix2<f64>,
    pub translation: Vector2<f64>,
}

impl AffineMap2 {
    pub fn new(linear: Matrix2<f64>, translation: Vector2<f64>) -> Self {
        AffineMap2 {
            linear,
            translation,
        }
    }

    pub fn identity() -> Self {
        AffineMap2::new(Matrix2::identity(), Vector2::zeros())
    }

    /// Uniform scaling about the origin.
    pub fn scaling(s: f64) -> Self {
        AffineMap2::new(Matrix2::identity() * s, Vector2::zeros())
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        self.linear * p + self.translation
    }

    pub fn det(&self) -> f64 {
        self.linear.determinant()
    }

    /// Exact affine inverse; errors when the linear part is singular.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.abs() < 1e-12 {
            return Err(Error::SingularAffine(det.abs()));
        }
        let inv = self
            .linear
            .try_inverse()
            .ok_or(Error::SingularAffine(det.abs()))?;
        Ok(AffineMap2::new(inv, -(inv * self.translation)))
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        AffineMap2::new(
            self.linear * other.linear,
            self.linear * other.translation + self.translation,
        )
    }

    /// Operator norm (largest singular value) of the linear part, in closed
    /// form for 2×2 matrices.
    pub fn operator_norm(&self) -> f64 {
        let m = &self.linear;
        let frob2 = m.m11 * m.m11 + m.m12 * m.m12 + m.m21 * m.m21 + m.m22 * m.m22;
        let det = m.determinant();
        let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0);
        ((frob2 + disc.sqrt()) / 2.0).sqrt()
    }
}

#[inline]
fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Clips `subject` against the closed half-plane on the left of the directed
/// line `a → b` (the inside of a counter-clockwise edge).
pub fn clip_halfplane(subject: &Polygon, a: Point2, b: Point2) -> Polygon {
    if subject.is_empty() {
        return Polygon::empty();
    }
    let dir = b - a;
    let scale = dir.norm().max(1.0);
    let verts = subject.vertices();
    let mut out: Vec<Point2> = Vec::with_capacity(verts.len() + 2);
    let n = verts.len();
    for i in 0..n {
        let cur = verts[i];
        let nxt = verts[(i + 1) % n];
        let d_cur = cross(dir, cur - a);
        let d_nxt = cross(dir, nxt - a);
        let in_cur = d_cur >= -EDGE_TOL * scale;
        let in_nxt = d_nxt >= -EDGE_TOL * scale;
        if in_cur {
            out.push(cur);
        }
        if in_cur != in_nxt {
            // Edge crosses the boundary line; d is an affine function of the
            // parameter, so the crossing point is the linear interpolant.
            let s = d_cur / (d_cur - d_nxt);
            out.push(cur + (nxt - cur) * s);
        }
    }
    Polygon::from_chain(out)
}

/// Intersection of two convex polygons (Sutherland–Hodgman half-plane
/// clipping of `subject` against each edge of `clip`).
pub fn clip_convex(subject: &Polygon, clip: &Polygon) -> Polygon {
    if subject.is_empty() || clip.is_empty() {
        return Polygon::empty();
    }
    let mut acc = subject.clone();
    let verts = clip.vertices();
    let n = verts.len();
    for i in 0..n {
        acc = clip_halfplane(&acc, verts[i], verts[(i + 1) % n]);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Image of a polygon under an affine map, re-normalized to counter-clockwise
/// order (orientation flips when `det < 0`, as for branch 1 of the tent map).
pub fn apply_affine(f: &AffineMap2, p: &Polygon) -> Polygon {
    if p.is_empty() {
        return Polygon::empty();
    }
    Polygon::from_chain(p.vertices().iter().map(|&v| f.apply(v)).collect())
}

/// Length of the one-dimensional overlap of the boundaries of `a` and `b`
/// (0 when they meet in at most a point). Intended for cells of a common
/// partition, whose boundaries overlap along collinear edge segments.
pub fn shared_edge_length(a: &Polygon, b: &Polygon) -> f64 {
    let mut total = Kahan::new();
    let va = a.vertices();
    let vb = b.vertices();
    let na = va.len();
    let nb = vb.len();
    for i in 0..na {
        let p1 = va[i];
        let p2 = va[(i + 1) % na];
        let d = p2 - p1;
        let len = d.norm();
        if len <= EDGE_TOL {
            continue;
        }
        let dir = d / len;
        for j in 0..nb {
            let q1 = vb[j];
            let q2 = vb[(j + 1) % nb];
            // Both endpoints of the other edge must lie on this edge's line.
            if cross(dir, q1 - p1).abs() > EDGE_TOL || cross(dir, q2 - p1).abs() > EDGE_TOL {
                continue;
            }
            let (t1, t2) = ((q1 - p1).dot(&dir), (q2 - p1).dot(&dir));
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let overlap = hi.min(len) - lo.max(0.0);
            if overlap > EDGE_TOL {
                total.add(overlap);
            }
        }
    }
    total.sum()
}

/// Compensated (Kahan) accumulator. Reductions all run in a fixed order, so
/// results are identical regardless of thread count.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    s: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.s
    }
}
