//! Planar primitives on `f64` polygons: orientation, containment, distances,
//! inscribed circles and disk/polygon intersection areas.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point { x: p[0], y: p[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, c: f64) -> Point {
        Point::new(self.x * c, self.y * c)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    pub fn lex_cmp(&self, o: &Point) -> Ordering {
        self.x.total_cmp(&o.x).then(self.y.total_cmp(&o.y))
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(pts: &[Point]) -> BBox {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Euclidean distance between boxes (0 when they touch or overlap).
    pub fn distance(&self, o: &BBox) -> f64 {
        let dx = (o.min.x - self.max.x).max(self.min.x - o.max.x).max(0.0);
        let dy = (o.min.y - self.max.y).max(self.min.y - o.max.y).max(0.0);
        dx.hypot(dy)
    }
}

/// Twice the signed area; positive for counter-clockwise vertex order.
pub fn signed_area2(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum()
}

pub fn area(poly: &[Point]) -> f64 {
    signed_area2(poly).abs() / 2.0
}

pub fn perimeter(poly: &[Point]) -> f64 {
    edges(poly).map(|(a, b)| a.dist(b)).sum()
}

pub fn edges(poly: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = poly.len();
    (0..n).map(move |i| (poly[i], poly[(i + 1) % n]))
}

pub fn centroid(poly: &[Point]) -> Point {
    let a2 = signed_area2(poly);
    if a2.abs() < f64::MIN_POSITIVE {
        let n = poly.len() as f64;
        let s = poly.iter().fold(Point::new(0.0, 0.0), |acc, p| acc.add(*p));
        return s.scale(1.0 / n);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for (p, q) in edges(poly) {
        let c = p.cross(q);
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

/// Largest vertex-to-vertex distance.
pub fn diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            d = d.max(poly[i].dist(poly[j]));
        }
    }
    d
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

/// Closest point on segment `ab` to `p`, with its parameter in `[0,1]`.
pub fn project_on_segment(p: Point, a: Point, b: Point) -> (Point, f64) {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    (a.add(ab.scale(t)), t)
}

/// Sign of the turn `a -> b -> c` with a relative dead band.
pub fn orient(a: Point, b: Point, c: Point, eps: f64) -> i8 {
    let v = b.sub(a).cross(c.sub(a));
    let scale = b.sub(a).norm() * c.sub(a).norm();
    if v.abs() <= eps * scale {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// True when the open segments cross at a single interior point of both.
pub fn segments_cross_properly(a: Point, b: Point, c: Point, d: Point, eps: f64) -> bool {
    let o1 = orient(a, b, c, eps);
    let o2 = orient(a, b, d, eps);
    let o3 = orient(c, d, a, eps);
    let o4 = orient(c, d, b, eps);
    o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 && o1 != o2 && o3 != o4
}

pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_cross_properly(a, b, c, d, 0.0) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Crossing-number containment test; boundary points may go either way.
pub fn contains(poly: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn boundary_distance(poly: &[Point], p: Point) -> f64 {
    edges(poly)
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Signed distance: positive inside, negative outside.
pub fn signed_distance(poly: &[Point], p: Point) -> f64 {
    let d = boundary_distance(poly, p);
    if contains(poly, p) {
        d
    } else {
        -d
    }
}

/// Strictly inside, at least `tol` away from the boundary.
pub fn strictly_inside(poly: &[Point], p: Point, tol: f64) -> bool {
    contains(poly, p) && boundary_distance(poly, p) > tol
}

/// Distance between the closed regions bounded by two simple polygons.
pub fn polygon_distance(a: &[Point], b: &[Point]) -> f64 {
    if contains(a, b[0]) || contains(b, a[0]) {
        return 0.0;
    }
    let mut d = f64::INFINITY;
    for (p, q) in edges(a) {
        for (r, s) in edges(b) {
            d = d.min(segment_distance(p, q, r, s));
            if d == 0.0 {
                return 0.0;
            }
        }
    }
    d
}

pub fn is_simple(poly: &[Point], eps: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a.dist(b) == 0.0 {
            return false;
        }
        for j in i + 1..n {
            // adjacent edges share a vertex; skip them
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross_properly(a, b, c, d, eps) {
                return false;
            }
            let scale = a.dist(b).max(c.dist(d));
            if segment_distance(a, b, c, d) <= eps * scale {
                return false;
            }
        }
    }
    true
}

/// Rotate a vertex list so it starts at its lexicographically smallest vertex.
pub fn canonical_rotation(poly: &[Point]) -> Vec<Point> {
    let start = poly
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.lex_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    poly[start..].iter().chain(poly[..start].iter()).copied().collect()
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    c: Point,
    half: f64,
    d: f64,
    potential: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.potential.total_cmp(&o.potential) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.potential.total_cmp(&o.potential)
    }
}

impl Cell {
    fn new(poly: &[Point], c: Point, half: f64) -> Cell {
        let d = signed_distance(poly, c);
        Cell {
            c,
            half,
            d,
            potential: d + half * std::f64::consts::SQRT_2,
        }
    }
}

/// Center and radius of the largest inscribed circle (pole of
/// inaccessibility), found by best-first quadtree subdivision.
pub fn chebyshev_center(poly: &[Point], rel_precision: f64) -> (Point, f64) {
    let bb = BBox::of(poly);
    let size = bb.width().min(bb.height());
    let precision = rel_precision * bb.width().max(bb.height());
    if size <= 0.0 {
        return (bb.min, 0.0);
    }
    let mut best = Cell::new(poly, centroid(poly), 0.0);
    let bbox_center = Point::new(
        (bb.min.x + bb.max.x) / 2.0,
        (bb.min.y + bb.max.y) / 2.0,
    );
    let bc = Cell::new(poly, bbox_center, 0.0);
    if bc.d > best.d {
        best = bc;
    }
    let mut heap = BinaryHeap::new();
    let half = size / 2.0;
    let mut x = bb.min.x;
    while x < bb.max.x {
        let mut y = bb.min.y;
        while y < bb.max.y {
            heap.push(Cell::new(poly, Point::new(x + half, y + half), half));
            y += size;
        }
        x += size;
    }
    // elongated shapes have a whole segment of optimal centers; the cap keeps
    // refinement along such a plateau bounded
    let mut budget = 200_000usize;
    while let Some(cell) = heap.pop() {
        if budget == 0 {
            break;
        }
        budget -= 1;
        if cell.d > best.d {
            best = cell;
        }
        if cell.potential - best.d <= precision {
            continue;
        }
        let h = cell.half / 2.0;
        for (dx, dy) in [(-h, -h), (h, -h), (-h, h), (h, h)] {
            heap.push(Cell::new(poly, Point::new(cell.c.x + dx, cell.c.y + dy), h));
        }
    }
    (best.c, best.d.max(0.0))
}

/// Signed area of the intersection of the disk `|z| <= r` with triangle
/// `(0, a, b)`.
fn disk_triangle_area(a: Point, b: Point, r: f64) -> f64 {
    let d = b.sub(a);
    let qa = d.dot(d);
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * a.dot(d);
    let qc = a.dot(a) - r * r;
    let mut ts = vec![0.0];
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.push(1.0);
    let mut total = 0.0;
    for w in ts.windows(2) {
        let p = a.add(d.scale(w[0]));
        let q = a.add(d.scale(w[1]));
        let m = a.add(d.scale((w[0] + w[1]) / 2.0));
        if m.dot(m) <= r * r {
            total += p.cross(q) / 2.0;
        } else {
            total += r * r * p.cross(q).atan2(p.dot(q)) / 2.0;
        }
    }
    total
}

/// Area of `B(center, r)` intersected with the polygon.
pub fn disk_polygon_area(poly: &[Point], center: Point, r: f64) -> f64 {
    edges(poly)
        .map(|(a, b)| disk_triangle_area(a.sub(center), b.sub(center), r))
        .sum::<f64>()
        .abs()
}
