//! Finite carpet approximations: an outer polygon with four marked sides and
//! a list of polygonal peripheral disks.

mod io;
pub mod polygon;

pub use io::{load_carpet, parse_carpet, save_carpet, to_canonical_json};
pub use polygon::{BBox, Point};

use crate::error::{Error, Result};
use polygon::{
    area, canonical_rotation, chebyshev_center, contains, diameter, disk_polygon_area, edges,
    is_simple, polygon_distance, project_on_segment, segments_cross_properly, signed_area2,
    strictly_inside,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The four marked boundary arcs, in counter-clockwise order. The potential
/// is 0 on `Left` and 1 on `Right`; the conjugate is 0 on `Bottom` and equals
/// the modulus on `Top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Bottom,
    Right,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Bottom, Side::Right, Side::Top];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Side {
        Side::ALL[i % 4]
    }

    pub fn opposite(self) -> Side {
        Side::from_index(self.index() + 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeripheralDisk {
    pub id: u64,
    pub polygon: Vec<Point>,
    /// Chebyshev center: the common center of the inscribed and
    /// circumscribed balls.
    pub center: Point,
    pub inradius: f64,
    pub circumradius: f64,
    pub diameter: f64,
    pub area: f64,
    pub bbox: BBox,
}

impl PeripheralDisk {
    pub fn new(id: u64, polygon: Vec<Point>) -> PeripheralDisk {
        let (center, inradius) = if polygon.len() >= 3 {
            chebyshev_center(&polygon, 1e-10)
        } else {
            (polygon.first().copied().unwrap_or(Point::new(0.0, 0.0)), 0.0)
        };
        let circumradius = polygon
            .iter()
            .map(|p| p.dist(center))
            .fold(0.0, f64::max);
        PeripheralDisk {
            id,
            diameter: diameter(&polygon),
            area: area(&polygon),
            bbox: BBox::of(&polygon),
            polygon,
            center,
            inradius,
            circumradius,
        }
    }

    /// Quasiball ratio `R / r`.
    pub fn k0(&self) -> f64 {
        if self.inradius > 0.0 {
            self.circumradius / self.inradius
        } else {
            f64::INFINITY
        }
    }

    /// Lower estimate of the fatness constant: the smallest ratio
    /// `area(B(x, r) ∩ Q) / r²` over sampled centers on the disk (vertices,
    /// edge midpoints, Chebyshev center) and radii up to the diameter.
    pub fn k1_estimate(&self) -> f64 {
        let mut centers = self.polygon.clone();
        centers.extend(edges(&self.polygon).map(|(a, b)| a.add(b).scale(0.5)));
        centers.push(self.center);
        let mut k1 = f64::INFINITY;
        for x in centers {
            for frac in [1.0 / 16.0, 0.125, 0.25, 0.5, 0.999] {
                let r = frac * self.diameter;
                if r <= 0.0 {
                    continue;
                }
                k1 = k1.min(disk_polygon_area(&self.polygon, x, r) / (r * r));
            }
        }
        k1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarpetConfig {
    /// Counter-clockwise outer boundary. Arc-length fractions in `marks` are
    /// measured from `outer[0]`.
    pub outer: Vec<Point>,
    pub marks: [f64; 4],
    pub disks: Vec<PeripheralDisk>,
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub x: f64,
    pub y: f64,
    pub side: f64,
}

impl Square {
    pub fn new(x: f64, y: f64, side: f64) -> Square {
        Square { x, y, side }
    }

    pub fn polygon(&self) -> Vec<Point> {
        rect_polygon(self.x, self.y, self.x + self.side, self.y + self.side)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Counter-clockwise rectangle starting at its lower-left corner.
pub fn rect_polygon(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ]
}

/// Outer boundary and marks for a rectangle whose left edge is `Left`.
fn rect_outer(r: &Rect) -> (Vec<Point>, [f64; 4]) {
    let outer = vec![
        Point::new(r.x0, r.y1),
        Point::new(r.x0, r.y0),
        Point::new(r.x1, r.y0),
        Point::new(r.x1, r.y1),
    ];
    let (w, h) = (r.width(), r.height());
    let p = 2.0 * (w + h);
    (outer, [0.0, h / p, (h + w) / p, (2.0 * h + w) / p])
}

impl CarpetConfig {
    pub fn perimeter(&self) -> f64 {
        polygon::perimeter(&self.outer)
    }

    /// Nearest point on the outer boundary and its arc-length fraction.
    pub fn project_to_boundary(&self, p: Point) -> (Point, f64) {
        let total = self.perimeter();
        let mut best = (f64::INFINITY, self.outer[0], 0.0);
        let mut acc = 0.0;
        for (a, b) in edges(&self.outer) {
            let len = a.dist(b);
            let (q, t) = project_on_segment(p, a, b);
            let d = p.dist(q);
            if d < best.0 {
                best = (d, q, (acc + t * len) / total);
            }
            acc += len;
        }
        (best.1, best.2.rem_euclid(1.0))
    }

    pub fn side_of_fraction(&self, s: f64) -> Side {
        let m = &self.marks;
        for k in 0..3 {
            if s >= m[k] && s < m[k + 1] {
                return Side::from_index(k);
            }
        }
        Side::Top
    }

    pub fn side_of_point(&self, p: Point) -> Side {
        self.side_of_fraction(self.project_to_boundary(p).1)
    }

    pub fn point_at_fraction(&self, s: f64) -> Point {
        let total = self.perimeter();
        let mut target = s.rem_euclid(1.0) * total;
        for (a, b) in edges(&self.outer) {
            let len = a.dist(b);
            if target <= len {
                return a.add(b.sub(a).scale(if len > 0.0 { target / len } else { 0.0 }));
            }
            target -= len;
        }
        self.outer[0]
    }

    /// Vertices of one marked side, from its starting mark to its end mark.
    pub fn side_polyline(&self, side: Side) -> Vec<Point> {
        let k = side.index();
        let start = self.marks[k];
        let mut end = self.marks[(k + 1) % 4];
        if end <= start {
            end += 1.0;
        }
        let total = self.perimeter();
        let mut pts = vec![self.point_at_fraction(start)];
        let mut acc = 0.0;
        for lap in 0..2 {
            for (a, b) in edges(&self.outer) {
                let f = (acc + lap as f64 * total) / total;
                if f > start && f < end {
                    pts.push(a);
                }
                acc += a.dist(b);
            }
            acc = 0.0;
        }
        pts.push(self.point_at_fraction(end));
        pts
    }

    pub fn index_of_id(&self, id: u64) -> Option<usize> {
        self.disks.iter().position(|d| d.id == id)
    }

    pub fn scale(&self, c: f64) -> CarpetConfig {
        CarpetConfig {
            outer: self.outer.iter().map(|p| p.scale(c)).collect(),
            marks: self.marks,
            disks: self
                .disks
                .iter()
                .map(|d| PeripheralDisk::new(d.id, d.polygon.iter().map(|p| p.scale(c)).collect()))
                .collect(),
            meta: self.meta.clone(),
        }
    }

    /// Disks sorted by id with vertex lists rotated to their lexicographically
    /// smallest vertex.
    pub fn canonical(&self) -> CarpetConfig {
        let mut disks: Vec<PeripheralDisk> = self
            .disks
            .iter()
            .map(|d| {
                let mut d = d.clone();
                d.polygon = canonical_rotation(&d.polygon);
                d
            })
            .collect();
        disks.sort_by_key(|d| d.id);
        CarpetConfig {
            outer: self.outer.clone(),
            marks: self.marks,
            disks,
            meta: self.meta.clone(),
        }
    }

    pub fn scale_length(&self) -> f64 {
        let bb = BBox::of(&self.outer);
        bb.width().max(bb.height())
    }
}

/// Standard Sierpiński carpet of generation `n` on the unit square, in the
/// augmented model: every removed middle square of generations `1..=n` plus
/// every remaining level-`n` cell is a peripheral disk. Ids run over holes
/// (by generation, then row-major from the bottom) followed by cells
/// (row-major from the bottom).
pub fn generate_standard_carpet(n: u32) -> Result<CarpetConfig> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "standard carpet generation must be at least 1".into(),
        ));
    }
    if n > 8 {
        return Err(Error::InvalidArgument(format!(
            "standard carpet generation {n} is too large (max 8)"
        )));
    }
    let units = 3u64.pow(n);
    let scale = units as f64;
    // (x, y, size) in integer units of 3^-n
    let mut cells = vec![(0u64, 0u64, units)];
    let mut holes: Vec<(u64, u64, u64)> = Vec::new();
    for _ in 0..n {
        let mut next = Vec::with_capacity(cells.len() * 8);
        let mut gen_holes = Vec::with_capacity(cells.len());
        for &(x, y, s) in &cells {
            let t = s / 3;
            for j in 0..3 {
                for i in 0..3 {
                    let c = (x + i * t, y + j * t, t);
                    if i == 1 && j == 1 {
                        gen_holes.push(c);
                    } else {
                        next.push(c);
                    }
                }
            }
        }
        gen_holes.sort_by_key(|&(x, y, _)| (y, x));
        holes.extend(gen_holes);
        cells = next;
    }
    cells.sort_by_key(|&(x, y, _)| (y, x));
    let to_f = |v: u64| v as f64 / scale;
    let disks = holes
        .iter()
        .chain(cells.iter())
        .enumerate()
        .map(|(id, &(x, y, s))| {
            PeripheralDisk::new(
                id as u64,
                rect_polygon(to_f(x), to_f(y), to_f(x + s), to_f(y + s)),
            )
        })
        .collect();
    let (outer, marks) = rect_outer(&Rect::new(0.0, 0.0, 1.0, 1.0));
    let mut meta = BTreeMap::new();
    meta.insert("generator".into(), "standard".into());
    meta.insert("level".into(), n.to_string());
    Ok(CarpetConfig {
        outer,
        marks,
        disks,
        meta,
    })
}

/// Square carpet from a tiling of `rect` by axis-parallel squares. Ids follow
/// the input order.
pub fn generate_square_carpet(tiling: &[Square], rect: Rect) -> Result<CarpetConfig> {
    if !(rect.width() > 0.0 && rect.height() > 0.0) {
        return Err(Error::InvalidTiling("rectangle has no area".into()));
    }
    if tiling.is_empty() {
        return Err(Error::InvalidTiling("empty tiling".into()));
    }
    let tol = 1e-12 * rect.width().max(rect.height());
    for (i, s) in tiling.iter().enumerate() {
        if !(s.side > 0.0) {
            return Err(Error::InvalidTiling(format!("square {i} has non-positive side")));
        }
        if s.x < rect.x0 - tol
            || s.y < rect.y0 - tol
            || s.x + s.side > rect.x1 + tol
            || s.y + s.side > rect.y1 + tol
        {
            return Err(Error::InvalidTiling(format!("square {i} leaves the rectangle")));
        }
    }
    let mut order: Vec<usize> = (0..tiling.len()).collect();
    order.sort_by(|&a, &b| tiling[a].x.total_cmp(&tiling[b].x));
    for (k, &i) in order.iter().enumerate() {
        let a = &tiling[i];
        for &j in &order[k + 1..] {
            let b = &tiling[j];
            if b.x >= a.x + a.side - tol {
                break;
            }
            let w = (a.x + a.side).min(b.x + b.side) - a.x.max(b.x);
            let h = (a.y + a.side).min(b.y + b.side) - a.y.max(b.y);
            if w > tol && h > tol {
                return Err(Error::InvalidTiling(format!(
                    "squares {} and {} overlap",
                    i.min(j),
                    i.max(j)
                )));
            }
        }
    }
    let total: f64 = tiling.iter().map(|s| s.side * s.side).sum();
    if ((total - rect.area()) / rect.area()).abs() > 1e-12 {
        return Err(Error::InvalidTiling(format!(
            "squares cover area {total} of {}",
            rect.area()
        )));
    }
    let disks = tiling
        .iter()
        .enumerate()
        .map(|(i, s)| PeripheralDisk::new(i as u64, s.polygon()))
        .collect();
    let (outer, marks) = rect_outer(&rect);
    let mut meta = BTreeMap::new();
    meta.insert("generator".into(), "square-tiling".into());
    Ok(CarpetConfig {
        outer,
        marks,
        disks,
        meta,
    })
}

/// Carpet with arbitrary square disks inside a rectangle, without the tiling
/// checks of [`generate_square_carpet`]. Used for layout images, whose squares
/// only tile up to discretization error.
pub fn square_carpet_unchecked(squares: &[(u64, Square)], rect: Rect) -> CarpetConfig {
    let disks = squares
        .iter()
        .map(|(id, s)| PeripheralDisk::new(*id, s.polygon()))
        .collect();
    let (outer, marks) = rect_outer(&rect);
    let mut meta = BTreeMap::new();
    meta.insert("generator".into(), "layout-image".into());
    CarpetConfig {
        outer,
        marks,
        disks,
        meta,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiskReport {
    pub id: u64,
    pub k0: f64,
    pub k1: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    pub disks: Vec<DiskReport>,
    pub k0_min: f64,
    pub k0_max: f64,
    pub k1_min: f64,
    /// Smallest relative distance `dist(A, B) / min(diam A, diam B)`.
    pub delta_min: f64,
    /// Disk pairs whose closures touch.
    pub touching_pairs: usize,
    /// Disks touching the outer boundary.
    pub boundary_contacts: usize,
    pub failures: Vec<String>,
}

impl GeometryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn interiors_overlap(a: &PeripheralDisk, b: &PeripheralDisk, tol: f64) -> bool {
    for (p, q) in edges(&a.polygon) {
        for (r, s) in edges(&b.polygon) {
            if segments_cross_properly(p, q, r, s, 1e-12) {
                return true;
            }
        }
    }
    let probes = |x: &PeripheralDisk| {
        let mut pts = x.polygon.clone();
        pts.extend(edges(&x.polygon).map(|(p, q)| p.add(q).scale(0.5)));
        pts.push(x.center);
        pts
    };
    probes(a).iter().any(|p| strictly_inside(&b.polygon, *p, tol))
        || probes(b).iter().any(|p| strictly_inside(&a.polygon, *p, tol))
}

fn outside_outer(outer: &[Point], d: &PeripheralDisk, tol: f64) -> bool {
    for (p, q) in edges(&d.polygon) {
        for (r, s) in edges(outer) {
            if segments_cross_properly(p, q, r, s, 1e-12) {
                return true;
            }
        }
        let m = p.add(q).scale(0.5);
        for x in [p, m] {
            if !contains(outer, x) && polygon::boundary_distance(outer, x) > tol {
                return true;
            }
        }
    }
    false
}

/// Geometric diagnostics and invariant checks. Failures are collected, never
/// raised.
pub fn validate_carpet(config: &CarpetConfig) -> GeometryReport {
    let mut failures = Vec::new();
    let tol = 1e-12 * config.scale_length().max(f64::MIN_POSITIVE);

    let m = &config.marks;
    if !m.iter().all(|v| (0.0..1.0).contains(v)) || !(m[0] < m[1] && m[1] < m[2] && m[2] < m[3]) {
        failures.push(format!("marks {m:?} must be strictly increasing in [0,1)"));
    }
    if config.outer.len() < 3 || !is_simple(&config.outer, 1e-12) {
        failures.push("outer boundary is not a simple polygon".into());
    } else if signed_area2(&config.outer) <= 0.0 {
        failures.push("outer boundary is not counter-clockwise".into());
    }
    if config.disks.is_empty() {
        failures.push("carpet has no peripheral disks".into());
    }

    let mut ids = std::collections::BTreeSet::new();
    for d in &config.disks {
        if !ids.insert(d.id) {
            failures.push(format!("duplicate disk id {}", d.id));
        }
        if d.polygon.len() < 3 || !is_simple(&d.polygon, 1e-12) {
            failures.push(format!("disk {} polygon is not simple", d.id));
            continue;
        }
        if signed_area2(&d.polygon) <= 0.0 {
            failures.push(format!("disk {} polygon is not positively oriented", d.id));
        }
        if config.outer.len() >= 3 && outside_outer(&config.outer, d, tol) {
            failures.push(format!("disk {} is not contained in the outer domain", d.id));
        }
    }

    let n = config.disks.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        config.disks[a]
            .bbox
            .min
            .x
            .total_cmp(&config.disks[b].bbox.min.x)
    });
    let mut delta_min = f64::INFINITY;
    let mut touching_pairs = 0;
    for (k, &i) in order.iter().enumerate() {
        let a = &config.disks[i];
        for &j in &order[k + 1..] {
            let b = &config.disks[j];
            let min_diam = a.diameter.min(b.diameter);
            // sorted by min.x: the x-gap only grows for later boxes
            let x_gap = b.bbox.min.x - a.bbox.max.x;
            if x_gap > tol && x_gap / a.diameter >= delta_min {
                break;
            }
            let lower = a.bbox.distance(&b.bbox);
            if lower > tol && lower / min_diam >= delta_min {
                continue;
            }
            let w = a.bbox.max.x.min(b.bbox.max.x) - a.bbox.min.x.max(b.bbox.min.x);
            let h = a.bbox.max.y.min(b.bbox.max.y) - a.bbox.min.y.max(b.bbox.min.y);
            if w > tol && h > tol && interiors_overlap(a, b, tol) {
                failures.push(format!(
                    "disks {} and {} overlap",
                    a.id.min(b.id),
                    a.id.max(b.id)
                ));
            }
            let d = polygon_distance(&a.polygon, &b.polygon);
            if d <= tol {
                touching_pairs += 1;
            }
            let rel = if d <= tol { 0.0 } else { d / min_diam };
            delta_min = delta_min.min(rel);
        }
    }
    if n < 2 {
        delta_min = f64::INFINITY;
    }

    let boundary_contacts = config
        .disks
        .iter()
        .filter(|d| {
            d.polygon
                .iter()
                .any(|p| polygon::boundary_distance(&config.outer, *p) <= tol)
        })
        .count();

    let disks: Vec<DiskReport> = config
        .disks
        .iter()
        .map(|d| DiskReport {
            id: d.id,
            k0: d.k0(),
            k1: d.k1_estimate(),
            diameter: d.diameter,
        })
        .collect();
    GeometryReport {
        k0_min: disks.iter().map(|d| d.k0).fold(f64::INFINITY, f64::min),
        k0_max: disks.iter().map(|d| d.k0).fold(0.0, f64::max),
        k1_min: disks.iter().map(|d| d.k1).fold(f64::INFINITY, f64::min),
        disks,
        delta_min,
        touching_pairs,
        boundary_contacts,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn standard_counts() {
        assert_eq!(generate_standard_carpet(1).unwrap().disks.len(), 9);
        assert_eq!(generate_standard_carpet(2).unwrap().disks.len(), 73);
        assert_eq!(generate_standard_carpet(3).unwrap().disks.len(), 585);
        assert!(matches!(
            generate_standard_carpet(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn standard_area_is_one() {
        for n in 1..=3 {
            let c = generate_standard_carpet(n).unwrap();
            let total: f64 = c.disks.iter().map(|d| d.area).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn standard_level_one_is_a_grid_of_thirds() {
        let c = generate_standard_carpet(1).unwrap();
        for d in &c.disks {
            assert_relative_eq!(d.bbox.width(), 1.0 / 3.0, epsilon = 1e-15);
            assert_relative_eq!(d.bbox.height(), 1.0 / 3.0, epsilon = 1e-15);
        }
        let r = validate_carpet(&c);
        assert!(r.passed(), "{:?}", r.failures);
        for d in &r.disks {
            assert_relative_eq!(d.k0, std::f64::consts::SQRT_2, epsilon = 1e-9);
        }
    }

    #[test]
    fn standard_level_three_touches() {
        let r = validate_carpet(&generate_standard_carpet(3).unwrap());
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.delta_min, 0.0);
    }

    #[test]
    fn sides_of_unit_square() {
        let c = generate_standard_carpet(1).unwrap();
        assert_eq!(c.side_of_point(Point::new(-0.1, 0.5)), Side::Left);
        assert_eq!(c.side_of_point(Point::new(0.5, -0.1)), Side::Bottom);
        assert_eq!(c.side_of_point(Point::new(1.1, 0.5)), Side::Right);
        assert_eq!(c.side_of_point(Point::new(0.5, 1.1)), Side::Top);
        let left = c.side_polyline(Side::Left);
        assert_eq!(left.first().copied(), Some(Point::new(0.0, 1.0)));
        assert_eq!(left.last().copied(), Some(Point::new(0.0, 0.0)));
        let top = c.side_polyline(Side::Top);
        assert_eq!(top, vec![Point::new(1.0, 1.0), Point::new(0.0, 1.0)]);
    }

    #[test]
    fn square_tilings() {
        let rect = Rect::new(0.0, 0.0, 1.0, 1.0);
        let four: Vec<Square> = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)]
            .iter()
            .map(|&(x, y)| Square::new(x, y, 0.5))
            .collect();
        let c = generate_square_carpet(&four, rect).unwrap();
        assert_eq!(c.disks.len(), 4);
        assert_eq!(validate_carpet(&c).delta_min, 0.0);

        let short = &four[..3];
        let mut partial = short.to_vec();
        partial.push(Square::new(0.5, 0.5, 0.4));
        assert!(matches!(
            generate_square_carpet(&partial, rect),
            Err(Error::InvalidTiling(_))
        ));
        let mut overlapping = four.clone();
        overlapping[3] = Square::new(0.4, 0.5, 0.5);
        assert!(generate_square_carpet(&overlapping, rect).is_err());
    }

    #[test]
    fn standard_reingested_as_tiling() {
        let c = generate_standard_carpet(1).unwrap();
        let squares: Vec<Square> = c
            .disks
            .iter()
            .map(|d| Square::new(d.bbox.min.x, d.bbox.min.y, d.bbox.width()))
            .collect();
        let t = generate_square_carpet(&squares, Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!(t.outer, c.outer);
        assert_eq!(t.marks, c.marks);
        for (a, b) in t.disks.iter().zip(&c.disks) {
            for (p, q) in a.polygon.iter().zip(&b.polygon) {
                assert!(p.dist(*q) < 1e-15);
            }
        }
    }

    #[test]
    fn relative_distance_definition() {
        // diameters 2 and 4 at distance 1
        let a = PeripheralDisk::new(0, rect_polygon(0.0, 0.0, 2.0f64.sqrt(), 2.0f64.sqrt()));
        let s = 8.0f64.sqrt();
        let x0 = 2.0f64.sqrt() + 1.0;
        let b = PeripheralDisk::new(1, rect_polygon(x0, 0.0, x0 + s, s));
        let (outer, marks) = rect_outer(&Rect::new(-1.0, -1.0, 10.0, 10.0));
        let c = CarpetConfig {
            outer,
            marks,
            disks: vec![a, b],
            meta: BTreeMap::new(),
        };
        let r = validate_carpet(&c);
        assert!(r.passed(), "{:?}", r.failures);
        assert_relative_eq!(r.delta_min, 0.5, epsilon = 1e-12);
        assert_eq!(r.touching_pairs, 0);
    }

    #[test]
    fn overlapping_disks_are_reported() {
        let mut c = generate_standard_carpet(1).unwrap();
        let moved = c.disks[1].polygon.iter().map(|p| p.add(Point::new(0.1, 0.0))).collect();
        c.disks[1] = PeripheralDisk::new(c.disks[1].id, moved);
        let r = validate_carpet(&c);
        assert!(r.failures.iter().any(|f| f.contains("disks 1 and 2 overlap")), "{:?}", r.failures);
    }

    #[test]
    fn scaling_leaves_shape_constants() {
        let c = generate_standard_carpet(2).unwrap();
        let r1 = validate_carpet(&c);
        let r2 = validate_carpet(&c.scale(3.5));
        assert_relative_eq!(r1.k0_max, r2.k0_max, epsilon = 1e-9);
        assert_relative_eq!(r1.k1_min, r2.k1_min, epsilon = 1e-9);
        assert_eq!(r1.delta_min, r2.delta_min);
        for (a, b) in r1.disks.iter().zip(&r2.disks) {
            assert_relative_eq!(b.diameter, 3.5 * a.diameter, epsilon = 1e-12);
        }
    }
}
