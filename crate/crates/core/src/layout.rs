//! Square-carpet image `f = (u, v)`: disk `i` goes to the square
//! `[u⁻, u⁻ + ρ] × [v̂, v̂ + ρ]` inside `[0, 1] × [0, D]`.

use crate::conjugate::ConjugateSolution;
use crate::error::{Error, Result};
use crate::geometry::polygon::{contains, point_segment_distance};
use crate::geometry::{square_carpet_unchecked, CarpetConfig, Point, Rect, Side, Square};
use crate::modulus::{solve_modulus, ModulusProblem, Tolerances};
use crate::passage::{build_passage_graph, default_resolution, PassageGraph};
use crate::potential::HarmonicSolution;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacedSquare {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareLayout {
    /// Height of the image rectangle; its width is 1.
    pub d: f64,
    pub squares: Vec<PlacedSquare>,
    /// Ids of zero-size squares.
    pub degenerate: Vec<u64>,
}

impl SquareLayout {
    /// `{"rect": [0, 1, 0, D], "squares": [{"id", "x", "y", "s"}], "degenerate": [ids]}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rect": [0.0, 1.0, 0.0, self.d],
            "squares": self.squares,
            "degenerate": self.degenerate,
        })
    }

    /// Squares poking out of the rectangle by more than `eps`.
    pub fn outside_rect(&self, eps: f64) -> Vec<u64> {
        self.squares
            .iter()
            .filter(|q| q.x < -eps || q.y < -eps || q.x + q.s > 1.0 + eps || q.y + q.s > self.d + eps)
            .map(|q| q.id)
            .collect()
    }
}

pub fn build_layout(
    sol: &HarmonicSolution,
    conj: &ConjugateSolution,
    eps_lambda: f64,
) -> Result<SquareLayout> {
    if sol.n() != conj.v_hat.len() {
        return Err(Error::Mismatch(format!(
            "potential has {} disks, conjugate {}",
            sol.n(),
            conj.v_hat.len()
        )));
    }
    let squares = (0..sol.n())
        .map(|i| PlacedSquare {
            id: sol.disk_ids[i],
            x: sol.u_minus[i],
            y: conj.v_hat[i],
            s: sol.rho[i],
        })
        .collect();
    let degenerate = (0..sol.n())
        .filter(|&i| sol.rho[i] <= eps_lambda)
        .map(|i| sol.disk_ids[i])
        .collect();
    Ok(SquareLayout {
        d: sol.energy,
        squares,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCheck {
    /// Largest `u⁻` over Left-side disks.
    pub left: f64,
    /// Largest `1 − u⁺` over Right-side disks.
    pub right: f64,
    /// Largest `v̂` over Bottom-side disks.
    pub bottom: f64,
    /// Largest `D − v⁺` over Top-side disks.
    pub top: f64,
}

impl BoundaryCheck {
    pub fn worst(&self) -> f64 {
        self.left.max(self.right).max(self.bottom).max(self.top)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutReport {
    /// `Σ_{a<b} area(S_a ∩ S_b)`.
    pub overlap_area: f64,
    /// `D − area(⋃ S_i ∩ rect)`, floored at zero.
    pub coverage_deficit: f64,
    pub boundary: BoundaryCheck,
}

/// Union area and pairwise overlap of axis-parallel rectangles
/// `(x0, y0, x1, y1)`, by sweeping slabs between consecutive x-coordinates.
pub fn union_and_overlap(rects: &[(f64, f64, f64, f64)]) -> (f64, f64) {
    let rects: Vec<_> = rects.iter().copied().filter(|r| r.2 > r.0 && r.3 > r.1).collect();
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.0, r.2]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r.1, r.3]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let y_index = |y: f64| ys.binary_search_by(|v| v.total_cmp(&y)).unwrap();
    let spans: Vec<(usize, usize)> = rects.iter().map(|r| (y_index(r.1), y_index(r.3))).collect();
    let mut order: Vec<usize> = (0..rects.len()).collect();
    order.sort_by(|&a, &b| rects[a].0.total_cmp(&rects[b].0));

    let (mut union, mut overlap) = (0.0, 0.0);
    let mut active: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut count = vec![0i64; ys.len()];
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        while next < order.len() && rects[order[next]].0 <= x0 {
            active.push(order[next]);
            next += 1;
        }
        active.retain(|&k| rects[k].2 > x0);
        if active.is_empty() {
            continue;
        }
        count.iter_mut().for_each(|c| *c = 0);
        for &k in &active {
            count[spans[k].0] += 1;
            count[spans[k].1] -= 1;
        }
        let (mut c, mut len_union, mut len_pairs) = (0i64, 0.0, 0.0);
        for yi in 0..ys.len() - 1 {
            c += count[yi];
            let dy = ys[yi + 1] - ys[yi];
            if c >= 1 {
                len_union += dy;
            }
            if c >= 2 {
                len_pairs += dy * (c * (c - 1) / 2) as f64;
            }
        }
        union += len_union * (x1 - x0);
        overlap += len_pairs * (x1 - x0);
    }
    (union, overlap)
}

pub fn verify_layout(layout: &SquareLayout, g: &PassageGraph, sol: &HarmonicSolution) -> LayoutReport {
    let clip = |q: &PlacedSquare| {
        (
            q.x.max(0.0),
            q.y.max(0.0),
            (q.x + q.s).min(1.0),
            (q.y + q.s).min(layout.d),
        )
    };
    let raw: Vec<_> = layout.squares.iter().map(|q| (q.x, q.y, q.x + q.s, q.y + q.s)).collect();
    let clipped: Vec<_> = layout.squares.iter().map(clip).collect();
    let (_, overlap) = union_and_overlap(&raw);
    let (union, _) = union_and_overlap(&clipped);
    let worst = |side: Side, f: &dyn Fn(usize) -> f64| {
        g.side_disks(side).into_iter().map(f).fold(0.0, f64::max)
    };
    let sq = &layout.squares;
    let boundary = BoundaryCheck {
        left: worst(Side::Left, &|i| sol.u_minus[i]),
        right: worst(Side::Right, &|i| 1.0 - sol.u_plus[i]),
        bottom: worst(Side::Bottom, &|i| sq[i].y),
        top: worst(Side::Top, &|i| layout.d - (sq[i].y + sq[i].s)),
    };
    LayoutReport {
        overlap_area: overlap.max(0.0),
        coverage_deficit: (layout.d - union).max(0.0),
        boundary,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub domain_lr: f64,
    pub domain_bt: f64,
    pub image_lr: f64,
    pub image_bt: f64,
    pub mismatch_lr: f64,
    pub mismatch_bt: f64,
    pub image_product: f64,
    /// Set when the image carpet could not be solved.
    pub error: Option<String>,
}

impl PushforwardReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.error.is_none()
            && self.mismatch_lr <= tolerance
            && self.mismatch_bt <= tolerance
            && (self.image_product - 1.0).abs() <= tolerance
    }
}

/// The image squares as a carpet in `[0, 1] × [0, D]`.
pub fn image_carpet(layout: &SquareLayout) -> CarpetConfig {
    let squares: Vec<(u64, Square)> = layout
        .squares
        .iter()
        .filter(|q| !layout.degenerate.contains(&q.id))
        .map(|q| (q.id, Square::new(q.x, q.y, q.s)))
        .collect();
    square_carpet_unchecked(&squares, Rect::new(0.0, 0.0, 1.0, layout.d))
}

fn crossing_modulus(g: &PassageGraph, s: Side, t: Side, tol: &Tolerances) -> Result<f64> {
    Ok(solve_modulus(&ModulusProblem::crossing(g.clone(), s, t), tol)?.modulus)
}

/// Crossing moduli of the domain against those of the image square carpet,
/// which is rasterized and solved from scratch.
pub fn modulus_pushforward_check(
    g: &PassageGraph,
    layout: &SquareLayout,
    domain_lr: f64,
    tol: &Tolerances,
) -> PushforwardReport {
    let domain_bt = crossing_modulus(g, Side::Bottom, Side::Top, tol).unwrap_or(f64::NAN);
    let image = || -> Result<(f64, f64)> {
        let c = image_carpet(layout);
        let gi = build_passage_graph(&c, default_resolution(&c))?;
        Ok((
            crossing_modulus(&gi, Side::Left, Side::Right, tol)?,
            crossing_modulus(&gi, Side::Bottom, Side::Top, tol)?,
        ))
    };
    let (image_lr, image_bt, error) = match image() {
        Ok((a, b)) => (a, b, None),
        Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
    };
    PushforwardReport {
        domain_lr,
        domain_bt,
        image_lr,
        image_bt,
        mismatch_lr: (domain_lr - image_lr).abs() / domain_lr,
        mismatch_bt: (domain_bt - image_bt).abs() / domain_bt,
        image_product: image_lr * image_bt,
        error,
    }
}

/// Hausdorff distance between two convex polygons (as filled sets). For
/// convex sets the farthest point is a vertex.
pub fn hausdorff_convex(a: &[Point], b: &[Point]) -> f64 {
    let dist_to = |p: Point, poly: &[Point]| {
        if contains(poly, p) {
            return 0.0;
        }
        (0..poly.len())
            .map(|k| point_segment_distance(p, poly[k], poly[(k + 1) % poly.len()]))
            .fold(f64::INFINITY, f64::min)
    };
    let one = |a: &[Point], b: &[Point]| a.iter().map(|&p| dist_to(p, b)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    /// Height of the input rectangle scaled to unit width.
    pub aspect: f64,
    pub d_error: f64,
    /// Largest Hausdorff distance between an input square and its image,
    /// both in unit-width coordinates.
    pub max_displacement: f64,
}

/// Compare the layout of a square-carpet input with the input itself.
pub fn rigidity_check(config: &CarpetConfig, layout: &SquareLayout) -> Result<RigidityReport> {
    let bb = crate::geometry::BBox::of(&config.outer);
    let w = bb.width();
    if !(w > 0.0) {
        return Err(Error::InvalidArgument("outer polygon has no width".into()));
    }
    let aspect = bb.height() / w;
    let mut max_displacement: f64 = 0.0;
    for d in &config.disks {
        let q = layout
            .squares
            .iter()
            .find(|q| q.id == d.id)
            .ok_or_else(|| Error::Mismatch(format!("disk {} missing from layout", d.id)))?;
        let input: Vec<Point> = d
            .polygon
            .iter()
            .map(|p| Point::new((p.x - bb.min.x) / w, (p.y - bb.min.y) / w))
            .collect();
        let output = Square::new(q.x, q.y, q.s).polygon();
        max_displacement = max_displacement.max(hausdorff_convex(&input, &output));
    }
    Ok(RigidityReport {
        aspect,
        d_error: (layout.d - aspect).abs(),
        max_displacement,
    })
}
