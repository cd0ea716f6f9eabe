//! The energy minimizer `u` read off an extremal metric.
//!
//! `u⁻(i)` is the λ-distance from the Left side to disk `i` with the disk's
//! own weight left out, `u⁺(i) = u⁻(i) + λ_i`. Along a geodesic the
//! intervals `[u⁻, u⁺]` of consecutive disks abut, so `u` rises from 0 on
//! the Left side to 1 on the Right side with oscillation `λ_i` on disk `i`.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::polygon::{boundary_distance, contains};
use crate::geometry::{CarpetConfig, Point, Side};
use crate::modulus::ExtremalMetric;
use crate::passage::PassageGraph;
use crate::seed::substream;
use rand::Rng;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicSolution {
    pub disk_ids: Vec<u64>,
    pub u_minus: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub rho: Vec<f64>,
    /// Dirichlet energy `Σρ²`.
    pub energy: f64,
    /// Disks whose interval was cut at 1 or that no chain reaches.
    pub clamped: Vec<usize>,
}

impl HarmonicSolution {
    pub fn n(&self) -> usize {
        self.u_minus.len()
    }

    /// `{"u_minus", "u_plus", "rho", "D", "clamped": [ids]}`
    pub fn to_json(&self) -> serde_json::Value {
        let clamped: Vec<u64> = self.clamped.iter().map(|&i| self.disk_ids[i]).collect();
        serde_json::json!({
            "u_minus": self.u_minus,
            "u_plus": self.u_plus,
            "rho": self.rho,
            "D": self.energy,
            "clamped": clamped,
        })
    }

    /// Broken invariants: ordering, oscillation, and that no chain from the
    /// Left side through disk `i` to the Right side is lighter than 1.
    pub fn invariant_failures(&self, g: &PassageGraph, eps_chain: f64) -> Vec<String> {
        let mut out = Vec::new();
        let to_right = exclusive_distances(g, &self.rho, Side::Right);
        for i in 0..self.n() {
            let (lo, hi) = (self.u_minus[i], self.u_plus[i]);
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                out.push(format!("disk {}: interval [{lo}, {hi}]", self.disk_ids[i]));
            }
            if !self.clamped.contains(&i) && (hi - lo - self.rho[i]).abs() > 1e-12 {
                out.push(format!("disk {}: oscillation differs from rho", self.disk_ids[i]));
            }
            if let Some(r) = to_right[i] {
                if !g.removed[i] && lo + self.rho[i] + r < 1.0 - eps_chain {
                    out.push(format!(
                        "disk {}: chain of weight {} through it",
                        self.disk_ids[i],
                        lo + self.rho[i] + r
                    ));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Item {
    d: f64,
    node: usize,
}

impl PartialEq for Item {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.d.total_cmp(&self.d).then(o.node.cmp(&self.node))
    }
}

/// For every disk, the lightest chain from `side` up to but not including
/// it. `None` when no chain reaches the disk.
pub fn exclusive_distances(g: &PassageGraph, weights: &[f64], side: Side) -> Vec<Option<f64>> {
    let n = g.n_disks;
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for &d in &g.adj[g.terminal(side)] {
        if d < n && !g.removed[d] {
            dist[d] = Some(0.0);
            heap.push(Item { d: 0.0, node: d });
        }
    }
    let mut done = vec![false; n];
    while let Some(Item { d, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        let next = d + weights[node];
        for &y in &g.adj[node] {
            if y < n && !g.removed[y] && !done[y] && dist[y].map_or(true, |o| next < o) {
                dist[y] = Some(next);
                heap.push(Item { d: next, node: y });
            }
        }
    }
    dist
}

/// Potential with value 0 on `source` built from per-disk weights.
pub fn potential_from_weights(g: &PassageGraph, weights: &[f64], source: Side) -> HarmonicSolution {
    let dist = exclusive_distances(g, weights, source);
    let mut clamped = Vec::new();
    let mut u_minus = Vec::with_capacity(g.n_disks);
    let mut u_plus = Vec::with_capacity(g.n_disks);
    for (i, d) in dist.iter().enumerate() {
        match d {
            None => {
                clamped.push(i);
                u_minus.push(1.0);
                u_plus.push(1.0);
            }
            Some(d) => {
                let lo = d.clamp(0.0, 1.0);
                let hi = (d + weights[i]).min(1.0);
                if d + weights[i] > 1.0 + 1e-12 {
                    clamped.push(i);
                }
                u_minus.push(lo);
                u_plus.push(hi.max(lo));
            }
        }
    }
    HarmonicSolution {
        disk_ids: g.disk_ids.clone(),
        u_minus,
        u_plus,
        rho: weights.to_vec(),
        energy: weights.iter().map(|w| w * w).sum(),
        clamped,
    }
}

/// `u` with boundary values 0 on the Left side and 1 on the Right side.
pub fn recover_potential(g: &PassageGraph, metric: &ExtremalMetric) -> Result<HarmonicSolution> {
    if metric.lambda.len() != g.n_disks {
        return Err(Error::Mismatch(format!(
            "metric has {} weights for {} disks",
            metric.lambda.len(),
            g.n_disks
        )));
    }
    Ok(potential_from_weights(g, &metric.lambda, Side::Left))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCheck {
    /// `max_region u⁺ − max_boundary u⁺`, positive on violation.
    pub max_excess: f64,
    /// `min_boundary u⁻ − min_region u⁻`, positive on violation.
    pub min_excess: f64,
}

impl RegionCheck {
    pub fn deviation(&self) -> f64 {
        self.max_excess.max(self.min_excess).max(0.0)
    }
}

/// Disks of `region` with a neighbor (disk or side) outside it.
pub fn region_boundary(g: &PassageGraph, region: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = region.iter().copied().collect();
    region
        .iter()
        .copied()
        .filter(|&d| {
            g.adj[d]
                .iter()
                .any(|&y| g.is_terminal(y) || (!g.removed[y] && !set.contains(&y)))
        })
        .collect()
}

/// Extremes of `u` over a region are attained on its boundary.
pub fn check_region(sol: &HarmonicSolution, g: &PassageGraph, region: &[usize]) -> RegionCheck {
    let boundary = region_boundary(g, region);
    if region.is_empty() || boundary.is_empty() {
        return RegionCheck {
            max_excess: 0.0,
            min_excess: 0.0,
        };
    }
    let max_of = |s: &[usize]| s.iter().map(|&i| sol.u_plus[i]).fold(f64::NEG_INFINITY, f64::max);
    let min_of = |s: &[usize]| s.iter().map(|&i| sol.u_minus[i]).fold(f64::INFINITY, f64::min);
    RegionCheck {
        max_excess: max_of(region) - max_of(&boundary),
        min_excess: min_of(&boundary) - min_of(region),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub trials: usize,
    pub worst_deviation: f64,
    /// Trials deviating by more than the tolerance.
    pub violations: usize,
}

/// Connected region grown breadth-first at random from a random disk, never
/// entering disks that touch the Left or Right side.
pub fn random_region(g: &PassageGraph, rng: &mut impl Rng, max_size: usize) -> Vec<usize> {
    let left = g.terminal(Side::Left);
    let right = g.terminal(Side::Right);
    let eligible: Vec<usize> = (0..g.n_disks)
        .filter(|&d| !g.removed[d] && !g.adj[d].iter().any(|&y| y == left || y == right))
        .collect();
    if eligible.is_empty() {
        return Vec::new();
    }
    let ok: BTreeSet<usize> = eligible.iter().copied().collect();
    let target = rng.gen_range(1..=max_size.max(1));
    let start = eligible[rng.gen_range(0..eligible.len())];
    let mut region = vec![start];
    let mut inside: BTreeSet<usize> = [start].into();
    let mut frontier: Vec<usize> = Vec::new();
    let push_frontier = |d: usize, inside: &BTreeSet<usize>, frontier: &mut Vec<usize>| {
        for &y in &g.adj[d] {
            if ok.contains(&y) && !inside.contains(&y) && !frontier.contains(&y) {
                frontier.push(y);
            }
        }
    };
    push_frontier(start, &inside, &mut frontier);
    while region.len() < target && !frontier.is_empty() {
        let d = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        inside.insert(d);
        region.push(d);
        push_frontier(d, &inside, &mut frontier);
    }
    region.sort_unstable();
    region
}

/// Maximum and minimum principle over `trials` seeded random regions.
pub fn check_maximum_principle(
    sol: &HarmonicSolution,
    g: &PassageGraph,
    trials: usize,
    seed: u64,
    tol: f64,
    exec: Exec,
) -> MaxPrincipleReport {
    let max_size = (g.n_disks / 4).max(1);
    let devs = exec.map_range(trials, |k| {
        let mut rng = substream(seed, "region", k as u64);
        let region = random_region(g, &mut rng, max_size);
        check_region(sol, g, &region).deviation()
    });
    MaxPrincipleReport {
        trials,
        worst_deviation: devs.iter().copied().fold(0.0, f64::max),
        violations: devs.iter().filter(|&&d| d > tol).count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub compared: usize,
    /// `min (u⁻_b − u⁻_a)` over disks present in both.
    pub worst: f64,
    pub passed: bool,
}

/// Does `b` dominate `a` disk-wise (`u⁻_b ≥ u⁻_a − eps`)? Disks missing
/// from either graph are skipped.
pub fn check_comparison(
    a: &HarmonicSolution,
    b: &HarmonicSolution,
    ga: &PassageGraph,
    gb: &PassageGraph,
    eps: f64,
) -> Result<ComparisonReport> {
    if a.disk_ids != b.disk_ids || ga.disk_ids != a.disk_ids || gb.disk_ids != b.disk_ids {
        return Err(Error::Mismatch("solutions live on different graphs".into()));
    }
    let mut worst = f64::INFINITY;
    let mut compared = 0;
    for i in 0..a.n() {
        if ga.removed[i] || gb.removed[i] {
            continue;
        }
        compared += 1;
        worst = worst.min(b.u_minus[i] - a.u_minus[i]);
    }
    Ok(ComparisonReport {
        compared,
        worst,
        passed: worst >= -eps,
    })
}

/// Same weights, fewer disks: the potential after cutting `excluded` out.
pub fn surgery(
    g: &PassageGraph,
    sol: &HarmonicSolution,
    excluded: &[usize],
) -> (PassageGraph, HarmonicSolution) {
    let gb = g.without(excluded);
    let sb = potential_from_weights(&gb, &sol.rho, Side::Left);
    (gb, sb)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnularFunction {
    pub center: Point,
    /// `(R_j, r_j)` for each ring, outermost first.
    pub rings: Vec<(f64, f64)>,
    pub zeta: Vec<f64>,
    pub exceptional: Option<usize>,
    /// `Σζ²` without the exceptional disk.
    pub energy: f64,
}

fn disk_radial_range(poly: &[Point], c: Point) -> (f64, f64) {
    let dmin = if contains(poly, c) {
        0.0
    } else {
        boundary_distance(poly, c)
    };
    let dmax = poly.iter().map(|p| p.dist(c)).fold(0.0, f64::max);
    (dmin, dmax)
}

/// Discrete logarithm around `center`: zero outside radius `r_outer`,
/// rising by `1/n_rings` across each of `n_rings` nested annuli `[R_j/2, R_j]`
/// and constant between them. Each ring is pulled inward until no disk other
/// than the one containing `center` meets two rings.
pub fn annular_test_function(
    config: &CarpetConfig,
    center: Point,
    r_outer: f64,
    n_rings: usize,
) -> Result<AnnularFunction> {
    if n_rings < 2 || !(r_outer > 0.0) {
        return Err(Error::InvalidArgument(
            "need at least two rings and a positive outer radius".into(),
        ));
    }
    let ranges: Vec<(f64, f64)> = config
        .disks
        .iter()
        .map(|d| disk_radial_range(&d.polygon, center))
        .collect();
    let exceptional = ranges.iter().position(|r| r.0 == 0.0);
    let mut rings = Vec::with_capacity(n_rings);
    let mut big_r = r_outer;
    for j in 0..n_rings {
        let small_r = big_r / 2.0;
        rings.push((big_r, small_r));
        if j + 1 == n_rings {
            break;
        }
        let mut next = small_r;
        for (k, &(dmin, dmax)) in ranges.iter().enumerate() {
            if Some(k) != exceptional && dmin <= big_r && dmax >= small_r {
                next = next.min(dmin);
            }
        }
        next *= 1.0 - 1e-9;
        if !(next > r_outer * 1e-12) {
            return Err(Error::FewerRings {
                achieved: rings.len(),
                requested: n_rings,
            });
        }
        big_r = next;
    }
    let n = n_rings as f64;
    let g = |s: f64| -> f64 {
        let mut level = 0.0;
        for &(big, small) in &rings {
            if s >= big {
                return level;
            }
            if s > small {
                return level + (big - s) / (n * small);
            }
            level += 1.0 / n;
        }
        level
    };
    let zeta: Vec<f64> = ranges.iter().map(|&(dmin, dmax)| g(dmin) - g(dmax)).collect();
    let energy = zeta
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != exceptional)
        .map(|(_, z)| z * z)
        .sum();
    Ok(AnnularFunction {
        center,
        rings,
        zeta,
        exceptional,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_square_carpet, generate_standard_carpet, Rect, Square};
    use crate::modulus::{solve_modulus, ModulusProblem, Tolerances};
    use crate::passage::tests::{grid_graph, path_graph};
    use crate::passage::{build_passage_graph, default_resolution};

    fn solved(g: &PassageGraph) -> HarmonicSolution {
        let m = solve_modulus(
            &ModulusProblem::crossing(g.clone(), Side::Left, Side::Right),
            &Tolerances::default(),
        )
        .unwrap();
        recover_potential(g, &m).unwrap()
    }

    #[test]
    fn three_by_three_columns() {
        let g = grid_graph(3, 3);
        let s = solved(&g);
        for i in 0..9 {
            let col = (i % 3) as f64;
            assert!((s.u_minus[i] - col / 3.0).abs() < 1e-9);
            assert!((s.u_plus[i] - (col + 1.0) / 3.0).abs() < 1e-9);
        }
        assert!((s.energy - 1.0).abs() < 1e-8);
        assert!(s.clamped.is_empty());
        assert!(s.invariant_failures(&g, 1e-6).is_empty());
    }

    #[test]
    fn four_squares() {
        let sq = [
            Square::new(0.0, 0.0, 0.5),
            Square::new(0.5, 0.0, 0.5),
            Square::new(0.0, 0.5, 0.5),
            Square::new(0.5, 0.5, 0.5),
        ];
        let c = generate_square_carpet(&sq, Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        let g = build_passage_graph(&c, default_resolution(&c)).unwrap();
        let s = solved(&g);
        for (i, d) in c.disks.iter().enumerate() {
            let x = d.bbox.min.x;
            assert!((s.u_minus[i] - x).abs() < 1e-9);
            assert!((s.u_plus[i] - x - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn chain_telescopes() {
        let k = 5;
        let g = path_graph(k);
        let s = solved(&g);
        for j in 0..k {
            assert!((s.u_minus[j] - j as f64 / k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_disk_is_clamped() {
        // disk 2 hangs off nothing
        let g = PassageGraph::from_adjacency(
            vec![0, 1, 2],
            &[(0, 1)],
            &[(Side::Left, 0), (Side::Right, 1)],
        );
        let s = potential_from_weights(&g, &[0.5, 0.5, 0.0], Side::Left);
        assert_eq!(s.clamped, vec![2]);
        assert_eq!(s.u_minus[2], 1.0);
    }

    #[test]
    fn middle_column_region() {
        let g = grid_graph(3, 3);
        let s = solved(&g);
        let region = vec![1, 4, 7];
        assert_eq!(region_boundary(&g, &region), region);
        assert!(check_region(&s, &g, &region).deviation() < 1e-12);
        assert_eq!(check_region(&s, &g, &[4]).deviation(), 0.0);
        let all: Vec<usize> = (0..9).collect();
        assert!(check_region(&s, &g, &all).deviation() < 1e-12);
    }

    #[test]
    fn random_regions_respect_the_principle() {
        let c = generate_standard_carpet(2).unwrap();
        let g = build_passage_graph(&c, default_resolution(&c)).unwrap();
        let s = solved(&g);
        let r = check_maximum_principle(&s, &g, 50, 3, 1e-9, Exec::Parallel);
        assert_eq!(r.violations, 0, "{r:?}");
    }

    #[test]
    fn comparison_by_surgery() {
        let g = grid_graph(3, 3);
        let a = solved(&g);
        let same = check_comparison(&a, &a, &g, &g, 1e-12).unwrap();
        assert!(same.passed && same.worst == 0.0);
        let (gb, b) = surgery(&g, &a, &[3]);
        let r = check_comparison(&a, &b, &g, &gb, 1e-12).unwrap();
        assert!(r.passed);
        assert!(r.compared == 8);

        let other = potential_from_weights(&path_graph(3), &[0.3; 3], Side::Left);
        assert!(check_comparison(&a, &other, &g, &path_graph(3), 1e-12).is_err());
    }

    #[test]
    fn annular_slope_bounds() {
        let c = generate_standard_carpet(3).unwrap();
        let f = annular_test_function(&c, Point::new(0.5, 0.5), 0.5, 4).unwrap();
        assert_eq!(f.rings.len(), 4);
        assert_eq!(c.disks[f.exceptional.unwrap()].id, c.disks[0].id);
        for (k, d) in c.disks.iter().enumerate() {
            let (dmin, dmax) = disk_radial_range(&d.polygon, f.center);
            if dmin >= 0.5 {
                assert_eq!(f.zeta[k], 0.0);
            }
            for &(big, small) in &f.rings {
                if dmin >= small && dmax <= big {
                    assert!(f.zeta[k] <= (dmax - dmin) / (4.0 * small) + 1e-12);
                }
            }
        }
        let e2 = annular_test_function(&c, Point::new(0.5, 0.5), 0.5, 2).unwrap().energy;
        let e8 = annular_test_function(&c, Point::new(0.5, 0.5), 0.5, 8).unwrap().energy;
        assert!(e8 / e2 <= 0.35);
    }

    #[test]
    fn annulus_needs_room() {
        // center on a corner shared by two non-exceptional disks
        let c = generate_standard_carpet(1).unwrap();
        let r = annular_test_function(&c, Point::new(1.0 / 3.0, 0.0), 0.3, 3);
        assert!(matches!(r, Err(Error::FewerRings { achieved: 1, .. })), "{r:?}");
    }
}
