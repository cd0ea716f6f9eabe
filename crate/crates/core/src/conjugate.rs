//! The conjugate coordinate `v`.
//!
//! For a level `t`, the cells of disks entirely below `t` (plus gap cells
//! attributed to them, plus the outside strip along the Left side) form a
//! region whose outer boundary runs from the Bottom side to the Top side
//! through the disks that straddle `t`. Walking that boundary upward and
//! summing ρ over the straddling disks met so far gives `v̂`.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{Point, Side};
use crate::modulus::{solve_modulus, ModulusProblem, Tolerances};
use crate::passage::{CellLabel, PassageGraph, Raster};
use crate::potential::{potential_from_weights, HarmonicSolution};
use serde::Serialize;
use std::collections::VecDeque;

/// Two levels closer than this count as equal.
pub const BREAKPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCrossing {
    pub t: f64,
    /// Disk indices with `u⁻ < t < u⁺`, in the order the interface meets them
    /// going from Bottom to Top.
    pub crossed: Vec<usize>,
    pub total_mass: f64,
    /// Crack polyline of the interface.
    #[serde(skip)]
    pub path: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Below,
    Crossing,
    Above,
}

fn band(sol: &HarmonicSolution, i: usize, t: f64) -> Band {
    if sol.u_plus[i] <= t {
        Band::Below
    } else if sol.u_minus[i] >= t {
        Band::Above
    } else {
        Band::Crossing
    }
}

/// Is `t` within [`BREAKPOINT_TOL`] of some `u⁻` or `u⁺`?
pub fn is_breakpoint(sol: &HarmonicSolution, t: f64) -> bool {
    sol.u_minus
        .iter()
        .chain(&sol.u_plus)
        .any(|&b| (b - t).abs() <= BREAKPOINT_TOL)
}

// heading east, north, west, south
const DIRS: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Cells to the left and right of the crack leaving vertex `(i, j)` in
/// direction `d`.
fn sides_of(i: isize, j: isize, d: usize) -> ((isize, isize), (isize, isize)) {
    match d {
        0 => ((i, j), (i, j - 1)),
        1 => ((i - 1, j), (i, j)),
        2 => ((i - 1, j - 1), (i - 1, j)),
        _ => ((i, j - 1), (i - 1, j - 1)),
    }
}

struct Region<'a> {
    raster: &'a Raster,
    below: Vec<bool>,
}

impl Region<'_> {
    fn contains(&self, (i, j): (isize, isize)) -> bool {
        let Some(label) = self.raster.label(i, j) else {
            return false;
        };
        match label {
            CellLabel::Disk(d) => self.below[d as usize],
            CellLabel::Gap => self.raster.nearest_disk[self.raster.idx(i as usize, j as usize)]
                .map_or(false, |d| self.below[d as usize]),
            CellLabel::Outside(s) => s == Side::Left,
        }
    }
}

/// Walk the level-`t` interface and list the disks it passes through.
pub fn trace_level(sol: &HarmonicSolution, g: &PassageGraph, t: f64) -> Result<LevelCrossing> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("level {t} outside (0, 1)")));
    }
    if is_breakpoint(sol, t) {
        return Err(Error::Breakpoint { t });
    }
    let raster = g
        .raster
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("graph has no raster to trace on".into()))?;
    let bands: Vec<Band> = (0..g.n_disks).map(|i| band(sol, i, t)).collect();
    let region = Region {
        raster,
        below: bands.iter().map(|b| *b == Band::Below).collect(),
    };
    let topo = |detail: &str| Error::Topology {
        t,
        disk: None,
        detail: detail.to_string(),
    };
    let (nx, ny) = (raster.nx as isize, raster.ny as isize);
    let is_bottom = |c: (isize, isize)| raster.label(c.0, c.1) == Some(CellLabel::Outside(Side::Bottom));
    let is_top = |c: (isize, isize)| raster.label(c.0, c.1) == Some(CellLabel::Outside(Side::Top));

    let mut start = None;
    'scan: for j in 0..ny - 1 {
        for i in 0..nx {
            if is_bottom((i, j)) && region.contains((i, j + 1)) {
                start = Some((i, j + 1));
                break 'scan;
            }
        }
    }
    let (si, sj) = start.ok_or_else(|| topo("region below the level never meets the bottom side"))?;

    // full loop around the region, keeping it on the left
    let mut cracks: Vec<((isize, isize), (isize, isize))> = Vec::new();
    let (mut i, mut j, mut d) = (si, sj, 0usize);
    let cap = 4 * (raster.nx + 1) * (raster.ny + 1);
    loop {
        cracks.push(((i, j), sides_of(i, j, d).1));
        i += DIRS[d].0;
        j += DIRS[d].1;
        let (la, ra) = sides_of(i, j, d);
        d = if !region.contains(la) {
            (d + 1) % 4
        } else if region.contains(ra) {
            (d + 3) % 4
        } else {
            d
        };
        if (i, j, d) == (si, sj, 0) {
            break;
        }
        if cracks.len() > cap {
            return Err(topo("interface walk does not close"));
        }
    }
    let first_top = cracks
        .iter()
        .position(|c| is_top(c.1))
        .ok_or_else(|| topo("interface never reaches the top side"))?;
    let last_bottom = cracks[..first_top]
        .iter()
        .rposition(|c| is_bottom(c.1))
        .ok_or_else(|| topo("interface does not start on the bottom side"))?;
    let interface = &cracks[last_bottom + 1..first_top];

    let mut crossed = Vec::new();
    let mut seen = vec![false; g.n_disks];
    for &(_, (ci, cj)) in interface {
        let disk = match raster.label(ci, cj) {
            Some(CellLabel::Disk(d)) => Some(d as usize),
            Some(CellLabel::Gap) => raster.nearest_disk[raster.idx(ci as usize, cj as usize)]
                .map(|d| d as usize),
            _ => None,
        };
        if let Some(d) = disk {
            if bands[d] == Band::Crossing && !seen[d] {
                seen[d] = true;
                crossed.push(d);
            }
        }
    }
    let mut path: Vec<Point> = interface.iter().map(|c| raster.vertex(c.0 .0, c.0 .1)).collect();
    if let Some(&((i, j), _)) = interface.last() {
        let d = (0..4)
            .find(|&d| sides_of(i, j, d).1 == interface.last().unwrap().1)
            .unwrap_or(1);
        path.push(raster.vertex(i + DIRS[d].0, j + DIRS[d].1));
    }
    let total_mass = crossed.iter().map(|&d| sol.rho[d]).sum();
    Ok(LevelCrossing {
        t,
        crossed,
        total_mass,
        path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateSolution {
    pub v_hat: Vec<f64>,
    pub v_plus: Vec<f64>,
    pub levels: Vec<LevelCrossing>,
    /// Largest spread of `v̂` candidates across the levels sampled for one
    /// disk.
    pub t_independence_error: f64,
    /// Disks with ρ at most `eps_lambda`, given a neighbor's `v̂`.
    pub degenerate: Vec<usize>,
}

impl ConjugateSolution {
    /// `{"v_hat", "t_independence_error", "levels": [{"t", "mass", "crossed": [ids]}]}`
    pub fn to_json(&self, g: &PassageGraph) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .map(|l| {
                let ids: Vec<u64> = l.crossed.iter().map(|&d| g.disk_ids[d]).collect();
                serde_json::json!({ "t": l.t, "mass": l.total_mass, "crossed": ids })
            })
            .collect();
        serde_json::json!({
            "v_hat": self.v_hat,
            "t_independence_error": self.t_independence_error,
            "levels": levels,
        })
    }
}

/// Smallest positive distance between distinct breakpoints.
fn breakpoint_gap(sol: &HarmonicSolution) -> f64 {
    let mut b: Vec<f64> = sol.u_minus.iter().chain(&sol.u_plus).copied().collect();
    b.sort_by(f64::total_cmp);
    b.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > BREAKPOINT_TOL)
        .fold(f64::INFINITY, f64::min)
}

/// Move `t` off breakpoints by a quarter of the smallest breakpoint gap,
/// staying inside `(lo, hi)`.
fn jitter(sol: &HarmonicSolution, t: f64, lo: f64, hi: f64, step: f64) -> Option<f64> {
    [t, t + step, t - step, t + 2.0 * step, t - 2.0 * step]
        .into_iter()
        .find(|&s| s > lo && s < hi && s > 0.0 && s < 1.0 && !is_breakpoint(sol, s))
}

pub fn compute_conjugate(
    sol: &HarmonicSolution,
    g: &PassageGraph,
    levels_per_disk: usize,
    eps_lambda: f64,
    exec: Exec,
) -> Result<ConjugateSolution> {
    if levels_per_disk == 0 {
        return Err(Error::InvalidArgument("levels_per_disk must be at least 1".into()));
    }
    let n = g.n_disks;
    let step = breakpoint_gap(sol) / 4.0;
    let live = |i: usize| !g.removed[i] && sol.rho[i] > eps_lambda && !sol.clamped.contains(&i);
    let mut wanted: Vec<(usize, f64)> = Vec::new();
    for i in (0..n).filter(|&i| live(i)) {
        let (lo, hi) = (sol.u_minus[i], sol.u_plus[i]);
        for k in 0..levels_per_disk {
            let t = lo + (k as f64 + 0.5) * (hi - lo) / levels_per_disk as f64;
            if let Some(t) = jitter(sol, t, lo, hi, step) {
                wanted.push((i, t));
            }
        }
    }
    let mut ts: Vec<f64> = wanted.iter().map(|w| w.1).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let traced = exec.map(&ts, |&t| trace_level(sol, g, t));
    let mut levels = Vec::with_capacity(ts.len());
    for (r, &t) in traced.into_iter().zip(&ts) {
        match r {
            Ok(l) => levels.push(l),
            Err(Error::Topology { detail, .. }) => {
                let who = wanted.iter().find(|w| w.1 == t).map(|w| g.disk_ids[w.0]);
                return Err(Error::Topology { t, disk: who, detail });
            }
            Err(e) => return Err(e),
        }
    }
    let level_of = |t: f64| ts.binary_search_by(|x| x.total_cmp(&t)).expect("traced level");

    let mut candidates: Vec<Vec<f64>> = vec![Vec::new(); n];
    for &(i, t) in &wanted {
        let l = &levels[level_of(t)];
        let pos = l.crossed.iter().position(|&d| d == i).ok_or_else(|| Error::Topology {
            t,
            disk: Some(g.disk_ids[i]),
            detail: "disk straddles the level but the interface misses it".into(),
        })?;
        candidates[i].push(l.crossed[..pos].iter().map(|&d| sol.rho[d]).sum());
    }
    let mut v_hat = vec![0.0; n];
    let mut known = vec![false; n];
    let mut spread: f64 = 0.0;
    for i in 0..n {
        let c = &candidates[i];
        if !c.is_empty() {
            v_hat[i] = c.iter().sum::<f64>() / c.len() as f64;
            let (lo, hi) = c
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |a, &x| (a.0.min(x), a.1.max(x)));
            spread = spread.max(hi - lo);
            known[i] = true;
        }
    }
    let degenerate: Vec<usize> = (0..n).filter(|&i| !known[i]).collect();
    inherit(sol, g, &mut v_hat, &mut known);
    let v_plus = v_hat.iter().zip(&sol.rho).map(|(v, r)| v + r).collect();
    Ok(ConjugateSolution {
        v_hat,
        v_plus,
        levels,
        t_independence_error: spread,
        degenerate,
    })
}

/// Unknown disks take `v̂` from a known neighbor, preferring one whose
/// `u`-interval contains theirs. Breadth-first, so chains of degenerate disks
/// resolve outward from the nearest known one.
fn inherit(sol: &HarmonicSolution, g: &PassageGraph, v_hat: &mut [f64], known: &mut [bool]) {
    let n = g.n_disks;
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| known[i]).collect();
    while let Some(k) = queue.pop_front() {
        for &y in &g.adj[k] {
            if y < n && !known[y] {
                let better = g.adj[y].iter().copied().find(|&z| {
                    z < n && known[z] && sol.u_minus[z] <= sol.u_minus[y] && sol.u_minus[y] <= sol.u_plus[z]
                });
                v_hat[y] = v_hat[better.unwrap_or(k)];
                known[y] = true;
                queue.push_back(y);
            }
        }
    }
}

/// Stratified levels `(k + ½)/count`, each moved off breakpoints.
pub fn stratified_levels(sol: &HarmonicSolution, count: usize) -> Vec<f64> {
    let step = breakpoint_gap(sol) / 4.0;
    (0..count)
        .filter_map(|k| {
            let t = (k as f64 + 0.5) / count as f64;
            jitter(sol, t, 0.0, 1.0, step.min(0.25 / count as f64))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMassReport {
    pub samples: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
}

/// `|Σ_{crossed} ρ − D| / D` over stratified levels.
pub fn verify_level_mass(
    sol: &HarmonicSolution,
    g: &PassageGraph,
    sample_count: usize,
    exec: Exec,
) -> Result<LevelMassReport> {
    let ts = stratified_levels(sol, sample_count);
    let errs = exec
        .map(&ts, |&t| {
            trace_level(sol, g, t).map(|l| (l.total_mass - sol.energy).abs() / sol.energy)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(LevelMassReport {
        samples: errs.len(),
        max_rel_error: errs.iter().copied().fold(0.0, f64::max),
        mean_rel_error: errs.iter().sum::<f64>() / errs.len().max(1) as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub checked: usize,
    /// Consecutive pairs `(a, b)` of disk ids where `v̂` fails to climb by ρ(a).
    pub violations: Vec<(u64, u64)>,
}

/// `v̂` climbs by at least ρ of the previous disk along a crossing.
pub fn verify_monotone(
    crossing: &LevelCrossing,
    conj: &ConjugateSolution,
    rho: &[f64],
    disk_ids: &[u64],
    eps: f64,
) -> MonotoneReport {
    let mut violations = Vec::new();
    for w in crossing.crossed.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(conj.v_hat[b] > conj.v_hat[a]) || conj.v_hat[b] < conj.v_hat[a] + rho[a] - eps {
            violations.push((disk_ids[a], disk_ids[b]));
        }
    }
    MonotoneReport {
        checked: crossing.crossed.len().saturating_sub(1),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualReport {
    /// Modulus of the Bottom-to-Top family.
    pub dual_modulus: f64,
    pub max_error: f64,
    /// 90th percentile of `|D·u'⁻ − v̂|` over live disks.
    pub q90_error: f64,
}

/// Independent `v`: the potential of the Bottom-to-Top problem, scaled by D.
pub fn dual_crosscheck(
    sol: &HarmonicSolution,
    conj: &ConjugateSolution,
    g: &PassageGraph,
    tol: &Tolerances,
) -> Result<DualReport> {
    let metric = solve_modulus(
        &ModulusProblem::crossing(g.clone(), Side::Bottom, Side::Top),
        tol,
    )?;
    let dual = potential_from_weights(g, &metric.lambda, Side::Bottom);
    let mut errs: Vec<f64> = (0..g.n_disks)
        .filter(|&i| !g.removed[i])
        .map(|i| (sol.energy * dual.u_minus[i] - conj.v_hat[i]).abs())
        .collect();
    errs.sort_by(f64::total_cmp);
    let q90 = if errs.is_empty() {
        0.0
    } else {
        errs[((0.9 * errs.len() as f64).ceil() as usize).clamp(1, errs.len()) - 1]
    };
    Ok(DualReport {
        dual_modulus: metric.modulus,
        max_error: errs.last().copied().unwrap_or(0.0),
        q90_error: q90,
    })
}
