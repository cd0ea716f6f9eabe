//! Contracted contact graph of a carpet. One node per peripheral disk plus one
//! terminal per marked side; a chain of pairwise-touching disks stands in for
//! a curve that meets the carpet in a null set.
//!
//! Contacts are read off a raster of pitch `h`: two disks touch when their
//! cells are 4-adjacent, or separated by a single gap cell along a grid line.
//! Diagonal (corner) contacts never produce an edge.

use crate::error::{Error, Result};
use crate::geometry::polygon::contains;
use crate::geometry::{BBox, CarpetConfig, Point, Side};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLabel {
    Disk(u32),
    /// Inside the outer domain but in no disk.
    Gap,
    Outside(Side),
}

#[derive(Debug, Clone)]
pub struct Raster {
    /// Lower-left corner of cell `(0, 0)`.
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<CellLabel>,
    /// For cells inside the domain, the disk reached first by a breadth-first
    /// fill through gap cells.
    pub nearest_disk: Vec<Option<u32>>,
}

impl Raster {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Label of cell `(i, j)`; `None` beyond the grid.
    pub fn label(&self, i: isize, j: isize) -> Option<CellLabel> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            None
        } else {
            Some(self.cells[self.idx(i as usize, j as usize)])
        }
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.h,
            self.origin.y + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn vertex(&self, i: isize, j: isize) -> Point {
        Point::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    fn build(config: &CarpetConfig, h: f64) -> Raster {
        let bb = BBox::of(&config.outer);
        let inner_x = ((bb.width() / h) - 1e-9).ceil().max(1.0) as usize;
        let inner_y = ((bb.height() / h) - 1e-9).ceil().max(1.0) as usize;
        let (nx, ny) = (inner_x + 2, inner_y + 2);
        let origin = Point::new(bb.min.x - h, bb.min.y - h);
        let mut r = Raster {
            origin,
            h,
            nx,
            ny,
            cells: vec![CellLabel::Gap; nx * ny],
            nearest_disk: vec![None; nx * ny],
        };
        for j in 0..ny {
            for i in 0..nx {
                let c = r.center(i, j);
                if !contains(&config.outer, c) {
                    let k = r.idx(i, j);
                    r.cells[k] = CellLabel::Outside(config.side_of_point(c));
                }
            }
        }
        for (k, d) in config.disks.iter().enumerate() {
            let i0 = (((d.bbox.min.x - origin.x) / h) - 0.5).floor().max(0.0) as usize;
            let j0 = (((d.bbox.min.y - origin.y) / h) - 0.5).floor().max(0.0) as usize;
            let i1 = ((((d.bbox.max.x - origin.x) / h) - 0.5).ceil().max(0.0) as usize).min(nx - 1);
            let j1 = ((((d.bbox.max.y - origin.y) / h) - 0.5).ceil().max(0.0) as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let idx = r.idx(i, j);
                    if r.cells[idx] == CellLabel::Gap && contains(&d.polygon, r.center(i, j)) {
                        r.cells[idx] = CellLabel::Disk(k as u32);
                    }
                }
            }
        }
        let mut queue = VecDeque::new();
        for (k, c) in r.cells.iter().enumerate() {
            if let CellLabel::Disk(d) = c {
                r.nearest_disk[k] = Some(*d);
                queue.push_back(k);
            }
        }
        while let Some(k) = queue.pop_front() {
            let (i, j) = ((k % nx) as isize, (k / nx) as isize);
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                if let Some(CellLabel::Gap) = r.label(i + di, j + dj) {
                    let n = r.idx((i + di) as usize, (j + dj) as usize);
                    if r.nearest_disk[n].is_none() {
                        r.nearest_disk[n] = r.nearest_disk[k];
                        queue.push_back(n);
                    }
                }
            }
        }
        r
    }
}

#[derive(Debug, Clone)]
pub struct PassageGraph {
    pub n_disks: usize,
    pub disk_ids: Vec<u64>,
    /// Sorted neighbor lists; nodes `0..n_disks` are disks, then the four side
    /// terminals in [`Side::ALL`] order.
    pub adj: Vec<Vec<usize>>,
    /// One contact segment per edge, keyed by `(min, max)` node index.
    pub witness: BTreeMap<(usize, usize), (Point, Point)>,
    pub removed: Vec<bool>,
    pub h: f64,
    pub raster: Option<Raster>,
}

impl PassageGraph {
    pub fn terminal(&self, side: Side) -> usize {
        self.n_disks + side.index()
    }

    pub fn is_terminal(&self, node: usize) -> bool {
        node >= self.n_disks
    }

    pub fn n_nodes(&self) -> usize {
        self.n_disks + 4
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn disk_edge_count(&self) -> usize {
        (0..self.n_disks)
            .map(|a| self.adj[a].iter().filter(|&&b| b < self.n_disks).count())
            .sum::<usize>()
            / 2
    }

    pub fn is_active(&self, node: usize) -> bool {
        node >= self.n_disks || !self.removed[node]
    }

    /// Disks adjacent to a side terminal.
    pub fn side_disks(&self, side: Side) -> Vec<usize> {
        self.adj[self.terminal(side)]
            .iter()
            .copied()
            .filter(|&d| self.is_active(d))
            .collect()
    }

    /// Graph built directly from disk adjacency, without geometry.
    pub fn from_adjacency(
        disk_ids: Vec<u64>,
        edges: &[(usize, usize)],
        side_contacts: &[(Side, usize)],
    ) -> PassageGraph {
        let n = disk_ids.len();
        let mut g = PassageGraph {
            n_disks: n,
            disk_ids,
            adj: vec![Vec::new(); n + 4],
            witness: BTreeMap::new(),
            removed: vec![false; n],
            h: 0.0,
            raster: None,
        };
        for &(a, b) in edges {
            g.link(a, b, (Point::new(0.0, 0.0), Point::new(0.0, 0.0)));
        }
        for &(s, d) in side_contacts {
            let t = g.terminal(s);
            g.link(d, t, (Point::new(0.0, 0.0), Point::new(0.0, 0.0)));
        }
        g.finish();
        g
    }

    fn link(&mut self, a: usize, b: usize, w: (Point, Point)) {
        if a == b {
            return;
        }
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.witness.entry((a.min(b), a.max(b))).or_insert(w);
    }

    fn finish(&mut self) {
        for n in &mut self.adj {
            n.sort_unstable();
            n.dedup();
        }
    }

    /// Copy with the given disks cut out of the graph. Node indices are kept.
    pub fn without(&self, excluded: &[usize]) -> PassageGraph {
        let mut g = self.clone();
        for &d in excluded {
            if d < g.n_disks {
                g.removed[d] = true;
            }
        }
        for a in 0..g.adj.len() {
            let removed = &g.removed;
            let n_disks = g.n_disks;
            g.adj[a].retain(|&b| b >= n_disks || !removed[b]);
            if a < n_disks && removed[a] {
                g.adj[a].clear();
            }
        }
        g
    }

    /// Is there a chain from `source` to `target` through active disks?
    pub fn connected(&self, source: Side, target: Side) -> bool {
        let s = self.terminal(source);
        let t = self.terminal(target);
        let mut seen = vec![false; self.n_nodes()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        seen[s] = true;
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if y == t {
                    return true;
                }
                if y < self.n_disks && !seen[y] && !self.removed[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        false
    }

    pub fn to_debug_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = (0..self.n_nodes())
            .map(|k| {
                if k < self.n_disks {
                    serde_json::json!(self.disk_ids[k])
                } else {
                    serde_json::json!(format!("{:?}", Side::from_index(k - self.n_disks)))
                }
            })
            .collect();
        let edges: Vec<[usize; 2]> = self.witness.keys().map(|&(a, b)| [a, b]).collect();
        serde_json::json!({ "nodes": nodes, "edges": edges })
    }
}

/// Default raster pitch: two thirds of the smallest inradius, capped at a
/// quarter of the smallest diameter. For square disks this is a third of the
/// smallest side, which keeps cell centers off shared edges on dyadic and
/// triadic grids.
pub fn default_resolution(config: &CarpetConfig) -> f64 {
    let min_in = config
        .disks
        .iter()
        .map(|d| d.inradius)
        .fold(f64::INFINITY, f64::min);
    let min_diam = config
        .disks
        .iter()
        .map(|d| d.diameter)
        .fold(f64::INFINITY, f64::min);
    (2.0 * min_in / 3.0).min(min_diam / 4.0)
}

pub fn build_passage_graph(config: &CarpetConfig, h: f64) -> Result<PassageGraph> {
    if config.disks.is_empty() {
        return Err(Error::InvalidArgument("carpet has no disks".into()));
    }
    let min_diam = config
        .disks
        .iter()
        .map(|d| d.diameter)
        .fold(f64::INFINITY, f64::min);
    if !(h > 0.0) || h > min_diam / 4.0 * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "resolution {h} must be positive and at most a quarter of the smallest disk diameter ({})",
            min_diam / 4.0
        )));
    }
    let raster = Raster::build(config, h);
    let n = config.disks.len();
    let mut g = PassageGraph {
        n_disks: n,
        disk_ids: config.disks.iter().map(|d| d.id).collect(),
        adj: vec![Vec::new(); n + 4],
        witness: BTreeMap::new(),
        removed: vec![false; n],
        h,
        raster: None,
    };
    let node_of = |l: CellLabel| match l {
        CellLabel::Disk(d) => Some(d as usize),
        CellLabel::Outside(s) => Some(n + s.index()),
        CellLabel::Gap => None,
    };
    let (nx, ny) = (raster.nx as isize, raster.ny as isize);
    for j in 0..ny {
        for i in 0..nx {
            let here = raster.label(i, j).unwrap();
            for (di, dj) in [(1isize, 0isize), (0, 1)] {
                let Some(next) = raster.label(i + di, j + dj) else {
                    continue;
                };
                // crack between the two cells
                let (p, q) = if di == 1 {
                    (raster.vertex(i + 1, j), raster.vertex(i + 1, j + 1))
                } else {
                    (raster.vertex(i, j + 1), raster.vertex(i + 1, j + 1))
                };
                match (here, next) {
                    (CellLabel::Gap, _) | (_, CellLabel::Gap) => {}
                    (CellLabel::Outside(_), CellLabel::Outside(_)) => {}
                    (a, b) => {
                        if let (Some(x), Some(y)) = (node_of(a), node_of(b)) {
                            g.link(x, y, (p, q));
                        }
                    }
                }
                // single gap cell bridged along the grid line
                if here == CellLabel::Gap {
                    let before = raster.label(i - di, j - dj);
                    if let (Some(a), Some(b)) = (before, Some(next)) {
                        if matches!(a, CellLabel::Disk(_)) || matches!(b, CellLabel::Disk(_)) {
                            if let (Some(x), Some(y)) = (node_of(a), node_of(b)) {
                                if !(g.is_terminal(x) && g.is_terminal(y)) {
                                    let c = raster.center(i as usize, j as usize);
                                    g.link(x, y, (c, c));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    g.finish();
    g.raster = Some(raster);
    if !g.connected(Side::Left, Side::Right) {
        return Err(Error::GraphDisconnected {
            from: Side::Left,
            to: Side::Right,
        });
    }
    Ok(g)
}

/// Node sequence from a source terminal to a target terminal through
/// distinct disks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Chain {
    pub nodes: Vec<usize>,
}

impl Chain {
    pub fn interior(&self) -> &[usize] {
        if self.nodes.len() < 2 {
            &[]
        } else {
            &self.nodes[1..self.nodes.len() - 1]
        }
    }

    pub fn weight(&self, weights: &[f64]) -> f64 {
        self.interior().iter().map(|&d| weights[d]).sum()
    }

    /// Consecutive nodes adjacent, terminals only at the ends, no disk
    /// repeated.
    pub fn is_valid(&self, g: &PassageGraph) -> bool {
        if self.nodes.len() < 2 {
            return false;
        }
        let (first, last) = (self.nodes[0], *self.nodes.last().unwrap());
        if !g.is_terminal(first) || !g.is_terminal(last) {
            return false;
        }
        let mut seen = std::collections::HashSet::new();
        for &d in self.interior() {
            if g.is_terminal(d) || !seen.insert(d) || g.removed[d] {
                return false;
            }
        }
        self.nodes.windows(2).all(|w| g.has_edge(w[0], w[1]))
    }

    /// Polyline through the midpoints of consecutive contact segments.
    pub fn realization(&self, g: &PassageGraph) -> Vec<Point> {
        self.nodes
            .windows(2)
            .filter_map(|w| g.witness.get(&(w[0].min(w[1]), w[0].max(w[1]))))
            .map(|(p, q)| p.add(*q).scale(0.5))
            .collect()
    }

    pub fn disk_ids(&self, g: &PassageGraph) -> Vec<u64> {
        self.interior().iter().map(|&d| g.disk_ids[d]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    w: f64,
    hops: u32,
}

impl Key {
    fn cmp(&self, o: &Key) -> Ordering {
        self.w.total_cmp(&o.w).then(self.hops.cmp(&o.hops))
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapItem {
    key: Key,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (key, node)
        o.key.cmp(&self.key).then(o.node.cmp(&self.node))
    }
}

/// Cheapest chain by node weight, then hop count, then lexicographically
/// smallest node sequence. `blocked` disks are skipped.
fn search(
    g: &PassageGraph,
    weights: &[f64],
    source: Side,
    target: Side,
    blocked: Option<&[bool]>,
) -> Option<(Chain, f64)> {
    let n = g.n_disks;
    let usable = |d: usize| d < n && !g.removed[d] && blocked.map_or(true, |b| !b[d]);
    let s = g.terminal(source);
    let t = g.terminal(target);
    // cost-to-go from each disk to the target, counting the disk itself
    let mut to_go: Vec<Option<Key>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for &d in &g.adj[t] {
        if usable(d) {
            let k = Key {
                w: weights[d],
                hops: 1,
            };
            if to_go[d].map_or(true, |o| k.cmp(&o) == Ordering::Less) {
                to_go[d] = Some(k);
                heap.push(HeapItem { key: k, node: d });
            }
        }
    }
    let mut done = vec![false; n];
    while let Some(HeapItem { key, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &y in &g.adj[node] {
            if usable(y) && !done[y] {
                let k = Key {
                    w: key.w + weights[y],
                    hops: key.hops + 1,
                };
                if to_go[y].map_or(true, |o| k.cmp(&o) == Ordering::Less) {
                    to_go[y] = Some(k);
                    heap.push(HeapItem { key: k, node: y });
                }
            }
        }
    }
    let best = g.adj[s]
        .iter()
        .filter(|&&d| usable(d))
        .filter_map(|&d| to_go[d])
        .min_by(|a, b| a.cmp(b))?;

    let tie = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    let mut nodes = vec![s];
    let mut need = best;
    loop {
        let cur = *nodes.last().unwrap();
        if need.hops == 0 {
            nodes.push(t);
            break;
        }
        let next = g.adj[cur].iter().copied().find(|&y| {
            usable(y) && to_go[y].map_or(false, |k| k.hops == need.hops && tie(k.w, need.w))
        });
        let y = next?;
        nodes.push(y);
        let k = to_go[y].unwrap();
        need = Key {
            w: k.w - weights[y],
            hops: k.hops - 1,
        };
    }
    let chain = Chain { nodes };
    let w = chain.weight(weights);
    Some((chain, w))
}

fn check_weights(g: &PassageGraph, weights: &[f64]) -> Result<()> {
    if weights.len() != g.n_disks {
        return Err(Error::InvalidArgument(format!(
            "expected {} weights, got {}",
            g.n_disks,
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weights must be finite and nonnegative, got {w}"
        )));
    }
    Ok(())
}

/// Minimum-weight chain between two sides (terminals weigh nothing).
pub fn shortest_chain(
    g: &PassageGraph,
    weights: &[f64],
    source: Side,
    target: Side,
) -> Result<(Chain, f64)> {
    check_weights(g, weights)?;
    search(g, weights, source, target, None).ok_or(Error::GraphDisconnected {
        from: source,
        to: target,
    })
}

/// Greedy family of node-disjoint chains: take the shortest hop-count chain,
/// block its disks, repeat until `k` chains or disconnection.
pub fn enumerate_seed_chains(g: &PassageGraph, source: Side, target: Side, k: usize) -> Vec<Chain> {
    let zeros = vec![0.0; g.n_disks];
    let mut blocked = vec![false; g.n_disks];
    let mut out = Vec::new();
    while out.len() < k {
        let Some((c, _)) = search(g, &zeros, source, target, Some(&blocked)) else {
            break;
        };
        for &d in c.interior() {
            blocked[d] = true;
        }
        out.push(c);
    }
    out
}
