#![allow(dead_code)]

use carpet_core::geometry::Side;
use carpet_core::passage::{Chain, PassageGraph};
use proptest::prelude::*;

/// Every simple chain from `source` to `target`, or `None` past `cap`.
pub fn all_simple_chains(g: &PassageGraph, source: Side, target: Side, cap: usize) -> Option<Vec<Chain>> {
    let (s, t) = (g.terminal(source), g.terminal(target));
    let mut out = Vec::new();
    let mut path = vec![s];
    let mut on = vec![false; g.n_nodes()];
    fn walk(
        g: &PassageGraph,
        t: usize,
        path: &mut Vec<usize>,
        on: &mut [bool],
        out: &mut Vec<Chain>,
        cap: usize,
    ) -> bool {
        let last = *path.last().unwrap();
        for &y in &g.adj[last] {
            if y == t && path.len() > 1 {
                path.push(t);
                out.push(Chain { nodes: path.clone() });
                path.pop();
                if out.len() > cap {
                    return false;
                }
            } else if y < g.n_disks && !on[y] && !g.removed[y] {
                on[y] = true;
                path.push(y);
                let ok = walk(g, t, path, on, out, cap);
                path.pop();
                on[y] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    walk(g, t, &mut path, &mut on, &mut out, cap).then_some(out)
}

/// Graph on `n` disks with the given disk edges and side contacts. Indices
/// are reduced modulo `n`.
pub fn graph_from(n: usize, edges: &[(usize, usize)], sides: &[(u8, usize)]) -> PassageGraph {
    let edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a % n, b % n)).collect();
    let sides: Vec<(Side, usize)> = sides
        .iter()
        .map(|&(s, d)| (Side::from_index(s as usize % 4), d % n))
        .collect();
    PassageGraph::from_adjacency((0..n as u64).collect(), &edges, &sides)
}

/// Small random contact graphs, not necessarily connected.
pub fn arb_graph(max_disks: usize) -> impl Strategy<Value = PassageGraph> {
    (2..=max_disks).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n), n..=2 * n),
            prop::collection::vec((0u8..4, 0..n), 2..=n + 2),
        )
            .prop_map(|(n, e, s)| graph_from(n, &e, &s))
    })
}

/// Random graphs in which Left reaches Right.
pub fn connected_graph(max_disks: usize) -> impl Strategy<Value = PassageGraph> {
    arb_graph(max_disks).prop_filter("left and right must connect", |g| {
        g.connected(Side::Left, Side::Right)
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
