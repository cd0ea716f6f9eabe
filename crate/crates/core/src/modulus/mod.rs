//! Carpet modulus of a chain family.
//!
//! The quadratic program is `min Σλ²` subject to `Σ_{i∈γ} λ_i ≥ 1` for every
//! chain γ in the family. Large families are never listed: the restricted
//! problem is grown one chain at a time, using the shortest chain under the
//! current weights as a separation oracle.
//!
//! Multipliers are reported for the form `min ½‖λ‖²`, so stationarity reads
//! `λ_i = Σ_{γ∋i} μ_γ`.

mod active_set;
mod explicit;

pub use explicit::solve_modulus_explicit;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::Side;
use crate::passage::{enumerate_seed_chains, shortest_chain, Chain, PassageGraph};
use crate::seed::substream;
use active_set::{ActiveSet, Enforce};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub gap: f64,
    pub chain: f64,
    pub kkt: f64,
    pub lambda: f64,
    pub max_columns: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap: 1e-8,
            chain: 1e-6,
            kkt: 1e-6,
            lambda: 1e-9,
            max_columns: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveChain {
    pub chain: Chain,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalMetric {
    /// Indexed by disk position in the graph.
    pub lambda: Vec<f64>,
    pub modulus: f64,
    pub active: Vec<ActiveChain>,
    pub duality_gap: f64,
    pub iterations: usize,
}

impl ExtremalMetric {
    /// `{"lambda", "modulus", "gap", "active": [{"chain": [ids], "mu"}]}`
    pub fn to_json(&self, g: &PassageGraph) -> serde_json::Value {
        let active: Vec<serde_json::Value> = self
            .active
            .iter()
            .map(|a| serde_json::json!({ "chain": a.chain.disk_ids(g), "mu": a.mu }))
            .collect();
        serde_json::json!({
            "lambda": self.lambda,
            "modulus": self.modulus,
            "gap": self.duality_gap,
            "active": active,
        })
    }

    /// Violated invariants, empty when the metric is a certified optimum.
    pub fn invariant_failures(&self, tol: &Tolerances) -> Vec<String> {
        let mut out = Vec::new();
        let mut sum = vec![0.0; self.lambda.len()];
        for (k, a) in self.active.iter().enumerate() {
            if a.mu < 0.0 {
                out.push(format!("active chain {k} has negative multiplier {}", a.mu));
            }
            let w = a.chain.weight(&self.lambda);
            if (w - 1.0).abs() > tol.chain {
                out.push(format!("active chain {k} has weight {w}"));
            }
            for &i in a.chain.interior() {
                sum[i] += a.mu;
            }
        }
        for (i, (&l, &s)) in self.lambda.iter().zip(&sum).enumerate() {
            if l > tol.lambda && (l - s).abs() > tol.kkt {
                out.push(format!("stationarity fails at disk {i}: lambda {l}, sum of mu {s}"));
            }
        }
        if self.duality_gap > tol.gap * self.modulus.max(1.0) {
            out.push(format!("duality gap {} too large", self.duality_gap));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainFamily {
    Explicit(Vec<Chain>),
    Crossing { source: Side, target: Side },
}

#[derive(Debug, Clone)]
pub struct ModulusProblem {
    pub graph: PassageGraph,
    pub family: ChainFamily,
    /// Disk ids every chain must avoid.
    pub excluded: Vec<u64>,
}

impl ModulusProblem {
    pub fn crossing(graph: PassageGraph, source: Side, target: Side) -> ModulusProblem {
        ModulusProblem {
            graph,
            family: ChainFamily::Crossing { source, target },
            excluded: Vec::new(),
        }
    }

    /// The graph with excluded disks cut out.
    pub fn reduced_graph(&self) -> PassageGraph {
        let idx: Vec<usize> = self
            .graph
            .disk_ids
            .iter()
            .enumerate()
            .filter(|(_, id)| self.excluded.contains(id))
            .map(|(i, _)| i)
            .collect();
        self.graph.without(&idx)
    }
}

pub fn solve_modulus(problem: &ModulusProblem, tol: &Tolerances) -> Result<ExtremalMetric> {
    let g = problem.reduced_graph();
    match &problem.family {
        ChainFamily::Explicit(chains) => {
            let kept: Vec<Chain> = chains
                .iter()
                .filter(|c| c.interior().iter().all(|&d| !g.removed[d]))
                .cloned()
                .collect();
            if kept.is_empty() {
                return Err(Error::InvalidArgument(
                    "explicit family is empty after exclusions".into(),
                ));
            }
            Ok(solve_modulus_explicit(&kept, g.n_disks))
        }
        ChainFamily::Crossing { source, target } => column_generation(&g, *source, *target, tol),
    }
}

const VIOLATION: f64 = 1e-12;

fn column_generation(
    g: &PassageGraph,
    source: Side,
    target: Side,
    tol: &Tolerances,
) -> Result<ExtremalMetric> {
    if !g.connected(source, target) {
        return Err(Error::GraphDisconnected {
            from: source,
            to: target,
        });
    }
    let mut pool: Vec<Chain> = Vec::new();
    let mut supports: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Chain> = HashSet::new();
    for c in enumerate_seed_chains(g, source, target, usize::MAX) {
        if seen.insert(c.clone()) {
            supports.push(c.interior().to_vec());
            pool.push(c);
        }
    }
    let mut qp = ActiveSet::new(g.n_disks);
    let mut iterations = 0;
    loop {
        // bring the restricted problem to optimality
        let mut skipped = vec![false; pool.len()];
        loop {
            let worst = supports
                .iter()
                .enumerate()
                .filter(|(k, _)| !skipped[*k])
                .map(|(k, s)| (k, qp.slack(s)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            match worst {
                Some((k, s)) if s < -VIOLATION => {
                    if qp.enforce(k, &supports[k]) == Enforce::Infeasible {
                        skipped[k] = true;
                    }
                }
                _ => break,
            }
        }
        iterations += 1;
        // x is a sum of nonnegative multipliers; drop rounding negatives
        let weights: Vec<f64> = qp.x.iter().map(|v| v.max(0.0)).collect();
        let (chain, w) = shortest_chain(g, &weights, source, target)?;
        let norm2: f64 = qp.x.iter().map(|v| v * v).sum();
        let gap = if w > 0.0 {
            norm2 / w.min(1.0).powi(2) - (2.0 * qp.u.iter().sum::<f64>() - norm2)
        } else {
            f64::INFINITY
        };
        let done = w >= 1.0 - 1e-13
            || (w >= 1.0 - tol.chain && gap <= tol.gap * norm2.max(1.0))
            || seen.contains(&chain);
        if done {
            return Ok(finish(&qp, &pool, g.n_disks, gap.max(0.0), iterations));
        }
        if pool.len() >= tol.max_columns {
            return Err(Error::NoConvergence {
                partial: Box::new(finish(&qp, &pool, g.n_disks, gap.max(0.0), iterations)),
                columns: pool.len(),
            });
        }
        seen.insert(chain.clone());
        supports.push(chain.interior().to_vec());
        pool.push(chain);
    }
}

/// Rebuild λ from the multipliers so stationarity holds to rounding.
fn finish(qp: &ActiveSet, pool: &[Chain], n: usize, gap: f64, iterations: usize) -> ExtremalMetric {
    let mut order: Vec<usize> = (0..qp.active.len()).collect();
    order.sort_by_key(|&k| &pool[qp.active[k]]);
    let mut lambda = vec![0.0; n];
    let mut active = Vec::new();
    for k in order {
        let mu = qp.u[k];
        if mu <= 0.0 {
            continue;
        }
        let chain = pool[qp.active[k]].clone();
        for &i in chain.interior() {
            lambda[i] += mu;
        }
        active.push(ActiveChain { chain, mu });
    }
    let modulus = lambda.iter().map(|v| v * v).sum();
    ExtremalMetric {
        lambda,
        modulus,
        active,
        duality_gap: gap,
        iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityOptions {
    pub samples: usize,
    pub seed: u64,
    /// Fraction of the lightest sampled chains to discard before reporting
    /// (weak modulus mode). Zero keeps every sample.
    pub drop_fraction: f64,
    pub eps_chain: f64,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        AdmissibilityOptions {
            samples: 100,
            seed: 0,
            drop_fraction: 0.0,
            eps_chain: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub samples: usize,
    pub dropped: usize,
    pub min_weight: f64,
    /// Disk ids and weight of each kept chain below `1 − eps_chain`.
    pub violations: Vec<(Vec<u64>, f64)>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample chains as shortest paths under randomly perturbed weights and
/// measure them with `lambda`. Sample 0 is unperturbed.
pub fn check_admissible(
    g: &PassageGraph,
    lambda: &[f64],
    source: Side,
    target: Side,
    opts: &AdmissibilityOptions,
    exec: Exec,
) -> Result<AdmissibilityReport> {
    if lambda.len() != g.n_disks {
        return Err(Error::InvalidArgument(format!(
            "expected {} weights, got {}",
            g.n_disks,
            lambda.len()
        )));
    }
    let mean = lambda.iter().sum::<f64>() / lambda.len().max(1) as f64;
    let sigma = 0.5 * mean.max(1.0 / lambda.len().max(1) as f64);
    let sampled = exec.map_range(opts.samples, |s| {
        let weights: Vec<f64> = if s == 0 {
            lambda.to_vec()
        } else {
            let mut rng = substream(opts.seed, "admissible", s as u64);
            lambda.iter().map(|l| l.max(0.0) + sigma * rng.gen::<f64>()).collect()
        };
        shortest_chain(g, &weights, source, target).map(|(c, _)| {
            let w = c.weight(lambda);
            (c.disk_ids(g), w)
        })
    });
    let mut chains = sampled.into_iter().collect::<Result<Vec<_>>>()?;
    chains.sort_by(|a, b| a.1.total_cmp(&b.1));
    let dropped = ((opts.drop_fraction.clamp(0.0, 1.0) * chains.len() as f64).floor() as usize)
        .min(chains.len().saturating_sub(1));
    let kept = &chains[dropped..];
    let min_weight = kept.first().map_or(f64::INFINITY, |c| c.1);
    let violations = kept
        .iter()
        .filter(|c| c.1 < 1.0 - opts.eps_chain)
        .cloned()
        .collect();
    Ok(AdmissibilityReport {
        samples: chains.len(),
        dropped,
        min_weight,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_square_carpet, generate_standard_carpet, Rect, Square};
    use crate::passage::build_passage_graph;
    use crate::passage::tests::{grid_graph, path_graph};

    fn crossing(g: PassageGraph, s: Side, t: Side) -> ExtremalMetric {
        solve_modulus(&ModulusProblem::crossing(g, s, t), &Tolerances::default()).unwrap()
    }

    #[test]
    fn path_of_four() {
        let m = crossing(path_graph(4), Side::Left, Side::Right);
        assert!((m.modulus - 0.25).abs() < 1e-12);
        assert!(m.invariant_failures(&Tolerances::default()).is_empty());
    }

    #[test]
    fn grid_three_by_three() {
        let m = crossing(grid_graph(3, 3), Side::Left, Side::Right);
        assert!((m.modulus - 1.0).abs() < 1e-8);
        for l in &m.lambda {
            assert!((l - 1.0 / 3.0).abs() < 1e-6);
        }
        assert!(m.invariant_failures(&Tolerances::default()).is_empty());
    }

    #[test]
    fn standard_level_one_both_directions() {
        let c = generate_standard_carpet(1).unwrap();
        let g = build_passage_graph(&c, 1.0 / 9.0).unwrap();
        for (s, t) in [(Side::Left, Side::Right), (Side::Bottom, Side::Top)] {
            let m = crossing(g.clone(), s, t);
            assert!((m.modulus - 1.0).abs() < 1e-8, "{s:?}: {}", m.modulus);
            for l in &m.lambda {
                assert!((l - 1.0 / 3.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn four_squares() {
        let tiling = [
            Square { x: 0.0, y: 0.0, side: 0.5 },
            Square { x: 0.5, y: 0.0, side: 0.5 },
            Square { x: 0.0, y: 0.5, side: 0.5 },
            Square { x: 0.5, y: 0.5, side: 0.5 },
        ];
        let c = generate_square_carpet(&tiling, Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        let g = build_passage_graph(&c, crate::passage::default_resolution(&c)).unwrap();
        let m = crossing(g, Side::Left, Side::Right);
        assert!((m.modulus - 1.0).abs() < 1e-8);
        for l in &m.lambda {
            assert!((l - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn excluded_cut_disconnects() {
        let p = ModulusProblem {
            graph: path_graph(3),
            family: ChainFamily::Crossing {
                source: Side::Left,
                target: Side::Right,
            },
            excluded: vec![1],
        };
        assert!(matches!(
            solve_modulus(&p, &Tolerances::default()),
            Err(Error::GraphDisconnected { .. })
        ));
    }

    #[test]
    fn column_cap_reports_partial() {
        let tol = Tolerances {
            max_columns: 1,
            ..Tolerances::default()
        };
        // disk 0 branches to 1 and 2, both touching Right: one seed chain
        let g = PassageGraph::from_adjacency(
            vec![10, 11, 12],
            &[(0, 1), (0, 2)],
            &[(Side::Left, 0), (Side::Right, 1), (Side::Right, 2)],
        );
        let p = ModulusProblem::crossing(g.clone(), Side::Left, Side::Right);
        match solve_modulus(&p, &tol) {
            Err(Error::NoConvergence { partial, columns }) => {
                assert_eq!(columns, 1);
                assert_eq!(partial.lambda.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        let m = solve_modulus(&p, &Tolerances::default()).unwrap();
        assert!((m.modulus - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn admissibility_samples() {
        let g = grid_graph(3, 3);
        let m = crossing(g.clone(), Side::Left, Side::Right);
        let opts = AdmissibilityOptions::default();
        let r = check_admissible(&g, &m.lambda, Side::Left, Side::Right, &opts, Exec::Parallel)
            .unwrap();
        assert_eq!(r.samples, 100);
        assert!(r.min_weight >= 1.0 - 1e-6);

        let zero = vec![0.0; 9];
        let r = check_admissible(&g, &zero, Side::Left, Side::Right, &opts, Exec::Sequential)
            .unwrap();
        assert_eq!(r.violations.len(), 100);

        let ones = vec![1.0; 9];
        let r = check_admissible(&g, &ones, Side::Left, Side::Right, &opts, Exec::Sequential)
            .unwrap();
        assert!(r.passed());
    }

    #[test]
    fn admissibility_is_deterministic_across_strategies() {
        let g = grid_graph(5, 4);
        let lambda: Vec<f64> = (0..20).map(|i| 0.1 + 0.01 * i as f64).collect();
        let opts = AdmissibilityOptions {
            seed: 7,
            ..Default::default()
        };
        let a = check_admissible(&g, &lambda, Side::Left, Side::Right, &opts, Exec::Parallel);
        let b = check_admissible(&g, &lambda, Side::Left, Side::Right, &opts, Exec::Sequential);
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn json_shape() {
        let g = path_graph(2);
        let m = crossing(g.clone(), Side::Left, Side::Right);
        let j = m.to_json(&g);
        assert_eq!(j["active"][0]["chain"], serde_json::json!([0, 1]));
        assert!(j["gap"].is_number());
    }
}
