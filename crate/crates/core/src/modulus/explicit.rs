//! Brute-force solver over an explicit chain list.
//!
//! Hildreth's method: cyclic coordinate ascent on the dual
//! `Σμ − ½‖Nμ‖²`, μ ≥ 0. Each step maximizes exactly over one multiplier,
//! so the dual value is monotone. Slow but simple, which is the point: it
//! shares no code with the active-set solver it is used to check.

use super::{ActiveChain, ExtremalMetric};
use crate::passage::Chain;

const GAP_TARGET: f64 = 1e-10;
const MAX_SWEEPS: usize = 2_000_000;

/// Exact minimizer of `Σλ²` subject to `Σ_{i∈γ} λ_i ≥ 1` for every chain.
/// Chains with an empty interior are ignored. Duplicate chains are merged.
pub fn solve_modulus_explicit(chains: &[Chain], n_disks: usize) -> ExtremalMetric {
    let mut family: Vec<Chain> = chains
        .iter()
        .filter(|c| !c.interior().is_empty())
        .cloned()
        .collect();
    family.sort();
    family.dedup();
    let supports: Vec<Vec<usize>> = family.iter().map(|c| c.interior().to_vec()).collect();

    let mut mu = vec![0.0; family.len()];
    let mut x = vec![0.0; n_disks];
    let mut gap = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        for (k, s) in supports.iter().enumerate() {
            let w: f64 = s.iter().map(|&i| x[i]).sum();
            let delta = ((1.0 - w) / s.len() as f64).max(-mu[k]);
            if delta != 0.0 {
                mu[k] += delta;
                for &i in s {
                    x[i] += delta;
                }
            }
        }
        if sweeps % 16 == 0 || supports.len() <= 1 {
            gap = duality_gap(&supports, &mu, n_disks);
            if gap <= GAP_TARGET {
                break;
            }
        }
    }
    let lambda = accumulate(&supports, &mu, n_disks);
    let modulus = lambda.iter().map(|v| v * v).sum();
    let active = family
        .into_iter()
        .zip(&mu)
        .filter(|(_, &m)| m > 0.0)
        .map(|(chain, &mu)| ActiveChain { chain, mu })
        .collect();
    ExtremalMetric {
        lambda,
        modulus,
        active,
        duality_gap: gap.max(0.0),
        iterations: sweeps,
    }
}

fn accumulate(supports: &[Vec<usize>], mu: &[f64], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (s, &m) in supports.iter().zip(mu) {
        for &i in s {
            x[i] += m;
        }
    }
    x
}

fn duality_gap(supports: &[Vec<usize>], mu: &[f64], n: usize) -> f64 {
    if supports.is_empty() {
        return 0.0;
    }
    let x = accumulate(supports, mu, n);
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let min_w = supports
        .iter()
        .map(|s| s.iter().map(|&i| x[i]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    if min_w <= 0.0 {
        return f64::INFINITY;
    }
    let primal = norm2 / min_w.min(1.0).powi(2);
    let dual = 2.0 * mu.iter().sum::<f64>() - norm2;
    primal - dual
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(interior: &[usize]) -> Chain {
        let mut nodes = vec![1000];
        nodes.extend_from_slice(interior);
        nodes.push(1002);
        Chain { nodes }
    }

    #[test]
    fn one_chain_of_four() {
        let m = solve_modulus_explicit(&[chain(&[0, 1, 2, 3])], 4);
        assert!((m.modulus - 0.25).abs() < 1e-12);
        for l in &m.lambda {
            assert!((l - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_chains_add() {
        let m = solve_modulus_explicit(&[chain(&[0, 1]), chain(&[2, 3, 4, 5, 6])], 7);
        assert!((m.modulus - 0.7).abs() < 1e-10);
    }

    #[test]
    fn three_by_three_monotone_chains() {
        // rows j, with one vertical step allowed between neighbors
        let id = |i: usize, j: usize| 3 * j + i;
        let mut chains = Vec::new();
        for j in 0..3usize {
            chains.push(chain(&[id(0, j), id(1, j), id(2, j)]));
        }
        for j in 0..2usize {
            chains.push(chain(&[id(0, j), id(0, j + 1), id(1, j + 1), id(2, j + 1)]));
            chains.push(chain(&[id(0, j + 1), id(0, j), id(1, j), id(2, j)]));
        }
        let m = solve_modulus_explicit(&chains, 9);
        assert!((m.modulus - 1.0).abs() < 1e-9, "{}", m.modulus);
        for l in &m.lambda {
            assert!((l - 1.0 / 3.0).abs() < 1e-6);
        }
        assert!(m.duality_gap <= 1e-10);
    }
}
