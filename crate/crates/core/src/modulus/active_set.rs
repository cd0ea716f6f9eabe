//! Dual active-set method (Goldfarb–Idnani) for
//!
//! ```text
//!     minimize ½‖x‖²   subject to   Σ_{i∈c} x_i ≥ 1   for each constraint c
//! ```
//!
//! where every constraint is a 0/1 indicator over a set of disks. The Hessian
//! is the identity, so the factorization is a thin QR of the active normals.
//! Constraints can be added one at a time; the current point stays optimal
//! for every constraint enforced so far, which is what column generation
//! needs.

#[derive(Debug)]
pub(crate) struct ActiveSet {
    n: usize,
    pub x: Vec<f64>,
    /// Orthonormal basis of the span of active normals, one dense column each.
    q: Vec<Vec<f64>>,
    /// Upper-triangular factor, column `j` holds rows `0..=j`.
    r: Vec<Vec<f64>>,
    /// Active constraint handles and multipliers, aligned with `q`/`r`.
    pub active: Vec<usize>,
    pub u: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Enforce {
    Added,
    /// Already satisfied, nothing changed.
    Satisfied,
    /// The constraint cannot be satisfied (empty support).
    Infeasible,
}

fn dot_support(support: &[usize], v: &[f64]) -> f64 {
    support.iter().map(|&i| v[i]).sum()
}

impl ActiveSet {
    pub fn new(n: usize) -> ActiveSet {
        ActiveSet {
            n,
            x: vec![0.0; n],
            q: Vec::new(),
            r: Vec::new(),
            active: Vec::new(),
            u: Vec::new(),
            steps: 0,
        }
    }

    pub fn slack(&self, support: &[usize]) -> f64 {
        dot_support(support, &self.x) - 1.0
    }

    #[cfg(test)]
    /// Dual objective `Σu − ½‖Nu‖²`, using the current primal point for `Nu`.
    pub fn dual_value(&self) -> f64 {
        self.u.iter().sum::<f64>() - 0.5 * self.x.iter().map(|v| v * v).sum::<f64>()
    }

    fn solve_r(&self, d: &[f64]) -> Vec<f64> {
        let q = self.r.len();
        let mut out = vec![0.0; q];
        for i in (0..q).rev() {
            let mut s = d[i];
            for j in i + 1..q {
                s -= self.r[j][i] * out[j];
            }
            out[i] = s / self.r[i][i];
        }
        out
    }

    fn drop_active(&mut self, k: usize) {
        self.active.remove(k);
        self.u.remove(k);
        self.r.remove(k);
        let q = self.r.len();
        for j in k..q {
            let (a, b) = (self.r[j][j], self.r[j][j + 1]);
            let rho = a.hypot(b);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, b / rho) };
            for m in j..q {
                let (top, bot) = (self.r[m][j], self.r[m][j + 1]);
                self.r[m][j] = c * top + s * bot;
                self.r[m][j + 1] = -s * top + c * bot;
            }
            self.r[j].truncate(j + 1);
            let (lo, hi) = self.q.split_at_mut(j + 1);
            let (qa, qb) = (&mut lo[j], &mut hi[0]);
            for i in 0..self.n {
                let (va, vb) = (qa[i], qb[i]);
                qa[i] = c * va + s * vb;
                qb[i] = -s * va + c * vb;
            }
        }
        self.q.truncate(q);
    }

    /// Make constraint `handle` (with 0/1 normal on `support`) active,
    /// dropping active constraints whose multipliers would turn negative.
    pub fn enforce(&mut self, handle: usize, support: &[usize]) -> Enforce {
        if support.is_empty() {
            return Enforce::Infeasible;
        }
        if self.slack(support) >= 0.0 {
            return Enforce::Satisfied;
        }
        let mut u_new = 0.0;
        let dep_tol = 1e-12 * support.len() as f64;
        loop {
            self.steps += 1;
            let d1: Vec<f64> = self.q.iter().map(|col| dot_support(support, col)).collect();
            let mut z = vec![0.0; self.n];
            for &i in support {
                z[i] = 1.0;
            }
            for (col, &c) in self.q.iter().zip(&d1) {
                for i in 0..self.n {
                    z[i] -= c * col[i];
                }
            }
            // one round of reorthogonalization
            for col in &self.q {
                let c: f64 = col.iter().zip(&z).map(|(a, b)| a * b).sum();
                for i in 0..self.n {
                    z[i] -= c * col[i];
                }
            }
            let r = self.solve_r(&d1);
            let z_dot_n = dot_support(support, &z);
            let s_p = self.slack(support);
            let t2 = if z_dot_n > dep_tol {
                (-s_p / z_dot_n).max(0.0)
            } else {
                f64::INFINITY
            };
            let mut t1 = f64::INFINITY;
            let mut drop_k = None;
            for (k, &rk) in r.iter().enumerate() {
                if rk > 1e-14 {
                    let ratio = self.u[k] / rk;
                    if ratio < t1 {
                        t1 = ratio;
                        drop_k = Some(k);
                    }
                }
            }
            if t1.is_infinite() && t2.is_infinite() {
                return Enforce::Infeasible;
            }
            let t = t1.min(t2);
            if t2.is_finite() {
                for i in 0..self.n {
                    self.x[i] += t * z[i];
                }
            }
            for (uk, rk) in self.u.iter_mut().zip(&r) {
                *uk = (*uk - t * rk).max(0.0);
            }
            u_new += t;
            if t2 <= t1 {
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut col_r = d1;
                col_r.push(norm);
                self.r.push(col_r);
                self.q.push(z.iter().map(|v| v / norm).collect());
                self.active.push(handle);
                self.u.push(u_new);
                return Enforce::Added;
            }
            let k = drop_k.expect("partial step always has a blocking constraint");
            self.u[k] = 0.0;
            self.drop_active(k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(n: usize, constraints: &[Vec<usize>]) -> ActiveSet {
        let mut qp = ActiveSet::new(n);
        for _ in 0..100 {
            let worst = constraints
                .iter()
                .enumerate()
                .map(|(i, c)| (i, qp.slack(c)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if worst.1 >= -1e-13 {
                break;
            }
            qp.enforce(worst.0, &constraints[worst.0]);
        }
        qp
    }

    #[test]
    fn single_constraint_spreads_evenly() {
        let qp = run(4, &[vec![0, 1, 2, 3]]);
        for v in &qp.x {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn nested_constraints_drop_the_redundant_one() {
        // {0,1} ≥ 1 and {0} ≥ 1: optimum x = (1, 0)
        let qp = run(2, &[vec![0, 1], vec![0]]);
        assert!((qp.x[0] - 1.0).abs() < 1e-14);
        assert!(qp.x[1].abs() < 1e-14);
        let dead: f64 = qp
            .active
            .iter()
            .zip(&qp.u)
            .filter(|(h, _)| **h == 0)
            .map(|(_, u)| *u)
            .sum();
        assert!(dead.abs() < 1e-14);
    }

    #[test]
    fn dependent_constraints() {
        // rows of a 2x2 grid plus both "diagonal" chains; rank 3 in R^4
        let cons = vec![vec![0, 1], vec![2, 3], vec![0, 3], vec![2, 1]];
        let qp = run(4, &cons);
        for v in &qp.x {
            assert!((v - 0.5).abs() < 1e-13);
        }
        let primal: f64 = qp.x.iter().map(|v| v * v).sum::<f64>() / 2.0;
        assert!((primal - qp.dual_value()).abs() < 1e-13);
    }
}
