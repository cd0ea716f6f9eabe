//! End-to-end run: geometry, contact graph, extremal metric, potential,
//! conjugate, layout, then every verification check against its target.

use crate::conjugate::{
    compute_conjugate, dual_crosscheck, verify_level_mass, ConjugateSolution, DualReport,
    LevelMassReport,
};
use crate::error::Error;
use crate::exec::Exec;
use crate::geometry::{validate_carpet, CarpetConfig, Side};
use crate::layout::{
    build_layout, modulus_pushforward_check, rigidity_check, verify_layout, LayoutReport,
    PushforwardReport, RigidityReport, SquareLayout,
};
use crate::modulus::{
    check_admissible, solve_modulus, AdmissibilityOptions, ExtremalMetric, ModulusProblem,
    Tolerances,
};
use crate::passage::{build_passage_graph, default_resolution, PassageGraph};
use crate::potential::{
    check_comparison, check_maximum_principle, recover_potential, surgery, ComparisonReport,
    HarmonicSolution, MaxPrincipleReport,
};
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Raster pitch; the default is derived from the smallest disk.
    pub resolution: Option<f64>,
    pub tolerances: Tolerances,
    /// Conjugate tolerance as a fraction of D.
    pub tol_conj: f64,
    pub levels_per_disk: usize,
    pub level_samples: usize,
    pub seed: u64,
    pub region_trials: usize,
    pub admissible_samples: usize,
    pub pushforward: bool,
    pub dual_check: bool,
    pub rigidity: bool,
    pub exec: Exec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            resolution: None,
            tolerances: Tolerances::default(),
            tol_conj: 0.02,
            levels_per_disk: 3,
            level_samples: 64,
            seed: 0,
            region_trials: 200,
            admissible_samples: 100,
            pushforward: true,
            dual_check: true,
            rigidity: false,
            exec: Exec::Parallel,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let t = &self.tolerances;
        let positive = [t.gap, t.chain, t.kkt, t.lambda, self.tol_conj];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.levels_per_disk == 0 || self.level_samples == 0 {
            return Err(Error::InvalidArgument("level counts must be positive".into()));
        }
        if let Some(h) = self.resolution {
            if !(h > 0.0) {
                return Err(Error::InvalidArgument("resolution must be positive".into()));
            }
        }
        Ok(())
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {error}")]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

fn stage<T>(name: &'static str, r: Result<T, Error>) -> Result<T, StageError> {
    r.map_err(|error| StageError { stage: name, error })
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub graph: PassageGraph,
    pub metric: ExtremalMetric,
    pub solution: HarmonicSolution,
    pub conjugate: ConjugateSolution,
    pub layout: SquareLayout,
}

impl Solved {
    /// `{"metric", "potential", "conjugate"}`
    pub fn solution_json(&self) -> serde_json::Value {
        serde_json::json!({
            "metric": self.metric.to_json(&self.graph),
            "potential": self.solution.to_json(),
            "conjugate": self.conjugate.to_json(&self.graph),
        })
    }
}

/// Wall time per stage in seconds, kept apart from the report so the report
/// stays byte-identical across runs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings(pub Vec<(String, f64)>);

impl Timings {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push((name.to_string(), start.elapsed().as_secs_f64()));
        out
    }
}

pub fn solve(config: &CarpetConfig, rc: &RunConfig) -> Result<(Solved, Timings), StageError> {
    stage("config", rc.validate())?;
    let mut tm = Timings::default();
    let geo = tm.time("geometry", || validate_carpet(config));
    if !geo.failures.is_empty() {
        return Err(StageError {
            stage: "geometry",
            error: Error::Validation(geo.failures),
        });
    }
    let h = rc.resolution.unwrap_or_else(|| default_resolution(config));
    let graph = stage("passage", tm.time("passage", || build_passage_graph(config, h)))?;
    let metric = stage(
        "modulus",
        tm.time("modulus", || {
            solve_modulus(
                &ModulusProblem::crossing(graph.clone(), Side::Left, Side::Right),
                &rc.tolerances,
            )
        }),
    )?;
    let solution = stage("potential", tm.time("potential", || recover_potential(&graph, &metric)))?;
    let conjugate = stage(
        "conjugate",
        tm.time("conjugate", || {
            compute_conjugate(&solution, &graph, rc.levels_per_disk, rc.tolerances.lambda, rc.exec)
        }),
    )?;
    let layout = stage(
        "layout",
        build_layout(&solution, &conjugate, rc.tolerances.lambda),
    )?;
    Ok((
        Solved {
            graph,
            metric,
            solution,
            conjugate,
            layout,
        },
        tm,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub op: &'static str,
    pub target: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, target: f64) -> Check {
        Check {
            name: name.into(),
            value,
            op: "<=",
            target,
            passed: value <= target,
        }
    }

    fn at_least(name: &str, value: f64, target: f64) -> Check {
        Check {
            name: name.into(),
            value,
            op: ">=",
            target,
            passed: value >= target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub disks: usize,
    pub k0_max: f64,
    pub k1_min: f64,
    pub delta_min: f64,
    pub touching_pairs: usize,
    pub resolution: f64,
    pub contact_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusSummary {
    pub d: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub active_chains: usize,
    pub invariant_failures: Vec<String>,
    pub admissible_min_weight: f64,
    pub admissible_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateSummary {
    pub t_independence_error: f64,
    pub levels_traced: usize,
    pub degenerate: usize,
    pub dual: Option<DualReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub geometry: GeometrySummary,
    pub modulus: ModulusSummary,
    pub clamped: usize,
    pub potential_invariant_failures: Vec<String>,
    pub level_mass: LevelMassReport,
    pub conjugate: ConjugateSummary,
    pub layout: LayoutReport,
    pub squares_outside_rect: usize,
    pub pushforward: Option<PushforwardReport>,
    pub max_principle: MaxPrincipleReport,
    pub comparison: ComparisonReport,
    pub rigidity: Option<RigidityReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }
}

/// Run every check on a solved instance.
pub fn verify(
    config: &CarpetConfig,
    solved: &Solved,
    rc: &RunConfig,
    tm: &mut Timings,
) -> Result<VerificationReport, StageError> {
    let tol = &rc.tolerances;
    let g = &solved.graph;
    let sol = &solved.solution;
    let d = sol.energy;
    let geo = validate_carpet(config);
    let geometry = GeometrySummary {
        disks: g.n_disks,
        k0_max: geo.k0_max,
        k1_min: geo.k1_min,
        delta_min: geo.delta_min,
        touching_pairs: geo.touching_pairs,
        resolution: g.h,
        contact_edges: g.edge_count(),
    };

    let adm = stage(
        "modulus",
        tm.time("admissibility", || {
            check_admissible(
                g,
                &solved.metric.lambda,
                Side::Left,
                Side::Right,
                &AdmissibilityOptions {
                    samples: rc.admissible_samples,
                    seed: rc.seed,
                    drop_fraction: 0.0,
                    eps_chain: tol.chain,
                },
                rc.exec,
            )
        }),
    )?;
    let modulus = ModulusSummary {
        d: solved.metric.modulus,
        duality_gap: solved.metric.duality_gap,
        iterations: solved.metric.iterations,
        active_chains: solved.metric.active.len(),
        invariant_failures: solved.metric.invariant_failures(tol),
        admissible_min_weight: adm.min_weight,
        admissible_violations: adm.violations.len(),
    };
    let potential_invariant_failures = sol.invariant_failures(g, tol.chain);

    let level_mass = stage(
        "conjugate",
        tm.time("level_mass", || verify_level_mass(sol, g, rc.level_samples, rc.exec)),
    )?;
    let dual = if rc.dual_check {
        Some(stage(
            "conjugate",
            tm.time("dual_crosscheck", || dual_crosscheck(sol, &solved.conjugate, g, tol)),
        )?)
    } else {
        None
    };
    let conjugate = ConjugateSummary {
        t_independence_error: solved.conjugate.t_independence_error,
        levels_traced: solved.conjugate.levels.len(),
        degenerate: solved.conjugate.degenerate.len(),
        dual,
    };

    let layout = tm.time("verify_layout", || verify_layout(&solved.layout, g, sol));
    let squares_outside_rect = solved.layout.outside_rect(1e-6 * d.max(1.0)).len();
    let pushforward = if rc.pushforward {
        Some(tm.time("pushforward", || {
            modulus_pushforward_check(g, &solved.layout, solved.metric.modulus, tol)
        }))
    } else {
        None
    };

    let max_principle = tm.time("max_principle", || {
        check_maximum_principle(sol, g, rc.region_trials, rc.seed, 1e-9, rc.exec)
    });
    let cut: Vec<usize> = g.side_disks(Side::Left).into_iter().take(1).collect();
    let (gb, sb) = surgery(g, sol, &cut);
    let comparison = stage("potential", check_comparison(sol, &sb, g, &gb, 1e-9))?;

    let rigidity = if rc.rigidity {
        Some(stage("layout", rigidity_check(config, &solved.layout))?)
    } else {
        None
    };

    let mut checks = vec![
        Check::at_most("duality_gap", modulus.duality_gap, tol.gap * d.max(1.0)),
        Check::at_most(
            "metric_invariant_failures",
            modulus.invariant_failures.len() as f64,
            0.0,
        ),
        Check::at_least("admissible_min_weight", adm.min_weight, 1.0 - tol.chain),
        Check::at_most(
            "potential_invariant_failures",
            potential_invariant_failures.len() as f64,
            0.0,
        ),
        Check::at_most("level_mass_max_rel_error", level_mass.max_rel_error, 0.02),
        Check::at_most(
            "t_independence_error",
            conjugate.t_independence_error,
            rc.tol_conj * d,
        ),
    ];
    if let Some(dual) = &conjugate.dual {
        checks.push(Check::at_most("dual_q90_error", dual.q90_error, rc.tol_conj * d));
    }
    checks.push(Check::at_most("overlap_over_d", layout.overlap_area / d, 1e-4));
    checks.push(Check::at_most("boundary_worst", layout.boundary.worst(), tol.chain));
    checks.push(Check::at_most(
        "squares_outside_rect",
        squares_outside_rect as f64,
        0.0,
    ));
    if let Some(p) = &pushforward {
        let bad = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        checks.push(Check::at_most("pushforward_mismatch_lr", bad(p.mismatch_lr), 0.05));
        checks.push(Check::at_most("pushforward_mismatch_bt", bad(p.mismatch_bt), 0.05));
        checks.push(Check::at_most(
            "image_product_deviation",
            bad((p.image_product - 1.0).abs()),
            0.05,
        ));
    }
    checks.push(Check::at_most(
        "max_principle_violations",
        max_principle.violations as f64,
        0.0,
    ));
    checks.push(Check::at_least("comparison_worst", comparison.worst, -1e-9));
    if let Some(r) = &rigidity {
        checks.push(Check::at_most("rigidity_displacement", r.max_displacement, 1e-6));
        checks.push(Check::at_most("rigidity_d_error", r.d_error, 1e-8));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        geometry,
        modulus,
        clamped: sol.clamped.len(),
        potential_invariant_failures,
        level_mass,
        conjugate,
        layout,
        squares_outside_rect,
        pushforward,
        max_principle,
        comparison,
        rigidity,
        checks,
        passed,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub solved: Solved,
    pub report: VerificationReport,
    pub timings: Timings,
}

pub fn run(config: &CarpetConfig, rc: &RunConfig) -> Result<RunOutput, StageError> {
    let (solved, mut timings) = solve(config, rc)?;
    let report = verify(config, &solved, rc, &mut timings)?;
    Ok(RunOutput {
        solved,
        report,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_standard_carpet;

    #[test]
    fn level_one_passes_everything() {
        let c = generate_standard_carpet(1).unwrap();
        let out = run(&c, &RunConfig::default()).unwrap();
        let failed: Vec<_> = out.report.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!((out.report.modulus.d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bad_tolerance_is_a_config_error() {
        let c = generate_standard_carpet(1).unwrap();
        let mut rc = RunConfig::default();
        rc.tol_conj = 0.0;
        let e = run(&c, &rc).unwrap_err();
        assert_eq!(e.stage, "config");
    }
}
