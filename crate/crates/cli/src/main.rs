mod svg;

use anyhow::Context;
use carpet_core::conjugate::trace_level;
use carpet_core::exec::{init_thread_pool, Exec};
use carpet_core::geometry::{generate_standard_carpet, load_carpet, to_canonical_json, CarpetConfig};
use carpet_core::layout::{PlacedSquare, SquareLayout};
use carpet_core::modulus::Tolerances;
use carpet_core::pipeline::{self, RunConfig, Solved, StageError, Timings};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "carpet", version, about = "Square tilings of finite Sierpinski carpets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the level-n standard carpet as JSON.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=6))]
        standard: u32,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve modulus, potential, conjugate and layout.
    Solve(SolveArgs),
    /// Solve and run every verification check.
    Verify(SolveArgs),
    /// Draw the input carpet and the square layout as SVG.
    Render {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opts: SolverOpts,
        /// Read the layout from this file instead of solving for it.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Levels of the potential to overlay on the input drawing.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Summarize a report.json written by `verify`.
    Report {
        /// A report file or the directory holding one.
        path: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Use the level-n standard carpet.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=6))]
    standard: Option<u32>,
    /// Read a carpet JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct SolverOpts {
    /// Raster pitch for the contact graph.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tol_gap: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_chain: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_kkt: f64,
    /// Conjugate tolerance as a fraction of D.
    #[arg(long, default_value_t = 0.02)]
    tol_conj: f64,
    #[arg(long, default_value_t = 3)]
    levels_per_disk: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also compare the layout against the input (square tilings only).
    #[arg(long)]
    rigidity: bool,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    opts: SolverOpts,
    #[arg(short, long, default_value = ".")]
    output: PathBuf,
}

impl SolverOpts {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            resolution: self.resolution,
            tolerances: Tolerances {
                gap: self.tol_gap,
                chain: self.tol_chain,
                kkt: self.tol_kkt,
                ..Tolerances::default()
            },
            tol_conj: self.tol_conj,
            levels_per_disk: self.levels_per_disk,
            seed: self.seed,
            rigidity: self.rigidity,
            exec: if self.sequential {
                Exec::Sequential
            } else {
                Exec::Parallel
            },
            ..RunConfig::default()
        }
    }
}

enum Failure {
    /// A pipeline stage or I/O failed.
    Stage(String),
    /// Everything ran but some check failed.
    Checks,
}

impl From<StageError> for Failure {
    fn from(e: StageError) -> Self {
        Failure::Stage(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Stage(format!("{e:#}"))
    }
}

fn load_input(input: &InputArgs) -> Result<CarpetConfig, Failure> {
    let r = match (&input.standard, &input.input) {
        (Some(n), _) => generate_standard_carpet(*n),
        (None, Some(p)) => load_carpet(p),
        (None, None) => unreachable!("clap requires one input"),
    };
    r.map_err(|error| StageError { stage: "input", error }.into())
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("io: cannot write {}", path.display()))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn timings_json(tm: &Timings) -> String {
    let map: serde_json::Map<_, _> = tm
        .0
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::json!(v)))
        .collect();
    pretty(&serde_json::Value::Object(map))
}

fn write_solution(dir: &Path, solved: &Solved, tm: &Timings) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("io: cannot create {}", dir.display()))?;
    write(&dir.join("solution.json"), &pretty(&solved.solution_json()))?;
    write(&dir.join("layout.json"), &pretty(&solved.layout.to_json()))?;
    write(&dir.join("timings.json"), &timings_json(tm))
}

fn cmd_solve(args: &SolveArgs, check: bool) -> Result<(), Failure> {
    let config = load_input(&args.input)?;
    let rc = args.opts.run_config();
    let (solved, mut tm) = pipeline::solve(&config, &rc)?;
    let d = solved.metric.modulus;
    if !check {
        write_solution(&args.output, &solved, &tm)?;
        println!("D = {d:.12}");
        return Ok(());
    }
    let report = pipeline::verify(&config, &solved, &rc, &mut tm)?;
    write_solution(&args.output, &solved, &tm)?;
    write(&args.output.join("report.json"), &report.to_json_string())?;
    println!("D = {d:.12}");
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:e} (want {} {:e})", c.name, c.value, c.op, c.target);
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn read_layout(path: &Path) -> anyhow::Result<SquareLayout> {
    let text =
        fs::read_to_string(path).with_context(|| format!("io: cannot read {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).context("layout: invalid JSON")?;
    let d = v["rect"][3].as_f64().context("layout: missing rect")?;
    let mut squares = Vec::new();
    for q in v["squares"].as_array().context("layout: missing squares")? {
        let field = |k: &str| q[k].as_f64().with_context(|| format!("layout: square missing `{k}`"));
        squares.push(PlacedSquare {
            id: q["id"].as_u64().context("layout: square missing `id`")?,
            x: field("x")?,
            y: field("y")?,
            s: field("s")?,
        });
    }
    let degenerate = v["degenerate"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_u64()).collect())
        .unwrap_or_default();
    Ok(SquareLayout {
        d,
        squares,
        degenerate,
    })
}

fn cmd_render(
    input: &InputArgs,
    opts: &SolverOpts,
    layout: Option<&Path>,
    levels: &[f64],
    out: &Path,
) -> Result<(), Failure> {
    let config = load_input(input)?;
    let solved = if layout.is_none() || !levels.is_empty() {
        Some(pipeline::solve(&config, &opts.run_config())?.0)
    } else {
        None
    };
    let mut paths = Vec::new();
    if let Some(s) = &solved {
        for &t in levels {
            let c = trace_level(&s.solution, &s.graph, t)
                .map_err(|error| StageError { stage: "render", error })?;
            paths.push((t, c.path));
        }
    }
    let layout = match layout {
        Some(p) => read_layout(p)?,
        None => solved.expect("solved when no layout file").layout,
    };
    fs::create_dir_all(out)
        .with_context(|| format!("io: cannot create {}", out.display()))
        .map_err(Failure::from)?;
    write(&out.join("input.svg"), &svg::render_input(&config, &paths))?;
    write(&out.join("layout.svg"), &svg::render_layout(&layout))?;
    Ok(())
}

fn cmd_report(path: &Path) -> Result<(), Failure> {
    let file = if path.is_dir() {
        path.join("report.json")
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file)
        .with_context(|| format!("io: cannot read {}", file.display()))
        .map_err(Failure::from)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .context("report: invalid JSON")
        .map_err(Failure::from)?;
    let checks = v["checks"]
        .as_array()
        .context("report: missing checks")
        .map_err(Failure::from)?;
    if let Some(d) = v["modulus"]["d"].as_f64() {
        println!("D = {d:.12}");
    }
    for c in checks {
        let mark = if c["passed"].as_bool() == Some(true) { "ok  " } else { "FAIL" };
        println!(
            "{mark} {:<32} {:>12.4e} {} {:e}",
            c["name"].as_str().unwrap_or("?"),
            c["value"].as_f64().unwrap_or(f64::NAN),
            c["op"].as_str().unwrap_or("?"),
            c["target"].as_f64().unwrap_or(f64::NAN),
        );
    }
    if v["passed"].as_bool() == Some(true) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(s) = std::env::var("CARPET_THREADS") {
        match s.parse::<usize>() {
            Ok(n) if n > 0 => {
                init_thread_pool(n);
            }
            _ => {
                eprintln!("error: CARPET_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let result = match &cli.command {
        Command::Gen { standard, output } => {
            load_input(&InputArgs {
                standard: Some(*standard),
                input: None,
            })
            .and_then(|c| {
                let json = to_canonical_json(&c);
                match output {
                    Some(p) => write(p, &json).map_err(Failure::from),
                    None => {
                        print!("{json}");
                        Ok(())
                    }
                }
            })
        }
        Command::Solve(a) => cmd_solve(a, false),
        Command::Verify(a) => cmd_solve(a, true),
        Command::Render {
            input,
            opts,
            layout,
            levels,
            output,
        } => cmd_render(input, opts, layout.as_deref(), levels, output),
        Command::Report { path } => cmd_report(path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Stage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Checks) => ExitCode::from(3),
    }
}
