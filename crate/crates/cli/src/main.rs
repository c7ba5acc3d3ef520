//! `qdp analyze | diagram | simulate | validate --config FILE [--out DIR] [--svg]`
//!
//! Exit codes: 0 ok, 1 usage, 2 analysis error, 3 validation failure.
//! `QDP_THREADS` caps the worker pool used for replica ensembles.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdp_core::report::{self, AnalysisReport};
use qdp_core::simulate::{self, Record, SsaOptions};
use qdp_core::validate::{self, system_size};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{PathFormat, RunConfig};

#[derive(Parser)]
#[command(name = "qdp", version, about = "Scales, diagrams and limit validation for quasi-diffusive perturbations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Envelope, pivots, dd curve, branch and classification as JSON.
    Analyze(Common),
    /// dd-curve and scale-profile CSVs at the first ε.
    Diagram {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        svg: bool,
    },
    /// Chain ensembles at every ε.
    Simulate(Common),
    /// Rescaled chain against the limit; a trend when several ε are given.
    Validate(Common),
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Analysis(qdp_core::Error),
    Report(String),
    Validation,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Analysis(_) | Failure::Report(_) => 2,
            Failure::Validation => 3,
        }
    }
}

impl From<qdp_core::Error> for Failure {
    fn from(e: qdp_core::Error) -> Self {
        Failure::Analysis(e)
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("cannot write {}: {e}", path.display()))
}

fn write(out: &Path, name: &str, body: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(out).map_err(|e| io(out, e))?;
    let path = out.join(name);
    std::fs::write(&path, body).map_err(|e| io(&path, e))?;
    Ok(path)
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// `body` with the resolved config and tool version attached.
fn with_provenance<T: Serialize>(body: &T, cfg: &RunConfig) -> Value {
    let mut v = serde_json::to_value(body).expect("serializable");
    if let Value::Object(m) = &mut v {
        m.insert("config".into(), serde_json::to_value(cfg).expect("serializable"));
        m.insert("version".into(), json!(report::VERSION));
    }
    v
}

fn analyze(cfg: &RunConfig, out: &Path) -> Result<AnalysisReport, Failure> {
    let (f, g) = cfg.characteristics()?;
    let (rep, _, _) = report::analyze(&f, &g, cfg.scales.as_ref());
    let path = write(out, "analysis.json", &pretty(&with_provenance(&rep, cfg)))?;
    println!("wrote {}", path.display());
    if rep.ok() {
        Ok(rep)
    } else {
        let kinds: Vec<&str> = rep.errors.iter().map(|e| e.kind).collect();
        Err(Failure::Report(kinds.join(", ")))
    }
}

fn diagram(cfg: &RunConfig, out: &Path, svg: bool) -> Result<(), Failure> {
    let eps = *cfg.epsilon.first().ok_or_else(|| Failure::Usage("diagram needs at least one ε".into()))?;
    let (f, g) = cfg.characteristics()?;
    let (rep, _, curve) = report::analyze(&f, &g, None);
    let curve = curve.ok_or_else(|| Failure::Report(rep.errors.first().map_or("no dd curve".into(), |e| e.message.clone())))?;
    let lam_floor = eps.powf(cfg.diagram.lam_floor_exp);
    let per_piece = (cfg.diagram.points / curve.pieces.len().max(1)).max(2);
    println!("wrote {}", write(out, "dd_curve.csv", &report::dd_curve_csv(&curve, eps, per_piece, lam_floor))?.display());
    match &rep.scale_profile {
        Some(profile) => {
            let rows = report::diagram_rows(profile, eps, cfg.diagram.points, lam_floor);
            println!("wrote {}", write(out, "diagram.csv", &report::diagram_csv(&rows))?.display());
            let body = json!({ "eps": eps, "bifurcation": rep.bifurcation, "profile": profile, "errata_notes": rep.errata_notes });
            println!("wrote {}", write(out, "profile.json", &pretty(&with_provenance(&body, cfg)))?.display());
            if svg {
                println!("wrote {}", write(out, "diagram.svg", &report::diagram_svg(&rows, profile, eps))?.display());
            }
        }
        None => println!("no equilibrium branch: scale profile skipped"),
    }
    Ok(())
}

fn simulate_cmd(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let sim = cfg.simulation.as_ref().ok_or_else(|| Failure::Usage("simulate needs a simulation section".into()))?;
    let template = cfg.model()?;
    if cfg.epsilon.is_empty() {
        return Err(Failure::Usage("simulate needs at least one ε".into()));
    }
    let opts = SsaOptions { record: sim.record.unwrap_or(Record::AllJumps), x_max: sim.x_max, ..Default::default() };
    let mut runs = Vec::new();
    for &eps in &cfg.epsilon {
        let n = system_size(eps)?;
        let lambda = sim.lambda.as_ref().map_or(0.0, |l| l.eval(eps));
        let model = template.instantiate(n, lambda)?;
        let paths = simulate::ssa_ensemble(&model, sim.x0, sim.t_end, sim.seed, sim.replicas, &opts)?;
        let tag = format!("eps{eps}");
        let files = match sim.format {
            PathFormat::Jsonl => {
                let mut s = String::new();
                for (k, p) in paths.iter().enumerate() {
                    let pts: Vec<[f64; 2]> = p.times.iter().zip(&p.values).map(|(t, v)| [*t, *v]).collect();
                    let line = json!({ "seed": sim.seed, "replica": k, "terminal": p.terminal, "end_time": p.end_time, "path": pts });
                    let _ = writeln!(s, "{line}");
                }
                vec![write(out, &format!("paths_{tag}.jsonl"), &s)?]
            }
            PathFormat::Csv => paths
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let mut s = String::from("t,value\n");
                    for (t, v) in p.times.iter().zip(&p.values) {
                        let _ = writeln!(s, "{t},{v}");
                    }
                    write(&out.join(format!("paths_{tag}")), &format!("path_{k:05}.csv"), &s)
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        println!("wrote {} path file(s) for ε = {eps}", files.len());
        runs.push(json!({ "eps": eps, "N": n, "lambda": lambda, "replicas": paths.len() }));
    }
    let meta = json!({ "rng": simulate::RNG_ALGORITHM, "runs": runs });
    println!("wrote {}", write(out, "simulate.json", &pretty(&with_provenance(&meta, cfg)))?.display());
    Ok(())
}

fn validate_cmd(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let pipeline = cfg.pipeline()?;
    let pass = match cfg.epsilon.as_slice() {
        [] => return Err(Failure::Usage("validate needs at least one ε".into())),
        [eps] => {
            let run = validate::run_pipeline(&pipeline, *eps)?;
            let body = json!({ "rng": simulate::RNG_ALGORITHM, "runs": [run], "pass": run.pass, "thresholds_note": THRESHOLD_NOTE });
            println!("wrote {}", write(out, "validation.json", &pretty(&with_provenance(&body, cfg)))?.display());
            run.pass
        }
        grid => {
            let trend = validate::convergence_trend(&pipeline, grid)?;
            let last_ok = trend.runs.last().is_some_and(|r| r.pass);
            let pass = last_ok && trend.non_increasing;
            let body = json!({
                "rng": simulate::RNG_ALGORITHM,
                "trend": trend.rows,
                "non_increasing": trend.non_increasing,
                "runs": trend.runs,
                "pass": pass,
                "thresholds_note": THRESHOLD_NOTE,
            });
            println!("wrote {}", write(out, "validation.json", &pretty(&with_provenance(&body, cfg)))?.display());
            println!("wrote {}", write(out, "trend.csv", &trend.to_csv())?.display());
            pass
        }
    };
    println!("validation {}", if pass { "passed" } else { "failed" });
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

const THRESHOLD_NOTE: &str =
    "Thresholds are engineering choices: the limit theorems give no convergence rate. A trend passes when the smallest-ε run passes and KS never exceeds the previous upper bootstrap quantile.";

fn set_threads() -> Result<(), Failure> {
    if let Ok(s) = std::env::var("QDP_THREADS") {
        let n: usize = s.parse().map_err(|_| Failure::Usage(format!("QDP_THREADS must be a positive integer, got {s:?}")))?;
        if n == 0 {
            return Err(Failure::Usage("QDP_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    set_threads()?;
    match cli.command {
        Command::Analyze(c) => analyze(&RunConfig::load(&c.config)?, &c.out).map(|_| ()),
        Command::Diagram { common, svg } => diagram(&RunConfig::load(&common.config)?, &common.out, svg),
        Command::Simulate(c) => simulate_cmd(&RunConfig::load(&c.config)?, &c.out),
        Command::Validate(c) => validate_cmd(&RunConfig::load(&c.config)?, &c.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Analysis(e) => eprintln!("analysis error [{}]: {e}", e.kind()),
                Failure::Report(m) => eprintln!("analysis error: {m} (details in the report)"),
                Failure::Validation => {}
            }
            ExitCode::from(f.code())
        }
    }
}
