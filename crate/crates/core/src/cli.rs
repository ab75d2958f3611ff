//! `netconc` command-line front end.
//!
//! Each subcommand reads a JSON config, writes its artifacts plus a
//! `manifest.json` into the output directory, and reports failures as a
//! single JSON line on stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{best_mu, bound_eval, gamma_star, BoundSpec};
use crate::ensembles::{EnsembleSpec, EnsembleVariant};
use crate::error::{Error, Result};
use crate::experiments::{
    declared_communities, fit_scaling, gamma_sweep, gamma_sweep_csv, run_concentration_in, switch_point, write_report,
    ExperimentConfig,
};
use crate::functionals::{evaluate, Functional};
use crate::graph::{ConstraintSpec, Graph, SpinConfig};
use crate::optimizers::OptimizerPolicy;

pub const MANIFEST: &str = "manifest.json";
pub const OUT_ENV: &str = "NETCONC_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "netconc",
    version,
    about = "Network ensembles, spin Hamiltonians and concentration experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = "netconc-out")]
    pub out: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// JSON config file.
    #[arg(long, short)]
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample graphs from an ensemble into edge-list files.
    Gen(ConfigArg),
    /// Evaluate a functional on a graph and label file.
    Eval(ConfigArg),
    /// Find a ground state of a functional on a graph.
    Opt(ConfigArg),
    /// Tabulate a concentration bound over a t grid.
    Bounds(ConfigArg),
    /// Run a concentration experiment over several system sizes.
    Concentrate(ConfigArg),
    /// Sweep the q-Potts resolution parameter on a two-community graph.
    GammaSweep(ConfigArg),
    /// Fit log(std) against log(N).
    Fit(ConfigArg),
    /// Re-run a previous invocation from its manifest.
    Replay {
        /// Path to a manifest.json written by an earlier run.
        #[arg(long, short)]
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Eval(_) => "eval",
            Command::Opt(_) => "opt",
            Command::Bounds(_) => "bounds",
            Command::Concentrate(_) => "concentrate",
            Command::GammaSweep(_) => "gamma-sweep",
            Command::Fit(_) => "fit",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub netconc_version: String,
    pub subcommand: String,
    /// Directory that relative paths in `config` resolve against.
    pub base_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: Value,
}

fn default_count() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub ensemble: EnsembleVariant,
    #[serde(default)]
    pub seed: u64,
    /// Number of graphs; files are `graph_<index>.edgelist`.
    #[serde(default = "default_count")]
    pub count: u64,
    #[serde(default)]
    pub start: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub graph: PathBuf,
    pub labels: PathBuf,
    pub functional: Functional,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptConfig {
    pub graph: PathBuf,
    pub functional: Functional,
    #[serde(default)]
    pub constraint: ConstraintSpec,
    pub optimizer: OptimizerPolicy,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub bound: BoundSpec,
    pub ts: Vec<f64>,
    /// Minimise over the free mu at every t; adds a `mu` column.
    #[serde(default)]
    pub optimize_mu: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSweepConfig {
    pub graph: PathBuf,
    /// Community of each node, 0 or 1.
    pub membership: Vec<usize>,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "two")]
    pub q: usize,
    pub gammas: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Inline `[N, std]` pairs.
    #[serde(default)]
    pub points: Option<Vec<(f64, f64)>>,
    /// CSV with an `N` column and a `std` or `std_H` column.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

/// Exit status for an error: 2 for config or schema problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Spec(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

pub fn error_line(e: &Error) -> String {
    json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

/// Parses `args` and runs the command, writing to the given streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = writeln!(stderr, "{}", error_line(&Error::Config(text.trim().to_string())));
            }
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_line(&e));
            exit_code(&e)
        }
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    // output is buffered so the job can run inside a worker pool
    let mut buf: Vec<u8> = Vec::new();
    let job = |buf: &mut Vec<u8>| -> Result<()> {
        let manifest = match &cli.command {
            Command::Replay { manifest } => {
                let text = std::fs::read_to_string(manifest)?;
                serde_json::from_str::<Manifest>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", manifest.display())))?
            }
            cmd => {
                let ConfigArg { config } = match cmd {
                    Command::Gen(a)
                    | Command::Eval(a)
                    | Command::Opt(a)
                    | Command::Bounds(a)
                    | Command::Concentrate(a)
                    | Command::GammaSweep(a)
                    | Command::Fit(a) => a,
                    Command::Replay { .. } => unreachable!(),
                };
                let text = std::fs::read_to_string(config)?;
                let mut value: Value =
                    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
                let base = config
                    .parent()
                    .map(|p| if p.as_os_str().is_empty() { Path::new(".") } else { p })
                    .unwrap_or(Path::new("."));
                let base_dir = std::fs::canonicalize(base)?;
                let seeded = matches!(cmd, Command::Gen(_) | Command::Opt(_) | Command::Concentrate(_));
                if let (true, Some(seed), Value::Object(map)) = (seeded, cli.seed, &mut value) {
                    map.insert("seed".into(), json!(seed));
                }
                let seed = if seeded {
                    Some(value.get("seed").and_then(Value::as_u64).unwrap_or(0))
                } else {
                    None
                };
                Manifest {
                    netconc_version: env!("CARGO_PKG_VERSION").to_string(),
                    subcommand: cmd.name().to_string(),
                    base_dir,
                    seed,
                    config: value,
                }
            }
        };
        execute(&manifest, &cli.out, buf)
    };
    let res = match cli.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            pool.install(|| job(&mut buf))
        }
        None => job(&mut buf),
    };
    stdout.write_all(&buf)?;
    res
}

fn typed<T: DeserializeOwned>(m: &Manifest) -> Result<T> {
    serde_json::from_value(m.config.clone()).map_err(|e| Error::Config(format!("{} config: {e}", m.subcommand)))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs a manifest into `out`; the manifest is written first.
pub fn execute(m: &Manifest, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let base = m.base_dir.as_path();
    // parse before touching the output directory
    match m.subcommand.as_str() {
        "gen" => typed::<GenConfig>(m).map(|_| ())?,
        "eval" => typed::<EvalConfig>(m).map(|_| ())?,
        "opt" => typed::<OptConfig>(m).map(|_| ())?,
        "bounds" => typed::<BoundsConfig>(m).map(|_| ())?,
        "concentrate" => typed::<ExperimentConfig>(m).map(|_| ())?,
        "gamma-sweep" => typed::<GammaSweepConfig>(m).map(|_| ())?,
        "fit" => typed::<FitConfig>(m).map(|_| ())?,
        other => return Err(Error::Config(format!("unknown subcommand {other:?}"))),
    }
    std::fs::create_dir_all(out)?;
    write_json(&out.join(MANIFEST), m)?;

    match m.subcommand.as_str() {
        "gen" => {
            let cfg: GenConfig = typed(m)?;
            let ens = EnsembleSpec::new(cfg.ensemble.clone(), cfg.seed).build(Some(base))?;
            for i in cfg.start..cfg.start + cfg.count {
                let g = ens.sample(i)?;
                g.save_edge_list(out.join(format!("graph_{i}.edgelist")))?;
                writeln!(stdout, "graph_{i}.edgelist N={} m={}", g.node_count(), g.edge_count())?;
            }
        }
        "eval" => {
            let cfg: EvalConfig = typed(m)?;
            let g = Graph::load_edge_list(resolve(base, &cfg.graph))?;
            let text = std::fs::read_to_string(resolve(base, &cfg.labels))?;
            let s = SpinConfig::parse_label_lines(&text, cfg.functional.q())?;
            let h = evaluate(&cfg.functional, &g, &s)?;
            write_json(
                &out.join("eval.json"),
                &json!({ "functional": cfg.functional.name(), "n": g.node_count(), "m": g.edge_count(), "value": h }),
            )?;
            writeln!(stdout, "{h}")?;
        }
        "opt" => {
            let cfg: OptConfig = typed(m)?;
            let g = Graph::load_edge_list(resolve(base, &cfg.graph))?;
            let r = cfg.optimizer.run(&cfg.functional, &g, &cfg.constraint, cfg.seed)?;
            std::fs::write(out.join("labels.txt"), r.best_config.to_label_lines())?;
            write_json(
                &out.join("result.json"),
                &json!({
                    "best_value": r.best_value,
                    "evaluations": r.evaluations,
                    "exact": r.exact,
                    "seed": cfg.seed,
                }),
            )?;
            writeln!(stdout, "{}", r.best_value)?;
        }
        "bounds" => {
            let cfg: BoundsConfig = typed(m)?;
            let mut csv = String::from(if cfg.optimize_mu {
                "t,raw,clamped,mu\n"
            } else {
                "t,raw,clamped\n"
            });
            for &t in &cfg.ts {
                if cfg.optimize_mu {
                    let (mu, raw) = best_mu(&cfg.bound, t)?;
                    csv.push_str(&format!("{t},{raw},{},{mu}\n", raw.clamp(0.0, 1.0)));
                } else {
                    let b = bound_eval(&cfg.bound, t)?;
                    csv.push_str(&format!("{t},{},{}\n", b.raw, b.clamped));
                }
            }
            std::fs::write(out.join("bounds.csv"), &csv)?;
            write!(stdout, "{csv}")?;
        }
        "concentrate" => {
            let cfg: ExperimentConfig = typed(m)?;
            let report = run_concentration_in(&cfg, Some(base))?;
            write_report(&report, out)?;
            write_json(
                &out.join("report.json"),
                &json!({ "rows": report.rows, "fit": report.fit, "notes": report.notes }),
            )?;
            for r in &report.rows {
                writeln!(stdout, "N={} mean={} std={}", r.n, r.mean_h, r.std_h)?;
            }
            if let Some(f) = report.fit {
                writeln!(stdout, "slope={} stderr={}", f.slope, f.stderr)?;
            }
            if cfg.bound.is_some() && !report.bound_dominates() {
                writeln!(stdout, "warning: empirical tail exceeds the bound at some t")?;
            }
            for n in &report.notes {
                writeln!(stdout, "note: {n}")?;
            }
        }
        "gamma-sweep" => {
            let cfg: GammaSweepConfig = typed(m)?;
            let g = Graph::load_edge_list(resolve(base, &cfg.graph))?;
            let th = declared_communities(&g, &cfg.membership, cfg.j)?;
            let pts = gamma_sweep(&g, &cfg.membership, cfg.j, cfg.q, &cfg.gammas)?;
            let csv = gamma_sweep_csv(&pts);
            std::fs::write(out.join("gamma_sweep.csv"), &csv)?;
            let switch = switch_point(&pts);
            write_json(
                &out.join("summary.json"),
                &json!({
                    "n1": th.n1, "n2": th.n2, "m12": th.m12, "j": th.j,
                    "gamma_star": gamma_star(&th),
                    "switch": switch.map(|(a, b)| [a, b]),
                }),
            )?;
            write!(stdout, "{csv}")?;
        }
        "fit" => {
            let cfg: FitConfig = typed(m)?;
            let points = match (cfg.points, cfg.csv) {
                (Some(p), None) => p,
                (None, Some(path)) => read_std_points(&resolve(base, &path))?,
                _ => return Err(Error::Config("fit needs exactly one of `points` or `csv`".into())),
            };
            let fit = fit_scaling(&points)?;
            write_json(&out.join("fit.json"), &fit)?;
            writeln!(stdout, "slope={} stderr={}", fit.slope, fit.stderr)?;
        }
        _ => unreachable!(),
    }
    Ok(())
}

fn read_std_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
    let col = |names: &[&str]| headers.iter().position(|h| names.contains(&h.trim()));
    let (ni, si) = match (col(&["N"]), col(&["std", "std_H"])) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Input(format!(
                "{}: needs N and std (or std_H) columns",
                path.display()
            )))
        }
    };
    let mut pts = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad number {:?} in {}", &rec[i], path.display())))
        };
        pts.push((num(ni)?, num(si)?));
    }
    Ok(pts)
}
