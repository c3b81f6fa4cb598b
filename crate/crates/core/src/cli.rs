//! The `atomsim` command line.
//!
//! Every flag can also be given in a TOML file passed with `--config`,
//! using the flag's long name as key (`trials = 1000`, `failure-mode =
//! "stranded"`); flags win over the file.
//!
//! Exit codes: 0 ok, 1 usage or bad parameters, 2 infeasible instance,
//! 3 anything else.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::{self, Scale, SweepConfig, TrialConfig};
use crate::lattice::{
    is_feasible, make_target, render, sample_loading, vacant_target_count, Lattice, LoadingModel,
    Occupancy, PatternSpec, SizingRule,
};
use crate::physics::{
    calibrate_center, execute_noisy, plan_duration, write_events_jsonl, FailureMode, NoiseModel,
    SiteProfile, TimingModel,
};
use crate::plan::{apply_plan, plan_metrics, MovePlan};
use crate::Algorithm;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

const DEFAULT_TARGET: &str = "rect:5x6";

#[derive(Debug, Parser)]
#[command(name = "atomsim", version, about = "Plan and simulate atom rearrangement in tweezer arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one loading, plan it, and write the plan with a rendering.
    Plan(PlanArgs),
    /// Run a seeded ensemble of one configuration.
    Simulate(SimulateArgs),
    /// Run a grid of ensembles (sizes × algorithms × efficiencies).
    Sweep(SweepArgs),
}

/// Copies every field the command line left unset from the config file.
macro_rules! merge {
    ($args:expr, $file:expr; $($f:ident),+ $(,)?) => {
        $( if $args.$f.is_none() { $args.$f = $file.$f; } )+
    };
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct PlanArgs {
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Lattice as RxC; sized from the target when omitted.
    #[arg(long)]
    lattice: Option<Lattice>,
    /// square:K, rect:RxC, bitmap:<path> or grid:<rows>.
    #[arg(long)]
    target: Option<PatternSpec>,
    #[arg(long)]
    algo: Option<Algorithm>,
    /// Loading probability per trap.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Start from this occupancy grid (`#` atom, `.` empty) instead of sampling.
    #[arg(long)]
    occupancy: Option<PathBuf>,
    /// Replay the plan with this per-move success probability.
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    failure_mode: Option<FailureMode>,
    /// Also write a rendering after every move.
    #[arg(long)]
    #[serde(default)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    lattice: Option<Lattice>,
    #[arg(long)]
    target: Option<PatternSpec>,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Per-move success probability; the lattice mean with --gradient.
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    failure_mode: Option<FailureMode>,
    /// Drop in efficiency from the lattice center to the outermost ring.
    #[arg(long)]
    gradient: Option<f64>,
    /// Background-gas lifetime per atom, seconds.
    #[arg(long)]
    vacuum_lifetime: Option<f64>,
    /// Extra loss probability per grid step travelled.
    #[arg(long)]
    per_grid_loss: Option<f64>,
    /// Reservoir surplus of the automatic lattice sizing.
    #[arg(long)]
    surplus: Option<f64>,
    /// Seed of trial 0; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "ATOMSIM_WORKERS")]
    #[serde(skip)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Preset {
    /// Moves, distance, filling fraction, defect-free rate and histogram.
    Fig5,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct SweepArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// desk (minutes) or full (large ensembles, 30x30 included).
    #[arg(long)]
    scale: Option<Scale>,
    /// Comma-separated target side lengths.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<Algorithm>>,
    #[arg(long, value_delimiter = ',')]
    zetas: Option<Vec<f64>>,
    #[arg(long)]
    failure_mode: Option<FailureMode>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    histogram_trials: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "ATOMSIM_WORKERS")]
    #[serde(skip)]
    workers: Option<usize>,
}

fn load_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

/// Runs the CLI with the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs the CLI, writing messages to `out` and `err`; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::InvalidLattice { .. }
        | Error::SiteOutOfRange { .. }
        | Error::PatternDoesNotFit { .. }
        | Error::BadPatternSpec(_)
        | Error::EmptyTarget
        | Error::LatticeMismatch(_)
        | Error::InvalidParameter(_) => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

fn seed_or_draw(seed: Option<u64>, out: &mut dyn Write) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::thread_rng().gen::<u64>();
        let _ = writeln!(out, "seed: {s}");
        s
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn side_by_side(left: &str, right: &str) -> String {
    let l: Vec<&str> = left.lines().collect();
    let r: Vec<&str> = right.lines().collect();
    let width = l.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut s = format!("{:<width$}   {}\n", "before", "after");
    for i in 0..l.len().max(r.len()) {
        let a = l.get(i).copied().unwrap_or("");
        let b = r.get(i).copied().unwrap_or("");
        s += &format!("{a:<width$}   {b}\n");
    }
    s
}

fn cmd_plan(mut a: PlanArgs, out: &mut dyn Write) -> Result<i32> {
    let file: PlanArgs = load_config(a.config.as_deref())?;
    merge!(a, file; lattice, target, algo, p, seed, occupancy, zeta, failure_mode, out);
    a.trace |= file.trace;

    let spec = match a.target {
        Some(t) => t,
        None => DEFAULT_TARGET.parse()?,
    };
    let algo = a.algo.unwrap_or(Algorithm::Hca);
    let p = a.p.unwrap_or(0.5);
    let dir = a.out.unwrap_or_else(|| PathBuf::from("atomsim-out"));

    let (occ, seed) = match &a.occupancy {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let occ = Occupancy::from_text(&text)?;
            if let Some(l) = a.lattice {
                l.ensure_same(occ.lattice(), "--lattice vs occupancy file")?;
            }
            (occ, a.seed)
        }
        None => {
            let lattice = match a.lattice {
                Some(l) => l,
                None => SizingRule::default().lattice_for_spec(&spec, p)?,
            };
            let seed = seed_or_draw(a.seed, out);
            (sample_loading(lattice, &LoadingModel::new(p, seed)?), Some(seed))
        }
    };
    let lattice = *occ.lattice();
    let target = make_target(lattice, &spec)?;

    create_dir(&dir)?;
    write_file(&dir.join("occupancy.txt"), occ.to_text().as_bytes())?;
    if !is_feasible(&occ, &target) {
        return Err(Error::Infeasible(format!(
            "{} atoms for {} target sites",
            occ.count(),
            target.len()
        )));
    }

    let plan = algo.plan(&occ, &target)?;
    let vacant = vacant_target_count(&occ, &target);
    let done = apply_plan(&occ, &plan)?;
    let left = vacant_target_count(&done, &target);
    if left > 0 {
        return Err(Error::Incomplete { vacant: left });
    }

    let mut jsonl = Vec::new();
    plan.write_jsonl(&mut jsonl)?;
    write_file(&dir.join("plan.jsonl"), &jsonl)?;

    let timing = TimingModel::default();
    let mut metrics = serde_json::json!({
        "lattice": lattice,
        "target": spec,
        "algorithm": algo,
        "p": p,
        "seed": seed,
        "atoms": occ.count(),
        "target_count": target.len(),
        "vacant": vacant,
        "metrics": plan_metrics(&plan, vacant),
        "duration_s": plan_duration(&plan, &timing),
    });

    if let Some(zeta) = a.zeta {
        let noise = NoiseModel {
            zeta,
            failure_mode: a.failure_mode.unwrap_or_default(),
            seed: seed.unwrap_or(0),
            ..NoiseModel::default()
        };
        let run = execute_noisy(&occ, &plan, &noise)?;
        let mut ev = Vec::new();
        write_events_jsonl(&run.events, &mut ev)?;
        write_file(&dir.join("events.jsonl"), &ev)?;
        let filled = target.len() - vacant_target_count(&run.final_occ, &target);
        metrics["noisy"] = serde_json::json!({
            "zeta": zeta,
            "filled_targets": filled,
            "filling_fraction": filled as f64 / target.len() as f64,
        });
    }
    write_file(&dir.join("metrics.json"), serde_json::to_string_pretty(&metrics)?.as_bytes())?;
    write_file(
        &dir.join("render.txt"),
        side_by_side(&render(&occ, &target), &render(&done, &target)).as_bytes(),
    )?;
    if a.trace {
        write_file(&dir.join("trace.txt"), trace(&occ, &target, &plan)?.as_bytes())?;
    }

    let _ = writeln!(
        out,
        "{algo}: {} moves, distance {}, {} vacancies filled -> {}",
        plan.len(),
        plan.total_distance(),
        vacant,
        dir.display()
    );
    Ok(EXIT_OK)
}

fn trace(occ: &Occupancy, target: &crate::lattice::TargetPattern, plan: &MovePlan) -> Result<String> {
    let mut s = format!("initial\n{}\n", render(occ, target));
    let mut cur = occ.clone();
    for (i, m) in plan.moves.iter().enumerate() {
        let step = MovePlan {
            lattice: plan.lattice,
            moves: vec![m.clone()],
        };
        cur = apply_plan(&cur, &step)?;
        s += &format!(
            "move {i} {:?} {} -> {} ({} steps)\n{}\n",
            m.phase,
            m.src,
            m.dst,
            m.distance(),
            render(&cur, target)
        );
    }
    Ok(s)
}

fn cmd_simulate(mut a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let file: SimulateArgs = load_config(a.config.as_deref())?;
    merge!(a, file; lattice, target, algo, p, trials, zeta, failure_mode, gradient,
        vacuum_lifetime, per_grid_loss, surplus, seed, out);

    let spec = match a.target {
        Some(t) => t,
        None => DEFAULT_TARGET.parse()?,
    };
    let mut cfg = TrialConfig::new(spec, a.algo.unwrap_or(Algorithm::Hca));
    cfg.lattice = a.lattice;
    if let Some(s) = a.surplus {
        cfg.sizing = SizingRule { surplus: s };
    }
    if let Some(p) = a.p {
        cfg.p = p;
    }
    cfg.trials = a.trials.unwrap_or(100);
    cfg.base_seed = seed_or_draw(a.seed, out);

    let zeta = a.zeta.unwrap_or(1.0);
    let mut noise = NoiseModel {
        zeta,
        failure_mode: a.failure_mode.unwrap_or_default(),
        vacuum_lifetime: a.vacuum_lifetime,
        per_grid_loss: a.per_grid_loss.unwrap_or(0.0),
        ..NoiseModel::default()
    };
    if let Some(g) = a.gradient {
        let lattice = cfg.resolve_lattice()?;
        noise.zeta = calibrate_center(&lattice, zeta, g)?;
        noise.profile = SiteProfile::Gradient { gradient: g };
    }
    cfg.noise = noise;

    let dir = a.out.unwrap_or_else(|| PathBuf::from("atomsim-out"));
    let stats = harness::run_trials_on(&cfg, a.workers)?;
    stats.write(&dir)?;
    let s = stats.summary();
    if s.feasible == 0 {
        return Err(Error::Infeasible(format!("all {} trials were infeasible", s.trials)));
    }
    let _ = writeln!(
        out,
        "{}: {} trials ({} infeasible), Nm {:.2} ± {:.2}, eta {:.5} ± {:.5}, defect-free {:.4} -> {}",
        cfg.algorithm,
        s.trials,
        s.infeasible,
        s.nm.mean,
        s.nm.se,
        s.eta.mean,
        s.eta.se,
        s.defect_free.mean,
        dir.display()
    );
    Ok(EXIT_OK)
}

fn cmd_sweep(mut a: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let file: SweepArgs = load_config(a.config.as_deref())?;
    merge!(a, file; preset, scale, sizes, algos, zetas, failure_mode, trials,
        histogram_trials, p, seed, out);

    let Preset::Fig5 = a.preset.unwrap_or(Preset::Fig5);
    let mut cfg = SweepConfig::fig5(a.scale.unwrap_or(Scale::Desk));
    if let Some(v) = a.sizes {
        cfg.sizes = v;
    }
    if let Some(v) = a.algos {
        cfg.algorithms = v;
    }
    if let Some(v) = a.zetas {
        cfg.zetas = v;
    }
    if let Some(v) = a.failure_mode {
        cfg.failure_mode = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.histogram_trials {
        cfg.histogram_trials = v;
    }
    if let Some(v) = a.p {
        cfg.p = v;
    }
    cfg.base_seed = seed_or_draw(a.seed, out);

    let dir = a.out.unwrap_or_else(|| PathBuf::from("atomsim-out"));
    let result = harness::sweep_on(&cfg, a.workers)?;
    let files = result.write(&dir)?;
    let _ = writeln!(out, "{} tables, {} files -> {}", result.tables.len(), files.len(), dir.display());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run_with(std::iter::once("atomsim").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn help_and_usage_codes() {
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        let (code, _, err) = run_capture(&["plan", "--algo", "bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("bogus"));
    }

    #[test]
    fn config_merge_prefers_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "trials = 7\nzeta = 0.5\nfailure-mode = \"stranded\"\n").unwrap();
        let file: SimulateArgs = load_config(Some(&cfg)).unwrap();
        let mut a = SimulateArgs {
            zeta: Some(0.9),
            ..SimulateArgs::default()
        };
        merge!(a, file; trials, zeta, failure_mode);
        assert_eq!(a.trials, Some(7));
        assert_eq!(a.zeta, Some(0.9));
        assert_eq!(a.failure_mode, Some(FailureMode::Stranded));
        std::fs::write(&cfg, "trails = 7\n").unwrap();
        assert!(load_config::<SimulateArgs>(Some(&cfg)).is_err());
    }

    #[test]
    fn missing_seed_is_printed() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let (code, stdout, _) = run_capture(&["plan", "--lattice", "8x8", "--target", "square:2", "--p", "0.9", "--out", out]);
        assert_eq!(code, EXIT_OK);
        let line = stdout.lines().find(|l| l.starts_with("seed: ")).unwrap();
        line["seed: ".len()..].parse::<u64>().unwrap();
    }
}
