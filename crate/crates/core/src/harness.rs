//! Seeded Monte Carlo ensembles.
//!
//! Trial `i` of a run uses seed `base_seed + i` (wrapping) for loading and
//! the same seed, on an independent stream, for noisy execution. Trials run
//! on a rayon pool and are collected in index order, so results never
//! depend on the number of workers.
//!
//! Instances with fewer atoms than target sites are recorded with
//! `infeasible = true` and left out of every aggregate.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hca::decompose_regions;
use crate::lattice::{
    is_feasible, make_target, sample_loading, vacant_target_count, Lattice, LoadingModel,
    Occupancy, PatternSpec, SizingRule, TargetPattern,
};
use crate::physics::{execute_noisy, plan_duration, FailureMode, NoiseModel};
use crate::plan::{apply_plan, MovePlan};
use crate::Algorithm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Explicit lattice; `None` applies `sizing`.
    pub lattice: Option<Lattice>,
    pub sizing: SizingRule,
    pub target: PatternSpec,
    /// Loading probability per trap.
    pub p: f64,
    pub algorithm: Algorithm,
    /// `noise.seed` is ignored; each trial uses its own seed.
    pub noise: NoiseModel,
    pub trials: usize,
    pub base_seed: u64,
}

impl TrialConfig {
    /// Perfect transfer, p = 0.5, default sizing, one trial, seed 0.
    pub fn new(target: PatternSpec, algorithm: Algorithm) -> Self {
        TrialConfig {
            lattice: None,
            sizing: SizingRule::default(),
            target,
            p: 0.5,
            algorithm,
            noise: NoiseModel::default(),
            trials: 1,
            base_seed: 0,
        }
    }

    pub fn resolve_lattice(&self) -> Result<Lattice> {
        match self.lattice {
            Some(l) => Ok(l),
            None => self.sizing.lattice_for_spec(&self.target, self.p),
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

/// One row of the per-trial CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// Vacant target sites after loading.
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    #[serde(rename = "Nm")]
    pub nm: usize,
    pub distance: usize,
    pub duration_s: f64,
    /// Target sites occupied after noisy execution.
    pub filled_targets: usize,
    pub target_count: usize,
    pub defect_free: bool,
    pub infeasible: bool,
}

impl TrialRecord {
    pub fn defects_after_noise(&self) -> usize {
        self.target_count - self.filled_targets
    }

    pub fn filling_fraction(&self) -> f64 {
        self.filled_targets as f64 / self.target_count as f64
    }
}

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Estimate {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len() as f64;
        if v.is_empty() {
            return Estimate {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / n;
        if v.len() < 2 {
            return Estimate { mean, se: 0.0 };
        }
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate {
            mean,
            se: (var / n).sqrt(),
        }
    }
}

/// Aggregates over the feasible trials of one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub target_count: usize,
    pub n: Estimate,
    pub n1: Estimate,
    pub n2: Estimate,
    pub nm: Estimate,
    pub distance: Estimate,
    pub duration_s: Estimate,
    /// Mean N_m over mean N.
    pub moves_per_vacancy: f64,
    /// Mean N_m over the number of target sites.
    pub moves_per_site: f64,
    /// Mean filled-target fraction after noisy execution.
    pub eta: Estimate,
    /// Fraction of trials with every target filled.
    pub defect_free: Estimate,
    /// N_m value -> number of trials.
    pub nm_histogram: BTreeMap<usize, usize>,
}

pub fn summarize(records: &[TrialRecord]) -> Summary {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| !r.infeasible).collect();
    let est = |f: &dyn Fn(&TrialRecord) -> f64| Estimate::of(ok.iter().map(|r| f(r)));
    let target_count = records.first().map_or(0, |r| r.target_count);
    let nm = est(&|r| r.nm as f64);
    let n = est(&|r| r.n as f64);
    let mut nm_histogram = BTreeMap::new();
    for r in &ok {
        *nm_histogram.entry(r.nm).or_insert(0) += 1;
    }
    Summary {
        trials: records.len(),
        feasible: ok.len(),
        infeasible: records.len() - ok.len(),
        target_count,
        n,
        n1: est(&|r| r.n1 as f64),
        n2: est(&|r| r.n2 as f64),
        nm,
        distance: est(&|r| r.distance as f64),
        duration_s: est(&|r| r.duration_s),
        moves_per_vacancy: nm.mean / n.mean,
        moves_per_site: nm.mean / target_count as f64,
        eta: est(&|r| r.filling_fraction()),
        defect_free: est(&|r| r.defect_free as u8 as f64),
        nm_histogram,
    }
}

/// Raw records of one ensemble plus the configuration that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialStats {
    pub config: TrialConfig,
    pub records: Vec<TrialRecord>,
}

impl TrialStats {
    pub fn summary(&self) -> Summary {
        summarize(&self.records)
    }

    /// Writes `trials.csv`, `histogram.csv` (N_m counts) and
    /// `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("trials.csv");
        let f = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        write_trials_csv(&self.records, f)?;
        let summary = self.summary();
        let mut hist = Table::new("histogram", &["Nm", "count"]);
        for (nm, count) in &summary.nm_histogram {
            hist.push(vec![nm.to_string(), count.to_string()]);
        }
        let hist_path = dir.join("histogram.csv");
        let f = std::fs::File::create(&hist_path).map_err(|e| Error::io(&hist_path, e))?;
        hist.write_csv(f)?;
        let json_path = dir.join("summary.json");
        let doc = serde_json::json!({
            "config": self.config,
            "input_hash": content_hash(&serde_json::to_vec(&self.config)?),
            "summary": summary,
        });
        write_json(&json_path, &doc)?;
        Ok(vec![csv_path, hist_path, json_path])
    }
}

pub fn write_trials_csv<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_trials_csv<R: Read>(r: R) -> Result<Vec<TrialRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Hex SHA-256 over git's object framing (`blob <len>\0` + bytes).
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot start {k} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

struct Setup {
    lattice: Lattice,
    target: TargetPattern,
    p: f64,
    algorithm: Algorithm,
    base_seed: u64,
}

struct Planned {
    trial: usize,
    seed: u64,
    occ: Occupancy,
    /// `None` for infeasible instances.
    plan: Option<(MovePlan, usize, usize, usize)>,
}

impl Setup {
    fn from_config(cfg: &TrialConfig) -> Result<Self> {
        if cfg.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        let lattice = cfg.resolve_lattice()?;
        let target = make_target(lattice, &cfg.target)?;
        cfg.noise.validate(&lattice)?;
        Ok(Setup {
            lattice,
            target,
            p: cfg.p,
            algorithm: cfg.algorithm,
            base_seed: cfg.base_seed,
        })
    }

    fn plan(&self, trial: usize) -> Result<Planned> {
        let seed = self.base_seed.wrapping_add(trial as u64);
        let occ = sample_loading(self.lattice, &LoadingModel::new(self.p, seed)?);
        if !is_feasible(&occ, &self.target) {
            return Ok(Planned {
                trial,
                seed,
                occ,
                plan: None,
            });
        }
        let dec = decompose_regions(&occ, &self.target)?;
        let plan = match self.algorithm.plan(&occ, &self.target) {
            Ok(p) => p,
            Err(Error::Infeasible(_)) => {
                return Ok(Planned {
                    trial,
                    seed,
                    occ,
                    plan: None,
                })
            }
            Err(e) => return Err(e),
        };
        let ideal = apply_plan(&occ, &plan)?;
        let vacant = vacant_target_count(&ideal, &self.target);
        if vacant != 0 {
            return Err(Error::Incomplete { vacant });
        }
        Ok(Planned {
            trial,
            seed,
            occ,
            plan: Some((plan, dec.n_vacant(), dec.n1, dec.n2)),
        })
    }

    fn record(&self, planned: &Planned, noise: &NoiseModel) -> Result<TrialRecord> {
        let k = self.target.len();
        let Some((plan, n, n1, n2)) = &planned.plan else {
            return Ok(TrialRecord {
                trial: planned.trial,
                seed: planned.seed,
                n: vacant_target_count(&planned.occ, &self.target),
                n1: 0,
                n2: 0,
                nm: 0,
                distance: 0,
                duration_s: 0.0,
                filled_targets: k - vacant_target_count(&planned.occ, &self.target),
                target_count: k,
                defect_free: false,
                infeasible: true,
            });
        };
        let noise = NoiseModel {
            seed: planned.seed,
            ..noise.clone()
        };
        let run = execute_noisy(&planned.occ, plan, &noise)?;
        let filled = k - vacant_target_count(&run.final_occ, &self.target);
        Ok(TrialRecord {
            trial: planned.trial,
            seed: planned.seed,
            n: *n,
            n1: *n1,
            n2: *n2,
            nm: plan.len(),
            distance: plan.total_distance(),
            duration_s: plan_duration(plan, &noise.timing),
            filled_targets: filled,
            target_count: k,
            defect_free: filled == k,
            infeasible: false,
        })
    }

    /// Plans every trial once and executes it under each noise model.
    /// Result is indexed `[noise][trial]`.
    fn run(&self, trials: usize, noises: &[NoiseModel]) -> Result<Vec<Vec<TrialRecord>>> {
        let per_trial: Vec<Vec<TrialRecord>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let planned = self.plan(i)?;
                noises.iter().map(|nz| self.record(&planned, nz)).collect()
            })
            .collect::<Result<_>>()?;
        let mut out = vec![Vec::with_capacity(trials); noises.len()];
        for row in per_trial {
            for (j, rec) in row.into_iter().enumerate() {
                out[j].push(rec);
            }
        }
        Ok(out)
    }
}

pub fn run_trials(cfg: &TrialConfig) -> Result<TrialStats> {
    let setup = Setup::from_config(cfg)?;
    let mut runs = setup.run(cfg.trials, std::slice::from_ref(&cfg.noise))?;
    Ok(TrialStats {
        config: cfg.clone(),
        records: runs.pop().expect("one noise model"),
    })
}

/// Plans each trial of `cfg` once and executes it under every model in
/// `noises` (`cfg.noise` is ignored). Returns one ensemble per model, in
/// order; record `i` of each shares loading, plan and seed.
pub fn run_trials_multi(cfg: &TrialConfig, noises: &[NoiseModel]) -> Result<Vec<TrialStats>> {
    let setup = Setup::from_config(cfg)?;
    for nz in noises {
        nz.validate(&setup.lattice)?;
    }
    let runs = setup.run(cfg.trials, noises)?;
    Ok(runs
        .into_iter()
        .zip(noises)
        .map(|(records, nz)| TrialStats {
            config: TrialConfig {
                noise: nz.clone(),
                ..cfg.clone()
            },
            records,
        })
        .collect())
}

/// [`run_trials`] on a dedicated pool of `workers` threads.
pub fn run_trials_on(cfg: &TrialConfig, workers: Option<usize>) -> Result<TrialStats> {
    with_workers(workers, || run_trials(cfg))?
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Minutes on a laptop.
    Desk,
    /// The full ensemble sizes.
    Full,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::InvalidParameter(format!("unknown scale `{s}` (expected desk or full)"))),
        }
    }
}

/// A grid of square-target ensembles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Target side lengths.
    pub sizes: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Transfer efficiencies, one filling-fraction table each.
    pub zetas: Vec<f64>,
    /// Efficiency for the defect-free-rate table.
    pub rc_zeta: f64,
    pub failure_mode: FailureMode,
    pub p: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub sizing: SizingRule,
    pub histogram_size: usize,
    pub histogram_trials: usize,
}

impl SweepConfig {
    /// Moves, distance, filling fraction at 99% and 90%, defect-free rate,
    /// and the 14×14 move histogram.
    pub fn fig5(scale: Scale) -> Self {
        let (sizes, trials, histogram_trials) = match scale {
            Scale::Desk => (vec![4, 6, 8, 10], 100, 1000),
            Scale::Full => ((2..=10).map(|k| 2 * k).chain([30]).collect(), 1000, 10_000),
        };
        SweepConfig {
            sizes,
            algorithms: Algorithm::ALL.to_vec(),
            zetas: vec![0.99, 0.90],
            rc_zeta: 0.99,
            failure_mode: FailureMode::Lost,
            p: 0.5,
            trials,
            base_seed: 0,
            sizing: SizingRule::default(),
            histogram_size: 14,
            histogram_trials,
        }
    }
}

/// A CSV table with a header row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// One (size, algorithm, efficiency) ensemble of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub size: usize,
    pub algorithm: Algorithm,
    pub zeta: f64,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub tables: Vec<Table>,
    pub cells: Vec<Cell>,
}

impl SweepOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes one `<name>.csv` per table and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            t.write_csv(f)?;
            paths.push(path);
        }
        let json_path = dir.join("summary.json");
        let doc = serde_json::json!({
            "config": self.config,
            "input_hash": content_hash(&serde_json::to_vec(&self.config)?),
            "tables": self.tables.iter().map(|t| serde_json::json!({
                "name": t.name,
                "file": format!("{}.csv", t.name),
                "rows": t.rows.len(),
            })).collect::<Vec<_>>(),
            "cells": self.cells,
        });
        write_json(&json_path, &doc)?;
        paths.push(json_path);
        Ok(paths)
    }
}

fn eta_table_name(zeta: f64) -> String {
    format!("eta_zeta{zeta:.2}")
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    if cfg.sizes.is_empty() || cfg.algorithms.is_empty() {
        return Err(Error::InvalidParameter("a sweep needs at least one size and one algorithm".into()));
    }
    let mut zetas = cfg.zetas.clone();
    if !zetas.contains(&cfg.rc_zeta) {
        zetas.push(cfg.rc_zeta);
    }
    let noises: Vec<NoiseModel> = zetas
        .iter()
        .map(|&zeta| NoiseModel {
            zeta,
            failure_mode: cfg.failure_mode,
            ..NoiseModel::default()
        })
        .collect();

    let mut moves = Table::new(
        "moves",
        &["size", "sites", "algorithm", "trials", "infeasible", "N", "Nm", "Nm_se", "moves_per_vacancy"],
    );
    let mut distance = Table::new(
        "distance",
        &["size", "sites", "algorithm", "distance", "distance_se", "duration_s", "duration_se"],
    );
    let mut etas: Vec<Table> = cfg
        .zetas
        .iter()
        .map(|&z| {
            Table::new(
                &eta_table_name(z),
                &["size", "sites", "algorithm", "zeta", "eta", "eta_se", "eta_law_site", "eta_law_vacancy"],
            )
        })
        .collect();
    let mut rc = Table::new(
        "rc",
        &["size", "sites", "algorithm", "zeta", "rc", "rc_se", "eta_pow_sites"],
    );
    let mut cells = Vec::new();

    for &size in &cfg.sizes {
        for &algorithm in &cfg.algorithms {
            let tc = TrialConfig {
                lattice: None,
                sizing: cfg.sizing,
                target: PatternSpec::Square(size),
                p: cfg.p,
                algorithm,
                noise: NoiseModel::default(),
                trials: cfg.trials,
                base_seed: cfg.base_seed,
            };
            let setup = Setup::from_config(&tc)?;
            let runs = setup.run(cfg.trials, &noises)?;
            let sites = size * size;
            let row0 = |t: &mut Vec<String>| {
                t.push(size.to_string());
                t.push(sites.to_string());
                t.push(algorithm.to_string());
            };
            for (j, records) in runs.iter().enumerate() {
                let s = summarize(records);
                let zeta = zetas[j];
                if j == 0 {
                    let mut r = Vec::new();
                    row0(&mut r);
                    r.extend([
                        s.trials.to_string(),
                        s.infeasible.to_string(),
                        s.n.mean.to_string(),
                        s.nm.mean.to_string(),
                        s.nm.se.to_string(),
                        s.moves_per_vacancy.to_string(),
                    ]);
                    moves.push(r);
                    let mut r = Vec::new();
                    row0(&mut r);
                    r.extend([
                        s.distance.mean.to_string(),
                        s.distance.se.to_string(),
                        s.duration_s.mean.to_string(),
                        s.duration_s.se.to_string(),
                    ]);
                    distance.push(r);
                }
                for (t, &z) in etas.iter_mut().zip(&cfg.zetas) {
                    if z == zeta {
                        let mut r = Vec::new();
                        row0(&mut r);
                        r.extend([
                            zeta.to_string(),
                            s.eta.mean.to_string(),
                            s.eta.se.to_string(),
                            crate::physics::filling_fraction_analytic(s.moves_per_site, zeta).to_string(),
                            crate::physics::filling_fraction_analytic(s.moves_per_vacancy, zeta).to_string(),
                        ]);
                        t.push(r);
                    }
                }
                if zeta == cfg.rc_zeta {
                    let mut r = Vec::new();
                    row0(&mut r);
                    r.extend([
                        zeta.to_string(),
                        s.defect_free.mean.to_string(),
                        s.defect_free.se.to_string(),
                        crate::physics::cumulative_success(s.eta.mean, sites as u32).to_string(),
                    ]);
                    rc.push(r);
                }
                cells.push(Cell {
                    size,
                    algorithm,
                    zeta,
                    summary: s,
                });
            }
        }
    }

    let mut histogram = Table::new("histogram", &["size", "algorithm", "Nm", "count"]);
    for &algorithm in &cfg.algorithms {
        let tc = TrialConfig {
            target: PatternSpec::Square(cfg.histogram_size),
            p: cfg.p,
            sizing: cfg.sizing,
            trials: cfg.histogram_trials,
            base_seed: cfg.base_seed,
            ..TrialConfig::new(PatternSpec::Square(cfg.histogram_size), algorithm)
        };
        let setup = Setup::from_config(&tc)?;
        let records = setup.run(tc.trials, &[NoiseModel::default()])?.remove(0);
        for (nm, count) in summarize(&records).nm_histogram {
            histogram.push(vec![
                cfg.histogram_size.to_string(),
                algorithm.to_string(),
                nm.to_string(),
                count.to_string(),
            ]);
        }
    }

    let mut tables = vec![moves, distance];
    tables.append(&mut etas);
    tables.push(rc);
    tables.push(histogram);
    Ok(SweepOutput {
        config: cfg.clone(),
        tables,
        cells,
    })
}

/// [`sweep`] on a dedicated pool of `workers` threads.
pub fn sweep_on(cfg: &SweepConfig, workers: Option<usize>) -> Result<SweepOutput> {
    with_workers(workers, || sweep(cfg))?
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trials: usize) -> TrialConfig {
        TrialConfig {
            trials,
            base_seed: 11,
            ..TrialConfig::new(PatternSpec::Square(4), Algorithm::Hca)
        }
    }

    #[test]
    fn perfect_single_trial_is_defect_free() {
        let mut c = cfg(1);
        c.p = 0.9;
        let stats = run_trials(&c).unwrap();
        let s = stats.summary();
        assert_eq!(s.feasible, 1);
        assert_eq!(s.eta.mean, 1.0);
        assert_eq!(s.defect_free.mean, 1.0);
        assert!(stats.records[0].defect_free);
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let mut c = cfg(40);
        c.noise = NoiseModel::uniform(0.9, 0);
        let a = run_trials_on(&c, Some(1)).unwrap();
        let b = run_trials_on(&c, Some(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records[3].seed, 14);
    }

    #[test]
    fn multi_noise_matches_single_runs() {
        let c = cfg(25);
        let noises = [NoiseModel::uniform(0.9, 0), NoiseModel::uniform(0.5, 0)];
        let multi = run_trials_multi(&c, &noises).unwrap();
        for (stats, nz) in multi.iter().zip(&noises) {
            let mut single = c.clone();
            single.noise = nz.clone();
            assert_eq!(stats.records, run_trials(&single).unwrap().records);
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut c = cfg(30);
        c.noise = NoiseModel::uniform(0.95, 0);
        let stats = run_trials(&c).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&stats.records, &mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with(
            "trial,seed,N,N1,N2,Nm,distance,duration_s,filled_targets,target_count,defect_free,infeasible\n"
        ));
        let back = read_trials_csv(&buf[..]).unwrap();
        assert_eq!(back, stats.records);
        assert_eq!(summarize(&back), stats.summary());
    }

    #[test]
    fn infeasible_trials_are_flagged() {
        let mut c = cfg(20);
        c.p = 0.05;
        let stats = run_trials(&c).unwrap();
        let s = stats.summary();
        assert!(s.infeasible > 0);
        assert_eq!(s.feasible + s.infeasible, 20);
        assert!(stats.records.iter().filter(|r| r.infeasible).all(|r| r.nm == 0 && !r.defect_free));
    }

    #[test]
    fn estimates() {
        let e = Estimate::of([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(Estimate::of([7.0]).se, 0.0);
    }

    #[test]
    fn hash_is_git_style() {
        // same value `git hash-object --object-format=sha256` gives for "hello\n"
        assert_eq!(
            content_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }

    #[test]
    fn single_cell_sweep_gives_one_row_tables() {
        let c = SweepConfig {
            sizes: vec![3],
            algorithms: vec![Algorithm::Asa],
            trials: 5,
            histogram_size: 3,
            histogram_trials: 5,
            ..SweepConfig::fig5(Scale::Desk)
        };
        let out = sweep(&c).unwrap();
        let names: Vec<&str> = out.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["moves", "distance", "eta_zeta0.99", "eta_zeta0.90", "rc", "histogram"]);
        for t in &out.tables[..5] {
            assert_eq!(t.rows.len(), 1, "{}", t.name);
        }
    }
}
