//! Experiment driver: repeated seeding trials on a generated instance, their
//! CSV persistence, and the summaries built from them.
//!
//! Trial i always draws from the stream `(master_seed, i)` and records are
//! kept in trial order, so output bytes do not depend on the worker count.

mod report;
mod stats;

pub use report::{report, ReportFormat};
pub use stats::{quantile, summarize, wilson_interval, BoundRow, MetricSummary, Proportion, SummaryStats};

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{CostExponent, Variant};
use crate::instances::{generate, reference_costs};
use crate::numeric::ExtScalar;
use crate::seeding::{lemma1_event, seed, RNG_ID};

/// Formats a native real with 15 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.14e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub k: usize,
    pub m: f64,
    pub r: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    /// k = 200 keeps a 10^4-trial run at desk scale; the k ≥ 1000 regime
    /// works the same way, just slower.
    fn default() -> Self {
        Self {
            variant: Variant::KMeans,
            k: 200,
            m: 1.0,
            r: 1.0,
            trials: 1000,
            master_seed: 0,
            alpha: 0.1,
            beta: 0.1,
            eta: 0.999,
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn exponent(&self) -> CostExponent {
        self.variant.cost_exponent()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(invalid("k must be >= 1"));
        }
        if self.trials < 1 {
            return Err(invalid("trials must be >= 1"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if !(self.m.is_finite() && self.m >= 1.0) {
            return Err(invalid(format!("m must be a finite real >= 1, got {}", self.m)));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(invalid(format!("r must be a finite real > 0, got {}", self.r)));
        }
        if self.workers < 1 {
            return Err(invalid("workers must be >= 1"));
        }
        Ok(())
    }

    pub fn run_info(&self) -> RunInfo {
        RunInfo {
            variant: self.variant,
            k: self.k,
            m: self.m,
            r: self.r,
            exponent: self.exponent().as_int(),
            trials: self.trials,
            master_seed: self.master_seed,
            alpha: self.alpha,
            beta: self.beta,
            eta: self.eta,
            rng: RNG_ID.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub k: usize,
    pub variant: Variant,
    pub exponent: u32,
    pub coverage_count: usize,
    pub coverage_fraction: f64,
    pub final_cost: ExtScalar,
    pub ratio_discrete: f64,
    pub ratio_continuous: f64,
    pub lemma1_event: bool,
}

pub const TRIAL_COLUMNS: [&str; 10] = [
    "trial_index",
    "k",
    "variant",
    "exponent",
    "coverage_count",
    "coverage_fraction",
    "final_cost",
    "ratio_discrete",
    "ratio_continuous",
    "lemma1_event",
];

/// Runs `cfg.trials` independent seedings of the configured instance.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let inst = generate(cfg.k, cfg.m, cfg.r, cfg.variant)?;
    let opt = reference_costs(&inst);
    let exponent = cfg.exponent();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;

    let one_trial = |trial_index: u64| -> Result<TrialRecord> {
        let trace = seed(&inst, cfg.k, exponent, cfg.master_seed, trial_index)?;
        let coverage_count = trace.coverage_count();
        // a ratio beyond f64 range can only come from a pathological draw;
        // it is recorded as +inf rather than aborting the run
        let ratio = |reference: &ExtScalar| trace.final_cost.ratio(reference).unwrap_or(f64::INFINITY);
        Ok(TrialRecord {
            trial_index,
            k: cfg.k,
            variant: cfg.variant,
            exponent: exponent.as_int(),
            coverage_count,
            coverage_fraction: coverage_count as f64 / cfg.k as f64,
            final_cost: trace.final_cost,
            ratio_discrete: ratio(&opt.discrete),
            ratio_continuous: ratio(&opt.continuous),
            lemma1_event: lemma1_event(&trace, cfg.alpha, cfg.beta)?,
        })
    };

    pool.install(|| (0..cfg.trials).into_par_iter().map(one_trial).collect())
}

pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_COLUMNS)?;
    for r in records {
        w.write_record([
            r.trial_index.to_string(),
            r.k.to_string(),
            r.variant.to_string(),
            r.exponent.to_string(),
            r.coverage_count.to_string(),
            fmt_f64(r.coverage_fraction),
            r.final_cost.to_string(),
            fmt_f64(r.ratio_discrete),
            fmt_f64(r.ratio_continuous),
            r.lemma1_event.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: io::Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    if reader.headers()?.iter().ne(TRIAL_COLUMNS) {
        return Err(Error::Malformed("unexpected trials.csv header".into()));
    }
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |col: &str| Error::Malformed(format!("row {}: bad {col}", line + 1));
        let get = |i: usize| row.get(i).unwrap_or_default();
        out.push(TrialRecord {
            trial_index: get(0).parse().map_err(|_| bad("trial_index"))?,
            k: get(1).parse().map_err(|_| bad("k"))?,
            variant: get(2).parse().map_err(|_| bad("variant"))?,
            exponent: get(3).parse().map_err(|_| bad("exponent"))?,
            coverage_count: get(4).parse().map_err(|_| bad("coverage_count"))?,
            coverage_fraction: get(5).parse().map_err(|_| bad("coverage_fraction"))?,
            final_cost: get(6).parse().map_err(|_| bad("final_cost"))?,
            ratio_discrete: get(7).parse().map_err(|_| bad("ratio_discrete"))?,
            ratio_continuous: get(8).parse().map_err(|_| bad("ratio_continuous"))?,
            lemma1_event: get(9).parse().map_err(|_| bad("lemma1_event"))?,
        });
    }
    Ok(out)
}

/// Configuration echo and RNG identification carried alongside trials.csv.
#[derive(Clone, Debug, PartialEq)]
pub struct RunInfo {
    pub variant: Variant,
    pub k: usize,
    pub m: f64,
    pub r: f64,
    pub exponent: u32,
    pub trials: u64,
    pub master_seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub rng: String,
}

impl RunInfo {
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("variant", self.variant.to_string()),
            ("k", self.k.to_string()),
            ("m", fmt_f64(self.m)),
            ("r", fmt_f64(self.r)),
            ("exponent", self.exponent.to_string()),
            ("trials", self.trials.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("alpha", fmt_f64(self.alpha)),
            ("beta", fmt_f64(self.beta)),
            ("eta", fmt_f64(self.eta)),
            ("rng", self.rng.clone()),
        ]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["key", "value"])?;
        for (key, value) in self.entries() {
            w.write_record([key, value.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let mut map = BTreeMap::new();
        for row in reader.records() {
            let row = row?;
            map.insert(
                row.get(0).unwrap_or_default().to_string(),
                row.get(1).unwrap_or_default().to_string(),
            );
        }
        fn field<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
            map.get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Malformed(format!("metadata key {key:?} missing or malformed")))
        }
        Ok(Self {
            variant: field(&map, "variant")?,
            k: field(&map, "k")?,
            m: field(&map, "m")?,
            r: field(&map, "r")?,
            exponent: field(&map, "exponent")?,
            trials: field(&map, "trials")?,
            master_seed: field(&map, "master_seed")?,
            alpha: field(&map, "alpha")?,
            beta: field(&map, "beta")?,
            eta: field(&map, "eta")?,
            rng: field(&map, "rng")?,
        })
    }
}

/// Sidecar metadata path for a trials CSV: `trials.csv` → `trials.meta.csv`.
pub fn meta_path(trials_csv: &Path) -> PathBuf {
    let stem = trials_csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trials".into());
    trials_csv.with_file_name(format!("{stem}.meta.csv"))
}

/// Writes `trials.csv` and its metadata sidecar.
pub fn persist(records: &[TrialRecord], info: &RunInfo, trials_csv: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(trials_csv)?);
    write_trials_csv(records, &mut out)?;
    out.flush()?;
    let mut meta = BufWriter::new(File::create(meta_path(trials_csv))?);
    info.write_csv(&mut meta)?;
    meta.flush()?;
    Ok(())
}
