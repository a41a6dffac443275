use crate::ballgame::{is_vacuous, paper_bounds, Bound};
use crate::error::{invalid, Result};
use crate::harness::{RunInfo, TrialRecord};

pub const QUANTILE_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99];

/// Two-sided 95% normal quantile used for Wilson intervals.
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSummary {
    pub name: &'static str,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// (level, value) for each of [`QUANTILE_LEVELS`].
    pub quantiles: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Proportion {
    pub label: String,
    pub successes: u64,
    pub n: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Proportion {
    pub fn new(label: impl Into<String>, successes: u64, n: u64) -> Self {
        let (lower, upper) = wilson_interval(successes, n);
        Self {
            label: label.into(),
            successes,
            n,
            estimate: successes as f64 / n as f64,
            lower,
            upper,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// Empirical probability set against a closed-form upper bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub bound_name: &'static str,
    /// `None` when the configured parameters are outside the bound's range.
    pub bound: Option<f64>,
    pub empirical: Proportion,
}

impl BoundRow {
    pub fn vacuous(&self) -> bool {
        self.bound.is_some_and(is_vacuous)
    }

    /// Empirical estimate ≤ bound + 3 Wilson half-widths.
    pub fn consistent(&self) -> Option<bool> {
        self.bound
            .map(|b| self.empirical.estimate <= b + 3.0 * self.empirical.half_width())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub info: RunInfo,
    pub n: u64,
    pub metrics: Vec<MetricSummary>,
    pub ratio_tails: Vec<Proportion>,
    pub lemma1: Proportion,
    pub full_coverage: Proportion,
    pub bounds: Vec<BoundRow>,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Linearly interpolated quantile of sorted data (R type 7).
pub fn quantile(sorted: &[f64], level: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[hi] == sorted[lo] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

fn metric(name: &'static str, values: impl Iterator<Item = f64>) -> MetricSummary {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    MetricSummary {
        name,
        mean,
        min: v[0],
        max: v[v.len() - 1],
        quantiles: QUANTILE_LEVELS.iter().map(|&l| (l, quantile(&v, l))).collect(),
    }
}

/// Aggregates trial records; records are sorted by trial index first, so the
/// input order does not matter.
pub fn summarize(records: &[TrialRecord], info: &RunInfo) -> Result<SummaryStats> {
    if records.is_empty() {
        return Err(invalid("cannot summarize an empty set of trials"));
    }
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| r.trial_index);
    let n = sorted.len() as u64;
    let count = |pred: &dyn Fn(&TrialRecord) -> bool| sorted.iter().filter(|r| pred(r)).count() as u64;

    let metrics = vec![
        metric("coverage_count", sorted.iter().map(|r| r.coverage_count as f64)),
        metric("coverage_fraction", sorted.iter().map(|r| r.coverage_fraction)),
        metric("ratio_discrete", sorted.iter().map(|r| r.ratio_discrete)),
        metric("ratio_continuous", sorted.iter().map(|r| r.ratio_continuous)),
    ];

    let eta_threshold = (9.0 - info.eta) / 8.0;
    let ratio_tails: Vec<Proportion> = [eta_threshold, 17.0 / 16.0, 9.0 / 8.0]
        .iter()
        .map(|&t| {
            Proportion::new(
                format!("P[ratio_discrete < {}]", super::fmt_f64(t)),
                count(&|r| r.ratio_discrete < t),
                n,
            )
        })
        .collect();

    let lemma1 = Proportion::new("P[lemma1_event]", count(&|r| r.lemma1_event), n);
    let full_coverage = Proportion::new("P[coverage = k]", count(&|r| r.coverage_count == r.k), n);
    let above_eta = Proportion::new(
        "P[coverage_fraction > eta]",
        count(&|r| r.coverage_fraction > info.eta),
        n,
    );

    let main = paper_bounds(info.k, Bound::MainTheorem { eta: info.eta }).ok();
    let bounds = vec![
        BoundRow {
            bound_name: "lemma1",
            bound: paper_bounds(
                info.k,
                Bound::Lemma1 {
                    alpha: info.alpha,
                    beta: info.beta,
                },
            )
            .ok(),
            empirical: lemma1.clone(),
        },
        BoundRow {
            bound_name: "main_theorem",
            bound: main,
            empirical: ratio_tails[0].clone(),
        },
        BoundRow {
            bound_name: "main_theorem_coverage",
            bound: main,
            empirical: above_eta,
        },
    ];

    Ok(SummaryStats {
        info: info.clone(),
        n,
        metrics,
        ratio_tails,
        lemma1,
        full_coverage,
        bounds,
    })
}
