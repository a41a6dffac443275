//! Pairs-of-colors ball sampling.
//!
//! 2k balls, two of each of k colors; k balls are drawn without replacement.
//! The plain process draws uniformly. The biased process gives every ball of
//! a not-yet-seen color weight γ and every remaining ball of a seen color
//! weight 1, so with t balls drawn and c colors seen the next ball is new with
//! probability 2γ(k−c) / (2γ(k−c) + 2c − t). The number of distinct colors
//! drawn models how many optimal clusters seeding covers.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::numeric::ExtScalar;
use crate::seeding::trial_rng;

/// Range of the bias factor γ for which the tail bounds are stated.
pub const GAMMA_RANGE: std::ops::RangeInclusive<f64> = 1.0..=5.0;

/// Distribution of the number of distinct colors among the k drawn balls.
#[derive(Clone, Debug, PartialEq)]
pub struct DistinctColorDistribution {
    pub k: usize,
    /// `probabilities[i]` = P[exactly i distinct colors], i in 0..=k.
    pub probabilities: Vec<f64>,
}

impl DistinctColorDistribution {
    fn from_counts(k: usize, counts: &[u64], trials: u64) -> Self {
        Self {
            k,
            probabilities: counts.iter().map(|&c| c as f64 / trials as f64).collect(),
        }
    }

    /// Largest single probability among i ≥ ⌈fraction·k⌉.
    pub fn max_at_or_above(&self, fraction: f64) -> f64 {
        let start = (fraction * self.k as f64 - 1e-9).ceil().max(0.0) as usize;
        self.probabilities
            .iter()
            .skip(start)
            .copied()
            .fold(0.0, f64::max)
    }

    /// Total variation distance to another distribution over the same k.
    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self
            .probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// n! for n in 0..=max, extended range.
fn factorials(max: usize) -> Vec<ExtScalar> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = ExtScalar::ONE;
    out.push(acc);
    for n in 1..=max {
        acc *= ExtScalar::from(n as u64);
        out.push(acc);
    }
    out
}

fn choose(fact: &[ExtScalar], n: usize, r: usize) -> ExtScalar {
    if r > n {
        return ExtScalar::ZERO;
    }
    fact[n] / (fact[r] * fact[n - r])
}

/// Exact distribution of the plain process:
/// P[i] = C(k,i)·C(i,k−i)·2^(2i−k) / C(2k,k) for 2i ≥ k.
pub fn sampball_exact(k: usize) -> Result<DistinctColorDistribution> {
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    let fact = factorials(2 * k);
    let all = choose(&fact, 2 * k, k);
    let probabilities = (0..=k)
        .map(|i| {
            if 2 * i < k {
                return 0.0;
            }
            let ways = choose(&fact, k, i) * choose(&fact, i, k - i);
            (ways.shift(2 * i as i64 - k as i64) / all).to_f64_lossy()
        })
        .collect();
    Ok(DistinctColorDistribution { k, probabilities })
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !GAMMA_RANGE.contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [1, 5], got {gamma}")));
    }
    Ok(())
}

fn distinct_histogram<F>(k: usize, trials: u64, one_trial: F) -> Vec<u64>
where
    F: Fn(u64) -> usize + Sync,
{
    (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; k + 1],
            |mut acc, t| {
                acc[one_trial(t)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; k + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Monte Carlo estimate of the plain process. Trial t uses the stream
/// `(rng_seed, t)`, so the result does not depend on scheduling.
pub fn sampball_mc(k: usize, trials: u64, rng_seed: u64) -> Result<DistinctColorDistribution> {
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    check_trials(trials)?;
    let counts = distinct_histogram(k, trials, |t| {
        let mut rng = trial_rng(rng_seed, t);
        let mut seen = vec![false; k];
        let mut distinct = 0;
        for ball in index::sample(&mut rng, 2 * k, k) {
            let color = ball / 2;
            if !seen[color] {
                seen[color] = true;
                distinct += 1;
            }
        }
        distinct
    });
    Ok(DistinctColorDistribution::from_counts(k, &counts, trials))
}

/// One-step transition of the biased process from (t drawn, c distinct):
/// returns (P[new color], P[seen color]).
pub fn biased_transition(k: usize, gamma: f64, drawn: usize, distinct: usize) -> (f64, f64) {
    debug_assert!(distinct <= drawn.max(k) && 2 * distinct >= drawn);
    let fresh = 2.0 * gamma * (k - distinct) as f64;
    let stale = (2 * distinct - drawn) as f64;
    let total = fresh + stale;
    (fresh / total, stale / total)
}

/// Exact distribution of the biased process by dynamic programming over
/// (balls drawn, distinct colors).
pub fn biased_sampball_dp(k: usize, gamma: f64) -> Result<DistinctColorDistribution> {
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    check_gamma(gamma)?;
    let mut row = vec![ExtScalar::ZERO; k + 1];
    row[0] = ExtScalar::ONE;
    for t in 0..k {
        let mut next = vec![ExtScalar::ZERO; k + 1];
        // reachable c after t draws: ⌈t/2⌉..=t
        for c in t.div_ceil(2)..=t {
            if row[c].is_zero() {
                continue;
            }
            let (p_new, p_old) = biased_transition(k, gamma, t, c);
            if p_new > 0.0 {
                next[c + 1] += row[c] * ExtScalar::from_f64(p_new);
            }
            if p_old > 0.0 {
                next[c] += row[c] * ExtScalar::from_f64(p_old);
            }
        }
        row = next;
    }
    Ok(DistinctColorDistribution {
        k,
        probabilities: row.iter().map(|p| p.to_f64_lossy()).collect(),
    })
}

/// Ball-level simulation of the biased process: each remaining ball is drawn
/// with probability proportional to γ (unseen color) or 1 (seen color).
pub fn biased_sampball_mc(
    k: usize,
    gamma: f64,
    trials: u64,
    rng_seed: u64,
) -> Result<DistinctColorDistribution> {
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    check_gamma(gamma)?;
    check_trials(trials)?;
    let counts = distinct_histogram(k, trials, |t| {
        let mut rng = trial_rng(rng_seed, t);
        let mut remaining: Vec<usize> = (0..2 * k).collect();
        let mut seen = vec![false; k];
        let mut distinct = 0;
        for _ in 0..k {
            let weight = |ball: usize| if seen[ball / 2] { 1.0 } else { gamma };
            let total: f64 = remaining.iter().map(|&b| weight(b)).sum();
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pos = remaining.len() - 1;
            for (i, &b) in remaining.iter().enumerate() {
                acc += weight(b);
                if target < acc {
                    pos = i;
                    break;
                }
            }
            let color = remaining.swap_remove(pos) / 2;
            if !seen[color] {
                seen[color] = true;
                distinct += 1;
            }
        }
        distinct
    });
    Ok(DistinctColorDistribution::from_counts(k, &counts, trials))
}

/// P[more than threshold·k distinct colors].
pub fn tail(dist: &DistinctColorDistribution, threshold: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(invalid(format!("threshold must lie in [0, 1], got {threshold}")));
    }
    let cut = threshold * dist.k as f64 + 1e-9;
    Ok(dist
        .probabilities
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as f64 > cut)
        .map(|(_, p)| p)
        .sum())
}

/// Closed-form bounds on the seeding and ball-sampling processes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    /// P[first αk centers miss the βk heaviest clusters] ≤ e^(−αβk/3).
    Lemma1 { alpha: f64, beta: f64 },
    /// Plain process, any single i ≥ 7k/8: P[i] ≤ 5/√k · 2^(−k/16).
    SampBallPointwise,
    /// Plain process: P[> 7k/8 colors] ≤ 5√k · 2^(−k/16).
    SampBallTail,
    /// Biased process, any single i ≥ 0.99k: P[i] ≤ 1/√k · 2^(−k/64).
    BiasedPointwise,
    /// Biased process: P[> 0.99k colors] ≤ √k · 2^(−k/64).
    BiasedTail,
    /// P[seeding beats (9−η)/8] ≤ 2√k · 2^(−k/300), for η ≥ 0.999.
    MainTheorem { eta: f64 },
}

impl Bound {
    pub fn name(&self) -> &'static str {
        match self {
            Bound::Lemma1 { .. } => "lemma1",
            Bound::SampBallPointwise => "sampball_pointwise",
            Bound::SampBallTail => "sampball_tail",
            Bound::BiasedPointwise => "biased_pointwise",
            Bound::BiasedTail => "biased_tail",
            Bound::MainTheorem { .. } => "main_theorem",
        }
    }
}

/// Evaluates a bound at k. Values ≥ 1 are vacuous; see [`is_vacuous`].
pub fn paper_bounds(k: usize, which: Bound) -> Result<f64> {
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    let kf = k as f64;
    let value = match which {
        Bound::Lemma1 { alpha, beta } => {
            if !(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0) {
                return Err(invalid(format!(
                    "alpha and beta must lie in (0, 1], got {alpha}, {beta}"
                )));
            }
            (-(alpha * beta / 3.0) * kf).exp()
        }
        Bound::SampBallPointwise => 5.0 / kf.sqrt() * (-kf / 16.0).exp2(),
        Bound::SampBallTail => 5.0 * kf.sqrt() * (-kf / 16.0).exp2(),
        Bound::BiasedPointwise => 1.0 / kf.sqrt() * (-kf / 64.0).exp2(),
        Bound::BiasedTail => kf.sqrt() * (-kf / 64.0).exp2(),
        Bound::MainTheorem { eta } => {
            if !(0.999..1.0).contains(&eta) {
                return Err(invalid(format!("eta must lie in [0.999, 1), got {eta}")));
            }
            2.0 * kf.sqrt() * (-kf / 300.0).exp2()
        }
    };
    Ok(value)
}

pub fn is_vacuous(bound: f64) -> bool {
    bound >= 1.0
}

/// ln(LHS) − ln(RHS) of
/// Π_{j=1..i} (2k − (j−1)·9/5) ≥ 2^i · k!/(k − 9i/10)! · (k − 9i/10)^(i/10).
/// Nonnegative exactly when the inequality holds.
pub fn product_inequality_log_margin(k: usize, i: usize) -> f64 {
    let kf = k as f64;
    let lhs: f64 = (1..=i).map(|j| (2.0 * kf - (j as f64 - 1.0) * 1.8).ln()).sum();
    let rest = kf - 0.9 * i as f64;
    let rhs = i as f64 * std::f64::consts::LN_2 + libm::lgamma(kf + 1.0) - libm::lgamma(rest + 1.0)
        + (i as f64 / 10.0) * rest.ln();
    lhs - rhs
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasedTailRow {
    pub k: usize,
    /// P[> 0.99k colors] under the biased DP.
    pub tail: f64,
    /// max over i ≥ 0.99k of P[i].
    pub pointwise_max: f64,
    pub pointwise_bound: f64,
    pub tail_bound: f64,
}

/// Biased-process tail at 0.99k against both closed-form bounds, per k.
pub fn biased_tail_scan(ks: &[usize], gamma: f64) -> Result<Vec<BiasedTailRow>> {
    ks.iter()
        .map(|&k| {
            let dist = biased_sampball_dp(k, gamma)?;
            Ok(BiasedTailRow {
                k,
                tail: tail(&dist, 0.99)?,
                pointwise_max: dist.max_at_or_above(0.99),
                pointwise_bound: paper_bounds(k, Bound::BiasedPointwise)?,
                tail_bound: paper_bounds(k, Bound::BiasedTail)?,
            })
        })
        .collect()
}
