//! D^ℓ seeding: k-means++ (ℓ = 2) and its k-median counterpart (ℓ = 1).
//!
//! Sampling runs over the 2k weighted locations. A location's mass is its
//! weight times its current distance^ℓ to the nearest chosen center; the first
//! center is drawn proportionally to weight alone, i.e. uniformly over points.
//!
//! Draws use cumulative-sum inversion over extended-range prefix sums: a
//! native uniform u in [0, 1) is scaled to `u * total` and the first location
//! whose running sum reaches the target wins, so a target landing exactly on a
//! bucket boundary resolves to the lower index. Zero-mass locations are never
//! selected.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{coverage, dist_pow, CenterSet, CostExponent, Instance};
use crate::numeric::ExtScalar;

/// Identifies the per-trial random stream; written into experiment metadata.
pub const RNG_ID: &str = "ChaCha8 (rand_chacha 0.9): seed_from_u64(master_seed), set_stream(trial_index); uniform f64 via rand 0.9 StandardUniform";

/// Upper bound on the number of ordered center sequences `exact_distribution`
/// will enumerate.
pub const EXACT_LIMIT: u128 = 10_000_000;

/// The random stream for one trial. Depends only on `(seed, trial_index)`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct PickRecord {
    pub index: usize,
    pub cluster_id: usize,
    /// Covered clusters once this pick is made.
    pub coverage_after: usize,
    /// Total sampling mass before the pick, in absolute cost units. For the
    /// first pick this is the total point weight; afterwards it is the
    /// potential of the centers chosen so far.
    pub potential_before: ExtScalar,
}

#[derive(Clone, Debug)]
pub struct SeedingTrace {
    pub centers: CenterSet,
    pub records: Vec<PickRecord>,
    /// Cost of the instance w.r.t. all chosen centers, under exponent ℓ.
    pub final_cost: ExtScalar,
    /// Cluster count of the instance that was seeded.
    pub instance_k: usize,
    pub rng_seed: u64,
    pub trial_index: u64,
}

impl SeedingTrace {
    pub fn coverage_count(&self) -> usize {
        self.records.last().map_or(0, |r| r.coverage_after)
    }
}

/// Draws the index selected by `u` in [0, 1) from `masses`.
fn invert(masses: &[ExtScalar], total: ExtScalar, u: f64) -> usize {
    let target = total * ExtScalar::from_f64(u);
    let mut acc = ExtScalar::ZERO;
    let mut last_positive = None;
    for (i, &m) in masses.iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        acc += m;
        last_positive = Some(i);
        if target <= acc {
            return i;
        }
    }
    // rounding can leave the target a hair above the final prefix sum
    last_positive.expect("total mass is positive")
}

#[cfg(debug_assertions)]
fn debug_check_distribution(masses: &[ExtScalar], total: ExtScalar) {
    let mut sum = 0.0;
    for m in masses {
        let p = m.fraction_of(&total);
        assert!((0.0..=1.0 + 1e-12).contains(&p), "sampling probability {p}");
        sum += p;
    }
    assert!((sum - 1.0).abs() <= 1e-12, "sampling probabilities sum to {sum}");
}

/// Runs D^ℓ seeding for `num_centers` picks.
///
/// The outcome is a pure function of the inputs; the random stream comes from
/// [`trial_rng`].
pub fn seed(
    inst: &Instance,
    num_centers: usize,
    exponent: CostExponent,
    rng_seed: u64,
    trial_index: u64,
) -> Result<SeedingTrace> {
    let locs = inst.locations();
    let n = locs.len();
    let available = locs.iter().filter(|l| !l.weight.is_zero()).count();
    if num_centers == 0 || num_centers > available {
        return Err(invalid(format!(
            "cannot pick {num_centers} centers from {available} weighted locations"
        )));
    }
    let mut rng = trial_rng(rng_seed, trial_index);
    let scale = ExtScalar::from_f64(inst.r()).powi(exponent.as_int() as u64);

    let mut nearest = vec![ExtScalar::ZERO; n];
    let mut masses: Vec<ExtScalar> = locs.iter().map(|l| l.weight).collect();
    let mut total: ExtScalar = masses.iter().copied().sum();

    let mut centers = CenterSet::default();
    let mut covered = vec![false; inst.k()];
    let mut covered_count = 0;
    let mut records = Vec::with_capacity(num_centers);

    for pick in 0..num_centers {
        if total.is_zero() {
            return Err(Error::Degenerate {
                chosen: pick,
                requested: num_centers,
            });
        }
        #[cfg(debug_assertions)]
        debug_check_distribution(&masses, total);

        let u: f64 = rng.random();
        let chosen = invert(&masses, total, u);
        let potential_before = if pick == 0 { total } else { total * scale };
        centers.push(chosen, n)?;
        let cluster_id = locs[chosen].cluster_id;
        if !covered[cluster_id - 1] {
            covered[cluster_id - 1] = true;
            covered_count += 1;
        }
        records.push(PickRecord {
            index: chosen,
            cluster_id,
            coverage_after: covered_count,
            potential_before,
        });

        // fold the new center into the nearest-center distances
        let center = &locs[chosen];
        total = ExtScalar::ZERO;
        for (j, loc) in locs.iter().enumerate() {
            if j == chosen {
                nearest[j] = ExtScalar::ZERO;
                masses[j] = ExtScalar::ZERO;
                continue;
            }
            if pick > 0 && masses[j].is_zero() {
                continue;
            }
            let d = dist_pow(loc, center, exponent);
            if pick == 0 || d < nearest[j] {
                nearest[j] = d;
                masses[j] = loc.weight * d;
            }
            total += masses[j];
        }
    }

    Ok(SeedingTrace {
        centers,
        records,
        final_cost: total * scale,
        instance_k: inst.k(),
        rng_seed,
        trial_index,
    })
}

/// Probability vector over the number of covered clusters, index 0..=k.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageDistribution {
    pub probabilities: Vec<f64>,
}

impl CoverageDistribution {
    pub fn k(&self) -> usize {
        self.probabilities.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct ExactOutcome {
    pub coverage: CoverageDistribution,
    /// E[final cost] / discrete optimum.
    pub expected_ratio: f64,
    /// Var[final cost / discrete optimum], for Monte Carlo comparisons.
    pub ratio_variance: f64,
}

/// Enumerates every ordered sequence of `num_centers` picks with its exact
/// probability. Final costs are measured in the instance's own objective.
pub fn exact_distribution(
    inst: &Instance,
    num_centers: usize,
    exponent: CostExponent,
) -> Result<ExactOutcome> {
    let locs = inst.locations();
    let n = locs.len();
    if num_centers == 0 || num_centers > n {
        return Err(invalid(format!(
            "number of centers must be in 1..={n}, got {num_centers}"
        )));
    }
    let sequences = (n as u128).saturating_pow(num_centers as u32);
    if sequences > EXACT_LIMIT {
        return Err(Error::Capacity {
            what: "exact seeding sequences",
            needed: sequences,
            limit: EXACT_LIMIT,
        });
    }

    let objective = inst.cost_exponent();
    let scale = inst.distance_scale();
    let sampling: Vec<Vec<ExtScalar>> = locs
        .iter()
        .map(|p| locs.iter().map(|c| dist_pow(p, c, exponent)).collect())
        .collect();
    let serving: Vec<Vec<ExtScalar>> = locs
        .iter()
        .map(|p| {
            locs.iter()
                .map(|c| p.weight * dist_pow(p, c, objective) * scale)
                .collect()
        })
        .collect();
    let opt = crate::instances::reference_costs(inst).discrete;

    let mut walk = ExactWalk {
        inst,
        sampling: &sampling,
        serving: &serving,
        opt,
        target: num_centers,
        chosen: Vec::with_capacity(num_centers),
        coverage: vec![0.0; inst.k() + 1],
        ratio_moment1: 0.0,
        ratio_moment2: 0.0,
    };
    walk.descend(1.0)?;

    let mean = walk.ratio_moment1;
    Ok(ExactOutcome {
        coverage: CoverageDistribution {
            probabilities: walk.coverage,
        },
        expected_ratio: mean,
        ratio_variance: (walk.ratio_moment2 - mean * mean).max(0.0),
    })
}

struct ExactWalk<'a> {
    inst: &'a Instance,
    sampling: &'a [Vec<ExtScalar>],
    serving: &'a [Vec<ExtScalar>],
    opt: ExtScalar,
    target: usize,
    chosen: Vec<usize>,
    coverage: Vec<f64>,
    ratio_moment1: f64,
    ratio_moment2: f64,
}

impl ExactWalk<'_> {
    fn descend(&mut self, prob: f64) -> Result<()> {
        let locs = self.inst.locations();
        if self.chosen.len() == self.target {
            let centers = CenterSet::new(self.chosen.clone(), locs.len())?;
            let covered = coverage(self.inst, &centers).count;
            self.coverage[covered] += prob;
            let cost: ExtScalar = self
                .serving
                .iter()
                .map(|row| self.chosen.iter().map(|&c| row[c]).min().expect("nonempty"))
                .sum();
            let ratio = cost.ratio(&self.opt)?;
            self.ratio_moment1 += prob * ratio;
            self.ratio_moment2 += prob * ratio * ratio;
            return Ok(());
        }
        let masses: Vec<ExtScalar> = locs
            .iter()
            .enumerate()
            .map(|(j, l)| match self.chosen.iter().map(|&c| self.sampling[j][c]).min() {
                None => l.weight,
                Some(d) => l.weight * d,
            })
            .collect();
        let total: ExtScalar = masses.iter().copied().sum();
        if total.is_zero() {
            return Err(Error::Degenerate {
                chosen: self.chosen.len(),
                requested: self.target,
            });
        }
        for (j, m) in masses.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let p = m.ratio(&total)?;
            self.chosen.push(j);
            self.descend(prob * p)?;
            self.chosen.pop();
        }
        Ok(())
    }
}

/// True iff none of the first ⌊αk⌋ centers lies in clusters 1..=⌊βk⌋.
pub fn lemma1_event(trace: &SeedingTrace, alpha: f64, beta: f64) -> Result<bool> {
    if !(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!(
            "alpha and beta must lie in (0, 1], got {alpha}, {beta}"
        )));
    }
    let k = trace.instance_k;
    let prefix = floor_fraction(alpha, k);
    let heavy = floor_fraction(beta, k);
    if trace.records.len() < prefix {
        return Err(invalid(format!(
            "trace has {} picks, event needs the first {prefix}",
            trace.records.len()
        )));
    }
    Ok(trace.records[..prefix].iter().all(|r| r.cluster_id > heavy))
}

/// ⌊fraction · k⌋, tolerant of binary representation error (0.1 · 300 → 30).
pub fn floor_fraction(fraction: f64, k: usize) -> usize {
    (fraction * k as f64 + 1e-9).floor() as usize
}
