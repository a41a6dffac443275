//! The adversarial "vertical bars" instance and its reference optima.
//!
//! Cluster i (1-based) is a vertical bar at x_i = (2^i - 2)·r with ends at
//! y = ±2^(i-2)·r. Both ends carry m/4^(i-1) points for k-means and
//! m/2^(i-1) points for k-median, so every covered bar costs exactly m·r²
//! (resp. m·r) when only one of its ends is a center.

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist_pow, CenterSet, Coord, End, Instance, Variant, WeightedLocation};
use crate::numeric::ExtScalar;

/// Subsets examined by [`brute_force_opt`] are capped at this many.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

pub fn gen_kmeans_bad(k: usize, m: f64, r: f64) -> Result<Instance> {
    generate(k, m, r, Variant::KMeans)
}

pub fn gen_kmedian_bad(k: usize, m: f64, r: f64) -> Result<Instance> {
    generate(k, m, r, Variant::KMedian)
}

pub fn generate(k: usize, m: f64, r: f64, variant: Variant) -> Result<Instance> {
    if k < 1 {
        return Err(invalid("k must be >= 1"));
    }
    if !(m.is_finite() && m >= 1.0) {
        return Err(invalid(format!("m must be a finite real >= 1, got {m}")));
    }
    let m_ext = ExtScalar::from_f64(m);
    // weight halves (k-median) or quarters (k-means) per cluster
    let decay = match variant {
        Variant::KMeans => 2,
        Variant::KMedian => 1,
    };
    let mut locations = Vec::with_capacity(2 * k);
    for i in 1..=k {
        let x = Coord::new(false, ExtScalar::pow2(i as i64).abs_diff(ExtScalar::from_f64(2.0)));
        let half_height = ExtScalar::pow2(i as i64 - 2);
        let weight = m_ext.shift(-decay * (i as i64 - 1));
        for end in [End::Top, End::Bottom] {
            locations.push(WeightedLocation {
                x,
                y: Coord::new(end == End::Bottom, half_height),
                weight,
                cluster_id: i,
                end,
            });
        }
    }
    Instance::new(locations, k, m, r, variant)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalCosts {
    /// Centers restricted to data points.
    pub discrete: ExtScalar,
    /// Unrestricted centers.
    pub continuous: ExtScalar,
}

/// Closed-form optima of the generated instances.
///
/// k-means: one end per bar gives k·m·r²; the bar midpoint gives m·r²/2 per
/// bar. k-median: any point on a bar costs the same as one of its ends, so
/// both optima are k·m·r.
pub fn reference_costs(inst: &Instance) -> OptimalCosts {
    let kmr = ExtScalar::from(inst.k() as u64) * ExtScalar::from_f64(inst.m());
    let discrete = kmr * inst.distance_scale();
    let continuous = match inst.variant() {
        Variant::KMeans => discrete.shift(-1),
        Variant::KMedian => discrete,
    };
    OptimalCosts {
        discrete,
        continuous,
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for j in 1..=r as u128 {
        // acc * (n - r + j) is divisible by j at every step
        acc = match acc.checked_mul(n as u128 - r as u128 + j) {
            Some(v) => v / j,
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive discrete optimum over all `num_centers`-subsets of the locations.
///
/// Subsets are visited in lexicographic order and only a strictly smaller
/// cost replaces the incumbent, so ties resolve to the lexicographically
/// smallest index set.
pub fn brute_force_opt(inst: &Instance, num_centers: usize) -> Result<(ExtScalar, CenterSet)> {
    let n = inst.locations().len();
    if num_centers == 0 || num_centers > n {
        return Err(invalid(format!(
            "number of centers must be in 1..={n}, got {num_centers}"
        )));
    }
    let subsets = binomial(n as u64, num_centers as u64);
    if subsets > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity {
            what: "brute-force subsets",
            needed: subsets,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let locs = inst.locations();
    let exponent = inst.cost_exponent();
    let scale = inst.distance_scale();
    // weighted[j][c]: cost of location j when served by center c
    let weighted: Vec<Vec<ExtScalar>> = locs
        .iter()
        .map(|p| {
            locs.iter()
                .map(|c| p.weight * dist_pow(p, c, exponent) * scale)
                .collect()
        })
        .collect();

    let mut subset: Vec<usize> = (0..num_centers).collect();
    let mut best: Option<(ExtScalar, Vec<usize>)> = None;
    loop {
        let total: ExtScalar = weighted
            .iter()
            .map(|row| subset.iter().map(|&c| row[c]).min().expect("nonempty"))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, subset.clone()));
        }
        if !next_combination(&mut subset, n) {
            break;
        }
    }
    let (cost, indices) = best.expect("at least one subset");
    Ok((cost, CenterSet::new(indices, n)?))
}

/// Advances to the next k-subset of 0..n in lexicographic order.
pub(crate) fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
