use kpp2d::geometry::{cluster_costs, cost, coverage, End};
use kpp2d::instances::{gen_kmeans_bad, gen_kmedian_bad, reference_costs};
use kpp2d::{CenterSet, ExtScalar, Instance};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn ratio(inst: &Instance, centers: &CenterSet) -> f64 {
    cost(inst, centers)
        .unwrap()
        .ratio(&reference_costs(inst).discrete)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coverage_floors_the_ratio(
        (k, picks) in (2usize..=12).prop_flat_map(|k| (Just(k), subsequence((0..2 * k).collect::<Vec<_>>(), k))),
        m_exp in 0i32..6,
        r in prop::sample::select(vec![1.0, 0.5, 3.0]),
    ) {
        let inst = gen_kmeans_bad(k, 4f64.powi(m_exp), r).unwrap();
        let centers = CenterSet::new(picks, 2 * k).unwrap();
        let covered = coverage(&inst, &centers).count as f64 / k as f64;
        prop_assert!(ratio(&inst, &centers) >= (9.0 - covered) / 8.0 - 1e-12);
    }

    #[test]
    fn more_centers_never_cost_more(
        (k, picks) in (2usize..=10).prop_flat_map(|k| (Just(k), subsequence((0..2 * k).collect::<Vec<_>>(), 1..=2 * k))),
    ) {
        for inst in [gen_kmeans_bad(k, 1.0, 1.0).unwrap(), gen_kmedian_bad(k, 1.0, 1.0).unwrap()] {
            let all = cost(&inst, &CenterSet::new(picks.clone(), 2 * k).unwrap()).unwrap();
            let fewer = cost(&inst, &CenterSet::new(picks[..1].to_vec(), 2 * k).unwrap()).unwrap();
            prop_assert!(all <= fewer);
        }
    }
}

/// Exactly one cluster uncovered, one doubly covered, every other cluster
/// holding one center at either end.
#[test]
fn every_uncovered_cluster_costs_at_least_seventeen_eighths() {
    for k in 2..=8usize {
        let inst = gen_kmeans_bad(k, 4f64.powi(k as i32), 1.0).unwrap();
        let floor = ExtScalar::from_f64(17.0 / 8.0) * ExtScalar::from_f64(inst.m());
        let mut configs = 0;
        for uncovered in 1..=k {
            for doubled in (1..=k).filter(|&d| d != uncovered) {
                let singles: Vec<usize> = (1..=k).filter(|&c| c != uncovered && c != doubled).collect();
                for mask in 0u32..(1 << singles.len()) {
                    let mut picks = vec![
                        inst.index_of(doubled, End::Top).unwrap(),
                        inst.index_of(doubled, End::Bottom).unwrap(),
                    ];
                    for (bit, &c) in singles.iter().enumerate() {
                        let end = if mask >> bit & 1 == 1 { End::Bottom } else { End::Top };
                        picks.push(inst.index_of(c, end).unwrap());
                    }
                    let centers = CenterSet::new(picks, 2 * k).unwrap();
                    let per_cluster = cluster_costs(&inst, &centers).unwrap();
                    assert!(
                        per_cluster[uncovered - 1] >= floor,
                        "k={k} uncovered={uncovered} doubled={doubled} mask={mask:b}: {}",
                        per_cluster[uncovered - 1]
                    );
                    configs += 1;
                }
            }
        }
        assert_eq!(configs, k * (k - 1) << (k - 2));
    }
}
