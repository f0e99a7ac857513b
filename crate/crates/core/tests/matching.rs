mod common;

use caa_core::corpus::{
    build_category_vectors, match_controls, mean_category_count, similarity_matrix, tune_slope, CategoryProfile,
    ExclusionList,
};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;

use common::*;

const POOL: [&str; 7] = ["a", "b", "c", "d", "e", "f", "g"];

fn random_profiles(seed: u64, n: usize) -> Vec<CategoryProfile> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let k = r.random_range(1..=5);
            CategoryProfile::new(&format!("p{i}"), POOL.choose_multiple(&mut r, k).copied())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn greedy_matches_enumeration(seed in any::<u64>(), n_t in 1usize..4, extra in 0usize..3, slope in 0.0f64..0.5) {
        let profiles = random_profiles(seed, n_t * 2 + extra);
        let ids: Vec<String> = profiles.iter().map(|p| p.person_id.clone()).collect();
        let (t, c) = ids.split_at(n_t);
        let pivot = mean_category_count(&profiles);
        let vectors = build_category_vectors(&profiles, &ExclusionList::default(), pivot, slope).unwrap();
        let sims = similarity_matrix(t, c, &vectors).unwrap();
        let oracle = greedy_by_enumeration(&sims, &(0..t.len()).collect::<Vec<_>>(), &(0..c.len()).collect::<Vec<_>>());
        let pairs = match_controls(t, c, &vectors, 1e-9).unwrap();
        prop_assert_eq!(pairs.len(), t.len());
        for (ti, id) in t.iter().enumerate() {
            let p = pairs.iter().find(|p| &p.treatment_id == id).unwrap();
            prop_assert_eq!(&p.control_id, &c[oracle[ti]]);
            prop_assert_eq!(p.similarity, sims[ti][oracle[ti]]);
            prop_assert_eq!(p.below_floor, p.similarity < 1e-9);
        }
    }

    #[test]
    fn weights_are_positive_and_idf_ordered(seed in any::<u64>(), slope in 0.0f64..1.0) {
        let profiles = random_profiles(seed, 6);
        let vectors = build_category_vectors(&profiles, &ExclusionList::default(), 3.0, slope).unwrap();
        for v in &vectors {
            // Within one person the divisor is shared, so rarer categories weigh more.
            let df = |c: &str| profiles.iter().filter(|p| p.categories.iter().any(|x| x == c)).count();
            for (a, wa) in &v.weights {
                prop_assert!(*wa >= 0.0);
                for (b, wb) in &v.weights {
                    if df(a) < df(b) {
                        prop_assert!(wa > wb);
                    }
                }
            }
        }
    }
}

#[test]
fn excluded_categories_carry_no_weight() {
    let excluded = ExclusionList::parse("~lgbt\nexact name\n");
    let profiles = [
        CategoryProfile::new("x", ["LGBT writers", "Exact_name", "poets"]),
        CategoryProfile::new("y", ["poets", "painters"]),
    ];
    let v = build_category_vectors(&profiles, &excluded, 2.0, 0.0).unwrap();
    assert!(v[0].weights.keys().all(|k| k == "poets"));
    assert_eq!(v[0].n_categories, 1);
}

#[test]
fn too_few_candidates_is_an_error() {
    let profiles = random_profiles(1, 3);
    let ids: Vec<String> = profiles.iter().map(|p| p.person_id.clone()).collect();
    let v = build_category_vectors(&profiles, &ExclusionList::default(), 2.0, 0.2).unwrap();
    assert!(match_controls(&ids[..2], &ids[2..], &v, 1e-9).is_err());
}

#[test]
fn slope_tuning_reports_every_grid_point() {
    let profiles = random_profiles(9, 10);
    let ids: Vec<String> = profiles.iter().map(|p| p.person_id.clone()).collect();
    let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let out = tune_slope(&ids[..3], &ids[3..], &profiles, &ExclusionList::default(), &grid, None, 1e-9).unwrap();
    assert_eq!(out.tuning.gaps.len(), grid.len());
    let best = out.tuning.gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let first_best = out.tuning.gaps.iter().find(|g| g.1 == best).unwrap().0;
    assert_eq!(out.tuning.slope, first_best);
    assert_eq!(out.tuning.pivot, mean_category_count(&profiles));
}
