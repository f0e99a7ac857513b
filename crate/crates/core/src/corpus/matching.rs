//! Control matching over category vectors.
//!
//! Similarity is the dot product of the pivot-normalized vectors. Plain
//! cosine would undo the per-person divisor and make the slope irrelevant.
//! Assignment is greedy without replacement: the highest-similarity
//! (treatment, candidate) pair among unmatched people is taken first, ties
//! going to the smaller treatment id and then the smaller candidate id.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vectors::{build_category_vectors, mean_category_count, CategoryProfile, CategoryVector, ExclusionList};
use crate::error::{Error, Result};

pub const DEFAULT_SIMILARITY_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub treatment_id: String,
    pub control_id: String,
    pub similarity: f64,
    /// Similarity under the configured floor, e.g. no shared categories.
    pub below_floor: bool,
}

/// Default slope grid: 0.0 to 0.5 in steps of 0.1.
pub fn default_slope_grid() -> Vec<f64> {
    (0..=5).map(|i| i as f64 / 10.0).collect()
}

fn lookup<'a>(vectors: &'a HashMap<&str, &CategoryVector>, id: &str) -> Result<&'a CategoryVector> {
    vectors
        .get(id)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("no category vector for {id}")))
}

/// Similarity between every treatment and every candidate, row per treatment.
pub fn similarity_matrix(
    treatment: &[String],
    candidates: &[String],
    vectors: &[CategoryVector],
) -> Result<Vec<Vec<f64>>> {
    let by_id: HashMap<&str, &CategoryVector> = vectors.iter().map(|v| (v.person_id.as_str(), v)).collect();
    let t: Vec<&CategoryVector> = treatment.iter().map(|id| lookup(&by_id, id)).collect::<Result<_>>()?;
    let c: Vec<&CategoryVector> = candidates.iter().map(|id| lookup(&by_id, id)).collect::<Result<_>>()?;
    Ok(t.par_iter().map(|tv| c.iter().map(|cv| tv.dot(cv)).collect()).collect())
}

pub fn match_controls(
    treatment: &[String],
    candidates: &[String],
    vectors: &[CategoryVector],
    similarity_floor: f64,
) -> Result<Vec<MatchedPair>> {
    if candidates.len() < treatment.len() {
        return Err(Error::InsufficientData(format!(
            "{} candidates for {} treatment entries",
            candidates.len(),
            treatment.len()
        )));
    }
    let t_set: BTreeSet<&String> = treatment.iter().collect();
    let c_set: BTreeSet<&String> = candidates.iter().collect();
    if t_set.len() != treatment.len() || c_set.len() != candidates.len() {
        return Err(Error::InvalidParameter("duplicate person id in matching input".into()));
    }
    if let Some(both) = t_set.intersection(&c_set).next() {
        return Err(Error::InvalidParameter(format!(
            "{both} is both a treatment entry and a candidate"
        )));
    }

    let sims = similarity_matrix(treatment, candidates, vectors)?;
    // Rank indices by id so that ties break on ids, not input order.
    let mut t_order: Vec<usize> = (0..treatment.len()).collect();
    t_order.sort_by(|&a, &b| treatment[a].cmp(&treatment[b]));
    let mut c_order: Vec<usize> = (0..candidates.len()).collect();
    c_order.sort_by(|&a, &b| candidates[a].cmp(&candidates[b]));
    let mut t_rank = vec![0; treatment.len()];
    for (r, &i) in t_order.iter().enumerate() {
        t_rank[i] = r;
    }
    let mut c_rank = vec![0; candidates.len()];
    for (r, &j) in c_order.iter().enumerate() {
        c_rank[j] = r;
    }

    let mut triples: Vec<(f64, usize, usize)> = Vec::with_capacity(treatment.len() * candidates.len());
    for (i, row) in sims.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            triples.push((s, i, j));
        }
    }
    triples.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(t_rank[a.1].cmp(&t_rank[b.1]))
            .then(c_rank[a.2].cmp(&c_rank[b.2]))
    });

    let mut t_done = vec![false; treatment.len()];
    let mut c_used = vec![false; candidates.len()];
    let mut pairs = Vec::with_capacity(treatment.len());
    for (s, i, j) in triples {
        if t_done[i] || c_used[j] {
            continue;
        }
        t_done[i] = true;
        c_used[j] = true;
        pairs.push(MatchedPair {
            treatment_id: treatment[i].clone(),
            control_id: candidates[j].clone(),
            similarity: s,
            below_floor: s < similarity_floor,
        });
        if pairs.len() == treatment.len() {
            break;
        }
    }
    pairs.sort_by(|a, b| a.treatment_id.cmp(&b.treatment_id));
    Ok(pairs)
}

/// |mean categories(treatment) - mean categories(matched controls)|.
pub fn category_gap(pairs: &[MatchedPair], profiles: &[CategoryProfile]) -> f64 {
    let by_id: HashMap<&str, &CategoryProfile> = profiles.iter().map(|p| (p.person_id.as_str(), p)).collect();
    let count = |ids: Vec<&String>| -> f64 {
        let ps: Vec<CategoryProfile> = ids.iter().filter_map(|id| by_id.get(id.as_str()).map(|p| (*p).clone())).collect();
        mean_category_count(&ps)
    };
    let t = count(pairs.iter().map(|p| &p.treatment_id).collect());
    let c = count(pairs.iter().map(|p| &p.control_id).collect());
    (t - c).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeTuning {
    pub slope: f64,
    pub pivot: f64,
    /// (slope, gap) for every grid point, in grid order.
    pub gaps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub pairs: Vec<MatchedPair>,
    pub tuning: SlopeTuning,
}

fn split_profiles<'a>(
    profiles: &'a [CategoryProfile],
    treatment: &[String],
    candidates: &[String],
) -> Result<Vec<&'a CategoryProfile>> {
    let by_id: HashMap<&str, &CategoryProfile> = profiles.iter().map(|p| (p.person_id.as_str(), p)).collect();
    treatment
        .iter()
        .chain(candidates)
        .map(|id| {
            by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("no category profile for {id}")))
        })
        .collect()
}

/// Runs matching for every slope in `grid` and returns the one with the
/// smallest category-count gap; ties go to the smaller slope. The pivot is
/// the mean category count over treatment and candidates unless given.
pub fn tune_slope(
    treatment: &[String],
    candidates: &[String],
    profiles: &[CategoryProfile],
    excluded: &ExclusionList,
    grid: &[f64],
    pivot: Option<f64>,
    similarity_floor: f64,
) -> Result<MatchOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("slope grid is empty".into()));
    }
    let pool: Vec<CategoryProfile> = split_profiles(profiles, treatment, candidates)?
        .into_iter()
        .map(|p| CategoryProfile {
            person_id: p.person_id.clone(),
            categories: p.categories.iter().filter(|c| !excluded.excludes(c)).cloned().collect(),
        })
        .collect();
    let pivot = match pivot {
        Some(p) => p,
        None => mean_category_count(&pool).max(f64::MIN_POSITIVE),
    };
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut gaps = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64, Vec<MatchedPair>)> = None;
    for &slope in &sorted {
        let vectors = build_category_vectors(&pool, &ExclusionList::default(), pivot, slope)?;
        let pairs = match_controls(treatment, candidates, &vectors, similarity_floor)?;
        let gap = category_gap(&pairs, &pool);
        gaps.push((slope, gap));
        if best.as_ref().is_none_or(|(_, g, _)| gap < *g) {
            best = Some((slope, gap, pairs));
        }
    }
    let (slope, _, pairs) = best.expect("grid is non-empty");
    Ok(MatchOutcome {
        pairs,
        tuning: SlopeTuning { slope, pivot, gaps },
    })
}

/// Matching CSV: treatment_id, control_id, similarity, slope, pivot, below_floor.
pub fn matching_csv(pairs: &[MatchedPair], slope: f64, pivot: f64) -> String {
    let mut out = String::from("treatment_id,control_id,similarity,slope,pivot,below_floor\n");
    for p in pairs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.treatment_id, p.control_id, p.similarity, slope, pivot, p.below_floor
        );
    }
    out
}

#[derive(Debug, Deserialize)]
struct MatchRow {
    treatment_id: String,
    control_id: String,
    similarity: f64,
    #[serde(default)]
    below_floor: bool,
}

/// Reads pairs back from a matching CSV. `#` lines are comments.
pub fn read_matching_csv(text: &str) -> Result<Vec<MatchedPair>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: MatchRow = row?;
        out.push(MatchedPair {
            treatment_id: r.treatment_id,
            control_id: r.control_id,
            similarity: r.similarity,
            below_floor: r.below_floor,
        });
    }
    Ok(out)
}
