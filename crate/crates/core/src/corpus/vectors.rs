//! Category TF-IDF vectors with pivoted length normalization.
//!
//! Each person's categories are a set, so term frequency is 1. The weight of
//! category `c` for a person with `n` categories is
//! `ln(N / df(c)) / ((1 - slope) * pivot + slope * n)`, with `N` and `df`
//! taken over the profiles passed in.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entry::BiographyEntry;
use crate::error::{Error, Result};

/// Categories to drop before weighting. Lines are exact names; a leading
/// `~` makes the rest a substring pattern. Matching ignores case and treats
/// `_` as a space. `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusionList {
    exact: BTreeSet<String>,
    substrings: Vec<String>,
}

fn normalize_category(c: &str) -> String {
    c.trim().replace('_', " ").to_lowercase()
}

impl ExclusionList {
    pub fn parse(text: &str) -> Self {
        let mut list = ExclusionList::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.strip_prefix('~') {
                Some(pattern) => list.substrings.push(normalize_category(pattern)),
                None => {
                    list.exact.insert(normalize_category(line));
                }
            }
        }
        list
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_names<I: IntoIterator<Item = S>, S: AsRef<str>>(names: I) -> Self {
        ExclusionList {
            exact: names.into_iter().map(|n| normalize_category(n.as_ref())).collect(),
            substrings: Vec::new(),
        }
    }

    pub fn excludes(&self, category: &str) -> bool {
        let c = normalize_category(category);
        self.exact.contains(&c) || self.substrings.iter().any(|p| c.contains(p.as_str()))
    }
}

/// A person's category set after exclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryProfile {
    pub person_id: String,
    pub categories: BTreeSet<String>,
}

impl CategoryProfile {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(person_id: &str, categories: I) -> Self {
        CategoryProfile {
            person_id: person_id.to_string(),
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    pub fn from_entry(entry: &BiographyEntry, excluded: &ExclusionList) -> Self {
        CategoryProfile {
            person_id: entry.person_id.clone(),
            categories: entry
                .categories
                .iter()
                .filter(|c| !excluded.excludes(c))
                .cloned()
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

pub fn mean_category_count(profiles: &[CategoryProfile]) -> f64 {
    if profiles.is_empty() {
        return 0.0;
    }
    profiles.iter().map(|p| p.len() as f64).sum::<f64>() / profiles.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryVector {
    pub person_id: String,
    pub n_categories: usize,
    pub weights: BTreeMap<String, f64>,
}

impl CategoryVector {
    pub fn dot(&self, other: &CategoryVector) -> f64 {
        let (small, large) = if self.weights.len() <= other.weights.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .weights
            .iter()
            .filter_map(|(c, w)| large.weights.get(c).map(|v| w * v))
            .sum()
    }
}

pub fn check_pivot_slope(pivot: f64, slope: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&slope) {
        return Err(Error::InvalidParameter(format!("slope {slope} is outside [0, 1]")));
    }
    if !(pivot.is_finite() && pivot > 0.0) {
        return Err(Error::InvalidParameter(format!("pivot {pivot} must be positive")));
    }
    Ok(())
}

/// Builds one vector per profile. Excluded categories are removed again here
/// so callers may pass raw profiles.
pub fn build_category_vectors(
    profiles: &[CategoryProfile],
    excluded: &ExclusionList,
    pivot: f64,
    slope: f64,
) -> Result<Vec<CategoryVector>> {
    check_pivot_slope(pivot, slope)?;
    let kept: Vec<Vec<&String>> = profiles
        .iter()
        .map(|p| p.categories.iter().filter(|c| !excluded.excludes(c)).collect())
        .collect();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for cats in &kept {
        for c in cats {
            *df.entry(c.as_str()).or_default() += 1;
        }
    }
    let n = profiles.len() as f64;
    Ok(profiles
        .par_iter()
        .zip(kept.par_iter())
        .map(|(p, cats)| {
            let divisor = (1.0 - slope) * pivot + slope * cats.len() as f64;
            let weights = cats
                .iter()
                .map(|c| {
                    let idf = (n / df[c.as_str()] as f64).ln();
                    ((*c).clone(), idf / divisor)
                })
                .collect();
            CategoryVector {
                person_id: p.person_id.clone(),
                n_categories: cats.len(),
                weights,
            }
        })
        .collect())
}
