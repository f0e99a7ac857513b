use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::entity::ScoreTable;
use crate::corpus::{Attributes, BiographyEntry, MatchedPair};
use crate::error::{Error, Result};
use crate::lexicon::{Dimension, Language};
use crate::stats::{one_sample_ttest, t_critical};

pub const DEFAULT_MIN_VERBS: usize = 280;
pub const CONFIDENCE_LEVEL: f64 = 0.95;

/// Paired statistics of treatment minus control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffStatistics {
    pub n_pairs: usize,
    pub mean_diff: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub zero_variance: bool,
}

/// Mean of `treatment[i] - control[i]`, a two-sided paired t-test and the
/// t-based 95% interval of the mean.
pub fn diff_statistics(treatment: &[f64], control: &[f64]) -> Result<DiffStatistics> {
    if treatment.len() != control.len() {
        return Err(Error::InvalidParameter("treatment and control scores differ in length".into()));
    }
    let diffs: Vec<f64> = treatment.iter().zip(control).map(|(a, b)| a - b).collect();
    let test = one_sample_ttest(&diffs)?;
    let half = if test.zero_variance {
        0.0
    } else {
        t_critical(CONFIDENCE_LEVEL, test.df) * test.sd_diff / (test.n as f64).sqrt()
    };
    Ok(DiffStatistics {
        n_pairs: test.n,
        mean_diff: test.mean_diff,
        ci_lower: test.mean_diff - half,
        ci_upper: test.mean_diff + half,
        t: test.t,
        df: test.df,
        p: test.p,
        zero_variance: test.zero_variance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub facet: String,
    pub value: String,
    pub language: Language,
    pub dimension: Dimension,
    pub n_pairs: usize,
    pub total_verbs: usize,
    pub mean_diff: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub zero_variance: bool,
}

impl DiffReport {
    pub fn descriptor(&self) -> String {
        format!("{}={}", self.facet, self.value)
    }
}

/// Pairs whose members are both scored; returns (treatment, control, verbs).
fn scored_pairs<'a>(
    pairs: impl IntoIterator<Item = &'a MatchedPair>,
    scores: &ScoreTable,
    language: &Language,
    dimension: Dimension,
) -> (Vec<f64>, Vec<f64>, usize) {
    let (mut t, mut c, mut verbs) = (Vec::new(), Vec::new(), 0);
    for p in pairs {
        let (Some(a), Some(b)) = (
            scores.get(&p.treatment_id, language, dimension),
            scores.get(&p.control_id, language, dimension),
        ) else {
            continue;
        };
        t.push(a.mean);
        c.push(b.mean);
        verbs += a.n_verbs + b.n_verbs;
    }
    (t, c, verbs)
}

/// Paired diff report over the given pairs. Pairs missing either score are
/// dropped. Refuses when fewer than `min_verbs` verbs back the scores or
/// fewer than two pairs remain.
pub fn diff_scores(
    pairs: &[&MatchedPair],
    scores: &ScoreTable,
    language: &Language,
    dimension: Dimension,
    facet: &str,
    value: &str,
    min_verbs: usize,
) -> Result<DiffReport> {
    let (t, c, total_verbs) = scored_pairs(pairs.iter().copied(), scores, language, dimension);
    let descriptor = format!("{facet}={value} {language} {dimension}");
    if total_verbs < min_verbs {
        return Err(Error::BelowMinVerbs {
            descriptor,
            total_verbs,
            min_verbs,
        });
    }
    if t.len() < 2 {
        return Err(Error::InsufficientData(format!("{descriptor} has {} scored pair(s)", t.len())));
    }
    let s = diff_statistics(&t, &c)?;
    Ok(DiffReport {
        facet: facet.to_string(),
        value: value.to_string(),
        language: language.clone(),
        dimension,
        n_pairs: s.n_pairs,
        total_verbs,
        mean_diff: s.mean_diff,
        ci_lower: s.ci_lower,
        ci_upper: s.ci_upper,
        t: s.t,
        df: s.df,
        p: s.p,
        zero_variance: s.zero_variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    All,
    Nationality,
    BirthYear,
    Occupation,
}

impl Facet {
    pub fn as_str(self) -> &'static str {
        match self {
            Facet::All => "all",
            Facet::Nationality => "nationality",
            Facet::BirthYear => "birth_year",
            Facet::Occupation => "occupation",
        }
    }
}

impl std::str::FromStr for Facet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "all" => Ok(Facet::All),
            "nationality" => Ok(Facet::Nationality),
            "birth_year" | "birthyear" => Ok(Facet::BirthYear),
            "occupation" => Ok(Facet::Occupation),
            other => Err(Error::InvalidParameter(format!("unknown facet {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationGroup {
    pub label: String,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetConfig {
    /// Nationality compared against everyone else.
    pub nationality_reference: String,
    /// Bin edges: `<e0`, `e0-e1`, ..., `>e_last`. Inner bins include both
    /// edges; a year on a shared edge goes to the lower bin.
    pub birth_year_edges: Vec<i32>,
    /// Checked in order; the first group sharing a tag wins.
    pub occupation_groups: Vec<OccupationGroup>,
    pub other_occupation: String,
}

impl Default for FacetConfig {
    fn default() -> Self {
        let tags = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        FacetConfig {
            nationality_reference: "American".into(),
            birth_year_edges: vec![1900, 1960],
            occupation_groups: vec![
                OccupationGroup {
                    label: "Entertainer".into(),
                    tags: tags(&[
                        "entertainer", "actor", "actress", "singer", "musician", "comedian", "dancer",
                        "television presenter", "model",
                    ]),
                },
                OccupationGroup {
                    label: "Artist".into(),
                    tags: tags(&[
                        "artist", "painter", "sculptor", "photographer", "writer", "poet", "novelist",
                        "playwright", "author",
                    ]),
                },
            ],
            other_occupation: "Other".into(),
        }
    }
}

pub const UNKNOWN: &str = "unknown";

impl FacetConfig {
    pub fn birth_year_bin(&self, year: i32) -> String {
        let e = &self.birth_year_edges;
        match (e.first(), e.last()) {
            (Some(&lo), _) if year < lo => format!("<{lo}"),
            (_, Some(&hi)) if year > hi => format!(">{hi}"),
            (None, _) => "all".into(),
            _ => {
                let i = e.windows(2).position(|w| w[0] <= year && year <= w[1]).unwrap_or(0);
                match e.get(i + 1) {
                    Some(&hi) => format!("{}-{hi}", e[i]),
                    None => format!("{}", e[i]),
                }
            }
        }
    }

    pub fn value(&self, facet: Facet, attrs: &Attributes) -> String {
        match facet {
            Facet::All => "all".into(),
            Facet::Nationality => match &attrs.nationality {
                None => UNKNOWN.into(),
                Some(n) if n.trim().eq_ignore_ascii_case(&self.nationality_reference) => {
                    self.nationality_reference.clone()
                }
                Some(_) => format!("non-{}", self.nationality_reference),
            },
            Facet::BirthYear => attrs.birth_year.map_or(UNKNOWN.into(), |y| self.birth_year_bin(y)),
            Facet::Occupation => {
                let tags: Vec<String> = attrs.occupations.iter().map(|o| o.trim().to_lowercase()).collect();
                self.occupation_groups
                    .iter()
                    .find(|g| g.tags.iter().any(|t| tags.contains(&t.to_lowercase())))
                    .map_or_else(|| self.other_occupation.clone(), |g| g.label.clone())
            }
        }
    }
}

/// A subgroup that was not reported and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    pub facet: String,
    pub value: String,
    pub language: Language,
    pub dimension: Dimension,
    pub n_pairs: usize,
    pub total_verbs: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubgroupReport {
    pub reports: Vec<DiffReport>,
    pub refused: Vec<Refusal>,
}

#[allow(clippy::too_many_arguments)]
pub fn subgroup_report(
    pairs: &[MatchedPair],
    treatment: &[BiographyEntry],
    scores: &ScoreTable,
    facets: &[Facet],
    languages: &[Language],
    dimensions: &[Dimension],
    cfg: &FacetConfig,
    min_verbs: usize,
) -> Result<SubgroupReport> {
    let attrs: HashMap<&str, &Attributes> = treatment.iter().map(|e| (e.person_id.as_str(), &e.attributes)).collect();
    let none = Attributes::default();
    let mut out = SubgroupReport::default();
    for &facet in facets {
        let mut groups: BTreeMap<String, Vec<&MatchedPair>> = BTreeMap::new();
        for p in pairs {
            let a = attrs.get(p.treatment_id.as_str()).copied().unwrap_or(&none);
            groups.entry(cfg.value(facet, a)).or_default().push(p);
        }
        for (value, members) in &groups {
            for lang in languages {
                for &dim in dimensions {
                    match diff_scores(members, scores, lang, dim, facet.as_str(), value, min_verbs) {
                        Ok(r) => out.reports.push(r),
                        Err(e @ (Error::BelowMinVerbs { .. } | Error::InsufficientData(_))) => {
                            let (t, _, total_verbs) = scored_pairs(members.iter().copied(), scores, lang, dim);
                            out.refused.push(Refusal {
                                facet: facet.as_str().into(),
                                value: value.clone(),
                                language: lang.clone(),
                                dimension: dim,
                                n_pairs: t.len(),
                                total_verbs,
                                reason: e.to_string(),
                            });
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Number of pairs in each value of a facet, for partition checks.
pub fn facet_counts(pairs: &[MatchedPair], treatment: &[BiographyEntry], facet: Facet, cfg: &FacetConfig) -> BTreeMap<String, usize> {
    let attrs: HashMap<&str, &Attributes> = treatment.iter().map(|e| (e.person_id.as_str(), &e.attributes)).collect();
    let none = Attributes::default();
    let mut counts = BTreeMap::new();
    for p in pairs {
        let a = attrs.get(p.treatment_id.as_str()).copied().unwrap_or(&none);
        *counts.entry(cfg.value(facet, a)).or_default() += 1;
    }
    counts
}
