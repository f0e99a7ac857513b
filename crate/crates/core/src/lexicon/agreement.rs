//! Inter-annotator agreement: Krippendorff's alpha and pairwise agreement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::types::Lexicon;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// Squared difference of the values.
    Interval,
    /// 0 for equal values, 1 otherwise.
    Nominal,
}

impl DistanceMetric {
    fn delta2(self, a: i64, b: i64) -> f64 {
        match self {
            DistanceMetric::Interval => ((a - b) as f64).powi(2),
            DistanceMetric::Nominal => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    pub value: f64,
    /// Set when every pairable value is identical, so expected disagreement
    /// is zero and the coefficient is reported as 1.0 by convention.
    pub degenerate: bool,
}

/// Krippendorff's alpha over reliability units, each a list of the values
/// assigned to it. Units with fewer than two values are not pairable and are
/// ignored.
///
/// Uses the coincidence-matrix form: `o[c][k]` accumulates
/// `n_uc * (n_uk - [c == k]) / (m_u - 1)` over units, and
/// `alpha = 1 - (n - 1) * sum(o * d2) / sum(n_c * n_k * d2)`.
pub fn alpha_from_units(units: &[Vec<i64>], metric: DistanceMetric) -> Result<Alpha> {
    let pairable: Vec<&Vec<i64>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Krippendorff's alpha needs at least 2 units with 2+ values, got {}",
            pairable.len()
        )));
    }

    let values: Vec<i64> = {
        let mut v: Vec<i64> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let idx: BTreeMap<i64, usize> = values.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let k = values.len();

    let mut coincidence = vec![vec![0.0f64; k]; k];
    let mut counts = vec![0usize; k];
    for unit in pairable {
        counts.iter_mut().for_each(|c| *c = 0);
        for v in unit {
            counts[idx[v]] += 1;
        }
        let denom = (unit.len() - 1) as f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * (counts[c] - 1)
                } else {
                    counts[c] * counts[d]
                };
                coincidence[c][d] += pairs as f64 / denom;
            }
        }
    }

    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            let d2 = metric.delta2(values[c], values[d]);
            observed += coincidence[c][d] * d2;
            expected += marginals[c] * marginals[d] * d2;
        }
    }

    if expected == 0.0 {
        return Ok(Alpha {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(Alpha {
        value: 1.0 - (n - 1.0) * observed / expected,
        degenerate: false,
    })
}

pub fn krippendorff_alpha(lexicon: &Lexicon, metric: DistanceMetric) -> Result<Alpha> {
    let units: Vec<Vec<i64>> = lexicon
        .instances
        .iter()
        .map(|i| i.judgement_values().map(i64::from).collect())
        .collect();
    alpha_from_units(&units, metric)
}

/// Share of agreeing annotator pairs per instance, averaged over instances
/// that have at least two judgements.
///
/// With `ignore_neutral_conflicts`, only (+1, -1) pairs count as disagreement.
pub fn pairwise_agreement(lexicon: &Lexicon, ignore_neutral_conflicts: bool) -> Result<f64> {
    let mut total = 0.0;
    let mut instances = 0usize;
    for inst in &lexicon.instances {
        let vals: Vec<i8> = inst.judgement_values().collect();
        if vals.len() < 2 {
            continue;
        }
        let mut pairs = 0usize;
        let mut agree = 0usize;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                pairs += 1;
                let ok = if ignore_neutral_conflicts {
                    vals[i] * vals[j] != -1
                } else {
                    vals[i] == vals[j]
                };
                if ok {
                    agree += 1;
                }
            }
        }
        total += agree as f64 / pairs as f64;
        instances += 1;
    }
    if instances == 0 {
        return Err(Error::InsufficientData(
            "pairwise agreement needs at least one instance with 2+ judgements".into(),
        ));
    }
    Ok(total / instances as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::types::{ConnotationInstance, Dimension, Judgement, Language};

    fn lexicon(items: &[&[i8]]) -> Lexicon {
        let lang = Language::new("ru").unwrap();
        let mut lex = Lexicon::new(lang.clone(), Dimension::Agency);
        for (i, vals) in items.iter().enumerate() {
            lex.instances.push(ConnotationInstance {
                instance_id: format!("i{i}"),
                verb_lemma: "v".into(),
                context_sentence: "s".into(),
                verb_token_index: 0,
                language: lang.clone(),
                dimension: Dimension::Agency,
                judgements: vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| Judgement::new(format!("w{k}"), *v).unwrap())
                    .collect(),
                aggregate_score: None,
                label: None,
            });
        }
        lex
    }

    #[test]
    fn perfect_agreement_on_varied_items() {
        let lex = lexicon(&[&[1, 1, 1], &[0, 0], &[-1, -1, -1]]);
        for m in [DistanceMetric::Interval, DistanceMetric::Nominal] {
            let a = krippendorff_alpha(&lex, m).unwrap();
            assert_eq!(a.value, 1.0);
            assert!(!a.degenerate);
        }
    }

    #[test]
    fn all_identical_is_flagged() {
        let lex = lexicon(&[&[1, 1], &[1, 1, 1]]);
        let a = krippendorff_alpha(&lex, DistanceMetric::Interval).unwrap();
        assert_eq!(a.value, 1.0);
        assert!(a.degenerate);
    }

    #[test]
    fn too_few_units_is_an_error() {
        let lex = lexicon(&[&[1, 0], &[1]]);
        assert!(krippendorff_alpha(&lex, DistanceMetric::Nominal).is_err());
    }

    #[test]
    fn pairwise_with_neutral_conflicts_ignored() {
        let lex = lexicon(&[&[1, 0, -1]]);
        let strict = pairwise_agreement(&lex, false).unwrap();
        let lenient = pairwise_agreement(&lex, true).unwrap();
        assert_eq!(strict, 0.0);
        assert!((lenient - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_all_equal() {
        let lex = lexicon(&[&[1, 1, 1], &[0, 0]]);
        assert_eq!(pairwise_agreement(&lex, false).unwrap(), 1.0);
    }

    #[test]
    fn pairwise_empty_is_an_error() {
        assert!(pairwise_agreement(&lexicon(&[]), false).is_err());
    }
}
