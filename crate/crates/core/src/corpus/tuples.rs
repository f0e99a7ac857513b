use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::conllu::Sentence;
use super::RelationConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SovTuple {
    pub subject: String,
    pub verb: String,
    pub object: String,
    pub frequency: usize,
    pub samples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleConfig {
    pub k_verbs: usize,
    pub k_contexts: usize,
    pub max_samples: usize,
    pub relations: RelationConfig,
}

impl Default for TupleConfig {
    fn default() -> Self {
        TupleConfig {
            k_verbs: 300,
            k_contexts: 3,
            max_samples: 3,
            relations: RelationConfig::default(),
        }
    }
}

/// Picks annotation candidates from a parsed corpus.
///
/// Verbs are ranked by how often they occur with both a subject and an
/// object. For each of the top `k_verbs`, the `k_contexts` most frequent
/// (subject, verb, object) lemma tuples with a person noun in subject or
/// object position are kept, each with up to `max_samples` example
/// sentences in corpus order. Ties rank alphabetically.
pub fn extract_candidate_tuples(
    sentences: &[Sentence],
    person_nouns: &HashSet<String>,
    cfg: &TupleConfig,
) -> Result<Vec<SovTuple>> {
    if let Some(pos) = sentences.iter().position(|s| !s.is_parsed()) {
        return Err(Error::InvalidParameter(format!(
            "sentence {} ({:?}) has no dependency parse",
            pos, sentences[pos].sent_id
        )));
    }
    let persons: HashSet<String> = person_nouns.iter().map(|p| p.to_lowercase()).collect();

    let mut verb_freq: HashMap<String, usize> = HashMap::new();
    // verb -> (subj, obj) -> (count, samples)
    let mut tuples: HashMap<String, BTreeMap<(String, String), (usize, Vec<String>)>> = HashMap::new();

    for s in sentences {
        for verb in s.tokens.iter().filter(|t| t.upos == "VERB") {
            let subjects: Vec<String> = s
                .dependents(verb.id)
                .filter(|t| cfg.relations.is_subject(&t.deprel))
                .map(|t| t.lemma.to_lowercase())
                .collect();
            let objects: Vec<String> = s
                .dependents(verb.id)
                .filter(|t| cfg.relations.is_object(&t.deprel))
                .map(|t| t.lemma.to_lowercase())
                .collect();
            if subjects.is_empty() || objects.is_empty() {
                continue;
            }
            let lemma = verb.lemma.to_lowercase();
            *verb_freq.entry(lemma.clone()).or_default() += 1;
            for subj in &subjects {
                for obj in &objects {
                    if !(persons.contains(subj) || persons.contains(obj)) {
                        continue;
                    }
                    let e = tuples
                        .entry(lemma.clone())
                        .or_default()
                        .entry((subj.clone(), obj.clone()))
                        .or_insert((0, Vec::new()));
                    e.0 += 1;
                    if e.1.len() < cfg.max_samples {
                        e.1.push(s.surface());
                    }
                }
            }
        }
    }

    let mut verbs: Vec<(String, usize)> = verb_freq.into_iter().collect();
    verbs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    verbs.truncate(cfg.k_verbs);

    let mut out = Vec::new();
    for (verb, _) in verbs {
        let Some(candidates) = tuples.remove(&verb) else {
            continue;
        };
        let mut ranked: Vec<((String, String), (usize, Vec<String>))> = candidates.into_iter().collect();
        // BTreeMap order already breaks ties by (subject, object).
        ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0));
        for ((subject, object), (frequency, samples)) in ranked.into_iter().take(cfg.k_contexts) {
            out.push(SovTuple {
                subject,
                verb: verb.clone(),
                object,
                frequency,
                samples,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::conllu::parse_conllu;

    const RESCUE: &str = "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n\
2\tfirefighter\tfirefighter\tNOUN\t_\t_\t3\tnsubj\t_\t_\n\
3\trescued\trescue\tVERB\t_\t_\t0\troot\t_\t_\n\
4\tthe\tthe\tDET\t_\t_\t5\tdet\t_\t_\n\
5\tboy\tboy\tNOUN\t_\t_\t3\tobj\t_\t_\n";

    fn persons(xs: &[&str]) -> HashSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn running_example() {
        let s = parse_conllu(RESCUE).unwrap();
        let t = extract_candidate_tuples(&s, &persons(&["firefighter", "boy"]), &TupleConfig::default()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].subject.as_str(), t[0].verb.as_str(), t[0].object.as_str()), ("firefighter", "rescue", "boy"));
        assert_eq!(t[0].frequency, 1);
        assert_eq!(t[0].samples, vec!["The firefighter rescued the boy".to_string()]);
    }

    #[test]
    fn empty_person_list_gives_nothing() {
        let s = parse_conllu(RESCUE).unwrap();
        assert!(extract_candidate_tuples(&s, &HashSet::new(), &TupleConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn unparsed_corpus_rejected() {
        let s = parse_conllu("1\tboy\tboy\tNOUN\t_\t_\t_\t_\t_\t_\n").unwrap();
        assert!(extract_candidate_tuples(&s, &persons(&["boy"]), &TupleConfig::default()).is_err());
    }
}
