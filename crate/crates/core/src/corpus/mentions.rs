//! Finding the target person in parsed sentences: by name, by surname or
//! by the pronoun inferred for the article.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::conllu::{base_relation, Sentence, Token};
use super::entry::BiographyEntry;
use crate::lexicon::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pronoun {
    He,
    She,
    Unresolved,
}

/// Per-language pronoun forms. `he`/`she` are counted to infer the article's
/// pronoun; `he_forms`/`she_forms` (a superset, including object forms) are
/// accepted as mentions once the pronoun is resolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounSet {
    pub he: Vec<String>,
    pub she: Vec<String>,
    pub he_forms: Vec<String>,
    pub she_forms: Vec<String>,
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl PronounSet {
    /// Built-in sets for en, es and ru.
    pub fn builtin(language: &Language) -> Option<Self> {
        let (he, she, he_forms, she_forms): (&[&str], &[&str], &[&str], &[&str]) = match language.as_str() {
            "en" => (&["he"], &["she"], &["he", "him"], &["she", "her"]),
            "es" => (&["él"], &["ella"], &["él", "lo", "le"], &["ella", "la", "le"]),
            "ru" => (
                &["он"],
                &["она"],
                &["он", "его", "него", "ему", "нему", "им", "ним", "нём", "нем"],
                &["она", "её", "ее", "неё", "нее", "ей", "ней", "ею", "нею"],
            ),
            _ => return None,
        };
        Some(PronounSet {
            he: strings(he),
            she: strings(she),
            he_forms: strings(he_forms),
            she_forms: strings(she_forms),
        })
    }

    fn forms(&self, pronoun: Pronoun) -> &[String] {
        match pronoun {
            Pronoun::He => &self.he_forms,
            Pronoun::She => &self.she_forms,
            Pronoun::Unresolved => &[],
        }
    }
}

/// Dependency relations that count as subject and object slots. Labels are
/// compared exactly, so `nsubj` does not cover `nsubj:pass`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationConfig {
    pub subject: Vec<String>,
    pub object: Vec<String>,
}

impl Default for RelationConfig {
    fn default() -> Self {
        RelationConfig {
            subject: strings(&["nsubj"]),
            object: strings(&["obj", "dobj"]),
        }
    }
}

impl RelationConfig {
    pub fn is_subject(&self, deprel: &str) -> bool {
        self.subject.iter().any(|r| r == deprel)
    }

    pub fn is_object(&self, deprel: &str) -> bool {
        self.object.iter().any(|r| r == deprel)
    }
}

/// Settings for mention detection, shared by corpus filtering and sentence
/// selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionConfig {
    #[serde(default)]
    pub relations: RelationConfig,
    /// Per-language overrides of the relation sets.
    #[serde(default)]
    pub relations_by_language: BTreeMap<Language, RelationConfig>,
    /// Per-language pronoun sets replacing the built-in ones.
    #[serde(default)]
    pub pronouns: BTreeMap<Language, PronounSet>,
    /// Also accept the last token of a name on its own.
    #[serde(default = "yes")]
    pub match_surname: bool,
}

fn yes() -> bool {
    true
}

impl Default for MentionConfig {
    fn default() -> Self {
        MentionConfig {
            relations: RelationConfig::default(),
            relations_by_language: BTreeMap::new(),
            pronouns: BTreeMap::new(),
            match_surname: true,
        }
    }
}

impl MentionConfig {
    pub fn relations_for(&self, language: &Language) -> &RelationConfig {
        self.relations_by_language.get(language).unwrap_or(&self.relations)
    }

    pub fn pronouns_for(&self, language: &Language) -> Option<PronounSet> {
        self.pronouns
            .get(language)
            .cloned()
            .or_else(|| PronounSet::builtin(language))
    }
}

/// Picks he or she by which set is more frequent among the article's tokens.
/// Ties (including zero counts) and languages without a pronoun set are
/// unresolved.
pub fn infer_pronoun(entry: &BiographyEntry, language: &Language, cfg: &MentionConfig) -> Pronoun {
    let (Some(page), Some(set)) = (entry.page(language), cfg.pronouns_for(language)) else {
        return Pronoun::Unresolved;
    };
    let (mut he, mut she) = (0usize, 0usize);
    for t in page.sentences.iter().flat_map(|s| &s.tokens) {
        let form = t.form.to_lowercase();
        if set.he.contains(&form) {
            he += 1;
        }
        if set.she.contains(&form) {
            she += 1;
        }
    }
    match he.cmp(&she) {
        std::cmp::Ordering::Greater => Pronoun::He,
        std::cmp::Ordering::Less => Pronoun::She,
        std::cmp::Ordering::Equal => Pronoun::Unresolved,
    }
}

/// Which slot the person fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Subject,
    Object,
}

/// One occurrence of the person as an argument of a verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mention {
    pub sentence_index: usize,
    /// 1-based id of the verb.
    pub verb_id: usize,
    /// 1-based id of the argument token.
    pub argument_id: usize,
    pub slot: Slot,
}

/// Matches a single person's mentions in one language.
#[derive(Debug, Clone)]
pub struct MentionMatcher {
    full_names: Vec<Vec<String>>,
    surnames: Vec<String>,
    pronoun_forms: Vec<String>,
    relations: RelationConfig,
}

fn is_name_part(deprel: &str) -> bool {
    matches!(base_relation(deprel), "flat" | "compound" | "name")
}

impl MentionMatcher {
    pub fn new(names: &[String], pronoun: Pronoun, pronouns: Option<&PronounSet>, cfg: &MentionConfig, language: &Language) -> Self {
        let full_names: Vec<Vec<String>> = names
            .iter()
            .map(|n| n.split_whitespace().map(|w| w.to_lowercase()).collect::<Vec<_>>())
            .filter(|n| !n.is_empty())
            .collect();
        let surnames = if cfg.match_surname {
            full_names.iter().filter_map(|n| n.last().cloned()).collect()
        } else {
            Vec::new()
        };
        MentionMatcher {
            full_names,
            surnames,
            pronoun_forms: pronouns.map(|p| p.forms(pronoun).to_vec()).unwrap_or_default(),
            relations: cfg.relations_for(language).clone(),
        }
    }

    /// Builds the matcher for an entry, inferring the pronoun.
    pub fn for_entry(entry: &BiographyEntry, language: &Language, cfg: &MentionConfig) -> Option<Self> {
        let page = entry.page(language)?;
        let pronoun = infer_pronoun(entry, language, cfg);
        let set = cfg.pronouns_for(language);
        Some(MentionMatcher::new(&page.names, pronoun, set.as_ref(), cfg, language))
    }

    /// True when the token, with its name-part dependents, refers to the person.
    pub fn refers(&self, sentence: &Sentence, token: &Token) -> bool {
        let form = token.form.to_lowercase();
        if self.pronoun_forms.contains(&form) && token.upos == "PRON" {
            return true;
        }
        let mut span: Vec<&Token> = sentence
            .dependents(token.id)
            .filter(|t| is_name_part(&t.deprel))
            .collect();
        span.push(token);
        span.sort_by_key(|t| t.id);
        let words: Vec<String> = span.iter().map(|t| t.form.to_lowercase()).collect();
        if self.full_names.iter().any(|n| *n == words) {
            return true;
        }
        let last = words.last().expect("span holds the token");
        self.surnames.contains(last)
    }

    pub fn mentions(&self, sentence_index: usize, sentence: &Sentence) -> Vec<Mention> {
        let mut out = Vec::new();
        for t in &sentence.tokens {
            let Some(head) = t.head.filter(|h| *h > 0) else {
                continue;
            };
            let slot = if self.relations.is_subject(&t.deprel) {
                Slot::Subject
            } else if self.relations.is_object(&t.deprel) {
                Slot::Object
            } else {
                continue;
            };
            let Some(verb) = sentence.token(head) else {
                continue;
            };
            if verb.upos != "VERB" || !self.refers(sentence, t) {
                continue;
            }
            out.push(Mention {
                sentence_index,
                verb_id: verb.id,
                argument_id: t.id,
                slot,
            });
        }
        out
    }

    /// Indices of sentences with at least one subject or object mention.
    pub fn analyzable_sentences(&self, sentences: &[Sentence]) -> Vec<usize> {
        sentences
            .iter()
            .enumerate()
            .filter(|(i, s)| !self.mentions(*i, s).is_empty())
            .map(|(i, _)| i)
            .collect()
    }
}
