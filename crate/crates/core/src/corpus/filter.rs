use super::entry::BiographyEntry;
use super::mentions::{MentionConfig, MentionMatcher};
use crate::lexicon::Language;

pub const DEFAULT_MIN_SENTENCES: usize = 3;

/// Number of analyzable sentences for the entry in a language, or `None`
/// when there is no page.
pub fn analyzable_count(entry: &BiographyEntry, language: &Language, cfg: &MentionConfig) -> Option<usize> {
    let page = entry.page(language)?;
    let matcher = MentionMatcher::for_entry(entry, language, cfg)?;
    Some(matcher.analyzable_sentences(&page.sentences).len())
}

/// Keeps entries with a page in every language and at least `min_sentences`
/// analyzable sentences in each.
pub fn filter_entries(
    entries: &[BiographyEntry],
    languages: &[Language],
    min_sentences: usize,
    cfg: &MentionConfig,
) -> Vec<BiographyEntry> {
    entries
        .iter()
        .filter(|e| {
            languages
                .iter()
                .all(|l| analyzable_count(e, l, cfg).is_some_and(|n| n >= min_sentences))
        })
        .cloned()
        .collect()
}
