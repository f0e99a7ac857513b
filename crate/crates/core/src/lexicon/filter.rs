use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::types::Lexicon;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorStats {
    /// Instances with at least one peer judgement.
    pub judged: usize,
    pub disagreements: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorReport {
    pub annotators: BTreeMap<String, AnnotatorStats>,
    pub mean_rate: f64,
    /// Population standard deviation of the per-annotator rates.
    pub sd_rate: f64,
    pub threshold: f64,
    pub removed_annotators: Vec<String>,
    pub dropped_instances: Vec<String>,
}

impl AnnotatorReport {
    pub fn removed_fraction(&self) -> f64 {
        if self.annotators.is_empty() {
            0.0
        } else {
            self.removed_annotators.len() as f64 / self.annotators.len() as f64
        }
    }
}

/// Computes per-annotator disagreement rates over every instance in
/// `lexicons`.
///
/// An instance counts against an annotator when all of its peers on that
/// instance gave the same value and the annotator gave a different one. With
/// two judgements any mismatch counts against both annotators.
pub fn disagreement_rates(lexicons: &[Lexicon]) -> BTreeMap<String, AnnotatorStats> {
    let mut stats: BTreeMap<String, AnnotatorStats> = BTreeMap::new();
    for inst in lexicons.iter().flat_map(|l| l.instances.iter()) {
        if inst.judgements.len() < 2 {
            continue;
        }
        for (i, j) in inst.judgements.iter().enumerate() {
            let mut peers = inst
                .judgements
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, p)| p.value);
            let first = peers.next().expect("at least one peer");
            let peers_agree = peers.all(|v| v == first);
            let entry = stats.entry(j.annotator_id.clone()).or_default();
            entry.judged += 1;
            if peers_agree && j.value != first {
                entry.disagreements += 1;
            }
        }
    }
    for s in stats.values_mut() {
        s.rate = s.disagreements as f64 / s.judged as f64;
    }
    stats
}

/// Removes annotators whose disagreement rate exceeds mean + 1 SD and drops
/// instances left with fewer than two judgements.
pub fn filter_annotators(lexicons: &[Lexicon]) -> (Vec<Lexicon>, AnnotatorReport) {
    let annotators = disagreement_rates(lexicons);
    if annotators.is_empty() {
        return (lexicons.to_vec(), AnnotatorReport::default());
    }

    let n = annotators.len() as f64;
    let mean = annotators.values().map(|s| s.rate).sum::<f64>() / n;
    let var = annotators
        .values()
        .map(|s| (s.rate - mean).powi(2))
        .sum::<f64>()
        / n;
    let sd = var.sqrt();
    let threshold = mean + sd;

    let removed: BTreeSet<&str> = annotators
        .iter()
        .filter(|(_, s)| s.rate > threshold)
        .map(|(id, _)| id.as_str())
        .collect();

    let mut dropped = Vec::new();
    let filtered = lexicons
        .iter()
        .map(|lex| {
            let mut out = lex.clone();
            out.instances = lex
                .instances
                .iter()
                .filter_map(|inst| {
                    let mut inst = inst.clone();
                    inst.judgements
                        .retain(|j| !removed.contains(j.annotator_id.as_str()));
                    if inst.judgements.len() < 2 {
                        dropped.push(inst.instance_id.clone());
                        None
                    } else {
                        Some(inst)
                    }
                })
                .collect();
            out
        })
        .collect();

    let report = AnnotatorReport {
        removed_annotators: removed.iter().map(|s| s.to_string()).collect(),
        annotators,
        mean_rate: mean,
        sd_rate: sd,
        threshold,
        dropped_instances: dropped,
    };
    (filtered, report)
}
