use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::lexicon::{Dimension, Language, Lexicon, TernaryLabel};

/// Labelled examples of one language and dimension, one feature row each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub language: Language,
    pub dimension: Dimension,
    pub keys: Vec<String>,
    pub x: Array2<f64>,
    pub labels: Vec<TernaryLabel>,
    index: HashMap<String, usize>,
}

impl LabeledSet {
    pub fn new(
        language: Language,
        dimension: Dimension,
        keys: Vec<String>,
        x: Array2<f64>,
        labels: Vec<TernaryLabel>,
    ) -> Result<Self> {
        if keys.len() != x.nrows() || keys.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} keys, {} feature rows, {} labels",
                keys.len(),
                x.nrows(),
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(keys.len());
        for (i, k) in keys.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate key {k}")));
            }
        }
        Ok(LabeledSet {
            language,
            dimension,
            keys,
            x,
            labels,
            index,
        })
    }

    pub fn empty(language: Language, dimension: Dimension, dim: usize) -> Self {
        LabeledSet::new(language, dimension, Vec::new(), Array2::zeros((0, dim)), Vec::new())
            .expect("empty set is consistent")
    }

    /// Joins an aggregated lexicon with feature vectors keyed by instance id.
    pub fn from_lexicon(lexicon: &Lexicon, features: &FeatureSet) -> Result<Self> {
        let mut keys = Vec::with_capacity(lexicon.len());
        let mut labels = Vec::with_capacity(lexicon.len());
        let mut rows = Vec::with_capacity(lexicon.len() * features.dim);
        let mut missing = Vec::new();
        for inst in &lexicon.instances {
            let label = inst
                .label
                .ok_or_else(|| Error::NotAggregated(inst.instance_id.clone()))?;
            match features.get(&inst.instance_id) {
                Some(rec) => {
                    keys.push(inst.instance_id.clone());
                    labels.push(label);
                    rows.extend(rec.vector.iter().map(|&v| f64::from(v)));
                }
                None => missing.push(inst.instance_id.clone()),
            }
        }
        if !missing.is_empty() {
            let shown: Vec<_> = missing.iter().take(5).cloned().collect();
            return Err(Error::KeyMismatch(format!(
                "{} {}/{} instances have no feature vector (e.g. {})",
                missing.len(),
                lexicon.language,
                lexicon.dimension,
                shown.join(", ")
            )));
        }
        let x = Array2::from_shape_vec((keys.len(), features.dim), rows)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        LabeledSet::new(lexicon.language.clone(), lexicon.dimension, keys, x, labels)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn position(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Rows for `keys`, in that order.
    pub fn subset(&self, keys: &[String]) -> Result<LabeledSet> {
        let idx: Vec<usize> = keys
            .iter()
            .map(|k| {
                self.position(k)
                    .ok_or_else(|| Error::KeyMismatch(format!("key {k} not in {} set", self.language)))
            })
            .collect::<Result<_>>()?;
        let x = self.x.select(ndarray::Axis(0), &idx);
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        LabeledSet::new(self.language.clone(), self.dimension, keys.to_vec(), x, labels)
    }

    /// Stacks sets of the same dimension. Keys are prefixed with the
    /// language when two parts share a key.
    pub fn concat(parts: &[&LabeledSet]) -> Result<LabeledSet> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InsufficientData("nothing to concatenate".into()))?;
        let dim = first.dim();
        let mut keys = Vec::new();
        let mut labels = Vec::new();
        let mut views = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in parts {
            if p.dim() != dim || p.dimension != first.dimension {
                return Err(Error::InvalidParameter(
                    "cannot concatenate sets of different shape or dimension".into(),
                ));
            }
            for (i, k) in p.keys.iter().enumerate() {
                let mut key = k.clone();
                let mut n = 0;
                while !seen.insert(key.clone()) {
                    n += 1;
                    key = format!("{}:{}#{}", p.language, k, n);
                }
                keys.push(key);
                labels.push(p.labels[i]);
            }
            views.push(p.x.view());
        }
        let x = ndarray::concatenate(ndarray::Axis(0), &views)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        LabeledSet::new(first.language.clone(), first.dimension, keys, x, labels)
    }
}
