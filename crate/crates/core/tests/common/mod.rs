//! Independent oracles and synthetic data shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use caa_core::classifier::WeightedSoftmaxObjective;
use caa_core::lexicon::{ConnotationInstance, Dimension, DistanceMetric, Judgement, Language, Lexicon, TernaryLabel};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn en() -> Language {
    Language::new("en").unwrap()
}

pub fn instance(id: &str, dim: Dimension, values: &[i8]) -> ConnotationInstance {
    ConnotationInstance {
        instance_id: id.into(),
        verb_lemma: "v".into(),
        context_sentence: "s".into(),
        verb_token_index: 0,
        language: en(),
        dimension: dim,
        judgements: values
            .iter()
            .enumerate()
            .map(|(i, v)| Judgement::new(format!("a{i:02}"), *v).unwrap())
            .collect(),
        aggregate_score: None,
        label: None,
    }
}

pub fn lexicon_of(dim: Dimension, units: &[Vec<i8>]) -> Lexicon {
    let mut lex = Lexicon::new(en(), dim);
    for (i, u) in units.iter().enumerate() {
        lex.instances.push(instance(&format!("i{i:03}"), dim, u));
    }
    lex
}

/// Ternary label by integer counting: with p positive and q negative votes
/// out of m, the mean is (p - q) / m, so `mean >= 0.35` iff
/// `100 (p - q) >= 35 m`. No floating point is involved.
pub fn ternarize_oracle(values: &[i8]) -> (i64, i64, TernaryLabel) {
    let m = values.len() as i64;
    let net: i64 = values.iter().map(|&v| i64::from(v)).sum();
    let label = if 100 * net >= 35 * m {
        TernaryLabel::Positive
    } else if 100 * net <= -35 * m {
        TernaryLabel::Negative
    } else {
        TernaryLabel::Neutral
    };
    (net, m, label)
}

/// Krippendorff's alpha built the textbook way: enumerate every ordered pair
/// of values within each unit into a coincidence matrix, then compare
/// observed with expected disagreement.
pub fn alpha_oracle(units: &[Vec<i64>], metric: DistanceMetric) -> f64 {
    let mut o: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for u in units.iter().filter(|u| u.len() >= 2) {
        let m = u.len() as f64;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    *o.entry((u[i], u[j])).or_default() += 1.0 / (m - 1.0);
                }
            }
        }
    }
    let mut n_c: BTreeMap<i64, f64> = BTreeMap::new();
    for (&(c, _), &v) in &o {
        *n_c.entry(c).or_default() += v;
    }
    let n: f64 = n_c.values().sum();
    let delta = |a: i64, b: i64| match metric {
        DistanceMetric::Interval => ((a - b) as f64).powi(2),
        DistanceMetric::Nominal => f64::from(u8::from(a != b)),
    };
    let d_o: f64 = o.iter().map(|(&(c, k), &v)| v * delta(c, k)).sum::<f64>() / n;
    let mut d_e = 0.0;
    for (&c, &nc) in &n_c {
        for (&k, &nk) in &n_c {
            d_e += nc * nk * delta(c, k);
        }
    }
    d_e /= n * (n - 1.0);
    if d_e == 0.0 {
        1.0
    } else {
        1.0 - d_o / d_e
    }
}

/// Random reliability data: `n_units` units of 2..=max_coders values drawn
/// from `0..n_values`, biased towards a per-unit true value.
pub fn random_units(rng: &mut ChaCha8Rng, n_units: usize, max_coders: usize, n_values: i64) -> Vec<Vec<i64>> {
    (0..n_units)
        .map(|_| {
            let truth = rng.random_range(0..n_values);
            let m = rng.random_range(2..=max_coders);
            (0..m)
                .map(|_| {
                    if rng.random_bool(0.6) {
                        truth
                    } else {
                        rng.random_range(0..n_values)
                    }
                })
                .collect()
        })
        .collect()
}

/// Max-norm relative error between the analytic gradient and central
/// finite differences of the loss.
pub fn gradient_check(obj: &WeightedSoftmaxObjective<'_>, params: &[f64]) -> f64 {
    let (_, analytic) = obj.loss_and_gradient(params);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let scale = analytic.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-8);
    for k in 0..params.len() {
        let mut plus = params.to_vec();
        let mut minus = params.to_vec();
        plus[k] += h;
        minus[k] -= h;
        let fd = (obj.loss(&plus) - obj.loss(&minus)) / (2.0 * h);
        worst = worst.max((fd - analytic[k]).abs() / scale);
    }
    worst
}

/// Three well separated Gaussian-free clusters: each point is its class
/// centre plus uniform jitter smaller than half the centre spacing.
pub fn separable(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Array2<f64>, Vec<TernaryLabel>) {
    let mut x = Array2::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 3;
        y.push(TernaryLabel::from_index(class).unwrap());
        for j in 0..d {
            let centre = if j % 3 == class { 4.0 } else { 0.0 };
            x[[i, j]] = centre + rng.random_range(-1.0..1.0);
        }
    }
    (x, y)
}

/// Textbook paired t statistic.
pub fn t_oracle(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    mean / (var / n).sqrt()
}

/// The global-greedy assignment found by enumeration: among all injective
/// maps treatment -> candidate, the one whose (similarity desc, treatment
/// rank, candidate rank) tuples, sorted best first, are lexicographically
/// greatest. Returns candidate index per treatment index.
pub fn greedy_by_enumeration(sims: &[Vec<f64>], t_rank: &[usize], c_rank: &[usize]) -> Vec<usize> {
    let nt = sims.len();
    let nc = sims[0].len();
    let mut best: Option<(Vec<(f64, i64, i64)>, Vec<usize>)> = None;
    let mut assign = vec![0usize; nt];
    let mut used = vec![false; nc];
    fn rec(
        i: usize,
        sims: &[Vec<f64>],
        t_rank: &[usize],
        c_rank: &[usize],
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<(Vec<(f64, i64, i64)>, Vec<usize>)>,
    ) {
        if i == sims.len() {
            let mut key: Vec<(f64, i64, i64)> = assign
                .iter()
                .enumerate()
                .map(|(t, &c)| (sims[t][c], -(t_rank[t] as i64), -(c_rank[c] as i64)))
                .collect();
            key.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let better = match best {
                None => true,
                Some((k, _)) => key.partial_cmp(k) == Some(std::cmp::Ordering::Greater),
            };
            if better {
                *best = Some((key, assign.clone()));
            }
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                assign[i] = c;
                rec(i + 1, sims, t_rank, c_rank, assign, used, best);
                used[c] = false;
            }
        }
    }
    rec(0, sims, t_rank, c_rank, &mut assign, &mut used, &mut best);
    best.expect("at least one assignment").1
}
