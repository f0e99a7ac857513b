use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{Dimension, Language, TernaryLabel};

pub const N_CLASSES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 penalty on the weight matrix (biases are not penalised).
    pub reg_strength: f64,
    pub max_iter: usize,
    /// Stop once the largest absolute gradient component falls below this.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            reg_strength: 1e-4,
            max_iter: 10_000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub languages: Vec<Language>,
    pub fold: Option<usize>,
    pub seed: u64,
    pub reg_strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

/// Three-class linear model over `dim`-dimensional features.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedConnotationModel {
    pub dimension: Dimension,
    /// Row-major 3 x dim, rows ordered Negative, Neutral, Positive.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub class_weights: [f64; N_CLASSES],
    pub metadata: ModelMetadata,
}

impl TrainedConnotationModel {
    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn scores(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.weights.dot(&x) + &self.bias
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> TernaryLabel {
        TernaryLabel::from_index(argmax(self.scores(x).view())).expect("three classes")
    }

    pub fn predict_f32(&self, x: &[f32]) -> TernaryLabel {
        let v: Array1<f64> = x.iter().map(|&v| f64::from(v)).collect();
        self.predict(v.view())
    }

    pub fn predict_batch(&self, x: ArrayView2<f64>) -> Vec<TernaryLabel> {
        let logits = x.dot(&self.weights.t()) + &self.bias;
        logits
            .axis_iter(Axis(0))
            .map(|row| TernaryLabel::from_index(argmax(row)).expect("three classes"))
            .collect()
    }

    pub fn probabilities(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let s = self.scores(x);
        let max = s.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let e = s.mapv(|v| (v - max).exp());
        let z = e.sum();
        e / z
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Class-weighted multinomial cross-entropy with an L2 penalty.
///
/// Parameters are flattened as the 3 x D weight matrix in row-major order
/// followed by the 3 biases. With per-example weight `w_i` (sample weight
/// times class weight of `y_i`):
///
/// `loss = sum_i w_i * -log softmax(W x_i + b)[y_i] / sum_i w_i + reg / 2 * |W|^2`
pub struct WeightedSoftmaxObjective<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    w: Vec<f64>,
    reg: f64,
}

impl<'a> WeightedSoftmaxObjective<'a> {
    pub fn new(
        x: ArrayView2<'a, f64>,
        y: &'a [usize],
        sample_weights: &[f64],
        class_weights: [f64; N_CLASSES],
        reg: f64,
    ) -> Result<Self> {
        if x.nrows() != y.len() || y.len() != sample_weights.len() {
            return Err(Error::InvalidParameter(
                "features, labels and sample weights differ in length".into(),
            ));
        }
        if class_weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "class weights must be positive, got {class_weights:?}"
            )));
        }
        let raw: Vec<f64> = y
            .iter()
            .zip(sample_weights)
            .map(|(&c, &s)| s * class_weights[c])
            .collect();
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InsufficientData("no weighted training examples".into()));
        }
        let w = raw.iter().map(|v| v / total).collect();
        Ok(WeightedSoftmaxObjective { x, y, w, reg })
    }

    pub fn n_params(&self) -> usize {
        N_CLASSES * (self.x.ncols() + 1)
    }

    fn split<'p>(&self, params: &'p [f64]) -> (ArrayView2<'p, f64>, ArrayView1<'p, f64>) {
        let d = self.x.ncols();
        let w = ArrayView2::from_shape((N_CLASSES, d), &params[..N_CLASSES * d]).expect("shape");
        let b = ArrayView1::from(&params[N_CLASSES * d..]);
        (w, b)
    }

    fn log_probs(&self, params: &[f64]) -> Array2<f64> {
        let (w, b) = self.split(params);
        let mut out = Array2::zeros((self.x.nrows(), N_CLASSES));
        for (xi, mut row) in self.x.outer_iter().zip(out.outer_iter_mut()) {
            let mut z = [0.0; N_CLASSES];
            for c in 0..N_CLASSES {
                z[c] = xi.dot(&w.row(c)) + b[c];
            }
            let max = z.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            for c in 0..N_CLASSES {
                row[c] = z[c] - lse;
            }
        }
        out
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        self.evaluate(params).0
    }

    /// Loss together with the log-probabilities it was computed from.
    fn evaluate(&self, params: &[f64]) -> (f64, Array2<f64>) {
        let lp = self.log_probs(params);
        let data: f64 = self
            .y
            .iter()
            .enumerate()
            .map(|(i, &c)| -self.w[i] * lp[[i, c]])
            .sum();
        let (w, _) = self.split(params);
        (data + 0.5 * self.reg * w.iter().map(|v| v * v).sum::<f64>(), lp)
    }

    /// Gradient at `params`, given that point's log-probabilities.
    fn gradient(&self, params: &[f64], lp: &Array2<f64>) -> Vec<f64> {
        let d = self.x.ncols();
        let (w, _) = self.split(params);
        let mut grad = vec![0.0; N_CLASSES * (d + 1)];
        let (gw, gb) = grad.split_at_mut(N_CLASSES * d);
        for (i, xi) in self.x.outer_iter().enumerate() {
            for c in 0..N_CLASSES {
                // residual w_i * (p_ic - [c == y_i])
                let target = if c == self.y[i] { 1.0 } else { 0.0 };
                let r = self.w[i] * (lp[[i, c]].exp() - target);
                gb[c] += r;
                for (g, x) in gw[c * d..(c + 1) * d].iter_mut().zip(xi.iter()) {
                    *g += r * x;
                }
            }
        }
        for (g, v) in gw.iter_mut().zip(w.iter()) {
            *g += self.reg * v;
        }
        grad
    }

    pub fn loss_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let (loss, lp) = self.evaluate(params);
        (loss, self.gradient(params, &lp))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_loss: f64,
    pub grad_max_norm: f64,
    /// Loss after each accepted step, starting with the initial loss.
    pub loss_history: Vec<f64>,
}

/// Labelled feature matrix used for fitting.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub x: ArrayView2<'a, f64>,
    pub labels: &'a [TernaryLabel],
    /// Per-example multiplier; `None` means 1 for every example.
    pub sample_weights: Option<&'a [f64]>,
}

/// Fits a class-weighted logistic regression by full-batch gradient descent
/// with Armijo backtracking, starting from zero parameters.
///
/// Each iteration first tries the previously accepted step, doubled when
/// that step was accepted without backtracking. Training stops when the gradient max-norm drops below
/// `cfg.tolerance`, when `cfg.max_iter` iterations have run, or when no step
/// size produces a decrease.
pub fn train(
    data: TrainingData<'_>,
    dimension: Dimension,
    class_weights: [f64; N_CLASSES],
    cfg: &TrainConfig,
    metadata: ModelMetadata,
) -> Result<(TrainedConnotationModel, FitReport)> {
    let n = data.labels.len();
    if data.x.nrows() != n {
        return Err(Error::InvalidParameter(format!(
            "{} feature rows for {} labels",
            data.x.nrows(),
            n
        )));
    }
    let y: Vec<usize> = data.labels.iter().map(|l| l.index()).collect();
    for class in TernaryLabel::ALL {
        if !y.contains(&class.index()) {
            return Err(Error::MissingClass(class.to_string()));
        }
    }
    let ones;
    let sample_weights = match data.sample_weights {
        Some(w) => w,
        None => {
            ones = vec![1.0; n];
            &ones
        }
    };
    let objective =
        WeightedSoftmaxObjective::new(data.x, &y, sample_weights, class_weights, cfg.reg_strength)?;

    let mut params = vec![0.0; objective.n_params()];
    let (mut loss, mut grad) = objective.loss_and_gradient(&params);
    let mut history = vec![loss];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    const ARMIJO: f64 = 1e-4;

    while iterations < cfg.max_iter {
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(format!("loss {loss} at iteration {iterations}")));
        }
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < cfg.tolerance {
            converged = true;
            break;
        }
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        let mut trial_step = step;
        let mut accepted = None;
        while trial_step > 1e-20 {
            let candidate: Vec<f64> = params
                .iter()
                .zip(&grad)
                .map(|(p, g)| p - trial_step * g)
                .collect();
            let (cand_loss, lp) = objective.evaluate(&candidate);
            if cand_loss.is_finite() && cand_loss <= loss - ARMIJO * trial_step * gnorm2 {
                accepted = Some((candidate, cand_loss, lp));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((next, next_loss, lp)) = accepted else {
            // No representable step decreases the loss any further.
            break;
        };
        step = if trial_step == step { step * 2.0 } else { trial_step };
        grad = objective.gradient(&next, &lp);
        params = next;
        loss = next_loss;
        history.push(loss);
        iterations += 1;
    }
    if !converged {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        converged = gmax < cfg.tolerance;
    }
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(format!("loss {loss} after training")));
    }

    let d = data.x.ncols();
    let weights = Array2::from_shape_vec((N_CLASSES, d), params[..N_CLASSES * d].to_vec())
        .expect("shape");
    let bias = Array1::from(params[N_CLASSES * d..].to_vec());
    let grad_max_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let model = TrainedConnotationModel {
        dimension,
        weights,
        bias,
        class_weights,
        metadata: ModelMetadata {
            reg_strength: cfg.reg_strength,
            ..metadata
        },
    };
    Ok((
        model,
        FitReport {
            iterations,
            converged,
            final_loss: loss,
            grad_max_norm,
            loss_history: history,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels(v: &[i64]) -> Vec<TernaryLabel> {
        v.iter().map(|&x| TernaryLabel::from_value(x).unwrap()).collect()
    }

    #[test]
    fn separable_clusters_fit_perfectly() {
        let x = array![
            [-2.0, 0.1],
            [-2.2, -0.1],
            [-1.8, 0.0],
            [0.0, 2.0],
            [0.1, 2.1],
            [-0.1, 1.9],
            [2.0, -0.1],
            [2.1, 0.2],
            [1.9, 0.0]
        ];
        let y = labels(&[-1, -1, -1, 0, 0, 0, 1, 1, 1]);
        let (model, report) = train(
            TrainingData {
                x: x.view(),
                labels: &y,
                sample_weights: None,
            },
            Dimension::Power,
            [1.0; 3],
            &TrainConfig::default(),
            ModelMetadata::default(),
        )
        .unwrap();
        assert_eq!(model.predict_batch(x.view()), y);
        assert_eq!(model.param_count(), 9);
        assert!(report.final_loss < report.loss_history[0]);
    }

    #[test]
    fn missing_class_is_named() {
        let x = array![[1.0], [2.0]];
        let y = labels(&[1, 0]);
        let err = train(
            TrainingData {
                x: x.view(),
                labels: &y,
                sample_weights: None,
            },
            Dimension::Power,
            [1.0; 3],
            &TrainConfig::default(),
            ModelMetadata::default(),
        )
        .unwrap_err();
        match err {
            Error::MissingClass(c) => assert_eq!(c, "negative"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_positive_class_weight_rejected() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = labels(&[-1, 0, 1]);
        assert!(train(
            TrainingData {
                x: x.view(),
                labels: &y,
                sample_weights: None,
            },
            Dimension::Power,
            [1.0, 0.0, 1.0],
            &TrainConfig::default(),
            ModelMetadata::default(),
        )
        .is_err());
    }

    #[test]
    fn argmax_ties_go_to_lowest_index() {
        assert_eq!(argmax(array![1.0, 1.0, 0.0].view()), 0);
        assert_eq!(argmax(array![0.0, 2.0, 2.0].view()), 1);
        assert_eq!(argmax(array![0.0, 0.0, 0.0].view()), 0);
    }

    #[test]
    fn zero_model_predicts_negative() {
        let model = TrainedConnotationModel {
            dimension: Dimension::Agency,
            weights: Array2::zeros((3, 2)),
            bias: Array1::zeros(3),
            class_weights: [1.0; 3],
            metadata: ModelMetadata::default(),
        };
        assert_eq!(model.predict_f32(&[1.0, 2.0]), TernaryLabel::Negative);
        let p = model.probabilities(array![1.0, 2.0].view());
        assert!((p.sum() - 1.0).abs() < 1e-12);
    }
}
