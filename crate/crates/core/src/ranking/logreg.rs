//! L2-regularized logistic regression over the five ranking features.
//!
//! Features are standardized with the training-set mean and standard
//! deviation, and the objective
//!
//! ```text
//! mean_i [ softplus(z_i) - y_i * z_i ] + lambda * |w|^2,   z_i = w . x_i + b
//! ```
//!
//! is minimized by full-batch gradient descent with an Armijo backtracking
//! line search. The bias is not penalized.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

pub const FEATURES: usize = 5;
const PARAMS: usize = FEATURES + 1;
const MODEL_HEADER: &str = "lr-model v1";

/// `(in_hypernyms, in_synonyms, in_definition, avg_cos_to_wiki_hypernyms, weighted score)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURES]);

impl FeatureVector {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training data needs at least one positive and one negative example")]
    SingleClass,
    #[error("example {0} has a non-finite feature")]
    NonFiniteFeature(usize),
    #[error("loss became non-finite at iteration {0}")]
    NonFiniteLoss(usize),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid model parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainOptions {
    pub l2_lambda: f64,
    pub max_iters: usize,
    /// Stop once the gradient's infinity norm falls below this.
    pub tol: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { l2_lambda: 1e-3, max_iters: 1000, tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each accepted step, starting with the initial point.
    pub loss_history: Vec<f64>,
    pub final_loss: f64,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LrModel {
    weights: [f64; FEATURES],
    bias: f64,
    l2_lambda: f64,
    mean: [f64; FEATURES],
    sd: [f64; FEATURES],
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

// log(1 + e^z) without overflow
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(w: &[f64], x: &[f64; FEATURES]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Regularized mean log-loss over already standardized examples.
///
/// Parameters are laid out as the five weights followed by the bias.
#[derive(Clone, Debug)]
pub struct Objective {
    rows: Vec<[f64; FEATURES]>,
    labels: Vec<f64>,
    l2_lambda: f64,
}

impl Objective {
    pub fn new(rows: Vec<[f64; FEATURES]>, labels: Vec<bool>, l2_lambda: f64) -> Self {
        assert_eq!(rows.len(), labels.len());
        let labels = labels.into_iter().map(|y| if y { 1.0 } else { 0.0 }).collect();
        Objective { rows, labels, l2_lambda }
    }

    fn penalty(&self, params: &[f64; PARAMS]) -> f64 {
        self.l2_lambda * params[..FEATURES].iter().map(|w| w * w).sum::<f64>()
    }

    /// Mean log-loss without the penalty term.
    pub fn data_loss(&self, params: &[f64; PARAMS]) -> f64 {
        let (w, b) = params.split_at(FEATURES);
        let total: f64 = self
            .rows
            .iter()
            .zip(&self.labels)
            .map(|(x, y)| {
                let z = dot(w, x) + b[0];
                softplus(z) - y * z
            })
            .sum();
        total / self.rows.len() as f64
    }

    pub fn loss(&self, params: &[f64; PARAMS]) -> f64 {
        self.data_loss(params) + self.penalty(params)
    }

    pub fn gradient(&self, params: &[f64; PARAMS]) -> [f64; PARAMS] {
        let (w, b) = params.split_at(FEATURES);
        let mut grad = [0.0; PARAMS];
        for (x, y) in self.rows.iter().zip(&self.labels) {
            let residual = sigmoid(dot(w, x) + b[0]) - y;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += residual * xi;
            }
            grad[FEATURES] += residual;
        }
        let n = self.rows.len() as f64;
        for (j, g) in grad.iter_mut().enumerate() {
            *g /= n;
            if j < FEATURES {
                *g += 2.0 * self.l2_lambda * params[j];
            }
        }
        grad
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Fits a model to labeled feature vectors (`true` = positive).
pub fn train_lr(
    examples: &[(FeatureVector, bool)],
    options: &TrainOptions,
) -> Result<(LrModel, TrainReport), TrainError> {
    if !(options.l2_lambda >= 0.0 && options.l2_lambda.is_finite()) {
        return Err(TrainError::InvalidOption(format!("l2_lambda = {}", options.l2_lambda)));
    }
    if let Some(i) = examples.iter().position(|(f, _)| !f.is_finite()) {
        return Err(TrainError::NonFiniteFeature(i));
    }
    let positives = examples.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == examples.len() {
        return Err(TrainError::SingleClass);
    }

    let n = examples.len() as f64;
    let mut mean = [0.0; FEATURES];
    for (f, _) in examples {
        for (m, v) in mean.iter_mut().zip(&f.0) {
            *m += v / n;
        }
    }
    let mut sd = [0.0; FEATURES];
    for (f, _) in examples {
        for j in 0..FEATURES {
            sd[j] += (f.0[j] - mean[j]).powi(2) / n;
        }
    }
    for s in &mut sd {
        *s = s.sqrt();
        // constant feature: standardizes to 0, so its weight never leaves 0
        if s.is_nan() || *s <= 1e-12 {
            *s = 1.0;
        }
    }

    let rows = examples.iter().map(|(f, _)| std::array::from_fn(|j| (f.0[j] - mean[j]) / sd[j])).collect();
    let labels = examples.iter().map(|(_, y)| *y).collect();
    let objective = Objective::new(rows, labels, options.l2_lambda);

    let mut params = [0.0; PARAMS];
    let mut loss = objective.loss(&params);
    let mut grad = objective.gradient(&params);
    let mut history = vec![loss];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) < options.tol;

    while !converged && iterations < options.max_iters {
        iterations += 1;
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        let mut accepted = None;
        while step > 1e-30 {
            let trial: [f64; PARAMS] = std::array::from_fn(|j| params[j] - step * grad[j]);
            let trial_loss = objective.loss(&trial);
            if trial_loss.is_nan() {
                return Err(TrainError::NonFiniteLoss(iterations));
            }
            if trial_loss <= loss - 1e-4 * step * grad_sq {
                accepted = Some((trial, trial_loss));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, trial_loss)) = accepted else {
            // no decrease representable at this precision
            break;
        };
        params = trial;
        loss = trial_loss;
        grad = objective.gradient(&params);
        history.push(loss);
        step = (step * 2.0).min(1e6);
        converged = inf_norm(&grad) < options.tol;
    }
    if !loss.is_finite() {
        return Err(TrainError::NonFiniteLoss(iterations));
    }

    let mut weights = [0.0; FEATURES];
    weights.copy_from_slice(&params[..FEATURES]);
    let model = LrModel { weights, bias: params[FEATURES], l2_lambda: options.l2_lambda, mean, sd };
    let report =
        TrainReport { iterations, converged, loss_history: history, final_loss: loss, gradient_norm: inf_norm(&grad) };
    Ok((model, report))
}

impl LrModel {
    pub fn from_parts(
        weights: [f64; FEATURES],
        bias: f64,
        l2_lambda: f64,
        mean: [f64; FEATURES],
        sd: [f64; FEATURES],
    ) -> Result<Self, ModelError> {
        let all_finite = weights.iter().chain(&mean).chain(&sd).chain([&bias, &l2_lambda]).all(|v| v.is_finite());
        if !all_finite {
            return Err(ModelError::Invalid("non-finite parameter".into()));
        }
        if l2_lambda < 0.0 {
            return Err(ModelError::Invalid("negative l2_lambda".into()));
        }
        if sd.iter().any(|s| *s <= 0.0) {
            return Err(ModelError::Invalid("standard deviations must be positive".into()));
        }
        Ok(LrModel { weights, bias, l2_lambda, mean, sd })
    }

    pub fn weights(&self) -> &[f64; FEATURES] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn l2_lambda(&self) -> f64 {
        self.l2_lambda
    }

    pub fn mean(&self) -> &[f64; FEATURES] {
        &self.mean
    }

    pub fn sd(&self) -> &[f64; FEATURES] {
        &self.sd
    }

    pub fn logit(&self, f: &FeatureVector) -> f64 {
        let x: [f64; FEATURES] = std::array::from_fn(|j| (f.0[j] - self.mean[j]) / self.sd[j]);
        dot(&self.weights, &x) + self.bias
    }

    /// Probability of the positive class, kept strictly inside (0, 1).
    pub fn predict(&self, f: &FeatureVector) -> f64 {
        sigmoid(self.logit(f)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    }

    pub fn to_text(&self) -> String {
        let join = |vals: &[f64]| vals.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let mut params = self.weights.to_vec();
        params.push(self.bias);
        writeln!(out, "{MODEL_HEADER}").unwrap();
        writeln!(out, "{:?}", self.l2_lambda).unwrap();
        writeln!(out, "{}", join(&params)).unwrap();
        writeln!(out, "{}", join(&self.mean)).unwrap();
        writeln!(out, "{}", join(&self.sd)).unwrap();
        out
    }

    pub fn write(&self, mut out: impl Write) -> io::Result<()> {
        out.write_all(self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_reader(BufReader::new(File::open(path.as_ref())?))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self, ModelError> {
        let mut lines = Vec::with_capacity(5);
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| match e.kind() {
                io::ErrorKind::InvalidData => ModelError::Malformed { line: i + 1, message: "invalid UTF-8".into() },
                _ => ModelError::Io(e),
            })?;
            if i >= 5 {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(ModelError::Malformed { line: i + 1, message: "unexpected trailing content".into() });
            }
            lines.push(line);
        }
        if lines.len() < 5 {
            return Err(ModelError::Malformed { line: lines.len() + 1, message: "truncated model file".into() });
        }
        if lines[0].trim() != MODEL_HEADER {
            return Err(ModelError::Malformed { line: 1, message: format!("expected {MODEL_HEADER:?}") });
        }
        let numbers = |idx: usize, expected: usize| -> Result<Vec<f64>, ModelError> {
            let vals: Vec<f64> = lines[idx]
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ModelError::Malformed { line: idx + 1, message: e.to_string() })?;
            if vals.len() != expected {
                return Err(ModelError::Malformed {
                    line: idx + 1,
                    message: format!("expected {expected} numbers, found {}", vals.len()),
                });
            }
            Ok(vals)
        };
        let l2 = numbers(1, 1)?[0];
        let params = numbers(2, PARAMS)?;
        let mean = numbers(3, FEATURES)?;
        let sd = numbers(4, FEATURES)?;
        Self::from_parts(
            std::array::from_fn(|j| params[j]),
            params[FEATURES],
            l2,
            std::array::from_fn(|j| mean[j]),
            std::array::from_fn(|j| sd[j]),
        )
    }
}
