//! Logistic-regression legitimacy classifier and grouped cross-validation.
//!
//! Training is deterministic: weights start at zero and every epoch is one
//! full-batch gradient step on mean binary cross-entropy plus an L2 penalty
//! on the non-bias weights.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{compute_metrics, EvalError, Evaluation};
use crate::features::FeatureVector;
use crate::ingest::{Label, LabeledWarning};
use crate::par::Execution;
use crate::verifier::{Prediction, Provenance, Verdict};

const DIM: usize = FeatureVector::DIM;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training set has a single class ({0})")]
    SingleClass(&'static str),
    #[error("training set is empty")]
    Empty,
    #[error("loss became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("model has {found} weights, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("example {0} is unlabeled")]
    Unlabeled(String),
    #[error("{files} distinct file(s) cannot fill {k} folds")]
    TooFewFiles { files: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    BadFoldCount(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.1,
            l2: 1e-3,
            epochs: 2000,
            seed: 0,
        }
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Weights in [`FeatureVector::to_array`] order, bias last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub hyperparams: Hyperparams,
    pub threshold: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean BCE plus `l2 * ||w[..bias]||^2` and its gradient.
///
/// Each example is a feature row and a target in `{0, 1}` where 1 means
/// legitimate.
pub fn loss_and_gradient(weights: &[f64; DIM], examples: &[([f64; DIM], f64)], l2: f64) -> (f64, [f64; DIM]) {
    let n = examples.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = [0.0; DIM];
    for (x, y) in examples {
        let z: f64 = x.iter().zip(weights).map(|(a, b)| a * b).sum();
        loss += softplus(z) - y * z;
        let d = sigmoid(z) - y;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += d * xi;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for i in 0..DIM - 1 {
        loss += l2 * weights[i] * weights[i];
        grad[i] += 2.0 * l2 * weights[i];
    }
    (loss, grad)
}

fn target(label: Label) -> Option<f64> {
    match label {
        Label::TruePositive => Some(1.0),
        Label::FalsePositive => Some(0.0),
        Label::Unlabeled => None,
    }
}

/// Fits a model on `(features, label)` pairs. Unlabeled pairs are ignored.
pub fn train_logistic(
    examples: &[(FeatureVector, Label)],
    hyperparams: Hyperparams,
) -> Result<LinearModel, ClassifierError> {
    let rows: Vec<([f64; DIM], f64)> = examples
        .iter()
        .filter_map(|(f, l)| target(*l).map(|y| (f.to_array(), y)))
        .collect();
    if rows.is_empty() {
        return Err(ClassifierError::Empty);
    }
    if rows.iter().all(|(_, y)| *y == 1.0) {
        return Err(ClassifierError::SingleClass("TP"));
    }
    if rows.iter().all(|(_, y)| *y == 0.0) {
        return Err(ClassifierError::SingleClass("FP"));
    }
    let mut w = [0.0; DIM];
    for epoch in 0..hyperparams.epochs {
        let (loss, g) = loss_and_gradient(&w, &rows, hyperparams.l2);
        if !loss.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return Err(ClassifierError::Diverged { epoch });
        }
        for (wi, gi) in w.iter_mut().zip(g) {
            *wi -= hyperparams.learning_rate * gi;
        }
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(ClassifierError::Diverged {
            epoch: hyperparams.epochs,
        });
    }
    Ok(LinearModel {
        weights: w.to_vec(),
        hyperparams,
        threshold: DEFAULT_THRESHOLD,
    })
}

/// Probability that the warning is legitimate.
pub fn predict_proba(model: &LinearModel, features: &FeatureVector) -> Result<f64, ClassifierError> {
    if model.weights.len() != DIM {
        return Err(ClassifierError::Dimension {
            expected: DIM,
            found: model.weights.len(),
        });
    }
    let z: f64 = features
        .to_array()
        .iter()
        .zip(&model.weights)
        .map(|(a, b)| a * b)
        .sum();
    Ok(sigmoid(z))
}

impl LinearModel {
    pub fn verdict(&self, warning_id: &str, features: &FeatureVector) -> Result<Verdict, ClassifierError> {
        let p = predict_proba(self, features)?;
        Ok(Verdict {
            warning_id: warning_id.to_string(),
            predicted: if p >= self.threshold {
                Prediction::Legitimate
            } else {
                Prediction::FalsePositive
            },
            score: p,
            provenance: Provenance::ClassifierScore,
        })
    }
}

/// Anything that maps a featurized warning to a legitimacy probability.
pub trait LegitimacyScorer: Send + Sync {
    fn score(&self, features: &FeatureVector) -> Result<f64, ClassifierError>;
}

impl LegitimacyScorer for LinearModel {
    fn score(&self, features: &FeatureVector) -> Result<f64, ClassifierError> {
        predict_proba(self, features)
    }
}

/// Warning id to fold index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub folds: BTreeMap<String, usize>,
    pub file_folds: BTreeMap<String, usize>,
}

impl FoldAssignment {
    /// Number of warnings in each fold.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for f in self.folds.values() {
            sizes[*f] += 1;
        }
        sizes
    }
}

/// Groups warnings by source file so that no file spans two folds.
///
/// Files are shuffled by `seed`, then stably ordered by descending warning
/// count, and each goes to the currently smallest fold (lowest index on
/// ties).
pub fn assign_grouped_folds<'a, I>(items: I, k: usize, seed: u64) -> Result<FoldAssignment, ClassifierError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    if k < 2 {
        return Err(ClassifierError::BadFoldCount(k));
    }
    let items: Vec<(&str, &str)> = items.into_iter().collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, file) in &items {
        *counts.entry(file).or_default() += 1;
    }
    if counts.len() < k {
        return Err(ClassifierError::TooFewFiles { files: counts.len(), k });
    }
    let mut files: Vec<(&str, usize)> = counts.into_iter().collect();
    files.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    files.sort_by_key(|f| std::cmp::Reverse(f.1));

    let mut sizes = vec![0usize; k];
    let mut file_folds = BTreeMap::new();
    for (file, n) in files {
        let fold = (0..k).min_by_key(|&i| (sizes[i], i)).unwrap_or(0);
        sizes[fold] += n;
        file_folds.insert(file.to_string(), fold);
    }
    let folds = items
        .iter()
        .map(|(id, file)| (id.to_string(), file_folds[*file]))
        .collect();
    Ok(FoldAssignment { k, folds, file_folds })
}

#[derive(Debug, Clone)]
pub struct CvExample {
    pub warning: LabeledWarning,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// The training split had one class, so the fold predicts everything
    /// legitimate.
    pub fallback: bool,
    pub model: Option<LinearModel>,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub assignment: FoldAssignment,
    /// Out-of-fold verdicts sorted by warning id.
    pub verdicts: Vec<Verdict>,
    pub evaluation: Evaluation,
    pub folds: Vec<FoldSummary>,
    pub diagnostics: Vec<String>,
}

/// Grouped k-fold cross-validation returning pooled out-of-fold verdicts.
/// Each fold's model keeps warnings whose probability reaches `threshold`.
pub fn cross_validate(
    examples: &[CvExample],
    k: usize,
    hyperparams: Hyperparams,
    threshold: f64,
    exec: Execution,
) -> Result<CvOutcome, ClassifierError> {
    if let Some(e) = examples.iter().find(|e| e.warning.label == Label::Unlabeled) {
        return Err(ClassifierError::Unlabeled(e.warning.warning.id.clone()));
    }
    let assignment = assign_grouped_folds(
        examples
            .iter()
            .map(|e| (e.warning.warning.id.as_str(), e.warning.warning.file.as_str())),
        k,
        hyperparams.seed,
    )?;
    let fold_of = |e: &CvExample| assignment.folds[&e.warning.warning.id];

    let fold_ids: Vec<usize> = (0..k).collect();
    let runs = exec.map(&fold_ids, |&fold| -> Result<(FoldSummary, Vec<Verdict>, Option<String>), ClassifierError> {
        let (test, train): (Vec<&CvExample>, Vec<&CvExample>) =
            examples.iter().partition(|e| fold_of(e) == fold);
        let pairs: Vec<(FeatureVector, Label)> =
            train.iter().map(|e| (e.features, e.warning.label)).collect();
        let (model, note) = match train_logistic(&pairs, hyperparams) {
            Ok(m) => (Some(LinearModel { threshold, ..m }), None),
            Err(err @ (ClassifierError::SingleClass(_) | ClassifierError::Empty)) => (
                None,
                Some(format!("fold {fold}: {err}; predicting all test warnings legitimate")),
            ),
            Err(err) => return Err(err),
        };
        let verdicts = test
            .iter()
            .map(|e| match &model {
                Some(m) => m.verdict(&e.warning.warning.id, &e.features),
                None => Ok(Verdict {
                    warning_id: e.warning.warning.id.clone(),
                    predicted: Prediction::Legitimate,
                    score: 1.0,
                    provenance: Provenance::ClassifierScore,
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labeled: Vec<LabeledWarning> = test.iter().map(|e| e.warning.clone()).collect();
        let evaluation = compute_metrics(&labeled, &verdicts, &[])?;
        let ids = |v: &[&CvExample]| {
            let mut ids: Vec<String> = v.iter().map(|e| e.warning.warning.id.clone()).collect();
            ids.sort();
            ids
        };
        let summary = FoldSummary {
            fold,
            train_ids: ids(&train),
            test_ids: ids(&test),
            fallback: model.is_none(),
            model,
            evaluation,
        };
        Ok((summary, verdicts, note))
    });

    let mut folds = Vec::with_capacity(k);
    let mut verdicts = Vec::with_capacity(examples.len());
    let mut diagnostics = Vec::new();
    for run in runs {
        let (summary, v, note) = run?;
        folds.push(summary);
        verdicts.extend(v);
        diagnostics.extend(note);
    }
    verdicts.sort_by(|a, b| a.warning_id.cmp(&b.warning_id));
    let labeled: Vec<LabeledWarning> = examples.iter().map(|e| e.warning.clone()).collect();
    let evaluation = compute_metrics(&labeled, &verdicts, &[])?;
    Ok(CvOutcome {
        assignment,
        verdicts,
        evaluation,
        folds,
        diagnostics,
    })
}

/// Files present in more than one fold; empty for a valid assignment.
pub fn leaked_files<'a, I>(items: I, assignment: &FoldAssignment) -> BTreeSet<String>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut seen: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (id, file) in items {
        if let Some(f) = assignment.folds.get(id) {
            seen.entry(file).or_default().insert(*f);
        }
    }
    seen.into_iter()
        .filter(|(_, f)| f.len() > 1)
        .map(|(file, _)| file.to_string())
        .collect()
}
