//! Learned estimators: an ensemble of seven one-vs-rest MLPs and a
//! one-vs-one linear SVM, plus training-set construction.

mod mlp;
mod normalize;
mod svm;
mod training;

pub use mlp::{BinaryMlp, MlpModel, SymmetricSigmoid};
pub use normalize::Normalizer;
pub use svm::{train_binary_svm, BinarySvm, PairSvm, SvmModel};
pub use training::{build_training_set, central_reference, TrainingSet, PATTERNS_PER_REGION, PATTERN_RATE_HZ};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, LabeledSet};
use crate::region::Region;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub max_iters: usize,
    pub epsilon: f64,
    /// Learning rate.
    pub gradient_strength: f64,
    /// Momentum coefficient.
    pub weight_momentum: f64,
    pub hidden: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            epsilon: 0.001,
            gradient_strength: 0.1,
            weight_momentum: 0.1,
            hidden: 14,
            alpha: 2.0 / 3.0,
            beta: 1.7159,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub max_iters: usize,
    pub epsilon: f64,
    /// Box constraint on the dual coefficients.
    pub c: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { max_iters: 100_000, epsilon: 0.001, c: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub mlp: MlpConfig,
    pub svm: SvmConfig,
    pub rng_seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let m = &self.mlp;
        let s = &self.svm;
        let positive = [m.epsilon, m.gradient_strength, m.weight_momentum, m.alpha, m.beta, s.epsilon, s.c];
        if m.max_iters == 0 || s.max_iters == 0 || m.hidden == 0 || positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("training parameters must all be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnedModel {
    Mlp(MlpModel),
    Svm(SvmModel),
}

impl LearnedModel {
    pub fn input_dim(&self) -> usize {
        match self {
            LearnedModel::Mlp(m) => m.input_dim,
            LearnedModel::Svm(m) => m.input_dim,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Region {
        match self {
            LearnedModel::Mlp(m) => m.predict(x),
            LearnedModel::Svm(m) => m.predict(x),
        }
    }
}

/// Standardized (or raw) design matrix over a feature subset.
pub(crate) fn design(set: &LabeledSet, subset: &[usize], norm: &Normalizer) -> (Vec<Vec<f64>>, Vec<Region>) {
    set.patterns
        .iter()
        .map(|(v, r)| (norm.apply(&v.select(subset)), *r))
        .unzip()
}

/// Subset + normalization helper shared by training and prediction.
pub fn prepare(v: &FeatureVector, subset: &[usize], norm: &Normalizer) -> Vec<f64> {
    norm.apply(&v.select(subset))
}

/// Train the MLP ensemble on a training set restricted to `subset`.
pub fn mlp_train(set: &TrainingSet, subset: &[usize], standardize: bool, cfg: &TrainConfig) -> Result<(MlpModel, Normalizer)> {
    let norm = set.normalizer_for(subset, standardize);
    let (xs, ys) = design(&set.patterns, subset, &norm);
    let model = MlpModel::train(&xs, &ys, &cfg.mlp, cfg.rng_seed)?;
    Ok((model, norm))
}

/// Train the pairwise SVM on a training set restricted to `subset`.
pub fn svm_train(set: &TrainingSet, subset: &[usize], standardize: bool, cfg: &TrainConfig) -> Result<(SvmModel, Normalizer)> {
    let norm = set.normalizer_for(subset, standardize);
    let (xs, ys) = design(&set.patterns, subset, &norm);
    let model = SvmModel::train(&xs, &ys, &cfg.svm)?;
    Ok((model, norm))
}
