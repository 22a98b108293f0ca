//! Five-feature extraction and the J5 class-separability criterion.
//!
//! `J5 = tr(Sw^-1 * Sb)` where `Sw` is the unweighted mean of the per-class
//! covariance matrices and `Sb` is the covariance of the class means around
//! their own mean. Covariances use the population (1/N) convention.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Region;
use crate::sample::HeadPoseSample;

pub const FEATURE_COUNT: usize = 5;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["yaw", "pitch", "face_dx", "face_dy", "face_area"];

/// yaw, pitch, face-center dx, face-center dy (relative to the central-gaze
/// reference, px), face area (px^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn select(&self, subset: &[usize]) -> Vec<f64> {
        subset.iter().map(|&i| self.0[i]).collect()
    }
}

/// Face-rectangle center recorded while the driver looked at the screen center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralReference {
    pub face_cx: f64,
    pub face_cy: f64,
}

pub fn extract_features(sample: &HeadPoseSample, central_ref: Option<CentralReference>) -> Result<FeatureVector> {
    let r = central_ref.ok_or_else(|| Error::invalid("central face reference has not been captured"))?;
    Ok(FeatureVector([
        sample.yaw_deg,
        sample.pitch_deg,
        sample.face_cx_px - r.face_cx,
        sample.face_cy_px - r.face_cy,
        sample.face_area_px2,
    ]))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledSet {
    pub patterns: Vec<(FeatureVector, Region)>,
}

impl LabeledSet {
    pub fn new(patterns: Vec<(FeatureVector, Region)>) -> Self {
        Self { patterns }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    fn classes(&self) -> BTreeMap<Region, Vec<&FeatureVector>> {
        let mut out: BTreeMap<Region, Vec<&FeatureVector>> = BTreeMap::new();
        for (v, r) in &self.patterns {
            out.entry(*r).or_default().push(v);
        }
        out
    }
}

fn check_subset(subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::invalid("feature subset is empty"));
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= FEATURE_COUNT) {
        return Err(Error::invalid(format!("feature index {i} out of range")));
    }
    Ok(())
}

/// Within-class (`Sw`) and between-class (`Sb`) scatter over a feature subset.
pub fn scatter_matrices(set: &LabeledSet, subset: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_subset(subset)?;
    let classes = set.classes();
    if classes.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 classes, found {}", classes.len())));
    }
    let dim = subset.len();
    let mut sw = DMatrix::<f64>::zeros(dim, dim);
    let mut means = Vec::with_capacity(classes.len());
    for (region, members) in &classes {
        if members.len() < 2 {
            return Err(Error::invalid(format!(
                "class {region} has {} pattern(s), need at least 2",
                members.len()
            )));
        }
        let n = members.len() as f64;
        let mut mean = vec![0.0; dim];
        for v in members {
            for (k, &f) in subset.iter().enumerate() {
                mean[k] += v.0[f];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for v in members {
            let c: Vec<f64> = subset.iter().enumerate().map(|(k, &f)| v.0[f] - mean[k]).collect();
            for a in 0..dim {
                for b in 0..dim {
                    cov[(a, b)] += c[a] * c[b];
                }
            }
        }
        sw += cov / n;
        means.push(mean);
    }
    let k = means.len() as f64;
    sw /= k;
    let mut grand = vec![0.0; dim];
    for m in &means {
        for a in 0..dim {
            grand[a] += m[a] / k;
        }
    }
    let mut sb = DMatrix::<f64>::zeros(dim, dim);
    for m in &means {
        for a in 0..dim {
            for b in 0..dim {
                sb[(a, b)] += (m[a] - grand[a]) * (m[b] - grand[b]);
            }
        }
    }
    sb /= k;
    Ok((sw, sb))
}

/// `tr(Sw^-1 * Sb)`. A singular `Sw` gets a ridge of `1e-9 * tr(Sw) / dim`.
pub fn j5_from_scatter(sw: &DMatrix<f64>, sb: &DMatrix<f64>) -> Result<f64> {
    let dim = sw.nrows();
    let chol = match sw.clone().cholesky() {
        Some(c) => c,
        None => {
            let lambda = 1e-9 * sw.trace() / dim as f64;
            (sw + DMatrix::<f64>::identity(dim, dim) * lambda)
                .cholesky()
                .ok_or_else(|| Error::invalid("within-class scatter is singular after regularization"))?
        }
    };
    let score = chol.solve(sb).trace();
    if !score.is_finite() {
        return Err(Error::invalid("J5 score is not finite"));
    }
    // round-off can leave a tiny negative trace when Sb is (near) zero
    Ok(score.max(0.0))
}

pub fn j5_score(set: &LabeledSet, subset: &[usize]) -> Result<f64> {
    let (sw, sb) = scatter_matrices(set, subset)?;
    j5_from_scatter(&sw, &sb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    /// Forward selection: each step adds the feature that maximizes J5.
    #[default]
    Greedy,
    /// Features in their natural order; each weight scores the prefix.
    Prefix,
}

impl std::str::FromStr for RankMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(RankMode::Greedy),
            "prefix" => Ok(RankMode::Prefix),
            other => Err(Error::invalid(format!("unknown rank mode '{other}'"))),
        }
    }
}

/// One ranking step: the feature added and the J5 score of everything
/// selected so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankStep {
    pub feature: usize,
    pub cumulative_j5: f64,
}

pub fn rank_features(set: &LabeledSet, candidates: &[usize], mode: RankMode) -> Result<Vec<RankStep>> {
    check_subset(candidates)?;
    let mut selected: Vec<usize> = Vec::with_capacity(candidates.len());
    let mut out = Vec::with_capacity(candidates.len());
    match mode {
        RankMode::Prefix => {
            for &f in candidates {
                selected.push(f);
                out.push(RankStep { feature: f, cumulative_j5: j5_score(set, &selected)? });
            }
        }
        RankMode::Greedy => {
            let mut remaining = candidates.to_vec();
            while !remaining.is_empty() {
                let mut best: Option<(usize, f64)> = None;
                for (pos, &f) in remaining.iter().enumerate() {
                    let mut trial = selected.clone();
                    trial.push(f);
                    let s = j5_score(set, &trial)?;
                    // ties keep the lower position
                    if best.is_none_or(|(_, b)| s > b) {
                        best = Some((pos, s));
                    }
                }
                let (pos, s) = best.expect("non-empty candidates");
                let f = remaining.remove(pos);
                selected.push(f);
                out.push(RankStep { feature: f, cumulative_j5: s });
            }
        }
    }
    Ok(out)
}

/// Greedy ranking over all five features.
pub fn greedy_rank(set: &LabeledSet) -> Result<Vec<RankStep>> {
    rank_features(set, &[0, 1, 2, 3, 4], RankMode::Greedy)
}

/// `1, 2, 3, 4, 5` / `36.44, 68.35, ...` style rendering (1-based indices).
pub fn format_ranking(steps: &[RankStep]) -> String {
    let order: Vec<String> = steps.iter().map(|s| (s.feature + 1).to_string()).collect();
    let weights: Vec<String> = steps.iter().map(|s| format!("{:.2}", s.cumulative_j5)).collect();
    format!("order: {}\nweights: {}\n", order.join(", "), weights.join(", "))
}
