//! Per-method calibration results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{LearnedModel, Normalizer};

/// Number of method-2 calibration points measured along x (points 1..=12).
pub const BORDER_X_POINTS: usize = 12;
/// Number of method-2 calibration points measured along y (points 13..=23).
pub const BORDER_Y_POINTS: usize = 11;

/// Centering offsets and per-direction scale factors. The negative-side
/// factors keep the sign they were computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Method1Profile {
    pub dx00: f64,
    pub dy00: f64,
    pub sx_pos: f64,
    pub sx_neg: f64,
    pub sy_pos: f64,
    pub sy_neg: f64,
}

/// Centered displacement of every border calibration point, in cm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Method2Profile {
    /// Points 1..=12, x displacement.
    pub border_dx: Vec<f64>,
    /// Points 13..=23, y displacement.
    pub border_dy: Vec<f64>,
    pub dx00: f64,
    pub dy00: f64,
}

impl Method2Profile {
    /// Calibrated bound for a point id in `1..=23`; x for 1..=12, y otherwise.
    pub fn bound(&self, point: u8) -> f64 {
        let p = point as usize;
        if p <= BORDER_X_POINTS {
            self.border_dx[p - 1]
        } else {
            self.border_dy[p - BORDER_X_POINTS - 1]
        }
    }
}

/// Trained classifier plus everything needed to featurize a raw sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedProfile {
    /// 0-based indices into the five features, in model input order.
    pub feature_subset: Vec<usize>,
    pub normalizer: Normalizer,
    pub model: LearnedModel,
    pub reference_face_cx: f64,
    pub reference_face_cy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationProfile {
    Method1(Method1Profile),
    Method2(Method2Profile),
    Learned(LearnedProfile),
}

impl CalibrationProfile {
    pub fn kind(&self) -> &'static str {
        match self {
            CalibrationProfile::Method1(_) => "method1",
            CalibrationProfile::Method2(_) => "method2",
            CalibrationProfile::Learned(p) => match p.model {
                LearnedModel::Mlp(_) => "mlp",
                LearnedModel::Svm(_) => "svm",
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CalibrationProfile::Method1(p) => {
                let all = [p.dx00, p.dy00, p.sx_pos, p.sx_neg, p.sy_pos, p.sy_neg];
                if all.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("method-1 profile has non-finite values"));
                }
            }
            CalibrationProfile::Method2(p) => {
                if p.border_dx.len() != BORDER_X_POINTS || p.border_dy.len() != BORDER_Y_POINTS {
                    return Err(Error::invalid(format!(
                        "method-2 profile needs {BORDER_X_POINTS} x and {BORDER_Y_POINTS} y displacements, found {} and {}",
                        p.border_dx.len(),
                        p.border_dy.len()
                    )));
                }
            }
            CalibrationProfile::Learned(p) => {
                if p.normalizer.scale.iter().any(|s| !(*s > 0.0)) {
                    return Err(Error::invalid("normalizer scales must be strictly positive"));
                }
                if p.normalizer.mean.len() != p.feature_subset.len() {
                    return Err(Error::invalid("normalizer width does not match feature subset"));
                }
                if p.feature_subset.iter().any(|&i| i >= crate::features::FEATURE_COUNT) {
                    return Err(Error::invalid("feature index out of range"));
                }
                if p.model.input_dim() != p.feature_subset.len() {
                    return Err(Error::invalid("model input width does not match feature subset"));
                }
            }
        }
        Ok(())
    }
}
