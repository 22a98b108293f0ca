use std::fmt;

use crate::error::{Error, Result};
use crate::features::{extract_features, CentralReference};
use crate::geometry::SceneGeometry;
use crate::learners::LearnedModel;
use crate::profile::{CalibrationProfile, LearnedProfile, Method1Profile, Method2Profile};
use crate::projection::{method1_estimate, method2_estimate, AdaptedRuleTable, ScalingMode};
use crate::region::Region;
use crate::sample::HeadPoseSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Method1,
    Method2,
    Mlp,
    Svm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Method1, Method::Method2, Method::Mlp, Method::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Method1 => "method1",
            Method::Method2 => "method2",
            Method::Mlp => "mlp",
            Method::Svm => "svm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}' (method1, method2, mlp, svm)")))
    }
}

/// Anything that maps a head-pose sample to a region.
pub trait RegionEstimator {
    fn method_id(&self) -> String;
    fn estimate(&self, sample: &HeadPoseSample) -> Result<Region>;
}

/// A calibrated estimator for one of the four methods.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Method1 { profile: Method1Profile, mode: ScalingMode, geometry: SceneGeometry },
    Method2 { profile: Method2Profile, table: AdaptedRuleTable, geometry: SceneGeometry },
    Learned(LearnedProfile),
}

impl Estimator {
    /// Bind a profile to the requested method; the profile must have been
    /// produced by that method's calibration.
    pub fn new(
        method: Method,
        profile: &CalibrationProfile,
        geometry: &SceneGeometry,
        table: &AdaptedRuleTable,
        mode: ScalingMode,
    ) -> Result<Self> {
        profile.validate()?;
        if profile.kind() != method.as_str() {
            return Err(Error::Mismatch(format!("{method} requested but profile is {}", profile.kind())));
        }
        Ok(match profile {
            CalibrationProfile::Method1(p) => Estimator::Method1 { profile: *p, mode, geometry: geometry.clone() },
            CalibrationProfile::Method2(p) => {
                Estimator::Method2 { profile: p.clone(), table: table.clone(), geometry: geometry.clone() }
            }
            CalibrationProfile::Learned(p) => Estimator::Learned(p.clone()),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Estimator::Method1 { .. } => Method::Method1,
            Estimator::Method2 { .. } => Method::Method2,
            Estimator::Learned(p) => match p.model {
                LearnedModel::Mlp(_) => Method::Mlp,
                LearnedModel::Svm(_) => Method::Svm,
            },
        }
    }
}

/// Feature vector exactly as the learned model sees it.
pub fn learned_input(profile: &LearnedProfile, sample: &HeadPoseSample) -> Result<Vec<f64>> {
    let reference = CentralReference { face_cx: profile.reference_face_cx, face_cy: profile.reference_face_cy };
    let v = extract_features(sample, Some(reference))?;
    Ok(profile.normalizer.apply(&v.select(&profile.feature_subset)))
}

impl RegionEstimator for Estimator {
    fn method_id(&self) -> String {
        self.method().to_string()
    }

    fn estimate(&self, sample: &HeadPoseSample) -> Result<Region> {
        match self {
            Estimator::Method1 { profile, mode, geometry } => method1_estimate(sample, profile, geometry, *mode),
            Estimator::Method2 { profile, table, geometry } => method2_estimate(sample, profile, table, geometry),
            Estimator::Learned(p) => Ok(p.model.predict(&learned_input(p, sample)?)),
        }
    }
}
