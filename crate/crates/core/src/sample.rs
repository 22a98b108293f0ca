use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Map a raw sensor angle from `[0, 360)` onto the signed range `[-180, 180)`.
///
/// Values at or above 180 are shifted down by a full turn. Inputs that are
/// already signed pass through unchanged, so the function is idempotent on its
/// output range.
pub fn normalize_angle(raw_deg: f64) -> Result<f64> {
    if !raw_deg.is_finite() {
        return Err(Error::invalid(format!("angle {raw_deg} is not finite")));
    }
    Ok(if raw_deg >= 180.0 { raw_deg - 360.0 } else { raw_deg })
}

/// One timestamped sensor frame.
///
/// Angles are signed degrees. Roll is carried for completeness; none of the
/// estimators read it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadPoseSample {
    pub t_ms: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub face_cx_px: f64,
    pub face_cy_px: f64,
    pub face_area_px2: f64,
}

impl HeadPoseSample {
    /// A sample with the face rectangle zeroed; convenient for pose-only work.
    pub fn from_pose(t_ms: f64, yaw_deg: f64, pitch_deg: f64) -> Self {
        Self {
            t_ms,
            yaw_deg,
            pitch_deg,
            roll_deg: 0.0,
            face_cx_px: 0.0,
            face_cy_px: 0.0,
            face_area_px2: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_ms.is_finite() && self.t_ms >= 0.0) {
            return Err(Error::invalid(format!("timestamp {} must be finite and >= 0", self.t_ms)));
        }
        for (name, a) in [("yaw", self.yaw_deg), ("pitch", self.pitch_deg), ("roll", self.roll_deg)] {
            if !(a.is_finite() && (-180.0..180.0).contains(&a)) {
                return Err(Error::invalid(format!("{name} {a} outside [-180, 180)")));
            }
        }
        if !(self.face_cx_px.is_finite() && self.face_cy_px.is_finite()) {
            return Err(Error::invalid("face center is not finite"));
        }
        if !(self.face_area_px2.is_finite() && self.face_area_px2 >= 0.0) {
            return Err(Error::invalid(format!("face area {} must be >= 0", self.face_area_px2)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_angle(350.0).unwrap(), -10.0);
        assert_eq!(normalize_angle(0.0).unwrap(), 0.0);
        assert_eq!(normalize_angle(179.5).unwrap(), 179.5);
        assert_eq!(normalize_angle(180.0).unwrap(), -180.0);
    }

    #[test]
    fn normalize_rejects_non_finite() {
        assert!(normalize_angle(f64::NAN).is_err());
        assert!(normalize_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn sample_validation() {
        let mut s = HeadPoseSample::from_pose(0.0, 10.0, -5.0);
        assert!(s.validate().is_ok());
        s.face_area_px2 = -1.0;
        assert!(s.validate().is_err());
        s.face_area_px2 = 1.0;
        s.yaw_deg = 180.0;
        assert!(s.validate().is_err());
        s.yaw_deg = 0.0;
        s.t_ms = -1.0;
        assert!(s.validate().is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in 0.0f64..360.0) {
            let once = normalize_angle(raw).unwrap();
            prop_assert!((-180.0..180.0).contains(&once));
            prop_assert_eq!(normalize_angle(once).unwrap(), once);
        }
    }
}
