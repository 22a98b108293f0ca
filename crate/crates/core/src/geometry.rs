use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{NormPoint, Region, RegionLayout};

/// Physical screen, viewing distance and region partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneGeometry {
    pub screen_w_cm: f64,
    pub screen_h_cm: f64,
    pub distance_cm: f64,
    #[serde(default)]
    pub layout: RegionLayout,
}

impl Default for SceneGeometry {
    /// 260 x 195 cm screen viewed from 250 cm.
    fn default() -> Self {
        Self {
            screen_w_cm: 260.0,
            screen_h_cm: 195.0,
            distance_cm: 250.0,
            layout: RegionLayout::standard(),
        }
    }
}

impl SceneGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("screen width", self.screen_w_cm),
            ("screen height", self.screen_h_cm),
            ("distance", self.distance_cm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        self.layout.validate()
    }

    pub fn with_distance(&self, distance_cm: f64) -> Self {
        Self { distance_cm, ..self.clone() }
    }

    /// Normalized screen position -> gaze angles (yaw, pitch) in degrees.
    pub fn gaze_angles(&self, p: NormPoint) -> (f64, f64) {
        let yaw = (p.x * self.screen_w_cm / self.distance_cm).atan().to_degrees();
        let pitch = (p.y * self.screen_h_cm / self.distance_cm).atan().to_degrees();
        (yaw, pitch)
    }

    /// Gaze angles of a region's fixation target.
    pub fn region_target(&self, region: Region) -> (f64, f64) {
        self.gaze_angles(self.layout.center(region))
    }
}
