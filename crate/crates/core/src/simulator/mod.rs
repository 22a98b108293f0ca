//! Seeded synthetic driver: head-movement personas, sensor models, region
//! schedules and the traces they produce.

mod schedule;
mod session;

pub use schedule::{generate_schedule, RegionSchedule, ScheduleConfig};
pub use session::{head_trajectory_step, sensor_observe, synthesize_calibration, synthesize_session, CalibrationProtocol};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SceneGeometry;

/// Time constant of the in-fixation head wander, ms.
pub const JITTER_TAU_MS: f64 = 250.0;

/// How much of a gaze shift a driver executes with the head.
///
/// The head's share of a shift of `theta` degrees is
/// `gain * |theta| / (|theta| + eye_range_deg)`: small shifts are mostly made
/// with the eyes, large ones approach `gain`. On top of that the head pitches
/// by `pitch_coupling * |yaw|` while turned sideways. With both extras at
/// zero this is the plain linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Persona {
    pub name: String,
    pub head_gain_x: f64,
    pub head_gain_y: f64,
    pub transit_tau_ms: f64,
    pub fixation_jitter_deg: f64,
    #[serde(default)]
    pub eye_range_deg: f64,
    #[serde(default)]
    pub pitch_coupling: f64,
}

impl Persona {
    pub fn validate(&self) -> Result<()> {
        let gain_ok = |g: f64| g > 0.0 && g <= 1.0;
        if !gain_ok(self.head_gain_x) || !gain_ok(self.head_gain_y) {
            return Err(Error::invalid(format!("persona {}: head gains must be in (0, 1]", self.name)));
        }
        if !(self.transit_tau_ms > 0.0 && self.transit_tau_ms.is_finite()) {
            return Err(Error::invalid(format!("persona {}: transit tau must be positive", self.name)));
        }
        if !(self.fixation_jitter_deg >= 0.0) || !(self.eye_range_deg >= 0.0) || !self.pitch_coupling.is_finite() {
            return Err(Error::invalid(format!("persona {}: jitter and eye range must be non-negative, coupling finite", self.name)));
        }
        Ok(())
    }

    /// Effective head gain for a gaze angle on one axis.
    pub fn effective_gain(gain: f64, eye_range_deg: f64, theta_deg: f64) -> f64 {
        if eye_range_deg == 0.0 {
            return gain;
        }
        let a = theta_deg.abs();
        gain * a / (a + eye_range_deg)
    }

    /// Steady-state head angles for a gaze target, jitter aside.
    pub fn head_target(&self, yaw_deg: f64, pitch_deg: f64) -> (f64, f64) {
        let yaw = Self::effective_gain(self.head_gain_x, self.eye_range_deg, yaw_deg) * yaw_deg;
        let pitch = Self::effective_gain(self.head_gain_y, self.eye_range_deg, pitch_deg) * pitch_deg;
        (yaw, pitch + self.pitch_coupling * yaw.abs())
    }

    /// Unit gain, fast, motionless fixations. Useful as a reference driver.
    pub fn ideal() -> Self {
        Self {
            name: "ideal".into(),
            head_gain_x: 1.0,
            head_gain_y: 1.0,
            transit_tau_ms: 20.0,
            fixation_jitter_deg: 0.0,
            eye_range_deg: 0.0,
            pitch_coupling: 0.0,
        }
    }

    pub fn presets() -> Vec<Persona> {
        let p = |name: &str, gain: f64, tau: f64, jitter: f64, eye: f64| Persona {
            name: name.into(),
            head_gain_x: gain,
            head_gain_y: gain,
            transit_tau_ms: tau,
            fixation_jitter_deg: jitter,
            eye_range_deg: eye,
            pitch_coupling: -0.26,
        };
        vec![
            p("large", 0.95, 120.0, 0.8, 0.0),
            p("average", 0.80, 150.0, 0.8, 2.0),
            p("small", 0.50, 200.0, 0.8, 4.0),
        ]
    }
}

/// Face-rectangle synthesis parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceProxy {
    pub px_per_cm: f64,
    pub camera_center_px: [f64; 2],
    pub base_area_px2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub name: String,
    pub frame_rate_hz: f64,
    pub yaw_noise_std_deg: f64,
    pub pitch_noise_std_deg: f64,
    pub face_proxy: FaceProxy,
    /// Overrides the scene distance for this device's angular geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_distance_cm: Option<f64>,
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_rate_hz > 0.0 && self.frame_rate_hz.is_finite()) {
            return Err(Error::invalid(format!("sensor {}: frame rate must be positive", self.name)));
        }
        if !(self.yaw_noise_std_deg >= 0.0) || !(self.pitch_noise_std_deg >= 0.0) {
            return Err(Error::invalid(format!("sensor {}: noise std must be non-negative", self.name)));
        }
        if let Some(d) = self.view_distance_cm {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid(format!("sensor {}: view distance must be positive", self.name)));
            }
        }
        Ok(())
    }

    /// Scene geometry as experienced through this device.
    pub fn effective_geometry(&self, geometry: &SceneGeometry) -> SceneGeometry {
        match self.view_distance_cm {
            Some(d) => geometry.with_distance(d),
            None => geometry.clone(),
        }
    }

    pub fn frame_period_ms(&self) -> f64 {
        1000.0 / self.frame_rate_hz
    }

    pub fn noiseless(name: &str, frame_rate_hz: f64) -> Self {
        Self {
            name: name.into(),
            frame_rate_hz,
            yaw_noise_std_deg: 0.0,
            pitch_noise_std_deg: 0.0,
            face_proxy: FaceProxy { px_per_cm: 1.0, camera_center_px: [320.0, 240.0], base_area_px2: 14400.0 },
            view_distance_cm: None,
        }
    }

    pub fn presets() -> Vec<SensorModel> {
        vec![
            SensorModel {
                name: "depthcam".into(),
                frame_rate_hz: 30.0,
                yaw_noise_std_deg: 1.5,
                pitch_noise_std_deg: 1.5,
                face_proxy: FaceProxy { px_per_cm: 1.0, camera_center_px: [320.0, 240.0], base_area_px2: 14400.0 },
                view_distance_cm: None,
            },
            SensorModel {
                name: "hmd".into(),
                frame_rate_hz: 60.0,
                yaw_noise_std_deg: 0.25,
                pitch_noise_std_deg: 0.25,
                face_proxy: FaceProxy { px_per_cm: 1.0, camera_center_px: [320.0, 240.0], base_area_px2: 14400.0 },
                view_distance_cm: Some(109.0),
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for p in Persona::presets() {
            p.validate().unwrap();
        }
        for s in SensorModel::presets() {
            s.validate().unwrap();
        }
        Persona::ideal().validate().unwrap();
    }

    #[test]
    fn rejects_bad_persona() {
        let mut p = Persona::ideal();
        p.head_gain_x = 1.5;
        assert!(p.validate().is_err());
        let mut p = Persona::ideal();
        p.transit_tau_ms = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn linear_without_extras() {
        let mut p = Persona::ideal();
        p.head_gain_x = 0.8;
        p.head_gain_y = 0.8;
        assert_eq!(p.head_target(30.0, -10.0), (0.8 * 30.0, 0.8 * -10.0));
    }

    #[test]
    fn small_shifts_use_less_head() {
        let p = &Persona::presets()[2];
        let g = |t: f64| p.head_target(t, 0.0).0 / t;
        assert!(g(5.0) < g(20.0) && g(20.0) < p.head_gain_x);
        assert_eq!(p.head_target(-12.0, 0.0).0, -p.head_target(12.0, 0.0).0);
    }

    #[test]
    fn turning_dips_the_head() {
        let mut p = Persona::ideal();
        p.pitch_coupling = -0.25;
        assert_eq!(p.head_target(20.0, 5.0), (20.0, 0.0));
        assert_eq!(p.head_target(-20.0, 5.0), (-20.0, 0.0));
        assert_eq!(p.head_target(0.0, 5.0), (0.0, 5.0));
    }

    #[test]
    fn hmd_geometry_is_wider() {
        let g = SceneGeometry::default();
        let [cam, hmd] = &SensorModel::presets()[..] else { panic!() };
        let (a, _) = cam.effective_geometry(&g).gaze_angles(crate::region::NormPoint::new(0.4, 0.0));
        let (b, _) = hmd.effective_geometry(&g).gaze_angles(crate::region::NormPoint::new(0.4, 0.0));
        assert!(b > 1.5 * a);
    }
}
