use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::SceneGeometry;
use crate::projection::{AdaptedRuleTable, TRANSIT_DISCARD_MS};
use crate::region::{NormPoint, Region};
use crate::sample::{normalize_angle, HeadPoseSample};
use crate::trace::{SessionTrace, TraceMeta};

use super::{Persona, RegionSchedule, SensorModel, JITTER_TAU_MS};

/// Fixation time per calibration point after head transit, ms.
pub const POINT_FIXATION_MS: f64 = 2000.0;
/// Fixation time per region in the learned protocol after head transit, ms.
pub const REGION_FIXATION_MS: f64 = 10_000.0;

const STREAM_NOISE: u64 = 1;
const STREAM_JITTER: u64 = 2;

/// First-order relaxation toward `gain * target`.
pub fn head_trajectory_step(current_deg: f64, target_gaze_deg: f64, gain: f64, tau_ms: f64, dt_ms: f64) -> f64 {
    let goal = gain * target_gaze_deg;
    let k = -(-dt_ms / tau_ms).exp_m1();
    if k >= 1.0 {
        return goal;
    }
    current_deg + (goal - current_deg) * k
}

fn wrap(deg: f64) -> f64 {
    normalize_angle(deg.rem_euclid(360.0)).unwrap_or(deg)
}

/// Add Gaussian noise to the true head angles and derive the face rectangle.
pub fn sensor_observe(
    t_ms: f64,
    true_head: (f64, f64, f64),
    model: &SensorModel,
    distance_cm: f64,
    rng: &mut impl Rng,
) -> HeadPoseSample {
    let (yaw, pitch, roll) = true_head;
    let zy: f64 = rng.sample(StandardNormal);
    let zp: f64 = rng.sample(StandardNormal);
    let zr: f64 = rng.sample(StandardNormal);
    let yaw = yaw + model.yaw_noise_std_deg * zy;
    let pitch = pitch + model.pitch_noise_std_deg * zp;
    let roll = roll + model.yaw_noise_std_deg * zr;
    let f = &model.face_proxy;
    let (yr, pr) = (yaw.to_radians(), pitch.to_radians());
    HeadPoseSample {
        t_ms,
        yaw_deg: wrap(yaw),
        pitch_deg: wrap(pitch),
        roll_deg: wrap(roll),
        face_cx_px: f.camera_center_px[0] + f.px_per_cm * distance_cm * yr.tan(),
        face_cy_px: f.camera_center_px[1] + f.px_per_cm * distance_cm * pr.tan(),
        face_area_px2: (f.base_area_px2 * yr.cos() * pr.cos()).max(0.0),
    }
}

struct Segment {
    target: NormPoint,
    label: Option<Region>,
    dwell_ms: f64,
}

/// Integrate the head model over consecutive fixation segments. Returns the
/// trace (without probes) and the index of the first sample of each segment.
fn integrate(
    segments: &[Segment],
    persona: &Persona,
    sensor: &SensorModel,
    geometry: &SceneGeometry,
    meta: TraceMeta,
    seed: u64,
) -> Result<(SessionTrace, Vec<Option<usize>>)> {
    persona.validate()?;
    sensor.validate()?;
    geometry.validate()?;
    let geom = sensor.effective_geometry(geometry);
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(STREAM_NOISE);
    let mut wander = ChaCha8Rng::seed_from_u64(seed);
    wander.set_stream(STREAM_JITTER);

    let total: f64 = segments.iter().map(|s| s.dwell_ms).sum();
    let dt = sensor.frame_period_ms();
    let decay = (-dt / JITTER_TAU_MS).exp();
    let kick = persona.fixation_jitter_deg * (1.0 - decay * decay).sqrt();

    let target_of = |s: &Segment| {
        let (yaw, pitch) = geom.gaze_angles(s.target);
        (yaw, pitch)
    };
    let mut trace = SessionTrace::new(meta);
    let mut starts = vec![None; segments.len()];
    let (gy, gp) = target_of(&segments[0]);
    let mut head = persona.head_target(gy, gp);
    let mut jitter = (0.0, 0.0);
    let mut seg = 0;
    let mut seg_end = segments[0].dwell_ms;
    let mut i = 0u64;
    loop {
        let t = i as f64 * 1000.0 / sensor.frame_rate_hz;
        if t >= total {
            break;
        }
        while t >= seg_end && seg + 1 < segments.len() {
            seg += 1;
            seg_end += segments[seg].dwell_ms;
        }
        if starts[seg].is_none() {
            starts[seg] = Some(trace.len());
        }
        let (yaw, pitch) = target_of(&segments[seg]);
        if i > 0 {
            let goal = persona.head_target(yaw, pitch);
            head.0 = head_trajectory_step(head.0, goal.0, 1.0, persona.transit_tau_ms, dt);
            head.1 = head_trajectory_step(head.1, goal.1, 1.0, persona.transit_tau_ms, dt);
            let zx: f64 = wander.sample(StandardNormal);
            let zy: f64 = wander.sample(StandardNormal);
            jitter = (jitter.0 * decay + kick * zx, jitter.1 * decay + kick * zy);
        }
        let sample = sensor_observe(t, (head.0 + jitter.0, head.1 + jitter.1, 0.0), sensor, geom.distance_cm, &mut noise);
        trace.push(sample, segments[seg].label);
        i += 1;
    }
    Ok((trace, starts))
}

/// Simulate a labeled driving session with probes every `probe_period_ms`.
pub fn synthesize_session(
    persona: &Persona,
    sensor: &SensorModel,
    schedule: &RegionSchedule,
    geometry: &SceneGeometry,
    probe_period_ms: f64,
    seed: u64,
) -> Result<SessionTrace> {
    schedule.validate()?;
    if !(probe_period_ms > 0.0 && probe_period_ms.is_finite()) {
        return Err(Error::invalid("probe period must be positive"));
    }
    let layout = &geometry.layout;
    let segments: Vec<Segment> = schedule
        .segments
        .iter()
        .map(|&(r, d)| Segment { target: layout.center(r), label: Some(r), dwell_ms: d })
        .collect();
    let meta = TraceMeta { sensor: sensor.name.clone(), persona: persona.name.clone(), seed, fps: sensor.frame_rate_hz };
    let (mut trace, _) = integrate(&segments, persona, sensor, geometry, meta, seed)?;
    let count = (schedule.duration_ms() / probe_period_ms + 1e-9).floor() as usize;
    for k in 0..count {
        let nominal = (k + 1) as f64 * probe_period_ms;
        if let Some(idx) = trace.index_at_or_before(nominal) {
            let t = trace.samples[idx].t_ms;
            if trace.probes.last() != Some(&t) {
                trace.probes.push(t);
            }
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationProtocol {
    /// Center plus right, left, top and bottom screen edges.
    Method1,
    /// Center plus the 23 border points of the adapted rule table.
    Method2,
    /// Each region for 10 s, each preceded by the center.
    Learned,
}

impl std::str::FromStr for CalibrationProtocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "method1" => Ok(Self::Method1),
            "method2" => Ok(Self::Method2),
            "learned" | "mlp" | "svm" => Ok(Self::Learned),
            other => Err(Error::invalid(format!("unknown protocol '{other}' (method1, method2, learned)"))),
        }
    }
}

impl CalibrationProtocol {
    /// Number of dwells (probe markers) in the protocol's trace.
    pub fn dwell_count(self) -> usize {
        match self {
            Self::Method1 => 5,
            Self::Method2 => 24,
            Self::Learned => 14,
        }
    }
}

/// Simulate the fixation sequence of a calibration protocol. Each dwell
/// starts with a probe marker.
pub fn synthesize_calibration(
    persona: &Persona,
    sensor: &SensorModel,
    geometry: &SceneGeometry,
    protocol: CalibrationProtocol,
    table: &AdaptedRuleTable,
    seed: u64,
) -> Result<SessionTrace> {
    let point = TRANSIT_DISCARD_MS + POINT_FIXATION_MS;
    let center = NormPoint::new(0.0, 0.0);
    let fix = |target: NormPoint| Segment { target, label: None, dwell_ms: point };
    let segments: Vec<Segment> = match protocol {
        CalibrationProtocol::Method1 => [(0.0, 0.0), (0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)]
            .into_iter()
            .map(|(x, y)| fix(NormPoint::new(x, y)))
            .collect(),
        CalibrationProtocol::Method2 => {
            table.validate()?;
            std::iter::once(fix(center)).chain(table.points.iter().map(|&p| fix(p))).collect()
        }
        CalibrationProtocol::Learned => Region::all()
            .flat_map(|r| {
                [
                    fix(center),
                    Segment {
                        target: geometry.layout.center(r),
                        label: Some(r),
                        dwell_ms: TRANSIT_DISCARD_MS + REGION_FIXATION_MS,
                    },
                ]
            })
            .collect(),
    };
    let meta = TraceMeta { sensor: sensor.name.clone(), persona: persona.name.clone(), seed, fps: sensor.frame_rate_hz };
    let (mut trace, starts) = integrate(&segments, persona, sensor, geometry, meta, seed)?;
    for (k, s) in starts.iter().enumerate() {
        let idx = s.ok_or_else(|| Error::invalid(format!("calibration dwell {k} received no samples")))?;
        trace.probes.push(trace.samples[idx].t_ms);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{angular_displacement, CalibrationDwell};

    #[test]
    fn step_fixed_point_and_limit() {
        assert_eq!(head_trajectory_step(24.0, 30.0, 0.8, 150.0, 33.0), 24.0);
        assert_eq!(head_trajectory_step(3.0, 30.0, 0.8, 150.0, f64::INFINITY), 24.0);
        let mid = head_trajectory_step(0.0, 10.0, 1.0, 100.0, 100.0);
        assert!((mid - 10.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn observe_identity_and_geometry() {
        let s = SensorModel::noiseless("t", 30.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = sensor_observe(0.0, (0.0, 0.0, 0.0), &s, 250.0, &mut rng);
        assert_eq!((a.face_cx_px, a.face_cy_px, a.face_area_px2), (320.0, 240.0, 14400.0));
        let b = sensor_observe(0.0, (27.47, 0.0, 0.0), &s, 250.0, &mut rng);
        let oracle = 250.0 * (27.47f64 * std::f64::consts::PI / 180.0).tan();
        assert!((b.face_cx_px - 320.0 - oracle).abs() < 1e-9);
        assert!((b.face_cx_px - 320.0 - 129.96).abs() < 0.05);
    }

    #[test]
    fn observe_noise_std() {
        let mut s = SensorModel::noiseless("t", 30.0);
        s.yaw_noise_std_deg = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let xs: Vec<f64> = (0..10_000).map(|_| sensor_observe(0.0, (0.0, 0.0, 0.0), &s, 250.0, &mut rng).yaw_deg).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
        assert!((1.9..=2.1).contains(&sd), "{sd}");
    }

    #[test]
    fn method1_protocol_order() {
        let g = SceneGeometry::default();
        let t = synthesize_calibration(
            &Persona::ideal(),
            &SensorModel::noiseless("t", 30.0),
            &g,
            CalibrationProtocol::Method1,
            &AdaptedRuleTable::standard(),
            1,
        )
        .unwrap();
        t.validate().unwrap();
        let dwells = CalibrationDwell::from_trace(&t, 5).unwrap();
        let expect = [(0.0, 0.0), (130.0, 0.0), (-130.0, 0.0), (0.0, 97.5), (0.0, -97.5)];
        for (d, (ex, ey)) in dwells.iter().zip(expect) {
            let m = d.aggregate(250.0).unwrap();
            assert!((m.dx_cm - ex).abs() < 1e-6 && (m.dy_cm - ey).abs() < 1e-6, "{m:?}");
        }
    }

    #[test]
    fn protocol_dwell_counts() {
        let g = SceneGeometry::default();
        for (p, n) in [
            (CalibrationProtocol::Method1, 5),
            (CalibrationProtocol::Method2, 24),
            (CalibrationProtocol::Learned, 14),
        ] {
            let t = synthesize_calibration(&Persona::ideal(), &SensorModel::noiseless("t", 60.0), &g, p, &AdaptedRuleTable::standard(), 1).unwrap();
            assert_eq!(t.dwells().len(), n);
            assert_eq!(p.dwell_count(), n);
        }
    }

    #[test]
    fn learned_protocol_alternates() {
        let g = SceneGeometry::default();
        let t = synthesize_calibration(&Persona::ideal(), &SensorModel::noiseless("t", 30.0), &g, CalibrationProtocol::Learned, &AdaptedRuleTable::standard(), 1).unwrap();
        let dwells = t.dwells();
        for (k, d) in dwells.iter().enumerate() {
            if k % 2 == 0 {
                assert_eq!(d.label(), None);
            } else {
                assert_eq!(d.label(), Some(Region::from_index(k / 2)));
                assert!(d.duration_ms() >= REGION_FIXATION_MS);
            }
        }
    }

    #[test]
    fn settled_probes_hit_region_centers() {
        let g = SceneGeometry::default();
        let sched = RegionSchedule::new(
            (0..40).map(|k| (Region::from_index(k % 7), if k == 0 { 2000.0 } else { 4000.0 })).collect(),
        )
        .unwrap();
        let t = synthesize_session(&Persona::ideal(), &SensorModel::noiseless("t", 30.0), &sched, &g, 4000.0, 5).unwrap();
        assert_eq!(t.probes.len(), (sched.duration_ms() / 4000.0).floor() as usize);
        for &p in &t.probes {
            let i = t.index_at_or_before(p).unwrap();
            let s = &t.samples[i];
            let c = g.layout.center(t.labels[i].unwrap());
            let d = angular_displacement(s.yaw_deg, s.pitch_deg, 250.0).unwrap();
            assert!((d.dx_cm - c.x * 260.0).abs() < 1e-6 && (d.dy_cm - c.y * 195.0).abs() < 1e-6);
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let g = SceneGeometry::default();
        let sched = RegionSchedule::new(vec![(Region::CENTER, 3000.0), (Region::new(3).unwrap(), 5000.0)]).unwrap();
        let p = &Persona::presets()[1];
        let s = &SensorModel::presets()[0];
        let a = synthesize_session(p, s, &sched, &g, 4000.0, 8).unwrap();
        let b = synthesize_session(p, s, &sched, &g, 4000.0, 8).unwrap();
        assert_eq!(a, b);
        let c = synthesize_session(p, s, &sched, &g, 4000.0, 9).unwrap();
        assert_ne!(a, c);
    }
}
