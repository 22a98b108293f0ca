use gaze_core::error::Result;
use gaze_core::geometry::SceneGeometry;
use gaze_core::harness::{run_evaluation, RegionEstimator};
use gaze_core::region::Region;
use gaze_core::sample::HeadPoseSample;
use gaze_core::simulator::{
    generate_schedule, synthesize_session, Persona, RegionSchedule, ScheduleConfig, SensorModel,
};
use gaze_core::trace::{SessionTrace, TraceMeta};
use proptest::prelude::*;

/// Buckets yaw into regions, then relabels through `perm`.
struct YawBuckets {
    perm: Vec<usize>,
}

impl RegionEstimator for YawBuckets {
    fn method_id(&self) -> String {
        "buckets".into()
    }

    fn estimate(&self, s: &HeadPoseSample) -> Result<Region> {
        let bucket = ((s.yaw_deg + 35.0) / 10.0).floor().clamp(0.0, 6.0) as usize;
        Ok(Region::from_index(self.perm[bucket]))
    }
}

fn labeled_trace(rows: &[(f64, usize)], perm: &[usize]) -> SessionTrace {
    let mut t = SessionTrace::new(TraceMeta::default());
    for (i, &(yaw, label)) in rows.iter().enumerate() {
        t.push(HeadPoseSample::from_pose(i as f64 * 10.0, yaw, 0.0), Some(Region::from_index(perm[label])));
        t.probes.push(i as f64 * 10.0);
    }
    t
}

fn permutation() -> impl Strategy<Value = Vec<usize>> {
    Just((0..7).collect::<Vec<usize>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn confusion_is_relabeling_equivariant(
        rows in prop::collection::vec((-40.0f64..40.0, 0usize..7), 1..200),
        perm in permutation(),
    ) {
        let identity: Vec<usize> = (0..7).collect();
        let base = run_evaluation(&labeled_trace(&rows, &identity), &YawBuckets { perm: identity.clone() }).unwrap();
        let moved = run_evaluation(&labeled_trace(&rows, &perm), &YawBuckets { perm: perm.clone() }).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                prop_assert_eq!(base.confusion.counts[i][j], moved.confusion.counts[perm[i]][perm[j]]);
            }
        }
        prop_assert_eq!(base.overall_accuracy, moved.overall_accuracy);
    }

    #[test]
    fn overall_accuracy_is_probe_weighted_mean(
        rows in prop::collection::vec((-40.0f64..40.0, 0usize..7), 1..300),
    ) {
        let identity: Vec<usize> = (0..7).collect();
        let report = run_evaluation(&labeled_trace(&rows, &identity), &YawBuckets { perm: identity }).unwrap();
        let c = &report.confusion;
        let weighted: f64 = report
            .per_region_accuracy
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map(|a| a * c.row_total(i) as f64))
            .sum::<f64>()
            / c.total() as f64;
        prop_assert!((weighted - report.overall_accuracy).abs() < 1e-9);
        prop_assert_eq!(report.probe_count, rows.len());
    }

    #[test]
    fn probe_count_is_floor_of_duration_over_period(
        duration_s in 5.0f64..90.0,
        period_ms in 100.0f64..9000.0,
        seed in 0u64..1000,
    ) {
        let cfg = ScheduleConfig { duration_ms: duration_s * 1000.0, mean_dwell_ms: 3000.0, ..ScheduleConfig::default() };
        let schedule = generate_schedule(&cfg, seed).unwrap();
        let sensor = SensorModel::noiseless("ideal", 30.0);
        let trace = synthesize_session(&Persona::ideal(), &sensor, &schedule, &SceneGeometry::default(), period_ms, seed).unwrap();
        let expected = (schedule.duration_ms() / period_ms + 1e-9).floor() as usize;
        prop_assert_eq!(trace.probes.len(), expected);
    }

    #[test]
    fn head_target_is_linear_without_extras(
        gain_x in 0.05f64..=1.0,
        gain_y in 0.05f64..=1.0,
        yaw in -60.0f64..60.0,
        pitch in -40.0f64..40.0,
    ) {
        let p = Persona { head_gain_x: gain_x, head_gain_y: gain_y, ..Persona::ideal() };
        let (hy, hp) = p.head_target(yaw, pitch);
        prop_assert_eq!(hy, gain_x * yaw);
        prop_assert_eq!(hp, gain_y * pitch);
        prop_assert_eq!(p.head_target(-yaw, -pitch), (-hy, -hp));
    }

    #[test]
    fn head_yaw_is_odd_for_every_persona(
        eye in 0.0f64..10.0,
        coupling in -0.5f64..0.5,
        gain in 0.05f64..=1.0,
        yaw in -60.0f64..60.0,
        pitch in -40.0f64..40.0,
    ) {
        let p = Persona { head_gain_x: gain, head_gain_y: gain, eye_range_deg: eye, pitch_coupling: coupling, ..Persona::ideal() };
        let (a, pa) = p.head_target(yaw, pitch);
        let (b, pb) = p.head_target(-yaw, pitch);
        prop_assert_eq!(a, -b);
        prop_assert_eq!(pa, pb);
    }
}

#[test]
fn settled_head_angle_is_gain_times_gaze() {
    let geometry = SceneGeometry::default();
    let sensor = SensorModel::noiseless("ideal", 30.0);
    for gain in [0.3, 0.65, 1.0] {
        let persona = Persona { head_gain_x: gain, head_gain_y: gain, transit_tau_ms: 100.0, ..Persona::ideal() };
        for region in Region::all() {
            let schedule = RegionSchedule::new(vec![(Region::CENTER, 2000.0), (region, 5000.0)]).unwrap();
            let trace = synthesize_session(&persona, &sensor, &schedule, &geometry, 5000.0, 1).unwrap();
            let last = trace.samples.last().unwrap();
            let (gaze_yaw, gaze_pitch) = sensor.effective_geometry(&geometry).gaze_angles(geometry.layout.center(region));
            let (want_yaw, want_pitch) = persona.head_target(gaze_yaw, gaze_pitch);
            assert!((last.yaw_deg - want_yaw).abs() < 1e-9, "{region} gain {gain}: {} vs {want_yaw}", last.yaw_deg);
            assert!((last.pitch_deg - want_pitch).abs() < 1e-9, "{region} gain {gain}");
            assert!((want_yaw - gain * gaze_yaw).abs() < 1e-12);
        }
    }
}
