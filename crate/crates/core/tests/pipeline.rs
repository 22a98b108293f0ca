use std::path::Path;
use std::process::{Command, Output};

use gaze_core::harness::{calibrate, evaluate, Config, EvaluationReport, Method};
use gaze_core::simulator::{generate_schedule, synthesize_calibration, synthesize_session, CalibrationProtocol, ScheduleConfig};

fn gaze(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaze")).current_dir(dir).args(args).output().expect("run gaze")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn every_method_beats_chance_on_a_simulated_session() {
    let cfg = Config::default();
    let persona = cfg.persona("large").unwrap();
    let sensor = cfg.sensor("hmd").unwrap();
    let sched = ScheduleConfig { duration_ms: 400_000.0, ..cfg.schedule.clone() };
    let session =
        synthesize_session(persona, sensor, &generate_schedule(&sched, 3).unwrap(), &cfg.geometry, 4000.0, 3).unwrap();
    assert_eq!(session.probes.len(), 100);
    for (method, protocol) in [
        (Method::Method1, CalibrationProtocol::Method1),
        (Method::Method2, CalibrationProtocol::Method2),
        (Method::Mlp, CalibrationProtocol::Learned),
        (Method::Svm, CalibrationProtocol::Learned),
    ] {
        let cal = synthesize_calibration(persona, sensor, &cfg.geometry, protocol, &cfg.adapted_table, 30).unwrap();
        let profile = calibrate(method, &cal, &cfg).unwrap();
        let report = evaluate(&session, &profile, None, &cfg).unwrap();
        assert_eq!(report.method, method.as_str());
        assert_eq!(report.confusion.total(), 100);
        assert!(report.overall_accuracy > 70.0, "{method}: {:.1}%", report.overall_accuracy);
    }
}

#[test]
fn mismatched_profile_is_rejected() {
    let cfg = Config::default();
    let persona = cfg.persona("average").unwrap();
    let sensor = cfg.sensor("depthcam").unwrap();
    let cal = synthesize_calibration(persona, sensor, &cfg.geometry, CalibrationProtocol::Method1, &cfg.adapted_table, 1).unwrap();
    let profile = calibrate(Method::Method1, &cal, &cfg).unwrap();
    let sched = ScheduleConfig { duration_ms: 40_000.0, ..cfg.schedule.clone() };
    let session =
        synthesize_session(persona, sensor, &generate_schedule(&sched, 1).unwrap(), &cfg.geometry, 4000.0, 1).unwrap();
    assert!(evaluate(&session, &profile, Some(Method::Svm), &cfg).is_err());
}

#[test]
fn cli_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let steps: &[&[&str]] = &[
        &["--seed", "5", "simulate", "--persona", "small", "--duration-s", "120", "--out", "session.trace"],
        &["--seed", "6", "simulate", "--persona", "small", "--protocol", "method2", "--out", "m2.trace"],
        &["--seed", "7", "simulate", "--persona", "small", "--protocol", "learned", "--out", "learned.trace"],
        &["calibrate", "--trace", "m2.trace", "--method", "method2", "--out", "m2.prof"],
        &["train", "--trace", "learned.trace", "--method", "svm", "--features", "1,2", "--out", "svm.prof"],
        &["evaluate", "--trace", "session.trace", "--profile", "m2.prof", "--json", "m2.json"],
        &["evaluate", "--trace", "session.trace", "--profile", "svm.prof", "--json", "svm.json"],
        &["report", "m2.json", "svm.json"],
        &["stats", "--trace", "session.trace"],
        &["rank-features", "--trace", "learned.trace", "--mode", "prefix"],
    ];
    for args in steps {
        let out = gaze(d, args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let report: EvaluationReport = serde_json::from_slice(&std::fs::read(d.join("svm.json")).unwrap()).unwrap();
    assert_eq!((report.method.as_str(), report.probe_count), ("svm", 30));
    let stdout = String::from_utf8(gaze(d, &["evaluate", "--trace", "session.trace", "--profile", "m2.prof"]).stdout).unwrap();
    assert!(stdout.contains("overall accuracy"));
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gaze(d, &["--help"])), 0);
    assert_eq!(code(&gaze(d, &["bogus"])), 1);
    assert_eq!(code(&gaze(d, &["calibrate", "--trace", "x"])), 1);

    std::fs::write(d.join("junk.trace"), "#gazetrace v1 sensor=a persona=b seed=1 fps=30\n0 1 2\n").unwrap();
    let out = gaze(d, &["stats", "--trace", "junk.trace"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(&gaze(d, &["stats", "--trace", "missing.trace"])), 2);

    assert_eq!(code(&gaze(d, &["simulate", "--protocol", "method1", "--out", "m1.trace"])), 0);
    let text = std::fs::read_to_string(d.join("m1.trace")).unwrap();
    let flat: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                return l.to_string();
            }
            let mut f: Vec<&str> = l.split(' ').collect();
            f[1] = "0";
            f[2] = "0";
            f.join(" ")
        })
        .collect();
    std::fs::write(d.join("flat.trace"), flat.join("\n") + "\n").unwrap();
    let out = gaze(d, &["calibrate", "--trace", "flat.trace", "--method", "method1", "--out", "p.prof"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&gaze(d, &["train", "--trace", "m1.trace", "--method", "mlp", "--out", "p.prof"])), 3);
    assert_eq!(code(&gaze(d, &["calibrate", "--trace", "m1.trace", "--method", "nope", "--out", "p.prof"])), 2);
}
