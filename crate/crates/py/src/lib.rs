//! Python bindings: simulate traces, calibrate or train profiles, estimate
//! regions and score sessions.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use gaze_core::harness::{self, RegionEstimator};
use gaze_core::profile::CalibrationProfile;
use gaze_core::sample::HeadPoseSample;
use gaze_core::simulator::{generate_schedule, synthesize_calibration, synthesize_session, CalibrationProtocol, ScheduleConfig};
use gaze_core::trace::SessionTrace;

create_exception!(gazeregion, GazeError, PyValueError);

fn err(e: gaze_core::Error) -> PyErr {
    GazeError::new_err(e.to_string())
}

fn json(v: &harness::EvaluationReport) -> PyResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| GazeError::new_err(e.to_string()))
}

/// Toolkit configuration (scene geometry, personas, sensors, training).
#[pyclass(module = "gazeregion", from_py_object)]
#[derive(Clone)]
pub struct Config {
    inner: harness::Config,
}

#[pymethods]
impl Config {
    /// Built-in defaults, or the TOML file at `path`.
    #[new]
    #[pyo3(signature = (path=None))]
    fn new(path: Option<PathBuf>) -> PyResult<Self> {
        Ok(Self { inner: harness::Config::load_or_default(path.as_deref()).map_err(err)? })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self { inner: harness::Config::from_toml(text).map_err(err)? })
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(err)
    }

    #[getter]
    fn personas(&self) -> Vec<String> {
        self.inner.personas.iter().map(|p| p.name.clone()).collect()
    }

    #[getter]
    fn sensors(&self) -> Vec<String> {
        self.inner.sensors.iter().map(|s| s.name.clone()).collect()
    }
}

fn config_or_default(cfg: Option<&Config>) -> harness::Config {
    cfg.map_or_else(harness::Config::default, |c| c.inner.clone())
}

/// Head-pose samples with optional region labels and probe markers.
#[pyclass(module = "gazeregion", from_py_object)]
#[derive(Clone)]
pub struct Trace {
    inner: SessionTrace,
}

#[pymethods]
impl Trace {
    /// Labeled driving session probed every `probe_period_ms`.
    #[staticmethod]
    #[pyo3(signature = (persona, sensor, duration_s=None, seed=0, config=None))]
    fn simulate_session(
        persona: &str,
        sensor: &str,
        duration_s: Option<f64>,
        seed: u64,
        config: Option<&Config>,
    ) -> PyResult<Self> {
        let cfg = config_or_default(config);
        let sched = ScheduleConfig {
            duration_ms: duration_s.map_or(cfg.schedule.duration_ms, |d| d * 1000.0),
            ..cfg.schedule.clone()
        };
        let schedule = generate_schedule(&sched, seed).map_err(err)?;
        let p = cfg.persona(persona).map_err(err)?;
        let s = cfg.sensor(sensor).map_err(err)?;
        let inner = synthesize_session(p, s, &schedule, &cfg.geometry, sched.probe_period_ms, seed).map_err(err)?;
        Ok(Self { inner })
    }

    /// Calibration trace for `protocol`: method1, method2 or learned.
    #[staticmethod]
    #[pyo3(signature = (persona, sensor, protocol, seed=0, config=None))]
    fn simulate_calibration(
        persona: &str,
        sensor: &str,
        protocol: &str,
        seed: u64,
        config: Option<&Config>,
    ) -> PyResult<Self> {
        let cfg = config_or_default(config);
        let proto: CalibrationProtocol = protocol.parse().map_err(err)?;
        let p = cfg.persona(persona).map_err(err)?;
        let s = cfg.sensor(sensor).map_err(err)?;
        let inner = synthesize_calibration(p, s, &cfg.geometry, proto, &cfg.adapted_table, seed).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_string(text: &str) -> PyResult<Self> {
        Ok(Self { inner: harness::trace_from_str(text).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: harness::read_trace(&path).map_err(err)? })
    }

    fn to_string(&self) -> PyResult<String> {
        harness::trace_to_string(&self.inner).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        harness::write_trace(&self.inner, &path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn sensor(&self) -> String {
        self.inner.meta.sensor.clone()
    }

    #[getter]
    fn persona(&self) -> String {
        self.inner.meta.persona.clone()
    }

    #[getter]
    fn probes(&self) -> Vec<f64> {
        self.inner.probes.clone()
    }

    /// `(t_ms, yaw, pitch, roll, face_cx, face_cy, face_area)` per sample.
    #[getter]
    fn samples(&self) -> Vec<(f64, f64, f64, f64, f64, f64, f64)> {
        self.inner
            .samples
            .iter()
            .map(|s| (s.t_ms, s.yaw_deg, s.pitch_deg, s.roll_deg, s.face_cx_px, s.face_cy_px, s.face_area_px2))
            .collect()
    }

    /// Region number (1..=7) per sample, `None` when unlabeled.
    #[getter]
    fn labels(&self) -> Vec<Option<u8>> {
        self.inner.labels.iter().map(|l| l.map(|r| r.id())).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(sensor={:?}, persona={:?}, samples={}, probes={})",
            self.inner.meta.sensor,
            self.inner.meta.persona,
            self.inner.len(),
            self.inner.probes.len()
        )
    }
}

/// A fitted profile for one of the four methods.
#[pyclass(module = "gazeregion", from_py_object)]
#[derive(Clone)]
pub struct Profile {
    inner: CalibrationProfile,
}

#[pymethods]
impl Profile {
    /// Calibrate (method1, method2) or train (mlp, svm) from a trace made
    /// with the matching protocol.
    #[staticmethod]
    #[pyo3(signature = (method, trace, config=None))]
    fn calibrate(method: &str, trace: &Trace, config: Option<&Config>) -> PyResult<Self> {
        let cfg = config_or_default(config);
        let m: harness::Method = method.parse().map_err(err)?;
        Ok(Self { inner: harness::calibrate(m, &trace.inner, &cfg).map_err(err)? })
    }

    #[staticmethod]
    fn from_string(text: &str) -> PyResult<Self> {
        Ok(Self { inner: harness::profile_from_str(text).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: harness::load_profile(&path).map_err(err)? })
    }

    fn to_string(&self) -> PyResult<String> {
        harness::profile_to_string(&self.inner).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        harness::save_profile(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    /// Region (1..=7) for one head pose seen by `sensor`. Learned profiles
    /// also read the face rectangle.
    #[pyo3(signature = (yaw_deg, pitch_deg, sensor="depthcam", face=None, config=None))]
    fn estimate(
        &self,
        yaw_deg: f64,
        pitch_deg: f64,
        sensor: &str,
        face: Option<(f64, f64, f64)>,
        config: Option<&Config>,
    ) -> PyResult<u8> {
        let cfg = config_or_default(config);
        let method: harness::Method = self.inner.kind().parse().map_err(err)?;
        let est = harness::estimator_for(method, &self.inner, &cfg, sensor).map_err(err)?;
        let mut sample = HeadPoseSample::from_pose(0.0, yaw_deg, pitch_deg);
        if let Some((cx, cy, area)) = face {
            sample.face_cx_px = cx;
            sample.face_cy_px = cy;
            sample.face_area_px2 = area;
        }
        Ok(est.estimate(&sample).map_err(err)?.id())
    }

    fn __repr__(&self) -> String {
        format!("Profile(kind={:?})", self.inner.kind())
    }
}

/// Confusion matrix and accuracies of one evaluation.
#[pyclass(module = "gazeregion", from_py_object)]
#[derive(Clone)]
pub struct Report {
    inner: harness::EvaluationReport,
}

#[pymethods]
impl Report {
    #[getter]
    fn method(&self) -> String {
        self.inner.method.clone()
    }

    #[getter]
    fn probe_count(&self) -> usize {
        self.inner.probe_count
    }

    #[getter]
    fn overall_accuracy(&self) -> f64 {
        self.inner.overall_accuracy
    }

    #[getter]
    fn error_rate(&self) -> f64 {
        self.inner.error_rate()
    }

    #[getter]
    fn per_region_accuracy(&self) -> Vec<Option<f64>> {
        self.inner.per_region_accuracy.clone()
    }

    /// Counts, rows actual and columns predicted.
    #[getter]
    fn confusion(&self) -> Vec<Vec<u64>> {
        self.inner.confusion.counts.clone()
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Report(method={:?}, overall_accuracy={:.2})", self.inner.method, self.inner.overall_accuracy)
    }
}

/// Score `profile` on a labeled session; `method` defaults to the profile's.
#[pyfunction]
#[pyo3(signature = (trace, profile, method=None, config=None))]
fn evaluate(trace: &Trace, profile: &Profile, method: Option<&str>, config: Option<&Config>) -> PyResult<Report> {
    let cfg = config_or_default(config);
    let m = method.map(str::parse::<harness::Method>).transpose().map_err(err)?;
    Ok(Report { inner: harness::evaluate(&trace.inner, &profile.inner, m, &cfg).map_err(err)? })
}

/// Run the full battery; returns `(all_passed, [(name, held, total, passed)])`.
#[pyfunction]
#[pyo3(signature = (seed=42, config=None))]
fn run_suite(py: Python<'_>, seed: u64, config: Option<&Config>) -> PyResult<(bool, Vec<(String, u64, u64, bool)>)> {
    let cfg = config_or_default(config);
    let outcome = py.detach(|| harness::run_suite(&cfg, seed)).map_err(err)?;
    let checks = outcome.summary.checks.iter().map(|c| (c.name.clone(), c.held, c.total, c.passed)).collect();
    Ok((outcome.summary.all_passed, checks))
}

/// Screen displacement `(dx, dy)` in cm of a head pose at distance `d_cm`.
#[pyfunction]
fn angular_displacement(yaw_deg: f64, pitch_deg: f64, d_cm: f64) -> PyResult<(f64, f64)> {
    let d = gaze_core::projection::angular_displacement(yaw_deg, pitch_deg, d_cm).map_err(err)?;
    Ok((d.dx_cm, d.dy_cm))
}

#[pyfunction]
fn horizontal_fov(w_cm: f64, d_cm: f64) -> PyResult<f64> {
    gaze_core::projection::horizontal_fov(w_cm, d_cm).map_err(err)
}

#[pymodule]
pub fn gazeregion(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GazeError", m.py().get_type::<GazeError>())?;
    m.add_class::<Config>()?;
    m.add_class::<Trace>()?;
    m.add_class::<Profile>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(angular_displacement, m)?)?;
    m.add_function(wrap_pyfunction!(horizontal_fov, m)?)?;
    Ok(())
}
