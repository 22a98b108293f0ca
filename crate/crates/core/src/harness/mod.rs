//! Evaluation engine, reports, persistence, configuration and the suite.

mod config;
mod estimator;
mod evaluation;
mod persist;
mod suite;

pub use config::{Config, EvalConfig, SuiteConfig};
pub use estimator::{learned_input, Estimator, Method, RegionEstimator};
pub use evaluation::{
    compare_reports, head_pose_stats, run_evaluation, AxisStats, ComparisonTable, ConfusionMatrix, EvaluationReport,
    HeadPoseStats,
};
pub use persist::{
    load_profile, profile_from_str, profile_to_string, read_trace, save_profile, trace_from_str, trace_to_string,
    write_trace,
};
pub use suite::{run_suite, write_suite, OrderingCheck, SuiteOutcome, SuiteSummary};

use crate::error::{Error, Result};
use crate::learners::{build_training_set, central_reference, mlp_train, svm_train, LearnedModel, TrainConfig};
use crate::profile::{CalibrationProfile, LearnedProfile};
use crate::projection::{calibrate_method1, calibrate_method2, CalibrationDwell};
use crate::simulator::CalibrationProtocol;
use crate::trace::SessionTrace;

/// Fit a learned profile from a learned-protocol calibration trace.
pub fn train_profile(
    method: Method,
    trace: &SessionTrace,
    subset: &[usize],
    standardize: bool,
    cfg: &TrainConfig,
) -> Result<CalibrationProfile> {
    let central = central_reference(trace)?;
    let set = build_training_set(trace, central)?;
    let (model, normalizer) = match method {
        Method::Mlp => {
            let (m, n) = mlp_train(&set, subset, standardize, cfg)?;
            (LearnedModel::Mlp(m), n)
        }
        Method::Svm => {
            let (m, n) = svm_train(&set, subset, standardize, cfg)?;
            (LearnedModel::Svm(m), n)
        }
        other => return Err(Error::invalid(format!("{other} is not a learned method"))),
    };
    Ok(CalibrationProfile::Learned(LearnedProfile {
        feature_subset: subset.to_vec(),
        normalizer,
        model,
        reference_face_cx: central.face_cx,
        reference_face_cy: central.face_cy,
    }))
}

/// Calibrate any method from its protocol's trace, using the geometry of the
/// sensor named in the trace header.
pub fn calibrate(method: Method, trace: &SessionTrace, cfg: &Config) -> Result<CalibrationProfile> {
    trace.validate()?;
    let geometry = cfg.geometry_for(&trace.meta.sensor);
    match method {
        Method::Method1 => {
            let dwells = CalibrationDwell::from_trace(trace, CalibrationProtocol::Method1.dwell_count())?;
            Ok(CalibrationProfile::Method1(calibrate_method1(&dwells, &geometry)?))
        }
        Method::Method2 => {
            let dwells = CalibrationDwell::from_trace(trace, CalibrationProtocol::Method2.dwell_count())?;
            Ok(CalibrationProfile::Method2(calibrate_method2(&dwells, &geometry)?))
        }
        Method::Mlp | Method::Svm => {
            train_profile(method, trace, &cfg.feature_subset(), cfg.eval.standardize, &cfg.train)
        }
    }
}

/// Estimator for a profile, bound to the geometry of `sensor`.
pub fn estimator_for(method: Method, profile: &CalibrationProfile, cfg: &Config, sensor: &str) -> Result<Estimator> {
    Estimator::new(method, profile, &cfg.geometry_for(sensor), &cfg.adapted_table, cfg.eval.scaling_mode)
}

/// Evaluate a profile on a labeled session. The method defaults to the
/// profile's own kind.
pub fn evaluate(trace: &SessionTrace, profile: &CalibrationProfile, method: Option<Method>, cfg: &Config) -> Result<EvaluationReport> {
    trace.validate()?;
    let method = match method {
        Some(m) => m,
        None => profile.kind().parse()?,
    };
    let est = estimator_for(method, profile, cfg, &trace.meta.sensor)?;
    run_evaluation(trace, &est)
}
