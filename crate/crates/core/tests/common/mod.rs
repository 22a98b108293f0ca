#![allow(dead_code)]

use gaze_core::geometry::SceneGeometry;
use gaze_core::harness::Config;
use gaze_core::region::Region;
use gaze_core::sample::HeadPoseSample;
use gaze_core::simulator::{synthesize_session, Persona, RegionSchedule, SensorModel};
use gaze_core::trace::SessionTrace;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn primal(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], c: f64) -> f64 {
    0.5 * dot(w, w) + c * xs.iter().zip(ys).map(|(x, y)| (1.0 - y * (dot(w, x) + b)).max(0.0)).sum::<f64>()
}

/// Exact soft-margin linear SVM for small 2-D problems.
pub struct OracleSvm {
    pub w: Vec<f64>,
    pub b: f64,
    pub objective: f64,
    /// Width of the interval of optimal biases (0 when the bias is pinned).
    pub bias_slack: f64,
}

/// Enumerates the points on the margin (at most 3 in 2-D) and the points
/// inside it, solves each KKT linear system and keeps the best feasible
/// one. The bias is the midpoint of the interval of biases that minimize
/// the primal for the optimal `w`.
pub fn svm_oracle(xs: &[Vec<f64>], ys: &[f64], c: f64) -> Option<OracleSvm> {
    let n = xs.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for a_mask in 1u32..(1 << n) {
        if a_mask.count_ones() > 3 {
            continue;
        }
        let act: Vec<usize> = (0..n).filter(|i| a_mask & (1 << i) != 0).collect();
        let rest: Vec<usize> = (0..n).filter(|i| a_mask & (1 << i) == 0).collect();
        for h_bits in 0u32..(1 << rest.len()) {
            let hinge: Vec<usize> =
                rest.iter().enumerate().filter(|(k, _)| h_bits & (1 << k) != 0).map(|(_, &i)| i).collect();
            let m = act.len();
            let mut w0 = [0.0; 2];
            let mut s0 = 0.0;
            for &i in &hinge {
                w0[0] += c * ys[i] * xs[i][0];
                w0[1] += c * ys[i] * xs[i][1];
                s0 += c * ys[i];
            }
            let mut mat = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in act.iter().enumerate() {
                for (col, &j) in act.iter().enumerate() {
                    mat[(r, col)] = ys[i] * ys[j] * dot(&xs[i], &xs[j]);
                }
                mat[(r, m)] = ys[i];
                rhs[r] = 1.0 - ys[i] * dot(&w0, &xs[i]);
            }
            for (col, &j) in act.iter().enumerate() {
                mat[(m, col)] = ys[j];
            }
            rhs[m] = -s0;
            let Some(sol) = mat.lu().solve(&rhs) else { continue };
            if sol.iter().take(m).any(|&a| !(-1e-9..=c + 1e-9).contains(&a)) {
                continue;
            }
            let mut w = w0.to_vec();
            for (k, &i) in act.iter().enumerate() {
                w[0] += sol[k] * ys[i] * xs[i][0];
                w[1] += sol[k] * ys[i] * xs[i][1];
            }
            let b = sol[m];
            let feasible = (0..n).all(|i| {
                let yf = ys[i] * (dot(&w, &xs[i]) + b);
                if hinge.contains(&i) {
                    yf <= 1.0 + 1e-9
                } else {
                    act.contains(&i) || yf >= 1.0 - 1e-9
                }
            });
            if feasible {
                let obj = primal(&w, b, xs, ys, c);
                if best.as_ref().is_none_or(|(bw, bb)| obj < primal(bw, *bb, xs, ys, c)) {
                    best = Some((w, b));
                }
            }
        }
    }
    let (w, _) = best?;
    // the primal is convex and piecewise linear in b; its kinks sit where a
    // point reaches the margin
    let kinks: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - dot(&w, x)).collect();
    let objective = kinks.iter().map(|&b| primal(&w, b, xs, ys, c)).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * objective.max(1.0);
    let optimal: Vec<f64> = kinks.into_iter().filter(|&b| primal(&w, b, xs, ys, c) <= objective + tol).collect();
    let lo = optimal.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = optimal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(OracleSvm { w, b: 0.5 * (lo + hi), objective, bias_slack: hi - lo })
}

/// Two noisy clusters, alternating labels; small shifts overlap.
pub fn two_clusters(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = rng.random_range(0.6..1.6);
    (0..n)
        .map(|i| {
            let y = if i % 2 == 0 { 1.0 } else { -1.0 };
            (vec![rng.random_range(-1.0..1.0) + y * shift, rng.random_range(-1.0..1.0) + 0.3 * y], y)
        })
        .unzip()
}

/// Schedule whose switches fall halfway between 4 s probes, so every probe
/// lands 2 s into a fixation.
pub fn settled_schedule(duration_ms: f64, seed: u64) -> RegionSchedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments = vec![(Region::CENTER, 2000.0)];
    let mut t = 2000.0;
    while t < duration_ms {
        let region = Region::from_index(rng.random_range(0..7));
        let dwell = (4000.0 * rng.random_range(1..4) as f64).min(duration_ms - t);
        segments.push((region, dwell));
        t += dwell;
    }
    RegionSchedule::new(segments).unwrap()
}

pub fn noiseless_sensor(fps: f64) -> SensorModel {
    SensorModel::noiseless("ideal", fps)
}

/// Unit-gain noiseless session with every probe settled.
pub fn settled_session(fps: f64, seed: u64) -> SessionTrace {
    let schedule = settled_schedule(2_000_000.0, seed);
    synthesize_session(&Persona::ideal(), &noiseless_sensor(fps), &schedule, &SceneGeometry::default(), 4000.0, seed)
        .unwrap()
}

/// Random head poses with a plausible face rectangle, for comparing
/// estimators sample by sample.
pub fn pose_battery(n: usize, seed: u64) -> Vec<HeadPoseSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let yaw: f64 = rng.random_range(-40.0..40.0);
            let pitch: f64 = rng.random_range(-30.0..30.0);
            HeadPoseSample {
                t_ms: i as f64,
                yaw_deg: yaw,
                pitch_deg: pitch,
                roll_deg: 0.0,
                face_cx_px: 320.0 + 250.0 * yaw.to_radians().tan(),
                face_cy_px: 240.0 + 250.0 * pitch.to_radians().tan(),
                face_area_px2: 14400.0 * yaw.to_radians().cos() * pitch.to_radians().cos(),
            }
        })
        .collect()
}

pub fn config() -> Config {
    Config::default()
}
