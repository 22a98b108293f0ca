use crate::error::{Error, Result};
use crate::features::{extract_features, CentralReference, LabeledSet, FEATURE_COUNT};
use crate::projection::TRANSIT_DISCARD_MS;
use crate::region::{Region, REGION_COUNT};
use crate::trace::{Dwell, SessionTrace};

use super::Normalizer;

pub const PATTERN_RATE_HZ: f64 = 15.0;
pub const PATTERNS_PER_REGION: usize = 150;

/// Labeled feature vectors plus a normalizer fitted over all five features.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub patterns: LabeledSet,
    pub normalizer: Normalizer,
    pub central: CentralReference,
}

impl TrainingSet {
    pub fn new(patterns: LabeledSet, central: CentralReference) -> Self {
        let rows: Vec<Vec<f64>> = patterns.patterns.iter().map(|(v, _)| v.0.to_vec()).collect();
        let normalizer = if rows.is_empty() { Normalizer::identity(FEATURE_COUNT) } else { Normalizer::fit(&rows) };
        Self { patterns, normalizer, central }
    }

    pub fn normalizer_for(&self, subset: &[usize], standardize: bool) -> Normalizer {
        if standardize {
            self.normalizer.select(subset)
        } else {
            Normalizer::identity(subset.len())
        }
    }
}

fn post_transit(d: &Dwell<'_>) -> usize {
    let cutoff = d.onset_ms + TRANSIT_DISCARD_MS;
    d.samples.partition_point(|s| s.t_ms < cutoff)
}

/// Mean face-rectangle center over the post-transit part of every unlabeled
/// (central) dwell in a learned-calibration trace.
pub fn central_reference(trace: &SessionTrace) -> Result<CentralReference> {
    let (mut cx, mut cy, mut n) = (0.0, 0.0, 0usize);
    for d in trace.dwells().iter().filter(|d| d.label().is_none()) {
        for s in &d.samples[post_transit(d)..] {
            cx += s.face_cx_px;
            cy += s.face_cy_px;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::calibration("center", "trace has no central-gaze dwell"));
    }
    Ok(CentralReference { face_cx: cx / n as f64, face_cy: cy / n as f64 })
}

/// Sample each region dwell at 15 Hz over the 10 s after head transit,
/// yielding 150 patterns per region.
pub fn build_training_set(trace: &SessionTrace, central: CentralReference) -> Result<TrainingSet> {
    let dwells = trace.dwells();
    let period = 1000.0 / PATTERN_RATE_HZ;
    let window = PATTERNS_PER_REGION as f64 * period;
    let mut patterns = Vec::with_capacity(REGION_COUNT * PATTERNS_PER_REGION);
    for region in Region::all() {
        let name = format!("region {region}");
        let dwell = dwells
            .iter()
            .find(|d| d.label() == Some(region))
            .ok_or_else(|| Error::calibration(&name, "no training dwell"))?;
        let kept = &dwell.samples[post_transit(dwell)..];
        let start = dwell.onset_ms + TRANSIT_DISCARD_MS;
        let (Some(first), Some(last)) = (kept.first(), kept.last()) else {
            return Err(Error::calibration(&name, "no samples left after discarding head transit"));
        };
        let frame = if kept.len() > 1 { (last.t_ms - first.t_ms) / (kept.len() - 1) as f64 } else { 0.0 };
        if last.t_ms - start + frame < window - 1e-6 {
            return Err(Error::calibration(
                &name,
                format!("dwell too short: {:.0} ms after transit, need {window:.0} ms", last.t_ms - start + frame),
            ));
        }
        for k in 0..PATTERNS_PER_REGION {
            let tick = start + k as f64 * period;
            let i = kept.partition_point(|s| s.t_ms < tick - 1e-6).min(kept.len() - 1);
            patterns.push((extract_features(&kept[i], Some(central))?, region));
        }
    }
    Ok(TrainingSet::new(LabeledSet::new(patterns), central))
}
