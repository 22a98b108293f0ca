use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{Region, REGION_COUNT};

/// Ordered gaze targets with their dwell times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSchedule {
    pub segments: Vec<(Region, f64)>,
}

impl RegionSchedule {
    pub fn new(segments: Vec<(Region, f64)>) -> Result<Self> {
        let s = Self { segments };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::invalid("schedule is empty"));
        }
        if let Some((i, _)) = self.segments.iter().enumerate().find(|(_, (_, d))| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::invalid(format!("schedule segment {i}: dwell must be positive")));
        }
        Ok(())
    }

    pub fn duration_ms(&self) -> f64 {
        self.segments.iter().map(|(_, d)| d).sum()
    }

    /// Start time of every segment.
    pub fn onsets(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|(_, d)| {
                let s = t;
                t += d;
                s
            })
            .collect()
    }
}

/// Natural-driving schedule distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    /// Relative frequency of regions 1..=7.
    pub region_weights: [f64; REGION_COUNT],
    pub mean_dwell_ms: f64,
    pub duration_ms: f64,
    pub probe_period_ms: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let minor = 0.2 / 3.0;
        Self {
            region_weights: [0.5, minor, 0.1, 0.1, 0.1, minor, minor],
            mean_dwell_ms: 6000.0,
            duration_ms: 2_000_000.0,
            probe_period_ms: 4000.0,
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.region_weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || self.region_weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("region weights must be non-negative with a positive sum".into()));
        }
        for (name, v) in [
            ("mean dwell", self.mean_dwell_ms),
            ("duration", self.duration_ms),
            ("probe period", self.probe_period_ms),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Regions drawn i.i.d. from the weights, exponential dwells; the last
/// segment is cut so the schedule lasts exactly `duration_ms`.
pub fn generate_schedule(cfg: &ScheduleConfig, seed: u64) -> Result<RegionSchedule> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let regions = WeightedIndex::new(cfg.region_weights).map_err(|e| Error::Config(e.to_string()))?;
    let dwell = Exp::new(1.0 / cfg.mean_dwell_ms).map_err(|e| Error::Config(e.to_string()))?;
    let mut segments = Vec::new();
    let mut t = 0.0;
    while t < cfg.duration_ms {
        let r = Region::from_index(regions.sample(&mut rng));
        let d: f64 = dwell.sample(&mut rng);
        let d = d.max(1.0).min(cfg.duration_ms - t);
        segments.push((r, d));
        t += d;
    }
    RegionSchedule::new(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_duration_exactly() {
        let cfg = ScheduleConfig { duration_ms: 100_000.0, ..Default::default() };
        let s = generate_schedule(&cfg, 3).unwrap();
        assert!((s.duration_ms() - 100_000.0).abs() < 1e-6);
    }

    #[test]
    fn frequencies_follow_weights() {
        let s = generate_schedule(&ScheduleConfig::default(), 1).unwrap();
        let n = s.segments.len() as f64;
        let center = s.segments.iter().filter(|(r, _)| *r == Region::CENTER).count() as f64;
        assert!((center / n - 0.5).abs() < 0.06, "{}", center / n);
    }

    #[test]
    fn deterministic() {
        let cfg = ScheduleConfig::default();
        assert_eq!(generate_schedule(&cfg, 9).unwrap(), generate_schedule(&cfg, 9).unwrap());
        assert_ne!(generate_schedule(&cfg, 9).unwrap(), generate_schedule(&cfg, 10).unwrap());
    }

    #[test]
    fn rejects_bad_segments() {
        assert!(RegionSchedule::new(vec![]).is_err());
        assert!(RegionSchedule::new(vec![(Region::CENTER, 0.0)]).is_err());
    }
}
