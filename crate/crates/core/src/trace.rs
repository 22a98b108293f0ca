use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Region;
use crate::sample::HeadPoseSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub sensor: String,
    pub persona: String,
    pub seed: u64,
    pub fps: f64,
}

impl Default for TraceMeta {
    fn default() -> Self {
        Self {
            sensor: "unknown".into(),
            persona: "unknown".into(),
            seed: 0,
            fps: 30.0,
        }
    }
}

/// Ordered samples with optional ground truth and probe markers.
///
/// In driving sessions a probe is a ground-truth query; in calibration traces
/// probes mark the onset of each dwell. Probe timestamps always coincide with
/// a sample timestamp, which is what the trace file format stores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionTrace {
    pub samples: Vec<HeadPoseSample>,
    /// One entry per sample.
    pub labels: Vec<Option<Region>>,
    pub probes: Vec<f64>,
    pub meta: TraceMeta,
}

/// Contiguous run of samples between two probe markers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dwell<'a> {
    pub onset_ms: f64,
    pub samples: &'a [HeadPoseSample],
    pub labels: &'a [Option<Region>],
}

impl Dwell<'_> {
    /// Majority label of the dwell, `None` if most samples are unlabeled.
    pub fn label(&self) -> Option<Region> {
        let mut counts = [0usize; 8];
        for l in self.labels {
            counts[l.map_or(0, |r| r.id() as usize)] += 1;
        }
        let (best, _) = counts.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i)))?;
        if best == 0 { None } else { Region::new(best as u8).ok() }
    }

    pub fn duration_ms(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t_ms - a.t_ms,
            _ => 0.0,
        }
    }
}

impl SessionTrace {
    pub fn new(meta: TraceMeta) -> Self {
        Self { meta, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, sample: HeadPoseSample, label: Option<Region>) {
        self.samples.push(sample);
        self.labels.push(label);
    }

    pub fn duration_ms(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t_ms - a.t_ms,
            _ => 0.0,
        }
    }

    /// Index of the latest sample with `t_ms <= t`.
    pub fn index_at_or_before(&self, t: f64) -> Option<usize> {
        let n = self.samples.partition_point(|s| s.t_ms <= t);
        n.checked_sub(1)
    }

    pub fn is_probe_sample(&self, idx: usize) -> bool {
        let t = self.samples[idx].t_ms;
        self.probes.binary_search_by(|p| p.total_cmp(&t)).is_ok()
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.samples.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} samples",
                self.labels.len(),
                self.samples.len()
            )));
        }
        for (i, s) in self.samples.iter().enumerate() {
            s.validate()?;
            if i > 0 && s.t_ms <= self.samples[i - 1].t_ms {
                return Err(Error::invalid(format!("sample {i}: timestamps must be strictly increasing")));
            }
        }
        for (k, &p) in self.probes.iter().enumerate() {
            if k > 0 && p <= self.probes[k - 1] {
                return Err(Error::invalid(format!("probe {k}: probe timestamps must be strictly increasing")));
            }
            match self.index_at_or_before(p) {
                Some(i) if self.samples[i].t_ms == p => {}
                _ => {
                    return Err(Error::invalid(format!(
                        "probe {k} at {p} ms does not coincide with a sample timestamp"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Split the trace at probe markers. Samples before the first marker are
    /// dropped; the last dwell runs to the end of the trace.
    pub fn dwells(&self) -> Vec<Dwell<'_>> {
        let starts: Vec<usize> = self
            .probes
            .iter()
            .map(|&p| self.samples.partition_point(|s| s.t_ms < p))
            .collect();
        let mut out = Vec::with_capacity(starts.len());
        for (k, &start) in starts.iter().enumerate() {
            let end = starts.get(k + 1).copied().unwrap_or(self.samples.len());
            let range: Range<usize> = start..end.max(start);
            out.push(Dwell {
                onset_ms: self.probes[k],
                samples: &self.samples[range.clone()],
                labels: &self.labels[range],
            });
        }
        out
    }
}
