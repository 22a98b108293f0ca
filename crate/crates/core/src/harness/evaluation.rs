use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{Region, REGION_COUNT};
use crate::trace::SessionTrace;

use super::estimator::RegionEstimator;

/// Rows are the actual region, columns the predicted one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        Self { counts: vec![vec![0; REGION_COUNT]; REGION_COUNT] }
    }
}

impl ConfusionMatrix {
    pub fn validate(&self) -> Result<()> {
        if self.counts.len() != REGION_COUNT || self.counts.iter().any(|r| r.len() != REGION_COUNT) {
            return Err(Error::Mismatch(format!("confusion matrix must be {REGION_COUNT}x{REGION_COUNT}")));
        }
        Ok(())
    }

    pub fn add(&mut self, actual: Region, predicted: Region) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// Percent of all probes on the diagonal; 0 when empty.
    pub fn overall_accuracy(&self) -> f64 {
        let n = self.total();
        if n == 0 { 0.0 } else { 100.0 * self.correct() as f64 / n as f64 }
    }

    /// Diagonal share of each row; `None` for regions that were never probed.
    pub fn per_region_accuracy(&self) -> Vec<Option<f64>> {
        (0..self.counts.len())
            .map(|i| {
                let n = self.row_total(i);
                (n > 0).then(|| 100.0 * self.counts[i][i] as f64 / n as f64)
            })
            .collect()
    }

    pub fn row_percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let n: u64 = row.iter().sum();
                row.iter().map(|c| if n == 0 { 0.0 } else { 100.0 * *c as f64 / n as f64 }).collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub mean: f64,
    pub std: f64,
    pub largest: f64,
    pub lowest: f64,
    /// Mean of |delta angle| / delta t over consecutive samples, deg/s.
    pub mean_variation_per_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadPoseStats {
    pub yaw: AxisStats,
    pub pitch: AxisStats,
}

fn axis_stats(t: &[f64], v: &[f64]) -> AxisStats {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let largest = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lowest = v.iter().copied().fold(f64::INFINITY, f64::min);
    let rates: f64 = (1..v.len()).map(|i| (v[i] - v[i - 1]).abs() / ((t[i] - t[i - 1]) / 1000.0)).sum();
    AxisStats {
        // keep mean inside [lowest, largest] despite rounding
        mean: mean.clamp(lowest, largest),
        std: var.sqrt(),
        largest,
        lowest,
        mean_variation_per_s: rates / (v.len() - 1) as f64,
    }
}

pub fn head_pose_stats(trace: &SessionTrace) -> Result<HeadPoseStats> {
    if trace.len() < 2 {
        return Err(Error::invalid("head-pose statistics need at least 2 samples"));
    }
    let t: Vec<f64> = trace.samples.iter().map(|s| s.t_ms).collect();
    let yaw: Vec<f64> = trace.samples.iter().map(|s| s.yaw_deg).collect();
    let pitch: Vec<f64> = trace.samples.iter().map(|s| s.pitch_deg).collect();
    Ok(HeadPoseStats { yaw: axis_stats(&t, &yaw), pitch: axis_stats(&t, &pitch) })
}

impl HeadPoseStats {
    /// Ten labeled rows, five per axis.
    pub fn rows(&self) -> Vec<(String, f64)> {
        let mut out = Vec::with_capacity(10);
        for (axis, s) in [("yaw", &self.yaw), ("pitch", &self.pitch)] {
            out.push((format!("Mean of {axis} (deg)"), s.mean));
            out.push((format!("Standard deviation of {axis} (deg)"), s.std));
            out.push((format!("Largest {axis} (deg)"), s.largest));
            out.push((format!("Lowest {axis} (deg)"), s.lowest));
            out.push((format!("Mean variation of {axis} per second (deg/s)"), s.mean_variation_per_s));
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.rows() {
            let _ = writeln!(s, "{k:<46} {v:>9.2}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub sensor: String,
    pub persona: String,
    pub seed: u64,
    pub probe_count: usize,
    pub confusion: ConfusionMatrix,
    pub overall_accuracy: f64,
    pub per_region_accuracy: Vec<Option<f64>>,
    pub head_pose: Option<HeadPoseStats>,
}

impl EvaluationReport {
    pub fn error_rate(&self) -> f64 {
        100.0 - self.overall_accuracy
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "method {}  sensor {}  persona {}  seed {}  probes {}",
            self.method, self.sensor, self.persona, self.seed, self.probe_count
        );
        let _ = writeln!(s, "actual\\predicted  {}", (1..=REGION_COUNT).map(|r| format!("{r:>5}")).collect::<String>());
        for (i, row) in self.confusion.row_percentages().iter().enumerate() {
            let cells: String = row.iter().map(|p| format!("{:>4}%", p.round() as i64)).collect();
            let _ = writeln!(s, "region {:<10} {cells}", i + 1);
        }
        let _ = writeln!(s, "overall accuracy {:.2}%", self.overall_accuracy);
        if let Some(h) = &self.head_pose {
            s.push_str(&h.render());
        }
        s
    }
}

/// Score an estimator at every probe of a labeled trace, using the latest
/// sample at or before each probe.
pub fn run_evaluation(trace: &SessionTrace, estimator: &dyn RegionEstimator) -> Result<EvaluationReport> {
    if trace.probes.is_empty() {
        return Err(Error::invalid("trace has no probes"));
    }
    if trace.labels.len() != trace.samples.len() {
        return Err(Error::invalid("trace labels do not match samples"));
    }
    let mut confusion = ConfusionMatrix::default();
    for &p in &trace.probes {
        let idx = trace
            .index_at_or_before(p)
            .ok_or_else(|| Error::invalid(format!("probe at {p} ms precedes the first sample")))?;
        let actual = trace.labels[idx]
            .ok_or_else(|| Error::invalid(format!("sample at {} ms has no ground-truth label", trace.samples[idx].t_ms)))?;
        confusion.add(actual, estimator.estimate(&trace.samples[idx])?);
    }
    Ok(EvaluationReport {
        method: estimator.method_id(),
        sensor: trace.meta.sensor.clone(),
        persona: trace.meta.persona.clone(),
        seed: trace.meta.seed,
        probe_count: trace.probes.len(),
        overall_accuracy: confusion.overall_accuracy(),
        per_region_accuracy: confusion.per_region_accuracy(),
        confusion,
        head_pose: head_pose_stats(trace).ok(),
    })
}

/// Side-by-side accuracy table; one column per (method, sensor), pooling
/// the confusion matrices of reports that share a column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    /// Per-region accuracy rows for regions 1..=7, percent.
    pub region_rows: Vec<Vec<Option<f64>>>,
    pub overall: Vec<f64>,
    /// (label, error rate per column) rows: overall, then one per persona.
    pub error_rows: Vec<(String, Vec<Option<f64>>)>,
}

pub fn compare_reports(reports: &[EvaluationReport]) -> Result<ComparisonTable> {
    if reports.is_empty() {
        return Err(Error::invalid("no reports to compare"));
    }
    for r in reports {
        r.confusion.validate()?;
    }
    let mut keys: Vec<(String, String)> = Vec::new();
    let mut personas: Vec<String> = Vec::new();
    for r in reports {
        let k = (r.method.clone(), r.sensor.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
        if r.persona != "unknown" && !personas.contains(&r.persona) {
            personas.push(r.persona.clone());
        }
    }
    let pooled = |method: &str, sensor: &str, persona: Option<&str>| {
        let mut m = ConfusionMatrix::default();
        let mut any = false;
        for r in reports {
            if r.method == method && r.sensor == sensor && persona.is_none_or(|p| p == r.persona) {
                m.merge(&r.confusion);
                any = true;
            }
        }
        any.then_some(m)
    };
    let columns: Vec<ConfusionMatrix> = keys.iter().map(|(m, s)| pooled(m, s, None).unwrap_or_default()).collect();
    let region_rows = (0..REGION_COUNT)
        .map(|i| columns.iter().map(|c| c.per_region_accuracy()[i]).collect())
        .collect();
    let overall: Vec<f64> = columns.iter().map(ConfusionMatrix::overall_accuracy).collect();
    let mut error_rows = vec![("overall".to_string(), overall.iter().map(|a| Some(100.0 - a)).collect())];
    for p in &personas {
        let row = keys
            .iter()
            .map(|(m, s)| pooled(m, s, Some(p)).filter(|c| c.total() > 0).map(|c| 100.0 - c.overall_accuracy()))
            .collect();
        error_rows.push((p.clone(), row));
    }
    Ok(ComparisonTable {
        columns: keys.iter().map(|(m, s)| if s.is_empty() { m.clone() } else { format!("{m}/{s}") }).collect(),
        region_rows,
        overall,
        error_rows,
    })
}

impl ComparisonTable {
    pub fn render(&self) -> String {
        let w = self.columns.iter().map(String::len).max().unwrap_or(0).max(8) + 2;
        let cell = |v: Option<f64>, digits: usize| match v {
            Some(x) => format!("{:>w$}", format!("{x:.digits$}%")),
            None => format!("{:>w$}", "-"),
        };
        let mut s = String::new();
        let _ = writeln!(s, "{:<18}{}", "accuracy", self.columns.iter().map(|c| format!("{c:>w$}")).collect::<String>());
        for (i, row) in self.region_rows.iter().enumerate() {
            let _ = writeln!(s, "{:<18}{}", format!("region {}", i + 1), row.iter().map(|v| cell(*v, 0)).collect::<String>());
        }
        let _ = writeln!(s, "{:<18}{}", "overall", self.overall.iter().map(|v| cell(Some(*v), 2)).collect::<String>());
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<18}{}", "error rate", self.columns.iter().map(|c| format!("{c:>w$}")).collect::<String>());
        for (label, row) in &self.error_rows {
            let _ = writeln!(s, "{:<18}{}", label, row.iter().map(|v| cell(*v, 2)).collect::<String>());
        }
        s
    }
}
