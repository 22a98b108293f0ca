use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::region::Region;
use crate::simulator::{generate_schedule, synthesize_calibration, synthesize_session, CalibrationProtocol};

use super::{calibrate, compare_reports, evaluate, ComparisonTable, Config, EvaluationReport, Method};

const CALIBRATION_SEED_OFFSET: u64 = 0x5eed_0001;
const LEARNED_SEED_OFFSET: u64 = 0x5eed_0002;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub name: String,
    pub held: u64,
    pub total: u64,
    pub required: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub base_seed: u64,
    pub checks: Vec<OrderingCheck>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<EvaluationReport>,
    pub comparison: ComparisonTable,
    pub summary: SuiteSummary,
}

impl SuiteOutcome {
    pub fn check(&self, name: &str) -> Option<&OrderingCheck> {
        self.summary.checks.iter().find(|c| c.name == name)
    }
}

fn run_one(cfg: &Config, persona: &str, sensor: &str, seed: u64, learned: bool) -> Result<Vec<EvaluationReport>> {
    let p = cfg.persona(persona)?;
    let s = cfg.sensor(sensor)?;
    let schedule = generate_schedule(&cfg.schedule, seed)?;
    let session = synthesize_session(p, s, &schedule, &cfg.geometry, cfg.schedule.probe_period_ms, seed)?;
    let cal_seed = seed.wrapping_add(CALIBRATION_SEED_OFFSET);
    let mut out = Vec::new();
    for (method, protocol) in [(Method::Method1, CalibrationProtocol::Method1), (Method::Method2, CalibrationProtocol::Method2)] {
        let cal = synthesize_calibration(p, s, &cfg.geometry, protocol, &cfg.adapted_table, cal_seed)?;
        let profile = calibrate(method, &cal, cfg)?;
        out.push(evaluate(&session, &profile, Some(method), cfg)?);
    }
    if learned {
        let cal = synthesize_calibration(
            p,
            s,
            &cfg.geometry,
            CalibrationProtocol::Learned,
            &cfg.adapted_table,
            seed.wrapping_add(LEARNED_SEED_OFFSET),
        )?;
        for method in [Method::Mlp, Method::Svm] {
            let profile = calibrate(method, &cal, cfg)?;
            out.push(evaluate(&session, &profile, Some(method), cfg)?);
        }
    }
    Ok(out)
}

/// Run every configured persona x sensor x seed and check the expected
/// orderings between methods, personas and devices.
pub fn run_suite(cfg: &Config, base_seed: u64) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let sc = &cfg.suite;
    let mut jobs = Vec::new();
    for persona in &sc.personas {
        for sensor in &sc.sensors {
            for k in 0..sc.seeds {
                jobs.push((persona.as_str(), sensor.as_str(), base_seed.wrapping_add(k), k < sc.learned_seeds));
            }
        }
    }
    let reports: Vec<EvaluationReport> = jobs
        .par_iter()
        .map(|&(p, s, seed, learned)| run_one(cfg, p, s, seed, learned))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let comparison = compare_reports(&reports)?;
    let summary = summarize(cfg, base_seed, &reports);
    Ok(SuiteOutcome { reports, comparison, summary })
}

fn find<'a>(reports: &'a [EvaluationReport], method: Method, persona: &str, sensor: &str, seed: u64) -> Option<&'a EvaluationReport> {
    reports
        .iter()
        .find(|r| r.method == method.as_str() && r.persona == persona && r.sensor == sensor && r.seed == seed)
}

fn summarize(cfg: &Config, base_seed: u64, reports: &[EvaluationReport]) -> SuiteSummary {
    let sc = &cfg.suite;
    let seeds: Vec<u64> = (0..sc.seeds).map(|k| base_seed.wrapping_add(k)).collect();
    let mut checks = Vec::new();
    let mut tally = |name: String, holds: &dyn Fn(u64) -> Option<bool>| {
        let results: Vec<bool> = seeds.iter().filter_map(|&s| holds(s)).collect();
        let held = results.iter().filter(|b| **b).count() as u64;
        let total = results.len() as u64;
        checks.push(OrderingCheck { name, held, total, required: sc.required_seeds, passed: held >= sc.required_seeds });
    };
    let err = |m: Method, p: &str, s: &str, seed: u64| find(reports, m, p, s, seed).map(EvaluationReport::error_rate);
    let has_p = |n: &str| sc.personas.iter().any(|p| p == n);
    let has_s = |n: &str| sc.sensors.iter().any(|s| s == n);

    for p in &sc.personas {
        for s in &sc.sensors {
            tally(format!("method2<=method1 {p}/{s}"), &|seed| {
                Some(err(Method::Method2, p, s, seed)? <= err(Method::Method1, p, s, seed)?)
            });
        }
    }
    if has_p("small") && has_p("large") {
        for s in &sc.sensors {
            tally(format!("method1 small>=large {s}"), &|seed| {
                Some(err(Method::Method1, "small", s, seed)? >= err(Method::Method1, "large", s, seed)?)
            });
        }
    }
    if has_s("hmd") && has_s("depthcam") {
        for m in [Method::Method1, Method::Method2] {
            for p in &sc.personas {
                tally(format!("{m} hmd<=depthcam {p}"), &|seed| {
                    Some(err(m, p, "hmd", seed)? <= err(m, p, "depthcam", seed)?)
                });
            }
        }
    }
    if has_p("small") && has_s("depthcam") {
        tally("method1 region3 lowest small/depthcam".into(), &|seed| {
            let r = find(reports, Method::Method1, "small", "depthcam", seed)?;
            let acc = &r.per_region_accuracy;
            let r3 = acc[Region::new(3).ok()?.index()]?;
            Some(acc.iter().flatten().all(|a| r3 <= *a))
        });
    }
    let all_passed = checks.iter().all(|c| c.passed);
    SuiteSummary { base_seed, checks, all_passed }
}

impl SuiteSummary {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{} {:<44} {}/{} (need {})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.held,
                c.total,
                c.required
            ));
        }
        s
    }
}

/// Write `reports.json`, `comparison.txt` and `summary.json` into `dir`.
pub fn write_suite(outcome: &SuiteOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("reports.json", serde_json::to_string_pretty(&outcome.reports).map_err(std::io::Error::other)?),
        ("comparison.txt", outcome.comparison.render()),
        ("summary.json", serde_json::to_string_pretty(&outcome.summary).map_err(std::io::Error::other)?),
    ];
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body + "\n")?;
        paths.push(path);
    }
    Ok(paths)
}
