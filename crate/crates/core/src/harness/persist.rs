//! Line-oriented trace and profile files.
//!
//! Trace: `#gazetrace v1 sensor=<name> persona=<name> seed=<u64> fps=<f64>`
//! followed by `t_ms yaw pitch roll face_cx face_cy face_area label probe`
//! records. Profile: `#gazeprofile v1`, `key values...` lines, and a final
//! `checksum <sha256>` line covering every byte before it.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learners::{BinaryMlp, BinarySvm, LearnedModel, MlpModel, Normalizer, PairSvm, SvmModel, SymmetricSigmoid};
use crate::profile::{CalibrationProfile, LearnedProfile, Method1Profile, Method2Profile};
use crate::region::Region;
use crate::sample::HeadPoseSample;
use crate::trace::{SessionTrace, TraceMeta};

pub const TRACE_MAGIC: &str = "#gazetrace";
pub const PROFILE_MAGIC: &str = "#gazeprofile";
pub const FORMAT_VERSION: &str = "v1";

/// 17 significant digits; parses back to the identical `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn nums(vs: &[f64]) -> String {
    vs.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
}

fn check_name(kind: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '=') {
        return Err(Error::invalid(format!("{kind} name '{s}' must be non-empty without spaces or '='")));
    }
    Ok(())
}

pub fn trace_to_string(trace: &SessionTrace) -> Result<String> {
    trace.validate()?;
    let m = &trace.meta;
    check_name("sensor", &m.sensor)?;
    check_name("persona", &m.persona)?;
    let mut out = format!(
        "{TRACE_MAGIC} {FORMAT_VERSION} sensor={} persona={} seed={} fps={}\n",
        m.sensor, m.persona, m.seed, m.fps
    );
    let mut probes = trace.probes.iter().peekable();
    for (s, label) in trace.samples.iter().zip(&trace.labels) {
        let probe = if probes.peek() == Some(&&s.t_ms) {
            probes.next();
            1
        } else {
            0
        };
        let label = label.map_or_else(|| "-".to_string(), |r| r.to_string());
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {label} {probe}",
            num(s.t_ms),
            num(s.yaw_deg),
            num(s.pitch_deg),
            num(s.roll_deg),
            num(s.face_cx_px),
            num(s.face_cy_px),
            num(s.face_area_px2)
        );
    }
    Ok(out)
}

fn parse_header(line: &str) -> Result<TraceMeta> {
    let bad = |message: String| Error::Format { line: 1, message };
    let mut tok = line.split_whitespace();
    if tok.next() != Some(TRACE_MAGIC) {
        return Err(bad(format!("expected '{TRACE_MAGIC}' header")));
    }
    match tok.next() {
        Some(FORMAT_VERSION) => {}
        found => {
            return Err(Error::Version { expected: FORMAT_VERSION.into(), found: found.unwrap_or("").into() })
        }
    }
    let (mut sensor, mut persona, mut seed, mut fps) = (None, None, None, None);
    for kv in tok {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, found '{kv}'")))?;
        match k {
            "sensor" => sensor = Some(v.to_string()),
            "persona" => persona = Some(v.to_string()),
            "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?),
            "fps" => fps = Some(v.parse::<f64>().map_err(|e| bad(format!("fps: {e}")))?),
            other => return Err(bad(format!("unknown header key '{other}'"))),
        }
    }
    match (sensor, persona, seed, fps) {
        (Some(sensor), Some(persona), Some(seed), Some(fps)) => Ok(TraceMeta { sensor, persona, seed, fps }),
        _ => Err(bad("header needs sensor, persona, seed and fps".into())),
    }
}

pub fn trace_from_str(text: &str) -> Result<SessionTrace> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format { line: 1, message: "empty file".into() })?;
    let mut trace = SessionTrace::new(parse_header(header)?);
    for (i, raw) in lines.enumerate() {
        let line = i + 2;
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Format { line, message };
        let f: Vec<&str> = raw.split_whitespace().collect();
        if f.len() != 9 {
            return Err(bad(format!("expected 9 fields, found {}", f.len())));
        }
        let mut v = [0.0; 7];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = f[k].parse().map_err(|_| bad(format!("field {}: '{}' is not a number", k + 1, f[k])))?;
        }
        let label = match f[7] {
            "-" => None,
            s => Some(
                s.parse::<u8>()
                    .ok()
                    .and_then(|id| Region::new(id).ok())
                    .ok_or_else(|| bad(format!("label '{s}' must be 1..7 or '-'")))?,
            ),
        };
        let probe = match f[8] {
            "0" => false,
            "1" => true,
            s => return Err(bad(format!("probe flag '{s}' must be 0 or 1"))),
        };
        let sample = HeadPoseSample {
            t_ms: v[0],
            yaw_deg: v[1],
            pitch_deg: v[2],
            roll_deg: v[3],
            face_cx_px: v[4],
            face_cy_px: v[5],
            face_area_px2: v[6],
        };
        sample.validate().map_err(|e| bad(e.to_string()))?;
        if let Some(prev) = trace.samples.last() {
            if sample.t_ms <= prev.t_ms {
                return Err(Error::Ordering {
                    line,
                    message: format!("{} ms does not follow {} ms", sample.t_ms, prev.t_ms),
                });
            }
        }
        if probe {
            trace.probes.push(sample.t_ms);
        }
        trace.push(sample, label);
    }
    Ok(trace)
}

pub fn write_trace(trace: &SessionTrace, path: &Path) -> Result<()> {
    std::fs::write(path, trace_to_string(trace)?)?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<SessionTrace> {
    trace_from_str(&std::fs::read_to_string(path)?)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn mlp_lines(out: &mut String, m: &MlpModel) {
    let _ = writeln!(out, "mlp {} {} {} {}", m.input_dim, m.hidden, num(m.activation.alpha), num(m.activation.beta));
    for n in &m.nets {
        let _ = writeln!(out, "net {} {}", n.iterations, num(n.final_loss));
        let _ = writeln!(out, "params {}", nums(&n.params));
    }
}

fn svm_lines(out: &mut String, m: &SvmModel) {
    let _ = writeln!(out, "svm {} {}", m.input_dim, m.pairs.len());
    for p in &m.pairs {
        let s = &p.svm;
        let _ = writeln!(out, "pair {} {} {} {} {}", p.pos, p.neg, u8::from(s.converged), s.iterations, num(s.b));
        let _ = writeln!(out, "w {}", nums(&s.w));
        let _ = writeln!(out, "alpha {}", nums(&s.alpha));
    }
}

pub fn profile_to_string(profile: &CalibrationProfile) -> Result<String> {
    profile.validate()?;
    let mut out = format!("{PROFILE_MAGIC} {FORMAT_VERSION}\nkind {}\n", profile.kind());
    match profile {
        CalibrationProfile::Method1(p) => {
            for (k, v) in [
                ("dx00", p.dx00),
                ("dy00", p.dy00),
                ("sx_pos", p.sx_pos),
                ("sx_neg", p.sx_neg),
                ("sy_pos", p.sy_pos),
                ("sy_neg", p.sy_neg),
            ] {
                let _ = writeln!(out, "{k} {}", num(v));
            }
        }
        CalibrationProfile::Method2(p) => {
            let _ = writeln!(out, "dx00 {}", num(p.dx00));
            let _ = writeln!(out, "dy00 {}", num(p.dy00));
            let _ = writeln!(out, "border_dx {}", nums(&p.border_dx));
            let _ = writeln!(out, "border_dy {}", nums(&p.border_dy));
        }
        CalibrationProfile::Learned(p) => {
            let feats: Vec<String> = p.feature_subset.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "features {}", feats.join(" "));
            let _ = writeln!(out, "norm_mean {}", nums(&p.normalizer.mean));
            let _ = writeln!(out, "norm_scale {}", nums(&p.normalizer.scale));
            let _ = writeln!(out, "reference_face {} {}", num(p.reference_face_cx), num(p.reference_face_cy));
            match &p.model {
                LearnedModel::Mlp(m) => mlp_lines(&mut out, m),
                LearnedModel::Svm(m) => svm_lines(&mut out, m),
            }
        }
    }
    let sum = sha256_hex(out.as_bytes());
    let _ = writeln!(out, "checksum {sum}");
    Ok(out)
}

/// Sequential reader over `key values...` lines.
struct Body<'a> {
    lines: std::iter::Peekable<std::slice::Iter<'a, &'a str>>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

impl<'a> Body<'a> {
    fn next(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.lines.next().ok_or_else(|| malformed(format!("missing '{key}' line")))?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some(k) if k == key => Ok(tok.collect()),
            other => Err(malformed(format!("expected '{key}', found '{}'", other.unwrap_or("")))),
        }
    }

    fn floats(&mut self, key: &str) -> Result<Vec<f64>> {
        self.next(key)?.iter().map(|t| parse(key, t)).collect()
    }

    fn float(&mut self, key: &str) -> Result<f64> {
        let v = self.floats(key)?;
        if v.len() != 1 {
            return Err(malformed(format!("'{key}' takes one value")));
        }
        Ok(v[0])
    }
}

fn parse<T: std::str::FromStr>(key: &str, t: &str) -> Result<T> {
    t.parse().map_err(|_| malformed(format!("'{key}': cannot parse '{t}'")))
}

fn arity<'a>(key: &str, v: Vec<&'a str>, n: usize) -> Result<Vec<&'a str>> {
    if v.len() != n {
        return Err(malformed(format!("'{key}' takes {n} values, found {}", v.len())));
    }
    Ok(v)
}

fn region(key: &str, t: &str) -> Result<Region> {
    Region::new(parse(key, t)?).map_err(|_| malformed(format!("'{key}': bad region '{t}'")))
}

fn read_mlp(b: &mut Body<'_>) -> Result<MlpModel> {
    let h = arity("mlp", b.next("mlp")?, 4)?;
    let (input_dim, hidden): (usize, usize) = (parse("mlp", h[0])?, parse("mlp", h[1])?);
    let activation = SymmetricSigmoid { alpha: parse("mlp", h[2])?, beta: parse("mlp", h[3])? };
    let mut nets = Vec::new();
    for _ in 0..crate::region::REGION_COUNT {
        let n = arity("net", b.next("net")?, 2)?;
        let params = b.floats("params")?;
        let mut net = BinaryMlp::from_params(input_dim, hidden, params).map_err(|e| malformed(e.to_string()))?;
        net.iterations = parse("net", n[0])?;
        net.final_loss = parse("net", n[1])?;
        nets.push(net);
    }
    Ok(MlpModel { input_dim, hidden, activation, nets })
}

fn read_svm(b: &mut Body<'_>) -> Result<SvmModel> {
    let h = arity("svm", b.next("svm")?, 2)?;
    let input_dim: usize = parse("svm", h[0])?;
    let count: usize = parse("svm", h[1])?;
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let p = arity("pair", b.next("pair")?, 5)?;
        let converged = match p[2] {
            "0" => false,
            "1" => true,
            s => return Err(malformed(format!("'pair': bad converged flag '{s}'"))),
        };
        let w = b.floats("w")?;
        if w.len() != input_dim {
            return Err(malformed("'w' width does not match model input"));
        }
        let alpha = b.floats("alpha")?;
        pairs.push(PairSvm {
            pos: region("pair", p[0])?,
            neg: region("pair", p[1])?,
            svm: BinarySvm { w, b: parse("pair", p[4])?, alpha, iterations: parse("pair", p[3])?, converged },
        });
    }
    Ok(SvmModel { input_dim, pairs })
}

pub fn profile_from_str(text: &str) -> Result<CalibrationProfile> {
    let mut first = text.lines().next().ok_or_else(|| malformed("empty file"))?.split_whitespace();
    if first.next() != Some(PROFILE_MAGIC) {
        return Err(malformed(format!("missing '{PROFILE_MAGIC}' header")));
    }
    match first.next() {
        Some(FORMAT_VERSION) => {}
        found => return Err(Error::Version { expected: FORMAT_VERSION.into(), found: found.unwrap_or("").into() }),
    }
    let body_text = text.strip_suffix('\n').unwrap_or(text);
    let (covered, last) = match body_text.rfind('\n') {
        Some(i) => (&text[..=i], &body_text[i + 1..]),
        None => return Err(malformed("missing checksum line")),
    };
    let stored = last.strip_prefix("checksum ").ok_or_else(|| malformed("missing checksum line"))?.trim();
    let computed = sha256_hex(covered.as_bytes());
    if stored != computed {
        return Err(Error::Checksum { stored: stored.into(), computed });
    }
    let lines: Vec<&str> = covered.lines().skip(1).collect();
    let mut b = Body { lines: lines.iter().peekable() };
    let kind = arity("kind", b.next("kind")?, 1)?[0];
    let profile = match kind {
        "method1" => CalibrationProfile::Method1(Method1Profile {
            dx00: b.float("dx00")?,
            dy00: b.float("dy00")?,
            sx_pos: b.float("sx_pos")?,
            sx_neg: b.float("sx_neg")?,
            sy_pos: b.float("sy_pos")?,
            sy_neg: b.float("sy_neg")?,
        }),
        "method2" => CalibrationProfile::Method2(Method2Profile {
            dx00: b.float("dx00")?,
            dy00: b.float("dy00")?,
            border_dx: b.floats("border_dx")?,
            border_dy: b.floats("border_dy")?,
        }),
        "mlp" | "svm" => {
            let feature_subset = b.next("features")?.iter().map(|t| parse("features", t)).collect::<Result<Vec<usize>>>()?;
            let normalizer = Normalizer { mean: b.floats("norm_mean")?, scale: b.floats("norm_scale")? };
            let r = b.floats("reference_face")?;
            if r.len() != 2 {
                return Err(malformed("'reference_face' takes 2 values"));
            }
            let model = if kind == "mlp" { LearnedModel::Mlp(read_mlp(&mut b)?) } else { LearnedModel::Svm(read_svm(&mut b)?) };
            CalibrationProfile::Learned(LearnedProfile {
                feature_subset,
                normalizer,
                model,
                reference_face_cx: r[0],
                reference_face_cy: r[1],
            })
        }
        other => return Err(malformed(format!("unknown profile kind '{other}'"))),
    };
    if let Some(extra) = b.lines.next() {
        return Err(malformed(format!("unexpected line '{extra}'")));
    }
    profile.validate().map_err(|e| malformed(e.to_string()))?;
    Ok(profile)
}

pub fn save_profile(profile: &CalibrationProfile, path: &Path) -> Result<()> {
    std::fs::write(path, profile_to_string(profile)?)?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<CalibrationProfile> {
    profile_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_trace() -> SessionTrace {
        let mut t = SessionTrace::new(TraceMeta { sensor: "cam".into(), persona: "p".into(), seed: 7, fps: 30.0 });
        for i in 0..5 {
            let mut s = HeadPoseSample::from_pose(i as f64 * 1000.0 / 30.0, 0.1 * i as f64, -0.3);
            s.face_area_px2 = 100.0;
            t.push(s, if i % 2 == 0 { Some(Region::new(3).unwrap()) } else { None });
        }
        t.probes = vec![t.samples[2].t_ms];
        t
    }

    #[test]
    fn trace_round_trip() {
        let t = small_trace();
        let text = trace_to_string(&t).unwrap();
        assert!(text.starts_with("#gazetrace v1 sensor=cam persona=p seed=7 fps=30\n"));
        let back = trace_from_str(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(trace_to_string(&back).unwrap(), text);
    }

    #[test]
    fn empty_trace_is_header_only() {
        let t = SessionTrace::new(TraceMeta::default());
        let text = trace_to_string(&t).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(trace_from_str(&text).unwrap(), t);
    }

    #[test]
    fn trace_errors_carry_line_numbers() {
        let text = trace_to_string(&small_trace()).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(2, 3);
        match trace_from_str(&lines.join("\n")) {
            Err(Error::Ordering { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let broken = text.replacen(" 3 ", " 9 ", 1);
        assert!(matches!(trace_from_str(&broken), Err(Error::Format { line: 2, .. })));
        let v2 = text.replacen("v1", "v2", 1);
        assert!(matches!(trace_from_str(&v2), Err(Error::Version { .. })));
    }

    fn m1() -> CalibrationProfile {
        CalibrationProfile::Method1(Method1Profile {
            dx00: 0.1 + 0.2,
            dy00: -1e-300,
            sx_pos: 0.7,
            sx_neg: -0.6999999999999999,
            sy_pos: 1.0 / 3.0,
            sy_neg: -std::f64::consts::PI,
        })
    }

    #[test]
    fn method1_round_trip_and_errors() {
        let text = profile_to_string(&m1()).unwrap();
        assert_eq!(profile_from_str(&text).unwrap(), m1());
        let cut = &text[..text.len() / 2];
        assert!(matches!(profile_from_str(cut), Err(Error::Malformed(_))));
        let tampered = text.replacen("kind method1\ndx00 3", "kind method1\ndx00 4", 1);
        assert!(matches!(profile_from_str(&tampered), Err(Error::Checksum { .. })));
        let v9 = text.replacen("v1", "v9", 1);
        assert!(matches!(profile_from_str(&v9), Err(Error::Version { .. })));
    }

    #[test]
    fn method2_round_trip() {
        let p = CalibrationProfile::Method2(Method2Profile {
            border_dx: (0..12).map(|i| i as f64 * 1.1).collect(),
            border_dy: (0..11).map(|i| -(i as f64) / 7.0).collect(),
            dx00: 0.5,
            dy00: -0.25,
        });
        assert_eq!(profile_from_str(&profile_to_string(&p).unwrap()).unwrap(), p);
    }
}
