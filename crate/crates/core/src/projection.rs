//! Head-angle to screen-displacement geometry and the two rule-based
//! estimators (static and adapted decision makers) with their calibrations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SceneGeometry;
use crate::profile::{Method1Profile, Method2Profile, BORDER_X_POINTS, BORDER_Y_POINTS};
use crate::region::{Cmp, NormPoint, Region, REGION_COUNT};
use crate::sample::HeadPoseSample;
use crate::trace::SessionTrace;

/// Leading part of every calibration dwell that is ignored as head transit.
pub const TRANSIT_DISCARD_MS: f64 = 500.0;
/// Post-transit span each calibration dwell must cover.
pub const MIN_POST_TRANSIT_MS: f64 = 1000.0;

/// Signed on-screen displacement from the screen center, cm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Displacement {
    pub dx_cm: f64,
    pub dy_cm: f64,
}

impl Displacement {
    pub const ZERO: Displacement = Displacement { dx_cm: 0.0, dy_cm: 0.0 };

    pub const fn new(dx_cm: f64, dy_cm: f64) -> Self {
        Self { dx_cm, dy_cm }
    }

    fn check_finite(&self) -> Result<()> {
        if self.dx_cm.is_finite() && self.dy_cm.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("displacement ({}, {}) is not finite", self.dx_cm, self.dy_cm)))
        }
    }
}

/// `dx = tan(yaw) * d`, `dy = tan(pitch) * d`.
pub fn angular_displacement(yaw_deg: f64, pitch_deg: f64, d_cm: f64) -> Result<Displacement> {
    if !(d_cm.is_finite() && d_cm > 0.0) {
        return Err(Error::invalid(format!("distance must be positive, got {d_cm}")));
    }
    for (name, a) in [("yaw", yaw_deg), ("pitch", pitch_deg)] {
        if !(a.is_finite() && a.abs() < 90.0) {
            return Err(Error::invalid(format!("{name} {a} deg is outside (-90, 90)")));
        }
    }
    Ok(Displacement::new(
        yaw_deg.to_radians().tan() * d_cm,
        pitch_deg.to_radians().tan() * d_cm,
    ))
}

/// Horizontal field of view subtended by a screen of width `w_cm` at `d_cm`.
pub fn horizontal_fov(w_cm: f64, d_cm: f64) -> Result<f64> {
    if !(d_cm.is_finite() && d_cm > 0.0) {
        return Err(Error::invalid(format!("distance must be positive, got {d_cm}")));
    }
    if !(w_cm.is_finite() && w_cm >= 0.0) {
        return Err(Error::invalid(format!("width must be non-negative, got {w_cm}")));
    }
    Ok(2.0 * (w_cm / (2.0 * d_cm)).atan().to_degrees())
}

/// Subtract the central-gaze displacement.
pub fn center_offset(disp: Displacement, center_ref: Displacement) -> Result<Displacement> {
    disp.check_finite()?;
    center_ref.check_finite()?;
    Ok(Displacement::new(disp.dx_cm - center_ref.dx_cm, disp.dy_cm - center_ref.dy_cm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    /// Divide by `|s|`, so each border calibration point lands on its screen edge.
    #[default]
    Corrective,
    /// Multiply by the signed factor, literally.
    AsWritten,
}

impl std::str::FromStr for ScalingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrective" => Ok(ScalingMode::Corrective),
            "as-written" => Ok(ScalingMode::AsWritten),
            other => Err(Error::invalid(format!("unknown scaling mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactors {
    pub sx_pos: f64,
    pub sx_neg: f64,
    pub sy_pos: f64,
    pub sy_neg: f64,
}

/// Scale factors from the centered displacements of the right, left, top
/// and bottom border points (`pt1..pt4`).
pub fn fit_scaling(border: [Displacement; 4], geometry: &SceneGeometry) -> Result<ScaleFactors> {
    let half_w = geometry.screen_w_cm / 2.0;
    let half_h = geometry.screen_h_cm / 2.0;
    let [pt1, pt2, pt3, pt4] = border;
    let checks = [
        ("pt1", pt1.dx_cm, true, "x displacement must be positive (right border)"),
        ("pt2", pt2.dx_cm, false, "x displacement must be negative (left border)"),
        ("pt3", pt3.dy_cm, true, "y displacement must be positive (top border)"),
        ("pt4", pt4.dy_cm, false, "y displacement must be negative (bottom border)"),
    ];
    for (name, v, positive, msg) in checks {
        let ok = v.is_finite() && if positive { v > 0.0 } else { v < 0.0 };
        if !ok {
            return Err(Error::calibration(name, format!("{msg}, got {v:.4} cm")));
        }
    }
    Ok(ScaleFactors {
        sx_pos: pt1.dx_cm / half_w,
        sx_neg: pt2.dx_cm / half_w,
        sy_pos: pt3.dy_cm / half_h,
        sy_neg: pt4.dy_cm / half_h,
    })
}

fn scale_axis(v: f64, pos: f64, neg: f64, mode: ScalingMode) -> f64 {
    let s = if v > 0.0 {
        pos
    } else if v < 0.0 {
        neg
    } else {
        return v;
    };
    match mode {
        ScalingMode::Corrective => v / s.abs(),
        ScalingMode::AsWritten => v * s,
    }
}

/// Rescale a centered displacement by the calibrated head coverage.
pub fn apply_scaling(disp: Displacement, profile: &Method1Profile, mode: ScalingMode) -> Result<Displacement> {
    let factors = [profile.sx_pos, profile.sx_neg, profile.sy_pos, profile.sy_neg];
    if factors.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return Err(Error::invalid("scale factors must be finite and non-zero"));
    }
    Ok(Displacement::new(
        scale_axis(disp.dx_cm, profile.sx_pos, profile.sx_neg, mode),
        scale_axis(disp.dy_cm, profile.sy_pos, profile.sy_neg, mode),
    ))
}

/// Static decision maker: the layout's rule table on `(dx / w, dy / h)`.
pub fn static_decide(disp: Displacement, geometry: &SceneGeometry) -> Region {
    geometry
        .layout
        .classify(disp.dx_cm / geometry.screen_w_cm, disp.dy_cm / geometry.screen_h_cm)
}

/// Samples captured while fixating one calibration point.
///
/// Point 0 is the screen center; method 1 uses points 1..=4 (right, left,
/// top, bottom), method 2 uses points 1..=23 of its rule table.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationDwell {
    pub point_id: u8,
    pub samples: Vec<HeadPoseSample>,
}

impl CalibrationDwell {
    /// Mean displacement over the post-transit part of the dwell.
    pub fn aggregate(&self, d_cm: f64) -> Result<Displacement> {
        let name = point_name(self.point_id);
        let Some(first) = self.samples.first() else {
            return Err(Error::calibration(&name, "dwell has no samples"));
        };
        let cutoff = first.t_ms + TRANSIT_DISCARD_MS;
        let kept: Vec<&HeadPoseSample> = self.samples.iter().filter(|s| s.t_ms >= cutoff).collect();
        let Some(last) = kept.last() else {
            return Err(Error::calibration(&name, "no samples left after discarding head transit"));
        };
        let span = last.t_ms - cutoff;
        // one frame of slack: a 1 s post-transit window sampled at any rate
        let frame = if kept.len() > 1 { (last.t_ms - kept[0].t_ms) / (kept.len() - 1) as f64 } else { 0.0 };
        if span + frame < MIN_POST_TRANSIT_MS {
            return Err(Error::calibration(
                &name,
                format!("dwell too short: {span:.0} ms after transit, need {MIN_POST_TRANSIT_MS:.0} ms"),
            ));
        }
        let mut sum = Displacement::ZERO;
        for s in &kept {
            let d = angular_displacement(s.yaw_deg, s.pitch_deg, d_cm)
                .map_err(|e| Error::calibration(&name, e.to_string()))?;
            sum.dx_cm += d.dx_cm;
            sum.dy_cm += d.dy_cm;
        }
        let n = kept.len() as f64;
        Ok(Displacement::new(sum.dx_cm / n, sum.dy_cm / n))
    }

    /// Split a calibration trace into dwells numbered in protocol order
    /// (center first, then points 1, 2, ...).
    pub fn from_trace(trace: &SessionTrace, expected: usize) -> Result<Vec<CalibrationDwell>> {
        let dwells = trace.dwells();
        if dwells.len() != expected {
            return Err(Error::calibration(
                "trace",
                format!("expected {expected} dwell markers, found {}", dwells.len()),
            ));
        }
        Ok(dwells
            .into_iter()
            .enumerate()
            .map(|(i, d)| CalibrationDwell { point_id: i as u8, samples: d.samples.to_vec() })
            .collect())
    }
}

fn point_name(id: u8) -> String {
    if id == 0 { "center".to_string() } else { id.to_string() }
}

fn aggregate_points(dwells: &[CalibrationDwell], count: u8, d_cm: f64) -> Result<Vec<Displacement>> {
    (0..=count)
        .map(|id| {
            dwells
                .iter()
                .find(|d| d.point_id == id)
                .ok_or_else(|| Error::calibration(point_name(id), "missing calibration dwell"))?
                .aggregate(d_cm)
        })
        .collect()
}

/// Five-point calibration: center plus right, left, top and bottom borders.
pub fn calibrate_method1(dwells: &[CalibrationDwell], geometry: &SceneGeometry) -> Result<Method1Profile> {
    let pts = aggregate_points(dwells, 4, geometry.distance_cm)?;
    let center = pts[0];
    let mut border = [Displacement::ZERO; 4];
    for (slot, p) in border.iter_mut().zip(&pts[1..]) {
        *slot = center_offset(*p, center)?;
    }
    let s = fit_scaling(border, geometry)?;
    Ok(Method1Profile {
        dx00: center.dx_cm,
        dy00: center.dy_cm,
        sx_pos: s.sx_pos,
        sx_neg: s.sx_neg,
        sy_pos: s.sy_pos,
        sy_neg: s.sy_neg,
    })
}

/// Method-1 estimate for one sample.
pub fn method1_estimate(
    sample: &HeadPoseSample,
    profile: &Method1Profile,
    geometry: &SceneGeometry,
    mode: ScalingMode,
) -> Result<Region> {
    let raw = angular_displacement(sample.yaw_deg, sample.pitch_deg, geometry.distance_cm)?;
    let centered = center_offset(raw, Displacement::new(profile.dx00, profile.dy00))?;
    let scaled = apply_scaling(centered, profile, mode)?;
    Ok(static_decide(scaled, geometry))
}

/// One bound of an adapted rule: compare against the calibrated displacement
/// of `point` (x for points 1..=12, y for 13..=23).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointBound {
    pub point: u8,
    pub op: Cmp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedRule {
    pub region: Region,
    pub bounds: Vec<PointBound>,
}

/// Rule table for the adapted decision maker together with where each of
/// the 23 border points sits on screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedRuleTable {
    /// Screen position of points 1..=23 (index 0 is point 1).
    pub points: Vec<NormPoint>,
    pub rules: Vec<AdaptedRule>,
    pub default_region: Region,
}

impl Default for AdaptedRuleTable {
    fn default() -> Self {
        Self::standard()
    }
}

impl AdaptedRuleTable {
    /// Default table; every bound mirrors the corresponding bound of
    /// [`crate::region::RegionLayout::standard`], with the point placed on
    /// that border.
    ///
    /// ```text
    /// x points: 1 -0.30  2 -0.30  3 -0.15  4 -0.15  5 0.10  6 0.10
    ///           7  0.30  8  0.30  9  0.30 10 -0.30 11 0.20 12 0.35
    /// y points: 13 -0.20 14 0.10 15 -0.20 16 -0.20 17 -0.20 18 -0.20
    ///           19  0.10 20 -0.20 21 0.10 22 0.10 23 0.30
    /// ```
    pub fn standard() -> Self {
        let p = NormPoint::new;
        let points = vec![
            p(-0.30, -0.05), // 1  left mirror, inner edge
            p(-0.30, 0.30),  // 2  door glass, inner edge
            p(-0.15, -0.35), // 3  speedometer, right edge
            p(-0.15, -0.30), // 4  steering wheel, left edge
            p(0.10, -0.35),  // 5  steering wheel, right edge
            p(0.10, -0.30),  // 6  rpm, left edge
            p(0.30, -0.35),  // 7  rpm, right edge
            p(0.30, -0.30),  // 8  right dashboard, left edge
            p(0.30, -0.05),  // 9  right side, left edge
            p(-0.30, -0.35), // 10 speedometer below mirror, right edge
            p(0.20, 0.20),   // 11 rear-view mirror, left edge
            p(0.35, 0.20),   // 12 rear-view mirror, right edge
            p(-0.40, -0.20), // 13 left mirror, bottom edge
            p(-0.45, 0.10),  // 14 door glass, bottom edge
            p(-0.225, -0.20), // 15 speedometer, top edge
            p(-0.025, -0.20), // 16 steering wheel, top edge
            p(0.20, -0.20),  // 17 rpm, top edge
            p(0.40, -0.20),  // 18 right dashboard, top edge
            p(0.40, 0.10),   // 19 right side, top edge
            p(-0.35, -0.20), // 20 speedometer below mirror, top edge
            p(-0.40, 0.10),  // 21 left mirror, top edge
            p(0.275, 0.10),  // 22 rear-view mirror, bottom edge
            p(0.275, 0.30),  // 23 rear-view mirror, top edge
        ];
        let b = |point: u8, op: Cmp| PointBound { point, op };
        let r = |id: u8| Region::new(id).unwrap();
        use Cmp::{Gt, Lt};
        let rules = vec![
            AdaptedRule { region: r(3), bounds: vec![b(11, Gt), b(12, Lt), b(22, Gt), b(23, Lt)] },
            AdaptedRule { region: r(4), bounds: vec![b(1, Lt), b(13, Gt), b(21, Lt)] },
            AdaptedRule { region: r(4), bounds: vec![b(2, Lt), b(14, Gt)] },
            AdaptedRule { region: r(2), bounds: vec![b(10, Lt), b(20, Lt)] },
            AdaptedRule { region: r(2), bounds: vec![b(3, Lt), b(15, Lt)] },
            AdaptedRule { region: r(5), bounds: vec![b(4, Gt), b(5, Lt), b(16, Lt)] },
            AdaptedRule { region: r(6), bounds: vec![b(6, Gt), b(7, Lt), b(17, Lt)] },
            AdaptedRule { region: r(7), bounds: vec![b(8, Gt), b(18, Lt)] },
            AdaptedRule { region: r(7), bounds: vec![b(9, Gt), b(19, Lt)] },
        ];
        Self { points, rules, default_region: Region::CENTER }
    }

    pub fn validate(&self) -> Result<()> {
        let n = BORDER_X_POINTS + BORDER_Y_POINTS;
        if self.points.len() != n {
            return Err(Error::Config(format!("adapted table needs {n} points, found {}", self.points.len())));
        }
        for rule in &self.rules {
            if rule.bounds.iter().any(|b| b.point == 0 || b.point as usize > n) {
                return Err(Error::Config(format!("rule for region {} references an unknown point", rule.region)));
            }
        }
        if self.rules.iter().any(|r| r.region.index() >= REGION_COUNT) {
            return Err(Error::Config("rule region out of range".into()));
        }
        Ok(())
    }

    /// Screen position of a 1-based point.
    pub fn point(&self, id: u8) -> NormPoint {
        self.points[id as usize - 1]
    }
}

/// Border-point calibration: center plus the 23 points of the rule table.
/// Only the x displacement of points 1..=12 and the y displacement of
/// points 13..=23 are kept.
pub fn calibrate_method2(dwells: &[CalibrationDwell], geometry: &SceneGeometry) -> Result<Method2Profile> {
    let total = (BORDER_X_POINTS + BORDER_Y_POINTS) as u8;
    let pts = aggregate_points(dwells, total, geometry.distance_cm)?;
    let center = pts[0];
    let mut border_dx = Vec::with_capacity(BORDER_X_POINTS);
    let mut border_dy = Vec::with_capacity(BORDER_Y_POINTS);
    for (i, p) in pts[1..].iter().enumerate() {
        let c = center_offset(*p, center)?;
        if i < BORDER_X_POINTS {
            border_dx.push(c.dx_cm);
        } else {
            border_dy.push(c.dy_cm);
        }
    }
    Ok(Method2Profile { border_dx, border_dy, dx00: center.dx_cm, dy00: center.dy_cm })
}

/// Adapted decision maker on a centered displacement.
pub fn adapted_decide(disp: Displacement, profile: &Method2Profile, table: &AdaptedRuleTable) -> Region {
    table
        .rules
        .iter()
        .find(|rule| {
            rule.bounds.iter().all(|b| {
                let v = if (b.point as usize) <= BORDER_X_POINTS { disp.dx_cm } else { disp.dy_cm };
                b.op.holds(v, profile.bound(b.point))
            })
        })
        .map_or(table.default_region, |rule| rule.region)
}

/// Method-2 estimate for one sample.
pub fn method2_estimate(
    sample: &HeadPoseSample,
    profile: &Method2Profile,
    table: &AdaptedRuleTable,
    geometry: &SceneGeometry,
) -> Result<Region> {
    let raw = angular_displacement(sample.yaw_deg, sample.pitch_deg, geometry.distance_cm)?;
    let centered = center_offset(raw, Displacement::new(profile.dx00, profile.dy00))?;
    Ok(adapted_decide(centered, profile, table))
}
