//! Gaze regions and the rule tables that partition the screen into them.
//!
//! A layout is an ordered list of rules. Each rule is a conjunction of strict
//! half-plane tests on the screen-normalized displacement `(dx / w, dy / h)`;
//! the first rule that matches names the region, and anything left over falls
//! to the default region. This makes classification a total function.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGION_COUNT: usize = 7;

/// One of the seven scene regions, numbered 1 to 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Region(u8);

impl Region {
    pub const CENTER: Region = Region(1);

    pub fn new(id: u8) -> Result<Self> {
        if (1..=REGION_COUNT as u8).contains(&id) {
            Ok(Region(id))
        } else {
            Err(Error::invalid(format!("region id {id} outside 1..=7")))
        }
    }

    /// Region from a 0-based index. Panics outside `0..7`.
    pub fn from_index(idx: usize) -> Self {
        assert!(idx < REGION_COUNT, "region index {idx} out of range");
        Region(idx as u8 + 1)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = Region> {
        (1..=REGION_COUNT as u8).map(Region)
    }
}

impl TryFrom<u8> for Region {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Region::new(v)
    }
}

impl From<Region> for u8 {
    fn from(r: Region) -> u8 {
        r.0
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cmp {
    /// value > bound
    Gt,
    /// value < bound
    Lt,
}

impl Cmp {
    #[inline]
    pub fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Cmp::Gt => value > bound,
            Cmp::Lt => value < bound,
        }
    }
}

/// Strict half-plane test on one normalized axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub axis: Axis,
    pub op: Cmp,
    pub value: f64,
}

impl HalfPlane {
    pub const fn new(axis: Axis, op: Cmp, value: f64) -> Self {
        Self { axis, op, value }
    }

    #[inline]
    pub fn holds(&self, u: f64, v: f64) -> bool {
        let x = match self.axis {
            Axis::X => u,
            Axis::Y => v,
        };
        self.op.holds(x, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRule {
    pub region: Region,
    pub bounds: Vec<HalfPlane>,
}

impl RegionRule {
    #[inline]
    pub fn matches(&self, u: f64, v: f64) -> bool {
        self.bounds.iter().all(|b| b.holds(u, v))
    }
}

/// Normalized screen position `(dx / w, dy / h)`; x grows rightwards, y upwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormPoint {
    pub x: f64,
    pub y: f64,
}

impl NormPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Ordered first-match rule table plus the gaze target used for each region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLayout {
    pub rules: Vec<RegionRule>,
    pub default_region: Region,
    /// Point a driver fixates when looking at each region, indexed by
    /// `Region::index()`.
    pub centers: Vec<NormPoint>,
}

const fn hp(axis: Axis, op: Cmp, value: f64) -> HalfPlane {
    HalfPlane::new(axis, op, value)
}

impl RegionLayout {
    /// Shipped layout.
    ///
    /// | region | area                       | bounds (x = dx/w, y = dy/h)          |
    /// |--------|----------------------------|--------------------------------------|
    /// | 3      | rear-view mirror           | 0.20 < x < 0.35, 0.10 < y < 0.30     |
    /// | 4      | left mirror                | x < -0.30, -0.20 < y < 0.10          |
    /// | 4      | left door glass            | x < -0.30, y > 0.10                  |
    /// | 2      | speedometer (below mirror) | x < -0.30, y < -0.20                 |
    /// | 2      | speedometer                | x < -0.15, y < -0.20                 |
    /// | 5      | steering wheel             | -0.15 < x < 0.10, y < -0.20          |
    /// | 6      | rpm / gear                 | 0.10 < x < 0.30, y < -0.20           |
    /// | 7      | right dashboard            | x > 0.30, y < -0.20                  |
    /// | 7      | right side                 | x > 0.30, y < 0.10                   |
    /// | 1      | everything else            | default                              |
    pub fn standard() -> Self {
        use Axis::{X, Y};
        use Cmp::{Gt, Lt};
        let r = |id: u8| Region(id);
        let rules = vec![
            RegionRule { region: r(3), bounds: vec![hp(X, Gt, 0.20), hp(X, Lt, 0.35), hp(Y, Gt, 0.10), hp(Y, Lt, 0.30)] },
            RegionRule { region: r(4), bounds: vec![hp(X, Lt, -0.30), hp(Y, Gt, -0.20), hp(Y, Lt, 0.10)] },
            RegionRule { region: r(4), bounds: vec![hp(X, Lt, -0.30), hp(Y, Gt, 0.10)] },
            RegionRule { region: r(2), bounds: vec![hp(X, Lt, -0.30), hp(Y, Lt, -0.20)] },
            RegionRule { region: r(2), bounds: vec![hp(X, Lt, -0.15), hp(Y, Lt, -0.20)] },
            RegionRule { region: r(5), bounds: vec![hp(X, Gt, -0.15), hp(X, Lt, 0.10), hp(Y, Lt, -0.20)] },
            RegionRule { region: r(6), bounds: vec![hp(X, Gt, 0.10), hp(X, Lt, 0.30), hp(Y, Lt, -0.20)] },
            RegionRule { region: r(7), bounds: vec![hp(X, Gt, 0.30), hp(Y, Lt, -0.20)] },
            RegionRule { region: r(7), bounds: vec![hp(X, Gt, 0.30), hp(Y, Lt, 0.10)] },
        ];
        let centers = vec![
            NormPoint::new(0.0, 0.0),
            NormPoint::new(-0.325, -0.35),
            NormPoint::new(0.275, 0.20),
            NormPoint::new(-0.40, -0.05),
            NormPoint::new(-0.025, -0.35),
            NormPoint::new(0.20, -0.35),
            NormPoint::new(0.40, -0.20),
        ];
        Self { rules, default_region: Region::CENTER, centers }
    }

    /// First-match classification of a normalized displacement.
    pub fn classify(&self, u: f64, v: f64) -> Region {
        self.rules
            .iter()
            .find(|rule| rule.matches(u, v))
            .map_or(self.default_region, |rule| rule.region)
    }

    pub fn center(&self, region: Region) -> NormPoint {
        self.centers[region.index()]
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.len() != REGION_COUNT {
            return Err(Error::Config(format!(
                "layout needs {REGION_COUNT} region centers, found {}",
                self.centers.len()
            )));
        }
        for rule in &self.rules {
            if rule.bounds.iter().any(|b| !b.value.is_finite()) {
                return Err(Error::Config(format!("rule for region {} has a non-finite bound", rule.region)));
            }
        }
        for region in Region::all() {
            let c = self.center(region);
            let got = self.classify(c.x, c.y);
            if got != region {
                return Err(Error::Config(format!(
                    "center of region {region} at ({}, {}) classifies as region {got}",
                    c.x, c.y
                )));
            }
        }
        Ok(())
    }

    /// Sorted distinct bound values along one axis.
    pub fn breakpoints(&self, axis: Axis) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .rules
            .iter()
            .flat_map(|r| r.bounds.iter())
            .filter(|b| b.axis == axis)
            .map(|b| b.value)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

impl Default for RegionLayout {
    fn default() -> Self {
        Self::standard()
    }
}
