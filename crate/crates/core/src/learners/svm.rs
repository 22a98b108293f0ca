use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::region::{Region, REGION_COUNT};

use super::SvmConfig;

const TAU: f64 = 1e-12;

/// Linear soft-margin SVM solved in the dual with SMO (maximal violating pair).
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub w: Vec<f64>,
    pub b: f64,
    pub alpha: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Labels must be ±1.
pub fn train_binary_svm(xs: &[Vec<f64>], ys: &[f64], cfg: &SvmConfig) -> Result<BinarySvm> {
    let n = xs.len();
    if n == 0 || ys.len() != n {
        return Err(Error::Training("SVM needs a non-empty training set".into()));
    }
    if !ys.contains(&1.0) || !ys.contains(&-1.0) {
        return Err(Error::Training("SVM needs both classes".into()));
    }
    let c = cfg.c;
    let k: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dot(&xs[i], &xs[j])).collect()).collect();
    let q = |i: usize, j: usize| ys[i] * ys[j] * k[i][j];
    let mut a = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -ys[t] * g[t];
            let up = (ys[t] > 0.0 && a[t] < c) || (ys[t] < 0.0 && a[t] > 0.0);
            let low = (ys[t] > 0.0 && a[t] > 0.0) || (ys[t] < 0.0 && a[t] < c);
            if up && v > gmax {
                gmax = v;
                i = t;
            }
            if low && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < cfg.epsilon {
            converged = true;
            break;
        }
        iterations += 1;
        let (old_i, old_j) = (a[i], a[j]);
        if ys[i] != ys[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-g[i] - g[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (g[i] - g[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }
        let (di, dj) = (a[i] - old_i, a[j] - old_j);
        for t in 0..n {
            g[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    // bias from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * g[t];
        if a[t] >= c {
            if ys[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if a[t] <= 0.0 {
            if ys[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    let dim = xs[0].len();
    let mut w = vec![0.0; dim];
    for t in 0..n {
        for (wd, xd) in w.iter_mut().zip(&xs[t]) {
            *wd += a[t] * ys[t] * xd;
        }
    }
    if w.iter().any(|v| !v.is_finite()) || !rho.is_finite() {
        return Err(Error::Training("SVM solution is non-finite".into()));
    }
    Ok(BinarySvm { w, b: -rho, alpha: a, iterations, converged })
}

/// Classifier separating region `pos` (+1) from region `neg` (-1).
#[derive(Debug, Clone, PartialEq)]
pub struct PairSvm {
    pub pos: Region,
    pub neg: Region,
    pub svm: BinarySvm,
}

/// One-vs-one ensemble over every pair of regions present in training.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub input_dim: usize,
    pub pairs: Vec<PairSvm>,
}

impl SvmModel {
    pub fn train(xs: &[Vec<f64>], ys: &[Region], cfg: &SvmConfig) -> Result<Self> {
        let input_dim = xs.first().map(Vec::len).ok_or_else(|| Error::Training("empty training set".into()))?;
        if input_dim == 0 || xs.iter().any(|x| x.len() != input_dim) {
            return Err(Error::Training("inconsistent feature width".into()));
        }
        if xs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Training("training patterns contain non-finite values".into()));
        }
        let present: Vec<Region> = Region::all().filter(|r| ys.contains(r)).collect();
        if present.len() < 2 {
            return Err(Error::Training("SVM needs at least two regions".into()));
        }
        let mut jobs = Vec::new();
        for (i, &p) in present.iter().enumerate() {
            for &q in &present[i + 1..] {
                jobs.push((p, q));
            }
        }
        let pairs = jobs
            .into_par_iter()
            .map(|(pos, neg)| {
                let (px, py): (Vec<Vec<f64>>, Vec<f64>) = Self::pair_subset(xs, ys, pos, neg);
                let svm = train_binary_svm(&px, &py, cfg)
                    .map_err(|e| Error::Training(format!("pair {pos}/{neg}: {e}")))?;
                Ok(PairSvm { pos, neg, svm })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { input_dim, pairs })
    }

    /// Patterns of the two regions in original order, labeled ±1.
    pub fn pair_subset(xs: &[Vec<f64>], ys: &[Region], pos: Region, neg: Region) -> (Vec<Vec<f64>>, Vec<f64>) {
        xs.iter()
            .zip(ys)
            .filter(|(_, y)| **y == pos || **y == neg)
            .map(|(x, y)| (x.clone(), if *y == pos { 1.0 } else { -1.0 }))
            .unzip()
    }

    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.svm.converged)
    }

    pub fn votes(&self, x: &[f64]) -> [usize; REGION_COUNT] {
        let mut votes = [0usize; REGION_COUNT];
        for p in &self.pairs {
            let winner = if p.svm.decision(x) > 0.0 { p.pos } else { p.neg };
            votes[winner.index()] += 1;
        }
        votes
    }

    /// Majority vote, ties to the lowest region.
    pub fn predict(&self, x: &[f64]) -> Region {
        let votes = self.votes(x);
        let mut best = 0;
        for (i, v) in votes.iter().enumerate() {
            if *v > votes[best] {
                best = i;
            }
        }
        Region::from_index(best)
    }
}
