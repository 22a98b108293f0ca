use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::region::{Region, REGION_COUNT};

use super::MlpConfig;

/// `beta * tanh(alpha * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricSigmoid {
    pub alpha: f64,
    pub beta: f64,
}

impl SymmetricSigmoid {
    pub fn eval(&self, x: f64) -> f64 {
        self.beta * (self.alpha * x).tanh()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = (self.alpha * x).tanh();
        self.alpha * self.beta * (1.0 - t * t)
    }
}

/// One `k -> hidden -> 1` network. Parameters are stored flat as
/// `[w1 (hidden x k, row-major), b1 (hidden), w2 (hidden), b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMlp {
    pub input_dim: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
    pub iterations: usize,
    pub final_loss: f64,
}

impl BinaryMlp {
    pub fn param_count(input_dim: usize, hidden: usize) -> usize {
        hidden * input_dim + 2 * hidden + 1
    }

    pub fn from_params(input_dim: usize, hidden: usize, params: Vec<f64>) -> Result<Self> {
        if params.len() != Self::param_count(input_dim, hidden) {
            return Err(Error::invalid(format!(
                "network {input_dim}x{hidden} needs {} parameters, got {}",
                Self::param_count(input_dim, hidden),
                params.len()
            )));
        }
        Ok(Self { input_dim, hidden, params, iterations: 0, final_loss: f64::NAN })
    }

    /// Uniform in `±1/sqrt(fan_in)` per layer; exact zeros are redrawn.
    pub fn init(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let n1 = hidden * input_dim + hidden;
        let r1 = 1.0 / (input_dim as f64).sqrt();
        let r2 = 1.0 / (hidden as f64).sqrt();
        let params = (0..Self::param_count(input_dim, hidden))
            .map(|i| {
                let r = if i < n1 { r1 } else { r2 };
                loop {
                    let v = rng.random_range(-r..r);
                    if v != 0.0 {
                        break v;
                    }
                }
            })
            .collect();
        Self { input_dim, hidden, params, iterations: 0, final_loss: f64::NAN }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], f64) {
        let (h, k) = (self.hidden, self.input_dim);
        let (w1, rest) = self.params.split_at(h * k);
        let (b1, rest) = rest.split_at(h);
        let (w2, rest) = rest.split_at(h);
        (w1, b1, w2, rest[0])
    }

    pub fn output(&self, x: &[f64], act: SymmetricSigmoid) -> f64 {
        let (w1, b1, w2, b2) = self.split();
        let mut z = b2;
        for j in 0..self.hidden {
            let row = &w1[j * self.input_dim..(j + 1) * self.input_dim];
            let a: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[j];
            z += w2[j] * act.eval(a);
        }
        act.eval(z)
    }

    /// Mean squared error over the batch and its gradient w.r.t. `params`.
    pub fn loss_and_grad(&self, xs: &[Vec<f64>], ts: &[f64], act: SymmetricSigmoid) -> (f64, Vec<f64>) {
        let (h, k) = (self.hidden, self.input_dim);
        let (w1, b1, w2, b2) = self.split();
        let mut grad = vec![0.0; self.params.len()];
        let n = xs.len().max(1) as f64;
        let mut loss = 0.0;
        let mut za = vec![0.0; h];
        let mut ha = vec![0.0; h];
        for (x, &t) in xs.iter().zip(ts) {
            let mut z = b2;
            for j in 0..h {
                za[j] = w1[j * k..(j + 1) * k].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[j];
                ha[j] = act.eval(za[j]);
                z += w2[j] * ha[j];
            }
            let o = act.eval(z);
            let e = o - t;
            loss += e * e;
            let d_out = 2.0 * e / n * act.derivative(z);
            let (g1, rest) = grad.split_at_mut(h * k);
            let (gb1, rest) = rest.split_at_mut(h);
            let (gw2, gb2) = rest.split_at_mut(h);
            gb2[0] += d_out;
            for j in 0..h {
                gw2[j] += d_out * ha[j];
                let d_h = d_out * w2[j] * act.derivative(za[j]);
                gb1[j] += d_h;
                for (g, v) in g1[j * k..(j + 1) * k].iter_mut().zip(x) {
                    *g += d_h * v;
                }
            }
        }
        (loss / n, grad)
    }

    /// Batch gradient descent with momentum. Stops after `max_iters` epochs or
    /// once the loss improves by less than `epsilon` between epochs.
    pub fn train(&mut self, xs: &[Vec<f64>], ts: &[f64], cfg: &MlpConfig) -> Result<()> {
        let act = SymmetricSigmoid { alpha: cfg.alpha, beta: cfg.beta };
        let mut velocity = vec![0.0; self.params.len()];
        let mut prev = f64::INFINITY;
        for iter in 0..cfg.max_iters {
            let (loss, grad) = self.loss_and_grad(xs, ts, act);
            if !loss.is_finite() {
                return Err(Error::Training(format!("loss became non-finite at iteration {iter}")));
            }
            self.iterations = iter;
            self.final_loss = loss;
            if prev - loss < cfg.epsilon {
                return Ok(());
            }
            prev = loss;
            for ((p, v), g) in self.params.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = cfg.weight_momentum * *v - cfg.gradient_strength * g;
                *p += *v;
            }
        }
        self.iterations = cfg.max_iters;
        self.final_loss = self.loss_and_grad(xs, ts, act).0;
        Ok(())
    }
}

/// Seven one-vs-rest networks; the prediction is the arg-max output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub input_dim: usize,
    pub hidden: usize,
    pub activation: SymmetricSigmoid,
    pub nets: Vec<BinaryMlp>,
}

impl MlpModel {
    pub fn train(xs: &[Vec<f64>], ys: &[Region], cfg: &MlpConfig, seed: u64) -> Result<Self> {
        let input_dim = xs.first().map(Vec::len).ok_or_else(|| Error::Training("empty training set".into()))?;
        if input_dim == 0 || xs.iter().any(|x| x.len() != input_dim) {
            return Err(Error::Training("inconsistent feature width".into()));
        }
        if xs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Training("training patterns contain non-finite values".into()));
        }
        let nets = (0..REGION_COUNT)
            .into_par_iter()
            .map(|c| {
                let region = Region::from_index(c);
                let ts: Vec<f64> = ys.iter().map(|&y| if y == region { 1.0 } else { -1.0 }).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let mut net = BinaryMlp::init(input_dim, cfg.hidden, &mut rng);
                net.train(xs, &ts, cfg)
                    .map_err(|e| Error::Training(format!("network for region {region}: {e}")))?;
                Ok(net)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { input_dim, hidden: cfg.hidden, activation: SymmetricSigmoid { alpha: cfg.alpha, beta: cfg.beta }, nets })
    }

    pub fn outputs(&self, x: &[f64]) -> Vec<f64> {
        self.nets.iter().map(|n| n.output(x, self.activation)).collect()
    }

    /// Arg-max over network outputs, ties to the lowest region.
    pub fn predict(&self, x: &[f64]) -> Region {
        let out = self.outputs(x);
        let mut best = 0;
        for (i, v) in out.iter().enumerate() {
            if *v > out[best] {
                best = i;
            }
        }
        Region::from_index(best)
    }
}
