use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cnn::{cnn_loss, Architecture, Mode, Network};
use super::keypoints::Keypoints;
use super::voxel::InputTensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub dropout_rate: f64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 100,
            epochs: 40,
            seed: 7,
            dropout_rate: 0.2,
            optimizer: Optimizer::Adam,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!("learning rate {} must be >= 0", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!("dropout rate {} must be in [0, 1)", self.dropout_rate)));
        }
        Ok(())
    }
}

/// Gradients are accumulated over fixed chunks of a batch and the chunk
/// sums added in order, so results do not depend on the thread count.
const CHUNK: usize = 10;

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(net: &Network) -> Self {
        let zeros: Vec<Vec<f64>> = net.tensors().iter().map(|(_, t)| vec![0.0; t.len()]).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, grad: &Network, lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for (((p, (_, g)), m), v) in net
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for i in 0..p.len() {
                m[i] = B1 * m[i] + (1.0 - B1) * g[i];
                v[i] = B2 * v[i] + (1.0 - B2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + EPS);
            }
        }
    }
}

/// He-uniform init with the output biases set to the mean training label,
/// so optimization starts from the average pose.
pub fn init_network(arch: &Architecture, data: &[(InputTensor, Keypoints)], seed: u64) -> Result<Network> {
    let mut net = Network::init(arch, seed)?;
    if !data.is_empty() && arch.outputs == 51 {
        let mut mean = vec![0.0; 51];
        for (_, k) in data {
            mean.iter_mut().zip(k.to_flat()).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= data.len() as f64);
        net.fc2.b = mean;
    }
    Ok(net)
}

/// Mini-batch training; returns the network and the mean loss per epoch.
pub fn train(
    arch: &Architecture,
    data: &[(InputTensor, Keypoints)],
    cfg: &TrainConfig,
) -> Result<(Network, Vec<f64>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    let net = init_network(arch, data, cfg.seed)?;
    train_from(net, data, cfg)
}

/// Continues training `net`.
pub fn train_from(
    mut net: Network,
    data: &[(InputTensor, Keypoints)],
    cfg: &TrainConfig,
) -> Result<(Network, Vec<f64>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut adam = Adam::new(&net);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut sample_counter: u64 = 0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let base = sample_counter;
            sample_counter += batch.len() as u64;
            let mode = |k: usize| {
                if cfg.dropout_rate > 0.0 {
                    Mode::Train {
                        dropout: cfg.dropout_rate,
                        seed: cfg.seed.wrapping_add((base + k as u64).wrapping_mul(0x2545_f491_4f6c_dd1d)),
                    }
                } else {
                    Mode::Eval
                }
            };
            let parts: Vec<Result<(f64, Network)>> = batch
                .par_chunks(CHUNK)
                .enumerate()
                .map(|(ci, chunk)| {
                    let mut acc = Network::zeros(&net.arch)?;
                    let mut loss = 0.0;
                    for (j, &i) in chunk.iter().enumerate() {
                        let (l, g) = net.gradients(&data[i].0, &data[i].1, mode(ci * CHUNK + j))?;
                        loss += l;
                        acc.add_scaled(&g, 1.0);
                    }
                    Ok((loss, acc))
                })
                .collect();
            let mut grad = Network::zeros(&net.arch)?;
            for part in parts {
                let (l, g) = part?;
                epoch_loss += l;
                grad.add_scaled(&g, 1.0);
            }
            let scale = 1.0 / batch.len() as f64;
            for t in grad.tensors_mut() {
                t.iter_mut().for_each(|v| *v *= scale);
            }
            match cfg.optimizer {
                Optimizer::Adam => adam.step(&mut net, &grad, cfg.learning_rate),
                Optimizer::Sgd => net.add_scaled(&grad, -cfg.learning_rate),
            }
        }
        let mean = epoch_loss / data.len() as f64;
        history.push(mean);
        let finite = mean.is_finite() && net.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::Diverged { epoch, history });
        }
        log::debug!("epoch {epoch}: loss {mean:.6}");
    }
    Ok((net, history))
}

/// Mean loss of the network in evaluation mode.
pub fn evaluate(net: &Network, data: &[(InputTensor, Keypoints)]) -> Result<f64> {
    let losses: Result<Vec<f64>> = data
        .par_iter()
        .map(|(x, k)| Ok(cnn_loss(&net.predict(x)?, k).0))
        .collect();
    let losses = losses?;
    Ok(losses.iter().sum::<f64>() / losses.len().max(1) as f64)
}
