use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::keypoints::{Keypoints, N_KEYPOINTS};
use super::voxel::{InputTensor, PLANES};
use crate::error::{Error, Result};

/// Layer sizes; the standard net is 2×32×32 → conv 32/64/128 → FC 128 → 51.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_side: usize,
    pub in_channels: usize,
    pub conv_depths: Vec<usize>,
    pub hidden: usize,
    pub outputs: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            input_side: 32,
            in_channels: PLANES,
            conv_depths: vec![32, 64, 128],
            hidden: 128,
            outputs: 3 * N_KEYPOINTS,
        }
    }
}

impl Architecture {
    /// Small variant used for finite-difference gradient checks.
    pub fn reduced() -> Self {
        Self {
            input_side: 8,
            conv_depths: vec![2, 2, 2],
            hidden: 8,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conv_depths.is_empty() || self.conv_depths.contains(&0) {
            return Err(Error::Config("conv depths must be non-empty and positive".into()));
        }
        if self.in_channels == 0 || self.hidden == 0 || self.outputs == 0 {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if self.input_side >> self.conv_depths.len() == 0 {
            return Err(Error::Config(format!(
                "input side {} vanishes after {} pooling stages",
                self.input_side,
                self.conv_depths.len()
            )));
        }
        Ok(())
    }

    /// Spatial side after pooling stage `l` (0 = input).
    pub fn side_at(&self, l: usize) -> usize {
        self.input_side >> l
    }

    pub fn flat_len(&self) -> usize {
        let s = self.side_at(self.conv_depths.len());
        s * s * self.conv_depths.last().copied().unwrap_or(0)
    }

    pub fn input_len(&self) -> usize {
        self.in_channels * self.input_side * self.input_side
    }
}

/// 3×3 convolution, weights `[out][in][3][3]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv {
    pub c_in: usize,
    pub c_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Fully connected layer, weights `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// All weights; the same shape also carries gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: Architecture,
    pub conv: Vec<Conv>,
    pub fc1: Dense,
    pub fc2: Dense,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Eval,
    /// Inverted dropout with a mask stream derived from `seed`.
    Train { dropout: f64, seed: u64 },
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    cols: Vec<Vec<f64>>,
    /// post-ReLU conv outputs before pooling
    act: Vec<Vec<f64>>,
    pool_idx: Vec<Vec<usize>>,
    mask1: Option<Vec<f64>>,
    mask2: Option<Vec<f64>>,
    /// fc1 input (after dropout)
    fc1_in: Vec<f64>,
    /// fc1 post-ReLU, before dropout
    hidden: Vec<f64>,
    fc2_in: Vec<f64>,
    pub output: Vec<f64>,
}

/// C (m×n) = A (m×k) · B (k×n) + beta·C with arbitrary strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    // SAFETY: bounds asserted above; strides describe views inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Same-size 3×3 patches: `cols[(c·9 + ky·3 + kx)·hw + y·side + x]`.
fn im2col(x: &[f64], c_in: usize, side: usize) -> Vec<f64> {
    let hw = side * side;
    let mut cols = vec![0.0; c_in * 9 * hw];
    for c in 0..c_in {
        let plane = &x[c * hw..(c + 1) * hw];
        for ky in 0..3 {
            for kx in 0..3 {
                let row = &mut cols[(c * 9 + ky * 3 + kx) * hw..][..hw];
                for y in 0..side {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= side as isize {
                        continue;
                    }
                    for xx in 0..side {
                        let sx = xx as isize + kx as isize - 1;
                        if sx >= 0 && sx < side as isize {
                            row[y * side + xx] = plane[sy as usize * side + sx as usize];
                        }
                    }
                }
            }
        }
    }
    cols
}

fn col2im(cols: &[f64], c_in: usize, side: usize) -> Vec<f64> {
    let hw = side * side;
    let mut x = vec![0.0; c_in * hw];
    for c in 0..c_in {
        for ky in 0..3 {
            for kx in 0..3 {
                let row = &cols[(c * 9 + ky * 3 + kx) * hw..][..hw];
                for y in 0..side {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= side as isize {
                        continue;
                    }
                    for xx in 0..side {
                        let sx = xx as isize + kx as isize - 1;
                        if sx >= 0 && sx < side as isize {
                            x[c * hw + sy as usize * side + sx as usize] += row[y * side + xx];
                        }
                    }
                }
            }
        }
    }
    x
}

/// 2×2 max-pool; returns outputs and the flat index of each winner.
fn max_pool(x: &[f64], channels: usize, side: usize) -> (Vec<f64>, Vec<usize>) {
    let half = side / 2;
    let mut out = Vec::with_capacity(channels * half * half);
    let mut idx = Vec::with_capacity(channels * half * half);
    for c in 0..channels {
        let base = c * side * side;
        for y in 0..half {
            for xx in 0..half {
                let mut best = base + 2 * y * side + 2 * xx;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let k = base + (2 * y + dy) * side + 2 * xx + dx;
                    if x[k] > x[best] {
                        best = k;
                    }
                }
                out.push(x[best]);
                idx.push(best);
            }
        }
    }
    (out, idx)
}

fn dropout_mask(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<f64> {
    let keep = 1.0 - rate;
    (0..n)
        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
        .collect()
}

fn he_uniform(rng: &mut ChaCha8Rng, n: usize, fan_in: usize) -> Vec<f64> {
    let lim = (6.0 / fan_in as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-lim..lim)).collect()
}

impl Network {
    /// All-zero parameters of the given shape.
    pub fn zeros(arch: &Architecture) -> Result<Self> {
        arch.validate()?;
        let mut c_in = arch.in_channels;
        let conv = arch
            .conv_depths
            .iter()
            .map(|&c_out| {
                let layer = Conv {
                    c_in,
                    c_out,
                    w: vec![0.0; c_out * c_in * 9],
                    b: vec![0.0; c_out],
                };
                c_in = c_out;
                layer
            })
            .collect();
        let dense = |n_in: usize, n_out: usize| Dense {
            n_in,
            n_out,
            w: vec![0.0; n_in * n_out],
            b: vec![0.0; n_out],
        };
        Ok(Self {
            arch: arch.clone(),
            conv,
            fc1: dense(arch.flat_len(), arch.hidden),
            fc2: dense(arch.hidden, arch.outputs),
        })
    }

    /// He-uniform weights, zero biases.
    pub fn init(arch: &Architecture, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in &mut net.conv {
            c.w = he_uniform(&mut rng, c.w.len(), c.c_in * 9);
        }
        for d in [&mut net.fc1, &mut net.fc2] {
            d.w = he_uniform(&mut rng, d.w.len(), d.n_in);
        }
        Ok(net)
    }

    /// Parameter tensors in serialization order with their shapes.
    pub fn tensors(&self) -> Vec<(Vec<usize>, &[f64])> {
        let mut t: Vec<(Vec<usize>, &[f64])> = Vec::new();
        for c in &self.conv {
            t.push((vec![c.c_out, c.c_in, 3, 3], &c.w));
            t.push((vec![c.c_out], &c.b));
        }
        for d in [&self.fc1, &self.fc2] {
            t.push((vec![d.n_out, d.n_in], &d.w));
            t.push((vec![d.n_out], &d.b));
        }
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut t = Vec::new();
        for c in &mut self.conv {
            t.push(&mut c.w);
            t.push(&mut c.b);
        }
        for d in [&mut self.fc1, &mut self.fc2] {
            t.push(&mut d.w);
            t.push(&mut d.b);
        }
        t
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|(_, v)| v.len()).sum()
    }

    fn check_input(&self, input: &InputTensor) -> Result<()> {
        if input.side != self.arch.input_side || input.data.len() != self.arch.input_len() {
            return Err(Error::Config(format!(
                "input of side {} ({} values) does not fit a net expecting side {} ({} values)",
                input.side,
                input.data.len(),
                self.arch.input_side,
                self.arch.input_len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &InputTensor, mode: Mode) -> Result<Cache> {
        self.check_input(input)?;
        let masks = match mode {
            Mode::Eval => None,
            Mode::Train { dropout, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Some((
                    dropout_mask(&mut rng, self.fc1.n_in, dropout),
                    dropout_mask(&mut rng, self.fc2.n_in, dropout),
                ))
            }
        };
        Ok(self.forward_masked(input, masks))
    }

    /// Forward pass with explicit dropout masks (`None` = evaluation).
    pub fn forward_masked(&self, input: &InputTensor, masks: Option<(Vec<f64>, Vec<f64>)>) -> Cache {
        let mut x = input.data.clone();
        let mut cols_all = Vec::with_capacity(self.conv.len());
        let mut act_all = Vec::with_capacity(self.conv.len());
        let mut idx_all = Vec::with_capacity(self.conv.len());
        for (l, c) in self.conv.iter().enumerate() {
            let side = self.arch.side_at(l);
            let hw = side * side;
            let cols = im2col(&x, c.c_in, side);
            let mut y = vec![0.0; c.c_out * hw];
            for (o, row) in y.chunks_mut(hw).enumerate() {
                row.fill(c.b[o]);
            }
            let k = c.c_in * 9;
            gemm(c.c_out, k, hw, &c.w, (k, 1), &cols, (hw, 1), 1.0, &mut y);
            y.iter_mut().for_each(|v| *v = v.max(0.0));
            let (pooled, idx) = max_pool(&y, c.c_out, side);
            cols_all.push(cols);
            act_all.push(y);
            idx_all.push(idx);
            x = pooled;
        }
        let (mask1, mask2) = match masks {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let fc1_in = match &mask1 {
            Some(m) => x.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => x,
        };
        let hidden: Vec<f64> = dense_forward(&self.fc1, &fc1_in).into_iter().map(|v| v.max(0.0)).collect();
        let fc2_in = match &mask2 {
            Some(m) => hidden.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => hidden.clone(),
        };
        let output = dense_forward(&self.fc2, &fc2_in);
        Cache {
            cols: cols_all,
            act: act_all,
            pool_idx: idx_all,
            mask1,
            mask2,
            fc1_in,
            hidden,
            fc2_in,
            output,
        }
    }

    pub fn predict(&self, input: &InputTensor) -> Result<Vec<f64>> {
        Ok(self.forward(input, Mode::Eval)?.output)
    }

    pub fn predict_keypoints(&self, input: &InputTensor) -> Result<Keypoints> {
        Keypoints::from_flat(&self.predict(input)?)
    }

    /// Exact gradients of [`cnn_loss`] for one forward pass.
    pub fn backward(&self, cache: &Cache, truth: &[f64]) -> Network {
        let mut g = Network::zeros(&self.arch).expect("architecture validated at construction");
        let n = (truth.len() / 3).max(1) as f64;
        let d_out: Vec<f64> = cache.output.iter().zip(truth).map(|(p, t)| (p - t) / n).collect();

        let mut d_h = dense_backward(&self.fc2, &mut g.fc2, &cache.fc2_in, &d_out);
        if let Some(m) = &cache.mask2 {
            d_h.iter_mut().zip(m).for_each(|(d, k)| *d *= k);
        }
        d_h.iter_mut().zip(&cache.hidden).for_each(|(d, h)| {
            if *h <= 0.0 {
                *d = 0.0
            }
        });
        let mut d_x = dense_backward(&self.fc1, &mut g.fc1, &cache.fc1_in, &d_h);
        if let Some(m) = &cache.mask1 {
            d_x.iter_mut().zip(m).for_each(|(d, k)| *d *= k);
        }

        for l in (0..self.conv.len()).rev() {
            let c = &self.conv[l];
            let side = self.arch.side_at(l);
            let hw = side * side;
            let act = &cache.act[l];
            let mut d_y = vec![0.0; c.c_out * hw];
            for (&i, &d) in cache.pool_idx[l].iter().zip(&d_x) {
                if act[i] > 0.0 {
                    d_y[i] += d;
                }
            }
            let gc = &mut g.conv[l];
            for (o, row) in d_y.chunks(hw).enumerate() {
                gc.b[o] = row.iter().sum();
            }
            let k = c.c_in * 9;
            // dW = dY · colsᵀ
            gemm(c.c_out, hw, k, &d_y, (hw, 1), &cache.cols[l], (1, hw), 0.0, &mut gc.w);
            if l > 0 {
                // dcols = Wᵀ · dY
                let mut d_cols = vec![0.0; k * hw];
                gemm(k, c.c_out, hw, &c.w, (1, k), &d_y, (hw, 1), 0.0, &mut d_cols);
                d_x = col2im(&d_cols, c.c_in, side);
            }
        }
        g
    }

    /// Loss and gradients for one sample.
    pub fn gradients(&self, input: &InputTensor, truth: &Keypoints, mode: Mode) -> Result<(f64, Network)> {
        let cache = self.forward(input, mode)?;
        let (loss, _) = cnn_loss(&cache.output, truth);
        Ok((loss, self.backward(&cache, &truth.to_flat())))
    }

    /// self += alpha · other, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Network, alpha: f64) {
        for (a, (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += alpha * y);
        }
    }
}

fn dense_forward(d: &Dense, x: &[f64]) -> Vec<f64> {
    let mut y = d.b.clone();
    gemm(d.n_out, d.n_in, 1, &d.w, (d.n_in, 1), x, (1, 1), 1.0, &mut y);
    y
}

/// Fills `g` with the layer gradients and returns dL/dx.
fn dense_backward(d: &Dense, g: &mut Dense, x: &[f64], dy: &[f64]) -> Vec<f64> {
    g.b.copy_from_slice(dy);
    for (o, row) in g.w.chunks_mut(d.n_in).enumerate() {
        let s = dy[o];
        row.iter_mut().zip(x).for_each(|(w, xi)| *w = s * xi);
    }
    let mut dx = vec![0.0; d.n_in];
    gemm(d.n_in, d.n_out, 1, &d.w, (1, d.n_in), dy, (1, 1), 0.0, &mut dx);
    dx
}

/// Mean over key points of ½‖pred − truth‖², plus the per-point terms.
pub fn cnn_loss(pred: &[f64], truth: &Keypoints) -> (f64, [f64; N_KEYPOINTS]) {
    let t = truth.to_flat();
    let mut per = [0.0; N_KEYPOINTS];
    for (i, e) in per.iter_mut().enumerate() {
        *e = 0.5 * (0..3).map(|k| (pred[3 * i + k] - t[3 * i + k]).powi(2)).sum::<f64>();
    }
    (per.iter().sum::<f64>() / N_KEYPOINTS as f64, per)
}
