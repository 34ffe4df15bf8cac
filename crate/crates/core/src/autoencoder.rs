//! Mirror-symmetric MLP autoencoder trained with plain mini-batch SGD.
//!
//! Hidden layers use `tanh`; the bottleneck and the output layer are affine.
//! Parameters are stored as `f32`, all arithmetic runs in `f64`.

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use crate::io::{expect_eof, read_f32s, read_u32, truncated};
use crate::linalg::DataMatrix;
use crate::{Error, Result, Rng};

pub const MLP1_MAGIC: &[u8; 4] = b"MLP1";

/// Weights and biases of an encoder/decoder stack.
///
/// Layer `l` maps `layer_sizes[l]` inputs to `layer_sizes[l + 1]` outputs;
/// its weight matrix is `fan_in x fan_out`, row-major, so a row vector `x`
/// maps to `x * W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f32>>,
    biases: Vec<Vec<f32>>,
}

/// Gradients with the same layout as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

fn validate_layer_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 || sizes.len().is_multiple_of(2) {
        return Err(Error::Config(format!(
            "layer sizes {sizes:?} need an odd count of at least 3"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::Config(format!("layer sizes {sizes:?} contain a zero")));
    }
    if sizes.iter().ne(sizes.iter().rev()) {
        return Err(Error::Config(format!(
            "layer sizes {sizes:?} are not mirror-symmetric"
        )));
    }
    Ok(())
}

impl MlpParams {
    pub fn new(layer_sizes: Vec<usize>, weights: Vec<Vec<f32>>, biases: Vec<Vec<f32>>) -> Result<Self> {
        validate_layer_sizes(&layer_sizes)?;
        let layers = layer_sizes.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::Dimension(format!(
                "{layers} layers need {layers} weight matrices and bias vectors"
            )));
        }
        for l in 0..layers {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            if weights[l].len() != fan_in * fan_out || biases[l].len() != fan_out {
                return Err(Error::Dimension(format!(
                    "layer {l} expects a {fan_in}x{fan_out} weight matrix and {fan_out} biases"
                )));
            }
        }
        if weights.iter().chain(&biases).flatten().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite parameter".into()));
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
        })
    }

    /// All-zero parameters for the given stack.
    pub fn zeros(layer_sizes: Vec<usize>) -> Result<Self> {
        validate_layer_sizes(&layer_sizes)?;
        let weights = layer_sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            layer_sizes,
            weights,
            biases,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn latent_dim(&self) -> usize {
        self.layer_sizes[self.bottleneck()]
    }

    /// Position of the bottleneck within `layer_sizes`.
    pub fn bottleneck(&self) -> usize {
        self.layer_sizes.len() / 2
    }

    pub fn weights(&self, layer: usize) -> &[f32] {
        &self.weights[layer]
    }

    pub fn biases(&self, layer: usize) -> &[f32] {
        &self.biases[layer]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f32] {
        &mut self.weights[layer]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f32] {
        &mut self.biases[layer]
    }

    /// Whether the output of `layer` goes through `tanh`.
    pub fn is_activated(&self, layer: usize) -> bool {
        let out = layer + 1;
        out != self.bottleneck() && out != self.layer_sizes.len() - 1
    }

    /// SHA-256 over sizes and parameter bits, truncated to 64 bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Sha256::new();
        for &s in &self.layer_sizes {
            h.update((s as u64).to_le_bytes());
        }
        for v in self.weights.iter().chain(&self.biases).flatten() {
            h.update(v.to_le_bytes());
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    fn check_input(&self, batch: &DataMatrix) -> Result<()> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "network expects {} input columns, got {}",
                self.input_dim(),
                batch.cols()
            )));
        }
        Ok(())
    }

    /// Runs layers `0..upto` on one row, returning every intermediate
    /// activation (the input included).
    fn trace_row(&self, row: &[f32], upto: usize) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(upto + 1);
        acts.push(row.iter().map(|&v| v as f64).collect::<Vec<f64>>());
        for l in 0..upto {
            let input = &acts[l];
            let fan_out = self.layer_sizes[l + 1];
            let w = &self.weights[l];
            let mut out: Vec<f64> = self.biases[l].iter().map(|&b| b as f64).collect();
            for (i, &x) in input.iter().enumerate() {
                let w_row = &w[i * fan_out..(i + 1) * fan_out];
                for (o, &wij) in out.iter_mut().zip(w_row) {
                    *o += x * wij as f64;
                }
            }
            if self.is_activated(l) {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
        }
        acts
    }
}

/// Glorot-uniform weights from the SplitMix64 stream, zero biases.
pub fn init_params(layer_sizes: &[usize], seed: u64) -> Result<MlpParams> {
    let mut params = MlpParams::zeros(layer_sizes.to_vec())?;
    let mut rng = Rng::new(seed);
    for (l, w) in params.weights.iter_mut().enumerate() {
        let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for v in w.iter_mut() {
            *v = ((2.0 * rng.next_f64() - 1.0) * bound) as f32;
        }
    }
    Ok(params)
}

/// Returns `(latent, reconstruction)` for every row of `batch`.
pub fn forward(params: &MlpParams, batch: &DataMatrix) -> Result<(DataMatrix, DataMatrix)> {
    params.check_input(batch)?;
    let bottleneck = params.bottleneck();
    let mut latent = Vec::with_capacity(batch.rows() * params.latent_dim());
    let mut recon = Vec::with_capacity(batch.rows() * params.input_dim());
    for row in batch.iter_rows() {
        let acts = params.trace_row(row, params.num_layers());
        latent.extend(acts[bottleneck].iter().map(|&v| v as f32));
        recon.extend(acts[params.num_layers()].iter().map(|&v| v as f32));
    }
    Ok((
        DataMatrix::new(batch.rows(), params.latent_dim(), latent)?,
        DataMatrix::new(batch.rows(), params.input_dim(), recon)?,
    ))
}

/// Mean over all entries of the squared error.
pub fn mse_loss(reconstruction: &DataMatrix, target: &DataMatrix) -> Result<f64> {
    if reconstruction.rows() != target.rows() || reconstruction.cols() != target.cols() {
        return Err(Error::Dimension(format!(
            "{}x{} reconstruction against {}x{} target",
            reconstruction.rows(),
            reconstruction.cols(),
            target.rows(),
            target.cols()
        )));
    }
    let n = reconstruction.as_slice().len();
    if n == 0 {
        return Err(Error::EmptyInput("loss over an empty matrix".into()));
    }
    let sum: f64 = reconstruction
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(&r, &t)| {
            let d = r as f64 - t as f64;
            d * d
        })
        .sum();
    Ok(sum / n as f64)
}

/// Exact gradient of the reconstruction MSE of `batch` with respect to every
/// weight and bias.
pub fn backward(params: &MlpParams, batch: &DataMatrix) -> Result<Gradients> {
    params.check_input(batch)?;
    if batch.is_empty() {
        return Err(Error::EmptyInput("gradient of an empty batch".into()));
    }
    let layers = params.num_layers();
    let mut grads = Gradients {
        weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
        biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
    };
    let scale = 2.0 / (batch.rows() * params.input_dim()) as f64;

    for row in batch.iter_rows() {
        let acts = params.trace_row(row, layers);
        let mut delta: Vec<f64> = acts[layers]
            .iter()
            .zip(row)
            .map(|(&y, &x)| scale * (y - x as f64))
            .collect();
        for l in (0..layers).rev() {
            if params.is_activated(l) {
                for (d, &a) in delta.iter_mut().zip(&acts[l + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let fan_out = params.layer_sizes[l + 1];
            let input = &acts[l];
            let gw = &mut grads.weights[l];
            for (i, &x) in input.iter().enumerate() {
                for (g, &d) in gw[i * fan_out..(i + 1) * fan_out].iter_mut().zip(&delta) {
                    *g += x * d;
                }
            }
            for (g, &d) in grads.biases[l].iter_mut().zip(&delta) {
                *g += d;
            }
            if l > 0 {
                let w = &params.weights[l];
                delta = (0..input.len())
                    .map(|i| {
                        w[i * fan_out..(i + 1) * fan_out]
                            .iter()
                            .zip(&delta)
                            .map(|(&wij, &d)| wij as f64 * d)
                            .sum()
                    })
                    .collect();
            }
        }
    }
    Ok(grads)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub latent_dim: usize,
    /// Encoder hidden widths, input side first. The decoder mirrors them.
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 16,
            seed: 0,
            latent_dim: 4,
            hidden: vec![32],
        }
    }
}

impl TrainConfig {
    pub fn layer_sizes(&self, input_dim: usize) -> Vec<usize> {
        let mut sizes = vec![input_dim];
        sizes.extend(&self.hidden);
        sizes.push(self.latent_dim);
        sizes.extend(self.hidden.iter().rev());
        sizes.push(input_dim);
        sizes
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.latent_dim == 0 || self.latent_dim >= input_dim {
            return Err(Error::Config(format!(
                "latent dimension must be in 1..{input_dim}, got {}",
                self.latent_dim
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer of width 0".into()));
        }
        Ok(())
    }
}

/// Mini-batch SGD on the reconstruction loss.
///
/// Epoch `e` visits the rows in a Fisher–Yates order drawn from
/// `SplitMix64(seed + e)`; the trailing short batch is kept. The returned
/// history holds the full-dataset loss after each epoch.
pub fn train(data: &DataMatrix, config: &TrainConfig) -> Result<(MlpParams, Vec<f64>)> {
    config.validate(data.cols())?;
    if data.rows() < config.batch_size {
        return Err(Error::Config(format!(
            "batch size {} exceeds the {} available rows",
            config.batch_size,
            data.rows()
        )));
    }
    let mut params = init_params(&config.layer_sizes(data.cols()), config.seed)?;
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..data.rows()).collect();
    for epoch in 0..config.epochs {
        let mut rng = Rng::new(config.seed.wrapping_add(epoch as u64));
        order.iter_mut().enumerate().for_each(|(i, o)| *o = i);
        rng.shuffle(&mut order);
        for chunk in order.chunks(config.batch_size) {
            let batch = data.select_rows(chunk)?;
            let grads = backward(&params, &batch)?;
            sgd_step(&mut params, &grads, config.learning_rate);
        }
        let (_, recon) = forward(&params, data)?;
        let loss = mse_loss(&recon, data)?;
        if !loss.is_finite() {
            return Err(Error::Config(format!(
                "training diverged at epoch {epoch}; lower the learning rate"
            )));
        }
        history.push(loss);
    }
    Ok((params, history))
}

fn sgd_step(params: &mut MlpParams, grads: &Gradients, lr: f64) {
    let pairs = params
        .weights
        .iter_mut()
        .zip(&grads.weights)
        .chain(params.biases.iter_mut().zip(&grads.biases));
    for (p, g) in pairs {
        for (v, &d) in p.iter_mut().zip(g) {
            *v = (*v as f64 - lr * d) as f32;
        }
    }
}

/// Encoded samples plus the fingerprint of the encoder that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSpace {
    pub embeddings: DataMatrix,
    /// `0` when the embeddings did not come from an encoder in this process.
    pub encoder_fingerprint: u64,
}

impl LatentSpace {
    pub fn new(embeddings: DataMatrix, encoder_fingerprint: u64) -> Self {
        Self {
            embeddings,
            encoder_fingerprint,
        }
    }

    /// Treats an arbitrary matrix as a point set to select from.
    pub fn from_matrix(embeddings: DataMatrix) -> Self {
        Self::new(embeddings, 0)
    }

    pub fn rows(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.cols()
    }

    pub fn point(&self, i: usize) -> &[f32] {
        self.embeddings.row(i)
    }
}

/// Bottleneck activations for every row of `data`.
pub fn encode(params: &MlpParams, data: &DataMatrix) -> Result<LatentSpace> {
    params.check_input(data)?;
    let bottleneck = params.bottleneck();
    let mut out = Vec::with_capacity(data.rows() * params.latent_dim());
    for row in data.iter_rows() {
        let acts = params.trace_row(row, bottleneck);
        out.extend(acts[bottleneck].iter().map(|&v| v as f32));
    }
    Ok(LatentSpace::new(
        DataMatrix::new(data.rows(), params.latent_dim(), out)?,
        params.fingerprint(),
    ))
}

/// Per-column min-max scaling onto `[-1, 1]`. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub min: Vec<f32>,
    pub max: Vec<f32>,
}

impl MinMaxScaler {
    pub fn fit(data: &DataMatrix) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("cannot fit a scaler on zero rows".into()));
        }
        let mut min = data.row(0).to_vec();
        let mut max = min.clone();
        for row in data.iter_rows().skip(1) {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn transform(&self, data: &DataMatrix) -> Result<DataMatrix> {
        if data.cols() != self.dim() {
            return Err(Error::Dimension(format!(
                "scaler fitted on {} columns, got {}",
                self.dim(),
                data.cols()
            )));
        }
        let cols = self.dim();
        let out = data
            .as_slice()
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let j = k % cols;
                let (lo, hi) = (self.min[j] as f64, self.max[j] as f64);
                if hi > lo {
                    (2.0 * (v as f64 - lo) / (hi - lo) - 1.0) as f32
                } else {
                    0.0
                }
            })
            .collect();
        DataMatrix::new(data.rows(), cols, out)
    }
}

/// A trained network together with the input scaler it was trained behind.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    pub params: MlpParams,
    pub scaler: MinMaxScaler,
}

impl Autoencoder {
    /// Fits the scaler on `data`, then trains on the scaled rows.
    pub fn fit(data: &DataMatrix, config: &TrainConfig) -> Result<(Self, Vec<f64>)> {
        let scaler = MinMaxScaler::fit(data)?;
        let (params, history) = train(&scaler.transform(data)?, config)?;
        Ok((Self { params, scaler }, history))
    }

    pub fn encode(&self, data: &DataMatrix) -> Result<LatentSpace> {
        encode(&self.params, &self.scaler.transform(data)?)
    }

    /// Writes the `MLP1` model file: magic, layer count and sizes (u32 LE),
    /// per-layer weights then biases (f32 LE), then scaler min and max.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MLP1_MAGIC)?;
        let sizes = self.params.layer_sizes();
        w.write_all(&(sizes.len() as u32).to_le_bytes())?;
        for &s in sizes {
            w.write_all(&(s as u32).to_le_bytes())?;
        }
        for l in 0..self.params.num_layers() {
            for v in self.params.weights(l).iter().chain(self.params.biases(l)) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        for v in self.scaler.min.iter().chain(&self.scaler.max) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MLP1_MAGIC {
            return Err(Error::Format("missing MLP1 magic".into()));
        }
        let count = read_u32(&mut r)? as usize;
        if count > 1024 {
            return Err(Error::Format(format!("implausible layer count {count}")));
        }
        let sizes = (0..count)
            .map(|_| read_u32(&mut r).map(|s| s as usize))
            .collect::<Result<Vec<_>>>()?;
        validate_layer_sizes(&sizes).map_err(|e| Error::Format(e.to_string()))?;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            weights.push(read_f32s(&mut r, w[0] * w[1])?);
            biases.push(read_f32s(&mut r, w[1])?);
        }
        let min = read_f32s(&mut r, sizes[0])?;
        let max = read_f32s(&mut r, sizes[0])?;
        expect_eof(&mut r)?;
        if min.iter().chain(&max).any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite scaler entry".into()));
        }
        let params = MlpParams::new(sizes, weights, biases)?;
        Ok(Self {
            params,
            scaler: MinMaxScaler { min, max },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DataMatrix {
        let mut rng = Rng::new(seed);
        let data = (0..rows * cols).map(|_| (rng.next_f64() * 2.0 - 1.0) as f32).collect();
        DataMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn layer_size_validation() {
        assert!(MlpParams::zeros(vec![4, 2, 4]).is_ok());
        assert!(MlpParams::zeros(vec![4, 3, 2, 3, 4]).is_ok());
        for bad in [vec![4, 2, 3], vec![4, 2], vec![4, 3, 2, 2, 4], vec![0, 1, 0]] {
            assert!(matches!(init_params(&bad, 0), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = init_params(&[5, 4, 2, 4, 5], 9).unwrap();
        let b = init_params(&[5, 4, 2, 4, 5], 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, init_params(&[5, 4, 2, 4, 5], 10).unwrap());
        assert!(a.biases.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn init_respects_glorot_bound() {
        // (4 -> 2) has bound sqrt(6 / 6) = 1; draw 10^4 weights across seeds.
        let mut max_abs = 0.0f32;
        let mut draws = 0;
        let mut seed = 0;
        while draws < 10_000 {
            let p = init_params(&[4, 2, 4], seed).unwrap();
            max_abs = p.weights(0).iter().fold(max_abs, |m, v| m.max(v.abs()));
            draws += p.weights(0).len();
            seed += 1;
        }
        assert!(max_abs <= 1.0);
        assert!(max_abs > 0.99);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = MlpParams::zeros(vec![3, 5, 2, 5, 3]).unwrap();
        let x = random_matrix(4, 3, 1);
        let (latent, recon) = forward(&p, &x).unwrap();
        assert!(latent.as_slice().iter().all(|&v| v == 0.0));
        assert!(recon.as_slice().iter().all(|&v| v == 0.0));
        assert!(encode(&p, &x).unwrap().embeddings.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_stack_matches_hand_product() {
        // Sizes (2, 2, 2): the bottleneck and the output are both affine.
        let w0 = vec![1.0, 2.0, 3.0, 4.0];
        let p = MlpParams::new(
            vec![2, 2, 2],
            vec![w0, vec![1.0, 0.0, 0.0, 1.0]],
            vec![vec![0.0; 2], vec![0.0; 2]],
        )
        .unwrap();
        let x = DataMatrix::from_rows(&[[1.0f32, 1.0], [2.0, -1.0]]).unwrap();
        let (latent, recon) = forward(&p, &x).unwrap();
        // [1 1]·[[1 2][3 4]] = [4 6]; [2 -1]·[[1 2][3 4]] = [-1 0]
        assert_eq!(latent.as_slice(), &[4.0, 6.0, -1.0, 0.0]);
        assert_eq!(recon, latent);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let p = init_params(&[3, 2, 3], 0).unwrap();
        let x = random_matrix(2, 4, 0);
        assert!(matches!(forward(&p, &x), Err(Error::Dimension(_))));
        assert!(matches!(encode(&p, &x), Err(Error::Dimension(_))));
        assert!(matches!(backward(&p, &x), Err(Error::Dimension(_))));
    }

    #[test]
    fn forward_is_row_independent() {
        let p = init_params(&[4, 6, 2, 6, 4], 3).unwrap();
        let a = random_matrix(3, 4, 1);
        let b = random_matrix(5, 4, 2);
        let both = DataMatrix::new(8, 4, [a.as_slice(), b.as_slice()].concat()).unwrap();
        let (la, ra) = forward(&p, &a).unwrap();
        let (lb, rb) = forward(&p, &b).unwrap();
        let (l, r) = forward(&p, &both).unwrap();
        assert_eq!(l.as_slice(), [la.as_slice(), lb.as_slice()].concat().as_slice());
        assert_eq!(r.as_slice(), [ra.as_slice(), rb.as_slice()].concat().as_slice());
    }

    #[test]
    fn mse_examples() {
        let a = random_matrix(2, 3, 5);
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        let zeros = DataMatrix::zeros(2, 3);
        let ones = DataMatrix::new(2, 3, vec![1.0; 6]).unwrap();
        assert_eq!(mse_loss(&zeros, &ones).unwrap(), 1.0);
        assert!(matches!(mse_loss(&zeros, &DataMatrix::zeros(3, 2)), Err(Error::Dimension(_))));

        let x = random_matrix(3, 2, 6);
        let y = random_matrix(3, 2, 7);
        let mut brute = 0.0f64;
        for i in 0..3 {
            for j in 0..2 {
                let d = x.get(i, j) as f64 - y.get(i, j) as f64;
                brute += d * d;
            }
        }
        assert!((mse_loss(&x, &y).unwrap() - brute / 6.0).abs() < 1e-7);
    }

    #[test]
    fn zero_batch_kills_first_layer_weight_gradients() {
        let p = init_params(&[4, 3, 2, 3, 4], 1).unwrap();
        let g = backward(&p, &DataMatrix::zeros(3, 4)).unwrap();
        assert!(g.weights[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_gradient_is_mean_of_row_gradients() {
        let p = init_params(&[4, 3, 2, 3, 4], 2).unwrap();
        let x = random_matrix(5, 4, 3);
        let g = backward(&p, &x).unwrap();
        let per_row: Vec<Gradients> = (0..5)
            .map(|i| backward(&p, &x.select_rows(&[i]).unwrap()).unwrap())
            .collect();
        for l in 0..p.num_layers() {
            for k in 0..g.weights[l].len() {
                let mean = per_row.iter().map(|r| r.weights[l][k]).sum::<f64>() / 5.0;
                assert!((g.weights[l][k] - mean).abs() < 1e-12);
            }
            for k in 0..g.biases[l].len() {
                let mean = per_row.iter().map(|r| r.biases[l][k]).sum::<f64>() / 5.0;
                assert!((g.biases[l][k] - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_epochs_returns_initial_params() {
        let x = random_matrix(8, 4, 0);
        let cfg = TrainConfig {
            epochs: 0,
            latent_dim: 2,
            hidden: vec![3],
            batch_size: 4,
            ..TrainConfig::default()
        };
        let (params, history) = train(&x, &cfg).unwrap();
        assert!(history.is_empty());
        assert_eq!(params, init_params(&cfg.layer_sizes(4), cfg.seed).unwrap());
    }

    #[test]
    fn config_validation() {
        let x = random_matrix(8, 4, 0);
        let base = TrainConfig {
            latent_dim: 2,
            epochs: 1,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let cases = [
            TrainConfig { learning_rate: 0.0, ..base.clone() },
            TrainConfig { learning_rate: f64::NAN, ..base.clone() },
            TrainConfig { batch_size: 0, ..base.clone() },
            TrainConfig { batch_size: 9, ..base.clone() },
            TrainConfig { latent_dim: 0, ..base.clone() },
            TrainConfig { latent_dim: 4, ..base.clone() },
        ];
        for cfg in cases {
            assert!(matches!(train(&x, &cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn scaler_maps_to_unit_box_and_zeroes_constants() {
        let x = DataMatrix::from_rows(&[[0.0f32, 5.0, 2.0], [10.0, 5.0, 4.0], [5.0, 5.0, 3.0]]).unwrap();
        let s = MinMaxScaler::fit(&x).unwrap();
        let y = s.transform(&x).unwrap();
        assert_eq!(y.as_slice(), &[-1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn mlp1_round_trip_and_layout() {
        let x = random_matrix(10, 3, 4);
        let cfg = TrainConfig {
            latent_dim: 2,
            hidden: vec![4],
            epochs: 2,
            batch_size: 5,
            ..TrainConfig::default()
        };
        let (model, _) = Autoencoder::fit(&x, &cfg).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        // magic + count + 5 sizes + (3*4+4 + 4*2+2 + 2*4+4 + 4*3+3) params + 2*3 scaler
        assert_eq!(buf.len(), 4 + 4 + 5 * 4 + (16 + 10 + 12 + 15) * 4 + 6 * 4);
        assert_eq!(&buf[..8], b"MLP1\x05\0\0\0");
        assert_eq!(Autoencoder::read_from(buf.as_slice()).unwrap(), model);

        buf.truncate(buf.len() - 1);
        assert!(matches!(Autoencoder::read_from(buf.as_slice()), Err(Error::Format(_))));
    }
}
