//! Fully connected networks with hand-written backpropagation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::composition::{clr, Composition};
use crate::error::{Error, Result};
use crate::preprocess::{zero_replace, LibrarySize};

/// Row-major dense matrix; rows are batch elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { rows: rows.len(), cols, data }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Affine layer `y = W x + b` with `W` stored as `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    /// Uniform fan-in initialisation with bound `sqrt(6 / inputs)`; zero bias.
    pub fn init(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = (6.0 / inputs as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| rng.random_range(-bound..bound)).collect();
        Self { inputs, outputs, weights, bias: vec![0.0; outputs] }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        debug_assert_eq!(x.cols, self.inputs);
        let mut y = Matrix::zeros(x.rows, self.outputs);
        for r in 0..x.rows {
            let xr = x.row(r);
            let yr = y.row_mut(r);
            for (o, out) in yr.iter_mut().enumerate() {
                let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                *out = self.bias[o] + w.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        y
    }

    /// Accumulates parameter gradients into `grad` and returns the gradient
    /// with respect to the layer input.
    fn backward(&self, x: &Matrix, grad_out: &Matrix, grad: &mut Dense) -> Matrix {
        let mut grad_in = Matrix::zeros(x.rows, self.inputs);
        for r in 0..x.rows {
            let xr = x.row(r);
            let gr = grad_out.row(r);
            let gin = grad_in.row_mut(r);
            for (o, &g) in gr.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                grad.bias[o] += g;
                let gw = &mut grad.weights[o * self.inputs..(o + 1) * self.inputs];
                for (w, &xi) in gw.iter_mut().zip(xr) {
                    *w += g * xi;
                }
                let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                for (gi, &wi) in gin.iter_mut().zip(w) {
                    *gi += g * wi;
                }
            }
        }
        grad_in
    }
}

fn relu_in_place(m: &mut Matrix) {
    for v in &mut m.data {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Stack of dense layers with ReLU between them and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Layer inputs saved by [`Mlp::forward_cached`] for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Matrix>,
}

impl Mlp {
    pub fn init(widths: &[usize], rng: &mut ChaCha8Rng) -> Self {
        Self { layers: widths.windows(2).map(|w| Dense::init(w[0], w[1], rng)).collect() }
    }

    pub fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect() }
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: &Matrix) -> (Matrix, MlpCache) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = layer.forward(&h);
            if i + 1 < self.layers.len() {
                relu_in_place(&mut next);
            }
            inputs.push(h);
            h = next;
        }
        (h, MlpCache { inputs })
    }

    /// Backpropagates `grad_out`, adding parameter gradients into `grad`.
    pub fn backward(&self, cache: &MlpCache, grad_out: &Matrix, grad: &mut Mlp) -> Matrix {
        let mut g = grad_out.clone();
        for i in (0..self.layers.len()).rev() {
            let input = &cache.inputs[i];
            g = self.layers[i].backward(input, &g, &mut grad.layers[i]);
            if i > 0 {
                // input[i] is the ReLU output of layer i-1.
                for (gv, &a) in g.data.iter_mut().zip(&input.data) {
                    if a <= 0.0 {
                        *gv = 0.0;
                    }
                }
            }
        }
        g
    }

    pub fn tensors(&self) -> Vec<&Vec<f64>> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias]).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.bias]).collect()
    }
}

/// How a composition is fed to the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputEncoding {
    /// `clr(zero_replace(x))`.
    Clr,
    /// The proportions as they are.
    Raw,
}

impl std::str::FromStr for InputEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clr" => Ok(InputEncoding::Clr),
            "raw" => Ok(InputEncoding::Raw),
            _ => Err(Error::InvalidConfig(format!("unknown input encoding {s:?}"))),
        }
    }
}

impl InputEncoding {
    pub fn as_str(self) -> &'static str {
        match self {
            InputEncoding::Clr => "clr",
            InputEncoding::Raw => "raw",
        }
    }

    pub fn encode(self, x: &Composition<f64>, library_size: LibrarySize) -> Vec<f64> {
        match self {
            InputEncoding::Clr => clr(&zero_replace(x, library_size))
                .expect("zero replacement yields positive parts")
                .into_coords(),
            InputEncoding::Raw => x.parts().to_vec(),
        }
    }

    pub fn encode_all<'a>(
        self,
        xs: impl IntoIterator<Item = &'a Composition<f64>>,
        library_size: LibrarySize,
    ) -> Matrix {
        let rows: Vec<Vec<f64>> = xs.into_iter().map(|x| self.encode(x, library_size)).collect();
        Matrix::from_rows(&rows)
    }
}

/// Layer widths of encoder and projection head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    /// Encoder output widths; the last one is the representation size.
    pub encoder: Vec<usize>,
    /// Projection head output widths; the last one is the projection size.
    pub head: Vec<usize>,
}

impl Architecture {
    /// `p -> 256 -> 128 -> 64` encoder, `64 -> 32 -> 16` projection head.
    pub fn standard(input_dim: usize) -> Self {
        Self { input_dim, encoder: vec![256, 128, 64], head: vec![32, 16] }
    }

    pub fn representation_dim(&self) -> usize {
        *self.encoder.last().expect("encoder has layers")
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.encoder.is_empty() || self.head.is_empty() {
            return Err(Error::InvalidConfig("architecture needs input, encoder and head widths".into()));
        }
        if self.encoder.iter().chain(&self.head).any(|&w| w == 0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        Ok(())
    }

    fn encoder_widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim).chain(self.encoder.iter().copied()).collect()
    }

    fn head_widths(&self) -> Vec<usize> {
        std::iter::once(self.representation_dim()).chain(self.head.iter().copied()).collect()
    }
}

/// Below this norm a projection gets the floor added before dividing.
pub const NORM_FLOOR: f64 = 1e-12;

/// Encoder plus projection head.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    pub architecture: Architecture,
    pub encoding: InputEncoding,
    /// Depth used for zero replacement before the clr encoding.
    pub library_size: LibrarySize,
    pub encoder: Mlp,
    pub head: Mlp,
}

/// Output of [`EncoderState::forward`].
#[derive(Debug, Clone)]
pub struct Forward {
    pub representations: Matrix,
    /// Unnormalised head outputs.
    pub raw_projections: Matrix,
    pub projections: Matrix,
    encoder_cache: MlpCache,
    head_cache: MlpCache,
}

/// Parameter gradients, shaped like the state.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub encoder: Mlp,
    pub head: Mlp,
}

impl EncoderState {
    pub fn init(
        architecture: Architecture,
        encoding: InputEncoding,
        library_size: LibrarySize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        architecture.validate()?;
        let encoder = Mlp::init(&architecture.encoder_widths(), rng);
        let head = Mlp::init(&architecture.head_widths(), rng);
        Ok(Self { architecture, encoding, library_size, encoder, head })
    }

    pub fn encode_inputs<'a>(&self, xs: impl IntoIterator<Item = &'a Composition<f64>>) -> Matrix {
        self.encoding.encode_all(xs, self.library_size)
    }

    /// Encoder output only.
    pub fn represent(&self, inputs: &Matrix) -> Result<Matrix> {
        self.check_input(inputs)?;
        let reps = self.encoder.forward(inputs);
        finite_or_error(&reps)?;
        Ok(reps)
    }

    pub fn forward(&self, inputs: &Matrix) -> Result<Forward> {
        self.check_input(inputs)?;
        let (representations, encoder_cache) = self.encoder.forward_cached(inputs);
        let (raw_projections, head_cache) = self.head.forward_cached(&representations);
        finite_or_error(&raw_projections)?;
        let projections = normalize_rows(&raw_projections);
        Ok(Forward { representations, raw_projections, projections, encoder_cache, head_cache })
    }

    /// Gradients of a loss given its gradient with respect to the normalised
    /// projections.
    pub fn backward(&self, fwd: &Forward, grad_projections: &Matrix) -> Gradients {
        let grad_raw = normalize_backward(&fwd.raw_projections, grad_projections);
        let mut grads = Gradients { encoder: self.encoder.zeros_like(), head: self.head.zeros_like() };
        let grad_reps = self.head.backward(&fwd.head_cache, &grad_raw, &mut grads.head);
        self.encoder.backward(&fwd.encoder_cache, &grad_reps, &mut grads.encoder);
        grads
    }

    pub fn tensors(&self) -> Vec<&Vec<f64>> {
        let mut t = self.encoder.tensors();
        t.extend(self.head.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.head.tensors_mut());
        t
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// SHA-256 over every parameter's bit pattern, as lowercase hex.
    pub fn fingerprint(&self) -> String {
        fingerprint_tensors(self.tensors())
    }

    fn check_input(&self, inputs: &Matrix) -> Result<()> {
        if inputs.cols != self.architecture.input_dim {
            return Err(Error::DimensionMismatch { left: self.architecture.input_dim, right: inputs.cols });
        }
        finite_or_error(inputs)
    }
}

impl Gradients {
    pub fn tensors(&self) -> Vec<&Vec<f64>> {
        let mut t = self.encoder.tensors();
        t.extend(self.head.tensors());
        t
    }
}

pub(crate) fn fingerprint_tensors<'a>(tensors: impl IntoIterator<Item = &'a Vec<f64>>) -> String {
    let mut hasher = Sha256::new();
    for t in tensors {
        hasher.update((t.len() as u64).to_le_bytes());
        for v in t {
            hasher.update(v.to_bits().to_le_bytes());
        }
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn finite_or_error(m: &Matrix) -> Result<()> {
    match m.data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite { index: i / m.cols.max(1) }),
        None => Ok(()),
    }
}

fn guarded_norm(row: &[f64]) -> (f64, f64) {
    let r = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    let denom = if r < NORM_FLOOR { r + NORM_FLOOR } else { r };
    (r, denom)
}

/// Divides each row by its Euclidean norm (plus [`NORM_FLOOR`] when the norm
/// is below it).
pub fn normalize_rows(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for r in 0..m.rows {
        let (_, denom) = guarded_norm(m.row(r));
        for v in out.row_mut(r) {
            *v /= denom;
        }
    }
    out
}

fn normalize_backward(raw: &Matrix, grad: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(raw.rows, raw.cols);
    for r in 0..raw.rows {
        let u = raw.row(r);
        let g = grad.row(r);
        let (norm, denom) = guarded_norm(u);
        // d(u/d)/du = I/d - u u^T / (norm d^2), with d = norm (+ floor).
        let ug: f64 = u.iter().zip(g).map(|(a, b)| a * b).sum();
        let coef = if norm > 0.0 { ug / (norm * denom * denom) } else { 0.0 };
        for ((o, &ui), &gi) in out.row_mut(r).iter_mut().zip(u).zip(g) {
            *o = gi / denom - coef * ui;
        }
    }
    out
}
