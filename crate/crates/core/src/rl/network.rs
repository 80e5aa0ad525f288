//! A small fully connected Q-network with hand-written backpropagation.
//!
//! Hidden layers use the rectifier, the output layer is linear: the network
//! regresses raw action values, and any softmax policy is applied on top.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODEL_FORMAT: &str = "rlga-qnetwork";
const MODEL_VERSION: u32 = 1;
const HIDDEN_ACTIVATION: &str = "relu";

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    inputs: usize,
    outputs: usize,
    /// Row-major `[output][input]`.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.biases.iter().enumerate().map(|(o, b)| {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>()
        }));
    }
}

/// One regression example: move `Q(input)[action]` toward `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub action: usize,
    pub target: f64,
}

/// Parameter gradients, laid out like the network (weights then biases per layer).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Layer>,
}

impl QNetwork {
    /// Random initialisation, uniform in `±1/sqrt(fan_in)` for weights and biases.
    pub fn new<R: Rng + ?Sized>(layer_dims: &[usize], rng: &mut R) -> Result<Self> {
        check_dims(layer_dims)?;
        let layers = layer_dims
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = 1.0 / (inputs as f64).sqrt();
                let mut draw = || rng.gen_range(-bound..=bound);
                let weights = (0..inputs * outputs).map(|_| draw()).collect();
                let biases = (0..outputs).map(|_| draw()).collect();
                Layer {
                    inputs,
                    outputs,
                    weights,
                    biases,
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        check_dims(layer_dims)?;
        let layers = layer_dims
            .windows(2)
            .map(|w| Layer {
                inputs: w[0],
                outputs: w[1],
                weights: vec![0.0; w[0] * w[1]],
                biases: vec![0.0; w[1]],
            })
            .collect();
        Ok(Self { layers })
    }

    /// Builds a network from explicit `(weights, biases)` per layer.
    pub fn from_parameters(layer_dims: &[usize], params: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        check_dims(layer_dims)?;
        if params.len() != layer_dims.len() - 1 {
            return Err(Error::contract(format!(
                "{} parameter blocks for {} layers",
                params.len(),
                layer_dims.len() - 1
            )));
        }
        let layers = layer_dims
            .windows(2)
            .zip(params)
            .enumerate()
            .map(|(k, (w, (weights, biases)))| {
                if weights.len() != w[0] * w[1] || biases.len() != w[1] {
                    return Err(Error::contract(format!(
                        "layer {k}: expected {}x{} weights and {} biases, got {} and {}",
                        w[1],
                        w[0],
                        w[1],
                        weights.len(),
                        biases.len()
                    )));
                }
                Ok(Layer {
                    inputs: w[0],
                    outputs: w[1],
                    weights,
                    biases,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers })
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::contract(format!(
                "{} parameters given, network has {}",
                flat.len(),
                self.parameter_count()
            )));
        }
        let mut it = flat.iter().copied();
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::contract(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        Ok(())
    }

    /// Action values for one input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.affine(&current, &mut next);
            if k < last {
                relu_in_place(&mut next);
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Activations of every layer, input first, output last.
    fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(input.to_vec());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.affine(&trace[k], &mut out);
            if k < last {
                relu_in_place(&mut out);
            }
            trace.push(out);
        }
        trace
    }

    fn check_batch(&self, batch: &[Sample]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::contract("training batch is empty"));
        }
        for s in batch {
            self.check_input(&s.input)?;
            if s.action >= self.output_dim() {
                return Err(Error::contract(format!(
                    "action {} out of range for {} outputs",
                    s.action,
                    self.output_dim()
                )));
            }
            if !s.target.is_finite() {
                return Err(Error::contract(format!("non-finite target {}", s.target)));
            }
        }
        Ok(())
    }

    /// Half mean squared error over the chosen actions: `(1/2B) sum (Q(s)[a] - y)^2`.
    pub fn loss(&self, batch: &[Sample]) -> Result<f64> {
        self.check_batch(batch)?;
        let mut total = 0.0;
        for s in batch {
            let q = self.forward(&s.input)?;
            let err = q[s.action] - s.target;
            total += err * err;
        }
        Ok(0.5 * total / batch.len() as f64)
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn gradients(&self, batch: &[Sample]) -> Result<(f64, Gradients)> {
        self.check_batch(batch)?;
        let scale = 1.0 / batch.len() as f64;
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
            .collect();
        let mut loss = 0.0;

        for sample in batch {
            let trace = self.forward_trace(&sample.input);
            let output = &trace[trace.len() - 1];
            let err = output[sample.action] - sample.target;
            loss += 0.5 * err * err * scale;

            // Only the chosen action's output carries error.
            let mut delta = vec![0.0; output.len()];
            delta[sample.action] = err * scale;

            for k in (0..self.layers.len()).rev() {
                let layer = &self.layers[k];
                let input = &trace[k];
                let (gw, gb) = &mut grads[k];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, &x) in row.iter_mut().zip(input) {
                        *g += d * x;
                    }
                }
                if k == 0 {
                    break;
                }
                // Back through the weights, then the rectifier of the layer below.
                let mut below = vec![0.0; layer.inputs];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (b, &w) in below.iter_mut().zip(row) {
                        *b += d * w;
                    }
                }
                for (b, &a) in below.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *b = 0.0;
                    }
                }
                delta = below;
            }
        }
        Ok((loss, Gradients { layers: grads }))
    }

    /// One plain gradient-descent step. Returns the loss before the step.
    pub fn train_step(&mut self, batch: &[Sample], lr: f64) -> Result<f64> {
        let (loss, grads) = self.gradients(batch)?;
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(grads.layers) {
            for (w, g) in layer.weights.iter_mut().zip(gw) {
                *w -= lr * g;
            }
            for (b, g) in layer.biases.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
        Ok(loss)
    }

    pub fn to_json(&self) -> String {
        let doc = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            layer_dims: self.layer_dims(),
            activation: HIDDEN_ACTIVATION.into(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    weights: l.weights.clone(),
                    biases: l.biases.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Model(format!("unreadable model: {e}")))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unknown model format {:?}", doc.format)));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "model version {} not supported (expected {MODEL_VERSION})",
                doc.version
            )));
        }
        if doc.activation != HIDDEN_ACTIVATION {
            return Err(Error::Model(format!("unsupported activation {:?}", doc.activation)));
        }
        let params = doc.layers.into_iter().map(|l| (l.weights, l.biases)).collect();
        Self::from_parameters(&doc.layer_dims, params).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn relu_in_place(values: &mut [f64]) {
    for v in values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::contract(format!("invalid layer dims {dims:?}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    layer_dims: Vec<usize>,
    activation: String,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<f64>,
    biases: Vec<f64>,
}
