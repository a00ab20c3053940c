//! Forward/backward passes for the ReLU MLP with softmax cross-entropy.

use super::{Layer, ModelParams, NnError};
use crate::data::Dataset;

/// Weight and bias gradients for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl LayerGrads {
    pub fn zeros_like(layer: &Layer) -> Self {
        Self { w: vec![0.0; layer.w.len()], b: vec![0.0; layer.out_dim] }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.w.len() + self.b.len());
        out.extend_from_slice(&self.w);
        out.extend_from_slice(&self.b);
        out
    }
}

/// out[b, o] = sum_k x[b, k] * w[o, k] + bias[o]
fn affine(x: &[f64], batch: usize, layer: &Layer, out: &mut Vec<f64>) {
    let (k_dim, o_dim) = (layer.in_dim, layer.out_dim);
    out.clear();
    out.reserve(batch * o_dim);
    for bi in 0..batch {
        let row = &x[bi * k_dim..(bi + 1) * k_dim];
        for o in 0..o_dim {
            let w_row = &layer.w[o * k_dim..(o + 1) * k_dim];
            let mut acc = layer.b[o];
            for (a, w) in row.iter().zip(w_row) {
                acc += a * w;
            }
            out.push(acc);
        }
    }
}

fn gather_batch(dataset: &Dataset, indices: &[u32]) -> Vec<f64> {
    let dim = dataset.dim();
    let mut x = Vec::with_capacity(indices.len() * dim);
    for &i in indices {
        x.extend(dataset.row(i as usize).iter().map(|&v| v as f64));
    }
    x
}

/// Logits for a batch of rows.
pub fn forward(model: &ModelParams, dataset: &Dataset, indices: &[u32]) -> Result<Vec<f64>, NnError> {
    if dataset.dim() != model.input_dim() {
        return Err(NnError::ShapeMismatch("batch dim != model input dim"));
    }
    let batch = indices.len();
    let mut act = gather_batch(dataset, indices);
    let mut next = Vec::new();
    let last = model.layers().len() - 1;
    for (li, layer) in model.layers().iter().enumerate() {
        affine(&act, batch, layer, &mut next);
        if li != last {
            for v in next.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        std::mem::swap(&mut act, &mut next);
    }
    Ok(act)
}

fn softmax_rows(logits: &mut [f64], batch: usize, classes: usize) {
    for bi in 0..batch {
        let row = &mut logits[bi * classes..(bi + 1) * classes];
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Mean cross-entropy loss and per-layer gradients for a batch.
pub fn backward(
    model: &ModelParams,
    dataset: &Dataset,
    indices: &[u32],
) -> Result<(Vec<LayerGrads>, f64), NnError> {
    if dataset.dim() != model.input_dim() {
        return Err(NnError::ShapeMismatch("batch dim != model input dim"));
    }
    if indices.is_empty() {
        return Err(NnError::ShapeMismatch("empty batch"));
    }
    let batch = indices.len();
    let layers = model.layers();
    let last = layers.len() - 1;

    // Forward with cached post-activation values per layer.
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers.len() + 1);
    acts.push(gather_batch(dataset, indices));
    for (li, layer) in layers.iter().enumerate() {
        let mut z = Vec::new();
        affine(acts.last().unwrap(), batch, layer, &mut z);
        if li != last {
            for v in z.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        acts.push(z);
    }

    let classes = model.output_dim();
    let mut probs = acts.pop().unwrap();
    softmax_rows(&mut probs, batch, classes);

    let mut loss = 0.0;
    for (bi, &i) in indices.iter().enumerate() {
        let p = probs[bi * classes + dataset.label(i as usize) as usize];
        loss -= (p.max(1e-300)).ln();
    }
    loss /= batch as f64;

    // delta = (softmax - onehot) / batch, then walk layers backwards.
    let mut delta = probs;
    for (bi, &i) in indices.iter().enumerate() {
        delta[bi * classes + dataset.label(i as usize) as usize] -= 1.0;
    }
    let inv_b = 1.0 / batch as f64;
    for v in delta.iter_mut() {
        *v *= inv_b;
    }

    let mut grads: Vec<LayerGrads> = layers.iter().map(LayerGrads::zeros_like).collect();
    for li in (0..layers.len()).rev() {
        let layer = &layers[li];
        let (k_dim, o_dim) = (layer.in_dim, layer.out_dim);
        let a_prev = &acts[li];
        let g = &mut grads[li];
        // dW[o, k] += delta[b, o] * a_prev[b, k]; db[o] += delta[b, o]
        for bi in 0..batch {
            let d_row = &delta[bi * o_dim..(bi + 1) * o_dim];
            let a_row = &a_prev[bi * k_dim..(bi + 1) * k_dim];
            for (o, &d) in d_row.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.b[o] += d;
                let w_row = &mut g.w[o * k_dim..(o + 1) * k_dim];
                for (wk, &a) in w_row.iter_mut().zip(a_row) {
                    *wk += d * a;
                }
            }
        }
        if li == 0 {
            break;
        }
        // delta_prev[b, k] = sum_o delta[b, o] * W[o, k], gated by ReLU
        let mut prev = vec![0.0; batch * k_dim];
        for bi in 0..batch {
            let d_row = &delta[bi * o_dim..(bi + 1) * o_dim];
            let p_row = &mut prev[bi * k_dim..(bi + 1) * k_dim];
            for (o, &d) in d_row.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let w_row = &layer.w[o * k_dim..(o + 1) * k_dim];
                for (p, &w) in p_row.iter_mut().zip(w_row) {
                    *p += d * w;
                }
            }
            // a_prev is the post-ReLU activation; zero means the unit was off
            let a_row = &a_prev[bi * k_dim..(bi + 1) * k_dim];
            for (p, &a) in p_row.iter_mut().zip(a_row) {
                if a == 0.0 {
                    *p = 0.0;
                }
            }
        }
        delta = prev;
    }
    Ok((grads, loss))
}

/// Accuracy and mean loss over an index set, batched.
pub fn evaluate(model: &ModelParams, dataset: &Dataset, indices: &[u32]) -> Result<(f64, f64), NnError> {
    let classes = model.output_dim();
    let mut correct = 0usize;
    let mut loss = 0.0f64;
    for chunk in indices.chunks(256) {
        let mut logits = forward(model, dataset, chunk)?;
        softmax_rows(&mut logits, chunk.len(), classes);
        for (bi, &i) in chunk.iter().enumerate() {
            let row = &logits[bi * classes..(bi + 1) * classes];
            let label = dataset.label(i as usize) as usize;
            let pred = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            correct += usize::from(pred == label);
            loss -= row[label].max(1e-300).ln();
        }
    }
    let n = indices.len() as f64;
    Ok((correct as f64 / n, loss / n))
}
