use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numkit::rng::seeded;
use crate::numkit::Mat;

/// Fully connected layer `out = input · weights + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `in_dim × out_dim`
    pub weights: Mat,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn n_params(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.bias.len()
    }

    fn forward(&self, input: &Mat) -> Mat {
        let mut out = input.matmul(&self.weights).expect("layer shapes chain");
        for i in 0..out.rows() {
            for (o, b) in out.row_mut(i).iter_mut().zip(&self.bias) {
                *o += b;
            }
        }
        out
    }
}

/// Encoder `f` followed by expander `h`, rectifier on hidden layers and
/// linear outputs for both parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyEncoder {
    layers: Vec<Dense>,
    /// Number of leading layers that make up the encoder.
    encoder_depth: usize,
}

/// Activations kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of every layer, plus the final output last.
    inputs: Vec<Mat>,
    /// Pre-activation output of every layer.
    pre: Vec<Mat>,
}

impl ForwardCache {
    pub fn output(&self) -> &Mat {
        self.inputs.last().expect("non-empty")
    }

    /// Encoder output (the representation fed to the expander).
    pub fn representation(&self, enc: &ToyEncoder) -> &Mat {
        &self.inputs[enc.encoder_depth]
    }
}

impl ToyEncoder {
    /// LeCun-normal initialised network (weight std `1/√fan_in`) with zero
    /// biases. `encoder_dims` and
    /// `expander_dims` list layer widths including input and output, and the
    /// expander input must equal the encoder output.
    pub fn new(encoder_dims: &[usize], expander_dims: &[usize], seed: u64) -> Result<ToyEncoder> {
        if encoder_dims.len() < 2 || expander_dims.len() < 2 {
            return Err(Error::InvalidInput("each part needs at least one layer".into()));
        }
        if encoder_dims.last() != expander_dims.first() {
            return Err(Error::Shape(format!(
                "encoder output {:?} does not feed expander input {:?}",
                encoder_dims.last(),
                expander_dims.first()
            )));
        }
        if encoder_dims.iter().chain(expander_dims).any(|&d| d == 0) {
            return Err(Error::InvalidInput("zero-width layer".into()));
        }
        let mut rng = seeded(seed);
        let mut layers = Vec::new();
        for dims in [encoder_dims, expander_dims] {
            for w in dims.windows(2) {
                let std = (1.0 / w[0] as f64).sqrt();
                let normal = Normal::new(0.0, std).expect("positive std");
                layers.push(Dense {
                    weights: Mat::from_fn(w[0], w[1], |_, _| normal.sample(&mut rng)),
                    bias: vec![0.0; w[1]],
                });
            }
        }
        Ok(ToyEncoder {
            layers,
            encoder_depth: encoder_dims.len() - 1,
        })
    }

    /// Default shape: `input → 32 → 16` encoder, `16 → 32 → 32` expander.
    pub fn with_default_shape(input_dim: usize, seed: u64) -> Result<ToyEncoder> {
        ToyEncoder::new(&[input_dim, 32, 16], &[16, 32, 32], seed)
    }

    /// Rebuilds a network from explicit layers.
    pub fn from_layers(layers: Vec<Dense>, encoder_depth: usize) -> Result<ToyEncoder> {
        if encoder_depth == 0 || encoder_depth >= layers.len() {
            return Err(Error::InvalidInput(format!(
                "encoder depth {encoder_depth} with {} layers",
                layers.len()
            )));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.out_dim() {
                return Err(Error::Shape(format!("layer {i}: bias length {}", l.bias.len())));
            }
            if l.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} bias")));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape(format!("layers {i} and {} do not chain", i + 1)));
            }
        }
        Ok(ToyEncoder { layers, encoder_depth })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn encoder_depth(&self) -> usize {
        self.encoder_depth
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn representation_dim(&self) -> usize {
        self.layers[self.encoder_depth - 1].out_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").out_dim()
    }

    fn rectified(&self, layer: usize) -> bool {
        layer + 1 != self.encoder_depth && layer + 1 != self.layers.len()
    }

    pub fn forward(&self, x: &Mat) -> Result<ForwardCache> {
        if x.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        let mut inputs = vec![x.clone()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let p = layer.forward(inputs.last().expect("non-empty"));
            let a = if self.rectified(i) {
                p.map(|v| v.max(0.0))
            } else {
                p.clone()
            };
            pre.push(p);
            inputs.push(a);
        }
        Ok(ForwardCache { inputs, pre })
    }

    /// Encoder output only.
    pub fn represent(&self, x: &Mat) -> Result<Mat> {
        let cache = self.forward(x)?;
        Ok(cache.inputs[self.encoder_depth].clone())
    }

    /// Expander output.
    pub fn embed(&self, x: &Mat) -> Result<Mat> {
        Ok(self.forward(x)?.inputs.pop().expect("non-empty"))
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    /// Parameter offsets of each layer in the flat layout (weights row-major,
    /// then bias).
    pub fn layer_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.layers
            .iter()
            .map(|l| {
                let r = start..start + l.n_params();
                start = r.end;
                r
            })
            .collect()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.rows() * l.weights.cols();
            for i in 0..l.weights.rows() {
                let c = l.weights.cols();
                l.weights
                    .row_mut(i)
                    .copy_from_slice(&flat[off + i * c..off + (i + 1) * c]);
            }
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
    }

    /// Gradient of a scalar loss with respect to all parameters (flat
    /// layout), given the loss gradient at the network output.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Mat) -> Vec<f64> {
        let mut grads: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        let mut delta = grad_out.clone();
        for i in (0..self.layers.len()).rev() {
            if self.rectified(i) {
                let pre = &cache.pre[i];
                for r in 0..delta.rows() {
                    for (d, p) in delta.row_mut(r).iter_mut().zip(pre.row(r)) {
                        if *p <= 0.0 {
                            *d = 0.0;
                        }
                    }
                }
            }
            let layer = &self.layers[i];
            let gw = cache.inputs[i].t_matmul(&delta).expect("shapes chain");
            let mut gb = vec![0.0; layer.out_dim()];
            for r in delta.row_iter() {
                for (g, d) in gb.iter_mut().zip(r) {
                    *g += d;
                }
            }
            let mut g = gw.into_vec();
            g.extend(gb);
            grads[i] = g;
            if i > 0 {
                delta = delta.matmul(&layer.weights.transpose()).expect("shapes chain");
            }
        }
        grads.concat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_flat_params() {
        let mut enc = ToyEncoder::with_default_shape(5, 1).unwrap();
        assert_eq!(enc.representation_dim(), 16);
        assert_eq!(enc.output_dim(), 32);
        assert_eq!(enc.n_params(), 5 * 32 + 32 + 32 * 16 + 16 + 16 * 32 + 32 + 32 * 32 + 32);
        let p = enc.params();
        let shifted: Vec<f64> = p.iter().map(|v| v + 1.0).collect();
        enc.set_params(&shifted);
        assert_eq!(enc.params(), shifted);
        let ranges = enc.layer_ranges();
        assert_eq!(ranges.last().unwrap().end, enc.n_params());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ToyEncoder::new(&[4, 8], &[7, 3], 0).is_err());
        assert!(ToyEncoder::new(&[4], &[4, 3], 0).is_err());
        let enc = ToyEncoder::new(&[4, 8], &[8, 3], 0).unwrap();
        assert!(enc.forward(&Mat::zeros(2, 5)).is_err());
    }

    #[test]
    fn linear_output_layers() {
        // Outputs of both parts can be negative; hidden activations cannot.
        let enc = ToyEncoder::new(&[3, 6, 4], &[4, 6, 5], 9).unwrap();
        let x = Mat::from_fn(40, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin());
        let cache = enc.forward(&x).unwrap();
        assert!(cache.inputs[1].as_slice().iter().all(|v| *v >= 0.0));
        assert!(cache.inputs[3].as_slice().iter().all(|v| *v >= 0.0));
        assert!(cache.inputs[2].as_slice().iter().any(|v| *v < 0.0));
        assert!(cache.output().as_slice().iter().any(|v| *v < 0.0));
    }
}
