use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

use super::activation::{sech, sigmoid};
use super::spec::{NetworkSpec, Unit};
use super::Activation;
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};
use crate::seed::{self, Stream};

/// One affine map with its prune masks. `true` in a mask freezes the
/// parameter at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub weight_mask: Array2<bool>,
    pub bias_mask: Array1<bool>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            weights: Array2::zeros((rows, cols)),
            bias: Array1::zeros(rows),
            weight_mask: Array2::from_elem((rows, cols), false),
            bias_mask: Array1::from_elem(rows, false),
        }
    }

    pub fn rows(&self) -> usize {
        self.weights.nrows()
    }

    pub fn cols(&self) -> usize {
        self.weights.ncols()
    }

    fn affine_into(&self, x: &[f64], z: &mut [f64]) {
        let w = self.weights.as_slice().expect("weights are row-major");
        let cols = x.len();
        for (r, zr) in z.iter_mut().enumerate() {
            let row = &w[r * cols..(r + 1) * cols];
            let mut acc = self.bias[r];
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *zr = acc;
        }
    }
}

/// Trainable equation learner network. The last layer is the linear output
/// layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EqlNetwork {
    spec: NetworkSpec,
    layers: Vec<Layer>,
    units: Vec<Vec<Unit>>,
}

/// Parameter gradient, shape-aligned with [`EqlNetwork`]'s layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub d_weights: Array2<f64>,
    pub d_biases: Array1<f64>,
}

impl Gradient {
    pub fn zeros_like(net: &EqlNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    d_weights: Array2::zeros(l.weights.raw_dim()),
                    d_biases: Array1::zeros(l.rows()),
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradient) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.d_weights += &b.d_weights;
            a.d_biases += &b.d_biases;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.d_weights *= factor;
            l.d_biases *= factor;
        }
    }

    /// Flattened entries in the same order as [`EqlNetwork::params`].
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.d_weights.iter().chain(l.d_biases.iter()).copied())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| l.d_weights.iter_mut().chain(l.d_biases.iter_mut()))
    }

    pub fn len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.d_weights.len() + l.d_biases.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply_mask(&mut self, net: &EqlNetwork) {
        for (g, l) in self.layers.iter_mut().zip(&net.layers) {
            for (d, &m) in g.d_weights.iter_mut().zip(l.weight_mask.iter()) {
                if m {
                    *d = 0.0;
                }
            }
            for (d, &m) in g.d_biases.iter_mut().zip(l.bias_mask.iter()) {
                if m {
                    *d = 0.0;
                }
            }
        }
    }
}

/// Per-row activations of every layer.
struct Trace {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl EqlNetwork {
    /// Glorot-uniform weights, zero biases, empty masks.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = seed::rng(seed, Stream::Init, 0);
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(rows, cols)| {
                let bound = (6.0 / (rows + cols) as f64).sqrt();
                let mut layer = Layer::zeros(rows, cols);
                for w in layer.weights.iter_mut() {
                    *w = rng.random_range(-bound..bound);
                }
                layer
            })
            .collect();
        Self::from_layers(spec, layers)
    }

    /// All-zero network (useful for hand-built models).
    pub fn zeros(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(r, c)| Layer::zeros(r, c))
            .collect();
        Self::from_layers(spec, layers)
    }

    pub fn from_layers(spec: NetworkSpec, layers: Vec<Layer>) -> Result<Self> {
        spec.validate()?;
        let shapes = spec.layer_shapes();
        if shapes.len() != layers.len() {
            return Err(Error::dim("layer count", shapes.len(), layers.len()));
        }
        let mut layers = layers;
        for (layer, &(rows, cols)) in layers.iter_mut().zip(&shapes) {
            if layer.weights.dim() != (rows, cols) {
                return Err(Error::InvalidSpec(format!(
                    "weight matrix is {:?}, spec requires {:?}",
                    layer.weights.dim(),
                    (rows, cols)
                )));
            }
            if layer.bias.len() != rows
                || layer.weight_mask.dim() != (rows, cols)
                || layer.bias_mask.len() != rows
            {
                return Err(Error::InvalidSpec("bias or mask shape mismatch".into()));
            }
            if !layer.weights.is_standard_layout() {
                layer.weights = layer.weights.as_standard_layout().into_owned();
            }
        }
        let units = spec.hidden.iter().map(|l| l.units()).collect();
        let mut net = Self {
            spec,
            layers,
            units,
        };
        net.enforce_mask();
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Direct parameter access. Call [`Self::enforce_mask`] after editing
    /// masks by hand.
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim
    }

    pub fn hidden_units(&self, layer: usize) -> &[Unit] {
        &self.units[layer]
    }

    /// Zeroes every masked parameter.
    pub fn enforce_mask(&mut self) {
        for l in &mut self.layers {
            for (w, &m) in l.weights.iter_mut().zip(l.weight_mask.iter()) {
                if m {
                    *w = 0.0;
                }
            }
            for (b, &m) in l.bias.iter_mut().zip(l.bias_mask.iter()) {
                if m {
                    *b = 0.0;
                }
            }
        }
    }

    /// Flattened `(value, masked)` pairs: per layer, weights row-major, then
    /// biases.
    pub fn params(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.layers.iter().flat_map(|l| {
            l.weights
                .iter()
                .zip(l.weight_mask.iter())
                .chain(l.bias.iter().zip(l.bias_mask.iter()))
                .map(|(&v, &m)| (v, m))
        })
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = (&mut f64, &mut bool)> + '_ {
        self.layers.iter_mut().flat_map(|l| {
            l.weights
                .iter_mut()
                .zip(l.weight_mask.iter_mut())
                .chain(l.bias.iter_mut().zip(l.bias_mask.iter_mut()))
        })
    }

    pub fn param_count(&self) -> usize {
        self.spec.param_count()
    }

    pub fn nonzero_count(&self) -> usize {
        self.params().filter(|&(v, _)| v != 0.0).count()
    }

    pub fn masked_count(&self) -> usize {
        self.params().filter(|&(_, m)| m).count()
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(|(v, _)| v.is_finite())
    }

    /// Magnitude pruning: every parameter with `|θ| < threshold` is set to
    /// zero and frozen. Returns how many parameters were newly frozen.
    pub fn prune_below(&mut self, threshold: f64) -> usize {
        let mut newly = 0;
        for (v, m) in self.params_mut() {
            if !*m && v.abs() < threshold {
                *v = 0.0;
                *m = true;
                newly += 1;
            }
        }
        newly
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.spec.input_dim {
            return Err(Error::dim("network input", self.spec.input_dim, len));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input.len())?;
        let mut trace = self.new_trace();
        let mut out = vec![0.0; self.spec.output_dim];
        self.forward_row(input, &mut trace, &mut out);
        Ok(out)
    }

    pub fn forward_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.forward_batch_with(inputs, ExecMode::for_rows(inputs.nrows()))
    }

    pub fn forward_batch_with(
        &self,
        inputs: ArrayView2<'_, f64>,
        mode: ExecMode,
    ) -> Result<Array2<f64>> {
        self.check_input(inputs.ncols())?;
        let d = self.spec.output_dim;
        let chunks = par::map_chunks(mode, inputs.nrows(), |start, end| {
            let mut trace = self.new_trace();
            let mut row_buf = vec![0.0; inputs.ncols()];
            let mut out = vec![0.0; (end - start) * d];
            for (r, o) in (start..end).zip(out.chunks_mut(d)) {
                copy_row(inputs, r, &mut row_buf);
                self.forward_row(&row_buf, &mut trace, o);
            }
            out
        });
        let flat: Vec<f64> = chunks.into_iter().flatten().collect();
        Ok(Array2::from_shape_vec((inputs.nrows(), d), flat).expect("row count preserved"))
    }

    /// Gradient of `Σ_rows ⟨output_grad_row, output_row⟩` with respect to all
    /// parameters. Masked entries are zero.
    pub fn backward(
        &self,
        inputs: ArrayView2<'_, f64>,
        output_grad: ArrayView2<'_, f64>,
    ) -> Result<Gradient> {
        if output_grad.dim() != (inputs.nrows(), self.spec.output_dim) {
            return Err(Error::dim(
                "output gradient rows",
                inputs.nrows() * self.spec.output_dim,
                output_grad.len(),
            ));
        }
        let (_, grad) = self.loss_and_gradient(
            inputs,
            ExecMode::for_rows(inputs.nrows()),
            |r, _out, d_out| {
                for (d, g) in d_out.iter_mut().zip(output_grad.row(r)) {
                    *d = *g;
                }
                0.0
            },
        )?;
        Ok(grad)
    }

    /// Runs forward and backward in one pass. For each row, `per_row(row,
    /// output, d_output)` writes `∂loss/∂output` into `d_output` and returns
    /// the row's loss contribution. Returns the summed loss and gradient.
    pub fn loss_and_gradient<F>(
        &self,
        inputs: ArrayView2<'_, f64>,
        mode: ExecMode,
        per_row: F,
    ) -> Result<(f64, Gradient)>
    where
        F: Fn(usize, &[f64], &mut [f64]) -> f64 + Sync + Send,
    {
        self.check_input(inputs.ncols())?;
        let parts = par::map_chunks(mode, inputs.nrows(), |start, end| {
            self.chunk_gradient(inputs, start, end, &per_row)
        });
        let mut loss = 0.0;
        let mut grad = Gradient::zeros_like(self);
        for (l, g) in parts {
            loss += l;
            grad.add_assign(&g);
        }
        grad.apply_mask(self);
        Ok((loss, grad))
    }

    fn chunk_gradient<F>(
        &self,
        inputs: ArrayView2<'_, f64>,
        start: usize,
        end: usize,
        per_row: &F,
    ) -> (f64, Gradient)
    where
        F: Fn(usize, &[f64], &mut [f64]) -> f64,
    {
        let mut grad = Gradient::zeros_like(self);
        let mut trace = self.new_trace();
        let mut row_buf = vec![0.0; inputs.ncols()];
        let d = self.spec.output_dim;
        let mut out = vec![0.0; d];
        let mut d_out = vec![0.0; d];
        let mut loss = 0.0;
        for r in start..end {
            copy_row(inputs, r, &mut row_buf);
            self.forward_row(&row_buf, &mut trace, &mut out);
            d_out.iter_mut().for_each(|v| *v = 0.0);
            loss += per_row(r, &out, &mut d_out);
            self.backward_row(&row_buf, &trace, &d_out, &mut grad);
        }
        (loss, grad)
    }

    fn new_trace(&self) -> Trace {
        Trace {
            pre: self.spec.hidden.iter().map(|l| vec![0.0; l.pre_width()]).collect(),
            post: self.spec.hidden.iter().map(|l| vec![0.0; l.out_width()]).collect(),
        }
    }

    fn forward_row(&self, input: &[f64], trace: &mut Trace, out: &mut [f64]) {
        let hidden = self.units.len();
        for l in 0..hidden {
            let (before, rest) = trace.post.split_at_mut(l);
            let x: &[f64] = if l == 0 { input } else { &before[l - 1] };
            self.layers[l].affine_into(x, &mut trace.pre[l]);
            activate(&self.units[l], &trace.pre[l], &mut rest[0]);
        }
        self.layers[hidden].affine_into(&trace.post[hidden - 1], out);
    }

    fn backward_row(&self, input: &[f64], trace: &Trace, d_out: &[f64], grad: &mut Gradient) {
        let mut delta = d_out.to_vec();
        for l in (0..self.layers.len()).rev() {
            let x: &[f64] = if l == 0 { input } else { &trace.post[l - 1] };
            let layer = &self.layers[l];
            let g = &mut grad.layers[l];
            let cols = x.len();
            {
                let dw = g.d_weights.as_slice_mut().expect("row-major");
                for (r, &dr) in delta.iter().enumerate() {
                    if dr == 0.0 {
                        continue;
                    }
                    g.d_biases[r] += dr;
                    let row = &mut dw[r * cols..(r + 1) * cols];
                    for (gw, &xi) in row.iter_mut().zip(x) {
                        *gw += dr * xi;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let w = layer.weights.as_slice().expect("row-major");
            let mut dy = vec![0.0; cols];
            for (r, &dr) in delta.iter().enumerate() {
                if dr == 0.0 {
                    continue;
                }
                for (d, &wv) in dy.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
                    *d += dr * wv;
                }
            }
            let mut dz = vec![0.0; trace.pre[l - 1].len()];
            activate_backward(&self.units[l - 1], &trace.pre[l - 1], &trace.post[l - 1], &dy, &mut dz);
            delta = dz;
        }
    }
}

fn copy_row(m: ArrayView2<'_, f64>, r: usize, buf: &mut [f64]) {
    for (b, v) in buf.iter_mut().zip(m.row(r)) {
        *b = *v;
    }
}

fn activate(units: &[Unit], z: &[f64], y: &mut [f64]) {
    for u in units {
        let a = z[u.input];
        y[u.output] = match u.kind {
            Activation::Identity => a,
            Activation::Sin => a.sin(),
            Activation::Cos => a.cos(),
            Activation::Sigmoid => sigmoid(a),
            Activation::Product => a * z[u.input + 1],
            Activation::Sech => sech(a),
        };
    }
}

fn activate_backward(units: &[Unit], z: &[f64], y: &[f64], dy: &[f64], dz: &mut [f64]) {
    for u in units {
        let g = dy[u.output];
        let a = z[u.input];
        match u.kind {
            Activation::Identity => dz[u.input] = g,
            Activation::Sin => dz[u.input] = g * a.cos(),
            Activation::Cos => dz[u.input] = -g * a.sin(),
            Activation::Sigmoid => {
                let s = y[u.output];
                dz[u.input] = g * s * (1.0 - s);
            }
            Activation::Product => {
                dz[u.input] = g * z[u.input + 1];
                dz[u.input + 1] = g * a;
            }
            Activation::Sech => dz[u.input] = -g * y[u.output] * a.tanh(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerSpec;
    use ndarray::array;

    fn single(layer: LayerSpec, input_dim: usize) -> EqlNetwork {
        EqlNetwork::zeros(NetworkSpec::new(input_dim, vec![layer], 1).unwrap()).unwrap()
    }

    #[test]
    fn init_shapes_and_determinism() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1).unwrap();
        let a = EqlNetwork::init(spec.clone(), 11).unwrap();
        let b = EqlNetwork::init(spec.clone(), 11).unwrap();
        let c = EqlNetwork::init(spec, 12).unwrap();
        assert_eq!(a.layers()[0].weights.dim(), (7, 2));
        assert_eq!(a.layers()[1].weights.dim(), (1, 6));
        assert!(a.layers().iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        assert_eq!(a.masked_count(), 0);
        let bits = |n: &EqlNetwork| n.params().map(|(v, _)| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn product_unit_multiplies_pair() {
        let mut net = single(
            LayerSpec {
                product: 1,
                ..Default::default()
            },
            2,
        );
        let l = net.layers_mut();
        l[0].weights[[0, 0]] = 1.0;
        l[0].weights[[1, 1]] = 1.0;
        l[1].weights[[0, 0]] = 1.0;
        assert_eq!(net.forward(&[2.0, 3.0]).unwrap(), vec![6.0]);
    }

    #[test]
    fn sigmoid_and_sech_at_zero() {
        let mut sig = single(
            LayerSpec {
                sigmoid: 1,
                ..Default::default()
            },
            1,
        );
        sig.layers_mut()[1].weights[[0, 0]] = 1.0;
        assert_eq!(sig.forward(&[0.0]).unwrap(), vec![0.5]);
        let mut sh = single(
            LayerSpec {
                sech: 1,
                ..Default::default()
            },
            1,
        );
        sh.layers_mut()[1].weights[[0, 0]] = 1.0;
        assert_eq!(sh.forward(&[0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn dimension_errors() {
        let net = single(LayerSpec::uniform(1), 2);
        assert!(net.forward(&[1.0]).is_err());
        assert!(net.forward_batch(array![[1.0, 2.0, 3.0]].view()).is_err());
        let g = array![[1.0, 2.0]];
        assert!(net.backward(array![[1.0, 2.0]].view(), g.view()).is_err());
    }

    #[test]
    fn zero_output_grad_gives_zero_gradient() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1); 2], 2).unwrap();
        let net = EqlNetwork::init(spec, 3).unwrap();
        let x = array![[0.3, -1.2], [1.0, 0.5]];
        let g = net.backward(x.view(), Array2::zeros((2, 2)).view()).unwrap();
        assert!(g.values().all(|v| v == 0.0));
    }

    #[test]
    fn product_weight_gradient_by_hand() {
        // y = w_out * (w0 x0)(w1 x1); ∂y/∂w0 = w_out * x0 * z1.
        let mut net = single(
            LayerSpec {
                product: 1,
                ..Default::default()
            },
            2,
        );
        let l = net.layers_mut();
        l[0].weights[[0, 0]] = 0.7;
        l[0].weights[[1, 1]] = -1.3;
        l[1].weights[[0, 0]] = 2.0;
        let (x0, x1) = (1.5, 0.4);
        let z1 = -1.3 * x1;
        let upstream = 0.25;
        let g = net
            .backward(array![[x0, x1]].view(), array![[upstream]].view())
            .unwrap();
        let expect = upstream * 2.0 * z1 * x0;
        assert!((g.layers[0].d_weights[[0, 0]] - expect).abs() < 1e-15);
        let expect01 = upstream * 2.0 * z1 * x1;
        assert!((g.layers[0].d_weights[[0, 1]] - expect01).abs() < 1e-15);
    }

    #[test]
    fn masked_gradients_are_zero() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1).unwrap();
        let mut net = EqlNetwork::init(spec, 5).unwrap();
        net.layers_mut()[0].weight_mask[[1, 0]] = true;
        net.layers_mut()[1].bias_mask[0] = true;
        net.enforce_mask();
        assert_eq!(net.layers()[0].weights[[1, 0]], 0.0);
        let g = net
            .backward(array![[0.5, 0.9]].view(), array![[1.0]].view())
            .unwrap();
        assert_eq!(g.layers[0].d_weights[[1, 0]], 0.0);
        assert_eq!(g.layers[1].d_biases[0], 0.0);
    }

    #[test]
    fn prune_freezes_small_parameters() {
        let spec = NetworkSpec::new(1, vec![LayerSpec::uniform(1)], 1).unwrap();
        let mut net = EqlNetwork::zeros(spec).unwrap();
        net.layers_mut()[0].weights[[0, 0]] = 0.005;
        net.layers_mut()[0].weights[[1, 0]] = 0.5;
        let pruned = net.prune_below(0.01);
        assert_eq!(pruned, net.param_count() - 1);
        assert_eq!(net.layers()[0].weights[[0, 0]], 0.0);
        assert!(net.layers()[0].weight_mask[[0, 0]]);
        assert_eq!(net.nonzero_count(), 1);
    }
}
