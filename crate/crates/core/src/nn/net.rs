use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis, s};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::layers::*;
use super::{real, Alloc, Real, Slot};
use crate::{seed, Error, Result};

/// How head logits become scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    /// Independent logistic unit per output.
    Sigmoid,
    /// Normalized exponential across all outputs of the (single) head.
    Softmax,
}

/// Full network shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_channels: usize,
    pub input_len: usize,
    pub block_filters: Vec<usize>,
    pub kernel_size: usize,
    pub feature_dim: usize,
    pub heads: usize,
    pub hidden_width: usize,
    pub outputs_per_head: usize,
    pub output: OutputKind,
    pub l2_weight: f64,
}

impl NetSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("input_channels", self.input_channels),
            ("input_len", self.input_len),
            ("kernel_size", self.kernel_size),
            ("feature_dim", self.feature_dim),
            ("heads", self.heads),
            ("hidden_width", self.hidden_width),
            ("outputs_per_head", self.outputs_per_head),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.block_filters.is_empty() || self.block_filters.contains(&0) {
            return Err(Error::Config("block_filters must be a nonempty list of positive counts".into()));
        }
        if self.kernel_size % 2 == 0 {
            return Err(Error::Config("kernel_size must be odd".into()));
        }
        let pools = self.block_filters.len() - 1;
        if pools >= usize::BITS as usize || self.input_len % (1 << pools) != 0 {
            return Err(Error::Config(format!(
                "input length {} cannot be halved {pools} times",
                self.input_len
            )));
        }
        if self.output == OutputKind::Softmax && (self.heads != 1 || self.outputs_per_head < 2) {
            return Err(Error::Config("softmax output needs one head with at least two outputs".into()));
        }
        if !(self.l2_weight >= 0.0) {
            return Err(Error::Config("l2_weight must be non-negative".into()));
        }
        Ok(())
    }

    pub fn n_outputs(&self) -> usize {
        self.heads * self.outputs_per_head
    }
}

#[derive(Debug, Clone, Copy)]
struct Conv {
    cin: usize,
    cout: usize,
    k: usize,
    w: Slot,
    b: Slot,
}

impl Conv {
    fn new(alloc: &mut Alloc, cin: usize, cout: usize, k: usize) -> Self {
        Conv {
            cin,
            cout,
            k,
            w: alloc.take(cout * cin * k),
            b: alloc.take(cout),
        }
    }

    fn weight<'a, T: Real>(&self, p: &'a [T]) -> ArrayView2<'a, T> {
        ArrayView2::from_shape((self.cout, self.cin * self.k), &p[self.w.range()]).unwrap()
    }
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    inp: usize,
    out: usize,
    w: Slot,
    b: Slot,
}

impl Dense {
    fn new(alloc: &mut Alloc, inp: usize, out: usize) -> Self {
        Dense {
            inp,
            out,
            w: alloc.take(out * inp),
            b: alloc.take(out),
        }
    }

    fn weight<'a, T: Real>(&self, p: &'a [T]) -> ArrayView2<'a, T> {
        ArrayView2::from_shape((self.out, self.inp), &p[self.w.range()]).unwrap()
    }

    /// `x (batch, inp) -> x · Wᵀ + b`
    fn forward<T: Real>(&self, p: &[T], x: &ArrayView2<T>) -> Array2<T> {
        let mut y = matmul(x, &self.weight(p).t());
        y += &ArrayView1::from(&p[self.b.range()]);
        y
    }

    /// Accumulates parameter gradients; returns the input gradient.
    fn backward<T: Real>(&self, p: &[T], g: &mut [T], x: &ArrayView2<T>, dy: &ArrayView2<T>) -> Array2<T> {
        {
            let mut dw = ArrayViewMut2::from_shape((self.out, self.inp), &mut g[self.w.range()]).unwrap();
            matmul_acc(&dy.t(), x, &mut dw);
        }
        for (gb, s) in g[self.b.range()].iter_mut().zip(dy.sum_axis(Axis(0))) {
            *gb += s;
        }
        matmul(dy, &self.weight(p))
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    proj: Conv,
    conv1: Conv,
    conv2: Conv,
    pool: bool,
}

#[derive(Debug, Clone)]
struct Layout {
    blocks: Vec<Block>,
    feature: Dense,
    hidden: Dense,
    /// Output weights of all heads stacked as `(heads * outputs_per_head, hidden_width)`.
    out: Dense,
    /// Dense kernels subject to L2 regularization.
    l2: Vec<Slot>,
    n_params: usize,
}

impl Layout {
    fn new(spec: &NetSpec) -> Self {
        let mut alloc = Alloc::default();
        let mut blocks = Vec::new();
        let mut cin = spec.input_channels;
        for (i, &f) in spec.block_filters.iter().enumerate() {
            blocks.push(Block {
                proj: Conv::new(&mut alloc, cin, f, 1),
                conv1: Conv::new(&mut alloc, f, f, spec.kernel_size),
                conv2: Conv::new(&mut alloc, f, f, spec.kernel_size),
                pool: i + 1 < spec.block_filters.len(),
            });
            cin = f;
        }
        let feature = Dense::new(&mut alloc, cin, spec.feature_dim);
        let hidden = Dense::new(&mut alloc, spec.feature_dim, spec.heads * spec.hidden_width);
        let out_w = alloc.take(spec.n_outputs() * spec.hidden_width);
        let out_b = alloc.take(spec.n_outputs());
        let out = Dense {
            inp: spec.hidden_width,
            out: spec.n_outputs(),
            w: out_w,
            b: out_b,
        };
        Layout {
            blocks,
            feature,
            hidden,
            out,
            l2: vec![feature.w, hidden.w, out.w],
            n_params: alloc.total(),
        }
    }
}

/// Training targets for one batch.
#[derive(Debug, Clone)]
pub enum Targets<T> {
    /// `(batch, n_outputs)` 0/1 matrix for sigmoid outputs.
    Binary(Array2<T>),
    /// Class index per row for softmax output.
    Categorical(Vec<usize>),
}

struct BlockCache<T> {
    x: Array2<T>,
    col1: Array2<T>,
    h: Array2<T>,
    col2: Array2<T>,
    r: Array2<T>,
    arg: Vec<u8>,
    len: usize,
}

struct Cache<T> {
    batch: usize,
    blocks: Vec<BlockCache<T>>,
    last_len: usize,
    pooled: Array2<T>,
    feature: Array2<T>,
    hidden: Array2<T>,
}

/// Residual feature extractor + classifier bank over a flat parameter buffer.
#[derive(Debug, Clone)]
pub struct Network<T> {
    spec: NetSpec,
    layout: Layout,
    pub params: Vec<T>,
}

impl<T: Real> Network<T> {
    /// He-normal convolution and hidden weights, Glorot-normal output layer,
    /// zero biases.
    pub fn new(spec: NetSpec, init_seed: u64) -> Result<Self> {
        spec.validate()?;
        let layout = Layout::new(&spec);
        let mut params = vec![T::zero(); layout.n_params];
        let mut rng = seed::rng(init_seed, &[seed::tag::INIT]);
        let mut fill = |slot: Slot, std: f64| {
            for p in &mut params[slot.range()] {
                let z: f64 = rng.sample(StandardNormal);
                *p = real(z * std);
            }
        };
        for b in &layout.blocks {
            for c in [b.proj, b.conv1, b.conv2] {
                fill(c.w, (2.0 / (c.cin * c.k) as f64).sqrt());
            }
        }
        fill(layout.feature.w, (2.0 / layout.feature.inp as f64).sqrt());
        fill(layout.hidden.w, (2.0 / layout.hidden.inp as f64).sqrt());
        fill(layout.out.w, (2.0 / (spec.hidden_width + spec.outputs_per_head) as f64).sqrt());
        Ok(Network { spec, layout, params })
    }

    /// Rebuilds a network around an existing parameter vector.
    pub fn from_params(spec: NetSpec, params: Vec<T>) -> Result<Self> {
        spec.validate()?;
        let layout = Layout::new(&spec);
        if params.len() != layout.n_params {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                layout.n_params,
                params.len()
            )));
        }
        Ok(Network { spec, layout, params })
    }

    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn n_params(&self) -> usize {
        self.layout.n_params
    }

    fn forward(&self, input: &Array2<T>, batch: usize) -> (Array2<T>, Cache<T>) {
        let p = &self.params;
        let k = self.spec.kernel_size;
        let mut len = self.spec.input_len;
        assert_eq!(input.dim(), (self.spec.input_channels, batch * len), "input shape");

        let mut x = input.clone();
        let mut caches = Vec::with_capacity(self.layout.blocks.len());
        for b in &self.layout.blocks {
            let mut proj = matmul(&b.proj.weight(p), &x.view());
            add_row_bias(&mut proj, &ArrayView1::from(&p[b.proj.b.range()]));

            let col1 = im2col(&proj, batch, len, k);
            let mut h = matmul(&b.conv1.weight(p), &col1.view());
            add_row_bias(&mut h, &ArrayView1::from(&p[b.conv1.b.range()]));
            relu_inplace(&mut h);

            let col2 = im2col(&h, batch, len, k);
            let mut r = matmul(&b.conv2.weight(p), &col2.view());
            add_row_bias(&mut r, &ArrayView1::from(&p[b.conv2.b.range()]));
            r += &proj;
            relu_inplace(&mut r);

            let (y, arg) = if b.pool { maxpool2(&r) } else { (r.clone(), Vec::new()) };
            caches.push(BlockCache {
                x,
                col1,
                h,
                col2,
                r,
                arg,
                len,
            });
            if b.pool {
                len /= 2;
            }
            x = y;
        }

        let pooled = global_avg_pool(&x, batch, len);
        let mut feature = self.layout.feature.forward(p, &pooled.view());
        relu_inplace(&mut feature);
        let mut hidden = self.layout.hidden.forward(p, &feature.view());
        relu_inplace(&mut hidden);
        let logits = self.head_logits(&hidden);
        (
            logits,
            Cache {
                batch,
                blocks: caches,
                last_len: len,
                pooled,
                feature,
                hidden,
            },
        )
    }

    /// Each head sees only its own slice of the hidden layer.
    fn head_logits(&self, hidden: &Array2<T>) -> Array2<T> {
        let (hw, o) = (self.spec.hidden_width, self.spec.outputs_per_head);
        let w = self.layout.out.weight(&self.params);
        let bias = ArrayView1::from(&self.params[self.layout.out.b.range()]);
        let mut logits = Array2::zeros((hidden.nrows(), self.spec.n_outputs()));
        for h in 0..self.spec.heads {
            let hid = hidden.slice(s![.., h * hw..(h + 1) * hw]);
            let wh = w.slice(s![h * o..(h + 1) * o, ..]);
            let mut dst = logits.slice_mut(s![.., h * o..(h + 1) * o]);
            ndarray::linalg::general_mat_mul(T::one(), &hid, &wh.t(), T::zero(), &mut dst);
        }
        logits += &bias;
        logits
    }

    fn backward(&self, cache: &Cache<T>, dlogits: &Array2<T>, grad: &mut [T]) {
        let p = &self.params;
        let (hw, o) = (self.spec.hidden_width, self.spec.outputs_per_head);
        let batch = cache.batch;
        let k = self.spec.kernel_size;

        // classifier bank
        let out = self.layout.out;
        let mut dhidden = Array2::<T>::zeros(cache.hidden.dim());
        {
            let w = out.weight(p);
            let mut dw = ArrayViewMut2::from_shape((out.out, out.inp), &mut grad[out.w.range()]).unwrap();
            for h in 0..self.spec.heads {
                let dl = dlogits.slice(s![.., h * o..(h + 1) * o]);
                let hid = cache.hidden.slice(s![.., h * hw..(h + 1) * hw]);
                let mut dwh = dw.slice_mut(s![h * o..(h + 1) * o, ..]);
                matmul_acc(&dl.t(), &hid, &mut dwh);
                let mut dh = dhidden.slice_mut(s![.., h * hw..(h + 1) * hw]);
                ndarray::linalg::general_mat_mul(T::one(), &dl, &w.slice(s![h * o..(h + 1) * o, ..]), T::zero(), &mut dh);
            }
        }
        for (gb, s) in grad[out.b.range()].iter_mut().zip(dlogits.sum_axis(Axis(0))) {
            *gb += s;
        }
        relu_backward(&mut dhidden, &cache.hidden);
        let mut dfeature = self
            .layout
            .hidden
            .backward(p, grad, &cache.feature.view(), &dhidden.view());
        relu_backward(&mut dfeature, &cache.feature);
        let dpooled = self
            .layout
            .feature
            .backward(p, grad, &cache.pooled.view(), &dfeature.view());

        let mut dy = global_avg_pool_backward(&dpooled, cache.last_len);
        for (i, (b, c)) in self.layout.blocks.iter().zip(&cache.blocks).enumerate().rev() {
            let len = c.len;
            let mut ds = if b.pool { maxpool2_backward(&dy, &c.arg) } else { dy };
            relu_backward(&mut ds, &c.r);

            conv_param_grads(&b.conv2, grad, &ds, &c.col2);
            let mut dh = col2im(&matmul(&b.conv2.weight(p).t(), &ds.view()), b.conv2.cin, batch, len, k);
            relu_backward(&mut dh, &c.h);

            conv_param_grads(&b.conv1, grad, &dh, &c.col1);
            let mut dproj = col2im(&matmul(&b.conv1.weight(p).t(), &dh.view()), b.conv1.cin, batch, len, k);
            dproj += &ds;

            conv_param_grads(&b.proj, grad, &dproj, &c.x);
            dy = if i > 0 {
                matmul(&b.proj.weight(p).t(), &dproj.view())
            } else {
                Array2::zeros((0, 0))
            };
        }
    }

    fn scores_from_logits(&self, logits: &Array2<T>) -> Array2<T> {
        let mut out = logits.clone();
        match self.spec.output {
            OutputKind::Sigmoid => out.mapv_inplace(sigmoid),
            OutputKind::Softmax => {
                for mut row in out.rows_mut() {
                    let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
                    row.mapv_inplace(|v| (v - m).exp());
                    let z = row.sum();
                    row.mapv_inplace(|v| v / z);
                }
            }
        }
        out
    }

    /// Scores `(batch, n_outputs)` for a `(channels, batch * len)` input.
    pub fn predict(&self, input: &Array2<T>, batch: usize) -> Array2<T> {
        let (logits, _) = self.forward(input, batch);
        self.scores_from_logits(&logits)
    }

    fn l2_penalty(&self) -> T {
        let lambda = real::<T>(self.spec.l2_weight);
        self.layout
            .l2
            .iter()
            .map(|s| self.params[s.range()].iter().map(|&w| w * w).sum::<T>())
            .sum::<T>()
            * lambda
    }

    /// Weighted data loss `Σ wᵢ ℓᵢ / batch` (no regularization).
    pub fn data_loss(&self, input: &Array2<T>, batch: usize, targets: &Targets<T>, weights: &[T]) -> T {
        let (logits, _) = self.forward(input, batch);
        weighted_loss(&logits, targets, weights).0
    }

    /// Data loss plus L2 penalty; this is the objective being minimized.
    pub fn objective(&self, input: &Array2<T>, batch: usize, targets: &Targets<T>, weights: &[T]) -> T {
        self.data_loss(input, batch, targets, weights) + self.l2_penalty()
    }

    /// Returns `(data_loss, gradient of data_loss + L2 penalty)`.
    pub fn loss_and_grad(&self, input: &Array2<T>, batch: usize, targets: &Targets<T>, weights: &[T]) -> (T, Vec<T>) {
        let (logits, cache) = self.forward(input, batch);
        let (loss, dlogits) = weighted_loss(&logits, targets, weights);
        let mut grad = vec![T::zero(); self.layout.n_params];
        self.backward(&cache, &dlogits, &mut grad);
        let two_lambda = real::<T>(2.0 * self.spec.l2_weight);
        for s in &self.layout.l2 {
            for (g, &w) in grad[s.range()].iter_mut().zip(&self.params[s.range()]) {
                *g += two_lambda * w;
            }
        }
        (loss, grad)
    }
}

fn conv_param_grads<T: Real>(c: &Conv, grad: &mut [T], dout: &Array2<T>, col: &Array2<T>) {
    {
        let mut dw = ArrayViewMut2::from_shape((c.cout, c.cin * c.k), &mut grad[c.w.range()]).unwrap();
        matmul_acc(&dout.view(), &col.t(), &mut dw);
    }
    for (gb, s) in grad[c.b.range()].iter_mut().zip(dout.sum_axis(Axis(1))) {
        *gb += s;
    }
}

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Weighted mean loss over the batch and its gradient w.r.t. the logits.
fn weighted_loss<T: Real>(logits: &Array2<T>, targets: &Targets<T>, weights: &[T]) -> (T, Array2<T>) {
    let batch = logits.nrows();
    assert_eq!(weights.len(), batch, "one weight per sample");
    let inv_b = T::one() / T::from(batch).unwrap();
    let mut grad = Array2::<T>::zeros(logits.dim());
    let mut loss = T::zero();
    match targets {
        Targets::Binary(y) => {
            assert_eq!(y.dim(), logits.dim(), "binary target shape");
            for ((row, (z, t)), mut g) in logits
                .rows()
                .into_iter()
                .zip(y.rows())
                .enumerate()
                .map(|(i, r)| (i, r))
                .zip(grad.rows_mut())
            {
                let w = weights[row];
                for ((&zi, &ti), gi) in z.iter().zip(t.iter()).zip(g.iter_mut()) {
                    // softplus(z) - t z, computed stably
                    let l = zi.max(T::zero()) - zi * ti + (T::one() + (-zi.abs()).exp()).ln();
                    loss += w * l;
                    *gi = w * (sigmoid(zi) - ti) * inv_b;
                }
            }
        }
        Targets::Categorical(y) => {
            assert_eq!(y.len(), batch, "categorical target length");
            for (i, (z, mut g)) in logits.rows().into_iter().zip(grad.rows_mut()).enumerate() {
                let w = weights[i];
                let m = z.fold(T::neg_infinity(), |a, &b| a.max(b));
                let sum: T = z.iter().map(|&v| (v - m).exp()).sum();
                let lse = m + sum.ln();
                loss += w * (lse - z[y[i]]);
                for (j, (&zj, gj)) in z.iter().zip(g.iter_mut()).enumerate() {
                    let p = (zj - lse).exp();
                    let onehot = if j == y[i] { T::one() } else { T::zero() };
                    *gj = w * (p - onehot) * inv_b;
                }
            }
        }
    }
    (loss * inv_b, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(output: OutputKind, heads: usize, outs: usize) -> NetSpec {
        NetSpec {
            input_channels: 2,
            input_len: 16,
            block_filters: vec![3, 4],
            kernel_size: 3,
            feature_dim: 5,
            heads,
            hidden_width: 6,
            outputs_per_head: outs,
            output,
            l2_weight: 0.001,
        }
    }

    fn input(batch: usize, len: usize, seed_: u64) -> Array2<f64> {
        let mut rng = seed::rng(seed_, &[]);
        Array2::from_shape_fn((2, batch * len), |_| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn parameter_count_by_hand() {
        let n = Network::<f64>::new(spec(OutputKind::Sigmoid, 2, 1), 0).unwrap();
        let block1 = (2 * 3 + 3) + 2 * (3 * 3 * 3 + 3);
        let block2 = (3 * 4 + 4) + 2 * (4 * 4 * 3 + 4);
        let feature = 4 * 5 + 5;
        let hidden = 5 * 12 + 12;
        let out = 2 * 6 + 2;
        assert_eq!(n.n_params(), block1 + block2 + feature + hidden + out);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let n = Network::<f64>::new(spec(OutputKind::Softmax, 1, 4), 1).unwrap();
        let out = n.predict(&input(3, 16, 2), 3);
        for row in out.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_rows_are_independent() {
        let n = Network::<f64>::new(spec(OutputKind::Sigmoid, 3, 1), 1).unwrap();
        let x = input(4, 16, 3);
        let all = n.predict(&x, 4);
        for b in 0..4 {
            let xb = x.slice(s![.., b * 16..(b + 1) * 16]).to_owned();
            let one = n.predict(&xb, 1);
            for j in 0..3 {
                assert!((one[[0, j]] - all[[b, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec(OutputKind::Sigmoid, 1, 1);
        s.kernel_size = 4;
        assert!(Network::<f32>::new(s, 0).is_err());
        let mut s = spec(OutputKind::Sigmoid, 1, 1);
        s.block_filters = vec![];
        assert!(Network::<f32>::new(s, 0).is_err());
        let mut s = spec(OutputKind::Sigmoid, 1, 1);
        s.input_len = 15;
        assert!(Network::<f32>::new(s, 0).is_err());
        assert!(Network::<f32>::new(spec(OutputKind::Softmax, 2, 3), 0).is_err());
        assert!(Network::<f32>::from_params(spec(OutputKind::Sigmoid, 1, 1), vec![0.0; 3]).is_err());
    }

    fn grad_check(output: OutputKind, heads: usize, outs: usize) {
        let net = Network::<f64>::new(spec(output, heads, outs), 5).unwrap();
        let batch = 3;
        let x = input(batch, 16, 6);
        let targets = match output {
            OutputKind::Sigmoid => Targets::Binary(Array2::from_shape_fn((batch, heads * outs), |(i, j)| ((i + j) % 2) as f64)),
            OutputKind::Softmax => Targets::Categorical(vec![0, outs - 1, 1]),
        };
        let w = vec![0.7, 1.3, 2.0];
        let (_, g) = net.loss_and_grad(&x, batch, &targets, &w);
        let eps = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..net.n_params() {
            let mut plus = net.clone();
            plus.params[i] += eps;
            let mut minus = net.clone();
            minus.params[i] -= eps;
            let fd = (plus.objective(&x, batch, &targets, &w) - minus.objective(&x, batch, &targets, &w)) / (2.0 * eps);
            let rel = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-3, "worst relative error {worst}");
    }

    #[test]
    fn gradient_matches_finite_differences_sigmoid() {
        grad_check(OutputKind::Sigmoid, 2, 1);
    }

    #[test]
    fn gradient_matches_finite_differences_softmax() {
        grad_check(OutputKind::Softmax, 1, 4);
    }
}
