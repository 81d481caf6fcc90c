use super::layers::{Activation, Conv2d, ConvCache, Dense, DenseCache, Param};
use super::{BackboneName, BackboneSpec, HeadSpec, LossFn, RegressorError};
use ndarray::{Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Batch features `(B, D)` and, for conv stacks, the final `(C, H, W)`.
type Features = (Array2<f32>, Option<(usize, usize, usize)>);

/// A frozen feature extractor supplied from outside the crate, typically a
/// large pretrained network.
pub trait FeatureExtractor {
    fn feature_dim(&self) -> usize;

    /// Features of one preprocessed `(3, H, W)` input.
    fn extract(&self, input: &Array3<f32>) -> Vec<f32>;
}

pub struct Model {
    backbone: BackboneSpec,
    head: HeadSpec,
    convs: Vec<Conv2d>,
    extractor: Option<Box<dyn FeatureExtractor>>,
    dense: Vec<Dense>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("backbone", &self.backbone)
            .field("head", &self.head)
            .field("parameters", &self.parameter_count())
            .finish()
    }
}

/// Builds a conv-stack model with weights drawn from `seed`.
pub fn build_model(backbone: &BackboneSpec, head: &HeadSpec, seed: u64) -> Result<Model, RegressorError> {
    if backbone.name == BackboneName::PretrainedLarge || backbone.channels.is_empty() {
        return Err(RegressorError::Construction(format!(
            "backbone {} has no conv stack; use build_model_with_extractor",
            backbone.name
        )));
    }
    let sizes = backbone.conv_output_sizes();
    let (h, w) = sizes[sizes.len() - 1];
    let computed = backbone.channels[backbone.channels.len() - 1] * h * w;
    if computed != backbone.feature_dim {
        return Err(RegressorError::Construction(format!(
            "feature_dim {} does not match the conv stack output {computed}",
            backbone.feature_dim
        )));
    }
    if backbone.channels.contains(&0) || backbone.input_size.0 == 0 || backbone.input_size.1 == 0 {
        return Err(RegressorError::Construction("zero-sized backbone layer".into()));
    }
    head.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut convs = Vec::new();
    let mut in_c = 3;
    for &c in &backbone.channels {
        convs.push(Conv2d::new(in_c, c, &mut rng));
        in_c = c;
    }
    let dense = build_head(computed, head, &mut rng);
    Ok(Model { backbone: backbone.clone(), head: head.clone(), convs, extractor: None, dense })
}

/// Builds a model whose features come from `extractor`. Only the head is
/// trained.
pub fn build_model_with_extractor(
    backbone: &BackboneSpec,
    head: &HeadSpec,
    extractor: Box<dyn FeatureExtractor>,
    seed: u64,
) -> Result<Model, RegressorError> {
    if extractor.feature_dim() != backbone.feature_dim {
        return Err(RegressorError::Construction(format!(
            "extractor yields {} features but the backbone spec declares {}",
            extractor.feature_dim(),
            backbone.feature_dim
        )));
    }
    if backbone.feature_dim == 0 {
        return Err(RegressorError::Construction("feature_dim must be positive".into()));
    }
    head.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense = build_head(backbone.feature_dim, head, &mut rng);
    Ok(Model { backbone: backbone.clone(), head: head.clone(), convs: Vec::new(), extractor: Some(extractor), dense })
}

fn build_head(in_dim: usize, head: &HeadSpec, rng: &mut ChaCha8Rng) -> Vec<Dense> {
    let mut dense = Vec::new();
    let mut d = in_dim;
    for &n in &head.fc_sizes {
        dense.push(Dense::new(d, n, true, rng));
        d = n;
    }
    dense.push(Dense::new(d, head.output_nodes, false, rng));
    dense
}

struct Tape {
    convs: Vec<ConvCache>,
    last: Option<(usize, usize, usize)>,
    dense: Vec<DenseCache>,
}

impl Model {
    pub fn backbone(&self) -> &BackboneSpec {
        &self.backbone
    }

    pub fn head(&self) -> &HeadSpec {
        &self.head
    }

    pub fn input_size(&self) -> (u32, u32) {
        self.backbone.input_size
    }

    pub fn parameter_count(&self) -> usize {
        self.params().map(|p| p.value.len()).sum()
    }

    fn features(&self, inputs: &[Array3<f32>], tape: Option<&mut Vec<ConvCache>>) -> Result<Features, RegressorError> {
        let (ih, iw) = (self.backbone.input_size.0 as usize, self.backbone.input_size.1 as usize);
        for x in inputs {
            if x.dim() != (3, ih, iw) {
                return Err(RegressorError::InvalidArgument(format!(
                    "input shape {:?} does not match (3, {ih}, {iw})",
                    x.dim()
                )));
            }
        }
        let b = inputs.len();
        if let Some(ext) = &self.extractor {
            let mut feats = Array2::<f32>::zeros((b, self.backbone.feature_dim));
            for (i, x) in inputs.iter().enumerate() {
                let f = ext.extract(x);
                if f.len() != self.backbone.feature_dim {
                    return Err(RegressorError::InvalidArgument(format!(
                        "extractor returned {} features, expected {}",
                        f.len(),
                        self.backbone.feature_dim
                    )));
                }
                feats.row_mut(i).assign(&ndarray::ArrayView1::from(&f[..]));
            }
            return Ok((feats, None));
        }
        let hw = ih * iw;
        let mut data = Array2::<f32>::zeros((3, b * hw));
        for (i, x) in inputs.iter().enumerate() {
            for c in 0..3 {
                let src = x.index_axis(ndarray::Axis(0), c);
                let mut dst = data.slice_mut(ndarray::s![c, i * hw..(i + 1) * hw]);
                dst.assign(&src.to_shape(hw).expect("contiguous plane"));
            }
        }
        let mut act = Activation { c: 3, b, h: ih, w: iw, data };
        let mut caches = Vec::new();
        for conv in &self.convs {
            let (next, cache) = conv.forward(&act);
            caches.push(cache);
            act = next;
        }
        if let Some(t) = tape {
            *t = caches;
        }
        let phw = act.h * act.w;
        let mut feats = Array2::<f32>::zeros((b, act.c * phw));
        for c in 0..act.c {
            for i in 0..b {
                let src = act.data.slice(ndarray::s![c, i * phw..(i + 1) * phw]);
                feats.slice_mut(ndarray::s![i, c * phw..(c + 1) * phw]).assign(&src);
            }
        }
        Ok((feats, Some((act.c, act.h, act.w))))
    }

    fn forward_tape(&self, inputs: &[Array3<f32>], keep: bool) -> Result<(Vec<f64>, Tape), RegressorError> {
        let mut conv_caches = Vec::new();
        let (mut x, last) = self.features(inputs, keep.then_some(&mut conv_caches))?;
        let mut dense_caches = Vec::new();
        for d in &self.dense {
            let (y, cache) = d.forward(&x);
            if keep {
                dense_caches.push(cache);
            }
            x = y;
        }
        let scale = self.head.output_scale;
        let raw = x.column(0).iter().map(|&v| v as f64 * scale).collect();
        Ok((raw, Tape { convs: conv_caches, last, dense: dense_caches }))
    }

    /// Raw outputs in degrees, one per input. Not wrapped.
    pub fn forward(&self, inputs: &[Array3<f32>]) -> Result<Vec<f64>, RegressorError> {
        if inputs.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.forward_tape(inputs, false)?.0)
    }

    /// Runs forward and backward on one batch, accumulating the gradient of
    /// the mean batch loss. Returns the mean loss before any update.
    pub fn accumulate_gradients(&mut self, inputs: &[Array3<f32>], targets: &[f64], loss: &LossFn) -> Result<f64, RegressorError> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(RegressorError::InvalidArgument(format!(
                "batch of {} inputs with {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let (raw, tape) = self.forward_tape(inputs, true)?;
        let b = inputs.len();
        let scale = self.head.output_scale;
        let mut total = 0.0;
        let mut dout = Array2::<f32>::zeros((b, 1));
        for i in 0..b {
            total += loss.per_sample(targets[i], raw[i]);
            dout[[i, 0]] = (loss.gradient(targets[i], raw[i]) * scale / b as f64) as f32;
        }
        self.backward(&tape, dout);
        Ok(total / b as f64)
    }

    fn backward(&mut self, tape: &Tape, mut grad: Array2<f32>) {
        for (d, cache) in self.dense.iter_mut().zip(&tape.dense).rev() {
            grad = d.backward(cache, grad);
        }
        let Some((c, h, w)) = tape.last else { return };
        if !self.backbone.trainable || self.convs.is_empty() {
            return;
        }
        let b = grad.nrows();
        let phw = h * w;
        let mut dact = Array2::<f32>::zeros((c, b * phw));
        for ch in 0..c {
            for i in 0..b {
                let src = grad.slice(ndarray::s![i, ch * phw..(ch + 1) * phw]);
                dact.slice_mut(ndarray::s![ch, i * phw..(i + 1) * phw]).assign(&src);
            }
        }
        let n = self.convs.len();
        for (k, (conv, cache)) in self.convs.iter_mut().zip(&tape.convs).enumerate().rev() {
            match conv.backward(cache, dact, k > 0) {
                Some(next) => dact = next,
                None => break,
            }
            debug_assert!(k < n);
        }
    }

    pub(crate) fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn params(&self) -> impl Iterator<Item = &Param> {
        self.convs
            .iter()
            .flat_map(|c| [&c.weight, &c.bias])
            .chain(self.dense.iter().flat_map(|d| [&d.weight, &d.bias]))
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.convs
            .iter_mut()
            .flat_map(|c| [&mut c.weight, &mut c.bias])
            .chain(self.dense.iter_mut().flat_map(|d| [&mut d.weight, &mut d.bias]))
    }

    /// `(value, grad)` pairs the optimizer may update. Frozen backbones
    /// contribute nothing.
    pub(crate) fn trainable_slots(&mut self) -> Vec<(&mut [f32], &[f32])> {
        let trainable = self.backbone.trainable;
        let convs = self
            .convs
            .iter_mut()
            .filter(|_| trainable)
            .flat_map(|c| [&mut c.weight, &mut c.bias]);
        let dense = self.dense.iter_mut().flat_map(|d| [&mut d.weight, &mut d.bias]);
        convs.chain(dense).map(|p| (&mut p.value[..], &p.grad[..])).collect()
    }

    /// Named parameter tensors in a fixed order.
    pub fn tensors(&self) -> Vec<(String, Vec<usize>, &[f32])> {
        let mut out = Vec::new();
        for (i, c) in self.convs.iter().enumerate() {
            out.push((format!("backbone.{i}.weight"), c.weight.shape.clone(), &c.weight.value[..]));
            out.push((format!("backbone.{i}.bias"), c.bias.shape.clone(), &c.bias.value[..]));
        }
        for (i, d) in self.dense.iter().enumerate() {
            out.push((format!("head.{i}.weight"), d.weight.shape.clone(), &d.weight.value[..]));
            out.push((format!("head.{i}.bias"), d.bias.shape.clone(), &d.bias.value[..]));
        }
        out
    }

    pub(crate) fn snapshot(&self) -> Vec<Vec<f32>> {
        self.params().map(|p| p.value.clone()).collect()
    }

    pub(crate) fn restore(&mut self, values: &[Vec<f32>]) {
        for (p, v) in self.params_mut().zip(values) {
            p.value.copy_from_slice(v);
        }
    }

    /// Replaces all weights. Names, order and shapes must match
    /// [`tensors`](Self::tensors).
    pub fn load_tensors(&mut self, tensors: &[(String, Vec<usize>, Vec<f32>)]) -> Result<(), RegressorError> {
        let expected: Vec<(String, Vec<usize>)> = self.tensors().into_iter().map(|(n, s, _)| (n, s)).collect();
        if expected.len() != tensors.len() {
            return Err(RegressorError::Load(format!(
                "expected {} tensors, found {}",
                expected.len(),
                tensors.len()
            )));
        }
        for ((name, shape), (n, s, v)) in expected.iter().zip(tensors) {
            if name != n || shape != s || v.len() != shape.iter().product::<usize>() {
                return Err(RegressorError::Load(format!("tensor {n} {s:?} does not match {name} {shape:?}")));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(RegressorError::Load(format!("tensor {n} has non-finite values")));
            }
        }
        for (p, (_, _, v)) in self.params_mut().zip(tensors) {
            p.value.copy_from_slice(v);
        }
        Ok(())
    }
}
