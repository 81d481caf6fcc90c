//! Minimal layers with hand-written backward passes.
//!
//! Conv activations are stored channel-major as `(C, B·H·W)` so one gemm
//! covers the whole batch.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// A trainable tensor with its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Param {
    pub value: Vec<f32>,
    pub grad: Vec<f32>,
    pub shape: Vec<usize>,
}

impl Param {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { value: vec![0.0; n], grad: vec![0.0; n], shape }
    }

    pub fn he_normal<R: Rng>(shape: Vec<usize>, fan_in: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(shape);
        let normal = Normal::new(0.0f32, (2.0 / fan_in as f32).sqrt()).expect("finite std");
        for v in &mut p.value {
            *v = normal.sample(rng);
        }
        p
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }

    fn view2(&self, rows: usize, cols: usize) -> ArrayView2<'_, f32> {
        ArrayView2::from_shape((rows, cols), &self.value).expect("param shape")
    }
}

/// Spatial batch of activations, `data` is `(c, b·h·w)`.
#[derive(Debug, Clone)]
pub(crate) struct Activation {
    pub c: usize,
    pub b: usize,
    pub h: usize,
    pub w: usize,
    pub data: Array2<f32>,
}

/// 3×3 conv, stride 2, zero padding 1, followed by ReLU.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Conv2d {
    pub in_c: usize,
    pub out_c: usize,
    pub weight: Param,
    pub bias: Param,
}

pub(crate) struct ConvCache {
    cols: Array2<f32>,
    input_dims: (usize, usize, usize, usize),
    out: Array2<f32>,
}

const K: usize = 3;
const STRIDE: usize = 2;

fn out_side(n: usize) -> usize {
    (n + 2 - K) / STRIDE + 1
}

impl Conv2d {
    pub fn new<R: Rng>(in_c: usize, out_c: usize, rng: &mut R) -> Self {
        let fan_in = in_c * K * K;
        Self {
            in_c,
            out_c,
            weight: Param::he_normal(vec![out_c, fan_in], fan_in, rng),
            bias: Param::zeros(vec![out_c]),
        }
    }

    fn im2col(x: &Activation) -> (Array2<f32>, usize, usize) {
        let (ho, wo) = (out_side(x.h), out_side(x.w));
        let n = x.b * ho * wo;
        let mut cols = Array2::<f32>::zeros((x.c * K * K, n));
        let src = x.data.as_slice().expect("contiguous");
        let plane = x.b * x.h * x.w;
        for c in 0..x.c {
            for ky in 0..K {
                for kx in 0..K {
                    let mut row = cols.row_mut(c * K * K + ky * K + kx);
                    let dst = row.as_slice_mut().expect("contiguous row");
                    let mut j = 0;
                    for b in 0..x.b {
                        let base = c * plane + b * x.h * x.w;
                        for oy in 0..ho {
                            let iy = (oy * STRIDE + ky) as isize - 1;
                            for ox in 0..wo {
                                let ix = (ox * STRIDE + kx) as isize - 1;
                                if iy >= 0 && (iy as usize) < x.h && ix >= 0 && (ix as usize) < x.w {
                                    dst[j] = src[base + iy as usize * x.w + ix as usize];
                                }
                                j += 1;
                            }
                        }
                    }
                }
            }
        }
        (cols, ho, wo)
    }

    fn col2im(dcols: &Array2<f32>, dims: (usize, usize, usize, usize)) -> Array2<f32> {
        let (c_in, b_n, h, w) = dims;
        let (ho, wo) = (out_side(h), out_side(w));
        let mut dx = Array2::<f32>::zeros((c_in, b_n * h * w));
        let out = dx.as_slice_mut().expect("contiguous");
        let plane = b_n * h * w;
        for c in 0..c_in {
            for ky in 0..K {
                for kx in 0..K {
                    let row = dcols.row(c * K * K + ky * K + kx);
                    let src = row.as_slice().expect("contiguous row");
                    let mut j = 0;
                    for b in 0..b_n {
                        let base = c * plane + b * h * w;
                        for oy in 0..ho {
                            let iy = (oy * STRIDE + ky) as isize - 1;
                            for ox in 0..wo {
                                let ix = (ox * STRIDE + kx) as isize - 1;
                                if iy >= 0 && (iy as usize) < h && ix >= 0 && (ix as usize) < w {
                                    out[base + iy as usize * w + ix as usize] += src[j];
                                }
                                j += 1;
                            }
                        }
                    }
                }
            }
        }
        dx
    }

    pub fn forward(&self, x: &Activation) -> (Activation, ConvCache) {
        let (cols, ho, wo) = Self::im2col(x);
        let w = self.weight.view2(self.out_c, self.in_c * K * K);
        let mut out = w.dot(&cols);
        for (mut row, &b) in out.axis_iter_mut(Axis(0)).zip(&self.bias.value) {
            row.mapv_inplace(|v| (v + b).max(0.0));
        }
        let act = Activation { c: self.out_c, b: x.b, h: ho, w: wo, data: out.clone() };
        (act, ConvCache { cols, input_dims: (x.c, x.b, x.h, x.w), out })
    }

    /// Accumulates parameter gradients; returns the input gradient when asked.
    pub fn backward(&mut self, cache: &ConvCache, mut dout: Array2<f32>, need_input_grad: bool) -> Option<Array2<f32>> {
        dout.zip_mut_with(&cache.out, |d, &o| {
            if o <= 0.0 {
                *d = 0.0
            }
        });
        let fan_in = self.in_c * K * K;
        {
            let mut gw = ndarray::ArrayViewMut2::from_shape((self.out_c, fan_in), &mut self.weight.grad).expect("shape");
            general_mat_mul(1.0, &dout, &cache.cols.t(), 1.0, &mut gw);
        }
        for (g, row) in self.bias.grad.iter_mut().zip(dout.axis_iter(Axis(0))) {
            *g += row.sum();
        }
        if !need_input_grad {
            return None;
        }
        let w = self.weight.view2(self.out_c, fan_in);
        let dcols = w.t().dot(&dout);
        Some(Self::col2im(&dcols, cache.input_dims))
    }
}

/// Fully connected layer, optional ReLU.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub relu: bool,
    pub weight: Param,
    pub bias: Param,
}

pub(crate) struct DenseCache {
    input: Array2<f32>,
    out: Array2<f32>,
}

impl Dense {
    pub fn new<R: Rng>(in_dim: usize, out_dim: usize, relu: bool, rng: &mut R) -> Self {
        let mut weight = Param::he_normal(vec![out_dim, in_dim], in_dim, rng);
        if !relu {
            // linear output: unit-variance pre-activation is plenty
            let s = (0.5f32).sqrt();
            weight.value.iter_mut().for_each(|v| *v *= s);
        }
        Self { in_dim, out_dim, relu, weight, bias: Param::zeros(vec![out_dim]) }
    }

    /// `x` is `(batch, in_dim)`.
    pub fn forward(&self, x: &Array2<f32>) -> (Array2<f32>, DenseCache) {
        let w = self.weight.view2(self.out_dim, self.in_dim);
        let mut out = x.dot(&w.t());
        let bias = Array1::from(self.bias.value.clone());
        out += &bias;
        if self.relu {
            out.mapv_inplace(|v| v.max(0.0));
        }
        (out.clone(), DenseCache { input: x.clone(), out })
    }

    pub fn backward(&mut self, cache: &DenseCache, mut dout: Array2<f32>) -> Array2<f32> {
        if self.relu {
            dout.zip_mut_with(&cache.out, |d, &o| {
                if o <= 0.0 {
                    *d = 0.0
                }
            });
        }
        {
            let mut gw =
                ndarray::ArrayViewMut2::from_shape((self.out_dim, self.in_dim), &mut self.weight.grad).expect("shape");
            general_mat_mul(1.0, &dout.t(), &cache.input, 1.0, &mut gw);
        }
        for (g, col) in self.bias.grad.iter_mut().zip(dout.axis_iter(Axis(1))) {
            *g += col.sum();
        }
        dout.dot(&self.weight.view2(self.out_dim, self.in_dim))
    }
}
