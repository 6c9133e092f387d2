//! The handful of tensor operations the network is built from, each with
//! its hand-written backward pass. Everything is stride-1 f64; shapes
//! are asserted because layer wiring is internal to the model and a
//! mismatch is a bug, not an input condition.

use crate::feature::FeatureMap;

/// Weights of one convolution, also reused as the container for that
/// convolution's gradients and optimizer state (same shapes throughout).
/// Layout: `weight[((o * in + i) * kernel + dy) * kernel + dx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvKernel {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize) -> ConvKernel {
        ConvKernel {
            out_channels,
            in_channels,
            kernel,
            weight: vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn zeros_like(other: &ConvKernel) -> ConvKernel {
        ConvKernel::zeros(other.out_channels, other.in_channels, other.kernel)
    }

    pub fn same_shape(&self, other: &ConvKernel) -> bool {
        self.out_channels == other.out_channels
            && self.in_channels == other.in_channels
            && self.kernel == other.kernel
    }
}

/// The overlap of output rows/columns with the input for one kernel tap
/// offset by `shift`: output coordinate range and the input start.
fn tap_range(size: usize, shift: isize) -> (usize, usize) {
    let lo = (-shift).max(0) as usize;
    let hi = (size as isize - shift).min(size as isize).max(0) as usize;
    (lo, hi)
}

/// Same-size convolution, stride 1, zero padding `kernel / 2`.
pub fn conv_forward(params: &ConvKernel, input: &FeatureMap) -> FeatureMap {
    assert_eq!(input.channels, params.in_channels);
    let (h, w) = (input.height, input.width);
    let k = params.kernel;
    let pad = (k / 2) as isize;
    let mut out = FeatureMap::zeros(params.out_channels, h, w);
    for o in 0..params.out_channels {
        out.channel_mut(o).fill(params.bias[o]);
    }
    for o in 0..params.out_channels {
        for i in 0..params.in_channels {
            for dy in 0..k {
                let sy = dy as isize - pad;
                let (y0, y1) = tap_range(h, sy);
                for dx in 0..k {
                    let sx = dx as isize - pad;
                    let (x0, x1) = tap_range(w, sx);
                    if x0 >= x1 {
                        continue;
                    }
                    let wgt = params.weight[((o * params.in_channels + i) * k + dy) * k + dx];
                    for y in y0..y1 {
                        let iy = (y as isize + sy) as usize;
                        let ob = (o * h + y) * w;
                        let ib = ((i * h + iy) * w) as isize + sx;
                        let (is, ie) = ((ib + x0 as isize) as usize, (ib + x1 as isize) as usize);
                        let src = &input.values[is..ie];
                        let dst = &mut out.values[ob + x0..ob + x1];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += wgt * *s;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Gradients of [`conv_forward`] with respect to the weights, biases,
/// and input.
pub fn conv_backward(
    params: &ConvKernel,
    input: &FeatureMap,
    grad_out: &FeatureMap,
) -> (ConvKernel, FeatureMap) {
    assert_eq!(input.channels, params.in_channels);
    assert_eq!(grad_out.channels, params.out_channels);
    assert_eq!(grad_out.height, input.height);
    assert_eq!(grad_out.width, input.width);
    let (h, w) = (input.height, input.width);
    let k = params.kernel;
    let pad = (k / 2) as isize;
    let mut grads = ConvKernel::zeros_like(params);
    let mut grad_in = FeatureMap::zeros(params.in_channels, h, w);

    for o in 0..params.out_channels {
        grads.bias[o] = grad_out.channel(o).iter().sum();
    }
    for o in 0..params.out_channels {
        for i in 0..params.in_channels {
            for dy in 0..k {
                let sy = dy as isize - pad;
                let (y0, y1) = tap_range(h, sy);
                for dx in 0..k {
                    let sx = dx as isize - pad;
                    let (x0, x1) = tap_range(w, sx);
                    if x0 >= x1 {
                        continue;
                    }
                    let widx = ((o * params.in_channels + i) * k + dy) * k + dx;
                    let wgt = params.weight[widx];
                    let mut acc = 0.0f64;
                    for y in y0..y1 {
                        let iy = (y as isize + sy) as usize;
                        let ob = (o * h + y) * w;
                        let ib = ((i * h + iy) * w) as isize + sx;
                        let (is, ie) = ((ib + x0 as isize) as usize, (ib + x1 as isize) as usize);
                        let go = &grad_out.values[ob + x0..ob + x1];
                        let iv = &input.values[is..ie];
                        for (g, s) in go.iter().zip(iv) {
                            acc += *g * *s;
                        }
                        let gi = &mut grad_in.values[is..ie];
                        for (d, g) in gi.iter_mut().zip(go) {
                            *d += wgt * *g;
                        }
                    }
                    grads.weight[widx] = acc;
                }
            }
        }
    }
    (grads, grad_in)
}

pub fn relu_forward(input: &FeatureMap) -> FeatureMap {
    let mut out = input.clone();
    for v in &mut out.values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out
}

/// Subgradient 0 at exactly zero.
pub fn relu_backward(pre_activation: &FeatureMap, grad_out: &FeatureMap) -> FeatureMap {
    assert_eq!(pre_activation.values.len(), grad_out.values.len());
    let mut grad = grad_out.clone();
    for (g, z) in grad.values.iter_mut().zip(&pre_activation.values) {
        if *z <= 0.0 {
            *g = 0.0;
        }
    }
    grad
}

/// 2x2 average pooling; requires even height and width.
pub fn avgpool2_forward(input: &FeatureMap) -> FeatureMap {
    assert!(input.height % 2 == 0 && input.width % 2 == 0);
    let (h, w) = (input.height / 2, input.width / 2);
    let mut out = FeatureMap::zeros(input.channels, h, w);
    for c in 0..input.channels {
        for y in 0..h {
            for x in 0..w {
                let sum = input.get(c, 2 * y, 2 * x)
                    + input.get(c, 2 * y, 2 * x + 1)
                    + input.get(c, 2 * y + 1, 2 * x)
                    + input.get(c, 2 * y + 1, 2 * x + 1);
                out.set(c, y, x, sum * 0.25);
            }
        }
    }
    out
}

pub fn avgpool2_backward(grad_out: &FeatureMap) -> FeatureMap {
    let (h, w) = (grad_out.height * 2, grad_out.width * 2);
    let mut grad = FeatureMap::zeros(grad_out.channels, h, w);
    for c in 0..grad_out.channels {
        for y in 0..grad_out.height {
            for x in 0..grad_out.width {
                let g = grad_out.get(c, y, x) * 0.25;
                grad.set(c, 2 * y, 2 * x, g);
                grad.set(c, 2 * y, 2 * x + 1, g);
                grad.set(c, 2 * y + 1, 2 * x, g);
                grad.set(c, 2 * y + 1, 2 * x + 1, g);
            }
        }
    }
    grad
}

/// Nearest-neighbor x2 upsampling.
pub fn upsample2_forward(input: &FeatureMap) -> FeatureMap {
    let (h, w) = (input.height * 2, input.width * 2);
    let mut out = FeatureMap::zeros(input.channels, h, w);
    for c in 0..input.channels {
        for y in 0..h {
            for x in 0..w {
                out.set(c, y, x, input.get(c, y / 2, x / 2));
            }
        }
    }
    out
}

pub fn upsample2_backward(grad_out: &FeatureMap) -> FeatureMap {
    assert!(grad_out.height % 2 == 0 && grad_out.width % 2 == 0);
    let (h, w) = (grad_out.height / 2, grad_out.width / 2);
    let mut grad = FeatureMap::zeros(grad_out.channels, h, w);
    for c in 0..grad_out.channels {
        for y in 0..h {
            for x in 0..w {
                let sum = grad_out.get(c, 2 * y, 2 * x)
                    + grad_out.get(c, 2 * y, 2 * x + 1)
                    + grad_out.get(c, 2 * y + 1, 2 * x)
                    + grad_out.get(c, 2 * y + 1, 2 * x + 1);
                grad.set(c, y, x, sum);
            }
        }
    }
    grad
}

/// Channel concatenation, `a` first.
pub fn concat_forward(a: &FeatureMap, b: &FeatureMap) -> FeatureMap {
    assert_eq!(a.height, b.height);
    assert_eq!(a.width, b.width);
    let mut values = Vec::with_capacity(a.values.len() + b.values.len());
    values.extend_from_slice(&a.values);
    values.extend_from_slice(&b.values);
    FeatureMap {
        channels: a.channels + b.channels,
        height: a.height,
        width: a.width,
        values,
    }
}

pub fn concat_backward(grad_out: &FeatureMap, a_channels: usize) -> (FeatureMap, FeatureMap) {
    let pixels = grad_out.height * grad_out.width;
    let split = a_channels * pixels;
    let a = FeatureMap {
        channels: a_channels,
        height: grad_out.height,
        width: grad_out.width,
        values: grad_out.values[..split].to_vec(),
    };
    let b = FeatureMap {
        channels: grad_out.channels - a_channels,
        height: grad_out.height,
        width: grad_out.width,
        values: grad_out.values[split..].to_vec(),
    };
    (a, b)
}

pub fn sigmoid_forward(input: &FeatureMap) -> FeatureMap {
    let mut out = input.clone();
    for v in &mut out.values {
        *v = 1.0 / (1.0 + (-*v).exp());
    }
    out
}

/// Backward through the sigmoid given its *output* y: `g * y * (1 - y)`.
pub fn sigmoid_backward(output: &FeatureMap, grad_out: &FeatureMap) -> FeatureMap {
    assert_eq!(output.values.len(), grad_out.values.len());
    let mut grad = grad_out.clone();
    for (g, y) in grad.values.iter_mut().zip(&output.values) {
        *g *= *y * (1.0 - *y);
    }
    grad
}
