//! The network: a small convolutional encoder and a refinement decoder
//! that repeatedly upsamples, concatenates the matching encoder skip
//! along the channel axis, and convolves down to `15 * k` feature maps,
//! finishing with a 1x1 projection to the 15 affordance channels and a
//! sigmoid.

use afford_core::{AffordanceTensor, RgbRaster, AFFORDANCE_COUNT};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::feature::FeatureMap;
use crate::layers::{
    avgpool2_backward, avgpool2_forward, concat_backward, concat_forward, conv_backward,
    conv_forward, relu_backward, relu_forward, sigmoid_backward, sigmoid_forward,
    upsample2_backward, upsample2_forward, ConvKernel,
};
use crate::RefnetError;

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Feature-map multiplier: every refinement merge produces `15 * k`
    /// channels.
    pub k: usize,
    /// Encoder stages; each halves height and width.
    pub depth: usize,
    /// Weight-initialization seed.
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            k: DEFAULT_K,
            depth: DEFAULT_DEPTH,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), RefnetError> {
        if self.k < 1 {
            return Err(RefnetError::Argument("k must be at least 1".into()));
        }
        if self.depth < 1 {
            return Err(RefnetError::Argument("depth must be at least 1".into()));
        }
        Ok(())
    }

    /// Input sides must be divisible by this.
    pub fn stride(&self) -> usize {
        1 << self.depth
    }

    pub fn merge_channels(&self) -> usize {
        AFFORDANCE_COUNT * self.k
    }

    /// Encoder output channels per stage. The schedule is a fixed slow
    /// ramp; the architectural content lives in the decoder merges, the
    /// encoder just has to produce multi-scale features.
    pub fn encoder_channels(&self) -> Vec<usize> {
        (0..self.depth).map(|i| 8 + 4 * i).collect()
    }
}

/// Name, out channels, in channels, kernel size for every layer, in
/// parameter order (encoder shallow-to-deep, decoder deep-to-shallow,
/// head last).
pub(crate) fn layer_shapes(config: &ModelConfig) -> Vec<(String, usize, usize, usize)> {
    let enc = config.encoder_channels();
    let merge = config.merge_channels();
    let mut shapes = Vec::new();
    let mut in_ch = 3;
    for (i, &out_ch) in enc.iter().enumerate() {
        shapes.push((format!("encoder.{i}"), out_ch, in_ch, 3));
        in_ch = out_ch;
    }
    let mut carried = enc[config.depth - 1];
    for j in 0..config.depth {
        let skip = enc[config.depth - 1 - j];
        shapes.push((format!("decoder.{j}"), merge, carried + skip, 3));
        carried = merge;
    }
    shapes.push(("head".into(), AFFORDANCE_COUNT, merge, 1));
    shapes
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub encoder: Vec<ConvKernel>,
    pub decoder: Vec<ConvKernel>,
    pub head: ConvKernel,
    /// Bumped by every optimizer step; forward caches record it so a
    /// cache from before an update is rejected by `backward`.
    pub(crate) revision: u64,
}

impl ModelParams {
    fn from_kernels(config: &ModelConfig, mut kernels: Vec<ConvKernel>) -> ModelParams {
        let head = kernels.pop().expect("layer list includes the head");
        let decoder = kernels.split_off(config.depth);
        ModelParams {
            encoder: kernels,
            decoder,
            head,
            revision: 0,
        }
    }

    /// All-zero parameters; the model then outputs 0.5 everywhere
    /// (sigmoid of zero logits).
    pub fn zeros(config: &ModelConfig) -> ModelParams {
        let kernels = layer_shapes(config)
            .into_iter()
            .map(|(_, out_ch, in_ch, k)| ConvKernel::zeros(out_ch, in_ch, k))
            .collect();
        ModelParams::from_kernels(config, kernels)
    }

    pub fn layers(&self) -> impl Iterator<Item = &ConvKernel> {
        self.encoder.iter().chain(&self.decoder).chain([&self.head])
    }

    /// Checks that the parameter shapes are exactly what `config`
    /// prescribes and all values are finite.
    pub fn validate_against(&self, config: &ModelConfig) -> Result<(), RefnetError> {
        config.validate()?;
        let shapes = layer_shapes(config);
        let count = self.encoder.len() + self.decoder.len() + 1;
        if count != shapes.len() {
            return Err(RefnetError::Argument(format!(
                "parameter set has {count} layers, config prescribes {}",
                shapes.len()
            )));
        }
        for (layer, (name, out_ch, in_ch, k)) in self.layers().zip(&shapes) {
            if layer.out_channels != *out_ch || layer.in_channels != *in_ch || layer.kernel != *k {
                return Err(RefnetError::Argument(format!(
                    "layer {name} has shape {}x{}x{k}x{k}, expected {out_ch}x{in_ch}",
                    layer.out_channels, layer.in_channels,
                )));
            }
            let elements = out_ch * in_ch * k * k;
            if layer.weight.len() != elements || layer.bias.len() != *out_ch {
                return Err(RefnetError::Argument(format!(
                    "layer {name} has inconsistent buffer lengths"
                )));
            }
            if layer.weight.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(RefnetError::Argument(format!(
                    "layer {name} contains non-finite values"
                )));
            }
        }
        Ok(())
    }
}

/// Seeded uniform init in +-sqrt(6 / (fan_in + fan_out)), biases zero.
pub fn init_params(config: &ModelConfig) -> Result<ModelParams, RefnetError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let kernels = layer_shapes(config)
        .into_iter()
        .map(|(_, out_ch, in_ch, k)| {
            let mut kernel = ConvKernel::zeros(out_ch, in_ch, k);
            let fan_in = (in_ch * k * k) as f64;
            let fan_out = (out_ch * k * k) as f64;
            let limit = (6.0 / (fan_in + fan_out)).sqrt();
            for v in &mut kernel.weight {
                *v = rng.gen_range(-limit..=limit);
            }
            kernel
        })
        .collect();
    Ok(ModelParams::from_kernels(config, kernels))
}

/// Gradient (or optimizer-state) buffers, one per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub encoder: Vec<ConvKernel>,
    pub decoder: Vec<ConvKernel>,
    pub head: ConvKernel,
}

impl ModelGrads {
    pub fn zeros_like(params: &ModelParams) -> ModelGrads {
        ModelGrads {
            encoder: params.encoder.iter().map(ConvKernel::zeros_like).collect(),
            decoder: params.decoder.iter().map(ConvKernel::zeros_like).collect(),
            head: ConvKernel::zeros_like(&params.head),
        }
    }

    pub fn layers(&self) -> impl Iterator<Item = &ConvKernel> {
        self.encoder.iter().chain(&self.decoder).chain([&self.head])
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut ConvKernel> {
        self.encoder
            .iter_mut()
            .chain(self.decoder.iter_mut())
            .chain([&mut self.head])
    }

    pub fn accumulate(&mut self, other: &ModelGrads) {
        for (mine, theirs) in self.layers_mut().zip(other.layers()) {
            debug_assert!(mine.same_shape(theirs));
            for (a, b) in mine.weight.iter_mut().zip(&theirs.weight) {
                *a += *b;
            }
            for (a, b) in mine.bias.iter_mut().zip(&theirs.bias) {
                *a += *b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in self.layers_mut() {
            for v in &mut layer.weight {
                *v *= factor;
            }
            for v in &mut layer.bias {
                *v *= factor;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers()
            .flat_map(|l| l.weight.iter().chain(&l.bias))
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Every intermediate activation needed by the backward pass.
pub struct ForwardCache {
    revision: u64,
    pub(crate) input: FeatureMap,
    encoder_pre: Vec<FeatureMap>,
    encoder_pooled: Vec<FeatureMap>,
    decoder_concat: Vec<FeatureMap>,
    decoder_pre: Vec<FeatureMap>,
    decoder_act: Vec<FeatureMap>,
    /// Network output (post-sigmoid), 15 x H x W, full precision.
    pub output: FeatureMap,
}

/// Runs the network on a planar f64 input (3 x H x W).
pub fn forward_features(
    params: &ModelParams,
    config: &ModelConfig,
    input: &FeatureMap,
) -> Result<ForwardCache, RefnetError> {
    params.validate_against(config)?;
    if input.channels != 3 {
        return Err(RefnetError::Argument(format!(
            "input has {} channels, expected 3",
            input.channels
        )));
    }
    let stride = config.stride();
    if input.height % stride != 0 || input.width % stride != 0 {
        return Err(RefnetError::Argument(format!(
            "input {}x{} not divisible by 2^depth = {stride}",
            input.height, input.width
        )));
    }

    let depth = config.depth;
    let mut encoder_pre = Vec::with_capacity(depth);
    let mut encoder_act = Vec::with_capacity(depth);
    let mut encoder_pooled = Vec::with_capacity(depth);
    let mut x = input.clone();
    for stage in 0..depth {
        let pre = conv_forward(&params.encoder[stage], &x);
        let act = relu_forward(&pre);
        let pooled = avgpool2_forward(&act);
        encoder_pre.push(pre);
        encoder_act.push(act);
        x = pooled.clone();
        encoder_pooled.push(pooled);
    }

    let mut decoder_concat = Vec::with_capacity(depth);
    let mut decoder_pre = Vec::with_capacity(depth);
    let mut decoder_act = Vec::with_capacity(depth);
    for stage in 0..depth {
        let up = upsample2_forward(&x);
        let skip = &encoder_act[depth - 1 - stage];
        let cat = concat_forward(&up, skip);
        let pre = conv_forward(&params.decoder[stage], &cat);
        let act = relu_forward(&pre);
        decoder_concat.push(cat);
        decoder_pre.push(pre);
        x = act.clone();
        decoder_act.push(act);
    }

    let head_pre = conv_forward(&params.head, &x);
    let output = sigmoid_forward(&head_pre);

    // The post-ReLU encoder activations are not cached: the backward
    // pass recovers the skip values from the stored concats and the
    // ReLU mask from `encoder_pre`.
    Ok(ForwardCache {
        revision: params.revision,
        input: input.clone(),
        encoder_pre,
        encoder_pooled,
        decoder_concat,
        decoder_pre,
        decoder_act,
        output,
    })
}

/// Public forward: raster in, affordance tensor out (plus the cache for
/// a subsequent backward pass).
pub fn forward(
    params: &ModelParams,
    config: &ModelConfig,
    image: &RgbRaster,
) -> Result<(AffordanceTensor, ForwardCache), RefnetError> {
    let input = FeatureMap::from_raster(image);
    let cache = forward_features(params, config, &input)?;
    let tensor = cache.output.to_tensor()?;
    Ok((tensor, cache))
}

/// Reverse-mode gradients for every parameter, plus the gradient with
/// respect to the input. `grad_output` is dL/d(output), same shape as
/// `cache.output`.
pub fn backward(
    params: &ModelParams,
    config: &ModelConfig,
    cache: &ForwardCache,
    grad_output: &FeatureMap,
) -> Result<(ModelGrads, FeatureMap), RefnetError> {
    params.validate_against(config)?;
    if cache.revision != params.revision {
        return Err(RefnetError::Argument(
            "stale cache: parameters were updated after this forward pass".into(),
        ));
    }
    if grad_output.channels != cache.output.channels
        || grad_output.height != cache.output.height
        || grad_output.width != cache.output.width
    {
        return Err(RefnetError::Argument(format!(
            "output gradient is {}x{}x{}, expected {}x{}x{}",
            grad_output.channels,
            grad_output.height,
            grad_output.width,
            cache.output.channels,
            cache.output.height,
            cache.output.width
        )));
    }

    let depth = config.depth;
    let mut grads = ModelGrads {
        encoder: params.encoder.iter().map(ConvKernel::zeros_like).collect(),
        decoder: params.decoder.iter().map(ConvKernel::zeros_like).collect(),
        head: ConvKernel::zeros_like(&params.head),
    };

    let grad_logits = sigmoid_backward(&cache.output, grad_output);
    let (head_grads, mut g) = conv_backward(
        &params.head,
        &cache.decoder_act[depth - 1],
        &grad_logits,
    );
    grads.head = head_grads;

    // Skip gradients land on the matching encoder activation; collected
    // here and added when the encoder stage is processed.
    let mut skip_grads: Vec<Option<FeatureMap>> = (0..depth).map(|_| None).collect();
    for stage in (0..depth).rev() {
        let g_pre = relu_backward(&cache.decoder_pre[stage], &g);
        let (conv_grads, g_cat) =
            conv_backward(&params.decoder[stage], &cache.decoder_concat[stage], &g_pre);
        grads.decoder[stage] = conv_grads;
        let up_channels = if stage == 0 {
            config.encoder_channels()[depth - 1]
        } else {
            config.merge_channels()
        };
        let (g_up, g_skip) = concat_backward(&g_cat, up_channels);
        skip_grads[depth - 1 - stage] = Some(g_skip);
        g = upsample2_backward(&g_up);
    }

    // `g` is now the gradient at the deepest pooled feature.
    for stage in (0..depth).rev() {
        let mut g_act = avgpool2_backward(&g);
        let skip = skip_grads[stage].take().expect("one skip per stage");
        debug_assert_eq!(skip.values.len(), g_act.values.len());
        for (a, s) in g_act.values.iter_mut().zip(&skip.values) {
            *a += *s;
        }
        let g_pre = relu_backward(&cache.encoder_pre[stage], &g_act);
        let layer_input = if stage == 0 {
            &cache.input
        } else {
            &cache.encoder_pooled[stage - 1]
        };
        let (conv_grads, g_in) = conv_backward(&params.encoder[stage], layer_input, &g_pre);
        grads.encoder[stage] = conv_grads;
        g = g_in;
    }

    Ok((grads, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image(h: usize, w: usize) -> RgbRaster {
        let mut raster = RgbRaster::filled(w, h, [0.2, 0.4, 0.6]);
        for y in 0..h {
            for x in 0..w {
                let v = ((x + 2 * y) % 7) as f32 / 7.0;
                raster.set_pixel(x, y, [v, 1.0 - v, 0.5 * v]);
            }
        }
        raster
    }

    #[test]
    fn layer_shapes_chain_consistently() {
        let config = ModelConfig::default();
        let shapes = layer_shapes(&config);
        assert_eq!(shapes.len(), 7);
        assert_eq!(shapes[0], ("encoder.0".into(), 8, 3, 3));
        assert_eq!(shapes[2], ("encoder.2".into(), 16, 12, 3));
        assert_eq!(shapes[3], ("decoder.0".into(), 45, 16 + 16, 3));
        assert_eq!(shapes[4], ("decoder.1".into(), 45, 45 + 12, 3));
        assert_eq!(shapes[5], ("decoder.2".into(), 45, 45 + 8, 3));
        assert_eq!(shapes[6], ("head".into(), 15, 45, 1));
    }

    #[test]
    fn output_shape_and_range_hold() {
        let config = ModelConfig::default();
        let params = init_params(&config).unwrap();
        let image = test_image(32, 32);
        let (tensor, cache) = forward(&params, &config, &image).unwrap();
        assert_eq!(tensor.height(), 32);
        assert_eq!(tensor.width(), 32);
        assert!(cache.output.values.iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn zero_weights_output_one_half() {
        let config = ModelConfig {
            k: 2,
            depth: 2,
            seed: 0,
        };
        let params = ModelParams::zeros(&config);
        let (_, cache) = forward(&params, &config, &test_image(16, 16)).unwrap();
        assert!(cache.output.values.iter().all(|v| *v == 0.5));
    }

    #[test]
    fn forward_is_deterministic() {
        let config = ModelConfig::default();
        let params = init_params(&config).unwrap();
        let image = test_image(32, 32);
        let (_, a) = forward(&params, &config, &image).unwrap();
        let (_, b) = forward(&params, &config, &image).unwrap();
        let bits = |m: &FeatureMap| m.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.output), bits(&b.output));
        // Same seed, fresh init: still identical.
        let again = init_params(&config).unwrap();
        let (_, c) = forward(&again, &config, &image).unwrap();
        assert_eq!(bits(&a.output), bits(&c.output));
    }

    #[test]
    fn indivisible_inputs_are_rejected() {
        let config = ModelConfig::default();
        let params = init_params(&config).unwrap();
        let image = test_image(20, 32);
        assert!(matches!(
            forward(&params, &config, &image),
            Err(RefnetError::Argument(_))
        ));
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_parameter_gradients() {
        let config = ModelConfig {
            k: 1,
            depth: 2,
            seed: 1,
        };
        let params = init_params(&config).unwrap();
        let image = test_image(8, 8);
        let (_, cache) = forward(&params, &config, &image).unwrap();
        let zero = FeatureMap::zeros(15, 8, 8);
        let (grads, grad_in) = backward(&params, &config, &cache, &zero).unwrap();
        assert_eq!(grads.max_abs(), 0.0);
        assert!(grad_in.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn stale_caches_are_rejected() {
        let config = ModelConfig {
            k: 1,
            depth: 1,
            seed: 1,
        };
        let mut params = init_params(&config).unwrap();
        let image = test_image(8, 8);
        let (_, cache) = forward(&params, &config, &image).unwrap();
        params.revision += 1;
        let upstream = FeatureMap::zeros(15, 8, 8);
        match backward(&params, &config, &cache, &upstream) {
            Err(RefnetError::Argument(message)) => assert!(message.contains("stale")),
            other => panic!("expected stale-cache error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn params_validate_against_mismatched_config() {
        let config = ModelConfig::default();
        let params = init_params(&config).unwrap();
        let other = ModelConfig {
            k: 5,
            ..ModelConfig::default()
        };
        assert!(params.validate_against(&config).is_ok());
        assert!(params.validate_against(&other).is_err());
    }
}
