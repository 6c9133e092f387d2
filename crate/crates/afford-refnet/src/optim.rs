//! RMSprop with a freeze set: `s <- rho s + (1 - rho) g^2`,
//! `theta <- theta - lr g / (sqrt(s) + eps)`. Frozen parameters are
//! skipped entirely — values and running averages both stay untouched.

use crate::layers::ConvKernel;
use crate::model::{ModelGrads, ModelParams};

pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;
pub const DEFAULT_RHO: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Which parameter tensors an optimizer step must leave untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frozen {
    Nothing,
    Encoder,
    Everything,
}

#[derive(Debug, Clone)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    state: ModelGrads,
}

fn step_kernel(
    params: &mut ConvKernel,
    grads: &ConvKernel,
    state: &mut ConvKernel,
    learning_rate: f64,
    rho: f64,
    epsilon: f64,
) {
    debug_assert!(params.same_shape(grads) && params.same_shape(state));
    let pairs = params
        .weight
        .iter_mut()
        .zip(grads.weight.iter())
        .zip(state.weight.iter_mut())
        .chain(
            params
                .bias
                .iter_mut()
                .zip(grads.bias.iter())
                .zip(state.bias.iter_mut()),
        );
    for ((theta, g), s) in pairs {
        *s = rho * *s + (1.0 - rho) * *g * *g;
        *theta -= learning_rate * *g / (s.sqrt() + epsilon);
    }
}

impl RmsProp {
    pub fn new(params: &ModelParams) -> RmsProp {
        RmsProp::with_hyperparams(params, DEFAULT_LEARNING_RATE, DEFAULT_RHO, DEFAULT_EPSILON)
    }

    pub fn with_hyperparams(
        params: &ModelParams,
        learning_rate: f64,
        rho: f64,
        epsilon: f64,
    ) -> RmsProp {
        RmsProp {
            learning_rate,
            rho,
            epsilon,
            state: ModelGrads::zeros_like(params),
        }
    }

    pub fn state(&self) -> &ModelGrads {
        &self.state
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelGrads, frozen: Frozen) {
        if frozen != Frozen::Everything {
            let skip_encoder = frozen == Frozen::Encoder;
            if !skip_encoder {
                for ((p, g), s) in params
                    .encoder
                    .iter_mut()
                    .zip(&grads.encoder)
                    .zip(&mut self.state.encoder)
                {
                    step_kernel(p, g, s, self.learning_rate, self.rho, self.epsilon);
                }
            }
            for ((p, g), s) in params
                .decoder
                .iter_mut()
                .zip(&grads.decoder)
                .zip(&mut self.state.decoder)
            {
                step_kernel(p, g, s, self.learning_rate, self.rho, self.epsilon);
            }
            step_kernel(
                &mut params.head,
                &grads.head,
                &mut self.state.head,
                self.learning_rate,
                self.rho,
                self.epsilon,
            );
        }
        // A step happened (even a fully frozen one): forward caches
        // taken before it no longer describe these parameters.
        params.revision += 1;
    }
}
