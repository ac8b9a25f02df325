//! Named trainable parameters and gradient buffers.

use super::tensor::{Scalar, Tensor};

/// A named weight tensor with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param<F: Scalar = f64> {
    pub name: String,
    pub value: Tensor<F>,
    pub grad: Tensor<F>,
}

impl<F: Scalar> Param<F> {
    pub fn new(name: impl Into<String>, value: Tensor<F>) -> Self {
        let grad = Tensor::zeros(value.shape());
        Param {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn numel(&self) -> usize {
        self.value.numel()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(F::zero());
    }

    pub fn cast<G: Scalar>(&self) -> Param<G> {
        Param {
            name: self.name.clone(),
            value: self.value.cast(),
            grad: Tensor::zeros(self.grad.shape()),
        }
    }
}

/// Per-sample gradients for a whole model, aligned with its canonical
/// parameter order. Produced by backward passes that take `&self`, so a
/// batch can be differentiated in parallel and reduced in index order.
#[derive(Debug, Clone)]
pub struct Grads {
    pub tensors: Vec<Tensor<f64>>,
}

impl Grads {
    pub fn zeros_like(params: &[&Param<f64>]) -> Self {
        Grads {
            tensors: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Grads) {
        assert_eq!(self.tensors.len(), other.tensors.len());
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for t in &mut self.tensors {
            t.scale(k);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.is_finite())
    }

    /// Flattens in canonical order, matching `param_vector` layouts.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for t in &self.tensors {
            out.extend_from_slice(t.data());
        }
        out
    }
}

/// Total number of scalar parameters across `params`.
pub fn param_count<F: Scalar>(params: &[&Param<F>]) -> usize {
    params.iter().map(|p| p.numel()).sum()
}
