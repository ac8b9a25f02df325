//! Weight initialization: uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) for
//! all weight matrices, zero biases, LSTM forget-gate bias 1.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::conv::CausalConv1d;
use super::dense::Dense;
use super::recurrent::{CellKind, RecurrentCell};
use super::tensor::Tensor;

pub fn uniform_tensor(rng: &mut ChaCha8Rng, shape: &[usize], bound: f64) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-bound..bound)).collect();
    Tensor::from_vec(shape, data).unwrap()
}

fn fan_in_bound(fan_in: usize) -> f64 {
    (1.0 / fan_in as f64).sqrt()
}

pub fn init_conv(conv: &mut CausalConv1d<f64>, rng: &mut ChaCha8Rng) {
    let bound = fan_in_bound(conv.kernel * conv.in_channels);
    conv.weight.value = uniform_tensor(rng, conv.weight.value.shape(), bound);
    if let Some(b) = &mut conv.bias {
        b.value.fill(0.0);
    }
}

pub fn init_dense(dense: &mut Dense<f64>, rng: &mut ChaCha8Rng) {
    let bound = fan_in_bound(dense.in_features);
    dense.weight.value = uniform_tensor(rng, dense.weight.value.shape(), bound);
    dense.bias.value.fill(0.0);
}

pub fn init_recurrent(cell: &mut RecurrentCell<f64>, rng: &mut ChaCha8Rng) {
    cell.w.value = uniform_tensor(rng, cell.w.value.shape(), fan_in_bound(cell.input_size));
    cell.u.value = uniform_tensor(rng, cell.u.value.shape(), fan_in_bound(cell.hidden_size));
    cell.b.value.fill(0.0);
    if cell.kind == CellKind::Lstm {
        let m = cell.hidden_size;
        for k in 0..m {
            cell.b.value.data_mut()[m + k] = 1.0;
        }
    }
}
