//! Elementwise and reduction ops: gated activation, ReLU, global average
//! pooling over time, and MSE loss.

use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

#[inline]
pub fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// `z = tanh(xf) .* sigmoid(xg)`, elementwise over equal shapes.
pub fn gated_activation<F: Scalar>(xf: &Tensor<F>, xg: &Tensor<F>) -> Result<Tensor<F>> {
    if xf.shape() != xg.shape() {
        return Err(Error::shape(format!(
            "gated activation shapes {:?} vs {:?}",
            xf.shape(),
            xg.shape()
        )));
    }
    let mut z = Tensor::zeros(xf.shape());
    for ((zi, f), g) in z.data_mut().iter_mut().zip(xf.data()).zip(xg.data()) {
        *zi = f.tanh() * sigmoid(*g);
    }
    Ok(z)
}

/// Exact gradients of the gated activation w.r.t. both paths.
pub fn gated_activation_backward(
    xf: &Tensor<f64>,
    xg: &Tensor<f64>,
    dz: &Tensor<f64>,
) -> Result<(Tensor<f64>, Tensor<f64>)> {
    if xf.shape() != xg.shape() || xf.shape() != dz.shape() {
        return Err(Error::shape("gated backward shape mismatch".into()));
    }
    let mut dxf = Tensor::zeros(xf.shape());
    let mut dxg = Tensor::zeros(xg.shape());
    for i in 0..dz.numel() {
        let t = xf.data()[i].tanh();
        let s = sigmoid(xg.data()[i]);
        let g = dz.data()[i];
        dxf.data_mut()[i] = g * (1.0 - t * t) * s;
        dxg.data_mut()[i] = g * t * s * (1.0 - s);
    }
    Ok((dxf, dxg))
}

pub fn relu<F: Scalar>(x: &Tensor<F>) -> Tensor<F> {
    let mut y = x.clone();
    for v in y.data_mut() {
        if *v < F::zero() {
            *v = F::zero();
        }
    }
    y
}

pub fn relu_backward(x: &Tensor<f64>, dy: &Tensor<f64>) -> Tensor<f64> {
    assert_eq!(x.shape(), dy.shape());
    let mut dx = dy.clone();
    for (d, v) in dx.data_mut().iter_mut().zip(x.data()) {
        if *v <= 0.0 {
            *d = 0.0;
        }
    }
    dx
}

/// Mean over the time axis: `[B,T,C] -> [B,C]`.
pub fn global_avg_pool<F: Scalar>(x: &Tensor<F>) -> Result<Tensor<F>> {
    if x.rank() != 3 {
        return Err(Error::shape(format!("pool input must be rank 3, got {:?}", x.shape())));
    }
    let (bsz, tlen, ch) = (x.dim(0), x.dim(1), x.dim(2));
    let mut y = Tensor::zeros(&[bsz, ch]);
    let inv = F::from_f64(1.0 / tlen as f64);
    for b in 0..bsz {
        for t in 0..tlen {
            let xrow = x.row(b * tlen + t);
            let yrow = y.row_mut(b);
            for c in 0..ch {
                yrow[c] = yrow[c] + xrow[c] * inv;
            }
        }
    }
    Ok(y)
}

/// Spreads `dy: [B,C]` back over the pooled time axis.
pub fn global_avg_pool_backward(dy: &Tensor<f64>, tlen: usize) -> Tensor<f64> {
    let (bsz, ch) = (dy.dim(0), dy.dim(1));
    let mut dx = Tensor::zeros(&[bsz, tlen, ch]);
    let inv = 1.0 / tlen as f64;
    for b in 0..bsz {
        let dyrow: Vec<f64> = dy.row(b).iter().map(|v| v * inv).collect();
        for t in 0..tlen {
            dx.row_mut(b * tlen + t).copy_from_slice(&dyrow);
        }
    }
    dx
}

/// Mean squared error over all batch and output elements, with its
/// gradient w.r.t. `pred`.
pub fn mse_loss(pred: &Tensor<f64>, target: &Tensor<f64>) -> Result<(f64, Tensor<f64>)> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "mse shapes {:?} vs {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.numel() as f64;
    let mut grad = Tensor::zeros(pred.shape());
    let mut acc = 0.0;
    for i in 0..pred.numel() {
        let e = pred.data()[i] - target.data()[i];
        acc += e * e;
        grad.data_mut()[i] = 2.0 * e / n;
    }
    Ok((acc / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gated_zero_inputs_give_zero() {
        let x = Tensor::<f64>::zeros(&[2, 3]);
        let z = gated_activation(&x, &x).unwrap();
        assert!(z.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gate_saturation_approaches_tanh() {
        // sigmoid(30) is 1 within 1e-9, so z -> tanh(xf).
        let xf = Tensor::from_vec(&[3], vec![-1.0, 0.3, 2.0]).unwrap();
        let xg = Tensor::from_vec(&[3], vec![30.0, 30.0, 30.0]).unwrap();
        let z = gated_activation(&xf, &xg).unwrap();
        for (zi, f) in z.data().iter().zip(xf.data()) {
            assert_abs_diff_eq!(*zi, f.tanh(), epsilon = 1e-9);
        }
    }

    #[test]
    fn gated_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shape = [4, 8];
        let n = 32;
        let xf = Tensor::from_vec(&shape, (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .unwrap();
        let xg = Tensor::from_vec(&shape, (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .unwrap();
        let pull = Tensor::from_vec(&shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let (dxf, dxg) = gated_activation_backward(&xf, &xg, &pull).unwrap();

        let mut fv = xf.data().to_vec();
        let fd_f = gradcheck::central_diff(&mut fv, 1e-5, |v| {
            let xt = Tensor::from_vec(&shape, v.to_vec()).unwrap();
            let z = gated_activation(&xt, &xg).unwrap();
            z.data().iter().zip(pull.data()).map(|(a, b)| a * b).sum()
        });
        assert!(gradcheck::max_rel_err(dxf.data(), &fd_f, 1e-3) < 1e-6);

        let mut gv = xg.data().to_vec();
        let fd_g = gradcheck::central_diff(&mut gv, 1e-5, |v| {
            let xt = Tensor::from_vec(&shape, v.to_vec()).unwrap();
            let z = gated_activation(&xf, &xt).unwrap();
            z.data().iter().zip(pull.data()).map(|(a, b)| a * b).sum()
        });
        assert!(gradcheck::max_rel_err(dxg.data(), &fd_g, 1e-3) < 1e-6);
    }

    #[test]
    fn pool_of_time_constant_input_is_that_constant() {
        let mut x = Tensor::<f64>::zeros(&[1, 5, 2]);
        for t in 0..5 {
            x.row_mut(t).copy_from_slice(&[3.0, -1.0]);
        }
        let y = global_avg_pool(&x).unwrap();
        assert_abs_diff_eq!(y.data()[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.data()[1], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mse_zero_when_equal() {
        let p = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (loss, grad) = mse_loss(&p, &p).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mse_gradient_matches_finite_differences() {
        let p = Tensor::from_vec(&[2, 2], vec![1.0, -2.0, 0.5, 4.0]).unwrap();
        let t = Tensor::from_vec(&[2, 2], vec![0.0, 1.0, 0.5, -1.0]).unwrap();
        let (_, grad) = mse_loss(&p, &t).unwrap();
        let mut pv = p.data().to_vec();
        let fd = gradcheck::central_diff(&mut pv, 1e-6, |v| {
            let pt = Tensor::from_vec(&[2, 2], v.to_vec()).unwrap();
            mse_loss(&pt, &t).unwrap().0
        });
        assert!(gradcheck::max_rel_err(grad.data(), &fd, 1e-3) < 1e-8);
    }
}
