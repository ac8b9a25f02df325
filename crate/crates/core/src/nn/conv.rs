//! Causal 1-D convolution with dilation.
//!
//! Output at time `t` reads inputs at `t, t-d, t-2d, ...` only; positions
//! before the sequence start are treated as zeros (implicit left padding
//! of `(k-1)*d` frames).

use super::param::Param;
use super::tensor::{axpy, dot, Scalar, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CausalConv1d<F: Scalar = f64> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub dilation: usize,
    /// `[out, kernel, in]`
    pub weight: Param<F>,
    /// `[out]`
    pub bias: Option<Param<F>>,
}

/// Gradients of one conv layer for a single backward call.
#[derive(Debug)]
pub struct ConvGrads {
    pub dweight: Tensor<f64>,
    pub dbias: Option<Tensor<f64>>,
}

impl<F: Scalar> CausalConv1d<F> {
    pub fn new(
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        dilation: usize,
        with_bias: bool,
    ) -> Self {
        assert!(kernel >= 1 && dilation >= 1);
        let weight = Param::new(
            format!("{name}.w"),
            Tensor::zeros(&[out_channels, kernel, in_channels]),
        );
        let bias = with_bias.then(|| Param::new(format!("{name}.b"), Tensor::zeros(&[out_channels])));
        CausalConv1d {
            in_channels,
            out_channels,
            kernel,
            dilation,
            weight,
            bias,
        }
    }

    /// Frames of history one output can see, including itself.
    pub fn receptive_field(&self) -> usize {
        1 + (self.kernel - 1) * self.dilation
    }

    fn check_input(&self, x: &Tensor<F>) -> Result<(usize, usize)> {
        if x.rank() != 3 || x.dim(2) != self.in_channels {
            return Err(Error::shape(format!(
                "conv input must be [B,T,{}], got {:?}",
                self.in_channels,
                x.shape()
            )));
        }
        Ok((x.dim(0), x.dim(1)))
    }

    /// `x: [B,T,Cin] -> [B,T,Cout]`
    pub fn forward(&self, x: &Tensor<F>) -> Result<Tensor<F>> {
        let (bsz, tlen) = self.check_input(x)?;
        let mut y = Tensor::zeros(&[bsz, tlen, self.out_channels]);
        let w = self.weight.value.data();
        let kin = self.kernel * self.in_channels;
        for b in 0..bsz {
            for t in 0..tlen {
                let yrow = y.row_mut(b * tlen + t);
                if let Some(bias) = &self.bias {
                    yrow.copy_from_slice(bias.value.data());
                }
                for j in 0..self.kernel {
                    let off = j * self.dilation;
                    if off > t {
                        break;
                    }
                    let xrow = x.row(b * tlen + (t - off));
                    let wj = j * self.in_channels;
                    for (o, acc) in yrow.iter_mut().enumerate() {
                        let wrow = &w[o * kin + wj..o * kin + wj + self.in_channels];
                        *acc = *acc + dot(wrow, xrow);
                    }
                }
            }
        }
        Ok(y)
    }
}

impl CausalConv1d<f64> {
    /// Exact gradients w.r.t. input, weights and bias.
    pub fn backward(&self, x: &Tensor<f64>, dy: &Tensor<f64>) -> Result<(Tensor<f64>, ConvGrads)> {
        let (bsz, tlen) = self.check_input(x)?;
        if dy.shape() != [bsz, tlen, self.out_channels] {
            return Err(Error::shape(format!(
                "conv dy shape {:?} != [{bsz},{tlen},{}]",
                dy.shape(),
                self.out_channels
            )));
        }
        let mut dx = Tensor::zeros(&[bsz, tlen, self.in_channels]);
        let mut dw = Tensor::zeros(self.weight.value.shape());
        let mut db = self.bias.as_ref().map(|_| Tensor::zeros(&[self.out_channels]));
        let w = self.weight.value.data();
        let kin = self.kernel * self.in_channels;

        for b in 0..bsz {
            for t in 0..tlen {
                let dyrow = dy.row(b * tlen + t);
                if let Some(db) = &mut db {
                    for (o, g) in dyrow.iter().enumerate() {
                        db.data_mut()[o] += *g;
                    }
                }
                for j in 0..self.kernel {
                    let off = j * self.dilation;
                    if off > t {
                        break;
                    }
                    let src = b * tlen + (t - off);
                    let wj = j * self.in_channels;
                    {
                        let dxrow = dx.row_mut(src);
                        for (o, g) in dyrow.iter().enumerate() {
                            let wrow = &w[o * kin + wj..o * kin + wj + self.in_channels];
                            axpy(*g, wrow, dxrow);
                        }
                    }
                    let xrow = x.row(src);
                    for (o, g) in dyrow.iter().enumerate() {
                        let dwrow =
                            &mut dw.data_mut()[o * kin + wj..o * kin + wj + self.in_channels];
                        axpy(*g, xrow, dwrow);
                    }
                }
            }
        }
        Ok((
            dx,
            ConvGrads {
                dweight: dw,
                dbias: db,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn randn_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Tensor::from_vec(shape, data).unwrap()
    }

    #[test]
    fn identity_kernel_passes_input_through() {
        let mut conv = CausalConv1d::new("c", 2, 2, 1, 1, true);
        // w[o,0,c] = identity
        conv.weight.value.data_mut()[0] = 1.0; // o0,c0
        conv.weight.value.data_mut()[3] = 1.0; // o1,c1
        let x = Tensor::from_vec(&[1, 3, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let y = conv.forward(&x).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn k2_difference_kernel() {
        // w = [1, -1] per channel: y[t] = x[t] - x[t-1], with x[-1] = 0.
        let mut conv = CausalConv1d::new("c", 1, 1, 2, 1, false);
        conv.weight.value.data_mut()[0] = 1.0; // j=0
        conv.weight.value.data_mut()[1] = -1.0; // j=1
        let x = Tensor::from_vec(&[1, 4, 1], vec![1.0, 4.0, 9.0, 16.0]).unwrap();
        let y = conv.forward(&x).unwrap();
        assert_eq!(y.data(), &[1.0, 3.0, 5.0, 7.0]);
    }

    #[test]
    fn dilation_skips_frames() {
        let mut conv = CausalConv1d::new("c", 1, 1, 2, 2, false);
        conv.weight.value.data_mut()[0] = 0.0; // j=0 tap
        conv.weight.value.data_mut()[1] = 1.0; // j=1 tap reads t-2
        let x = Tensor::from_vec(&[1, 5, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let y = conv.forward(&x).unwrap();
        assert_eq!(y.data(), &[0.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut conv = CausalConv1d::new("c", 3, 2, 2, 2, true);
        conv.weight.value = randn_tensor(&mut rng, &[2, 2, 3]);
        conv.bias.as_mut().unwrap().value = randn_tensor(&mut rng, &[2]);
        let x = randn_tensor(&mut rng, &[2, 6, 3]);
        // Loss: weighted sum of outputs so every element gets a distinct pull.
        let wsum = randn_tensor(&mut rng, &[2, 6, 2]);

        let y = conv.forward(&x).unwrap();
        let loss0: f64 = y.data().iter().zip(wsum.data()).map(|(a, b)| a * b).sum();
        assert!(loss0.is_finite());
        let (dx, grads) = conv.backward(&x, &wsum).unwrap();

        // d/dx
        let mut xv = x.data().to_vec();
        let fd_x = gradcheck::central_diff(&mut xv, 1e-5, |v| {
            let xt = Tensor::from_vec(&[2, 6, 3], v.to_vec()).unwrap();
            let y = conv.forward(&xt).unwrap();
            y.data().iter().zip(wsum.data()).map(|(a, b)| a * b).sum()
        });
        assert!(gradcheck::max_rel_err(dx.data(), &fd_x, 1e-3) < 1e-6);

        // d/dw
        let mut wv = conv.weight.value.data().to_vec();
        let fd_w = gradcheck::central_diff(&mut wv, 1e-5, |v| {
            let mut c = conv.clone();
            c.weight.value = Tensor::from_vec(&[2, 2, 3], v.to_vec()).unwrap();
            let y = c.forward(&x).unwrap();
            y.data().iter().zip(wsum.data()).map(|(a, b)| a * b).sum()
        });
        assert!(gradcheck::max_rel_err(grads.dweight.data(), &fd_w, 1e-3) < 1e-6);

        // d/db
        let mut bv = conv.bias.as_ref().unwrap().value.data().to_vec();
        let fd_b = gradcheck::central_diff(&mut bv, 1e-5, |v| {
            let mut c = conv.clone();
            c.bias.as_mut().unwrap().value = Tensor::from_vec(&[2], v.to_vec()).unwrap();
            let y = c.forward(&x).unwrap();
            y.data().iter().zip(wsum.data()).map(|(a, b)| a * b).sum()
        });
        assert!(
            gradcheck::max_rel_err(grads.dbias.as_ref().unwrap().data(), &fd_b, 1e-3) < 1e-6
        );
    }

    #[test]
    fn rejects_channel_mismatch() {
        let conv = CausalConv1d::<f64>::new("c", 3, 2, 2, 1, true);
        let x = Tensor::<f64>::zeros(&[1, 4, 2]);
        assert!(conv.forward(&x).is_err());
    }
}
