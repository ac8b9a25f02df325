//! Fully-connected layer over the channel axis.

use super::param::Param;
use super::tensor::{axpy, dot, Scalar, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Dense<F: Scalar = f64> {
    pub in_features: usize,
    pub out_features: usize,
    /// `[out, in]`
    pub weight: Param<F>,
    /// `[out]`
    pub bias: Param<F>,
}

#[derive(Debug)]
pub struct DenseGrads {
    pub dweight: Tensor<f64>,
    pub dbias: Tensor<f64>,
}

impl<F: Scalar> Dense<F> {
    pub fn new(name: &str, in_features: usize, out_features: usize) -> Self {
        Dense {
            in_features,
            out_features,
            weight: Param::new(format!("{name}.w"), Tensor::zeros(&[out_features, in_features])),
            bias: Param::new(format!("{name}.b"), Tensor::zeros(&[out_features])),
        }
    }

    /// `x: [B, in] -> [B, out]`
    pub fn forward(&self, x: &Tensor<F>) -> Result<Tensor<F>> {
        if x.rank() != 2 || x.dim(1) != self.in_features {
            return Err(Error::shape(format!(
                "dense input must be [B,{}], got {:?}",
                self.in_features,
                x.shape()
            )));
        }
        let bsz = x.dim(0);
        let mut y = Tensor::zeros(&[bsz, self.out_features]);
        for b in 0..bsz {
            let xrow = x.row(b);
            let yrow = y.row_mut(b);
            for o in 0..self.out_features {
                yrow[o] = self.bias.value.data()[o] + dot(self.weight.value.row(o), xrow);
            }
        }
        Ok(y)
    }
}

impl Dense<f64> {
    pub fn backward(&self, x: &Tensor<f64>, dy: &Tensor<f64>) -> Result<(Tensor<f64>, DenseGrads)> {
        let bsz = x.dim(0);
        if dy.shape() != [bsz, self.out_features] {
            return Err(Error::shape("dense dy shape".into()));
        }
        let mut dx = Tensor::zeros(&[bsz, self.in_features]);
        let mut dw = Tensor::zeros(&[self.out_features, self.in_features]);
        let mut db = Tensor::zeros(&[self.out_features]);
        for b in 0..bsz {
            let xrow = x.row(b);
            let dyrow = dy.row(b);
            let dxrow = dx.row_mut(b);
            for o in 0..self.out_features {
                let g = dyrow[o];
                db.data_mut()[o] += g;
                axpy(g, self.weight.value.row(o), dxrow);
                axpy(g, xrow, dw.row_mut(o));
            }
        }
        Ok((dx, DenseGrads { dweight: dw, dbias: db }))
    }
}
