//! Recurrent cells (LSTM, GRU, vanilla RNN) with a shared stepping
//! contract, sequence runners, and exact backpropagation through time.
//!
//! Weight layouts stack the gates row-wise:
//! LSTM `[i; f; g; o]`, GRU `[z; r; n]`, RNN a single block. Each cell
//! holds `w: [gates*m, input]`, `u: [gates*m, m]`, `b: [gates*m]`.

use serde::{Deserialize, Serialize};

use super::param::Param;
use super::ops::sigmoid;
use super::tensor::{axpy, dot, Scalar, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Lstm,
    Gru,
    Rnn,
}

impl CellKind {
    pub fn gates(&self) -> usize {
        match self {
            CellKind::Lstm => 4,
            CellKind::Gru => 3,
            CellKind::Rnn => 1,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "lstm" => Ok(CellKind::Lstm),
            "gru" => Ok(CellKind::Gru),
            "rnn" => Ok(CellKind::Rnn),
            other => Err(Error::invalid(format!("unknown cell kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecurrentCell<F: Scalar = f64> {
    pub kind: CellKind,
    pub input_size: usize,
    pub hidden_size: usize,
    pub w: Param<F>,
    pub u: Param<F>,
    pub b: Param<F>,
}

#[derive(Debug)]
pub struct CellGrads {
    pub dw: Tensor<f64>,
    pub du: Tensor<f64>,
    pub db: Tensor<f64>,
}

/// Per-step activations captured during a cached forward pass.
#[derive(Debug)]
pub struct CellCache {
    /// Post-activation gate values, `[T, gates*m]`.
    gates: Tensor<f64>,
    /// LSTM cell states `[T, m]`; empty tensor otherwise.
    c: Tensor<f64>,
    /// GRU `r .* h_prev` terms `[T, m]`; empty otherwise.
    rh: Tensor<f64>,
}

impl<F: Scalar> RecurrentCell<F> {
    pub fn new(name: &str, kind: CellKind, input_size: usize, hidden_size: usize) -> Self {
        let g = kind.gates();
        RecurrentCell {
            kind,
            input_size,
            hidden_size,
            w: Param::new(format!("{name}.w"), Tensor::zeros(&[g * hidden_size, input_size])),
            u: Param::new(format!("{name}.u"), Tensor::zeros(&[g * hidden_size, hidden_size])),
            b: Param::new(format!("{name}.b"), Tensor::zeros(&[g * hidden_size])),
        }
    }

    /// One step. `c` is the LSTM cell state and is passed through untouched
    /// for GRU/RNN. Returns `(h_next, c_next)`.
    pub fn step(&self, x: &[F], h: &[F], c: &[F]) -> (Vec<F>, Vec<F>) {
        let m = self.hidden_size;
        let mut h_next = vec![F::zero(); m];
        let mut c_next = c.to_vec();
        let mut gates = vec![F::zero(); self.kind.gates() * m];
        self.step_into(x, h, c, &mut h_next, &mut c_next, &mut gates);
        (h_next, c_next)
    }

    /// Pre-activation row `g`: `b[g] + w[g].x + u[g].h`.
    #[inline]
    fn pre(&self, g: usize, x: &[F], h: &[F]) -> F {
        self.b.value.data()[g] + dot(self.w.value.row(g), x) + dot(self.u.value.row(g), h)
    }

    fn step_into(
        &self,
        x: &[F],
        h: &[F],
        c: &[F],
        h_next: &mut [F],
        c_next: &mut [F],
        gates: &mut [F],
    ) {
        let m = self.hidden_size;
        match self.kind {
            CellKind::Lstm => {
                for g in 0..4 * m {
                    let pre = self.pre(g, x, h);
                    gates[g] = if g / m == 2 { pre.tanh() } else { sigmoid(pre) };
                }
                for k in 0..m {
                    let (i, f, gg, o) = (gates[k], gates[m + k], gates[2 * m + k], gates[3 * m + k]);
                    c_next[k] = f * c[k] + i * gg;
                    h_next[k] = o * c_next[k].tanh();
                }
            }
            CellKind::Gru => {
                // z and r first; the candidate reads r .* h.
                for g in 0..2 * m {
                    gates[g] = sigmoid(self.pre(g, x, h));
                }
                let rh: Vec<F> = (0..m).map(|k| gates[m + k] * h[k]).collect();
                for k in 0..m {
                    let g = 2 * m + k;
                    let pre =
                        self.b.value.data()[g] + dot(self.w.value.row(g), x) + dot(self.u.value.row(g), &rh);
                    gates[g] = pre.tanh();
                }
                for k in 0..m {
                    let (z, n) = (gates[k], gates[2 * m + k]);
                    h_next[k] = (F::one() - z) * n + z * h[k];
                }
            }
            CellKind::Rnn => {
                for k in 0..m {
                    gates[k] = self.pre(k, x, h).tanh();
                    h_next[k] = gates[k];
                }
            }
        }
    }

    /// Runs the full sequence, returning hidden states `[T, m]`.
    pub fn forward_states(&self, x: &Tensor<F>) -> Result<Tensor<F>> {
        let (tlen, _) = self.check_input(x)?;
        let m = self.hidden_size;
        let mut states = Tensor::zeros(&[tlen, m]);
        let mut h = vec![F::zero(); m];
        let mut c = vec![F::zero(); m];
        let mut h_next = vec![F::zero(); m];
        let mut c_next = vec![F::zero(); m];
        let mut gates = vec![F::zero(); self.kind.gates() * m];
        for t in 0..tlen {
            self.step_into(x.row(t), &h, &c, &mut h_next, &mut c_next, &mut gates);
            states.row_mut(t).copy_from_slice(&h_next);
            std::mem::swap(&mut h, &mut h_next);
            std::mem::swap(&mut c, &mut c_next);
        }
        Ok(states)
    }

    fn check_input(&self, x: &Tensor<F>) -> Result<(usize, usize)> {
        if x.rank() != 2 || x.dim(1) != self.input_size {
            return Err(Error::shape(format!(
                "recurrent input must be [T,{}], got {:?}",
                self.input_size,
                x.shape()
            )));
        }
        Ok((x.dim(0), x.dim(1)))
    }
}

impl RecurrentCell<f64> {
    /// Forward pass that also captures what BPTT needs.
    pub fn forward_cached(&self, x: &Tensor<f64>) -> Result<(Tensor<f64>, CellCache)> {
        let (tlen, _) = self.check_input(x)?;
        let m = self.hidden_size;
        let g = self.kind.gates();
        let mut states = Tensor::zeros(&[tlen, m]);
        let mut gates = Tensor::zeros(&[tlen, g * m]);
        let mut c_seq = Tensor::zeros(&[tlen.max(1), if self.kind == CellKind::Lstm { m } else { 0 }]);
        let mut rh_seq = Tensor::zeros(&[tlen.max(1), if self.kind == CellKind::Gru { m } else { 0 }]);

        let mut h = vec![0.0; m];
        let mut c = vec![0.0; m];
        let mut h_next = vec![0.0; m];
        let mut c_next = vec![0.0; m];
        for t in 0..tlen {
            self.step_into(x.row(t), &h, &c, &mut h_next, &mut c_next, gates.row_mut(t));
            if self.kind == CellKind::Lstm {
                c_seq.row_mut(t).copy_from_slice(&c_next);
            }
            if self.kind == CellKind::Gru {
                let grow = gates.row(t);
                let rh: Vec<f64> = (0..m).map(|k| grow[m + k] * h[k]).collect();
                rh_seq.row_mut(t).copy_from_slice(&rh);
            }
            states.row_mut(t).copy_from_slice(&h_next);
            std::mem::swap(&mut h, &mut h_next);
            std::mem::swap(&mut c, &mut c_next);
        }
        Ok((
            states,
            CellCache {
                gates,
                c: c_seq,
                rh: rh_seq,
            },
        ))
    }

    /// BPTT. `d_states[t]` is the external gradient flowing into `h_t`.
    pub fn backward_seq(
        &self,
        x: &Tensor<f64>,
        states: &Tensor<f64>,
        cache: &CellCache,
        d_states: &Tensor<f64>,
    ) -> Result<(Tensor<f64>, CellGrads)> {
        let (tlen, _) = self.check_input(x)?;
        let m = self.hidden_size;
        if d_states.shape() != [tlen, m] {
            return Err(Error::shape("d_states shape".into()));
        }
        let mut dx = Tensor::zeros(&[tlen, self.input_size]);
        let mut dw = Tensor::zeros(self.w.value.shape());
        let mut du = Tensor::zeros(self.u.value.shape());
        let mut db = Tensor::zeros(self.b.value.shape());

        let mut dh_carry = vec![0.0; m];
        let mut dc_carry = vec![0.0; m];
        let zeros = vec![0.0; m];
        let mut da = vec![0.0; self.kind.gates() * m];

        for t in (0..tlen).rev() {
            let h_prev: &[f64] = if t == 0 { &zeros } else { states.row(t - 1) };
            let grow = cache.gates.row(t);
            let mut dh: Vec<f64> = d_states.row(t).to_vec();
            for (a, b) in dh.iter_mut().zip(&dh_carry) {
                *a += b;
            }

            match self.kind {
                CellKind::Lstm => {
                    let c_prev: &[f64] = if t == 0 { &zeros } else { cache.c.row(t - 1) };
                    let c_now = cache.c.row(t);
                    for k in 0..m {
                        let (i, f, gg, o) =
                            (grow[k], grow[m + k], grow[2 * m + k], grow[3 * m + k]);
                        let tc = c_now[k].tanh();
                        let d_o = dh[k] * tc;
                        let dc = dc_carry[k] + dh[k] * o * (1.0 - tc * tc);
                        let d_i = dc * gg;
                        let d_f = dc * c_prev[k];
                        let d_g = dc * i;
                        dc_carry[k] = dc * f;
                        da[k] = d_i * i * (1.0 - i);
                        da[m + k] = d_f * f * (1.0 - f);
                        da[2 * m + k] = d_g * (1.0 - gg * gg);
                        da[3 * m + k] = d_o * o * (1.0 - o);
                    }
                    self.accumulate(x.row(t), h_prev, None, &da, &mut dw, &mut du, &mut db);
                    self.propagate(&da, dx.row_mut(t), &mut dh_carry);
                }
                CellKind::Gru => {
                    let rh = cache.rh.row(t);
                    // dh_carry is rebuilt from three paths below.
                    let mut dh_prev = vec![0.0; m];
                    for k in 0..m {
                        let (z, n) = (grow[k], grow[2 * m + k]);
                        let d_n = dh[k] * (1.0 - z);
                        let d_z = dh[k] * (h_prev[k] - n);
                        dh_prev[k] += dh[k] * z;
                        da[2 * m + k] = d_n * (1.0 - n * n);
                        da[k] = d_z * z * (1.0 - z);
                    }
                    // d(r.*h) = U_n^T da_n
                    let mut drh = vec![0.0; m];
                    for k in 0..m {
                        axpy(da[2 * m + k], self.u.value.row(2 * m + k), &mut drh);
                    }
                    for k in 0..m {
                        let r = grow[m + k];
                        let d_r = drh[k] * h_prev[k];
                        dh_prev[k] += drh[k] * r;
                        da[m + k] = d_r * r * (1.0 - r);
                    }
                    self.accumulate(x.row(t), h_prev, Some(rh), &da, &mut dw, &mut du, &mut db);
                    // W^T da into dx; U_z^T, U_r^T into dh_prev.
                    let dxrow = dx.row_mut(t);
                    for g in 0..3 * m {
                        axpy(da[g], self.w.value.row(g), dxrow);
                    }
                    for g in 0..2 * m {
                        axpy(da[g], self.u.value.row(g), &mut dh_prev);
                    }
                    dh_carry.copy_from_slice(&dh_prev);
                }
                CellKind::Rnn => {
                    for k in 0..m {
                        let h_now = grow[k];
                        da[k] = dh[k] * (1.0 - h_now * h_now);
                    }
                    self.accumulate(x.row(t), h_prev, None, &da, &mut dw, &mut du, &mut db);
                    self.propagate(&da, dx.row_mut(t), &mut dh_carry);
                }
            }
        }
        Ok((dx, CellGrads { dw, du, db }))
    }

    /// dw += da (x) x, du += da (x) h_src, db += da. For GRU the candidate
    /// rows use `rh` as the recurrent source instead of `h_prev`.
    fn accumulate(
        &self,
        x: &[f64],
        h_prev: &[f64],
        rh: Option<&[f64]>,
        da: &[f64],
        dw: &mut Tensor<f64>,
        du: &mut Tensor<f64>,
        db: &mut Tensor<f64>,
    ) {
        let m = self.hidden_size;
        for (g, a) in da.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            db.data_mut()[g] += a;
            axpy(*a, x, dw.row_mut(g));
            let src = match (self.kind, rh) {
                (CellKind::Gru, Some(rh)) if g >= 2 * m => rh,
                _ => h_prev,
            };
            axpy(*a, src, du.row_mut(g));
        }
    }

    /// dx = W^T da, dh_carry = U^T da (cells whose recurrent source is h_prev).
    fn propagate(&self, da: &[f64], dx: &mut [f64], dh_carry: &mut [f64]) {
        for v in dh_carry.iter_mut() {
            *v = 0.0;
        }
        for (g, a) in da.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            axpy(*a, self.w.value.row(g), dx);
            axpy(*a, self.u.value.row(g), dh_carry);
        }
    }
}

/// A recurrent layer, optionally bidirectional.
///
/// The backward direction runs on the reversed input; its state after
/// consuming frames `T-1..=t` is aligned to time `t`, so stacked layers see
/// `[fwd_t | bwd_t]` and the "last hidden feature" is
/// `[fwd_{T-1} | bwd_0]`.
#[derive(Debug, Clone)]
pub struct BiCell<F: Scalar = f64> {
    pub fwd: RecurrentCell<F>,
    pub bwd: Option<RecurrentCell<F>>,
}

impl<F: Scalar> BiCell<F> {
    pub fn out_features(&self) -> usize {
        self.fwd.hidden_size * if self.bwd.is_some() { 2 } else { 1 }
    }

    pub fn forward_states(&self, x: &Tensor<F>) -> Result<Tensor<F>> {
        let fwd = self.fwd.forward_states(x)?;
        let Some(bwd) = &self.bwd else {
            return Ok(fwd);
        };
        let rev = reverse_time(x);
        let bwd_states = bwd.forward_states(&rev)?;
        Ok(concat_aligned(&fwd, &bwd_states))
    }

    /// Final features: last forward state, plus the full-pass backward
    /// state when bidirectional.
    pub fn last_features(&self, states: &Tensor<F>) -> Vec<F> {
        let tlen = states.dim(0);
        let m = self.fwd.hidden_size;
        if self.bwd.is_some() {
            let mut out = Vec::with_capacity(2 * m);
            out.extend_from_slice(&states.row(tlen - 1)[..m]);
            out.extend_from_slice(&states.row(0)[m..]);
            out
        } else {
            states.row(tlen - 1).to_vec()
        }
    }
}

pub(crate) fn reverse_time<F: Scalar>(x: &Tensor<F>) -> Tensor<F> {
    let (tlen, ch) = (x.dim(0), x.dim(1));
    let mut out = Tensor::zeros(&[tlen, ch]);
    for t in 0..tlen {
        out.row_mut(t).copy_from_slice(x.row(tlen - 1 - t));
    }
    out
}

/// `[fwd_t | bwd_aligned_t]` where `bwd_aligned_t = bwd_states_rev[T-1-t]`.
pub(crate) fn concat_aligned<F: Scalar>(fwd: &Tensor<F>, bwd_rev: &Tensor<F>) -> Tensor<F> {
    let (tlen, m) = (fwd.dim(0), fwd.dim(1));
    let mut out = Tensor::zeros(&[tlen, 2 * m]);
    for t in 0..tlen {
        out.row_mut(t)[..m].copy_from_slice(fwd.row(t));
        out.row_mut(t)[m..].copy_from_slice(bwd_rev.row(tlen - 1 - t));
    }
    out
}

/// Runs a stack of recurrent layers over one sequence and returns the last
/// hidden feature vector of the top layer.
pub fn run_recurrent<F: Scalar>(layers: &[BiCell<F>], seq: &Tensor<F>) -> Result<Vec<F>> {
    if layers.is_empty() {
        return Err(Error::invalid("empty recurrent stack"));
    }
    let mut x = seq.clone();
    for (i, layer) in layers.iter().enumerate() {
        let states = layer.forward_states(&x)?;
        if i + 1 == layers.len() {
            return Ok(layer.last_features(&states));
        }
        x = states;
    }
    unreachable!()
}
