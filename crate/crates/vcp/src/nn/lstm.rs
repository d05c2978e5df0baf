//! LSTM layer with exact backpropagation through time.
//!
//! The recurrence, with `h_0 = c_0 = 0`:
//!
//! ```text
//! i_t = σ(W_i x_t + U_i h_{t-1} + b_i)
//! f_t = σ(W_f x_t + U_f h_{t-1} + b_f)
//! o_t = σ(W_o x_t + U_o h_{t-1} + b_o)
//! g_t = tanh(W_c x_t + U_c h_{t-1} + b_c)
//! c_t = f_t ∘ c_{t-1} + i_t ∘ g_t
//! h_t = o_t ∘ tanh(c_t)
//! ```
//!
//! The forward pass returns the full hidden sequence (every `h_t`), which a
//! flatten layer downstream consumes, plus the cache the backward pass needs.

use rand::Rng;

use super::{shape_error, sigmoid, Mat, NnError};

/// One gate's parameters: input weights `w` (H×D), recurrent weights `u`
/// (H×H) and bias `b` (H).
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w: Mat,
    pub u: Mat,
    pub b: Vec<f64>,
}

impl GateParams {
    fn zeros(hidden: usize, input: usize) -> Self {
        GateParams {
            w: Mat::zeros(hidden, input),
            u: Mat::zeros(hidden, hidden),
            b: vec![0.0; hidden],
        }
    }

    fn preactivation(&self, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
        let mut pre = self.w.matvec(x);
        let rec = self.u.matvec(h_prev);
        for ((p, r), b) in pre.iter_mut().zip(rec).zip(&self.b) {
            *p += r + b;
        }
        pre
    }

    pub fn param_count(&self) -> usize {
        self.w.data.len() + self.u.data.len() + self.b.len()
    }
}

/// Shared parameter set of the four gates, in order input, forget,
/// candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub hidden: usize,
    pub input_dim: usize,
    pub input: GateParams,
    pub forget: GateParams,
    pub candidate: GateParams,
    pub output: GateParams,
}

impl LstmParams {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        LstmParams {
            hidden,
            input_dim,
            input: GateParams::zeros(hidden, input_dim),
            forget: GateParams::zeros(hidden, input_dim),
            candidate: GateParams::zeros(hidden, input_dim),
            output: GateParams::zeros(hidden, input_dim),
        }
    }

    /// Glorot-uniform weights, zero biases apart from the forget-gate bias
    /// at 1.0 so early cell state is retained.
    pub fn glorot<R: Rng>(hidden: usize, input_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(hidden, input_dim);
        let init_mat = |m: &mut Mat, rng: &mut R| {
            let bound = (6.0 / (m.rows + m.cols) as f64).sqrt();
            for cell in &mut m.data {
                *cell = rng.random_range(-bound..bound);
            }
        };
        for gate in [
            &mut p.input,
            &mut p.forget,
            &mut p.candidate,
            &mut p.output,
        ] {
            init_mat(&mut gate.w, rng);
            init_mat(&mut gate.u, rng);
        }
        p.forget.b.fill(1.0);
        p
    }

    pub fn gates(&self) -> [&GateParams; 4] {
        [&self.input, &self.forget, &self.candidate, &self.output]
    }

    pub fn gates_mut(&mut self) -> [&mut GateParams; 4] {
        [
            &mut self.input,
            &mut self.forget,
            &mut self.candidate,
            &mut self.output,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.gates().iter().map(|g| g.param_count()).sum()
    }
}

/// Per-timestep activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub x: Mat,
    pub i: Mat,
    pub f: Mat,
    pub g: Mat,
    pub o: Mat,
    pub c: Mat,
    pub tanh_c: Mat,
    pub h: Mat,
}

/// Run the recurrence over an L×D input; returns the L×H hidden sequence
/// and the cache.
pub fn lstm_forward(x: &Mat, p: &LstmParams) -> Result<(Mat, LstmCache), NnError> {
    if x.cols != p.input_dim {
        return Err(shape_error(
            "lstm_forward",
            format!("input dim {}", p.input_dim),
            format!("{}", x.cols),
        ));
    }
    let (steps, hidden) = (x.rows, p.hidden);
    let mut cache = LstmCache {
        x: x.clone(),
        i: Mat::zeros(steps, hidden),
        f: Mat::zeros(steps, hidden),
        g: Mat::zeros(steps, hidden),
        o: Mat::zeros(steps, hidden),
        c: Mat::zeros(steps, hidden),
        tanh_c: Mat::zeros(steps, hidden),
        h: Mat::zeros(steps, hidden),
    };
    let mut h_prev = vec![0.0; hidden];
    let mut c_prev = vec![0.0; hidden];
    for t in 0..steps {
        let x_t = x.row(t);
        let i_t: Vec<f64> = p
            .input
            .preactivation(x_t, &h_prev)
            .into_iter()
            .map(sigmoid)
            .collect();
        let f_t: Vec<f64> = p
            .forget
            .preactivation(x_t, &h_prev)
            .into_iter()
            .map(sigmoid)
            .collect();
        let g_t: Vec<f64> = p
            .candidate
            .preactivation(x_t, &h_prev)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let o_t: Vec<f64> = p
            .output
            .preactivation(x_t, &h_prev)
            .into_iter()
            .map(sigmoid)
            .collect();
        for k in 0..hidden {
            let c_k = f_t[k] * c_prev[k] + i_t[k] * g_t[k];
            let tanh_c_k = c_k.tanh();
            let h_k = o_t[k] * tanh_c_k;
            cache.c.row_mut(t)[k] = c_k;
            cache.tanh_c.row_mut(t)[k] = tanh_c_k;
            cache.h.row_mut(t)[k] = h_k;
        }
        cache.i.row_mut(t).copy_from_slice(&i_t);
        cache.f.row_mut(t).copy_from_slice(&f_t);
        cache.g.row_mut(t).copy_from_slice(&g_t);
        cache.o.row_mut(t).copy_from_slice(&o_t);
        h_prev.copy_from_slice(cache.h.row(t));
        c_prev.copy_from_slice(cache.c.row(t));
    }
    let hs = cache.h.clone();
    Ok((hs, cache))
}

/// Reverse-mode gradients of the recurrence.
///
/// `upstream` is ∂loss/∂h for every timestep (L×H). Returns the parameter
/// gradients and ∂loss/∂x (L×D).
pub fn lstm_backward(
    p: &LstmParams,
    cache: &LstmCache,
    upstream: &Mat,
) -> Result<(LstmParams, Mat), NnError> {
    let (steps, hidden) = (cache.x.rows, p.hidden);
    if upstream.rows != steps || upstream.cols != hidden {
        return Err(shape_error(
            "lstm_backward",
            format!("{steps}x{hidden}"),
            format!("{}x{}", upstream.rows, upstream.cols),
        ));
    }
    let mut grads = LstmParams::zeros(hidden, p.input_dim);
    let mut dx = Mat::zeros(steps, p.input_dim);
    let mut dh_next = vec![0.0; hidden];
    let mut dc_next = vec![0.0; hidden];
    let zero_state = vec![0.0; hidden];

    for t in (0..steps).rev() {
        let h_prev: &[f64] = if t == 0 { &zero_state } else { cache.h.row(t - 1) };
        let c_prev: &[f64] = if t == 0 { &zero_state } else { cache.c.row(t - 1) };
        let (i_t, f_t, g_t, o_t) = (
            cache.i.row(t),
            cache.f.row(t),
            cache.g.row(t),
            cache.o.row(t),
        );
        let tanh_c = cache.tanh_c.row(t);

        // Preactivation gradients for the four gates.
        let mut d_pre_i = vec![0.0; hidden];
        let mut d_pre_f = vec![0.0; hidden];
        let mut d_pre_g = vec![0.0; hidden];
        let mut d_pre_o = vec![0.0; hidden];
        let mut dc_prev = vec![0.0; hidden];
        for k in 0..hidden {
            let dh = upstream.row(t)[k] + dh_next[k];
            let do_k = dh * tanh_c[k];
            let dc = dc_next[k] + dh * o_t[k] * (1.0 - tanh_c[k] * tanh_c[k]);
            let df_k = dc * c_prev[k];
            let di_k = dc * g_t[k];
            let dg_k = dc * i_t[k];
            dc_prev[k] = dc * f_t[k];
            d_pre_i[k] = di_k * i_t[k] * (1.0 - i_t[k]);
            d_pre_f[k] = df_k * f_t[k] * (1.0 - f_t[k]);
            d_pre_g[k] = dg_k * (1.0 - g_t[k] * g_t[k]);
            d_pre_o[k] = do_k * o_t[k] * (1.0 - o_t[k]);
        }

        let x_t = cache.x.row(t);
        let mut dx_t = vec![0.0; p.input_dim];
        let mut dh_prev = vec![0.0; hidden];
        for (gate, d_pre) in [
            (&mut grads.input, &d_pre_i),
            (&mut grads.forget, &d_pre_f),
            (&mut grads.candidate, &d_pre_g),
            (&mut grads.output, &d_pre_o),
        ] {
            gate.w.add_outer(d_pre, x_t);
            gate.u.add_outer(d_pre, h_prev);
            for (b, d) in gate.b.iter_mut().zip(d_pre) {
                *b += d;
            }
        }
        for (params_gate, d_pre) in [
            (&p.input, &d_pre_i),
            (&p.forget, &d_pre_f),
            (&p.candidate, &d_pre_g),
            (&p.output, &d_pre_o),
        ] {
            for (acc, v) in dx_t.iter_mut().zip(params_gate.w.tmatvec(d_pre)) {
                *acc += v;
            }
            for (acc, v) in dh_prev.iter_mut().zip(params_gate.u.tmatvec(d_pre)) {
                *acc += v;
            }
        }
        dx.row_mut(t).copy_from_slice(&dx_t);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    Ok((grads, dx))
}
