use super::params::{LstmParams, GATE_CANDIDATE, GATE_FORGET, GATE_INPUT, GATE_OUTPUT};

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Activated gates `[i | f | o | g]` for one step, each block `H` wide.
pub(crate) fn gates(layer: &LstmParams, x: &[f64], h_prev: &[f64], out: &mut [f64]) {
    let (n_in, h) = (layer.input_dim, layer.hidden_dim);
    debug_assert_eq!(x.len(), n_in);
    debug_assert_eq!(h_prev.len(), h);
    for r in 0..4 * h {
        let z = layer.b[r] + dot(&layer.w[r * n_in..(r + 1) * n_in], x) + dot(&layer.u[r * h..(r + 1) * h], h_prev);
        out[r] = if r / h == GATE_CANDIDATE { z.tanh() } else { sigmoid(z) };
    }
}

/// One LSTM step:
/// `c = f ⊙ c_prev + i ⊙ g`, `h = o ⊙ tanh(c)`.
pub fn lstm_cell_step(x: &[f64], h_prev: &[f64], c_prev: &[f64], layer: &LstmParams) -> (Vec<f64>, Vec<f64>) {
    let hd = layer.hidden_dim;
    let mut g = vec![0.0; 4 * hd];
    let mut h = vec![0.0; hd];
    let mut c = vec![0.0; hd];
    step_into(layer, x, h_prev, c_prev, &mut g, &mut h, &mut c);
    assert!(h.iter().chain(&c).all(|v| v.is_finite()), "non-finite LSTM state");
    (h, c)
}

/// Step writing gates, hidden and cell into caller buffers.
pub(crate) fn step_into(
    layer: &LstmParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gate_buf: &mut [f64],
    h: &mut [f64],
    c: &mut [f64],
) {
    let hd = layer.hidden_dim;
    gates(layer, x, h_prev, gate_buf);
    for j in 0..hd {
        let i = gate_buf[GATE_INPUT * hd + j];
        let f = gate_buf[GATE_FORGET * hd + j];
        let o = gate_buf[GATE_OUTPUT * hd + j];
        let g = gate_buf[GATE_CANDIDATE * hd + j];
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * c[j].tanh();
    }
}

/// Gradients flowing out of one real step.
pub(crate) struct StepGrads<'a> {
    pub dw: &'a mut [f64],
    pub du: &'a mut [f64],
    pub db: &'a mut [f64],
}

/// Backward through one step. `dh` is dL/dh_t, `dc` on entry is dL/dc_t from
/// later steps and on exit dL/dc_{t-1}. Writes dL/dx into `dx` and
/// dL/dh_{t-1} into `dh_prev`. `dz` is scratch of width `4H`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn step_backward(
    layer: &LstmParams,
    gate_vals: &[f64],
    c_t: &[f64],
    c_prev: &[f64],
    x: &[f64],
    h_prev: &[f64],
    dh: &[f64],
    dc: &mut [f64],
    dz: &mut [f64],
    dx: &mut [f64],
    dh_prev: &mut [f64],
    grads: StepGrads<'_>,
) {
    let (n_in, hd) = (layer.input_dim, layer.hidden_dim);
    for j in 0..hd {
        let i = gate_vals[GATE_INPUT * hd + j];
        let f = gate_vals[GATE_FORGET * hd + j];
        let o = gate_vals[GATE_OUTPUT * hd + j];
        let g = gate_vals[GATE_CANDIDATE * hd + j];
        let tc = c_t[j].tanh();
        let d_o = dh[j] * tc;
        let dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
        dz[GATE_INPUT * hd + j] = dcj * g * i * (1.0 - i);
        dz[GATE_FORGET * hd + j] = dcj * c_prev[j] * f * (1.0 - f);
        dz[GATE_OUTPUT * hd + j] = d_o * o * (1.0 - o);
        dz[GATE_CANDIDATE * hd + j] = dcj * i * (1.0 - g * g);
        dc[j] = dcj * f;
    }
    dx.fill(0.0);
    dh_prev.fill(0.0);
    for r in 0..4 * hd {
        let d = dz[r];
        grads.db[r] += d;
        let w_row = &layer.w[r * n_in..(r + 1) * n_in];
        let dw_row = &mut grads.dw[r * n_in..(r + 1) * n_in];
        for k in 0..n_in {
            dw_row[k] += d * x[k];
            dx[k] += d * w_row[k];
        }
        let u_row = &layer.u[r * hd..(r + 1) * hd];
        let du_row = &mut grads.du[r * hd..(r + 1) * hd];
        for k in 0..hd {
            du_row[k] += d * h_prev[k];
            dh_prev[k] += d * u_row[k];
        }
    }
}
