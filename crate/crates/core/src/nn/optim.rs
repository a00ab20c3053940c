//! Local optimizers: plain SGD, heavy-ball momentum, Adam.

use super::{LayerGrads, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Momentum { beta: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

/// Per-parameter moment buffers plus the weight-decay coefficient. Weight
/// decay enters as an L2 gradient term `g + wd * p`.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: OptimizerKind,
    weight_decay: f64,
    m: Vec<LayerGrads>,
    v: Vec<LayerGrads>,
    step: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, weight_decay: f64, model: &ModelParams) -> Self {
        let zeros = || model.layers().iter().map(LayerGrads::zeros_like).collect::<Vec<_>>();
        let needs_m = !matches!(kind, OptimizerKind::Sgd);
        let needs_v = matches!(kind, OptimizerKind::Adam { .. });
        Self {
            kind,
            weight_decay,
            m: if needs_m { zeros() } else { Vec::new() },
            v: if needs_v { zeros() } else { Vec::new() },
            step: 0,
        }
    }

    pub fn step(&mut self, model: &mut ModelParams, grads: &[LayerGrads], lr: f64) {
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (layer, g) in model.layers_mut().iter_mut().zip(grads) {
                    for (p, gw) in layer.w.iter_mut().zip(&g.w) {
                        *p -= lr * (gw + self.weight_decay * *p);
                    }
                    for (p, gb) in layer.b.iter_mut().zip(&g.b) {
                        *p -= lr * (gb + self.weight_decay * *p);
                    }
                }
            }
            OptimizerKind::Momentum { beta } => {
                for ((layer, g), buf) in model.layers_mut().iter_mut().zip(grads).zip(&mut self.m) {
                    step_momentum(&mut layer.w, &g.w, &mut buf.w, beta, lr, self.weight_decay);
                    step_momentum(&mut layer.b, &g.b, &mut buf.b, beta, lr, self.weight_decay);
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let bc1 = 1.0 - beta1.powi(self.step as i32);
                let bc2 = 1.0 - beta2.powi(self.step as i32);
                for (((layer, g), m), v) in model
                    .layers_mut()
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.m)
                    .zip(&mut self.v)
                {
                    step_adam(&mut layer.w, &g.w, &mut m.w, &mut v.w, beta1, beta2, eps, bc1, bc2, lr, self.weight_decay);
                    step_adam(&mut layer.b, &g.b, &mut m.b, &mut v.b, beta1, beta2, eps, bc1, bc2, lr, self.weight_decay);
                }
            }
        }
    }
}

fn step_momentum(params: &mut [f64], grads: &[f64], buf: &mut [f64], beta: f64, lr: f64, wd: f64) {
    for ((p, g), b) in params.iter_mut().zip(grads).zip(buf) {
        let eff = g + wd * *p;
        *b = beta * *b + eff;
        *p -= lr * *b;
    }
}

#[allow(clippy::too_many_arguments)]
fn step_adam(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    beta1: f64,
    beta2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
    lr: f64,
    wd: f64,
) {
    for (((p, g), mi), vi) in params.iter_mut().zip(grads).zip(m).zip(v) {
        let eff = g + wd * *p;
        *mi = beta1 * *mi + (1.0 - beta1) * eff;
        *vi = beta2 * *vi + (1.0 - beta2) * eff * eff;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model() -> ModelParams {
        ModelParams::new_mlp(3, &[], 2, 11)
    }

    fn grads_like(model: &ModelParams, fill: f64) -> Vec<LayerGrads> {
        model
            .layers()
            .iter()
            .map(|l| LayerGrads { w: vec![fill; l.w.len()], b: vec![fill; l.out_dim] })
            .collect()
    }

    #[test]
    fn sgd_zero_gradient_is_identity_without_decay() {
        let mut m = tiny_model();
        let before = m.clone();
        let g = grads_like(&m, 0.0);
        OptimizerState::new(OptimizerKind::Sgd, 0.0, &m).step(&mut m, &g, 0.1);
        assert_eq!(m, before);
    }

    #[test]
    fn sgd_zero_gradient_moves_only_by_decay() {
        let mut m = tiny_model();
        let before = m.clone();
        let g = grads_like(&m, 0.0);
        OptimizerState::new(OptimizerKind::Sgd, 0.01, &m).step(&mut m, &g, 0.1);
        for (l, lb) in m.layers().iter().zip(before.layers()) {
            for (w, wb) in l.w.iter().zip(&lb.w) {
                assert!((w - wb * (1.0 - 0.1 * 0.01)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn adam_first_step_is_sign_scaled() {
        let mut m = tiny_model();
        let before = m.clone();
        let g = grads_like(&m, 0.3);
        let mut opt = OptimizerState::new(
            OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 },
            0.0,
            &m,
        );
        opt.step(&mut m, &g, 0.01);
        // First step: m_hat = g, v_hat = g^2, so the move is lr * g / (|g| + eps).
        for (l, lb) in m.layers().iter().zip(before.layers()) {
            for (w, wb) in l.w.iter().zip(&lb.w) {
                let expect = wb - 0.01 * 0.3 / (0.3 + 1e-8);
                assert!((w - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn momentum_accumulates() {
        let mut m = tiny_model();
        let w0 = m.layers()[0].w[0];
        let g = grads_like(&m, 1.0);
        let mut opt = OptimizerState::new(OptimizerKind::Momentum { beta: 0.9 }, 0.0, &m);
        opt.step(&mut m, &g, 0.1); // buf = 1, step 0.1
        opt.step(&mut m, &g, 0.1); // buf = 1.9, step 0.19
        let expect = w0 - 0.1 - 0.19;
        assert!((m.layers()[0].w[0] - expect).abs() < 1e-12);
    }
}
