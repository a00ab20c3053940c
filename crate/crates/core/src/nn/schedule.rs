//! Learning-rate schedules over communication rounds.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum LrSchedule {
    Constant(f64),
    /// `eta0 * (1 + cos(pi t / total)) / 2`: starts at eta0, ends at 0.
    CosineToZero { eta0: f64, total: usize },
    /// Cosine segments restarting from eta0 at each listed round.
    CosineWarmRestarts { eta0: f64, restarts: Vec<usize>, total: usize },
}

impl LrSchedule {
    pub fn lr_at(&self, t: usize) -> f64 {
        match self {
            LrSchedule::Constant(eta) => *eta,
            LrSchedule::CosineToZero { eta0, total } => cosine(*eta0, t, 0, *total),
            LrSchedule::CosineWarmRestarts { eta0, restarts, total } => {
                let start = restarts.iter().copied().filter(|&r| r <= t).max().unwrap_or(0);
                let end = restarts
                    .iter()
                    .copied()
                    .filter(|&r| r > start)
                    .min()
                    .unwrap_or(*total)
                    .max(start + 1);
                cosine(*eta0, t, start, end)
            }
        }
    }
}

fn cosine(eta0: f64, t: usize, start: usize, end: usize) -> f64 {
    let len = (end - start).max(1) as f64;
    let phase = (t - start) as f64 / len;
    eta0 * (1.0 + (PI * phase.min(1.0)).cos()) / 2.0
}
