//! Uplink cost accounting against the float32 baseline of 4 bytes per
//! parameter per layer.

/// Byte counts per round and per client, with cumulative totals.
#[derive(Debug, Clone, Default)]
pub struct CostLedger {
    /// 4 bytes * parameter count, summed over layers: what one client upload
    /// would cost uncompressed.
    float32_upload_bytes: u64,
    rounds: Vec<RoundCosts>,
}

#[derive(Debug, Clone)]
pub struct RoundCosts {
    pub round: usize,
    pub per_client: Vec<(usize, u64)>,
}

impl CostLedger {
    pub fn new(model_param_count: usize) -> Self {
        Self { float32_upload_bytes: 4 * model_param_count as u64, rounds: Vec::new() }
    }

    pub fn float32_upload_bytes(&self) -> u64 {
        self.float32_upload_bytes
    }

    /// Records the total encoded bytes one client uploaded in one round.
    pub fn record(&mut self, round: usize, client: usize, bytes: u64) {
        match self.rounds.last_mut() {
            Some(r) if r.round == round => r.per_client.push((client, bytes)),
            _ => self.rounds.push(RoundCosts { round, per_client: vec![(client, bytes)] }),
        }
    }

    pub fn round_bytes(&self, round: usize) -> u64 {
        self.rounds
            .iter()
            .filter(|r| r.round == round)
            .flat_map(|r| r.per_client.iter().map(|(_, b)| *b))
            .sum()
    }

    /// Actual bytes across all rounds so far.
    pub fn total_bytes(&self) -> u64 {
        self.rounds.iter().flat_map(|r| r.per_client.iter().map(|(_, b)| *b)).sum()
    }

    /// What the same uploads would have cost in raw float32.
    pub fn total_float32_bytes(&self) -> u64 {
        let uploads: u64 = self.rounds.iter().map(|r| r.per_client.len() as u64).sum();
        uploads * self.float32_upload_bytes
    }

    /// float32 cost divided by actual cost.
    pub fn compression_ratio(&self) -> f64 {
        let actual = self.total_bytes();
        if actual == 0 {
            return 1.0;
        }
        self.total_float32_bytes() as f64 / actual as f64
    }

    pub fn rounds(&self) -> &[RoundCosts] {
        &self.rounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_is_sum_of_rounds() {
        let mut l = CostLedger::new(100); // float32 upload = 400 bytes
        l.record(0, 3, 50);
        l.record(0, 7, 70);
        l.record(1, 3, 30);
        assert_eq!(l.round_bytes(0), 120);
        assert_eq!(l.round_bytes(1), 30);
        assert_eq!(l.total_bytes(), 150);
        assert_eq!(l.total_float32_bytes(), 3 * 400);
        assert!((l.compression_ratio() - 8.0).abs() < 1e-12);
    }
}
