//! Round execution: client sampling, local training, compression,
//! aggregation, evaluation.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::baselines::{ErrorFeedbackState, SparsificationMask};
use crate::data::{Dataset, Partition};
use crate::nn::{evaluate, local_train, LrSchedule, ModelParams};
use crate::packing::CostLedger;
use crate::rng::{derive_seed, rng_from, tag};

use super::config::{CompressionScheme, FedConfig};
use super::pipeline::CompressionPipeline;
use super::SimError;

/// One row of the experiment trace.
#[derive(Debug, Clone, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub selected: Vec<usize>,
    pub accuracy: f64,
    pub loss: f64,
    pub bytes_up: u64,
    pub cumulative_bytes: u64,
    /// Wall time of the round; excluded from reports so identical configs
    /// serialize byte-identically.
    #[serde(skip)]
    pub wall_ms: u64,
}

/// Weighted FedAvg aggregation: `sum_i w_i u_i / sum_i w_i` per layer.
/// Weights are the client example counts.
pub fn aggregate_updates(updates: &[Vec<Vec<f64>>], weights: &[f64]) -> Vec<Vec<f64>> {
    assert_eq!(updates.len(), weights.len());
    assert!(!updates.is_empty());
    let total: f64 = weights.iter().sum();
    let layers = updates[0].len();
    (0..layers)
        .map(|li| {
            let mut acc = vec![0.0f64; updates[0][li].len()];
            for (client, &w) in updates.iter().zip(weights) {
                for (a, u) in acc.iter_mut().zip(&client[li]) {
                    *a += w * u;
                }
            }
            for a in acc.iter_mut() {
                *a /= total;
            }
            acc
        })
        .collect()
}

/// Per-coordinate variant for masked pipelines: each coordinate is divided
/// by the weight of the clients that actually transmitted it.
pub fn aggregate_updates_per_coord(
    updates: &[Vec<Vec<f64>>],
    weights: &[f64],
    masks: &[Vec<Option<SparsificationMask>>],
) -> Vec<Vec<f64>> {
    assert_eq!(updates.len(), weights.len());
    let layers = updates[0].len();
    (0..layers)
        .map(|li| {
            let len = updates[0][li].len();
            let mut acc = vec![0.0f64; len];
            let mut denom = vec![0.0f64; len];
            for ((client, &w), cmasks) in updates.iter().zip(weights).zip(masks) {
                for (a, u) in acc.iter_mut().zip(&client[li]) {
                    *a += w * u;
                }
                match &cmasks[li] {
                    Some(m) => {
                        for &i in m.indices() {
                            denom[i as usize] += w;
                        }
                    }
                    None => {
                        for d in denom.iter_mut() {
                            *d += w;
                        }
                    }
                }
            }
            for (a, d) in acc.iter_mut().zip(&denom) {
                if *d > 0.0 {
                    *a /= d;
                } else {
                    *a = 0.0;
                }
            }
            acc
        })
        .collect()
}

/// A fully-seeded FedAvg run over one dataset/model/compression setup.
pub struct Simulation {
    pub cfg: FedConfig,
    train: Dataset,
    test: Dataset,
    test_indices: Vec<u32>,
    partition: Partition,
    model: ModelParams,
    ledger: CostLedger,
    pipeline: CompressionPipeline,
    schedule: LrSchedule,
    /// Per (client, layer) residuals for the error-feedback scheme; persist
    /// across the rounds a client is selected.
    ef_states: Vec<Vec<ErrorFeedbackState>>,
}

impl Simulation {
    pub fn new(cfg: FedConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        if matches!(cfg.scheme, CompressionScheme::EfSign) && cfg.kept_fraction < 1.0 {
            return Err(SimError::Config(
                "error feedback tracks full-length residuals; combine it with kept_fraction = 1".into(),
            ));
        }
        let (train, test) = cfg.load_datasets()?;
        let partition = cfg.build_partition(&train)?;
        let classes = train.classes().max(test.classes());
        let model = ModelParams::new_mlp(train.dim(), &cfg.hidden, classes, cfg.seed);
        let ledger = CostLedger::new(model.param_count());
        let pipeline = CompressionPipeline::from_config(&cfg);
        let schedule = cfg.lr_schedule();
        let ef_states = if matches!(cfg.scheme, CompressionScheme::EfSign) {
            (0..cfg.clients)
                .map(|_| model.layers().iter().map(|l| ErrorFeedbackState::zeros(l.param_count())).collect())
                .collect()
        } else {
            Vec::new()
        };
        let test_indices: Vec<u32> = (0..test.len() as u32).collect();
        Ok(Self {
            cfg,
            train,
            test,
            test_indices,
            partition,
            model,
            ledger,
            pipeline,
            schedule,
            ef_states,
        })
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn train_dataset(&self) -> &Dataset {
        &self.train
    }

    /// Clients selected in round `t`: `ceil(m C)` distinct ids, a pure
    /// function of `(sampling_seed, t)`, returned sorted so aggregation
    /// order is fixed by client id.
    pub fn select_clients(&self, round: usize) -> Vec<usize> {
        let k = self.cfg.selected_per_round();
        let m = self.cfg.clients;
        let mut pool: Vec<usize> = (0..m).collect();
        let mut rng = rng_from(&[self.cfg.sampling_seed, tag::SAMPLING, round as u64]);
        for i in 0..k {
            let j = rng.gen_range(i..m);
            pool.swap(i, j);
        }
        let mut selected = pool[..k].to_vec();
        selected.sort_unstable();
        selected
    }

    /// One FedAvg round: sample clients, locally train each, compress and
    /// ship every layer, decode and aggregate on the server, update the
    /// model, evaluate.
    pub fn run_round(&mut self, round: usize) -> Result<RoundReport, SimError> {
        let start = Instant::now();
        let lr = self.schedule.lr_at(round);
        let selected = self.select_clients(round);

        let mut updates: Vec<Vec<Vec<f64>>> = Vec::with_capacity(selected.len());
        let mut masks: Vec<Vec<Option<SparsificationMask>>> = Vec::with_capacity(selected.len());
        let mut weights: Vec<f64> = Vec::with_capacity(selected.len());

        for &client in &selected {
            let shard = self.partition.shard(client);
            let outcome = local_train(
                &self.model,
                &self.train,
                shard,
                self.cfg.local_epochs,
                self.cfg.batch_size,
                self.cfg.optimizer_kind(),
                self.cfg.weight_decay,
                lr,
                derive_seed(&[self.cfg.seed, tag::SHUFFLE, round as u64, client as u64]),
            )?;

            let mut client_updates = Vec::with_capacity(outcome.pseudo_gradient.len());
            let mut client_masks = Vec::with_capacity(outcome.pseudo_gradient.len());
            let mut client_bytes = 0u64;
            for (li, flat) in outcome.pseudo_gradient.iter().enumerate() {
                if matches!(self.cfg.scheme, CompressionScheme::Float32) {
                    client_bytes += 4 * flat.len() as u64;
                    client_updates.push(flat.clone());
                    client_masks.push(None);
                } else {
                    let ef = if self.ef_states.is_empty() {
                        None
                    } else {
                        Some(&mut self.ef_states[client][li])
                    };
                    let bytes = self.pipeline.encode_layer(flat, round, client, li, ef)?;
                    client_bytes += bytes.len() as u64;
                    let (update, mask) = self.pipeline.decode_layer(&bytes)?;
                    client_updates.push(update);
                    client_masks.push(mask);
                }
            }
            self.ledger.record(round, client, client_bytes);
            updates.push(client_updates);
            masks.push(client_masks);
            weights.push(shard.len() as f64);
        }

        let aggregated = if self.cfg.per_coord_denominator {
            aggregate_updates_per_coord(&updates, &weights, &masks)
        } else {
            aggregate_updates(&updates, &weights)
        };
        self.model.apply_flat_updates(&aggregated, self.cfg.server_lr);

        let (accuracy, loss) = evaluate(&self.model, &self.test, &self.test_indices)?;
        Ok(RoundReport {
            round,
            selected,
            accuracy,
            loss,
            bytes_up: self.ledger.round_bytes(round),
            cumulative_bytes: self.ledger.total_bytes(),
            wall_ms: start.elapsed().as_millis() as u64,
        })
    }

    /// Runs all configured rounds. `rounds = 0` returns an empty trace and
    /// the untouched initial model.
    pub fn run(&mut self) -> Result<Vec<RoundReport>, SimError> {
        let mut reports = Vec::with_capacity(self.cfg.rounds);
        for t in 0..self.cfg.rounds {
            reports.push(self.run_round(t)?);
        }
        Ok(reports)
    }
}
