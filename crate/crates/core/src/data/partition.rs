//! IID and label-skewed client partitioning.

use rand::Rng;

use super::{DataError, Dataset};
use crate::rng::{rng_from, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    Iid,
    /// Sort by label, cut into `2m` shards, hand each client two shards.
    /// Every client sees at most two classes when class blocks align with
    /// shard boundaries (balanced classes with shard size dividing them).
    NonIid,
}

/// Client shards: disjoint index lists whose union covers the dataset.
#[derive(Debug, Clone)]
pub struct Partition {
    pub mode: PartitionMode,
    shards: Vec<Vec<u32>>,
}

impl Partition {
    pub fn shard(&self, client: usize) -> &[u32] {
        &self.shards[client]
    }

    pub fn clients(&self) -> usize {
        self.shards.len()
    }
}

fn seeded_shuffle<T>(items: &mut [T], seed_parts: &[u64]) {
    let mut rng = rng_from(seed_parts);
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

fn near_equal_chunks(indices: &[u32], parts: usize) -> Vec<Vec<u32>> {
    let n = indices.len();
    let base = n / parts;
    let extra = n % parts;
    let mut out = Vec::with_capacity(parts);
    let mut at = 0usize;
    for p in 0..parts {
        let size = base + usize::from(p < extra);
        out.push(indices[at..at + size].to_vec());
        at += size;
    }
    out
}

pub fn partition(
    dataset: &Dataset,
    clients: usize,
    mode: PartitionMode,
    seed: u64,
) -> Result<Partition, DataError> {
    let n = dataset.len();
    if clients == 0 || clients > n {
        return Err(DataError::TooManyClients { clients, examples: n });
    }
    let shards = match mode {
        PartitionMode::Iid => {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            seeded_shuffle(&mut idx, &[seed, tag::DATA, 10]);
            near_equal_chunks(&idx, clients)
        }
        PartitionMode::NonIid => {
            if 2 * clients > n {
                return Err(DataError::TooManyClients { clients, examples: n });
            }
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by_key(|&i| dataset.label(i as usize));
            let shards = near_equal_chunks(&idx, 2 * clients);
            let mut order: Vec<usize> = (0..2 * clients).collect();
            seeded_shuffle(&mut order, &[seed, tag::DATA, 11]);
            (0..clients)
                .map(|c| {
                    let mut s = shards[order[2 * c]].clone();
                    s.extend_from_slice(&shards[order[2 * c + 1]]);
                    s
                })
                .collect()
        }
    };
    Ok(Partition { mode, shards })
}
