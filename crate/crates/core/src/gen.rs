//! Seeded random instance generation.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, ParseError};
use crate::Time;

/// Generates a random canonical PSSP instance: every partition gets one
/// operation per machine (in a random machine order), durations are uniform
/// in `durations`, and precedence edges are added independently with
/// probability `edge_density`, oriented from lower to higher rank in a random
/// topological order so the result is acyclic by construction. Density 0
/// yields an open-shop instance.
pub fn generate_instance(
    partitions: usize,
    machines: usize,
    durations: (Time, Time),
    edge_density: f64,
    seed: u64,
) -> Result<Instance, ParseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = durations;
    let num_ops = partitions * machines;

    let mut ops = Vec::with_capacity(num_ops);
    for partition in 0..partitions {
        let mut order: Vec<usize> = (0..machines).collect();
        order.shuffle(&mut rng);
        for machine in order {
            ops.push((machine, partition, rng.gen_range(lo..=hi)));
        }
    }

    let mut rank: Vec<usize> = (0..num_ops).collect();
    rank.shuffle(&mut rng);
    let mut edges = Vec::new();
    for a in 0..num_ops {
        for b in a + 1..num_ops {
            if rng.gen_bool(edge_density) {
                if rank[a] < rank[b] {
                    edges.push((a, b));
                } else {
                    edges.push((b, a));
                }
            }
        }
    }

    Instance::new(machines, partitions, ops, &edges)
}
