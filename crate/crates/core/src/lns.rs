//! Adaptive large neighborhood search: keep a random fraction of the
//! incumbent's disjunctive orientation fixed, re-solve the rest with a
//! best-first search under a strictly improving bound, repeat.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dp::DpState;
use crate::hybrid::initialize_csp;
use crate::instance::Instance;
use crate::precedence::PrecedenceSet;
use crate::search::{astar, SearchConfig};
use crate::solution::{SearchStats, Solution, SolveStatus, TraceRow};
use crate::{OpId, Time};

#[derive(Clone, Debug)]
pub struct LnsConfig {
    /// Initial fraction of the incumbent's orientation kept per restart.
    pub keep_fraction: f64,
    /// Reduction applied after `restart_threshold` fruitless restarts.
    pub reduction_step: f64,
    /// Below this the fraction resets to its initial value.
    pub keep_floor: f64,
    /// Consecutive fruitless restarts tolerated before reducing.
    pub restart_threshold: u32,
    pub seed: u64,
    pub time_limit: Option<Duration>,
}

impl Default for LnsConfig {
    fn default() -> Self {
        LnsConfig {
            keep_fraction: 0.70,
            reduction_step: 0.05,
            keep_floor: 0.20,
            restart_threshold: 100,
            seed: 0,
            time_limit: None,
        }
    }
}

/// One restart of the loop, for the per-restart trace.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartRecord {
    pub restart: u64,
    /// Fraction in effect when the subset was drawn.
    pub keep_fraction: f64,
    /// The precedence pairs kept fixed for this restart.
    pub kept: Vec<(OpId, OpId)>,
    /// Start times of the adopted solution, when the restart improved.
    pub adopted: Option<Vec<Time>>,
    pub incumbent: Time,
}

#[derive(Clone, Debug)]
pub struct LnsOutcome {
    pub solution: Solution,
    /// Set only when the root fixpoint refutes every strictly better bound.
    pub proven_optimal: bool,
    pub restarts: Vec<RestartRecord>,
}

/// The disjunctive-arc orientation induced by a schedule: for every machine
/// and every partition, consecutive operations in start-time order, minus
/// pairs already imposed by the instance edges. Always acyclic, since it is
/// induced by a total order on time.
pub fn incumbent_precedence_graph(inst: &Instance, sol: &Solution) -> PrecedenceSet {
    let mut pairs = std::collections::BTreeSet::new();
    let sets = (0..inst.machines())
        .map(|j| inst.machine_ops(j))
        .chain((0..inst.partitions()).map(|i| inst.partition_ops(i)));
    for set in sets {
        let mut ordered: Vec<OpId> = set.to_vec();
        ordered.sort_unstable_by_key(|&o| (sol.starts[o], o));
        for w in ordered.windows(2) {
            if !inst.edges().contains(w[0], w[1]) {
                pairs.insert((w[0], w[1]));
            }
        }
    }
    let pairs: Vec<(OpId, OpId)> = pairs.into_iter().collect();
    PrecedenceSet::from_pairs(inst.num_ops(), &pairs)
}

fn ceil_fraction(fraction: f64, len: usize) -> usize {
    ((fraction * len as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Uniform random subset of `ceil(fraction * len)` pairs, deterministic for
/// a given generator state.
pub fn select_subset_precedences(
    relaxable: &PrecedenceSet,
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<(OpId, OpId)> {
    let pairs = relaxable.pairs();
    let want = ceil_fraction(fraction, pairs.len()).min(pairs.len());
    let mut picked: Vec<usize> = (0..pairs.len()).collect();
    // partial Fisher-Yates: the first `want` slots end up uniform
    for i in 0..want {
        let j = rng.gen_range(i..pairs.len());
        picked.swap(i, j);
    }
    let mut chosen: Vec<(OpId, OpId)> = picked[..want].iter().map(|&i| pairs[i]).collect();
    chosen.sort_unstable();
    chosen
}

/// Runs the adaptive LNS loop from a valid initial solution. Each restart
/// first asks the propagation fixpoint whether any schedule can beat the
/// incumbent at all (failure proves optimality), then keeps a random subset
/// of the incumbent's orientation and re-solves the remainder exactly.
/// After `restart_threshold` consecutive fruitless restarts the kept
/// fraction drops by `reduction_step`, resetting to its initial value when
/// it falls below `keep_floor`.
pub fn lns_run(
    inst: &Instance,
    initial: &Solution,
    config: &LnsConfig,
    search: &SearchConfig,
) -> LnsOutcome {
    let deadline = config.time_limit.map(|limit| Instant::now() + limit);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best = initial.clone();
    // carry the initial search's counters so the work clock keeps running
    // and the final statistics cover the whole pipeline
    let mut stats = SearchStats {
        trace: Vec::new(),
        ..initial.stats.clone()
    };
    let mut trace = initial.stats.trace.clone();
    let lb_hint = trace.last().map(|row| row.lb).unwrap_or(0);
    let mut fraction = config.keep_fraction;
    let mut fruitless = 0u32;
    let mut proven_optimal = false;
    let mut restarts = Vec::new();
    let mut restart = 0u64;

    loop {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let target = best.makespan - 1;
        let root = DpState::root(inst);
        let mut csp = initialize_csp(inst, &root, target);
        stats.count_fixpoint();
        if csp.fixpoint().is_err() {
            proven_optimal = true;
            break;
        }

        let relaxable = incumbent_precedence_graph(inst, &best);
        let used_fraction = fraction;
        let kept_pairs = select_subset_precedences(&relaxable, used_fraction, &mut rng);
        let fixed = inst.edges().with_pairs(&kept_pairs);

        let sub_search = SearchConfig {
            time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
            ..search.clone()
        };
        let outcome = astar(inst, &fixed, target, &sub_search);
        let adopted = outcome.as_ref().map(|s| s.starts.clone());
        if let Some(sub) = outcome {
            debug_assert!(sub.makespan <= target);
            stats.absorb(&sub.stats);
            best = Solution::new(sub.starts, sub.makespan, SolveStatus::Feasible);
            trace.push(TraceRow {
                elapsed_ms: stats.elapsed_ms,
                lb: lb_hint.min(best.makespan),
                ub: best.makespan,
            });
            fruitless = 0;
        } else {
            fruitless += 1;
            if fruitless >= config.restart_threshold {
                fruitless = 0;
                fraction -= config.reduction_step;
                if fraction < config.keep_floor - 1e-9 {
                    fraction = config.keep_fraction;
                }
            }
        }
        restarts.push(RestartRecord {
            restart,
            keep_fraction: used_fraction,
            kept: kept_pairs,
            adopted,
            incumbent: best.makespan,
        });
        restart += 1;
    }

    let status = if proven_optimal {
        SolveStatus::Optimal
    } else {
        SolveStatus::Feasible
    };
    if proven_optimal {
        trace.push(TraceRow {
            elapsed_ms: stats.elapsed_ms,
            lb: best.makespan,
            ub: best.makespan,
        });
    }
    let mut solution = best;
    solution.status = status;
    stats.trace = trace;
    solution.stats = stats;
    LnsOutcome {
        solution,
        proven_optimal,
        restarts,
    }
}
