//! Anytime column search over the DP state graph, best-first search for
//! fixed-precedence subproblems, and the dominance map shared by both.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::dp::{jps_lower_bound, DpState, OpSet};
use crate::hybrid::{lower_bound_cp, transition_cp};
use crate::instance::{horizon, Instance};
use crate::precedence::PrecedenceSet;
use crate::solution::{SearchStats, Solution, SolveStatus, TraceRow};
use crate::Time;

/// Which ingredients the search uses: the plain DP with the Jackson bound,
/// propagation-checked transitions with the Jackson bound, or propagation in
/// both the transition and the lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    DpJps,
    DpCpJps,
    DpCp,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::DpJps => "dp-jps",
            Model::DpCpJps => "dp-cp-jps",
            Model::DpCp => "dp-cp",
        }
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dp-jps" => Ok(Model::DpJps),
            "dp-cp-jps" => Ok(Model::DpCpJps),
            "dp-cp" => Ok(Model::DpCp),
            other => Err(format!(
                "unknown model {other:?}, expected dp-jps, dp-cp-jps or dp-cp"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub model: Model,
    /// States expanded per layer per sweep.
    pub width: usize,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    /// Stop as soon as the first improving complete schedule is found.
    pub first_solution: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            model: Model::DpCp,
            width: 5,
            time_limit: None,
            seed: 0,
            first_solution: false,
        }
    }
}

/// Stores every non-dominated state seen so far, keyed by the scheduled set.
/// States stay in the map after being expanded, so later duplicates are
/// still rejected.
#[derive(Debug, Default)]
pub struct DominanceMap {
    entries: HashMap<OpSet, Vec<DpState>>,
}

impl DominanceMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the state is machine-dominated, cannot be extended
    /// at all, or is dominated by a stored state; otherwise stores it
    /// (evicting anything it dominates) and returns true.
    ///
    /// Dead ends (incomplete states whose expansion domain is empty) must
    /// not enter the map: they have no completions, so letting them shadow
    /// extendable states with the same scheduled set could cut off every
    /// route to an optimum. On job-shop-like instances the machine rule
    /// already rejects them; this keeps the guarantee for free partitions.
    pub fn is_not_dominated(&mut self, inst: &Instance, state: &DpState) -> bool {
        if state.machine_dominated(inst) {
            return false;
        }
        if state.domain(inst).is_empty() && !state.is_complete(inst) {
            return false;
        }
        let entry = self.entries.entry(state.dominance_key()).or_default();
        if entry.iter().any(|stored| stored.dominates(inst, state)) {
            return false;
        }
        entry.retain(|stored| !state.dominates(inst, stored));
        entry.push(state.clone());
        true
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

struct QueueEntry {
    f: Time,
    depth: usize,
    seq: u64,
    state: DpState,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: smallest f first, deeper states break
        // ties, then insertion order
        other
            .f
            .cmp(&self.f)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn deadline_of(config: &SearchConfig) -> Option<Instant> {
    config.time_limit.map(|limit| Instant::now() + limit)
}

fn expired(deadline: &Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

fn apply_transition(
    inst: &Instance,
    state: &DpState,
    o: crate::OpId,
    ub: Time,
    model: Model,
    stats: &mut SearchStats,
) -> Option<DpState> {
    match model {
        Model::DpJps => Some(state.transition(inst, o)),
        Model::DpCpJps | Model::DpCp => transition_cp(inst, state, o, ub, stats),
    }
}

fn bound_of(
    inst: &Instance,
    state: &DpState,
    ub: Time,
    model: Model,
    stats: &mut SearchStats,
) -> Time {
    if state.is_complete(inst) {
        return state.cmax();
    }
    match model {
        Model::DpJps | Model::DpCpJps => jps_lower_bound(inst, state, ub),
        Model::DpCp => lower_bound_cp(inst, state, ub, stats),
    }
}

/// The trivial all-in-a-row schedule: operations run back to back in a
/// topological order of E. Feasible by construction with makespan equal to
/// the horizon, it materializes the initial upper bound as a real incumbent.
fn sequential_solution(inst: &Instance) -> Solution {
    let order = inst.edges().topo_order().expect("instance edges form a DAG");
    let mut starts = vec![0; inst.num_ops()];
    let mut t = 0;
    for &o in &order {
        starts[o] = t;
        t += inst.duration(o);
    }
    Solution::new(starts, t, SolveStatus::Feasible)
}

fn frontier_min(queues: &[BinaryHeap<QueueEntry>]) -> Option<Time> {
    queues.iter().filter_map(|q| q.peek().map(|e| e.f)).min()
}

struct AcsSession {
    stats: SearchStats,
    trace: Vec<TraceRow>,
    seq: u64,
    reported_lb: Time,
}

impl AcsSession {
    fn push(&mut self, queues: &mut [BinaryHeap<QueueEntry>], state: DpState, f: Time) {
        let depth = state.done_len();
        self.seq += 1;
        queues[depth].push(QueueEntry {
            f,
            depth,
            seq: self.seq,
            state,
        });
    }

    fn record(&mut self, queues: &[BinaryHeap<QueueEntry>], ub: Time) {
        let lb = frontier_min(queues).unwrap_or(ub).min(ub);
        self.reported_lb = self.reported_lb.max(lb);
        self.trace.push(TraceRow {
            elapsed_ms: self.stats.elapsed_ms,
            lb: self.reported_lb,
            ub,
        });
    }
}

/// Anytime column search: per sweep, each layer dequeues up to `width`
/// non-dominated states whose bound still beats the incumbent and expands
/// them into the next layer; complete states update the incumbent. Runs
/// until every queue is empty (optimality proven) or the time limit hits.
pub fn acs(inst: &Instance, config: &SearchConfig) -> Solution {
    let deadline = deadline_of(config);
    let width = config.width.max(1);
    let n = inst.num_ops();
    let mut session = AcsSession {
        stats: SearchStats::default(),
        trace: Vec::new(),
        seq: 0,
        reported_lb: 0,
    };
    let mut incumbent = sequential_solution(inst);
    let mut ub = incumbent.makespan;
    debug_assert_eq!(ub, horizon(inst));

    let mut queues: Vec<BinaryHeap<QueueEntry>> = (0..=n).map(|_| BinaryHeap::new()).collect();
    let mut map = DominanceMap::new();

    let root = DpState::root(inst);
    let root_bound = bound_of(inst, &root, ub, config.model, &mut session.stats);
    session.reported_lb = root_bound.min(ub);
    session.trace.push(TraceRow {
        elapsed_ms: session.stats.elapsed_ms,
        lb: session.reported_lb,
        ub,
    });

    for o in root.domain(inst) {
        if let Some(child) = apply_transition(inst, &root, o, ub, config.model, &mut session.stats)
        {
            let f = bound_of(inst, &child, ub, config.model, &mut session.stats);
            session.push(&mut queues, child, f);
        }
    }

    let status = 'search: loop {
        if queues.iter().all(BinaryHeap::is_empty) {
            break SolveStatus::Optimal;
        }
        for layer in 1..n {
            if expired(&deadline) {
                break 'search SolveStatus::Feasible;
            }
            let mut candidates = Vec::new();
            while candidates.len() < width {
                let Some(entry) = queues[layer].pop() else {
                    break;
                };
                session.stats.tick();
                if map.is_not_dominated(inst, &entry.state) && entry.f < ub {
                    session.stats.nodes_explored += 1;
                    candidates.push(entry.state);
                }
            }
            for state in candidates {
                if expired(&deadline) {
                    break 'search SolveStatus::Feasible;
                }
                for o in state.domain(inst) {
                    if let Some(child) =
                        apply_transition(inst, &state, o, ub, config.model, &mut session.stats)
                    {
                        let f = bound_of(inst, &child, ub, config.model, &mut session.stats);
                        session.push(&mut queues, child, f);
                    }
                }
            }
        }
        while let Some(entry) = queues[n].pop() {
            session.stats.tick();
            session.stats.nodes_explored += 1;
            if entry.state.cmax() < ub {
                ub = entry.state.cmax();
                incumbent = Solution::new(entry.state.psi().to_vec(), ub, SolveStatus::Feasible);
                session.record(&queues, ub);
                if config.first_solution {
                    break 'search SolveStatus::Feasible;
                }
            }
        }
    };

    // on early exits some dequeued states were dropped unexpanded, so a
    // fresh frontier minimum could overclaim; reuse the last sound bound
    let final_lb = match status {
        SolveStatus::Optimal => ub,
        _ => session.reported_lb.min(ub),
    };
    // matching bounds are a proof even when the queues are not exhausted
    let status = if final_lb == ub {
        SolveStatus::Optimal
    } else {
        status
    };
    let final_row = TraceRow {
        elapsed_ms: session.stats.elapsed_ms,
        lb: final_lb,
        ub,
    };
    if session.trace.last() != Some(&final_row) {
        session.trace.push(final_row);
    }

    incumbent.status = status;
    incumbent.makespan = ub;
    incumbent.stats = session.stats;
    incumbent.stats.trace = session.trace;
    incumbent
}

/// Best-first search over the DP state graph with an extended initial
/// precedence relation and an inclusive makespan bound. The first complete
/// state popped is optimal for the subproblem; returns None when no schedule
/// meets the bound (or the time limit expires first).
pub fn astar(
    inst: &Instance,
    fixed: &PrecedenceSet,
    ub: Time,
    config: &SearchConfig,
) -> Option<Solution> {
    let deadline = deadline_of(config);
    let mut stats = SearchStats::default();
    let mut map = DominanceMap::new();
    let mut heap: BinaryHeap<QueueEntry> = BinaryHeap::new();
    let mut seq = 0u64;

    let root = DpState::root_with(inst, fixed.clone());
    let f = bound_of(inst, &root, ub, config.model, &mut stats);
    if f > ub {
        return None;
    }
    heap.push(QueueEntry {
        f,
        depth: 0,
        seq,
        state: root,
    });

    while let Some(entry) = heap.pop() {
        stats.tick();
        if expired(&deadline) {
            return None;
        }
        if entry.f > ub {
            return None;
        }
        if entry.state.is_complete(inst) {
            stats.nodes_explored += 1;
            let mut sol = Solution::new(
                entry.state.psi().to_vec(),
                entry.state.cmax(),
                SolveStatus::Optimal,
            );
            sol.stats = stats;
            return Some(sol);
        }
        if !map.is_not_dominated(inst, &entry.state) {
            continue;
        }
        stats.nodes_explored += 1;
        for o in entry.state.domain(inst) {
            if let Some(child) =
                apply_transition(inst, &entry.state, o, ub, config.model, &mut stats)
            {
                let f = bound_of(inst, &child, ub, config.model, &mut stats);
                if f <= ub {
                    seq += 1;
                    heap.push(QueueEntry {
                        f,
                        depth: child.done_len(),
                        seq,
                        state: child,
                    });
                }
            }
        }
    }
    None
}
