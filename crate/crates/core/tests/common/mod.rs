//! Shared helpers for the integration and acceptance suites: exhaustive
//! enumerations that serve as independent oracles for the search machinery.

// each test binary compiles its own copy and uses a different subset
#![allow(dead_code)]

use std::collections::HashMap;

use pssp::{DpState, Instance, OpSet, Time};

/// All complete start-time assignments reachable by scheduling any available
/// operation at its earliest feasible time, in every possible order. This
/// enumerates every semi-active schedule, without the transition filter.
pub fn enumerate_available_assignments(inst: &Instance) -> Vec<Vec<Time>> {
    let mut out = Vec::new();
    availability_dfs(inst, &DpState::root(inst), &mut out);
    out
}

fn availability_dfs(inst: &Instance, state: &DpState, out: &mut Vec<Vec<Time>>) {
    if state.is_complete(inst) {
        out.push(state.psi().to_vec());
        return;
    }
    for o in state.eligible(inst) {
        availability_dfs(inst, &state.transition(inst, o), out);
    }
}

/// All complete assignments reachable through the transition-dominance
/// filter, one entry per decision sequence (duplicates mean the filter
/// failed to make sequences unique).
pub fn enumerate_filtered_assignments(inst: &Instance) -> Vec<Vec<Time>> {
    let mut out = Vec::new();
    filtered_dfs(inst, &DpState::root(inst), &mut out);
    out
}

fn filtered_dfs(inst: &Instance, state: &DpState, out: &mut Vec<Vec<Time>>) {
    if state.is_complete(inst) {
        out.push(state.psi().to_vec());
        return;
    }
    for o in state.domain(inst) {
        filtered_dfs(inst, &state.transition(inst, o), out);
    }
}

/// Minimum completion makespan reachable from `state` through the transition
/// filter, with `prune` applied to every intermediate state (the root state
/// passed in is never pruned). Returns None when pruning cuts off every
/// completion.
type StateKey = (OpSet, Vec<Time>, Option<usize>);

pub fn filtered_optimum_from(
    inst: &Instance,
    state: &DpState,
    prune: &dyn Fn(&DpState) -> bool,
) -> Option<Time> {
    let mut memo: HashMap<StateKey, Option<Time>> = HashMap::new();
    fn go(
        inst: &Instance,
        state: &DpState,
        prune: &dyn Fn(&DpState) -> bool,
        memo: &mut HashMap<StateKey, Option<Time>>,
    ) -> Option<Time> {
        if state.is_complete(inst) {
            return Some(state.cmax());
        }
        let key = (
            state.done().clone(),
            state.psi().to_vec(),
            state.last_machine(),
        );
        if let Some(&cached) = memo.get(&key) {
            return cached;
        }
        let mut best: Option<Time> = None;
        for o in state.domain(inst) {
            let child = state.transition(inst, o);
            if prune(&child) {
                continue;
            }
            if let Some(value) = go(inst, &child, prune, memo) {
                best = Some(best.map_or(value, |b: Time| b.min(value)));
            }
        }
        memo.insert(key, best);
        best
    }
    go(inst, state, prune, &mut memo)
}

/// Minimum completion makespan reachable from `state` when any available
/// operation may be scheduled at its earliest feasible time (no transition
/// filter). Every semi-active extension of the state is covered.
pub fn available_optimum_from(inst: &Instance, state: &DpState) -> Time {
    let mut memo: HashMap<(OpSet, Vec<Time>), Time> = HashMap::new();
    fn go(
        inst: &Instance,
        state: &DpState,
        memo: &mut HashMap<(OpSet, Vec<Time>), Time>,
    ) -> Time {
        if state.is_complete(inst) {
            return state.cmax();
        }
        let key = (state.done().clone(), state.psi().to_vec());
        if let Some(&cached) = memo.get(&key) {
            return cached;
        }
        let mut best = Time::MAX;
        for o in state.eligible(inst) {
            best = best.min(go(inst, &state.transition(inst, o), memo));
        }
        memo.insert(key, best);
        best
    }
    go(inst, state, &mut memo)
}

/// Every feasible integral schedule of the instance with makespan <= `ub`,
/// found by depth-first assignment of start times with pairwise-consistency
/// pruning. Start times of operations listed in `pinned` are forced.
pub fn enumerate_feasible_schedules(
    inst: &Instance,
    ub: Time,
    pinned: &[(usize, Time)],
) -> Vec<Vec<Time>> {
    let mut starts = vec![-1i64; inst.num_ops()];
    let mut out = Vec::new();
    schedule_dfs(inst, ub, pinned, 0, &mut starts, &mut out);
    out
}

fn consistent(inst: &Instance, starts: &[Time], o: usize, s: Time) -> bool {
    let end = s + inst.duration(o);
    for other in 0..inst.num_ops() {
        if other == o || starts[other] < 0 {
            continue;
        }
        let other_end = starts[other] + inst.duration(other);
        let shares = inst.op(o).machine == inst.op(other).machine
            || inst.op(o).partition == inst.op(other).partition;
        if shares && s < other_end && starts[other] < end {
            return false;
        }
        if inst.edges().contains(o, other) && end > starts[other] {
            return false;
        }
        if inst.edges().contains(other, o) && other_end > s {
            return false;
        }
    }
    true
}

fn schedule_dfs(
    inst: &Instance,
    ub: Time,
    pinned: &[(usize, Time)],
    o: usize,
    starts: &mut Vec<Time>,
    out: &mut Vec<Vec<Time>>,
) {
    if o == inst.num_ops() {
        out.push(starts.clone());
        return;
    }
    let range: Vec<Time> = match pinned.iter().find(|&&(p, _)| p == o) {
        Some(&(_, s)) => vec![s],
        None => (0..=ub - inst.duration(o)).collect(),
    };
    for s in range {
        if consistent(inst, starts, o, s) {
            starts[o] = s;
            schedule_dfs(inst, ub, pinned, o + 1, starts, out);
            starts[o] = -1;
        }
    }
}

/// Small instance corpus builder shared by the suites: canonical instances
/// with the given shapes, duration range 1..=5 and the listed edge
/// densities, seeds taken from `seed_base`.
pub fn corpus(shapes: &[(usize, usize)], densities: &[f64], per_combo: u64, seed_base: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = seed_base;
    for &(n, m) in shapes {
        for &density in densities {
            for _ in 0..per_combo {
                out.push(pssp::generate_instance(n, m, (1, 5), density, seed).unwrap());
                seed += 1;
            }
        }
    }
    out
}

/// A random job-shop-shaped instance: the generator's machine layout with
/// each partition chained in listed order.
pub fn jsp_shaped(partitions: usize, machines: usize, seed: u64) -> Instance {
    let base = pssp::generate_instance(partitions, machines, (1, 5), 0.0, seed).unwrap();
    let ops: Vec<(usize, usize, Time)> = base
        .ops()
        .iter()
        .map(|o| (o.machine, o.partition, o.duration))
        .collect();
    let mut edges = Vec::new();
    for p in 0..partitions {
        for w in base.partition_ops(p).windows(2) {
            edges.push((w[0], w[1]));
        }
    }
    Instance::new(machines, partitions, ops, &edges).unwrap()
}
