//! Glue between the DP state space and the propagation engine: building a
//! propagation session from a state, the propagation-checked transition, and
//! the dichotomic propagation-based lower bound.

use crate::cp::{Csp, IntervalVar};
use crate::dp::{jps_lower_bound, DpState};
use crate::instance::Instance;
use crate::solution::SearchStats;
use crate::{OpId, Time};

/// Builds the propagation session for a state under an inclusive makespan
/// bound `ub`. Scheduled operations are pinned to their start times; the
/// transition-eligible ones start no earlier than their state start; the
/// remaining available ones can only run after the current makespan; every
/// unscheduled operation must end by `ub`. Constraints are the state's known
/// precedences plus one disjunctive set per machine and per partition.
pub fn initialize_csp(inst: &Instance, state: &DpState, ub: Time) -> Csp {
    let intervals: Vec<IntervalVar> = (0..inst.num_ops())
        .map(|o| {
            let duration = inst.duration(o);
            if state.done().contains(o) {
                IntervalVar::fixed(state.start_of(o), duration)
            } else if state.is_extending(inst, o) {
                IntervalVar::new(state.start_of(o), ub, duration)
            } else if state.is_eligible(inst, o) {
                IntervalVar::new(state.cmax(), ub, duration)
            } else {
                // not yet available: the state start already reflects all
                // committed work, which is a sound earliest start
                IntervalVar::new(state.start_of(o), ub, duration)
            }
        })
        .collect();
    let machine_sets = (0..inst.machines())
        .map(|j| inst.machine_ops(j).to_vec())
        .collect();
    let partition_sets = (0..inst.partitions())
        .map(|i| inst.partition_ops(i).to_vec())
        .collect();
    Csp::new(intervals, state.delta().pairs(), machine_sets, partition_sets)
}

/// Propagation-checked transition: schedules `o`, runs the fixpoint under
/// `ub`, and returns `None` when propagation proves that no completion of
/// the new state meets the bound. On success, precedences detected from the
/// propagated windows are added to the returned state's relation. The state
/// start times are deliberately not tightened from the windows, so the
/// transition and state dominance rules stay valid.
pub fn transition_cp(
    inst: &Instance,
    state: &DpState,
    o: OpId,
    ub: Time,
    stats: &mut SearchStats,
) -> Option<DpState> {
    let next = state.transition(inst, o);
    let mut csp = initialize_csp(inst, &next, ub);
    stats.count_fixpoint();
    if csp.fixpoint().is_err() {
        return None;
    }
    let pairs = csp.detected_precedence_pairs();
    if pairs.is_empty() {
        Some(next)
    } else {
        let extended = next.with_added_precedences(&pairs);
        debug_assert!(extended.delta().is_acyclic());
        Some(extended)
    }
}

/// Dichotomic propagation-based lower bound, seeded with the Jackson
/// preemptive bound: each failing fixpoint at a tentative makespan proves
/// one more unit, each succeeding one halves the interval from above. Never
/// returns less than the Jackson bound and never exceeds the best completion
/// reachable from the state.
pub fn lower_bound_cp(inst: &Instance, state: &DpState, ub: Time, stats: &mut SearchStats) -> Time {
    let mut lb = jps_lower_bound(inst, state, ub);
    let mut ub = ub;
    while lb < ub {
        let mid = (lb + ub) / 2;
        let mut csp = initialize_csp(inst, state, mid);
        stats.count_fixpoint();
        if csp.fixpoint().is_err() {
            lb = mid + 1;
        } else {
            ub = mid;
        }
    }
    lb
}
