//! The dynamic-programming state space: states over scheduled-operation sets,
//! transition and state dominance, earliest-start maintenance and the Jackson
//! preemptive one-machine lower bound.

use std::sync::Arc;

use crate::instance::Instance;
use crate::precedence::PrecedenceSet;
use crate::{OpId, Time};

/// Compact set of operation ids, used for the scheduled set and as the
/// dominance key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpSet {
    words: Vec<u64>,
    len: usize,
}

impl OpSet {
    pub fn new(capacity: usize) -> Self {
        OpSet {
            words: vec![0; capacity.div_ceil(64)],
            len: 0,
        }
    }

    pub fn insert(&mut self, o: OpId) -> bool {
        let (w, b) = (o / 64, o % 64);
        let mask = 1u64 << b;
        if self.words[w] & mask == 0 {
            self.words[w] |= mask;
            self.len += 1;
            true
        } else {
            false
        }
    }

    pub fn contains(&self, o: OpId) -> bool {
        self.words[o / 64] & (1u64 << (o % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = OpId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter_map(move |b| {
                if w & (1u64 << b) != 0 {
                    Some(wi * 64 + b)
                } else {
                    None
                }
            })
        })
    }
}

/// A DP state: fixed start times for scheduled operations, earliest possible
/// start times for the rest, the machine of the last scheduled operation, the
/// currently known precedence relation and the cached partial makespan.
///
/// States are immutable values; transitions produce fresh states.
#[derive(Clone, Debug)]
pub struct DpState {
    psi: Vec<Time>,
    last_machine: Option<usize>,
    done: OpSet,
    delta: Arc<PrecedenceSet>,
    cmax: Time,
}

impl DpState {
    /// Root state: all starts at zero, nothing scheduled, precedences = E.
    pub fn root(inst: &Instance) -> Self {
        Self::root_with(inst, inst.edges().clone())
    }

    /// Root state with an extended initial precedence relation (must contain
    /// the instance edges and be acyclic). Start times begin at zero; they
    /// are pushed forward as decisions are committed.
    pub fn root_with(inst: &Instance, precedences: PrecedenceSet) -> Self {
        debug_assert!(precedences.is_acyclic());
        let n = inst.num_ops();
        DpState {
            psi: vec![0; n],
            last_machine: None,
            done: OpSet::new(n),
            delta: Arc::new(precedences),
            cmax: 0,
        }
    }

    pub fn psi(&self) -> &[Time] {
        &self.psi
    }

    pub fn start_of(&self, o: OpId) -> Time {
        self.psi[o]
    }

    pub fn last_machine(&self) -> Option<usize> {
        self.last_machine
    }

    pub fn done(&self) -> &OpSet {
        &self.done
    }

    pub fn done_len(&self) -> usize {
        self.done.len()
    }

    pub fn is_complete(&self, inst: &Instance) -> bool {
        self.done.len() == inst.num_ops()
    }

    pub fn delta(&self) -> &PrecedenceSet {
        &self.delta
    }

    pub fn cmax(&self) -> Time {
        self.cmax
    }

    /// True iff `o` is unscheduled and all its predecessors in the original
    /// graph E are scheduled.
    pub fn is_eligible(&self, inst: &Instance, o: OpId) -> bool {
        !self.done.contains(o)
            && inst
                .edges()
                .preds_of(o)
                .iter()
                .all(|&p| self.done.contains(p))
    }

    /// The available operations (those whose E-predecessors are scheduled).
    pub fn eligible(&self, inst: &Instance) -> Vec<OpId> {
        (0..inst.num_ops())
            .filter(|&o| self.is_eligible(inst, o))
            .collect()
    }

    /// Transition-dominance filter: an available operation may extend the
    /// partial schedule only if it pushes the makespan, or ties with it on a
    /// machine with a larger index than the last scheduled one. This makes
    /// every complete schedule reachable by exactly one decision sequence.
    pub fn is_extending(&self, inst: &Instance, o: OpId) -> bool {
        if !self.is_eligible(inst, o) {
            return false;
        }
        let completion = self.psi[o] + inst.duration(o);
        completion > self.cmax
            || (completion == self.cmax
                && match self.last_machine {
                    Some(l) => inst.op(o).machine > l,
                    None => true,
                })
    }

    /// The available operations that pass the transition-dominance filter.
    pub fn extending(&self, inst: &Instance) -> Vec<OpId> {
        (0..inst.num_ops())
            .filter(|&o| self.is_extending(inst, o))
            .collect()
    }

    /// The expansion domain: extending operations whose predecessors in the
    /// full known relation (including learned precedences) are scheduled.
    /// With no learned precedences this equals the extending set.
    pub fn domain(&self, inst: &Instance) -> Vec<OpId> {
        (0..inst.num_ops())
            .filter(|&o| {
                self.is_extending(inst, o)
                    && self
                        .delta
                        .preds_of(o)
                        .iter()
                        .all(|&p| self.done.contains(p))
            })
            .collect()
    }

    /// Earliest-start update after committing `o` at `psi[o]`: every
    /// unscheduled operation sharing `o`'s machine or partition moves past
    /// `o`'s completion, and increases cascade through E-successors until a
    /// fixpoint. The result is pointwise >= the current vector.
    fn updated_psi(&self, inst: &Instance, o: OpId) -> Vec<Time> {
        let mut psi = self.psi.clone();
        let completion = psi[o] + inst.duration(o);
        let op = inst.op(o);
        let mut work: Vec<OpId> = vec![o];
        for &peer in inst
            .machine_ops(op.machine)
            .iter()
            .chain(inst.partition_ops(op.partition))
        {
            if peer != o && !self.done.contains(peer) && psi[peer] < completion {
                psi[peer] = completion;
                work.push(peer);
            }
        }
        while let Some(u) = work.pop() {
            let end = psi[u] + inst.duration(u);
            for &v in inst.edges().succs_of(u) {
                debug_assert!(!self.done.contains(v));
                if psi[v] < end {
                    psi[v] = end;
                    work.push(v);
                }
            }
        }
        psi
    }

    /// Schedules `o` at its current earliest start, returning the new state.
    /// The known precedence relation is carried over unchanged.
    pub fn transition(&self, inst: &Instance, o: OpId) -> DpState {
        debug_assert!(self.is_eligible(inst, o));
        let psi = self.updated_psi(inst, o);
        let mut done = self.done.clone();
        done.insert(o);
        DpState {
            cmax: self.cmax.max(self.psi[o] + inst.duration(o)),
            last_machine: Some(inst.op(o).machine),
            done,
            psi,
            delta: Arc::clone(&self.delta),
        }
    }

    /// Incremental makespan increase caused by scheduling `o`.
    pub fn transition_cost(&self, inst: &Instance, o: OpId) -> Time {
        (self.psi[o] + inst.duration(o) - self.cmax).max(0)
    }

    /// State with additional learned precedences.
    pub fn with_added_precedences(&self, pairs: &[(OpId, OpId)]) -> DpState {
        let mut next = self.clone();
        next.delta = Arc::new(self.delta.with_pairs(pairs));
        next
    }

    /// Earliest completion time of available operation `o` when the schedule
    /// continues from this state: its own completion if it may extend the
    /// schedule now, otherwise it can only run after the current makespan.
    pub fn earliest_completion(&self, inst: &Instance, o: OpId) -> Time {
        debug_assert!(self.is_eligible(inst, o));
        if self.is_extending(inst, o) {
            self.psi[o] + inst.duration(o)
        } else {
            self.cmax + inst.duration(o)
        }
    }

    /// State dominance: same scheduled set and pointwise smaller-or-equal
    /// earliest completions over the available operations.
    pub fn dominates(&self, inst: &Instance, other: &DpState) -> bool {
        if self.done != other.done {
            return false;
        }
        (0..inst.num_ops())
            .filter(|&o| self.is_eligible(inst, o))
            .all(|o| self.earliest_completion(inst, o) <= other.earliest_completion(inst, o))
    }

    /// Machine-based state elimination: the state is dominated when some
    /// machine has available work, but the transition-dominance filter blocks
    /// every available operation on it (each would finish at or before the
    /// current makespan). Those operations should have been scheduled at
    /// their earliest start in a sibling state, so this state is discarded.
    ///
    /// The rule is only valid when the partition no-overlap constraints are
    /// implied by the precedence DAG (job-shop-like instances). With free
    /// partition disjunctions, a blocked operation may legitimately have to
    /// wait for an unscheduled partition mate, so the rule stays off there.
    pub fn machine_dominated(&self, inst: &Instance) -> bool {
        if !inst.partitions_totally_ordered() {
            return false;
        }
        for machine in 0..inst.machines() {
            let mut has_available = false;
            let mut all_blocked = true;
            for &o in inst.machine_ops(machine) {
                if !self.is_eligible(inst, o) {
                    continue;
                }
                has_available = true;
                if self.is_extending(inst, o) {
                    all_blocked = false;
                    break;
                }
            }
            if has_available && all_blocked {
                return true;
            }
        }
        false
    }

    /// Canonical dominance key: the scheduled set.
    pub fn dominance_key(&self) -> OpSet {
        self.done.clone()
    }
}

/// Latest completion times w.r.t. the state's precedence relation: backward
/// pass from `ub` in reverse topological order.
pub fn compute_lct(inst: &Instance, state: &DpState, ub: Time) -> Vec<Time> {
    let order = state
        .delta()
        .topo_order()
        .expect("state precedences must stay acyclic");
    let mut lct = vec![ub; inst.num_ops()];
    for &o in order.iter().rev() {
        for &s in state.delta().succs_of(o) {
            lct[o] = lct[o].min(lct[s] - inst.duration(s));
        }
    }
    lct
}

/// Jackson preemptive schedule bound: per machine, simulate the preemptive
/// earliest-deadline-first run of its unscheduled operations with release
/// dates `psi` and deadlines from [`compute_lct`]; the makespan of any
/// completion of the state is at least the largest per-machine completion.
pub fn jps_lower_bound(inst: &Instance, state: &DpState, ub: Time) -> Time {
    let lct = compute_lct(inst, state, ub);
    let mut bound = state.cmax();
    for machine in 0..inst.machines() {
        let mut jobs: Vec<(Time, Time, Time, OpId)> = inst
            .machine_ops(machine)
            .iter()
            .filter(|&&o| !state.done().contains(o))
            .map(|&o| (state.start_of(o), inst.duration(o), lct[o], o))
            .collect();
        if jobs.is_empty() {
            continue;
        }
        jobs.sort_unstable_by_key(|&(head, _, _, id)| (head, id));
        bound = bound.max(preemptive_completion(&jobs));
    }
    bound
}

/// Completion time of the preemptive EDD run over `(head, duration, deadline,
/// id)` jobs sorted by head. Ties on deadlines break toward the lower id.
fn preemptive_completion(jobs: &[(Time, Time, Time, OpId)]) -> Time {
    let mut ready: Vec<(Time, OpId, Time)> = Vec::new(); // (deadline, id, remaining)
    let mut next = 0;
    let mut t = jobs[0].0;
    loop {
        while next < jobs.len() && jobs[next].0 <= t {
            let (_, dur, deadline, id) = jobs[next];
            ready.push((deadline, id, dur));
            next += 1;
        }
        if ready.is_empty() {
            if next == jobs.len() {
                return t;
            }
            t = jobs[next].0;
            continue;
        }
        ready.sort_unstable_by_key(|&(deadline, id, _)| (deadline, id));
        let (deadline, id, remaining) = ready.remove(0);
        let finish = t + remaining;
        let horizon = if next < jobs.len() {
            jobs[next].0.min(finish)
        } else {
            finish
        };
        if horizon < finish {
            ready.push((deadline, id, finish - horizon));
        }
        t = horizon;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{parse_jsp_standard, parse_osp_gueret_prins};
    use crate::Instance;

    const TABLE1: &str = "3 3\n0 3 1 2 2 2\n0 2 2 1 1 4\n1 4 2 3 0 1\n";

    fn table1() -> Instance {
        parse_jsp_standard(TABLE1).unwrap()
    }

    fn advance(inst: &Instance, ops: &[OpId]) -> DpState {
        let mut state = DpState::root(inst);
        for &o in ops {
            assert!(
                state.is_extending(inst, o),
                "op {o} must pass the transition filter"
            );
            state = state.transition(inst, o);
        }
        state
    }

    #[test]
    fn eligible_at_root_is_chain_heads() {
        let inst = table1();
        let root = DpState::root(&inst);
        assert_eq!(root.eligible(&inst), vec![0, 3, 6]);
        // all durations positive: nothing is filtered at the root
        assert_eq!(root.extending(&inst), vec![0, 3, 6]);
    }

    #[test]
    fn eligible_empty_when_complete() {
        let inst = parse_jsp_standard("1 1\n0 5\n").unwrap();
        let state = DpState::root(&inst).transition(&inst, 0);
        assert!(state.eligible(&inst).is_empty());
        assert!(state.is_complete(&inst));
        assert_eq!(state.cmax(), 5);
    }

    #[test]
    fn state_after_two_decisions_matches_hand_computation() {
        // schedule op 3 (machine 0) then op 6 (machine 1), both at time 0
        let inst = table1();
        let state = advance(&inst, &[3, 6]);
        assert_eq!(state.cmax(), 4);
        assert_eq!(state.last_machine(), Some(1));
        assert_eq!(state.psi()[0], 2); // machine 0 freed at 2
        assert_eq!(state.psi()[4], 2); // successor of op 3
        assert_eq!(state.psi()[7], 4); // successor of op 6
        assert_eq!(state.eligible(&inst), vec![0, 4, 7]);
        // op 4 completes at 3 < cmax 4, so it is filtered
        assert_eq!(state.extending(&inst), vec![0, 7]);
    }

    #[test]
    fn tie_break_keeps_higher_machine() {
        // ops 3, 4, 6, 0, 1 reach the state where op 7 ties with cmax = 7
        let inst = table1();
        let state = advance(&inst, &[3, 4, 6, 0, 1]);
        assert_eq!(state.cmax(), 7);
        assert_eq!(state.last_machine(), Some(1));
        assert_eq!(state.eligible(&inst), vec![2, 5, 7]);
        assert_eq!(state.psi()[7] + inst.duration(7), 7);
        // machine 2 > last machine 1: the tie survives the filter
        assert_eq!(state.extending(&inst), vec![2, 5, 7]);
        assert_eq!(state.transition_cost(&inst, 7), 0);
    }

    #[test]
    fn domain_respects_learned_precedences() {
        let inst = table1();
        let state = advance(&inst, &[3, 6]);
        assert_eq!(state.domain(&inst), state.extending(&inst));
        // learning (4, 7) blocks op 7 while op 4 is unscheduled
        let learned = state.with_added_precedences(&[(4, 7)]);
        assert_eq!(learned.domain(&inst), vec![0]);
    }

    #[test]
    fn domain_single_remaining_op() {
        let inst = parse_jsp_standard("1 2\n0 1 1 2\n").unwrap();
        let state = DpState::root(&inst).transition(&inst, 0);
        assert_eq!(state.domain(&inst), vec![1]);
    }

    #[test]
    fn update_est_from_root_decision() {
        let inst = table1();
        let root = DpState::root(&inst);
        let state = root.transition(&inst, 0);
        // partition peers of op 0 move to 3, then the chain pushes op 2 to 5;
        // machine peers 3 and 8 move to 3, and op 3's chain cascades
        assert_eq!(state.psi(), &[0, 3, 5, 3, 5, 6, 0, 0, 3]);
        assert_eq!(state.cmax(), 3);
        assert_eq!(state.last_machine(), Some(0));
    }

    #[test]
    fn update_est_pure_chain() {
        // chain a -> b -> c on distinct machines
        let inst = parse_jsp_standard("1 3\n0 2 1 3 2 4\n").unwrap();
        let state = DpState::root(&inst).transition(&inst, 0);
        assert_eq!(state.psi(), &[0, 2, 5]);
    }

    #[test]
    fn update_est_isolated_op() {
        // two independent partitions on two machines: scheduling one leaves
        // the unrelated operation untouched
        let inst = Instance::new(2, 2, vec![(0, 0, 3), (1, 0, 1), (1, 1, 2), (0, 1, 2)], &[])
            .unwrap();
        let state = DpState::root(&inst).transition(&inst, 2);
        assert_eq!(state.psi()[0], 0);
        assert_eq!(state.psi()[1], 2); // same machine as op 2
        assert_eq!(state.psi()[3], 2); // same partition as op 2
    }

    #[test]
    fn root_transition_cost_is_duration() {
        let inst = table1();
        let root = DpState::root(&inst);
        assert_eq!(root.transition_cost(&inst, 0), 3);
    }

    #[test]
    fn table2_schedule_reached_by_unique_sequence() {
        let inst = table1();
        let state = advance(&inst, &[3, 4, 6, 0, 1, 7, 8, 2, 5]);
        assert!(state.is_complete(&inst));
        assert_eq!(state.cmax(), 11);
        assert_eq!(state.psi(), &[2, 5, 7, 0, 2, 7, 0, 4, 7]);
    }

    /// The two states of the worked dominance example: same scheduled set
    /// `{0, 1, 3, 6}` reached by different orders.
    fn dominance_pair(inst: &Instance) -> (DpState, DpState) {
        let s1 = advance(inst, &[0, 6, 3, 1]);
        let s2 = advance(inst, &[3, 6, 0, 1]);
        (s1, s2)
    }

    #[test]
    fn earliest_completion_and_dominance_example() {
        let inst = table1();
        let (s1, s2) = dominance_pair(&inst);
        assert_eq!(s1.cmax(), 6);
        assert_eq!(s2.cmax(), 7);
        assert_eq!(s1.earliest_completion(&inst, 2), 8);
        assert_eq!(s1.earliest_completion(&inst, 4), 6);
        assert_eq!(s1.earliest_completion(&inst, 7), 7);
        assert_eq!(s2.earliest_completion(&inst, 2), 9);
        // op 4 completes at 3 < 7: not extending, so it counts from cmax
        assert_eq!(s2.earliest_completion(&inst, 4), 8);
        assert_eq!(s2.earliest_completion(&inst, 7), 7);
        assert!(s1.dominates(&inst, &s2));
        assert!(!s2.dominates(&inst, &s1));
    }

    #[test]
    fn dominance_is_reflexive_and_needs_equal_done() {
        let inst = table1();
        let (s1, _) = dominance_pair(&inst);
        assert!(s1.dominates(&inst, &s1));
        let other = advance(&inst, &[0]);
        assert!(!s1.dominates(&inst, &other));
        assert!(!other.dominates(&inst, &s1));
    }

    #[test]
    fn machine_dominated_cases() {
        let inst = table1();
        assert!(!DpState::root(&inst).machine_dominated(&inst));
        // after op 0 (cmax 3) machine 0 still has op 3 extending: no pruning
        let s = advance(&inst, &[0]);
        assert!(!s.machine_dominated(&inst));
        // after op 6 alone (cmax 4), ops 0 and 3 on machine 0 both complete
        // before the makespan and are filtered: the machine is starved
        let s = advance(&inst, &[6]);
        assert!(s.machine_dominated(&inst));
    }

    #[test]
    fn machine_dominated_stays_off_without_partition_orders() {
        // same blocked-machine shape, but partition 1 is a free disjunction:
        // the blocked op may legitimately wait for its partition mate, so
        // the elimination must not fire
        let inst = Instance::new(2, 2, vec![(1, 0, 4), (0, 1, 1), (1, 1, 3), (0, 0, 2)], &[(2, 3)])
            .unwrap();
        assert!(!inst.partitions_totally_ordered());
        let state = DpState::root(&inst).transition(&inst, 0);
        assert!(state.is_eligible(&inst, 1));
        assert!(!state.is_extending(&inst, 1)); // 0 + 1 < 4
        assert!(!state.machine_dominated(&inst));
    }

    #[test]
    fn machine_dominated_false_when_extending_op_present() {
        let inst = table1();
        let s = advance(&inst, &[3]);
        // every machine with available work still has an extending op
        assert!(!s.machine_dominated(&inst));
    }

    #[test]
    fn lct_backward_pass() {
        // chain durations 1, 2, 3 under ub = 10
        let inst = parse_jsp_standard("1 3\n0 1 1 2 2 3\n").unwrap();
        let state = DpState::root(&inst);
        assert_eq!(compute_lct(&inst, &state, 10), vec![5, 7, 10]);
    }

    #[test]
    fn lct_without_precedences_is_ub() {
        let inst = parse_osp_gueret_prins("2 2\n1 2\n3 4\n").unwrap();
        let state = DpState::root(&inst);
        assert_eq!(compute_lct(&inst, &state, 9), vec![9; 4]);
    }

    #[test]
    fn jps_no_preemption_needed() {
        // one machine, two ops released at 0 with durations 3 and 2
        let inst = Instance::new(1, 2, vec![(0, 0, 3), (0, 1, 2)], &[]).unwrap();
        let state = DpState::root(&inst);
        assert_eq!(jps_lower_bound(&inst, &state, 100), 5);
    }

    #[test]
    fn jps_preemptive_run() {
        // heads 0 and 1, durations 3 and 2, deadlines 10 and 4: the urgent
        // job preempts at t = 1 and the machine stays busy until 5
        let jobs = vec![(0, 3, 10, 0), (1, 2, 4, 1)];
        assert_eq!(preemptive_completion(&jobs), 5);
    }

    #[test]
    fn jps_respects_release_gaps() {
        let jobs = vec![(2, 1, 10, 0), (5, 2, 10, 1)];
        assert_eq!(preemptive_completion(&jobs), 7);
    }

    #[test]
    fn jps_of_complete_state_is_cmax() {
        let inst = parse_jsp_standard("1 1\n0 5\n").unwrap();
        let state = DpState::root(&inst).transition(&inst, 0);
        assert_eq!(jps_lower_bound(&inst, &state, 100), 5);
    }

    #[test]
    fn dominance_key_is_set_semantics() {
        let inst = table1();
        let a = advance(&inst, &[0, 3]);
        let b = advance(&inst, &[3, 0]);
        assert_eq!(a.dominance_key(), b.dominance_key());
        assert_ne!(a.psi(), b.psi());
        let root_key = DpState::root(&inst).dominance_key();
        assert!(root_key.is_empty());
    }

    #[test]
    fn update_est_monotone_and_idempotent() {
        let inst = table1();
        let root = DpState::root(&inst);
        let s1 = root.transition(&inst, 0);
        for o in 0..inst.num_ops() {
            assert!(s1.psi()[o] >= root.psi()[o]);
        }
        // re-running the update for the same decision changes nothing
        assert_eq!(s1.updated_psi(&inst, 0), s1.psi());
    }
}
