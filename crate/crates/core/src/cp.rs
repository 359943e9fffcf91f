//! Disjunctive-scheduling propagation: interval time windows, precedence
//! propagation, overload checking, detectable precedences, not-first/not-last
//! and edge-finding, driven to a fixpoint.
//!
//! The rule implementations are the quadratic textbook versions; what matters
//! for the search is the filtering semantics, not the data structure.

use crate::{OpId, Time};

/// Failure signal: some time window became empty, so no schedule fits the
/// current windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Infeasible;

/// One operation's time window with a fixed duration. The latest start and
/// completion are kept consistent by construction (`lct = lst + duration`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalVar {
    est: Time,
    lst: Time,
    duration: Time,
}

impl IntervalVar {
    /// Window allowing starts in `[est, lct - duration]`.
    pub fn new(est: Time, lct: Time, duration: Time) -> Self {
        IntervalVar {
            est,
            lst: lct - duration,
            duration,
        }
    }

    /// Interval pinned to a known start time.
    pub fn fixed(start: Time, duration: Time) -> Self {
        IntervalVar {
            est: start,
            lst: start,
            duration,
        }
    }

    pub fn est(&self) -> Time {
        self.est
    }

    pub fn lst(&self) -> Time {
        self.lst
    }

    pub fn ect(&self) -> Time {
        self.est + self.duration
    }

    pub fn lct(&self) -> Time {
        self.lst + self.duration
    }

    pub fn duration(&self) -> Time {
        self.duration
    }

    pub fn is_failed(&self) -> bool {
        self.est > self.lst
    }

    fn tighten_est(&mut self, est: Time) -> bool {
        if est > self.est {
            self.est = est;
            true
        } else {
            false
        }
    }

    fn tighten_lct(&mut self, lct: Time) -> bool {
        if lct < self.lct() {
            self.lst = lct - self.duration;
            true
        } else {
            false
        }
    }
}

/// A propagation session: interval variables plus the precedence pairs and
/// the disjunctive operation sets (one per machine, one per partition).
#[derive(Clone, Debug)]
pub struct Csp {
    intervals: Vec<IntervalVar>,
    precedences: Vec<(OpId, OpId)>,
    machine_sets: Vec<Vec<OpId>>,
    partition_sets: Vec<Vec<OpId>>,
}

impl Csp {
    pub fn new(
        intervals: Vec<IntervalVar>,
        precedences: Vec<(OpId, OpId)>,
        machine_sets: Vec<Vec<OpId>>,
        partition_sets: Vec<Vec<OpId>>,
    ) -> Self {
        Csp {
            intervals,
            precedences,
            machine_sets,
            partition_sets,
        }
    }

    pub fn interval(&self, o: OpId) -> &IntervalVar {
        &self.intervals[o]
    }

    pub fn intervals(&self) -> &[IntervalVar] {
        &self.intervals
    }

    pub fn precedences(&self) -> &[(OpId, OpId)] {
        &self.precedences
    }

    pub fn machine_sets(&self) -> &[Vec<OpId>] {
        &self.machine_sets
    }

    pub fn partition_sets(&self) -> &[Vec<OpId>] {
        &self.partition_sets
    }

    fn check(&self) -> Result<(), Infeasible> {
        if self.intervals.iter().any(IntervalVar::is_failed) {
            Err(Infeasible)
        } else {
            Ok(())
        }
    }

    /// One pass over all precedence pairs: `end(a) <= start(b)` tightens the
    /// successor's earliest start and the predecessor's latest start.
    pub fn propagate_precedences(&mut self) -> Result<bool, Infeasible> {
        let mut changed = false;
        for &(a, b) in &self.precedences {
            let ect_a = self.intervals[a].ect();
            let lst_b = self.intervals[b].lst();
            changed |= self.intervals[b].tighten_est(ect_a);
            changed |= self.intervals[a].tighten_lct(lst_b);
            if self.intervals[a].is_failed() || self.intervals[b].is_failed() {
                return Err(Infeasible);
            }
        }
        Ok(changed)
    }

    /// Fails when some subset of the set needs more processing time than its
    /// enclosing window offers.
    pub fn overload_check(&self, set: &[OpId]) -> Result<(), Infeasible> {
        let mut by_lct: Vec<OpId> = set.to_vec();
        by_lct.sort_unstable_by_key(|&o| self.intervals[o].lct());
        for (k, &end_op) in by_lct.iter().enumerate() {
            let window_end = self.intervals[end_op].lct();
            // sweep window starts from the latest est downwards, accumulating
            // the energy of prefix members released at or after each start
            let mut members: Vec<OpId> = by_lct[..=k].to_vec();
            members.sort_unstable_by_key(|&o| std::cmp::Reverse(self.intervals[o].est()));
            let mut energy = 0;
            for &o in &members {
                energy += self.intervals[o].duration();
                if energy > window_end - self.intervals[o].est() {
                    return Err(Infeasible);
                }
            }
        }
        Ok(())
    }

    /// Orders pairs whose windows admit only one sequence: when `a` cannot
    /// finish before `b` must start, `b` precedes `a`, so `a` starts after
    /// `b` completes and `b` ends before `a` can start latest.
    pub fn detectable_precedences(&mut self, set: &[OpId]) -> Result<bool, Infeasible> {
        let mut changed = false;
        for &a in set {
            for &b in set {
                if a == b {
                    continue;
                }
                if self.intervals[a].ect() > self.intervals[b].lst() {
                    if self.intervals[b].ect() > self.intervals[a].lst() {
                        // neither order fits
                        return Err(Infeasible);
                    }
                    let ect_b = self.intervals[b].ect();
                    let lst_a = self.intervals[a].lst();
                    changed |= self.intervals[a].tighten_est(ect_b);
                    changed |= self.intervals[b].tighten_lct(lst_a);
                    if self.intervals[a].is_failed() || self.intervals[b].is_failed() {
                        return Err(Infeasible);
                    }
                }
            }
        }
        Ok(changed)
    }

    /// Not-first: if running `t` before a group would leave the group less
    /// time than it needs, `t` starts after the group's first completion.
    /// Not-last is the mirror image on latest completions.
    pub fn not_first_not_last(&mut self, set: &[OpId]) -> Result<bool, Infeasible> {
        let mut changed = false;
        for &t in set {
            let mut others: Vec<OpId> = set.iter().copied().filter(|&o| o != t).collect();

            // not-first: groups are lct-prefixes of the other operations
            others.sort_unstable_by_key(|&o| self.intervals[o].lct());
            let mut energy = 0;
            let mut min_ect = Time::MAX;
            let mut new_est = self.intervals[t].est();
            for &o in &others {
                energy += self.intervals[o].duration();
                min_ect = min_ect.min(self.intervals[o].ect());
                let window_end = self.intervals[o].lct();
                if self.intervals[t].ect() > window_end - energy {
                    new_est = new_est.max(min_ect);
                }
            }
            changed |= self.intervals[t].tighten_est(new_est);

            // not-last: groups are est-suffixes of the other operations
            others.sort_unstable_by_key(|&o| std::cmp::Reverse(self.intervals[o].est()));
            let mut energy = 0;
            let mut max_lst = Time::MIN;
            let mut new_lct = self.intervals[t].lct();
            for &o in &others {
                energy += self.intervals[o].duration();
                max_lst = max_lst.max(self.intervals[o].lst());
                let window_start = self.intervals[o].est();
                if self.intervals[t].lst() < window_start + energy {
                    new_lct = new_lct.min(max_lst);
                }
            }
            changed |= self.intervals[t].tighten_lct(new_lct);

            if self.intervals[t].is_failed() {
                return Err(Infeasible);
            }
        }
        Ok(changed)
    }

    /// Edge-finding: if `t` cannot run within or before a group, it ends
    /// after all of the group, so `t` starts no earlier than the group's
    /// earliest completion. Mirror rule bounds `t`'s latest completion.
    pub fn edge_finding(&mut self, set: &[OpId]) -> Result<bool, Infeasible> {
        let mut changed = false;
        for &t in set {
            let others: Vec<OpId> = set.iter().copied().filter(|&o| o != t).collect();
            if others.is_empty() {
                continue;
            }
            let mut new_est = self.intervals[t].est();
            let mut new_lct = self.intervals[t].lct();
            // candidate groups are est/lct rectangles over the other ops
            for &i in &others {
                for &k in &others {
                    let est_lo = self.intervals[i].est();
                    let lct_hi = self.intervals[k].lct();
                    let mut energy = 0;
                    let mut min_est = Time::MAX;
                    let mut max_lct = Time::MIN;
                    let mut group_ect = Time::MIN;
                    let mut group_lst = Time::MAX;
                    let mut inside: Vec<OpId> = Vec::new();
                    for &o in &others {
                        let iv = &self.intervals[o];
                        if iv.est() >= est_lo && iv.lct() <= lct_hi {
                            energy += iv.duration();
                            min_est = min_est.min(iv.est());
                            max_lct = max_lct.max(iv.lct());
                            inside.push(o);
                        }
                    }
                    if inside.is_empty() {
                        continue;
                    }
                    // earliest completion / latest start of the group as a block
                    let mut sorted = inside.clone();
                    sorted.sort_unstable_by_key(|&o| std::cmp::Reverse(self.intervals[o].est()));
                    let mut tail = 0;
                    for &o in &sorted {
                        tail += self.intervals[o].duration();
                        group_ect = group_ect.max(self.intervals[o].est() + tail);
                    }
                    sorted.sort_unstable_by_key(|&o| self.intervals[o].lct());
                    let mut head = 0;
                    for &o in &sorted {
                        head += self.intervals[o].duration();
                        group_lst = group_lst.min(self.intervals[o].lct() - head);
                    }

                    let t_iv = &self.intervals[t];
                    // t inside or before the group does not fit: t is last
                    if energy + t_iv.duration() > max_lct - min_est.min(t_iv.est()) {
                        new_est = new_est.max(group_ect);
                    }
                    // t inside or after the group does not fit: t is first
                    if energy + t_iv.duration() > max_lct.max(t_iv.lct()) - min_est {
                        new_lct = new_lct.min(group_lst);
                    }
                }
            }
            changed |= self.intervals[t].tighten_est(new_est);
            changed |= self.intervals[t].tighten_lct(new_lct);
            if self.intervals[t].is_failed() {
                return Err(Infeasible);
            }
        }
        Ok(changed)
    }

    /// Applies every rule round-robin until no window changes. Windows only
    /// shrink, so termination is guaranteed by the finite horizon.
    pub fn fixpoint(&mut self) -> Result<(), Infeasible> {
        self.check()?;
        let sets: Vec<Vec<OpId>> = self
            .machine_sets
            .iter()
            .chain(self.partition_sets.iter())
            .cloned()
            .collect();
        loop {
            let mut changed = self.propagate_precedences()?;
            for set in &sets {
                self.overload_check(set)?;
                changed |= self.detectable_precedences(set)?;
                changed |= self.not_first_not_last(set)?;
                changed |= self.edge_finding(set)?;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// All precedences implied by the current windows between operations of
    /// a common disjunctive set: `(b, a)` whenever `a` can no longer finish
    /// before `b` must start. Pairs already posted as precedences are
    /// skipped. Call after a successful [`Csp::fixpoint`].
    pub fn detected_precedence_pairs(&self) -> Vec<(OpId, OpId)> {
        let mut out = std::collections::BTreeSet::new();
        for set in self.machine_sets.iter().chain(self.partition_sets.iter()) {
            for &a in set {
                for &b in set {
                    if a != b && self.intervals[a].ect() > self.intervals[b].lst() {
                        out.insert((b, a));
                    }
                }
            }
        }
        let known: std::collections::BTreeSet<(OpId, OpId)> =
            self.precedences.iter().copied().collect();
        out.difference(&known).copied().collect()
    }
}
