//! Schedules, verification, search statistics and artifact serialization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, ParseError};
use crate::{OpId, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

/// One anytime-trace entry. `elapsed_ms` is the solver's deterministic work
/// clock (see [`SearchStats`]), `lb`/`ub` the bounds proven at that point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub elapsed_ms: u64,
    pub lb: Time,
    pub ub: Time,
}

/// Search statistics. `elapsed_ms` counts deterministic work ticks (dequeued
/// states and fixpoint computations) rather than wall-clock time, so repeated
/// runs with the same seed produce identical artifacts; wall time is reported
/// separately by the CLI. The trace records every incumbent improvement.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_explored: u64,
    pub fixpoint_calls: u64,
    pub elapsed_ms: u64,
    pub trace: Vec<TraceRow>,
}

impl SearchStats {
    pub fn tick(&mut self) {
        self.elapsed_ms += 1;
    }

    pub fn count_fixpoint(&mut self) {
        self.fixpoint_calls += 1;
        self.elapsed_ms += 1;
    }

    /// Folds a subsearch's counters into this one (trace rows excluded).
    pub fn absorb(&mut self, other: &SearchStats) {
        self.nodes_explored += other.nodes_explored;
        self.fixpoint_calls += other.fixpoint_calls;
        self.elapsed_ms += other.elapsed_ms;
    }
}

/// A start-time assignment with its makespan, proof status and statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Start time per operation, indexed by operation id.
    pub starts: Vec<Time>,
    pub makespan: Time,
    pub status: SolveStatus,
    pub stats: SearchStats,
}

impl Solution {
    pub fn new(starts: Vec<Time>, makespan: Time, status: SolveStatus) -> Self {
        Solution {
            starts,
            makespan,
            status,
            stats: SearchStats::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WrongStartCount { expected: usize, found: usize },
    NegativeStart { op: OpId },
    PrecedenceViolated { pred: OpId, succ: OpId },
    MachineOverlap { machine: usize, a: OpId, b: OpId },
    PartitionOverlap { partition: usize, a: OpId, b: OpId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongStartCount { expected, found } => {
                write!(f, "expected {expected} start times, found {found}")
            }
            Violation::NegativeStart { op } => write!(f, "operation {op} starts before time 0"),
            Violation::PrecedenceViolated { pred, succ } => {
                write!(f, "operation {succ} starts before predecessor {pred} ends")
            }
            Violation::MachineOverlap { machine, a, b } => {
                write!(f, "operations {a} and {b} overlap on machine {machine}")
            }
            Violation::PartitionOverlap { partition, a, b } => {
                write!(f, "operations {a} and {b} overlap in partition {partition}")
            }
        }
    }
}

/// Outcome of checking a schedule against an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub valid: bool,
    pub makespan: Time,
    pub violations: Vec<Violation>,
}

/// Checks every precedence (end before start) and every machine and
/// partition disjunction (no overlap; touching intervals are fine), and
/// recomputes the makespan. Violations are reported, not thrown.
pub fn verify_solution(inst: &Instance, sol: &Solution) -> VerifyReport {
    let mut violations = Vec::new();
    if sol.starts.len() != inst.num_ops() {
        return VerifyReport {
            valid: false,
            makespan: 0,
            violations: vec![Violation::WrongStartCount {
                expected: inst.num_ops(),
                found: sol.starts.len(),
            }],
        };
    }
    for o in 0..inst.num_ops() {
        if sol.starts[o] < 0 {
            violations.push(Violation::NegativeStart { op: o });
        }
    }
    for (a, b) in inst.edges().pairs() {
        if sol.starts[a] + inst.duration(a) > sol.starts[b] {
            violations.push(Violation::PrecedenceViolated { pred: a, succ: b });
        }
    }
    let overlaps = |ops: &[OpId]| {
        let mut sorted = ops.to_vec();
        sorted.sort_unstable_by_key(|&o| (sol.starts[o], o));
        sorted
            .windows(2)
            .filter(|w| sol.starts[w[0]] + inst.duration(w[0]) > sol.starts[w[1]])
            .map(|w| (w[0], w[1]))
            .collect::<Vec<_>>()
    };
    for machine in 0..inst.machines() {
        for (a, b) in overlaps(inst.machine_ops(machine)) {
            violations.push(Violation::MachineOverlap { machine, a, b });
        }
    }
    for partition in 0..inst.partitions() {
        for (a, b) in overlaps(inst.partition_ops(partition)) {
            violations.push(Violation::PartitionOverlap { partition, a, b });
        }
    }
    let makespan = (0..inst.num_ops())
        .map(|o| sol.starts[o] + inst.duration(o))
        .max()
        .unwrap_or(0);
    VerifyReport {
        valid: violations.is_empty(),
        makespan,
        violations,
    }
}

/// Deterministic JSON serialization of a solution.
pub fn write_solution_json(sol: &Solution) -> String {
    let mut s = serde_json::to_string_pretty(sol).expect("solution serialization cannot fail");
    s.push('\n');
    s
}

pub fn parse_solution_json(text: &str) -> Result<Solution, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))
}

/// Renders the anytime trace as `elapsed_ms,lb,ub` CSV rows.
pub fn write_trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("elapsed_ms,lb,ub\n");
    for row in trace {
        out.push_str(&format!("{},{},{}\n", row.elapsed_ms, row.lb, row.ub));
    }
    out
}
