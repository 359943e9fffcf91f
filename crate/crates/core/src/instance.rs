//! Problem representation, benchmark-format parsing and a brute-force oracle.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::OpSet;
use crate::precedence::PrecedenceSet;
use crate::{OpId, Time};

/// One operation of a shop instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Operation {
    pub id: OpId,
    pub machine: usize,
    pub partition: usize,
    pub duration: Time,
}

/// An immutable PSSP instance in canonical form: `partitions * machines`
/// operations, every (machine, partition) pair hosting exactly one of them,
/// plus an acyclic precedence relation.
#[derive(Clone, Debug)]
pub struct Instance {
    ops: Vec<Operation>,
    machines: usize,
    partitions: usize,
    edges: PrecedenceSet,
    by_machine: Vec<Vec<OpId>>,
    by_partition: Vec<Vec<OpId>>,
    ordered_partitions: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("malformed token at position {index}: {detail}")]
    MalformedToken { index: usize, detail: String },
    #[error("machine index {machine} out of range (m = {m})")]
    MachineOutOfRange { machine: usize, m: usize },
    #[error("partition index {partition} out of range (n = {n})")]
    PartitionOutOfRange { partition: usize, n: usize },
    #[error("duplicate machine {machine} in partition {partition}")]
    DuplicateMachine { machine: usize, partition: usize },
    #[error("operation {op}: duration must be >= 1, got {duration}")]
    InvalidDuration { op: usize, duration: Time },
    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("precedence edges contain a cycle")]
    CycleDetected,
    #[error("machine {machine} hosts {count} operations in partition {partition}, expected exactly 1")]
    CoverageViolation {
        machine: usize,
        partition: usize,
        count: usize,
    },
    #[error("operation index {index} out of range (N = {num_ops})")]
    IndexOutOfRange { index: usize, num_ops: usize },
    #[error("machine and partition counts must both be >= 1")]
    EmptyShape,
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl Instance {
    /// Validates and builds a canonical instance. Operation ids are assigned
    /// in list order.
    pub fn new(
        machines: usize,
        partitions: usize,
        ops: Vec<(usize, usize, Time)>,
        edges: &[(OpId, OpId)],
    ) -> Result<Self, ParseError> {
        if machines == 0 || partitions == 0 {
            return Err(ParseError::EmptyShape);
        }
        let expected = machines * partitions;
        if ops.len() != expected {
            return Err(ParseError::DimensionMismatch {
                expected,
                found: ops.len(),
            });
        }
        let mut operations = Vec::with_capacity(ops.len());
        let mut seen = vec![0usize; expected];
        for (id, (machine, partition, duration)) in ops.into_iter().enumerate() {
            if machine >= machines {
                return Err(ParseError::MachineOutOfRange {
                    machine,
                    m: machines,
                });
            }
            if partition >= partitions {
                return Err(ParseError::PartitionOutOfRange {
                    partition,
                    n: partitions,
                });
            }
            if duration < 1 {
                return Err(ParseError::InvalidDuration { op: id, duration });
            }
            seen[partition * machines + machine] += 1;
            operations.push(Operation {
                id,
                machine,
                partition,
                duration,
            });
        }
        for (slot, &count) in seen.iter().enumerate() {
            if count != 1 {
                return Err(ParseError::CoverageViolation {
                    machine: slot % machines,
                    partition: slot / machines,
                    count,
                });
            }
        }
        for &(a, b) in edges {
            for idx in [a, b] {
                if idx >= expected {
                    return Err(ParseError::IndexOutOfRange {
                        index: idx,
                        num_ops: expected,
                    });
                }
            }
        }
        let edge_set = PrecedenceSet::from_pairs(expected, edges);
        if !edge_set.is_acyclic() {
            return Err(ParseError::CycleDetected);
        }
        let mut by_machine = vec![Vec::new(); machines];
        let mut by_partition = vec![Vec::new(); partitions];
        for op in &operations {
            by_machine[op.machine].push(op.id);
            by_partition[op.partition].push(op.id);
        }
        let ordered_partitions = partitions_totally_ordered(&edge_set, &by_partition);
        Ok(Instance {
            ops: operations,
            machines,
            partitions,
            edges: edge_set,
            by_machine,
            by_partition,
            ordered_partitions,
        })
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn partitions(&self) -> usize {
        self.partitions
    }

    pub fn op(&self, id: OpId) -> &Operation {
        &self.ops[id]
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn duration(&self, id: OpId) -> Time {
        self.ops[id].duration
    }

    /// The original precedence DAG E.
    pub fn edges(&self) -> &PrecedenceSet {
        &self.edges
    }

    pub fn machine_ops(&self, machine: usize) -> &[OpId] {
        &self.by_machine[machine]
    }

    pub fn partition_ops(&self, partition: usize) -> &[OpId] {
        &self.by_partition[partition]
    }

    pub fn durations(&self) -> Vec<Time> {
        self.ops.iter().map(|o| o.duration).collect()
    }

    /// True when every partition's operations are pairwise ordered by the
    /// precedence DAG (as in a classical job shop). The partition no-overlap
    /// constraint is then implied by the precedences, which is what the
    /// machine-based state elimination relies on.
    pub fn partitions_totally_ordered(&self) -> bool {
        self.ordered_partitions
    }
}

fn partitions_totally_ordered(edges: &PrecedenceSet, by_partition: &[Vec<OpId>]) -> bool {
    let n = edges.num_ops();
    // reachability from each op over the DAG, one bitset row per op
    let words = n.div_ceil(64);
    let mut reach = vec![vec![0u64; words]; n];
    let order = edges.topo_order().expect("edges are validated acyclic");
    for &o in order.iter().rev() {
        for &s in edges.succs_of(o) {
            let (row_s, row_o) = if s > o {
                let (lo, hi) = reach.split_at_mut(s);
                (&hi[0], &mut lo[o])
            } else {
                let (lo, hi) = reach.split_at_mut(o);
                (&lo[s], &mut hi[0])
            };
            for (dst, src) in row_o.iter_mut().zip(row_s) {
                *dst |= src;
            }
            row_o[s / 64] |= 1 << (s % 64);
        }
    }
    let reaches = |a: usize, b: usize| reach[a][b / 64] & (1 << (b % 64)) != 0;
    by_partition.iter().all(|ops| {
        ops.iter().enumerate().all(|(i, &a)| {
            ops[i + 1..]
                .iter()
                .all(|&b| reaches(a, b) || reaches(b, a))
        })
    })
}

fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

fn parse_int(toks: &[&str], index: usize, what: &str) -> Result<i64, ParseError> {
    let tok = toks.get(index).ok_or_else(|| ParseError::MalformedToken {
        index,
        detail: format!("missing {what}"),
    })?;
    tok.parse::<i64>().map_err(|_| ParseError::MalformedToken {
        index,
        detail: format!("expected integer for {what}, got {tok:?}"),
    })
}

fn parse_count(toks: &[&str], index: usize, what: &str) -> Result<usize, ParseError> {
    let v = parse_int(toks, index, what)?;
    if v < 1 {
        return Err(ParseError::MalformedToken {
            index,
            detail: format!("{what} must be >= 1, got {v}"),
        });
    }
    Ok(v as usize)
}

/// Parses the standard job-shop text format: first `n m`, then `n` rows of
/// `m` whitespace-separated `(machine, duration)` pairs with 0-based machine
/// indices. Partition `j`'s k-th listed operation gets id `j*m + k`, and each
/// partition's operations are chained in listed order.
pub fn parse_jsp_standard(text: &str) -> Result<Instance, ParseError> {
    let toks = tokens(text);
    let n = parse_count(&toks, 0, "partition count")?;
    let m = parse_count(&toks, 1, "machine count")?;
    let expected = 2 + 2 * n * m;
    if toks.len() != expected {
        return Err(ParseError::DimensionMismatch {
            expected,
            found: toks.len(),
        });
    }
    let mut ops = Vec::with_capacity(n * m);
    let mut edges = Vec::new();
    let mut idx = 2;
    for job in 0..n {
        let mut used = HashSet::new();
        for k in 0..m {
            let machine = parse_int(&toks, idx, "machine index")?;
            let duration = parse_int(&toks, idx + 1, "duration")?;
            idx += 2;
            if machine < 0 || machine as usize >= m {
                return Err(ParseError::MachineOutOfRange {
                    machine: machine.max(0) as usize,
                    m,
                });
            }
            if !used.insert(machine) {
                return Err(ParseError::DuplicateMachine {
                    machine: machine as usize,
                    partition: job,
                });
            }
            if duration < 1 {
                return Err(ParseError::InvalidDuration {
                    op: job * m + k,
                    duration,
                });
            }
            ops.push((machine as usize, job, duration));
            if k > 0 {
                edges.push((job * m + k - 1, job * m + k));
            }
        }
    }
    Instance::new(m, n, ops, &edges)
}

fn parse_matrix(toks: &[&str], start: usize, n: usize, m: usize) -> Result<Vec<i64>, ParseError> {
    let mut out = Vec::with_capacity(n * m);
    for i in 0..n * m {
        out.push(parse_int(toks, start + i, "matrix entry")?);
    }
    Ok(out)
}

/// Parses the Taillard open-shop format: `n m`, an `n x m` processing-time
/// matrix, then an `n x m` machine-assignment matrix (1-based indices are
/// detected and shifted). Row = job = partition; no precedence edges.
pub fn parse_osp_taillard(text: &str) -> Result<Instance, ParseError> {
    let toks = tokens(text);
    let n = parse_count(&toks, 0, "job count")?;
    let m = parse_count(&toks, 1, "machine count")?;
    let expected = 2 + 2 * n * m;
    if toks.len() != expected {
        return Err(ParseError::DimensionMismatch {
            expected,
            found: toks.len(),
        });
    }
    let durations = parse_matrix(&toks, 2, n, m)?;
    let assignment = parse_matrix(&toks, 2 + n * m, n, m)?;
    // 1-based machine matrices are the Taillard convention
    let one_based = assignment.iter().any(|&v| v as usize == m)
        && assignment.iter().all(|&v| v >= 1);
    let mut ops = Vec::with_capacity(n * m);
    for job in 0..n {
        for k in 0..m {
            let raw = assignment[job * m + k];
            let machine = raw - if one_based { 1 } else { 0 };
            if machine < 0 || machine as usize >= m {
                return Err(ParseError::MachineOutOfRange {
                    machine: raw.max(0) as usize,
                    m,
                });
            }
            let duration = durations[job * m + k];
            if duration < 1 {
                return Err(ParseError::InvalidDuration {
                    op: job * m + k,
                    duration,
                });
            }
            ops.push((machine as usize, job, duration));
        }
    }
    Instance::new(m, n, ops, &[])
}

/// Parses the Guéret-Prins open-shop format: `n m` then an `n x m`
/// processing-time matrix; the operation in column `k` runs on machine `k`.
pub fn parse_osp_gueret_prins(text: &str) -> Result<Instance, ParseError> {
    let toks = tokens(text);
    let n = parse_count(&toks, 0, "job count")?;
    let m = parse_count(&toks, 1, "machine count")?;
    let expected = 2 + n * m;
    if toks.len() != expected {
        return Err(ParseError::DimensionMismatch {
            expected,
            found: toks.len(),
        });
    }
    let durations = parse_matrix(&toks, 2, n, m)?;
    let mut ops = Vec::with_capacity(n * m);
    for job in 0..n {
        for k in 0..m {
            let duration = durations[job * m + k];
            if duration < 1 {
                return Err(ParseError::InvalidDuration {
                    op: job * m + k,
                    duration,
                });
            }
            ops.push((k, job, duration));
        }
    }
    Instance::new(m, n, ops, &[])
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    machines: usize,
    partitions: usize,
    operations: Vec<OperationDoc>,
    edges: Vec<(OpId, OpId)>,
}

#[derive(Serialize, Deserialize)]
struct OperationDoc {
    machine: usize,
    partition: usize,
    duration: Time,
}

/// Parses the general PSSP JSON document: `machines`, `partitions`,
/// `operations` (machine/partition/duration records in id order) and an
/// explicit `edges` list. Cycles and coverage gaps are rejected.
pub fn parse_pssp_json(text: &str) -> Result<Instance, ParseError> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let ops: Vec<(usize, usize, Time)> = doc
        .operations
        .iter()
        .map(|o| (o.machine, o.partition, o.duration))
        .collect();
    Instance::new(doc.machines, doc.partitions, ops, &doc.edges)
}

/// Serializes an instance to the PSSP JSON document format.
pub fn write_instance_json(inst: &Instance) -> String {
    let doc = InstanceDoc {
        machines: inst.machines(),
        partitions: inst.partitions(),
        operations: inst
            .ops()
            .iter()
            .map(|o| OperationDoc {
                machine: o.machine,
                partition: o.partition,
                duration: o.duration,
            })
            .collect(),
        edges: inst.edges().pairs(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance serialization cannot fail");
    s.push('\n');
    s
}

/// Sum of all durations: a trivially valid upper bound on the makespan.
pub fn horizon(inst: &Instance) -> Time {
    inst.ops().iter().map(|o| o.duration).sum()
}

#[derive(Debug, Error, PartialEq)]
#[error("instance with {num_ops} operations exceeds the brute-force guard of {limit}")]
pub struct InstanceTooLarge {
    pub num_ops: usize,
    pub limit: usize,
}

const BRUTE_FORCE_LIMIT: usize = 12;

/// Exhaustive oracle: enumerates every order of scheduling available
/// operations at their earliest feasible time (all semi-active schedules)
/// and returns the minimum makespan. No dominance rules are applied, so the
/// value is an independent reference for the search modules. Guarded to
/// `N <= 12`.
pub fn brute_force_optimum(inst: &Instance) -> Result<Time, InstanceTooLarge> {
    if inst.num_ops() > BRUTE_FORCE_LIMIT {
        return Err(InstanceTooLarge {
            num_ops: inst.num_ops(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best = horizon(inst);
    let root = crate::dp::DpState::root(inst);
    let mut visited = HashSet::new();
    brute_force_dfs(inst, &root, &mut visited, &mut best);
    Ok(best)
}

fn brute_force_dfs(
    inst: &Instance,
    state: &crate::dp::DpState,
    visited: &mut HashSet<(OpSet, Vec<Time>)>,
    best: &mut Time,
) {
    // the partial makespan only grows, so prefixes at or past the best
    // complete value cannot improve the minimum
    if state.cmax() >= *best {
        return;
    }
    if state.done_len() == inst.num_ops() {
        *best = state.cmax();
        return;
    }
    if !visited.insert((state.done().clone(), state.psi().to_vec())) {
        return;
    }
    for o in state.eligible(inst) {
        let child = state.transition(inst, o);
        brute_force_dfs(inst, &child, visited, best);
    }
}
