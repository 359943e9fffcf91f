//! Exact and anytime solver for the partial shop scheduling problem (PSSP).
//!
//! A PSSP instance consists of `n * m` operations, each requiring a specific
//! machine and belonging to a specific partition (a generalized job), plus an
//! arbitrary precedence DAG. Operations sharing a machine or a partition may
//! not overlap in time; the objective is to minimize the makespan. Job-shop
//! instances are the special case where the DAG is a chain per partition,
//! open-shop instances the case where the DAG is empty.
//!
//! The solver embeds disjunctive constraint propagation (overload checking,
//! detectable precedences, not-first/not-last, edge-finding) inside a
//! dynamic-programming state search driven by an anytime column search, and
//! offers a precedence-relaxation large neighborhood search on top.
//!
//! Entry points:
//! - [`instance`]: parsing (JSP text, Taillard / Guéret-Prins OSP matrices,
//!   PSSP JSON), solution verification and a brute-force oracle,
//! - [`search::acs`]: the anytime column search over the DP state graph,
//! - [`search::astar`]: best-first search for fixed-precedence subproblems,
//! - [`lns::lns_run`]: adaptive large neighborhood search.

pub mod cp;
pub mod dp;
pub mod gen;
pub mod hybrid;
pub mod instance;
pub mod lns;
pub mod precedence;
pub mod search;
pub mod solution;

pub use cp::{Csp, Infeasible, IntervalVar};
pub use dp::{DpState, OpSet};
pub use gen::generate_instance;
pub use instance::{
    brute_force_optimum, horizon, parse_jsp_standard, parse_osp_gueret_prins, parse_osp_taillard,
    parse_pssp_json, write_instance_json, Instance, Operation, ParseError,
};
pub use lns::{incumbent_precedence_graph, lns_run, select_subset_precedences, LnsConfig, LnsOutcome};
pub use precedence::PrecedenceSet;
pub use search::{acs, astar, DominanceMap, Model, SearchConfig};
pub use solution::{
    parse_solution_json, verify_solution, write_solution_json, write_trace_csv, SearchStats,
    Solution, SolveStatus, TraceRow, VerifyReport, Violation,
};

/// Operation identifier: index into an instance's operation list.
pub type OpId = usize;

/// Time unit. All durations, start times and bounds are integral.
pub type Time = i64;
