//! Distributed k-core decomposition: graph model, exact centralized
//! oracle, the per-node and host-based message protocols, and a
//! deterministic round simulator with bound checking.

pub mod engine;
pub mod graph;
pub mod hosted;
pub mod oracle;
pub mod protocol;

pub use engine::{
    aggregate, check_bounds, run_one_to_many, run_one_to_one, write_per_core_csv, write_trace_csv,
    AggregateReport, BoundReport, ExecBackend, RunOptions, RunReport, Schedule,
};
pub use graph::{gen_chain, gen_random, gen_worst_case, parse_edge_list, write_edge_list, Graph,
    GraphError, NodeId, ParseMode};
pub use hosted::{assign_hosts, HostId, HostState, Policy};
pub use oracle::{coreness_exact, read_coreness, stats, verify_locality, write_coreness,
    CorenessMap, DecompositionStats, OracleError};
pub use protocol::{compute_index, Message, NodeState, ProtocolError, INFINITY};
