//! Deterministic round scheduler for both protocols, metrics collection,
//! termination detection, and the theoretical-bounds checker.
//!
//! A single run is sequential by contract so that reports are bit-identical
//! across repetitions; with the `parallel` feature the synchronous schedule
//! processes nodes (or hosts) with rayon, which preserves determinism
//! because delivery happens only at round boundaries.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{Graph, NodeId};
use crate::hosted::{assign_hosts, Emission, HostState, Policy};
use crate::oracle::CorenessMap;
use crate::protocol::{Message, NodeState};

/// Node (or host) activation order within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Round `r` delivers every message sent in round `r - 1`, then every
    /// node emits. Fully deterministic.
    Sync,
    /// Nodes are activated in a seeded random order each round; messages
    /// emitted by already-activated nodes are visible to later nodes in
    /// the same round, emulating a cycle-based simulator.
    Random { seed: u64 },
}

/// Which executor drives a synchronous round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecBackend {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecBackend {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecBackend::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecBackend::Sequential
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub schedule: Schedule,
    pub optimized: bool,
    /// Hard stop; defaults to N + 1 so a bound violation shows up as a
    /// non-converged report instead of being truncated.
    pub max_rounds: Option<usize>,
    /// Rounds at which the per-core completion table is sampled.
    pub sample_rounds: Vec<usize>,
    pub backend: ExecBackend,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            schedule: Schedule::Sync,
            optimized: false,
            max_rounds: None,
            sample_rounds: Vec::new(),
            backend: ExecBackend::default(),
        }
    }
}

/// One row of the per-round error trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub round: usize,
    pub avg_error: f64,
    pub max_error: u32,
    pub messages: u64,
}

/// Fractions of each coreness shell still holding a wrong estimate at the
/// sampled rounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerCoreRow {
    pub k: u32,
    pub shell_size: usize,
    pub incorrect: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PerCoreTable {
    pub sample_rounds: Vec<usize>,
    pub rows: Vec<PerCoreRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// Number of rounds in which at least one message was emitted,
    /// including the final round whose messages cause no change.
    pub exec_time_rounds: usize,
    /// Post-initial estimate messages (one-to-one) or cross-host estimate
    /// entries (one-to-many).
    pub update_messages: u64,
    /// Round-1 announcement volume, reported separately.
    pub initial_messages: u64,
    pub final_coreness: CorenessMap,
    pub error_trace: Vec<TraceRow>,
    pub per_core_completion: PerCoreTable,
    /// Cross-host estimate entries divided by N; one-to-many only.
    pub overhead_per_node: Option<f64>,
    pub converged: bool,
}

/// Bounds on execution time and message volume, evaluated against a run.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    /// 1 + sum of initial errors d(u) - k(u).
    pub bound_b1: u64,
    /// Node count.
    pub bound_b2: u64,
    /// N - K + 1, K the number of minimum-degree nodes.
    pub bound_corollary: u64,
    /// Sum of squared degrees minus 2M.
    pub bound_messages: u64,
    #[serde(rename = "observed_T")]
    pub observed_t: usize,
    pub observed_updates: u64,
    pub all_satisfied: bool,
}

/// Tracks per-round estimate snapshots: monotone-descent and safety
/// assertions, the error trace, and per-core sampling.
struct Tracker<'a> {
    oracle: Option<&'a CorenessMap>,
    prev: Vec<u32>,
    trace: Vec<TraceRow>,
    sample_rounds: Vec<usize>,
    /// Per sampled round: per-node incorrect flags, folded into shells at
    /// the end.
    samples: Vec<(usize, Vec<bool>)>,
}

impl<'a> Tracker<'a> {
    fn new(oracle: Option<&'a CorenessMap>, initial: Vec<u32>, sample_rounds: &[usize]) -> Self {
        if let Some(oracle) = oracle {
            assert_eq!(oracle.len(), initial.len(), "oracle does not cover the graph");
        }
        Tracker {
            oracle,
            prev: initial,
            trace: Vec::new(),
            sample_rounds: sample_rounds.to_vec(),
            samples: Vec::new(),
        }
    }

    fn record(&mut self, round: usize, estimates: &[u32], messages: u64) {
        for (u, (&cur, &prev)) in estimates.iter().zip(&self.prev).enumerate() {
            assert!(
                cur <= prev,
                "estimate of node {u} increased from {prev} to {cur} at round {round}"
            );
        }
        if let Some(oracle) = self.oracle {
            let mut sum = 0u64;
            let mut max = 0u32;
            for (u, &cur) in estimates.iter().enumerate() {
                let truth = oracle.get(u as NodeId);
                assert!(
                    cur >= truth,
                    "safety violated: node {u} estimate {cur} below coreness {truth} at round {round}"
                );
                let err = cur - truth;
                sum += err as u64;
                max = max.max(err);
            }
            let n = estimates.len().max(1);
            self.trace.push(TraceRow {
                round,
                avg_error: sum as f64 / n as f64,
                max_error: max,
                messages,
            });
            if self.sample_rounds.contains(&round) {
                let flags = estimates
                    .iter()
                    .enumerate()
                    .map(|(u, &cur)| cur != oracle.get(u as NodeId))
                    .collect();
                self.samples.push((round, flags));
            }
        }
        self.prev.clear();
        self.prev.extend_from_slice(estimates);
    }

    fn finish(self) -> (Vec<TraceRow>, PerCoreTable) {
        let Some(oracle) = self.oracle else {
            return (self.trace, PerCoreTable::default());
        };
        if self.samples.is_empty() {
            return (self.trace, PerCoreTable::default());
        }
        let mut shells: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (u, &k) in oracle.values().iter().enumerate() {
            shells.entry(k).or_default().push(u);
        }
        let sampled_rounds: Vec<usize> = self.samples.iter().map(|(r, _)| *r).collect();
        let rows = shells
            .into_iter()
            .map(|(k, members)| PerCoreRow {
                k,
                shell_size: members.len(),
                incorrect: self
                    .samples
                    .iter()
                    .map(|(_, flags)| {
                        let wrong = members.iter().filter(|&&u| flags[u]).count();
                        wrong as f64 / members.len() as f64
                    })
                    .collect(),
            })
            .collect();
        (
            self.trace,
            PerCoreTable {
                sample_rounds: sampled_rounds,
                rows,
            },
        )
    }
}

fn route_messages(pending: &[(Message, Vec<NodeId>)], inboxes: &mut [Vec<Message>]) -> u64 {
    let mut count = 0u64;
    for (message, recipients) in pending {
        for &v in recipients {
            inboxes[v as usize].push(*message);
        }
        count += recipients.len() as u64;
    }
    count
}

fn node_estimates(states: &[NodeState]) -> Vec<u32> {
    states.iter().map(NodeState::core).collect()
}

fn process_node(state: &mut NodeState, inbox: &mut Vec<Message>, g: &Graph) -> Option<(Message, Vec<NodeId>)> {
    for message in inbox.drain(..) {
        state
            .on_receive(&message, g)
            .expect("engine routed a message along a non-edge");
    }
    state.round_emit(g)
}

/// Drive the one-to-one protocol to quiescence (or `max_rounds`).
///
/// An `oracle` enables the error trace, the per-core table, and the
/// per-round safety assertions; runs without one only report counts.
pub fn run_one_to_one(g: &Graph, opts: &RunOptions, oracle: Option<&CorenessMap>) -> RunReport {
    match opts.schedule {
        Schedule::Sync => run_one_to_one_sync(g, opts, oracle),
        Schedule::Random { seed } => run_one_to_one_random(g, opts, oracle, seed),
    }
}

fn run_one_to_one_sync(g: &Graph, opts: &RunOptions, oracle: Option<&CorenessMap>) -> RunReport {
    let n = g.node_count();
    let max_rounds = opts.max_rounds.unwrap_or(n + 1);
    let mut states = Vec::with_capacity(n);
    let mut pending: Vec<(Message, Vec<NodeId>)> = Vec::new();
    for u in g.nodes() {
        let (state, message) = NodeState::init(u, g, opts.optimized);
        if let Some(message) = message {
            pending.push((message, g.neighbors(u).to_vec()));
        }
        states.push(state);
    }
    let mut inboxes: Vec<Vec<Message>> = vec![Vec::new(); n];
    let initial_messages: u64 = pending.iter().map(|(_, r)| r.len() as u64).sum();

    let mut tracker = Tracker::new(oracle, node_estimates(&states), &opts.sample_rounds);
    tracker.record(1, &node_estimates(&states), initial_messages);

    let mut exec_time_rounds = usize::from(initial_messages > 0);
    let mut update_messages = 0u64;
    let mut converged = initial_messages == 0;
    let mut round = 1;

    while !converged {
        round += 1;
        if round > max_rounds {
            break;
        }
        route_messages(&pending, &mut inboxes);
        let emissions: Vec<Option<(Message, Vec<NodeId>)>> = match opts.backend {
            ExecBackend::Sequential => states
                .iter_mut()
                .zip(inboxes.iter_mut())
                .map(|(state, inbox)| process_node(state, inbox, g))
                .collect(),
            #[cfg(feature = "parallel")]
            ExecBackend::Parallel => states
                .par_iter_mut()
                .zip(inboxes.par_iter_mut())
                .map(|(state, inbox)| process_node(state, inbox, g))
                .collect(),
        };
        pending = emissions.into_iter().flatten().collect();
        let messages: u64 = pending.iter().map(|(_, r)| r.len() as u64).sum();
        update_messages += messages;
        if messages > 0 {
            exec_time_rounds += 1;
        } else {
            converged = true;
        }
        tracker.record(round, &node_estimates(&states), messages);
    }

    finish_node_report(
        g,
        states,
        tracker,
        exec_time_rounds,
        update_messages,
        initial_messages,
        converged,
        oracle,
    )
}

fn run_one_to_one_random(
    g: &Graph,
    opts: &RunOptions,
    oracle: Option<&CorenessMap>,
    seed: u64,
) -> RunReport {
    let n = g.node_count();
    let max_rounds = opts.max_rounds.unwrap_or(n + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<NodeState> = g
        .nodes()
        .map(|u| NodeState::init(u, g, opts.optimized).0)
        .collect();
    let mut inboxes: Vec<Vec<Message>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..n).collect();

    let mut tracker = Tracker::new(oracle, node_estimates(&states), &opts.sample_rounds);
    let mut initial_messages = 0u64;
    let mut update_messages = 0u64;
    let mut exec_time_rounds = 0usize;
    let mut converged = false;
    let mut round = 0;

    while !converged {
        round += 1;
        if round > max_rounds {
            break;
        }
        order.shuffle(&mut rng);
        let mut messages = 0u64;
        for &u in &order {
            let mut inbox = std::mem::take(&mut inboxes[u]);
            for message in inbox.drain(..) {
                states[u]
                    .on_receive(&message, g)
                    .expect("engine routed a message along a non-edge");
            }
            inboxes[u] = inbox;
            let emission = if round == 1 {
                states[u].broadcast_now(g)
            } else {
                states[u].round_emit(g)
            };
            if let Some((message, recipients)) = emission {
                for &v in &recipients {
                    inboxes[v as usize].push(message);
                }
                messages += recipients.len() as u64;
            }
        }
        if round == 1 {
            initial_messages = messages;
        } else {
            update_messages += messages;
        }
        if messages > 0 {
            exec_time_rounds += 1;
        } else if inboxes.iter().all(Vec::is_empty) {
            converged = true;
        }
        tracker.record(round, &node_estimates(&states), messages);
    }

    finish_node_report(
        g,
        states,
        tracker,
        exec_time_rounds,
        update_messages,
        initial_messages,
        converged,
        oracle,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_node_report(
    g: &Graph,
    states: Vec<NodeState>,
    tracker: Tracker,
    exec_time_rounds: usize,
    update_messages: u64,
    initial_messages: u64,
    converged: bool,
    oracle: Option<&CorenessMap>,
) -> RunReport {
    let final_coreness = CorenessMap::from_values(node_estimates(&states));
    if converged {
        if let Some(oracle) = oracle {
            for u in g.nodes() {
                assert_eq!(
                    final_coreness.get(u),
                    oracle.get(u),
                    "liveness violated: node {u} converged to a wrong value"
                );
            }
        }
    }
    let (error_trace, per_core_completion) = tracker.finish();
    RunReport {
        exec_time_rounds,
        update_messages,
        initial_messages,
        final_coreness,
        error_trace,
        per_core_completion,
        overhead_per_node: None,
        converged,
    }
}

fn host_estimates(states: &[HostState], assignment: &[u32]) -> Vec<u32> {
    assignment
        .iter()
        .enumerate()
        .map(|(u, &x)| states[x as usize].estimate_of(u as NodeId))
        .collect()
}

fn route_emission(emission: &Emission, inboxes: &mut [Vec<crate::hosted::UpdateBatch>]) {
    match emission {
        Emission::Broadcast {
            batch,
            destinations,
        } => {
            for &y in destinations {
                inboxes[y as usize].push(batch.clone());
            }
        }
        Emission::PerHost(batches) => {
            for (y, batch) in batches {
                inboxes[*y as usize].push(batch.clone());
            }
        }
    }
}

fn process_host(
    state: &mut HostState,
    inbox: &mut Vec<crate::hosted::UpdateBatch>,
    g: &Graph,
    policy: Policy,
) -> Option<Emission> {
    for batch in inbox.drain(..) {
        state
            .on_receive(&batch, g)
            .expect("engine routed a batch between non-neighbor hosts");
    }
    state.round_emit(policy)
}

/// Drive the one-to-many protocol with `hosts` hosts under the given
/// dissemination policy. Node `u` lives on host `u mod hosts`.
pub fn run_one_to_many(
    g: &Graph,
    hosts: usize,
    policy: Policy,
    opts: &RunOptions,
    oracle: Option<&CorenessMap>,
) -> RunReport {
    assert!(hosts >= 1, "host count must be >= 1");
    let n = g.node_count();
    let assignment = assign_hosts(n, hosts).expect("hosts >= 1");
    match opts.schedule {
        Schedule::Sync => run_one_to_many_sync(g, hosts, policy, opts, oracle, &assignment),
        Schedule::Random { seed } => {
            run_one_to_many_random(g, hosts, policy, opts, oracle, &assignment, seed)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_one_to_many_sync(
    g: &Graph,
    hosts: usize,
    policy: Policy,
    opts: &RunOptions,
    oracle: Option<&CorenessMap>,
    assignment: &[u32],
) -> RunReport {
    let n = g.node_count();
    let max_rounds = opts.max_rounds.unwrap_or(n + 1);
    let mut states: Vec<HostState> = Vec::with_capacity(hosts);
    let mut pending: Vec<Emission> = Vec::new();
    for x in 0..hosts as u32 {
        let mut state = HostState::new(x, g, assignment);
        if let Some(emission) = state.announce_all(policy) {
            pending.push(emission);
        }
        states.push(state);
    }
    let mut inboxes: Vec<Vec<crate::hosted::UpdateBatch>> = vec![Vec::new(); hosts];
    let initial_messages: u64 = pending.iter().map(Emission::wire_entries).sum();

    let mut tracker = Tracker::new(oracle, host_estimates(&states, assignment), &opts.sample_rounds);
    tracker.record(1, &host_estimates(&states, assignment), initial_messages);

    let mut wired_rounds = usize::from(initial_messages > 0);
    let mut update_messages = 0u64;
    let mut converged = initial_messages == 0;
    let mut round = 1;

    while !converged {
        round += 1;
        if round > max_rounds {
            break;
        }
        for emission in &pending {
            route_emission(emission, &mut inboxes);
        }
        let emissions: Vec<Option<Emission>> = match opts.backend {
            ExecBackend::Sequential => states
                .iter_mut()
                .zip(inboxes.iter_mut())
                .map(|(state, inbox)| process_host(state, inbox, g, policy))
                .collect(),
            #[cfg(feature = "parallel")]
            ExecBackend::Parallel => states
                .par_iter_mut()
                .zip(inboxes.par_iter_mut())
                .map(|(state, inbox)| process_host(state, inbox, g, policy))
                .collect(),
        };
        pending = emissions.into_iter().flatten().collect();
        let messages: u64 = pending.iter().map(Emission::wire_entries).sum();
        update_messages += messages;
        if messages > 0 {
            wired_rounds += 1;
        } else {
            converged = true;
        }
        tracker.record(round, &host_estimates(&states, assignment), messages);
    }

    finish_host_report(
        g,
        states,
        assignment,
        tracker,
        wired_rounds,
        update_messages,
        initial_messages,
        converged,
        oracle,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_one_to_many_random(
    g: &Graph,
    hosts: usize,
    policy: Policy,
    opts: &RunOptions,
    oracle: Option<&CorenessMap>,
    assignment: &[u32],
    seed: u64,
) -> RunReport {
    let n = g.node_count();
    let max_rounds = opts.max_rounds.unwrap_or(n + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<HostState> = (0..hosts as u32)
        .map(|x| HostState::new(x, g, assignment))
        .collect();
    let mut inboxes: Vec<Vec<crate::hosted::UpdateBatch>> = vec![Vec::new(); hosts];
    let mut order: Vec<usize> = (0..hosts).collect();

    let mut tracker = Tracker::new(oracle, host_estimates(&states, assignment), &opts.sample_rounds);
    let mut initial_messages = 0u64;
    let mut update_messages = 0u64;
    let mut wired_rounds = 0usize;
    let mut converged = false;
    let mut round = 0;

    while !converged {
        round += 1;
        if round > max_rounds {
            break;
        }
        order.shuffle(&mut rng);
        let mut messages = 0u64;
        for &x in &order {
            let mut inbox = std::mem::take(&mut inboxes[x]);
            for batch in inbox.drain(..) {
                states[x]
                    .on_receive(&batch, g)
                    .expect("engine routed a batch between non-neighbor hosts");
            }
            inboxes[x] = inbox;
            let emission = if round == 1 {
                states[x].announce_all(policy)
            } else {
                states[x].round_emit(policy)
            };
            if let Some(emission) = emission {
                messages += emission.wire_entries();
                route_emission(&emission, &mut inboxes);
            }
        }
        if round == 1 {
            initial_messages = messages;
        } else {
            update_messages += messages;
        }
        if messages > 0 {
            wired_rounds += 1;
        } else if inboxes.iter().all(Vec::is_empty) {
            converged = true;
        }
        tracker.record(round, &host_estimates(&states, assignment), messages);
    }

    finish_host_report(
        g,
        states,
        assignment,
        tracker,
        wired_rounds,
        update_messages,
        initial_messages,
        converged,
        oracle,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_host_report(
    g: &Graph,
    states: Vec<HostState>,
    assignment: &[u32],
    tracker: Tracker,
    wired_rounds: usize,
    update_messages: u64,
    initial_messages: u64,
    converged: bool,
    oracle: Option<&CorenessMap>,
) -> RunReport {
    let n = g.node_count();
    // The initial internal cascade is a round of computation even when no
    // batch crosses a host boundary (e.g. a single host).
    let exec_time_rounds = if n > 0 { wired_rounds.max(1) } else { 0 };
    let final_coreness = CorenessMap::from_values(host_estimates(&states, assignment));
    if converged {
        if let Some(oracle) = oracle {
            for u in g.nodes() {
                assert_eq!(
                    final_coreness.get(u),
                    oracle.get(u),
                    "liveness violated: node {u} converged to a wrong value"
                );
            }
        }
    }
    let (error_trace, per_core_completion) = tracker.finish();
    RunReport {
        exec_time_rounds,
        update_messages,
        initial_messages,
        final_coreness,
        error_trace,
        per_core_completion,
        overhead_per_node: Some(if n == 0 {
            0.0
        } else {
            (initial_messages + update_messages) as f64 / n as f64
        }),
        converged,
    }
}

/// Evaluate the execution-time and message bounds against a synchronous
/// plain one-to-one run.
pub fn check_bounds(g: &Graph, oracle: &CorenessMap, report: &RunReport) -> BoundReport {
    let n = g.node_count() as u64;
    let initial_error: u64 = g
        .nodes()
        .map(|u| g.degree(u) as u64 - oracle.get(u) as u64)
        .sum();
    let bound_b1 = 1 + initial_error;
    let min_degree = g.min_degree();
    let min_degree_count = g.nodes().filter(|&u| g.degree(u) == min_degree).count() as u64;
    let bound_corollary = n - min_degree_count + 1;
    let squared_degrees: u64 = g.nodes().map(|u| (g.degree(u) as u64).pow(2)).sum();
    let bound_messages = squared_degrees - 2 * g.edge_count() as u64;
    let observed_t = report.exec_time_rounds;
    let observed_updates = report.update_messages;
    let all_satisfied = (observed_t as u64) <= bound_b1
        && (observed_t as u64) <= n.max(u64::from(n == 0))
        && (observed_t as u64) <= bound_corollary
        && observed_updates <= bound_messages;
    BoundReport {
        bound_b1,
        bound_b2: n,
        bound_corollary,
        bound_messages,
        observed_t,
        observed_updates,
        all_satisfied,
    }
}

/// Aggregate over repeated runs, mirroring per-node message accounting.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateReport {
    pub repetitions: usize,
    pub t_avg: f64,
    pub t_min: usize,
    pub t_max: usize,
    /// Mean over runs of total messages per node.
    pub m_avg: f64,
    pub m_max: f64,
    pub converged: bool,
}

pub fn aggregate(reports: &[RunReport], n: usize) -> AggregateReport {
    assert!(!reports.is_empty());
    let times: Vec<usize> = reports.iter().map(|r| r.exec_time_rounds).collect();
    let per_node: Vec<f64> = reports
        .iter()
        .map(|r| (r.initial_messages + r.update_messages) as f64 / n.max(1) as f64)
        .collect();
    AggregateReport {
        repetitions: reports.len(),
        t_avg: times.iter().sum::<usize>() as f64 / times.len() as f64,
        t_min: *times.iter().min().unwrap(),
        t_max: *times.iter().max().unwrap(),
        m_avg: per_node.iter().sum::<f64>() / per_node.len() as f64,
        m_max: per_node.iter().cloned().fold(0.0, f64::max),
        converged: reports.iter().all(|r| r.converged),
    }
}

/// CSV form of the error trace: `round,avg_error,max_error,messages`.
pub fn write_trace_csv<W: Write>(report: &RunReport, writer: &mut W) -> std::io::Result<()> {
    writeln!(writer, "round,avg_error,max_error,messages")?;
    for row in &report.error_trace {
        writeln!(
            writer,
            "{},{:.6},{},{}",
            row.round, row.avg_error, row.max_error, row.messages
        )?;
    }
    Ok(())
}

/// CSV form of the per-core table: `k,shell_size,t<r1>,t<r2>,...`.
pub fn write_per_core_csv<W: Write>(report: &RunReport, writer: &mut W) -> std::io::Result<()> {
    let table = &report.per_core_completion;
    write!(writer, "k,shell_size")?;
    for r in &table.sample_rounds {
        write!(writer, ",t{r}")?;
    }
    writeln!(writer)?;
    for row in &table.rows {
        write!(writer, "{},{}", row.k, row.shell_size)?;
        for frac in &row.incorrect {
            write!(writer, ",{frac:.4}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
