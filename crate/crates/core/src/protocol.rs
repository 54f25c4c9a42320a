//! Per-node state machine of the one-to-one protocol and the shared
//! estimate-computation kernel.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{Graph, NodeId};

/// Sentinel for "no estimate received yet"; above any degree.
pub const INFINITY: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("compute_index requires a current estimate >= 1, got {0}")]
    EstimateBelowOne(u32),
    #[error("node {receiver} received a message from non-neighbor {sender}")]
    NotANeighbor { receiver: NodeId, sender: NodeId },
}

/// Estimate notification. `estimate` is the sender's estimate at emission
/// time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub sender: NodeId,
    pub estimate: u32,
}

/// Largest `i` in `[1, k]` such that at least `i` of the supplied neighbor
/// estimates are `>= i`, with estimates capped at `k`. Unknown neighbors
/// pass [`INFINITY`]. Computed with bucket counts, a suffix sum, and a
/// downward scan; never returns below 1.
pub fn compute_index(
    estimates: impl IntoIterator<Item = u32>,
    k: u32,
) -> Result<u32, ProtocolError> {
    if k < 1 {
        return Err(ProtocolError::EstimateBelowOne(k));
    }
    let k = k as usize;
    let mut count = vec![0usize; k + 1];
    for e in estimates {
        count[(e as usize).min(k)] += 1;
    }
    for i in (2..=k).rev() {
        count[i - 1] += count[i];
    }
    let mut i = k;
    while i > 1 && count[i] < i {
        i -= 1;
    }
    Ok(i as u32)
}

/// Protocol state of one node.
#[derive(Debug, Clone)]
pub struct NodeState {
    id: NodeId,
    core: u32,
    /// Latest estimate received per neighbor; absent means +infinity.
    est: HashMap<NodeId, u32>,
    changed: bool,
    /// Last value sent per neighbor; present only in optimized mode, where
    /// the send filter skips neighbors that already hold a value <= ours.
    sent_floor: Option<HashMap<NodeId, u32>>,
}

impl NodeState {
    /// Initialize node `u`: estimate starts at the degree and is announced
    /// to every neighbor. Isolated nodes start at 0 and stay silent.
    pub fn init(u: NodeId, g: &Graph, optimized: bool) -> (NodeState, Option<Message>) {
        let degree = g.degree(u) as u32;
        let mut sent_floor = optimized.then(HashMap::new);
        if let Some(floor) = &mut sent_floor {
            for &v in g.neighbors(u) {
                floor.insert(v, degree);
            }
        }
        let state = NodeState {
            id: u,
            core: degree,
            est: HashMap::new(),
            changed: false,
            sent_floor,
        };
        let message = (degree > 0).then_some(Message {
            sender: u,
            estimate: degree,
        });
        (state, message)
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn core(&self) -> u32 {
        self.core
    }

    pub fn estimate_of(&self, v: NodeId) -> u32 {
        self.est.get(&v).copied().unwrap_or(INFINITY)
    }

    /// Absorb one message. Stale values (>= the stored one) are ignored; a
    /// lower value triggers a recomputation of the local estimate.
    pub fn on_receive(&mut self, m: &Message, g: &Graph) -> Result<(), ProtocolError> {
        if g.neighbors(self.id).binary_search(&m.sender).is_err() {
            return Err(ProtocolError::NotANeighbor {
                receiver: self.id,
                sender: m.sender,
            });
        }
        if m.estimate >= self.estimate_of(m.sender) {
            return Ok(());
        }
        self.est.insert(m.sender, m.estimate);
        let neighbors = g.neighbors(self.id);
        let t = compute_index(
            neighbors.iter().map(|v| self.estimate_of(*v)),
            self.core,
        )?;
        if t < self.core {
            self.core = t;
            self.changed = true;
        }
        Ok(())
    }

    /// Unconditional broadcast of the current estimate to every neighbor,
    /// used for the round-1 announcement under schedules where deliveries
    /// may precede it. Clears the changed flag.
    pub fn broadcast_now(&mut self, g: &Graph) -> Option<(Message, Vec<NodeId>)> {
        self.changed = false;
        let recipients = g.neighbors(self.id).to_vec();
        if recipients.is_empty() {
            return None;
        }
        if let Some(floor) = &mut self.sent_floor {
            for v in &recipients {
                floor.insert(*v, self.core);
            }
        }
        Some((
            Message {
                sender: self.id,
                estimate: self.core,
            },
            recipients,
        ))
    }

    /// Per-round emission: if the estimate dropped since the last emission,
    /// announce it and clear the flag. In optimized mode the recipient list
    /// is filtered to neighbors for which the new value is news.
    pub fn round_emit(&mut self, g: &Graph) -> Option<(Message, Vec<NodeId>)> {
        if !self.changed {
            return None;
        }
        self.changed = false;
        let core = self.core;
        let recipients: Vec<NodeId> = match &mut self.sent_floor {
            None => g.neighbors(self.id).to_vec(),
            Some(floor) => {
                let est = &self.est;
                let picked: Vec<NodeId> = g
                    .neighbors(self.id)
                    .iter()
                    .copied()
                    .filter(|v| {
                        let known = est.get(v).copied().unwrap_or(INFINITY);
                        let sent = floor.get(v).copied().unwrap_or(INFINITY);
                        core < known.min(sent)
                    })
                    .collect();
                for v in &picked {
                    floor.insert(*v, core);
                }
                picked
            }
        };
        if recipients.is_empty() {
            return None;
        }
        Some((
            Message {
                sender: self.id,
                estimate: core,
            },
            recipients,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;

    /// Brute-force definition of the index: largest `i <= k` with at least
    /// `i` capped estimates `>= i`, floored at 1.
    pub(crate) fn compute_index_brute(estimates: &[u32], k: u32) -> u32 {
        (1..=k)
            .rev()
            .find(|&i| {
                estimates.iter().filter(|&&e| e.min(k) >= i).count() >= i as usize
            })
            .unwrap_or(1)
    }

    #[test]
    fn compute_index_example_round_one() {
        // Node 2 of the example graph after hearing 1's degree: est
        // {1:1, 3:inf, 4:inf}, degree 3, k 3.
        let got = compute_index(vec![1, INFINITY, INFINITY], 3).unwrap();
        assert_eq!(got, 2);
        assert_eq!(compute_index_brute(&[1, INFINITY, INFINITY], 3), 2);
    }

    #[test]
    fn compute_index_no_information() {
        for d in 1..6 {
            let est: Vec<u32> = vec![INFINITY; d as usize];
            assert_eq!(compute_index(est, d).unwrap(), d);
        }
    }

    #[test]
    fn compute_index_derived_cases() {
        assert_eq!(compute_index(vec![1, 1], 2).unwrap(), 1);
        assert_eq!(compute_index_brute(&[1, 1], 2), 1);
        assert_eq!(compute_index(vec![2, 2, 2], 3).unwrap(), 2);
        assert_eq!(compute_index_brute(&[2, 2, 2], 3), 2);
    }

    #[test]
    fn compute_index_rejects_zero_estimate() {
        assert_eq!(
            compute_index(vec![1], 0),
            Err(ProtocolError::EstimateBelowOne(0))
        );
    }

    #[test]
    fn init_broadcasts_degree() {
        let g = example_graph();
        let (s, m) = NodeState::init(0, &g, false);
        assert_eq!(s.core(), 1);
        assert_eq!(
            m,
            Some(Message {
                sender: 0,
                estimate: 1
            })
        );

        let isolated = crate::graph::Graph::from_edges(1, Vec::new());
        let (s, m) = NodeState::init(0, &isolated, false);
        assert_eq!(s.core(), 0);
        assert_eq!(m, None);

        let worst = crate::graph::gen_worst_case(12).unwrap();
        let (hub, _) = NodeState::init(11, &worst, false);
        assert_eq!(hub.core(), 10);
    }

    #[test]
    fn receive_lowers_estimate() {
        let g = example_graph();
        let (mut s, _) = NodeState::init(1, &g, false); // node 2, core 3
        s.on_receive(
            &Message {
                sender: 0,
                estimate: 1,
            },
            &g,
        )
        .unwrap();
        assert_eq!(s.core(), 2);
        assert!(s.changed);
    }

    #[test]
    fn stale_message_is_noop() {
        let g = example_graph();
        let (mut s, _) = NodeState::init(1, &g, false);
        s.on_receive(
            &Message {
                sender: 0,
                estimate: 1,
            },
            &g,
        )
        .unwrap();
        let snapshot = s.clone();
        s.on_receive(
            &Message {
                sender: 0,
                estimate: 5,
            },
            &g,
        )
        .unwrap();
        assert_eq!(s.core(), snapshot.core());
        assert_eq!(s.est, snapshot.est);
    }

    #[test]
    fn non_neighbor_is_error() {
        let g = example_graph();
        let (mut s, _) = NodeState::init(0, &g, false); // node 1, only neighbor is 2
        let err = s.on_receive(
            &Message {
                sender: 3,
                estimate: 1,
            },
            &g,
        );
        assert!(matches!(err, Err(ProtocolError::NotANeighbor { .. })));
    }

    #[test]
    fn replayed_round_two_for_node_three() {
        // Node 3 (id 2): neighbors 2, 4, 5 (ids 1, 3, 4). After the degree
        // round its estimates are all 3; the first value 2 drops it to 2.
        let g = example_graph();
        let (mut s, _) = NodeState::init(2, &g, false);
        for sender in [1, 3, 4] {
            s.on_receive(
                &Message {
                    sender,
                    estimate: 3,
                },
                &g,
            )
            .unwrap();
        }
        assert_eq!(s.core(), 3);
        s.on_receive(
            &Message {
                sender: 4,
                estimate: 2,
            },
            &g,
        )
        .unwrap();
        assert_eq!(s.core(), 2);
        assert_eq!(compute_index_brute(&[3, INFINITY, 2], 3), 2);
    }

    #[test]
    fn plain_emit_goes_to_all_neighbors() {
        let g = example_graph();
        let (mut s, _) = NodeState::init(1, &g, false);
        s.on_receive(
            &Message {
                sender: 0,
                estimate: 1,
            },
            &g,
        )
        .unwrap();
        let (m, recipients) = s.round_emit(&g).unwrap();
        assert_eq!(m.estimate, 2);
        assert_eq!(recipients, vec![0, 2, 3]);
        assert!(s.round_emit(&g).is_none()); // flag cleared
    }

    #[test]
    fn unchanged_node_emits_nothing() {
        let g = example_graph();
        let (mut s, _) = NodeState::init(0, &g, false);
        assert!(s.round_emit(&g).is_none());
    }

    #[test]
    fn optimized_emit_filters_known_neighbors() {
        // Node 3 (id 2) with core 2, est {2:2, 5:2}, node 4 unknown:
        // only node 4 might still care about the value 2.
        let g = example_graph();
        let (mut s, _) = NodeState::init(2, &g, true);
        s.sent_floor = Some(HashMap::new()); // ignore init floor for this replay
        s.on_receive(
            &Message {
                sender: 1,
                estimate: 2,
            },
            &g,
        )
        .unwrap();
        s.on_receive(
            &Message {
                sender: 4,
                estimate: 2,
            },
            &g,
        )
        .unwrap();
        assert_eq!(s.core(), 2);
        let (_, recipients) = s.round_emit(&g).unwrap();
        assert_eq!(recipients, vec![3]);
    }

    #[test]
    fn compute_index_matches_brute_force_exhaustively() {
        // All estimate vectors with degree <= 5 and values in {1..5, inf}.
        let values = [1u32, 2, 3, 4, 5, INFINITY];
        for degree in 1..=5usize {
            let mut stack = vec![Vec::new()];
            while let Some(prefix) = stack.pop() {
                if prefix.len() == degree {
                    for k in 1..=5u32 {
                        let fast = compute_index(prefix.iter().copied(), k).unwrap();
                        let brute = compute_index_brute(&prefix, k);
                        assert_eq!(fast, brute, "est {prefix:?} k {k}");
                    }
                    continue;
                }
                for &v in &values {
                    let mut next = prefix.clone();
                    next.push(v);
                    stack.push(next);
                }
            }
        }
    }
}

