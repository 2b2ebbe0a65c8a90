//! Reference executor for the synchronous LOCAL model.
//!
//! A `t`-round LOCAL algorithm is written in its collected-ball normal form:
//! every node gathers its radius-`t` ball with the identifiers in it, then
//! applies a pure rule. No message-level simulation happens here.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::graph::{Ball, NodeIdx, PortGraph};
use crate::lcl::Label;
use crate::{par, Error, Result};

/// Identifier of every member of a ball.
pub type IdMap = BTreeMap<NodeIdx, u64>;

pub trait LocalAlgorithm: Send + Sync {
    fn name(&self) -> String;

    /// Rounds `t(N)` needed when identifiers are below `id_bound = N`.
    fn round_bound(&self, id_bound: u64) -> u32;

    /// Output of the ball's center. `ball` has radius `round_bound(id_bound)`
    /// and `ids` covers all of its members.
    fn decide(&self, ball: &Ball, ids: &IdMap, id_bound: u64) -> Result<Label>;
}

impl<A: LocalAlgorithm + ?Sized> LocalAlgorithm for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn round_bound(&self, id_bound: u64) -> u32 {
        (**self).round_bound(id_bound)
    }
    fn decide(&self, ball: &Ball, ids: &IdMap, id_bound: u64) -> Result<Label> {
        (**self).decide(ball, ids, id_bound)
    }
}

impl<A: LocalAlgorithm + ?Sized> LocalAlgorithm for Arc<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn round_bound(&self, id_bound: u64) -> u32 {
        (**self).round_bound(id_bound)
    }
    fn decide(&self, ball: &Ball, ids: &IdMap, id_bound: u64) -> Result<Label> {
        (**self).decide(ball, ids, id_bound)
    }
}

/// Checks that `ids` are distinct, below `id_bound`, and that `id_bound >= n`.
pub fn validate_id_assignment(n: usize, ids: &[u64], id_bound: u64) -> Result<()> {
    if ids.len() != n {
        return Err(Error::contract(format!("{} ids for {n} nodes", ids.len())));
    }
    if (n as u64) > id_bound {
        return Err(Error::contract(format!("id bound {id_bound} is below n = {n}")));
    }
    let mut seen = BTreeSet::new();
    for &id in ids {
        if id >= id_bound {
            return Err(Error::contract(format!("id {id} is not below {id_bound}")));
        }
        if !seen.insert(id) {
            return Err(Error::contract(format!("duplicate id {id}")));
        }
    }
    Ok(())
}

/// Runs `algo` at every node with identifiers `ids` (indexed by node) in
/// `[0, id_bound)`. The graph's own identifiers are ignored.
pub fn run_local<A: LocalAlgorithm + ?Sized>(
    g: &PortGraph,
    algo: &A,
    id_bound: u64,
    ids: &[u64],
) -> Result<Vec<Label>> {
    validate_id_assignment(g.n(), ids, id_bound)?;
    let t = algo.round_bound(id_bound);
    par::try_map_indices(g.n(), |v| {
        let ball = g.ball(v, t);
        let ball_ids: IdMap = ball.nodes().map(|u| (u, ids[u])).collect();
        algo.decide(&ball, &ball_ids, id_bound)
    })
}
