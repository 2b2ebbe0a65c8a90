//! Running LOCAL algorithms under asynchronous, crash-prone wake-ups.
//!
//! Let `tau = t(N²)`. Each node `v` numbers its radius-`tau` ball in canonical
//! BFS order and hands out *local* identifiers `i + id(v)·N`; these never
//! collide across owners. The *virtual* identifier of a node `v` is the local
//! identifier it receives from `v*`, the node of `B(v, tau)` whose wake-up
//! reaches `v` first (earliest `time(u) + dist(u, v)`, ties broken by id).
//!
//! Virtual identifiers are injective and lie in `[0, N²)`. An awake node that
//! snapshots radius `3·tau` can compute them for its whole `tau`-ball, including
//! nodes that have not woken yet, and then run the LOCAL algorithm on that
//! ball as if the virtual identifiers were the real ones.

use std::collections::BTreeMap;

use crate::async_engine::{snapshot_set, AsyncAlgorithm, SnapshotView};
use crate::graph::{Ball, NodeIdx, PortGraph};
use crate::lcl::Label;
use crate::local_engine::{IdMap, LocalAlgorithm};
use crate::schedule::Schedule;
use crate::{Error, Result};

/// Local identifiers handed out by one node to the members of its ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalIdMap {
    owner_id: u64,
    assignment: BTreeMap<NodeIdx, u64>,
}

impl LocalIdMap {
    pub fn owner_id(&self) -> u64 {
        self.owner_id
    }

    pub fn get(&self, u: NodeIdx) -> Option<u64> {
        self.assignment.get(&u).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeIdx, u64)> + '_ {
        self.assignment.iter().map(|(&u, &x)| (u, x))
    }
}

/// `u_i -> i + owner_id·N` where `u_0, u_1, ...` is the ball's BFS order.
/// Needs nothing but the owner's identifier and the ball structure.
pub fn local_ids(owner_id: u64, ball: &Ball, n_bound: u64) -> LocalIdMap {
    let base = owner_id * n_bound;
    LocalIdMap {
        owner_id,
        assignment: ball
            .bfs_order()
            .into_iter()
            .enumerate()
            .map(|(i, u)| (u, base + i as u64))
            .collect(),
    }
}

/// A node competing to name another node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub node: NodeIdx,
    pub id: u64,
    pub wake: u32,
    /// Distance to the node being named.
    pub dist: u32,
}

/// The candidate minimizing `(wake + dist, id)` lexicographically.
pub fn elect_vstar<I: IntoIterator<Item = Candidate>>(candidates: I) -> Result<Candidate> {
    candidates
        .into_iter()
        .min_by_key(|c| (c.wake as u64 + c.dist as u64, c.id))
        .ok_or_else(|| Error::contract("cannot elect from an empty candidate set"))
}

/// Virtual identifier of `target`, computed by the observer of `view` from
/// its radius-`3·tau` snapshot alone.
///
/// Requires `dist(observer, target) <= tau`. The observer then belongs to
/// `S_target(tau, time(observer))`, so the candidate set is never empty.
pub fn virtual_id(target: NodeIdx, view: &SnapshotView, tau: u32, n_bound: u64) -> Result<u64> {
    let structure = view.structure();
    let d = structure
        .dist(target)
        .ok_or_else(|| Error::contract(format!("node {target} is outside the view")))?;
    if d > tau {
        return Err(Error::contract(format!(
            "node {target} is {d} hops away, beyond tau = {tau}"
        )));
    }
    if (view.radius() as u64) < 3 * tau as u64 {
        return Err(Error::contract(format!(
            "view radius {} is below 3·tau = {}",
            view.radius(),
            3 * tau as u64
        )));
    }
    let candidates = view.extract_set(target, tau, view.taken_at())?;
    let winner = elect_vstar(candidates.iter().map(|(node, e)| Candidate {
        node,
        id: e.id,
        wake: e.wake,
        dist: e.dist,
    }))?;
    // dist(observer, v*) <= 2·tau, so B(v*, tau) lies inside the view.
    let winner_ball = structure.sub_ball(winner.node, tau)?;
    local_ids(winner.id, &winner_ball, n_bound)
        .get(target)
        .ok_or_else(|| Error::contract("target missing from the elected node's ball"))
}

/// Virtual identifiers of every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualIdAssignment(Vec<u64>);

impl VirtualIdAssignment {
    pub fn get(&self, v: NodeIdx) -> u64 {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn is_injective(&self) -> bool {
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// Ground-truth virtual identifiers computed with global knowledge of the
/// graph and schedule, straight from the definition: find the least `theta`
/// with `S_v(tau, theta)` non-empty, elect over that set, and take the
/// winner's local identifier for `v`. A node whose `tau`-ball never wakes
/// gets `id(v)·N`.
pub fn compute_idvirt_global(g: &PortGraph, s: &Schedule, tau: u32, n_bound: u64) -> VirtualIdAssignment {
    let ids = (0..g.n())
        .map(|v| {
            let ball = g.ball(v, tau);
            if ball.nodes().all(|w| s.wake(w).round().is_none()) {
                return g.id(v) * n_bound;
            }
            let mut theta = 0u32;
            let set = loop {
                let set = snapshot_set(g, s, v, tau, theta);
                if !set.is_empty() {
                    break set;
                }
                theta += 1;
            };
            let winner = elect_vstar(set.iter().map(|(node, e)| Candidate {
                node,
                id: e.id,
                wake: e.wake,
                dist: e.dist,
            }))
            .expect("non-empty set");
            local_ids(winner.id, &g.ball(winner.node, tau), n_bound)
                .get(v)
                .expect("v is within tau of the winner")
        })
        .collect();
    VirtualIdAssignment(ids)
}

/// A LOCAL algorithm lifted to AsyncLocal: snapshot radius `3·t(N²)`, then
/// run the algorithm on the `t(N²)`-ball under virtual identifiers.
#[derive(Clone, Debug)]
pub struct Transformed<A> {
    inner: A,
    n_bound: u64,
    tau: u32,
}

impl<A: LocalAlgorithm> Transformed<A> {
    pub fn new(inner: A, n_bound: u64) -> Result<Self> {
        let squared = n_bound
            .checked_mul(n_bound)
            .ok_or_else(|| Error::Parameter(format!("N = {n_bound} is too large to square")))?;
        let tau = inner.round_bound(squared);
        Ok(Transformed { inner, n_bound, tau })
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }

    pub fn n_bound(&self) -> u64 {
        self.n_bound
    }

    /// `t(N²)`, the radius the inner algorithm runs on.
    pub fn tau(&self) -> u32 {
        self.tau
    }

    /// `3·t(N²)`, saturating.
    pub fn snapshot_radius(&self) -> u32 {
        self.tau.saturating_mul(3)
    }

    /// Virtual identifiers of all members of `B(observer, tau)`.
    pub fn virtual_ids(&self, view: &SnapshotView) -> Result<IdMap> {
        let ball = view.structure().sub_ball(view.observer(), self.tau)?;
        ball.nodes()
            .map(|u| Ok((u, virtual_id(u, view, self.tau, self.n_bound)?)))
            .collect()
    }
}

impl<A: LocalAlgorithm> AsyncAlgorithm for Transformed<A> {
    fn name(&self) -> String {
        format!("transform({})", self.inner.name())
    }

    fn radius(&self, id_bound: u64) -> u32 {
        if id_bound == self.n_bound {
            self.snapshot_radius()
        } else {
            self.inner
                .round_bound(id_bound.saturating_mul(id_bound))
                .saturating_mul(3)
        }
    }

    fn decide(&self, view: &SnapshotView, id_bound: u64) -> Result<Label> {
        if id_bound != self.n_bound {
            return Err(Error::contract(format!(
                "transformed for N = {}, run with N = {id_bound}",
                self.n_bound
            )));
        }
        let ids = self.virtual_ids(view)?;
        let ball = view.structure().sub_ball(view.observer(), self.tau)?;
        self.inner.decide(&ball, &ids, self.n_bound * self.n_bound)
    }
}
