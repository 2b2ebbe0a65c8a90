//! The AsyncLocal model.
//!
//! A process wakes at round `time(v)` and immediately performs one atomic
//! `snapshot(t)`. The snapshot returns the whole structure of `B(v, t)`, but
//! identifiers and wake rounds only of the members `w` with
//! `time(w) + dist(v, w) <= time(v) + t`. The process then computes its output
//! from the snapshot alone, or crashes first.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{Ball, NodeIdx, PortGraph};
use crate::lcl::{Label, PartialLabeling};
use crate::local_engine::validate_id_assignment;
use crate::schedule::{Fate, Schedule, Wake};
use crate::{par, Error, Result};

/// Identifier and wake round of a node that a snapshot can see.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seen {
    pub id: u64,
    pub wake: u32,
}

/// Result of `snapshot(t)` taken by `observer` at its wake round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotView {
    observer: NodeIdx,
    taken_at: u32,
    structure: Ball,
    visible: BTreeMap<NodeIdx, Seen>,
}

impl SnapshotView {
    /// Assembles a view from its parts. The engines build views through
    /// [`snapshot`]; this exists for engines that reconstruct a view from
    /// other information, such as the DECOUPLED adapter.
    pub fn from_parts(taken_at: u32, structure: Ball, visible: BTreeMap<NodeIdx, Seen>) -> Result<Self> {
        if let Some(u) = visible.keys().find(|u| !structure.contains(**u)) {
            return Err(Error::contract(format!("visible node {u} is outside the snapshot ball")));
        }
        match visible.get(&structure.center()) {
            Some(seen) if seen.wake == taken_at => {}
            _ => return Err(Error::contract("the observer must see itself at its wake round")),
        }
        Ok(SnapshotView {
            observer: structure.center(),
            taken_at,
            structure,
            visible,
        })
    }

    pub fn observer(&self) -> NodeIdx {
        self.observer
    }

    pub fn taken_at(&self) -> u32 {
        self.taken_at
    }

    pub fn radius(&self) -> u32 {
        self.structure.radius()
    }

    pub fn structure(&self) -> &Ball {
        &self.structure
    }

    pub fn visible(&self) -> &BTreeMap<NodeIdx, Seen> {
        &self.visible
    }

    pub fn seen(&self, u: NodeIdx) -> Option<Seen> {
        self.visible.get(&u).copied()
    }

    /// Recovers `S_target(rho, theta)` from this view.
    ///
    /// Exact whenever `d + rho <= t` and `d + rho + theta <= taken_at + t`,
    /// where `d` is the distance from the observer to `target` and `t` the
    /// view radius: every member of the set is then visible in the view.
    pub fn extract_set(&self, target: NodeIdx, rho: u32, theta: u32) -> Result<SnapshotSet> {
        let d = self
            .structure
            .dist(target)
            .ok_or_else(|| Error::contract(format!("node {target} is outside the view")))?;
        let t = self.radius();
        if d as u64 + rho as u64 > t as u64 || d as u64 + rho as u64 + theta as u64 > self.taken_at as u64 + t as u64 {
            return Err(Error::contract(format!(
                "S_{target}({rho}, {theta}) is not determined by a radius-{t} view taken at {}",
                self.taken_at
            )));
        }
        let around = self.structure.sub_ball(target, rho)?;
        let entries = around
            .members()
            .filter_map(|(w, dist)| {
                let seen = self.visible.get(&w)?;
                (seen.wake as u64 + dist as u64 <= rho as u64 + theta as u64).then_some((
                    w,
                    SetEntry {
                        id: seen.id,
                        wake: seen.wake,
                        dist,
                    },
                ))
            })
            .collect();
        Ok(SnapshotSet(entries))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SetEntry {
    pub id: u64,
    pub wake: u32,
    /// Distance to the node the set is taken around.
    pub dist: u32,
}

/// A snapshot set `S_v(rho, theta)`, keyed by node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SnapshotSet(BTreeMap<NodeIdx, SetEntry>);

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, u: NodeIdx) -> bool {
        self.0.contains_key(&u)
    }

    pub fn get(&self, u: NodeIdx) -> Option<SetEntry> {
        self.0.get(&u).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeIdx, SetEntry)> + '_ {
        self.0.iter().map(|(&u, &e)| (u, e))
    }

    pub fn is_subset(&self, other: &SnapshotSet) -> bool {
        self.0.keys().all(|u| other.0.contains_key(u))
    }
}

/// `S_v(rho, theta) = { w : dist(v, w) <= rho, w wakes, time(w) + dist(v, w) <= rho + theta }`.
///
/// Defined for every `v`, whether or not `v` itself ever wakes.
pub fn snapshot_set(g: &PortGraph, s: &Schedule, v: NodeIdx, rho: u32, theta: u32) -> SnapshotSet {
    let ball = g.ball(v, rho);
    let limit = rho as u64 + theta as u64;
    SnapshotSet(
        ball.members()
            .filter_map(|(w, dist)| {
                let wake = s.wake(w).round()?;
                (wake as u64 + dist as u64 <= limit).then_some((
                    w,
                    SetEntry {
                        id: g.id(w),
                        wake,
                        dist,
                    },
                ))
            })
            .collect(),
    )
}

/// `snapshot(t)` performed by `v` at its wake round.
pub fn snapshot(g: &PortGraph, s: &Schedule, v: NodeIdx, t: u32) -> Result<SnapshotView> {
    let taken_at = s
        .wake(v)
        .round()
        .ok_or_else(|| Error::contract(format!("node {v} never wakes and takes no snapshot")))?;
    let structure = g.ball(v, t);
    let limit = taken_at as u64 + t as u64;
    let visible = structure
        .members()
        .filter_map(|(w, dist)| {
            let wake = s.wake(w).round()?;
            (wake as u64 + dist as u64 <= limit).then_some((w, Seen { id: g.id(w), wake }))
        })
        .collect();
    Ok(SnapshotView {
        observer: v,
        taken_at,
        structure,
        visible,
    })
}

/// A two-phase AsyncLocal algorithm: snapshot radius plus a pure rule on the
/// snapshot.
pub trait AsyncAlgorithm: Send + Sync {
    fn name(&self) -> String;

    /// Snapshot radius when identifiers are below `id_bound`.
    fn radius(&self, id_bound: u64) -> u32;

    fn decide(&self, view: &SnapshotView, id_bound: u64) -> Result<Label>;
}

impl<A: AsyncAlgorithm + ?Sized> AsyncAlgorithm for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn radius(&self, id_bound: u64) -> u32 {
        (**self).radius(id_bound)
    }
    fn decide(&self, view: &SnapshotView, id_bound: u64) -> Result<Label> {
        (**self).decide(view, id_bound)
    }
}

/// Per-node record of an execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeOutcome {
    pub node: NodeIdx,
    pub id: u64,
    pub wake: Wake,
    pub fate: Fate,
    /// Number of visible nodes in the node's snapshot, if it took one.
    pub visible: Option<usize>,
    pub output: Option<Label>,
}

pub fn outcomes_to_labeling(outcomes: &[NodeOutcome]) -> PartialLabeling {
    PartialLabeling::new(outcomes.iter().map(|o| o.output).collect())
}

/// Runs `algo` under schedule `s` and reports every node's outcome.
pub fn execute_async<A: AsyncAlgorithm + ?Sized>(
    g: &PortGraph,
    s: &Schedule,
    algo: &A,
    id_bound: u64,
) -> Result<Vec<NodeOutcome>> {
    if s.n() != g.n() {
        return Err(Error::contract(format!(
            "schedule covers {} nodes, graph has {}",
            s.n(),
            g.n()
        )));
    }
    validate_id_assignment(g.n(), g.ids(), id_bound)?;
    let t = algo.radius(id_bound);
    par::try_map_indices(g.n(), |v| {
        let mut outcome = NodeOutcome {
            node: v,
            id: g.id(v),
            wake: s.wake(v),
            fate: s.fate(v),
            visible: None,
            output: None,
        };
        if s.wake(v) == Wake::Never {
            return Ok(outcome);
        }
        let view = snapshot(g, s, v, t)?;
        outcome.visible = Some(view.visible.len());
        if s.fate(v) == Fate::Correct {
            outcome.output = Some(algo.decide(&view, id_bound)?);
        }
        Ok(outcome)
    })
}

/// Runs `algo` under schedule `s`; never-woken and crashed nodes stay
/// unlabeled.
pub fn run_async<A: AsyncAlgorithm + ?Sized>(
    g: &PortGraph,
    s: &Schedule,
    algo: &A,
    id_bound: u64,
) -> Result<PartialLabeling> {
    Ok(outcomes_to_labeling(&execute_async(g, s, algo, id_bound)?))
}

/// Diagnostic algorithm whose output fingerprints everything in the snapshot:
/// the ball structure in canonical BFS order with ports, the visible ids and
/// wake rounds, and the snapshot round. Two views get the same label (up to
/// hash collisions) iff they are the same up to renaming node handles. Used to
/// compare engines that must deliver identical snapshots.
#[derive(Clone, Copy, Debug)]
pub struct ViewDigest {
    pub radius: u32,
}

impl AsyncAlgorithm for ViewDigest {
    fn name(&self) -> String {
        format!("digest:{}", self.radius)
    }

    fn radius(&self, _: u64) -> u32 {
        self.radius
    }

    fn decide(&self, view: &SnapshotView, _: u64) -> Result<Label> {
        let ball = view.structure();
        let order = ball.bfs_order();
        let pos: BTreeMap<NodeIdx, u64> = order.iter().enumerate().map(|(i, &u)| (u, i as u64)).collect();
        let mut h = Fnv32::new();
        h.word(view.taken_at() as u64);
        for &u in &order {
            h.word(ball.dist(u).unwrap() as u64);
            h.word(ball.degree(u).unwrap() as u64);
            for l in ball.links(u) {
                h.word(l.port as u64);
                h.word(pos[&l.neighbor]);
                h.word(l.remote_port as u64);
            }
            match view.seen(u) {
                Some(seen) => {
                    h.word(1);
                    h.word(seen.id);
                    h.word(seen.wake as u64);
                }
                None => h.word(0),
            }
        }
        Ok(Label(h.finish()))
    }
}

/// 32-bit FNV-1a over little-endian words.
struct Fnv32(u32);

impl Fnv32 {
    fn new() -> Self {
        Fnv32(0x811c_9dc5)
    }

    fn word(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u32;
            self.0 = self.0.wrapping_mul(0x0100_0193);
        }
    }

    fn finish(&self) -> u32 {
        self.0
    }
}
