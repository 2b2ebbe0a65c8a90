//! The DECOUPLED model: synchronous flooding routers under asynchronous,
//! crash-prone processes, and the adapter that runs an AsyncLocal algorithm
//! on top of it in symmetric graphs.
//!
//! Routers flood every copy they receive through every port except the one it
//! came in on, appending `(in_port, out_port)` to the route header; port 0 is
//! the process interface. A process announces `(id, wake round)` when it wakes,
//! waits `t` rounds, and then rebuilds the snapshot it would have obtained in
//! AsyncLocal from the announcements in its input buffer. Because the graph is
//! symmetric and known up to automorphism, the process lays its ball out on the
//! template graph rooted at a fixed node and places each origin by walking the
//! route header backwards from that root.

use std::collections::BTreeMap;
use std::fmt;

use crate::async_engine::{AsyncAlgorithm, NodeOutcome, Seen, SnapshotView};
use crate::graph::{self, NodeIdx, Port, PortGraph, Topology};
use crate::lcl::PartialLabeling;
use crate::local_engine::validate_id_assignment;
use crate::schedule::{Fate, Schedule, Wake};
use crate::{Error, Result};

/// Default cap on message copies in flight during one round.
pub const DEFAULT_MAX_IN_FLIGHT: usize = 1 << 22;

/// What a process floods when it wakes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Announcement {
    pub origin_id: u64,
    pub origin_wake: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub payload: Announcement,
    /// Round at which the origin router dequeued the announcement.
    pub emitted_at: u32,
    /// `(in_port, out_port)` at every router passed so far; one pair per hop.
    pub route: Vec<(Port, Port)>,
}

impl Message {
    pub fn hops(&self) -> usize {
        self.route.len()
    }
}

/// A copy that reached a process input buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub round: u32,
    /// Port of the receiving router the copy came in through.
    pub arrival_port: Port,
    pub message: Message,
}

/// One line of the delivery trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeliveryEvent {
    pub round: u32,
    pub from: NodeIdx,
    pub from_port: Port,
    pub to: NodeIdx,
    pub to_port: Port,
    pub origin_id: u64,
    pub emitted_at: u32,
    pub hops: usize,
}

impl fmt::Display for DeliveryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "round={} edge={}:{}->{}:{} origin={} emitted={} hops={}",
            self.round, self.from, self.from_port, self.to, self.to_port, self.origin_id, self.emitted_at, self.hops
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcessStatus {
    Asleep,
    Awake,
    Output,
    Crashed,
}

/// Routers, buffers and process status at the start of `round`.
#[derive(Clone, Debug)]
pub struct NetworkState<'g> {
    graph: &'g PortGraph,
    round: u32,
    /// Copies each router received last round, with their arrival port.
    in_flight: Vec<Vec<(Port, Message)>>,
    q_out: Vec<Vec<Announcement>>,
    q_in: Vec<Vec<Delivery>>,
    status: Vec<ProcessStatus>,
    max_in_flight: usize,
}

impl<'g> NetworkState<'g> {
    pub fn new(graph: &'g PortGraph) -> Self {
        let n = graph.n();
        NetworkState {
            graph,
            round: 0,
            in_flight: vec![Vec::new(); n],
            q_out: vec![Vec::new(); n],
            q_in: vec![Vec::new(); n],
            status: vec![ProcessStatus::Asleep; n],
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }

    pub fn with_max_in_flight(mut self, limit: usize) -> Self {
        self.max_in_flight = limit;
        self
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn q_in(&self, v: NodeIdx) -> &[Delivery] {
        &self.q_in[v]
    }

    pub fn status(&self, v: NodeIdx) -> ProcessStatus {
        self.status[v]
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.iter().map(Vec::len).sum()
    }

    /// Process `v` wakes and places its announcement in its output buffer.
    pub fn wake(&mut self, v: NodeIdx) {
        self.status[v] = ProcessStatus::Awake;
        self.q_out[v].push(Announcement {
            origin_id: self.graph.id(v),
            origin_wake: self.round,
        });
    }

    pub fn set_status(&mut self, v: NodeIdx, status: ProcessStatus) {
        self.status[v] = status;
    }

    /// Advances one round. Routers package their process's output buffer into
    /// fresh messages (in-port 0) and forward every copy received last round
    /// on all other ports. Copies land in the neighbors' input buffers at the
    /// end of the round, stamped with the next round number.
    pub fn flood_round(&mut self, mut trace: Option<&mut Vec<DeliveryEvent>>) -> Result<()> {
        let g = self.graph;
        let now = self.round;
        let mut next: Vec<Vec<(Port, Message)>> = vec![Vec::new(); g.n()];
        let mut sent = 0usize;
        for v in 0..g.n() {
            let fresh = self.q_out[v].drain(..).map(|a| {
                (
                    0,
                    Message {
                        payload: a,
                        emitted_at: now,
                        route: Vec::new(),
                    },
                )
            });
            let relayed = std::mem::take(&mut self.in_flight[v]);
            for (in_port, msg) in fresh.collect::<Vec<_>>().into_iter().chain(relayed) {
                for link in g.links(v).iter().filter(|l| l.port != in_port) {
                    let mut copy = msg.clone();
                    copy.route.push((in_port, link.port));
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(DeliveryEvent {
                            round: now + 1,
                            from: v,
                            from_port: link.port,
                            to: link.neighbor,
                            to_port: link.remote_port,
                            origin_id: copy.payload.origin_id,
                            emitted_at: copy.emitted_at,
                            hops: copy.hops(),
                        });
                    }
                    self.q_in[link.neighbor].push(Delivery {
                        round: now + 1,
                        arrival_port: link.remote_port,
                        message: copy.clone(),
                    });
                    next[link.neighbor].push((link.remote_port, copy));
                    sent += 1;
                    if sent > self.max_in_flight {
                        return Err(Error::SizeLimit {
                            what: "message copies in flight",
                            count: sent as u128,
                            limit: self.max_in_flight as u128,
                        });
                    }
                }
            }
        }
        self.in_flight = next;
        self.round += 1;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DecoupledConfig {
    /// Verify that the first copy from `w` reaches `v` at `time(w) + dist(v, w)`.
    pub check_arrival_timing: bool,
    pub record_trace: bool,
    pub max_in_flight: usize,
}

impl Default for DecoupledConfig {
    fn default() -> Self {
        DecoupledConfig {
            check_arrival_timing: true,
            record_trace: false,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecoupledRun {
    pub outcomes: Vec<NodeOutcome>,
    pub trace: Vec<DeliveryEvent>,
    /// Copies delivered to process input buffers.
    pub deliveries: usize,
    /// Announcements emitted by waking processes.
    pub announcements: usize,
    /// Origins heard by some process from beyond its snapshot radius; the
    /// adapter discards them.
    pub far_receipts: usize,
    /// Rounds simulated.
    pub rounds: u32,
}

impl DecoupledRun {
    pub fn labeling(&self) -> PartialLabeling {
        crate::async_engine::outcomes_to_labeling(&self.outcomes)
    }
}

/// Node the adapter roots every process's template ball at.
const TEMPLATE_ROOT: NodeIdx = 0;

fn require_symmetric(g: &PortGraph) -> Result<()> {
    let symmetric = match g.topology() {
        Topology::Ring | Topology::Torus { .. } => true,
        Topology::General => g.is_oriented_ring() || graph::is_symmetric(g)?,
    };
    if symmetric {
        Ok(())
    } else {
        Err(Error::contract("the DECOUPLED adapter needs a port-symmetric graph"))
    }
}

pub fn run_decoupled<A: AsyncAlgorithm + ?Sized>(
    g: &PortGraph,
    s: &Schedule,
    algo: &A,
    id_bound: u64,
) -> Result<PartialLabeling> {
    Ok(execute_decoupled(g, s, algo, id_bound, &DecoupledConfig::default())?.labeling())
}

/// Simulates the DECOUPLED execution of `algo` until round
/// `max wake + t + 1`, after which no process has anything left to read.
pub fn execute_decoupled<A: AsyncAlgorithm + ?Sized>(
    g: &PortGraph,
    s: &Schedule,
    algo: &A,
    id_bound: u64,
    config: &DecoupledConfig,
) -> Result<DecoupledRun> {
    if s.n() != g.n() {
        return Err(Error::contract(format!(
            "schedule covers {} nodes, graph has {}",
            s.n(),
            g.n()
        )));
    }
    validate_id_assignment(g.n(), g.ids(), id_bound)?;
    require_symmetric(g)?;

    let n = g.n();
    let t = algo.radius(id_bound);
    let template_ball = g.ball(TEMPLATE_ROOT, t);
    let node_of_id: BTreeMap<u64, NodeIdx> = (0..n).map(|v| (g.id(v), v)).collect();
    let dist: Vec<Vec<Option<u32>>> = if config.check_arrival_timing {
        (0..n).map(|v| g.distances_from(v)).collect()
    } else {
        Vec::new()
    };

    let mut run = DecoupledRun {
        outcomes: (0..n)
            .map(|v| NodeOutcome {
                node: v,
                id: g.id(v),
                wake: s.wake(v),
                fate: s.fate(v),
                visible: None,
                output: None,
            })
            .collect(),
        trace: Vec::new(),
        deliveries: 0,
        announcements: 0,
        far_receipts: 0,
        rounds: 0,
    };
    let Some(max_wake) = s.max_wake() else {
        return Ok(run);
    };
    let horizon = max_wake as u64 + t as u64 + 1;
    let horizon = u32::try_from(horizon).map_err(|_| Error::Parameter("round horizon overflows".into()))?;

    let mut net = NetworkState::new(g).with_max_in_flight(config.max_in_flight);
    // first_arrival[v][w]: round the announcement of w first reached v
    let mut first_arrival: Vec<BTreeMap<NodeIdx, u32>> = vec![BTreeMap::new(); n];
    let mut checked = vec![0usize; n];

    while net.round() < horizon {
        let r = net.round();
        for v in (0..n).filter(|&v| s.wake(v) == Wake::At(r)) {
            net.wake(v);
            run.announcements += 1;
        }
        for v in (0..n).filter(|&v| s.wake(v).round().map(|w| w as u64 + t as u64) == Some(r as u64)) {
            let (view, far) = rebuild_view(g, &template_ball, net.q_in(v), g.id(v), r - t, t)?;
            run.far_receipts += far;
            run.outcomes[v].visible = Some(view.visible().len());
            if s.fate(v) == Fate::Correct {
                run.outcomes[v].output = Some(algo.decide(&view, id_bound)?);
                net.set_status(v, ProcessStatus::Output);
            } else {
                net.set_status(v, ProcessStatus::Crashed);
            }
        }
        net.flood_round(config.record_trace.then_some(&mut run.trace))?;

        if config.check_arrival_timing {
            for v in 0..n {
                for d in &net.q_in(v)[checked[v]..] {
                    let w = node_of_id[&d.message.payload.origin_id];
                    if w == v || first_arrival[v].contains_key(&w) {
                        continue;
                    }
                    first_arrival[v].insert(w, d.round);
                    let expected = d.message.payload.origin_wake + dist[v][w].expect("connected");
                    if d.round != expected {
                        return Err(Error::contract(format!(
                            "announcement of node {w} first reached node {v} at round {}, expected {expected}",
                            d.round
                        )));
                    }
                }
                checked[v] = net.q_in(v).len();
            }
        }
    }
    run.deliveries = (0..n).map(|v| net.q_in(v).len()).sum();
    run.rounds = net.round();
    Ok(run)
}

/// Rebuilds the AsyncLocal snapshot of a process with identifier `own_id`
/// that woke at `woke` and reads its buffer `t` rounds later. Returns the
/// view in template coordinates and the number of distinct origins heard
/// from beyond distance `t`.
fn rebuild_view(
    template: &PortGraph,
    template_ball: &graph::Ball,
    q_in: &[Delivery],
    own_id: u64,
    woke: u32,
    t: u32,
) -> Result<(SnapshotView, usize)> {
    let deadline = woke as u64 + t as u64;
    // origin id -> (template node, min hops, wake)
    let mut heard: BTreeMap<u64, (NodeIdx, usize, u32)> = BTreeMap::new();
    for d in q_in.iter().filter(|d| d.round as u64 <= deadline) {
        let payload = d.message.payload;
        if payload.origin_id == own_id {
            continue;
        }
        let at = trace_back(template, d)?;
        let hops = d.message.hops();
        let entry = heard.entry(payload.origin_id).or_insert((at, hops, payload.origin_wake));
        if entry.0 != at && hops <= template.n() {
            // Two short routes naming different places: the template is not
            // the network's shape.
            return Err(Error::contract(format!(
                "origin {} placed at template nodes {} and {at}",
                payload.origin_id, entry.0
            )));
        }
        if hops < entry.1 {
            *entry = (at, hops, payload.origin_wake);
        }
    }

    let mut visible = BTreeMap::from([(
        TEMPLATE_ROOT,
        Seen {
            id: own_id,
            wake: woke,
        },
    )]);
    let mut far = 0;
    for (&id, &(at, hops, wake)) in &heard {
        if hops as u64 > t as u64 {
            far += 1;
            continue;
        }
        let placed = template_ball.dist(at);
        if placed != Some(hops as u32) {
            return Err(Error::contract(format!(
                "origin {id} arrived after {hops} hops but sits at distance {placed:?}"
            )));
        }
        visible.insert(at, Seen { id, wake });
    }
    Ok((SnapshotView::from_parts(woke, template_ball.clone(), visible)?, far))
}

/// Walks a delivered copy's route header backwards from the template root and
/// returns the template node it originated from.
fn trace_back(template: &PortGraph, d: &Delivery) -> Result<NodeIdx> {
    let mut at = TEMPLATE_ROOT;
    let mut in_port = d.arrival_port;
    for &(prev_in, out) in d.message.route.iter().rev() {
        let link = template
            .neighbor_via(at, in_port)
            .filter(|l| l.remote_port == out)
            .ok_or_else(|| Error::contract("route header does not fit the template graph"))?;
        at = link.neighbor;
        in_port = prev_in;
    }
    if in_port != 0 {
        return Err(Error::contract("route header does not start at a process"));
    }
    Ok(at)
}
