//! Port-numbered graphs, balls, and the canonical port-ordered BFS.
//!
//! Node indices ([`NodeIdx`]) are simulator handles. Algorithms only ever see
//! identifiers, ports and distances; the indices exist so that the engines can
//! refer to nodes without leaking anything about them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type NodeIdx = usize;
/// Port numbers are `1..=deg(v)`. Port 0 is reserved for the router/process
/// interface in the DECOUPLED model and never labels an edge.
pub type Port = u32;

/// Largest graph accepted by [`is_symmetric`] unless a limit is passed.
pub const DEFAULT_SYMMETRY_LIMIT: usize = 12;

/// One endpoint's view of an incident edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub port: Port,
    pub neighbor: NodeIdx,
    /// Port number of the same edge at `neighbor`.
    pub remote_port: Port,
}

/// An undirected edge with the port at each endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: NodeIdx,
    pub port_u: Port,
    pub v: NodeIdx,
    pub port_v: Port,
}

/// How a graph was built. Constructors that guarantee a port-symmetric graph
/// record it here so callers can skip the brute-force symmetry search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Ring,
    Torus { rows: usize, cols: usize },
    General,
}

/// A simple connected graph with distinct identifiers in `[0, id_bound)` and
/// port numbers `1..=deg(v)` at every node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct PortGraph {
    id_bound: u64,
    ids: Vec<u64>,
    /// Sorted by port, so index `p - 1` holds port `p`.
    adj: Vec<Vec<Link>>,
    topology: Topology,
}

/// JSON layout: `{ "n": 3, "N": 3, "ids": [..], "edges": [[u, pu, v, pv], ..] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    #[serde(rename = "N")]
    id_bound: u64,
    ids: Vec<u64>,
    edges: Vec<[u64; 4]>,
}

impl TryFrom<GraphFile> for PortGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        if f.n != f.ids.len() {
            return Err(Error::InvalidTopology(format!(
                "n = {} but {} ids given",
                f.n,
                f.ids.len()
            )));
        }
        let edges = f
            .edges
            .iter()
            .map(|&[u, pu, v, pv]| {
                let port = |p: u64| {
                    Port::try_from(p).map_err(|_| Error::InvalidTopology(format!("port {p} out of range")))
                };
                Ok(Edge {
                    u: u as NodeIdx,
                    port_u: port(pu)?,
                    v: v as NodeIdx,
                    port_v: port(pv)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PortGraph::new(f.id_bound, f.ids, &edges)
    }
}

impl From<PortGraph> for GraphFile {
    fn from(g: PortGraph) -> Self {
        GraphFile {
            n: g.n(),
            id_bound: g.id_bound,
            edges: g
                .edges()
                .into_iter()
                .map(|e| [e.u as u64, e.port_u as u64, e.v as u64, e.port_v as u64])
                .collect(),
            ids: g.ids,
        }
    }
}

impl PortGraph {
    /// Builds and validates a graph from an edge list.
    pub fn new(id_bound: u64, ids: Vec<u64>, edges: &[Edge]) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::InvalidTopology("graph has no nodes".into()));
        }
        validate_ids(&ids, id_bound)?;

        let mut adj: Vec<Vec<Link>> = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for e in edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidTopology(format!("edge {e:?} names a missing node")));
            }
            if e.u == e.v {
                return Err(Error::InvalidTopology(format!("self-loop at node {}", e.u)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidTopology(format!("parallel edge {}-{}", e.u, e.v)));
            }
            adj[e.u].push(Link {
                port: e.port_u,
                neighbor: e.v,
                remote_port: e.port_v,
            });
            adj[e.v].push(Link {
                port: e.port_v,
                neighbor: e.u,
                remote_port: e.port_u,
            });
        }
        for (v, links) in adj.iter_mut().enumerate() {
            links.sort();
            for (i, l) in links.iter().enumerate() {
                if l.port as usize != i + 1 {
                    return Err(Error::InvalidTopology(format!(
                        "ports at node {v} are not exactly 1..={}",
                        links.len()
                    )));
                }
            }
        }
        let g = PortGraph {
            id_bound,
            ids,
            adj,
            topology: Topology::General,
        };
        if g.distances_from(0).iter().any(Option::is_none) {
            return Err(Error::InvalidTopology("graph is not connected".into()));
        }
        Ok(g)
    }

    /// Oriented ring over `ids.len()` nodes: node `i` reaches `i+1` through
    /// port 1 (clockwise) and `i-1` through port 2 (counterclockwise).
    pub fn ring(ids: Vec<u64>, id_bound: u64) -> Result<Self> {
        let n = ids.len();
        if n < 3 {
            return Err(Error::InvalidTopology(format!("a ring needs at least 3 nodes, got {n}")));
        }
        let edges: Vec<Edge> = (0..n)
            .map(|i| Edge {
                u: i,
                port_u: 1,
                v: (i + 1) % n,
                port_v: 2,
            })
            .collect();
        let mut g = PortGraph::new(id_bound, ids, &edges)?;
        g.topology = Topology::Ring;
        Ok(g)
    }

    /// Torus with node `r * cols + c` at row `r`, column `c`. Ports 1 and 2
    /// move along the row (increasing, decreasing column), ports 3 and 4 along
    /// the column (increasing, decreasing row).
    pub fn torus(rows: usize, cols: usize, ids: Vec<u64>, id_bound: u64) -> Result<Self> {
        if rows < 3 || cols < 3 {
            return Err(Error::InvalidTopology(format!(
                "a simple torus needs at least 3x3, got {rows}x{cols}"
            )));
        }
        if ids.len() != rows * cols {
            return Err(Error::InvalidIds(format!(
                "{}x{} torus needs {} ids, got {}",
                rows,
                cols,
                rows * cols,
                ids.len()
            )));
        }
        let at = |r: usize, c: usize| (r % rows) * cols + (c % cols);
        let mut edges = Vec::with_capacity(2 * rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                edges.push(Edge {
                    u: at(r, c),
                    port_u: 1,
                    v: at(r, c + 1),
                    port_v: 2,
                });
                edges.push(Edge {
                    u: at(r, c),
                    port_u: 3,
                    v: at(r + 1, c),
                    port_v: 4,
                });
            }
        }
        let mut g = PortGraph::new(id_bound, ids, &edges)?;
        g.topology = Topology::Torus { rows, cols };
        Ok(g)
    }

    /// Path `0 - 1 - ... - n-1`. Inner nodes use port 1 towards the lower
    /// index; the last node's only port points back.
    pub fn path(ids: Vec<u64>, id_bound: u64) -> Result<Self> {
        let n = ids.len();
        let edges: Vec<Edge> = (1..n)
            .map(|i| Edge {
                u: i - 1,
                port_u: if i == 1 { 1 } else { 2 },
                v: i,
                port_v: 1,
            })
            .collect();
        PortGraph::new(id_bound, ids, &edges)
    }

    /// Random connected graph: a random spanning tree plus `extra_edges`
    /// random chords (fewer if the graph saturates), random distinct ids in
    /// `[0, id_bound)`, and a random port permutation at every node.
    pub fn random_connected<R: Rng + ?Sized>(
        n: usize,
        extra_edges: usize,
        id_bound: u64,
        rng: &mut R,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology("graph has no nodes".into()));
        }
        if (n as u64) > id_bound {
            return Err(Error::InvalidIds(format!("id bound {id_bound} is below n = {n}")));
        }
        let mut pairs = BTreeSet::new();
        for v in 1..n {
            let u = rng.random_range(0..v);
            pairs.insert((u, v));
        }
        let max_edges = n * (n - 1) / 2;
        let target = (pairs.len() + extra_edges).min(max_edges);
        while pairs.len() < target {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                pairs.insert((u.min(v), u.max(v)));
            }
        }
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        let pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        for (k, &(u, v)) in pairs.iter().enumerate() {
            incident[u].push(k);
            incident[v].push(k);
        }
        // port_of[node][edge] after shuffling each node's incident edges
        let mut port_of: Vec<BTreeMap<usize, Port>> = vec![BTreeMap::new(); n];
        for (v, inc) in incident.iter_mut().enumerate() {
            inc.shuffle(rng);
            for (i, &k) in inc.iter().enumerate() {
                port_of[v].insert(k, i as Port + 1);
            }
        }
        let edges: Vec<Edge> = pairs
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| Edge {
                u,
                port_u: port_of[u][&k],
                v,
                port_v: port_of[v][&k],
            })
            .collect();
        let ids: Vec<u64> = sample(rng, id_bound as usize, n)
            .into_iter()
            .map(|x| x as u64)
            .collect();
        PortGraph::new(id_bound, ids, &edges)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn id_bound(&self) -> u64 {
        self.id_bound
    }

    pub fn id(&self, v: NodeIdx) -> u64 {
        self.ids[v]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn links(&self, v: NodeIdx) -> &[Link] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeIdx) -> usize {
        self.adj[v].len()
    }

    pub fn neighbor_via(&self, v: NodeIdx, port: Port) -> Option<Link> {
        port.checked_sub(1)
            .and_then(|i| self.adj[v].get(i as usize))
            .copied()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Every edge once, as seen from its lower-indexed endpoint.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (u, links) in self.adj.iter().enumerate() {
            for l in links.iter().filter(|l| u < l.neighbor) {
                out.push(Edge {
                    u,
                    port_u: l.port,
                    v: l.neighbor,
                    port_v: l.remote_port,
                });
            }
        }
        out
    }

    /// Returns a copy of the graph with different identifiers.
    pub fn with_ids(&self, ids: Vec<u64>, id_bound: u64) -> Result<Self> {
        if ids.len() != self.n() {
            return Err(Error::InvalidIds(format!("expected {} ids, got {}", self.n(), ids.len())));
        }
        validate_ids(&ids, id_bound)?;
        Ok(PortGraph {
            id_bound,
            ids,
            adj: self.adj.clone(),
            topology: self.topology,
        })
    }

    /// Single-source BFS distances over the whole graph.
    pub fn distances_from(&self, v: NodeIdx) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n()];
        dist[v] = Some(0);
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap();
            for l in &self.adj[x] {
                if dist[l.neighbor].is_none() {
                    dist[l.neighbor] = Some(d + 1);
                    queue.push_back(l.neighbor);
                }
            }
        }
        dist
    }

    pub fn distance(&self, v: NodeIdx, w: NodeIdx) -> u32 {
        self.distances_from(v)[w].expect("graph is connected")
    }

    /// The radius-`t` ball around `v`: every node within distance `t`, the
    /// edges between them, and their distance from `v` measured in the graph.
    pub fn ball(&self, v: NodeIdx, t: u32) -> Ball {
        let mut dist = BTreeMap::new();
        dist.insert(v, 0u32);
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            if d == t {
                continue;
            }
            for l in &self.adj[x] {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(l.neighbor) {
                    e.insert(d + 1);
                    queue.push_back(l.neighbor);
                }
            }
        }
        let members = dist
            .iter()
            .map(|(&u, &d)| {
                let links = self.adj[u]
                    .iter()
                    .filter(|l| dist.contains_key(&l.neighbor))
                    .copied()
                    .collect();
                (
                    u,
                    Member {
                        dist: d,
                        degree: self.adj[u].len() as u32,
                        links,
                    },
                )
            })
            .collect();
        Ball {
            center: v,
            radius: t,
            members,
        }
    }

    /// True when port 1 always leads to a node whose port 2 leads back, and
    /// the graph is a single cycle of length at least 3.
    pub fn is_oriented_ring(&self) -> bool {
        if self.n() < 3 || self.adj.iter().any(|l| l.len() != 2) {
            return false;
        }
        let consistent = self
            .adj
            .iter()
            .all(|links| links[0].remote_port == 2 && links[1].remote_port == 1);
        if !consistent {
            return false;
        }
        let mut v = 0;
        for step in 1..=self.n() {
            v = self.adj[v][0].neighbor;
            if v == 0 {
                return step == self.n();
            }
        }
        false
    }
}

fn validate_ids(ids: &[u64], id_bound: u64) -> Result<()> {
    if (ids.len() as u64) > id_bound {
        return Err(Error::InvalidIds(format!(
            "id bound {id_bound} is below n = {}",
            ids.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for &id in ids {
        if id >= id_bound {
            return Err(Error::InvalidIds(format!("id {id} is not below {id_bound}")));
        }
        if !seen.insert(id) {
            return Err(Error::InvalidIds(format!("duplicate id {id}")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Member {
    dist: u32,
    /// Degree in the whole graph, which may exceed `links.len()` on the rim.
    degree: u32,
    /// Links to other members only, sorted by port.
    links: Vec<Link>,
}

/// The structure of `B(center, radius)`: members, induced edges with both
/// port numbers, and graph distances from the center.
///
/// A ball is self-contained. Sub-balls are carved out of it with
/// [`Ball::sub_ball`] without going back to the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    center: NodeIdx,
    radius: u32,
    members: BTreeMap<NodeIdx, Member>,
}

impl Ball {
    pub fn center(&self) -> NodeIdx {
        self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, u: NodeIdx) -> bool {
        self.members.contains_key(&u)
    }

    /// Distance from the center, if `u` is a member.
    pub fn dist(&self, u: NodeIdx) -> Option<u32> {
        self.members.get(&u).map(|m| m.dist)
    }

    /// Members in increasing index order with their distance from the center.
    pub fn members(&self) -> impl Iterator<Item = (NodeIdx, u32)> + '_ {
        self.members.iter().map(|(&u, m)| (u, m.dist))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.members.keys().copied()
    }

    /// Links from `u` to other members, sorted by port.
    pub fn links(&self, u: NodeIdx) -> &[Link] {
        self.members.get(&u).map(|m| m.links.as_slice()).unwrap_or(&[])
    }

    pub fn neighbor_via(&self, u: NodeIdx, port: Port) -> Option<Link> {
        self.links(u).iter().find(|l| l.port == port).copied()
    }

    /// Degree of `u` in the whole graph.
    pub fn degree(&self, u: NodeIdx) -> Option<u32> {
        self.members.get(&u).map(|m| m.degree)
    }

    /// True when no member has an edge leaving the ball, i.e. the ball is the
    /// whole (connected) graph.
    pub fn is_closed(&self) -> bool {
        self.members.values().all(|m| m.links.len() as u32 == m.degree)
    }

    /// Edges with both endpoints in the ball, each listed once.
    pub fn induced_edges(&self) -> Vec<Edge> {
        self.members
            .iter()
            .flat_map(|(&u, m)| {
                m.links.iter().filter(move |l| u < l.neighbor).map(move |l| Edge {
                    u,
                    port_u: l.port,
                    v: l.neighbor,
                    port_v: l.remote_port,
                })
            })
            .collect()
    }

    /// `B(c, r)` computed inside this ball.
    ///
    /// Requires `dist(center, c) + r <= radius` (every shortest path from `c`
    /// of length at most `r` then stays inside) or a closed ball.
    pub fn sub_ball(&self, c: NodeIdx, r: u32) -> Result<Ball> {
        let dc = self
            .dist(c)
            .ok_or_else(|| Error::contract(format!("node {c} is not in the ball")))?;
        if dc as u64 + r as u64 > self.radius as u64 && !self.is_closed() {
            return Err(Error::contract(format!(
                "B({c}, {r}) does not fit: {dc} + {r} > radius {}",
                self.radius
            )));
        }
        let mut dist = BTreeMap::from([(c, 0u32)]);
        let mut queue = VecDeque::from([c]);
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            if d == r {
                continue;
            }
            for l in self.links(x) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(l.neighbor) {
                    e.insert(d + 1);
                    queue.push_back(l.neighbor);
                }
            }
        }
        let members = dist
            .iter()
            .map(|(&u, &d)| {
                let m = &self.members[&u];
                let links = m
                    .links
                    .iter()
                    .filter(|l| dist.contains_key(&l.neighbor))
                    .copied()
                    .collect();
                (
                    u,
                    Member {
                        dist: d,
                        degree: m.degree,
                        links,
                    },
                )
            })
            .collect();
        Ok(Ball {
            center: c,
            radius: r,
            members,
        })
    }

    /// Breadth-first enumeration from the center, expanding each node's
    /// incident edges in increasing port order. Depends only on the ball's
    /// structure and ports, never on identifiers.
    pub fn bfs_order(&self) -> Vec<NodeIdx> {
        let mut order = Vec::with_capacity(self.len());
        let mut seen = BTreeSet::from([self.center]);
        let mut queue = VecDeque::from([self.center]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for l in self.links(x) {
                if seen.insert(l.neighbor) {
                    queue.push_back(l.neighbor);
                }
            }
        }
        order
    }
}

/// Whether every node can be mapped to every other by a port-preserving
/// automorphism. Refuses graphs above [`DEFAULT_SYMMETRY_LIMIT`] nodes.
pub fn is_symmetric(g: &PortGraph) -> Result<bool> {
    is_symmetric_with_limit(g, DEFAULT_SYMMETRY_LIMIT)
}

pub fn is_symmetric_with_limit(g: &PortGraph, limit: usize) -> Result<bool> {
    if g.n() > limit {
        return Err(Error::SizeLimit {
            what: "symmetry search node count",
            count: g.n() as u128,
            limit: limit as u128,
        });
    }
    // Automorphisms form a group, so reaching every w from node 0 suffices.
    Ok((0..g.n()).all(|w| port_automorphism(g, 0, w).is_some()))
}

/// Searches for a port-preserving automorphism mapping `v` to `w`.
///
/// In a connected port-numbered graph the image of one node pins the image of
/// each neighbor (same port), so every branch of the backtracking search has
/// at most one consistent candidate; the search is a propagation that fails on
/// the first degree, port or injectivity conflict.
pub fn port_automorphism(g: &PortGraph, v: NodeIdx, w: NodeIdx) -> Option<Vec<NodeIdx>> {
    let n = g.n();
    let mut image: Vec<Option<NodeIdx>> = vec![None; n];
    let mut used = vec![false; n];
    image[v] = Some(w);
    used[w] = true;
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        let fx = image[x].unwrap();
        if g.degree(x) != g.degree(fx) {
            return None;
        }
        for l in g.links(x) {
            let target = g.neighbor_via(fx, l.port)?;
            if target.remote_port != l.remote_port {
                return None;
            }
            match image[l.neighbor] {
                Some(fy) if fy != target.neighbor => return None,
                Some(_) => {}
                None => {
                    if used[target.neighbor] {
                        return None;
                    }
                    used[target.neighbor] = true;
                    image[l.neighbor] = Some(target.neighbor);
                    stack.push(l.neighbor);
                }
            }
        }
    }
    image.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> PortGraph {
        PortGraph::ring((0..n as u64).collect(), n as u64).unwrap()
    }

    #[test]
    fn smallest_ring_port_one_is_a_directed_cycle() {
        let g = ring(3);
        for v in 0..3 {
            assert_eq!(g.neighbor_via(v, 1).unwrap().neighbor, (v + 1) % 3);
            assert_eq!(g.neighbor_via(v, 2).unwrap().neighbor, (v + 2) % 3);
        }
        assert!(g.is_oriented_ring());
    }

    #[test]
    fn ring_rejects_bad_input() {
        assert!(matches!(
            PortGraph::ring(vec![0, 1], 2),
            Err(Error::InvalidTopology(_))
        ));
        assert!(matches!(
            PortGraph::ring(vec![0, 1, 1], 3),
            Err(Error::InvalidIds(_))
        ));
        assert!(matches!(
            PortGraph::ring(vec![0, 1, 3], 3),
            Err(Error::InvalidIds(_))
        ));
    }

    #[test]
    fn new_rejects_gaps_in_ports_and_disconnection() {
        let bad_port = [Edge { u: 0, port_u: 2, v: 1, port_v: 1 }];
        assert!(PortGraph::new(2, vec![0, 1], &bad_port).is_err());
        let disconnected = [Edge { u: 0, port_u: 1, v: 1, port_v: 1 }];
        assert!(PortGraph::new(3, vec![0, 1, 2], &disconnected).is_err());
    }

    #[test]
    fn radius_zero_ball() {
        let g = ring(6);
        let b = g.ball(2, 0);
        assert_eq!(b.nodes().collect::<Vec<_>>(), vec![2]);
        assert_eq!(b.bfs_order(), vec![2]);
    }

    #[test]
    fn c6_radius_two_has_five_members() {
        let g = ring(6);
        let b = g.ball(0, 2);
        assert_eq!(b.nodes().collect::<Vec<_>>(), vec![0, 1, 2, 4, 5]);
        assert_eq!(b.dist(2), Some(2));
        assert_eq!(b.dist(4), Some(2));
        assert!(!b.is_closed());
        assert!(g.ball(0, 3).is_closed());
    }

    #[test]
    fn bfs_visits_ports_in_order() {
        let g = ring(5);
        assert_eq!(g.ball(0, 1).bfs_order(), vec![0, 1, 4]);
        assert_eq!(g.ball(0, 2).bfs_order(), vec![0, 1, 4, 2, 3]);
    }

    #[test]
    fn bfs_order_ignores_ids() {
        let a = ring(7);
        let b = a.with_ids(vec![13, 2, 9, 0, 5, 11, 4], 20).unwrap();
        assert_eq!(a.ball(3, 2).bfs_order(), b.ball(3, 2).bfs_order());
    }

    #[test]
    fn symmetric_families() {
        assert!(is_symmetric(&PortGraph::ring(vec![7, 3, 9, 1], 10).unwrap()).unwrap());
        assert!(is_symmetric(&ring(5)).unwrap());
        let torus = PortGraph::torus(3, 3, (0..9).collect(), 9).unwrap();
        assert!(is_symmetric(&torus).unwrap());
        let p3 = PortGraph::path(vec![0, 1, 2], 3).unwrap();
        assert!(!is_symmetric(&p3).unwrap());
    }

    #[test]
    fn ring_with_flipped_edge_is_not_symmetric() {
        // C4 where one edge has port 1 at both ends.
        let edges = [
            Edge { u: 0, port_u: 1, v: 1, port_v: 1 },
            Edge { u: 1, port_u: 2, v: 2, port_v: 2 },
            Edge { u: 2, port_u: 1, v: 3, port_v: 2 },
            Edge { u: 3, port_u: 1, v: 0, port_v: 2 },
        ];
        let g = PortGraph::new(4, vec![0, 1, 2, 3], &edges).unwrap();
        assert!(!g.is_oriented_ring());
        assert!(!is_symmetric(&g).unwrap());
    }

    #[test]
    fn symmetry_search_is_size_guarded() {
        let g = ring(13);
        assert!(matches!(is_symmetric(&g), Err(Error::SizeLimit { .. })));
        assert!(is_symmetric_with_limit(&g, 13).unwrap());
    }

    #[test]
    fn sub_ball_matches_graph_ball() {
        let g = ring(9);
        let big = g.ball(0, 3);
        let sub = big.sub_ball(1, 2).unwrap();
        assert_eq!(sub, g.ball(1, 2));
        assert!(big.sub_ball(2, 2).is_err());
        assert!(big.sub_ball(5, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = PortGraph::torus(3, 4, (0..12).rev().collect(), 20).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"N\":20"));
        let back: PortGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.ids(), g.ids());
        assert_eq!(back.topology(), Topology::General);
    }

    #[test]
    fn json_rejects_invalid_graph() {
        let text = r#"{"n":3,"N":3,"ids":[0,1,2],"edges":[[0,1,1,1]]}"#;
        assert!(serde_json::from_str::<PortGraph>(text).is_err());
    }
}
