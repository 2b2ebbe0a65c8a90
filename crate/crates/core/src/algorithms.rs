//! Reference LOCAL algorithms.
//!
//! * [`Cv3`]: Cole–Vishkin color reduction on oriented rings, finished by
//!   three rounds that eliminate colors 5, 4 and 3.
//! * [`Universal`]: full-information algorithm for any solvable LCL task. It
//!   waits until its ball is the whole graph, then outputs its label in the
//!   lexicographically first valid labeling under identifier order.
//! * [`Constant`]: always outputs the same label. Useful as a negative control.

use std::collections::BTreeMap;

use crate::graph::{Ball, NodeIdx};
use crate::lcl::{Label, LclTask};
use crate::local_engine::{IdMap, LocalAlgorithm};
use crate::{Error, Result};

/// One color-reduction step: with `i` the lowest bit where `own` and
/// `successor` differ, returns `2i + bit_i(own)`.
pub fn cv_step(own: u64, successor: u64) -> Result<u64> {
    if own == successor {
        return Err(Error::contract(format!(
            "equal colors {own} at a node and its successor"
        )));
    }
    let i = (own ^ successor).trailing_zeros() as u64;
    Ok(2 * i + ((own >> i) & 1))
}

/// Exclusive bound on colors after one [`cv_step`] from colors below `m`.
pub fn next_color_bound(m: u64) -> u64 {
    // colors below m fit in ceil(log2 m) bits
    let bits = 64 - (m.max(2) - 1).leading_zeros() as u64;
    2 * bits
}

/// Number of reduction steps taking colors below `id_bound` to colors below 6.
pub fn reduction_steps(id_bound: u64) -> u32 {
    let mut m = id_bound;
    let mut k = 0;
    while m > 6 {
        m = next_color_bound(m);
        k += 1;
    }
    k
}

/// Cole–Vishkin 3-coloring of an oriented ring (port 1 = successor).
#[derive(Clone, Copy, Debug, Default)]
pub struct Cv3;

const FINISH_ROUNDS: u32 = 3;

impl LocalAlgorithm for Cv3 {
    fn name(&self) -> String {
        "cv3".into()
    }

    fn round_bound(&self, id_bound: u64) -> u32 {
        reduction_steps(id_bound) + FINISH_ROUNDS
    }

    fn decide(&self, ball: &Ball, ids: &IdMap, id_bound: u64) -> Result<Label> {
        let k = reduction_steps(id_bound);
        let back = FINISH_ROUNDS as usize;
        let ahead = (k + FINISH_ROUNDS) as usize;
        if (ball.radius() as usize) < ahead {
            return Err(Error::contract(format!(
                "cv3 needs radius {ahead}, got {}",
                ball.radius()
            )));
        }
        // Unroll the ring into positions -back..=ahead around the center. On
        // short rings positions repeat nodes, which keeps the simulation exact.
        let mut line = walk(ball, ball.center(), 2, back)?;
        line.reverse();
        line.pop();
        line.extend(walk(ball, ball.center(), 1, ahead)?);

        let mut colors: Vec<u64> = line
            .iter()
            .map(|u| {
                let id = ids[u];
                if id >= id_bound {
                    Err(Error::contract(format!("id {id} is not below {id_bound}")))
                } else {
                    Ok(id)
                }
            })
            .collect::<Result<_>>()?;

        // Each step drops the last position (it has no successor in view).
        for _ in 0..k {
            colors = colors
                .windows(2)
                .map(|w| cv_step(w[0], w[1]))
                .collect::<Result<_>>()?;
        }
        // Eliminate 5, 4, 3; each round drops one position at either end.
        for eliminated in [5u64, 4, 3] {
            colors = colors
                .windows(3)
                .map(|w| {
                    if w[1] == eliminated {
                        (0..3).find(|c| *c != w[0] && *c != w[2]).expect("two neighbors leave a free color")
                    } else {
                        w[1]
                    }
                })
                .collect();
        }
        debug_assert_eq!(colors.len(), 1);
        let c = colors[0];
        if c > 2 {
            return Err(Error::contract(format!("color {c} left after reduction")));
        }
        Ok(Label(c as u32 + 1))
    }
}

/// Follows `port` for `steps` hops, returning the visited nodes including the
/// start. Every hop must land on the opposite port, as in an oriented ring.
fn walk(ball: &Ball, start: NodeIdx, port: u32, steps: usize) -> Result<Vec<NodeIdx>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut at = start;
    out.push(at);
    for _ in 0..steps {
        let link = ball
            .neighbor_via(at, port)
            .filter(|l| l.remote_port == 3 - port && ball.degree(at) == Some(2))
            .ok_or_else(|| Error::contract("cv3 requires an oriented ring"))?;
        at = link.neighbor;
        out.push(at);
    }
    Ok(out)
}

/// Canonical full-information algorithm for an LCL task.
#[derive(Clone, Debug)]
pub struct Universal {
    task: LclTask,
}

impl Universal {
    pub fn new(task: LclTask) -> Self {
        Universal { task }
    }

    pub fn task(&self) -> &LclTask {
        &self.task
    }
}

impl LocalAlgorithm for Universal {
    fn name(&self) -> String {
        format!("universal:{}", self.task.name())
    }

    /// Diameter is below `n <= N`, so radius `N` always covers the graph.
    fn round_bound(&self, id_bound: u64) -> u32 {
        u32::try_from(id_bound).unwrap_or(u32::MAX)
    }

    fn decide(&self, ball: &Ball, ids: &IdMap, _id_bound: u64) -> Result<Label> {
        let solution = canonical_solution(&self.task, ball, ids)?;
        Ok(solution[&ball.center()])
    }
}

/// The lexicographically first valid labeling of the graph spanned by a
/// closed ball, with nodes ordered by identifier and labels in alphabet order.
pub fn canonical_solution(task: &LclTask, ball: &Ball, ids: &IdMap) -> Result<BTreeMap<NodeIdx, Label>> {
    if !ball.is_closed() {
        return Err(Error::contract("universal algorithm needs a ball covering the whole graph"));
    }
    let mut order: Vec<NodeIdx> = ball.nodes().collect();
    order.sort_by_key(|u| ids[u]);
    let position: BTreeMap<NodeIdx, usize> = order.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    // A center's ball can be judged once its last member (by position) is
    // set; before that the task's screen may already rule it out.
    let balls: Vec<Ball> = order
        .iter()
        .map(|&c| ball.sub_ball(c, task.radius()))
        .collect::<Result<_>>()?;
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    let mut open: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for (k, b) in balls.iter().enumerate() {
        let last = b.nodes().map(|u| position[&u]).max().unwrap();
        due[last].push(k);
        for u in b.nodes().filter(|u| position[u] < last) {
            open[position[&u]].push(k);
        }
    }

    let alphabet = task.labels();
    let mut choice = vec![0usize; order.len()];
    let mut assigned: BTreeMap<NodeIdx, Label> = BTreeMap::new();
    let mut i = 0usize;
    loop {
        if i == order.len() {
            return Ok(assigned);
        }
        if choice[i] == alphabet.len() {
            // exhausted: backtrack
            choice[i] = 0;
            assigned.remove(&order[i]);
            if i == 0 {
                return Err(Error::Unsolvable(format!(
                    "no valid {} labeling exists",
                    task.name()
                )));
            }
            i -= 1;
            choice[i] += 1;
            continue;
        }
        assigned.insert(order[i], alphabet[choice[i]]);
        let complete = due[i].iter().all(|&k| task.eval(&balls[k], &|u| assigned[&u]));
        if complete && open[i].iter().all(|&k| task.screen(&balls[k], &|u| assigned.get(&u).copied())) {
            i += 1;
        } else {
            choice[i] += 1;
        }
    }
}

/// Outputs `label` everywhere regardless of the input.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub Label);

impl LocalAlgorithm for Constant {
    fn name(&self) -> String {
        format!("const:{}", self.0)
    }

    fn round_bound(&self, _: u64) -> u32 {
        0
    }

    fn decide(&self, _: &Ball, _: &IdMap, _: u64) -> Result<Label> {
        Ok(self.0)
    }
}
