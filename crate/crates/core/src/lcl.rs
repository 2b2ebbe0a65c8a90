//! Locally checkable labeling tasks and the partial-labeling checker.
//!
//! A labeling produced by a crash-prone execution leaves crashed and
//! never-woken nodes unlabeled. It is accepted when, for every node `v`, the
//! unlabeled nodes of `B(v, r)` can be filled in so that the ball is valid.
//! Each ball is extended independently.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::graph::{Ball, NodeIdx, PortGraph};
use crate::{par, Error, Result};

/// Default cap on unlabeled nodes per ball for the brute-force extension.
pub const DEFAULT_EXTENSION_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Ball predicate: receives a ball and a label lookup defined on every member.
pub type Predicate = dyn Fn(&Ball, &dyn Fn(NodeIdx) -> Label) -> bool + Send + Sync;

/// Screen for partially labeled balls; `None` marks an unlabeled member. It
/// may answer `false` only when no way of labeling those members makes the
/// ball valid.
pub type Screen = dyn Fn(&Ball, &dyn Fn(NodeIdx) -> Option<Label>) -> bool + Send + Sync;

/// An input-free LCL task `(L, F)` of constant radius.
///
/// The predicate must depend only on the ball's structure, its ports and the
/// labels; it never sees identifiers.
#[derive(Clone)]
pub struct LclTask {
    name: String,
    radius: u32,
    labels: Vec<Label>,
    predicate: Arc<Predicate>,
    screen: Option<Arc<Screen>>,
}

impl fmt::Debug for LclTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LclTask")
            .field("name", &self.name)
            .field("radius", &self.radius)
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

impl LclTask {
    pub fn new<F>(name: impl Into<String>, radius: u32, labels: Vec<Label>, predicate: F) -> Result<Self>
    where
        F: Fn(&Ball, &dyn Fn(NodeIdx) -> Label) -> bool + Send + Sync + 'static,
    {
        if labels.is_empty() {
            return Err(Error::Parameter("label alphabet is empty".into()));
        }
        Ok(LclTask {
            name: name.into(),
            radius,
            labels,
            predicate: Arc::new(predicate),
            screen: None,
        })
    }

    /// Attaches a screen that lets searches reject partial labelings early.
    pub fn with_screen<F>(mut self, screen: F) -> Self
    where
        F: Fn(&Ball, &dyn Fn(NodeIdx) -> Option<Label>) -> bool + Send + Sync + 'static,
    {
        self.screen = Some(Arc::new(screen));
        self
    }

    /// Proper `c`-coloring with labels `1..=c`: the center differs from all
    /// of its neighbors.
    pub fn coloring(c: u32) -> Result<Self> {
        if c == 0 {
            return Err(Error::Parameter("coloring needs at least one color".into()));
        }
        LclTask::new(
            format!("coloring:{c}"),
            1,
            (1..=c).map(Label).collect(),
            |ball, label| {
                let center = ball.center();
                let own = label(center);
                ball.links(center).iter().all(|l| label(l.neighbor) != own)
            },
        )
        .map(|task| {
            task.with_screen(move |ball, label| {
                let center = ball.center();
                let taken: BTreeSet<Label> = ball.links(center).iter().filter_map(|l| label(l.neighbor)).collect();
                match label(center) {
                    Some(own) => !taken.contains(&own),
                    None => (taken.len() as u64) < c as u64,
                }
            })
        })
    }

    /// Maximal independent set with labels 0 (out) and 1 (in): a member has
    /// no member neighbor, a non-member has at least one.
    pub fn mis() -> Self {
        LclTask::new("mis", 1, vec![Label(0), Label(1)], |ball, label| {
            let center = ball.center();
            let mut neighbors = ball.links(center).iter().map(|l| label(l.neighbor));
            if label(center) == Label(1) {
                neighbors.all(|x| x != Label(1))
            } else {
                neighbors.any(|x| x == Label(1))
            }
        })
        .expect("non-empty alphabet")
        .with_screen(|ball, label| {
            let center = ball.center();
            let mut neighbors = ball.links(center).iter().map(|l| label(l.neighbor));
            match label(center) {
                Some(Label(1)) => neighbors.all(|x| x != Some(Label(1))),
                Some(_) => !neighbors.all(|x| x == Some(Label(0))),
                None => true,
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn has_label(&self, l: Label) -> bool {
        self.labels.contains(&l)
    }

    pub(crate) fn eval(&self, ball: &Ball, label: &dyn Fn(NodeIdx) -> Label) -> bool {
        (self.predicate)(ball, label)
    }

    /// `false` only if the partial labeling of `ball` cannot be completed.
    pub(crate) fn screen(&self, ball: &Ball, label: &dyn Fn(NodeIdx) -> Option<Label>) -> bool {
        self.screen.as_ref().is_none_or(|f| f(ball, label))
    }
}

impl FromStr for LclTask {
    type Err = Error;

    /// `coloring:<c>` or `mis`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "mis" => Ok(LclTask::mis()),
            Some(("coloring", c)) => {
                let c = c
                    .parse()
                    .map_err(|_| Error::Parameter(format!("bad color count {c:?}")))?;
                LclTask::coloring(c)
            }
            _ => Err(Error::Parameter(format!("unknown task {s:?}"))),
        }
    }
}

/// Per-node output: a label, or `None` for a process that produced nothing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, Option<Label>>", into = "BTreeMap<String, Option<Label>>")]
pub struct PartialLabeling(Vec<Option<Label>>);

impl PartialLabeling {
    pub fn new(labels: Vec<Option<Label>>) -> Self {
        PartialLabeling(labels)
    }

    pub fn total(labels: &[Label]) -> Self {
        PartialLabeling(labels.iter().copied().map(Some).collect())
    }

    pub fn unlabeled(n: usize) -> Self {
        PartialLabeling(vec![None; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: NodeIdx) -> Option<Label> {
        self.0[v]
    }

    pub fn set(&mut self, v: NodeIdx, label: Option<Label>) {
        self.0[v] = label;
    }

    pub fn as_slice(&self) -> &[Option<Label>] {
        &self.0
    }

    pub fn unlabeled_count(&self) -> usize {
        self.0.iter().filter(|l| l.is_none()).count()
    }
}

impl TryFrom<BTreeMap<String, Option<Label>>> for PartialLabeling {
    type Error = Error;

    fn try_from(map: BTreeMap<String, Option<Label>>) -> Result<Self> {
        let mut by_node = BTreeMap::new();
        for (k, v) in map {
            let node: NodeIdx = k
                .parse()
                .map_err(|_| Error::Parameter(format!("labeling key {k:?} is not a node index")))?;
            by_node.insert(node, v);
        }
        if by_node.keys().copied().ne(0..by_node.len()) {
            return Err(Error::Parameter("labeling keys must be exactly 0..n".into()));
        }
        Ok(PartialLabeling(by_node.into_values().collect()))
    }
}

impl From<PartialLabeling> for BTreeMap<String, Option<Label>> {
    fn from(pl: PartialLabeling) -> Self {
        pl.0.into_iter()
            .enumerate()
            .map(|(v, l)| (v.to_string(), l))
            .collect()
    }
}

/// Outcome of [`check_partial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    /// The lowest-indexed center whose ball admits no valid extension.
    Fail { center: NodeIdx },
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn witness(self) -> Option<NodeIdx> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail { center } => Some(center),
        }
    }
}

/// Evaluates the task predicate on a fully labeled ball of the task's radius.
pub fn check_ball(task: &LclTask, ball: &Ball, labels: &BTreeMap<NodeIdx, Label>) -> Result<bool> {
    if ball.radius() != task.radius() {
        return Err(Error::contract(format!(
            "ball radius {} differs from task radius {}",
            ball.radius(),
            task.radius()
        )));
    }
    if let Some(u) = ball.nodes().find(|u| !labels.contains_key(u)) {
        return Err(Error::contract(format!("ball member {u} has no label")));
    }
    Ok(task.eval(ball, &|u| labels[&u]))
}

/// Checks a partial labeling with the default extension limit.
pub fn check_partial(task: &LclTask, g: &PortGraph, pl: &PartialLabeling) -> Result<Verdict> {
    check_partial_with_limit(task, g, pl, DEFAULT_EXTENSION_LIMIT)
}

/// Accepts iff every ball `B(v, r)`, labeled ones and unlabeled ones alike,
/// can be completed by assigning labels to its unlabeled members. The search
/// is exhaustive over `|L|^holes` assignments per ball; balls with more than
/// `limit` holes are refused.
pub fn check_partial_with_limit(
    task: &LclTask,
    g: &PortGraph,
    pl: &PartialLabeling,
    limit: usize,
) -> Result<Verdict> {
    if pl.len() != g.n() {
        return Err(Error::contract(format!(
            "labeling covers {} nodes, graph has {}",
            pl.len(),
            g.n()
        )));
    }
    if let Some((v, l)) = pl
        .as_slice()
        .iter()
        .enumerate()
        .find_map(|(v, l)| l.filter(|l| !task.has_label(*l)).map(|l| (v, l)))
    {
        return Err(Error::contract(format!(
            "node {v} carries label {l} outside the alphabet of {}",
            task.name()
        )));
    }
    let ok = par::try_map_indices(g.n(), |v| extendable(task, &g.ball(v, task.radius()), pl, limit))?;
    Ok(match ok.iter().position(|&b| !b) {
        None => Verdict::Pass,
        Some(center) => Verdict::Fail { center },
    })
}

fn extendable(task: &LclTask, ball: &Ball, pl: &PartialLabeling, limit: usize) -> Result<bool> {
    let mut labels: BTreeMap<NodeIdx, Label> = BTreeMap::new();
    let mut holes = Vec::new();
    for u in ball.nodes() {
        match pl.get(u) {
            Some(l) => {
                labels.insert(u, l);
            }
            None => holes.push(u),
        }
    }
    if holes.len() > limit {
        return Err(Error::SizeLimit {
            what: "unlabeled nodes in a checked ball",
            count: holes.len() as u128,
            limit: limit as u128,
        });
    }
    let alphabet = task.labels();
    let mut digits = vec![0usize; holes.len()];
    loop {
        for (&u, &d) in holes.iter().zip(&digits) {
            labels.insert(u, alphabet[d]);
        }
        if task.eval(ball, &|u| labels[&u]) {
            return Ok(true);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(false);
            }
            digits[i] += 1;
            if digits[i] < alphabet.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
