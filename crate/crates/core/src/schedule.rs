//! Adversarial process schedules: when each process wakes up and whether it
//! crashes before producing its output.
//!
//! Random schedules are drawn from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded
//! with `seed_from_u64`, which is specified independently of the host
//! platform, so a seed reproduces the same schedule everywhere.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, NodeIdx, Result};

/// Default cap on the number of schedules an enumeration may produce.
pub const DEFAULT_ENUM_LIMIT: u128 = 1 << 20;

/// The round at which a process wakes up, or `Never`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wake {
    At(u32),
    Never,
}

impl Wake {
    pub fn round(self) -> Option<u32> {
        match self {
            Wake::At(r) => Some(r),
            Wake::Never => None,
        }
    }
}

impl fmt::Display for Wake {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wake::At(r) => write!(f, "{r}"),
            Wake::Never => f.write_str("never"),
        }
    }
}

impl Serialize for Wake {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Wake::At(r) => serializer.serialize_u32(*r),
            Wake::Never => serializer.serialize_str("never"),
        }
    }
}

impl<'de> Deserialize<'de> for Wake {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match WakeRepr::deserialize(deserializer)? {
            WakeRepr::Round(r) => Ok(Wake::At(r)),
            WakeRepr::Tag(t) if t == "never" => Ok(Wake::Never),
            WakeRepr::Tag(t) => Err(serde::de::Error::custom(format!("unknown wake value {t:?}"))),
        }
    }
}

/// What happens after a process wakes. A crashed process is still visible to
/// others (its wake-up is observable) but never outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fate {
    Correct,
    Crash,
}

impl fmt::Display for Fate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fate::Correct => "correct",
            Fate::Crash => "crash",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ScheduleFile", into = "ScheduleFile")]
pub struct Schedule {
    wake: Vec<Wake>,
    fate: Vec<Fate>,
}

impl Schedule {
    pub fn new(wake: Vec<Wake>, fate: Vec<Fate>) -> Result<Self> {
        if wake.len() != fate.len() {
            return Err(Error::Parameter(format!(
                "{} wake entries but {} fate entries",
                wake.len(),
                fate.len()
            )));
        }
        if let Some(v) = (0..wake.len()).find(|&v| wake[v] == Wake::Never && fate[v] == Fate::Crash) {
            return Err(Error::Parameter(format!(
                "node {v} crashes but never wakes"
            )));
        }
        Ok(Schedule { wake, fate })
    }

    /// Everyone wakes at round 0 and stays correct: the LOCAL setting.
    pub fn sync(n: usize) -> Self {
        Schedule {
            wake: vec![Wake::At(0); n],
            fate: vec![Fate::Correct; n],
        }
    }

    pub fn all_never(n: usize) -> Self {
        Schedule {
            wake: vec![Wake::Never; n],
            fate: vec![Fate::Correct; n],
        }
    }

    /// Independent per-node draws: `Never` with probability `p_never`, else a
    /// wake round uniform in `[0, window]`; awake nodes crash with `p_crash`.
    pub fn random(n: usize, seed: u64, window: u32, p_never: f64, p_crash: f64) -> Result<Self> {
        for (name, p) in [("never", p_never), ("crash", p_crash)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("probability {name}={p} is outside [0, 1]")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut wake = Vec::with_capacity(n);
        let mut fate = Vec::with_capacity(n);
        for _ in 0..n {
            if rng.random_bool(p_never) {
                wake.push(Wake::Never);
                fate.push(Fate::Correct);
            } else {
                wake.push(Wake::At(rng.random_range(0..=window)));
                fate.push(if rng.random_bool(p_crash) {
                    Fate::Crash
                } else {
                    Fate::Correct
                });
            }
        }
        Ok(Schedule { wake, fate })
    }

    pub fn n(&self) -> usize {
        self.wake.len()
    }

    pub fn wake(&self, v: NodeIdx) -> Wake {
        self.wake[v]
    }

    pub fn fate(&self, v: NodeIdx) -> Fate {
        self.fate[v]
    }

    pub fn wakes(&self) -> &[Wake] {
        &self.wake
    }

    /// Whether `v` wakes and does not crash, i.e. produces an output.
    pub fn outputs(&self, v: NodeIdx) -> bool {
        self.wake[v] != Wake::Never && self.fate[v] == Fate::Correct
    }

    pub fn max_wake(&self) -> Option<u32> {
        self.wake.iter().filter_map(|w| w.round()).max()
    }

    pub fn with_fate(&self, v: NodeIdx, fate: Fate) -> Result<Self> {
        let mut f = self.fate.clone();
        f[v] = fate;
        Schedule::new(self.wake.clone(), f)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WakeRepr {
    Round(u32),
    Tag(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ScheduleFile {
    wake: BTreeMap<String, Wake>,
    fate: BTreeMap<String, Fate>,
}

fn parse_node_keys<T: Clone>(map: &BTreeMap<String, T>, what: &str) -> Result<Vec<T>> {
    let mut by_node = BTreeMap::new();
    for (k, v) in map {
        let node: NodeIdx = k
            .parse()
            .map_err(|_| Error::Parameter(format!("{what} key {k:?} is not a node index")))?;
        by_node.insert(node, v.clone());
    }
    if by_node.keys().copied().ne(0..by_node.len()) {
        return Err(Error::Parameter(format!("{what} keys must be exactly 0..n")));
    }
    Ok(by_node.into_values().collect())
}

impl TryFrom<ScheduleFile> for Schedule {
    type Error = Error;

    fn try_from(f: ScheduleFile) -> Result<Self> {
        let wake = parse_node_keys(&f.wake, "wake")?;
        let fate = parse_node_keys(&f.fate, "fate")?;
        Schedule::new(wake, fate)
    }
}

impl From<Schedule> for ScheduleFile {
    fn from(s: Schedule) -> Self {
        let wake = s
            .wake
            .iter()
            .enumerate()
            .map(|(v, w)| (v.to_string(), *w))
            .collect();
        let fate = s
            .fate
            .iter()
            .enumerate()
            .map(|(v, f)| (v.to_string(), *f))
            .collect();
        ScheduleFile { wake, fate }
    }
}

/// The finite space of schedules with wake rounds in `[0, max_wake]`,
/// optionally `Never`, and optionally crashing awake nodes.
///
/// Schedules are addressed by index in mixed radix with node 0 as the most
/// significant digit, so parallel sweeps can split the index range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleSpace {
    n: usize,
    max_wake: u32,
    include_never: bool,
    include_crash: bool,
}

impl ScheduleSpace {
    pub fn new(n: usize, max_wake: u32, include_never: bool, include_crash: bool) -> Self {
        ScheduleSpace {
            n,
            max_wake,
            include_never,
            include_crash,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn fates_per_round(&self) -> u64 {
        1 + self.include_crash as u64
    }

    /// Choices per node: `(max_wake + 1) * (1 + crash) + never`.
    pub fn choices_per_node(&self) -> u64 {
        (self.max_wake as u64 + 1) * self.fates_per_round() + self.include_never as u64
    }

    /// Closed-form size of the space; saturates at `u128::MAX`.
    pub fn count(&self) -> u128 {
        let per = self.choices_per_node() as u128;
        (0..self.n).try_fold(1u128, |acc, _| acc.checked_mul(per)).unwrap_or(u128::MAX)
    }

    fn choice(&self, digit: u64) -> (Wake, Fate) {
        let awake = (self.max_wake as u64 + 1) * self.fates_per_round();
        if digit == awake {
            return (Wake::Never, Fate::Correct);
        }
        let round = (digit / self.fates_per_round()) as u32;
        let fate = if digit % self.fates_per_round() == 1 {
            Fate::Crash
        } else {
            Fate::Correct
        };
        (Wake::At(round), fate)
    }

    /// The schedule at `index`; `index` must be below [`Self::count`].
    pub fn get(&self, mut index: u128) -> Schedule {
        let per = self.choices_per_node() as u128;
        let mut wake = vec![Wake::Never; self.n];
        let mut fate = vec![Fate::Correct; self.n];
        for v in (0..self.n).rev() {
            let (w, f) = self.choice((index % per) as u64);
            wake[v] = w;
            fate[v] = f;
            index /= per;
        }
        Schedule { wake, fate }
    }

    pub fn iter(&self) -> impl Iterator<Item = Schedule> + '_ {
        (0..self.count()).map(move |i| self.get(i))
    }
}

/// Exhaustive schedule space over `n` nodes, refused when it holds more than
/// [`DEFAULT_ENUM_LIMIT`] schedules.
pub fn enumerate_schedules(
    n: usize,
    max_wake: u32,
    include_never: bool,
    include_crash: bool,
) -> Result<ScheduleSpace> {
    enumerate_schedules_with_limit(n, max_wake, include_never, include_crash, DEFAULT_ENUM_LIMIT)
}

pub fn enumerate_schedules_with_limit(
    n: usize,
    max_wake: u32,
    include_never: bool,
    include_crash: bool,
    limit: u128,
) -> Result<ScheduleSpace> {
    let space = ScheduleSpace::new(n, max_wake, include_never, include_crash);
    let count = space.count();
    if count > limit {
        return Err(Error::SizeLimit {
            what: "schedule enumeration",
            count,
            limit,
        });
    }
    Ok(space)
}
