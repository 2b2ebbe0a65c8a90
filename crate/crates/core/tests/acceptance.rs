//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use alsim::algorithms::{Constant, Cv3, Universal};
use alsim::async_engine::{execute_async, outcomes_to_labeling, snapshot, snapshot_set, AsyncAlgorithm, ViewDigest};
use alsim::cli::{cmd_enumerate, ConfigArgs, EnumerateArgs, Model};
use alsim::decoupled::{execute_decoupled, DecoupledConfig};
use alsim::lcl::check_partial;
use alsim::local_engine::{run_local, LocalAlgorithm};
use alsim::schedule::{enumerate_schedules, Schedule};
use alsim::sweep::{sweep, Strategy};
use alsim::transform::{compute_idvirt_global, local_ids, virtual_id, Transformed};
use alsim::{Error, LclTask, PortGraph, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Violation counter shared by parallel workers; keeps the first message.
#[derive(Default)]
struct Tally {
    checked: AtomicU64,
    violations: AtomicU64,
    first: Mutex<Option<String>>,
}

impl Tally {
    fn check(&self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked.fetch_add(1, Ordering::Relaxed);
        if !ok {
            self.violations.fetch_add(1, Ordering::Relaxed);
            let mut first = self.first.lock().unwrap();
            if first.is_none() {
                *first = Some(msg());
            }
        }
    }

    fn error(&self, e: Error, context: impl FnOnce() -> String) {
        self.check(false, || format!("{}: {e}", context()));
    }

    fn report(&self, what: &str) -> std::result::Result<String, String> {
        let checked = self.checked.load(Ordering::Relaxed);
        let violations = self.violations.load(Ordering::Relaxed);
        if violations == 0 {
            Ok(format!("{checked} {what}, 0 violations"))
        } else {
            Err(format!(
                "{violations}/{checked} {what} violated; first: {}",
                self.first.lock().unwrap().as_deref().unwrap_or("?")
            ))
        }
    }
}

fn ring(n: usize) -> PortGraph {
    PortGraph::ring((0..n as u64).collect(), n as u64).unwrap()
}

fn shuffled_ring(n: usize, rng: &mut ChaCha8Rng) -> PortGraph {
    let mut ids: Vec<u64> = (0..n as u64).collect();
    ids.shuffle(rng);
    PortGraph::ring(ids, n as u64).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, id_bound: u64) -> PortGraph {
    let n = rng.random_range(1..=max_n);
    let extra = rng.random_range(0..=n);
    PortGraph::random_connected(n, extra, id_bound, rng).unwrap()
}

fn coloring(c: u32) -> LclTask {
    LclTask::coloring(c).unwrap()
}

/// Checks one schedule against the output-equality oracle (C2) and the
/// virtual-identifier properties (C3); returns the transformed run's labeling.
fn oracle_checks<A: LocalAlgorithm>(
    g: &PortGraph,
    s: &Schedule,
    algo: &Transformed<A>,
    c2: &Tally,
    c3: &Tally,
) -> Result<alsim::PartialLabeling> {
    let n_bound = algo.n_bound();
    let tau = algo.tau();
    let outcomes = execute_async(g, s, algo, n_bound)?;
    let global = compute_idvirt_global(g, s, tau, n_bound);
    let in_range = global.as_slice().iter().all(|&x| x < n_bound * n_bound);
    c3.check(global.is_injective() && in_range, || {
        format!("virtual ids {:?} not injective below N² on {s:?}", global.as_slice())
    });
    for v in (0..g.n()).filter(|&v| s.wakes()[v].round().is_some()) {
        let view = snapshot(g, s, v, algo.snapshot_radius())?;
        for u in g.ball(v, tau).nodes() {
            let seen = virtual_id(u, &view, tau, n_bound)?;
            c3.check(seen == global.get(u), || {
                format!("observer {v} computes {seen} for node {u}, oracle says {}", global.get(u))
            });
        }
    }
    if global.is_injective() {
        let reference = run_local(g, algo.inner(), n_bound * n_bound, global.as_slice())?;
        for (v, o) in outcomes.iter().enumerate().filter(|(v, _)| s.outputs(*v)) {
            c2.check(o.output == Some(reference[v]), || {
                format!("node {v} output {:?}, LOCAL reference {}, schedule {s:?}", o.output, reference[v])
            });
        }
    } else {
        c2.check(false, || "no LOCAL reference: virtual ids collide".into());
    }
    Ok(outcomes_to_labeling(&outcomes))
}

struct Shared {
    c1: Tally,
    c2: Tally,
    c3: Tally,
}

fn exhaustive_rings(shared: &Shared) {
    for n in 3..=5 {
        let g = ring(n);
        let algo = Transformed::new(Universal::new(coloring(3)), n as u64).unwrap();
        let space = enumerate_schedules(n, 2, true, true).unwrap();
        let task = coloring(3);
        let count = space.count() as u64;
        sweep(count, Strategy::Parallel, |i| {
            let s = space.get(i as u128);
            match oracle_checks(&g, &s, &algo, &shared.c2, &shared.c3) {
                Ok(labeling) => match check_partial(&task, &g, &labeling) {
                    Ok(v) => shared.c1.check(v.is_pass(), || format!("ring {n} schedule {i}: {s:?} fails at {v:?}")),
                    Err(e) => shared.c1.error(e, || format!("ring {n} schedule {i}")),
                },
                Err(e) => {
                    let ctx = || format!("ring {n} schedule {i}");
                    shared.c1.error(e.clone(), ctx);
                    shared.c2.error(e, ctx);
                }
            }
            Ok::<_, Error>(None::<()>)
        })
        .unwrap();
    }
}

fn random_graph_oracles(shared: &Shared) {
    sweep(500, Strategy::Parallel, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC2_0000 + i);
        let g = random_graph(&mut rng, 16, 16);
        let s = Schedule::random(g.n(), rng.random(), 6, 0.2, 0.2).unwrap();
        let task = if i % 2 == 0 {
            coloring(g.max_degree() as u32 + 1)
        } else {
            LclTask::mis()
        };
        let algo = Transformed::new(Universal::new(task), 16).unwrap();
        if let Err(e) = oracle_checks(&g, &s, &algo, &shared.c2, &shared.c3) {
            shared.c2.error(e, || format!("random graph {i}"));
        }
        Ok::<_, Error>(None::<()>)
    })
    .unwrap();
}

fn criterion_4() -> std::result::Result<String, String> {
    let tally = Tally::default();
    let mut graphs: Vec<PortGraph> = (3..=5).map(ring).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    graphs.extend((0..100).map(|_| {
        let n_bound = rng.random_range(12..=24);
        random_graph(&mut rng, 12, n_bound)
    }));
    for g in &graphs {
        for tau in [0, 1, 2, 3, g.n() as u32] {
            let mut owner: BTreeMap<u64, (u64, usize)> = BTreeMap::new();
            for v in 0..g.n() {
                for (u, x) in local_ids(g.id(v), &g.ball(v, tau), g.id_bound()).iter() {
                    let prev = owner.insert(x, (g.id(v), u));
                    tally.check(prev.is_none() || prev == Some((g.id(v), u)), || {
                        format!("value {x} given by {prev:?} and {:?}", (g.id(v), u))
                    });
                }
            }
        }
    }
    tally.report("local ids")
}

/// Snapshot set straight from the definition, with all-pairs distances.
fn set_oracle(dist: &[Vec<Option<u32>>], s: &Schedule, v: usize, rho: u32, theta: u32) -> Vec<usize> {
    (0..s.n())
        .filter(|&w| {
            let d = dist[v][w].unwrap();
            match s.wakes()[w].round() {
                Some(t) => d <= rho && t as u64 + d as u64 <= rho as u64 + theta as u64,
                None => false,
            }
        })
        .collect()
}

fn criterion_5() -> std::result::Result<String, String> {
    let tally = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    for k in 0..1000 {
        let g = random_graph(&mut rng, 14, 20);
        let dist: Vec<Vec<Option<u32>>> = (0..g.n()).map(|v| g.distances_from(v)).collect();
        let s = Schedule::random(g.n(), rng.random(), 8, 0.2, 0.2).unwrap();
        let v = rng.random_range(0..g.n());
        let (rho, theta) = (rng.random_range(0..6), rng.random_range(0..10));
        let (rho2, theta2) = (rho + rng.random_range(0..3), theta + rng.random_range(0..4));
        let small = snapshot_set(&g, &s, v, rho, theta);
        let big = snapshot_set(&g, &s, v, rho2, theta2);
        tally.check(small.nodes().collect::<Vec<_>>() == set_oracle(&dist, &s, v, rho, theta), || {
            format!("tuple {k}: snapshot set disagrees with the definition")
        });
        tally.check(small.is_subset(&big), || format!("tuple {k}: monotonicity fails"));
        if let Some(wake) = s.wakes()[v].round() {
            let view = snapshot(&g, &s, v, rho).unwrap();
            let visible: Vec<usize> = view.visible().keys().copied().collect();
            tally.check(visible == set_oracle(&dist, &s, v, rho, wake), || {
                format!("tuple {k}: snapshot shows {visible:?}")
            });
        }
    }
    tally.report("set relations")
}

fn equivalence(tally: &Tally, g: &PortGraph, s: &Schedule, algo: &dyn AsyncAlgorithm, n_bound: u64, label: &str) {
    let a = execute_async(g, s, algo, n_bound);
    let d = execute_decoupled(g, s, algo, n_bound, &DecoupledConfig::default()).map(|r| r.outcomes);
    match (a, d) {
        (Ok(a), Ok(d)) => tally.check(a == d, || format!("{label}: {s:?}")),
        (Err(e), _) | (_, Err(e)) => tally.error(e, || label.to_string()),
    }
}

fn criterion_6() -> std::result::Result<String, String> {
    let tally = Tally::default();
    for n in 3..=12usize {
        sweep(200, Strategy::Parallel, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC6_0000 + (n as u64) * 1000 + i);
            let g = shuffled_ring(n, &mut rng);
            let s = Schedule::random(n, rng.random(), 6, 0.2, 0.2).unwrap();
            let cv3 = Transformed::new(Cv3, n as u64).unwrap();
            equivalence(&tally, &g, &s, &cv3, n as u64, &format!("ring {n} transform(cv3) seed {i}"));
            equivalence(&tally, &g, &s, &ViewDigest { radius: 3 }, n as u64, &format!("ring {n} digest seed {i}"));
            Ok::<_, Error>(None::<()>)
        })
        .unwrap();
    }
    let torus = PortGraph::torus(3, 3, (0..9).collect(), 9).unwrap();
    sweep(200, Strategy::Parallel, |i| {
        let s = Schedule::random(9, 0xC6_7000 + i, 4, 0.2, 0.2).unwrap();
        for radius in [1, 2, 3] {
            equivalence(&tally, &torus, &s, &ViewDigest { radius }, 9, &format!("torus digest({radius}) seed {i}"));
        }
        let constant = Transformed::new(Constant(alsim::Label(1)), 9).unwrap();
        equivalence(&tally, &torus, &s, &constant, 9, &format!("torus transform(const) seed {i}"));
        Ok::<_, Error>(None::<()>)
    })
    .unwrap();
    for n in 3..=5usize {
        let g = ring(n);
        let space = enumerate_schedules(n, 2, true, true).unwrap();
        let universal = Transformed::new(Universal::new(coloring(3)), n as u64).unwrap();
        let cv3 = Transformed::new(Cv3, n as u64).unwrap();
        sweep(space.count() as u64, Strategy::Parallel, |i| {
            let s = space.get(i as u128);
            equivalence(&tally, &g, &s, &universal, n as u64, &format!("ring {n} transform(universal) schedule {i}"));
            equivalence(&tally, &g, &s, &cv3, n as u64, &format!("ring {n} transform(cv3) schedule {i}"));
            Ok::<_, Error>(None::<()>)
        })
        .unwrap();
    }
    tally.report("engine comparisons")
}

/// `m -> 2·ceil(log2 m)` iterated until at most six colors remain, then
/// three rounds to drop colors 5, 4 and 3.
fn cv3_rounds_oracle(id_bound: u64) -> u32 {
    let mut m = id_bound as f64;
    let mut steps = 0;
    while m > 6.0 {
        m = 2.0 * m.log2().ceil();
        steps += 1;
    }
    steps + 3
}

fn criterion_7() -> std::result::Result<String, String> {
    let tally = Tally::default();
    let task = coloring(3);
    for n in [3usize, 8, 64, 1024] {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC7_0000 + seed);
            let g = shuffled_ring(n, &mut rng);
            match run_local(&g, &Cv3, n as u64, g.ids()) {
                Ok(labels) => {
                    let v = check_partial(&task, &g, &alsim::PartialLabeling::total(&labels)).unwrap();
                    tally.check(v.is_pass(), || format!("ring {n} seed {seed}: {v:?}"));
                }
                Err(e) => tally.error(e, || format!("ring {n} seed {seed}")),
            }
        }
    }
    let golden: u32 = include_str!("golden/cv3_round_bound.txt").trim().parse().unwrap();
    let bound = Cv3.round_bound(1 << 16);
    tally.check(bound == golden && bound <= 9, || format!("round_bound(2^16) = {bound}, golden {golden}"));
    tally.check(bound == cv3_rounds_oracle(1 << 16), || "round bound disagrees with the bound map".into());
    for n_bound in [3u64, 8, 64, 1024, 1 << 16] {
        let t = Transformed::new(Cv3, n_bound).unwrap();
        let expected = 3 * Cv3.round_bound(n_bound * n_bound);
        tally.check(t.radius(n_bound) == expected, || {
            format!("N = {n_bound}: transformed radius {} != {expected}", t.radius(n_bound))
        });
    }
    tally.report("colorings and bounds")
}

fn criterion_8() -> std::result::Result<String, String> {
    let tally = Tally::default();
    let args = EnumerateArgs {
        common: ConfigArgs {
            graph: Some("ring:5".into()),
            task: Some("coloring:3".into()),
            algo: Some("const:1".into()),
            model: Some(Model::Async),
            transform: true,
            ..ConfigArgs::default()
        },
        max_wake: Some(1),
        never: true,
        crash: true,
    };
    match cmd_enumerate(&args) {
        Ok(r) => tally.check(
            r.failures > 0 && !r.verdict.pass && r.first_counterexample.as_ref().is_some_and(|c| c.witness.is_some()),
            || format!("constant rule: {} failures, counterexample {:?}", r.failures, r.first_counterexample),
        ),
        Err(e) => tally.check(false, || format!("constant rule enumeration errored: {e}")),
    }
    for n in [3usize, 5, 7] {
        let local = run_local(&ring(n), &Universal::new(coloring(2)), n as u64, ring(n).ids());
        tally.check(matches!(local, Err(Error::Unsolvable(_))), || format!("ring {n}: {local:?}"));
        let lifted = Transformed::new(Universal::new(coloring(2)), n as u64).unwrap();
        let run = execute_async(&ring(n), &Schedule::sync(n), &lifted, n as u64);
        tally.check(matches!(run, Err(Error::Unsolvable(_))), || format!("ring {n} transformed: {run:?}"));
    }
    tally.report("negative controls")
}

fn main() {
    let mut all_pass = true;
    let mut line = |name: &str, start: Instant, r: std::result::Result<String, String>| {
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                all_pass = false;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    };

    let shared = Shared {
        c1: Tally::default(),
        c2: Tally::default(),
        c3: Tally::default(),
    };
    let start = Instant::now();
    exhaustive_rings(&shared);
    line("C1 transformed universal 3-coloring, every schedule on rings 3-5", start, shared.c1.report("schedules"));
    let start2 = Instant::now();
    random_graph_oracles(&shared);
    let elapsed = start.elapsed().as_secs_f64();
    line(
        "C2 transformed output equals LOCAL run under virtual ids",
        start2,
        shared.c2.report(&format!("node outputs (with C1 sweep, {elapsed:.1}s total)")),
    );
    line("C3 virtual ids injective, below N², observer-agreed", start2, shared.c3.report("id checks"));

    let start = Instant::now();
    line("C4 local ids never collide", start, criterion_4());
    let start = Instant::now();
    line("C5 snapshot-set monotonicity and extraction", start, criterion_5());
    let start = Instant::now();
    line("C6 DECOUPLED matches AsyncLocal node for node", start, criterion_6());
    let start = Instant::now();
    line("C7 Cole-Vishkin colorings, frozen round bound, 3x radius", start, criterion_7());
    let start = Instant::now();
    line("C8 negative controls", start, criterion_8());

    if !all_pass {
        std::process::exit(1);
    }
}
