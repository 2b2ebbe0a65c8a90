use alsim::async_engine::{run_async, ViewDigest};
use alsim::decoupled::{execute_decoupled, DecoupledConfig, NetworkState};
use alsim::graph::PortGraph;
use alsim::schedule::{Fate, Schedule, Wake};

const GOLDEN: &str = "\
round=1 edge=0:1->1:2 origin=0 emitted=0 hops=1
round=1 edge=0:2->2:1 origin=0 emitted=0 hops=1
round=2 edge=1:1->2:2 origin=0 emitted=0 hops=2
round=2 edge=2:2->1:1 origin=0 emitted=0 hops=2
";

fn lone_waker() -> Schedule {
    Schedule::new(vec![Wake::At(0), Wake::Never, Wake::Never], vec![Fate::Correct; 3]).unwrap()
}

#[test]
fn triangle_trace_matches_hand_derivation() {
    let g = PortGraph::ring(vec![0, 1, 2], 3).unwrap();
    let cfg = DecoupledConfig {
        record_trace: true,
        ..DecoupledConfig::default()
    };
    let run = execute_decoupled(&g, &lone_waker(), &ViewDigest { radius: 1 }, 3, &cfg).unwrap();
    let text: String = run.trace.iter().map(|e| format!("{e}\n")).collect();
    assert_eq!(text, GOLDEN);
    assert_eq!(run.rounds, 2);
    assert_eq!(run.announcements, 1);
    assert_eq!(run.deliveries, 4);
}

#[test]
fn lone_waker_sees_only_itself() {
    let g = PortGraph::ring(vec![0, 1, 2], 3).unwrap();
    let algo = ViewDigest { radius: 1 };
    let run = execute_decoupled(&g, &lone_waker(), &algo, 3, &DecoupledConfig::default()).unwrap();
    assert_eq!(run.outcomes[0].visible, Some(1));
    assert_eq!(run.labeling(), run_async(&g, &lone_waker(), &algo, 3).unwrap());
}

#[test]
fn routes_record_one_pair_per_hop() {
    let g = PortGraph::torus(3, 3, (0..9).collect(), 9).unwrap();
    let mut net = NetworkState::new(&g);
    net.wake(4);
    for _ in 0..3 {
        net.flood_round(None).unwrap();
    }
    for v in 0..9 {
        for d in net.q_in(v) {
            assert_eq!(d.message.route.len(), d.message.hops());
            assert_eq!(d.message.route[0].0, 0);
            assert_eq!(d.message.emitted_at, 0);
            assert!(d.round as usize >= d.message.hops());
        }
    }
}
