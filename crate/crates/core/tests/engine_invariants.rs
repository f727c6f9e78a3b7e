//! Structural guarantees of full runs.

mod common;

use eap_core::consensus::Presence;
use eap_core::engine::run_eap_detailed;
use eap_core::synthgen::{gen_colliding, normalize_synthetic};
use eap_core::{EapConfig, PreferenceMode, TrackKind};
use proptest::prelude::*;

#[test]
fn temporal_messages_stay_in_bounds_on_colliding() {
    let ds = normalize_synthetic(&gen_colliding(0)).unwrap();
    let sim = common::similarities(&ds, PreferenceMode::PerTimeMin);
    let cfg = EapConfig { instrument: true, ..EapConfig::default() };
    let out = run_eap_detailed(&ds, &sim, &cfg).unwrap();
    assert!(out.stats.bound_checks > 0);
    assert_eq!(out.stats.bound_violations, 0);
    assert_eq!(out.stats.inactive_accesses, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn runs_are_structurally_sound(seed in any::<u64>(), n in 6usize..=20, steps in 2usize..=4, gapped in any::<bool>()) {
        let ds = common::random_dataset(seed, n, steps, 2, if gapped { 0.15 } else { 0.0 });
        let sim = common::similarities(&ds, PreferenceMode::PerTimeMin);
        let cfg = EapConfig { instrument: true, max_iter: 150, ..EapConfig::default() };
        let out = run_eap_detailed(&ds, &sim, &cfg).unwrap();
        let sol = &out.solution;
        prop_assert_eq!(out.stats.bound_violations, 0);
        prop_assert_eq!(out.stats.inactive_accesses, 0);

        for node in out.registry.nodes() {
            let first_dead = node.presence.iter().position(|&p| p == Presence::Dead);
            if let Some(d) = first_dead {
                prop_assert!(node.presence[d..].iter().all(|&p| p == Presence::Dead));
            }
        }

        for t in 0..ds.n_steps() {
            for e in sol.exemplars_at(t) {
                if e.0 < ds.n_points() {
                    prop_assert_eq!(sol.exemplar_of[t][e.0], Some(e), "data exemplar picks itself");
                } else {
                    prop_assert_eq!(out.registry.presence(e, t), Presence::Alive);
                }
            }
        }

        for track in &sol.tracks {
            let end = track.death.unwrap_or(sol.n_steps);
            prop_assert!(track.birth < end);
            prop_assert_eq!(track.kind == TrackKind::Consensus, track.exemplar.0 >= ds.n_points());
            for t in 0..sol.n_steps {
                let used = sol.track_of[t].contains(&Some(track.id));
                prop_assert_eq!(used, (track.birth..end).contains(&t), "track {} at t={}", track.id, t);
            }
        }
    }
}

#[test]
fn lifecycle_log_agrees_with_counters() {
    use eap_core::engine::LifecycleKind as K;
    use eap_core::synthgen::{GaussianScenario, ScenarioKind};

    let mut sc = GaussianScenario::new(ScenarioKind::ThirdCluster, 1);
    sc.n_points = 60;
    let ds = normalize_synthetic(&sc.generate()).unwrap();
    let sim = common::similarities(&ds, PreferenceMode::PerTimeMin);
    let out = run_eap_detailed(&ds, &sim, &EapConfig { instrument: true, ..EapConfig::default() }).unwrap();
    let log = &out.stats.lifecycle_log;
    let count = |kind| log.iter().filter(|e| e.kind == kind).count();
    assert_eq!(count(K::Birth), out.stats.births);
    assert_eq!(count(K::Death), out.stats.deaths);
    assert_eq!(count(K::Swap), out.stats.swaps);
    assert_eq!(count(K::Replication), out.stats.replications);
    assert_eq!(count(K::Revival), out.stats.revivals);
    assert_eq!(count(K::HandOver), out.stats.handovers);
    assert!(out.stats.births > 0);

    for (at, e) in log.iter().enumerate() {
        let before = &log[..at];
        let known = |node| before.iter().any(|p| p.node == node || p.other == Some(node));
        match e.kind {
            K::Birth => assert!(!known(e.node), "node {} born twice", e.node),
            K::Revival => {
                // A hand-over also passes on the younger node's death.
                let mut chain = vec![e.node];
                chain.extend(before.iter().filter(|p| p.kind == K::HandOver && p.node == e.node).filter_map(|p| p.other));
                assert!(
                    before.iter().any(|p| p.kind == K::Death && chain.contains(&p.node) && p.t <= e.t),
                    "revival of {} without an earlier death",
                    e.node
                );
            }
            K::HandOver => {
                let young = e.other.expect("hand-over names the younger node");
                assert!(known(young) && known(e.node) && young != e.node, "{e:?}");
            }
            K::Swap | K::Replication | K::Death => assert!(known(e.node) || e.kind == K::Swap),
        }
        assert!(e.t < ds.n_steps());
    }
}
