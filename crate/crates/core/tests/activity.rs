//! Points entering and leaving the dataset.

mod common;

use eap_core::engine::run_eap_detailed;
use eap_core::synthgen::{gen_colliding, normalize_synthetic};
use eap_core::{EapConfig, PreferenceMode};

#[test]
fn full_activity_is_unaffected_by_activity_handling() {
    let ds = normalize_synthetic(&gen_colliding(3)).unwrap();
    let sim = common::similarities(&ds, PreferenceMode::PerTimeMin);
    let on = run_eap_detailed(&ds, &sim, &EapConfig::default()).unwrap();
    let off = run_eap_detailed(&ds, &sim, &EapConfig { activity: false, ..EapConfig::default() }).unwrap();
    assert_eq!(on.solution, off.solution);
    assert_eq!(on.layers, off.layers);
    assert_eq!(on.stats.entry_updates(), off.stats.entry_updates());
}

#[test]
fn gapped_points_never_touch_inactive_messages() {
    for seed in 0..4 {
        let ds = common::random_dataset(seed, 24, 5, 2, 0.25);
        assert!(!ds.fully_active());
        let sim = common::similarities(&ds, PreferenceMode::PerTimeMin);
        let cfg = EapConfig { instrument: true, ..EapConfig::default() };
        let out = run_eap_detailed(&ds, &sim, &cfg).unwrap();
        assert_eq!(out.stats.inactive_accesses, 0, "seed {seed}");
        for t in 0..ds.n_steps() {
            for i in 0..ds.n_points() {
                assert_eq!(out.solution.exemplar_of[t][i].is_some(), ds.is_active(t, i));
            }
        }
    }
}
