//! The committed fixture file must match freshly computed values.

use polyapprox::fixtures;

#[test]
fn committed_fixtures_are_current() {
    let path = fixtures::default_path();
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let pinned = fixtures::parse(&text).unwrap();
    let fresh = fixtures::compute(true).unwrap();
    assert_eq!(pinned.len(), fresh.len(), "fixture count changed");
    let deltas = fixtures::compare(&pinned, &fresh);
    for d in &deltas {
        assert!(
            d.within_tolerance,
            "fixture {} drifted: pinned {:?}, fresh {}, delta {:.3e}",
            d.name, d.pinned, d.fresh, d.rel_delta
        );
    }
    println!("all {} fixtures within tolerance", deltas.len());
}
