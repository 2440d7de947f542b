use heom_core::oracle::suite::generator_suite;

#[test]
fn assembled_generator_matches_ordered_vectors() {
    let results = generator_suite().unwrap();
    let mut worst = 0.0f64;
    for r in &results {
        println!(
            "{:<48} m={} n={} {:?} ados={:>4} entries={:>6} max_abs={:.2e} max_rel={:.2e}",
            r.system, r.m_max, r.n_max, r.parity, r.n_ados, r.diff.entries, r.diff.max_abs, r.diff.max_rel
        );
        assert_eq!(r.diff.missing_ados, 0, "{}", r.system);
        worst = worst.max(r.diff.max_rel);
    }
    assert!(worst <= 4.0 * f64::EPSILON, "worst relative entry difference {worst:e}");
}
