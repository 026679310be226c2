use sommerville_wasm::{build_tiling, profile, run_optimizer};

#[test]
fn tiling_at_the_optimum_is_uniform() {
    let t = build_tiling(1.0 / 3f64.sqrt(), false, 3, 6).unwrap();
    assert_eq!(t.triangles().len(), 3 * 18);
    assert_eq!(t.positions().len(), 2 * t.colors().len());
    let want = 3f64.sqrt() / 4.0;
    assert!(t.thetas().iter().all(|x| (x - want).abs() < 1e-12));
    assert!((t.ratio_vs_kuhn() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn swapping_keeps_the_shapes() {
    let a = build_tiling(0.8, false, 4, 8).unwrap();
    let b = build_tiling(0.8, true, 4, 8).unwrap();
    assert_ne!(a.colors(), b.colors());
    assert!((a.worst_theta() - b.worst_theta()).abs() < 1e-12);
    assert!(build_tiling(-1.0, false, 2, 2).is_err());
}

#[test]
fn profile_peaks_at_the_optimum() {
    let curve = profile(3, 2, 0.2, 1.0, 801).unwrap();
    let (t, _) = curve
        .chunks(2)
        .map(|c| (c[0], c[1]))
        .fold((0.0, f64::MIN), |best, c| if c.1 > best.1 { c } else { best });
    assert!((t - 1.0 / 3f64.sqrt()).abs() < 1e-3, "{t}");
    assert!(profile(3, 1, 0.2, 1.0, 10).is_err());
}

#[test]
fn optimizer_output_layout() {
    let out = run_optimizer(2, 0).unwrap();
    assert_eq!(out.len(), 3);
    assert!((out[1] - 1.0 / 3f64.sqrt()).abs() < 1e-6);
}
