use schroflow_web::{decay, profile, spectrum, spectrum_js};

#[test]
fn spectrum_classifies() {
    let s = spectrum(3, -0.1875, 4).unwrap();
    assert_eq!(s.classification, "loss_of_decay");
    assert_eq!(s.rows[0].alpha, 0.25);
    assert_eq!(spectrum(3, -0.25, 1).unwrap().classification, "invalid");
    assert!(spectrum(3, 0.0, 0).is_err());
    let json = spectrum_js(3, 0.0, 1).unwrap();
    assert!(json.contains("\"classification\":\"classical_candidate\""));
}

#[test]
fn profile_at_time_zero_is_real() {
    let p = profile(3, -0.1875, 1, 0.0, 5.0, 50).unwrap();
    assert_eq!(p.r.len(), 50);
    assert!(p.im.iter().all(|&v| v == 0.0));
    assert!((p.gamma - 3.25).abs() < 1e-12);
    assert!(profile(3, -0.3, 0, 1.0, 5.0, 50).is_err());
    assert!(profile(3, 0.0, 0, 1.0, 5.0, 1).is_err());
}

#[test]
fn decay_curve_tail_slope() {
    let d = decay(3, -0.1875, 0.25, 5, 10).unwrap();
    assert_eq!(d.times.len(), 6);
    assert!((d.slope - d.theory).abs() < 0.02);
    assert!(decay(3, 0.0, 0.0, 0, 1).is_err());
}
