use clifford_hull::estimators::{h_closed, h_closed_form, h_series, poisson_small_probs};

/// `E[1/(ζ+4)]` by direct summation of the Poisson mass, the defining sum.
fn h_direct(nu: f64) -> f64 {
    let mut p = (-nu).exp();
    let mut sum = p / 4.0;
    let mut k = 0.0;
    while k < nu + 40.0 * nu.sqrt() + 50.0 {
        k += 1.0;
        p *= nu / k;
        sum += p / (k + 4.0);
    }
    sum
}

#[test]
fn closed_form_matches_series_on_log_grid() {
    for i in 0..50 {
        let nu = 0.1 * 1000f64.powf(i as f64 / 49.0);
        let c = h_closed(nu).unwrap();
        let s = h_series(nu, 1e-16);
        assert!((c - s).abs() <= 1e-10 * s, "nu = {nu}: {c} vs {s}");
        if nu < 600.0 {
            let d = h_direct(nu);
            assert!((c - d).abs() <= 1e-12 * d, "nu = {nu}: {c} vs direct {d}");
        }
    }
}

#[test]
fn small_argument_limit() {
    for nu in [1e-4, 1e-6, 1e-9, 1e-12] {
        assert!((h_closed(nu).unwrap() - 0.25).abs() < 1e-8 * 0.25 + nu, "nu = {nu}");
    }
    assert!((h_closed(1e-12).unwrap() - 0.25).abs() < 1e-8);
    assert!(h_closed(0.0).is_err());
    // the raw expression cancels catastrophically here, which is why h_closed switches branch
    assert!((h_closed_form(1e-4) - 0.25).abs() > 1e-8);
}

#[test]
fn small_count_probabilities_sum_to_one() {
    for nu in [1e-3, 0.5, 1.0, 4.0, 39.5, 158.0] {
        let p = poisson_small_probs(nu).unwrap();
        let total = p.p_lt2 + p.p_eq2 + p.p_eq3 + p.p_ge4;
        assert!((total - 1.0).abs() < 1e-14, "nu = {nu}");
        assert!(p.p_ge4 >= 0.0);
    }
    let p = poisson_small_probs(1e-3).unwrap();
    let expected = 1e-12 / 24.0 * (-1e-3f64).exp();
    assert!((p.p_ge4 - expected).abs() < 1e-3 * expected);
}
