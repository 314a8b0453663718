use hbt_core::{ClassicalParams, PhaseMode};

#[test]
fn monte_carlo_estimator_is_unbiased() {
    let c = ClassicalParams::new(1.0, 0.7, 10.0, 1.0, 100.0, PhaseMode::RandomUniform).unwrap();
    let (x1, x2) = (12.0, -31.0);
    let exact = c.correlation_analytic(x1, x2);
    let z: Vec<f64> = (0..100)
        .map(|seed| {
            let est = c.correlation_mc(x1, x2, 20_000, seed).unwrap();
            (est.mean - exact) / est.std_error
        })
        .collect();
    assert!(z.iter().all(|v| v.abs() < 4.0), "{z:?}");
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (z.len() - 1) as f64;
    // mean of 100 standard normals has standard deviation 0.1
    assert!(mean.abs() < 0.4, "{mean}");
    assert!((0.6..1.5).contains(&var), "{var}");
}

#[test]
fn fixed_phase_intensity_and_random_mode() {
    let fixed = ClassicalParams::new(1.0, 1.0, 10.0, 1.0, 100.0, PhaseMode::Fixed(0.4)).unwrap();
    assert_eq!(fixed.intensity_for_mode(3.0), fixed.intensity(3.0, 0.4));
    let random =
        ClassicalParams::new(1.0, 0.5, 10.0, 1.0, 100.0, PhaseMode::RandomUniform).unwrap();
    assert_eq!(random.intensity_for_mode(3.0), 1.25);
}

#[test]
fn classical_fringes_match_the_quantum_period_under_the_optical_mapping() {
    // Δ = λL/π and k = 2π/λ: cos(2k x₀ Δx / L) = cos(4 x₀ Δx / Δ)
    use hbt_core::{Exchange, PacketParams, PropagationInput};
    let (wavelength, l, x0) = (0.05, 1000.0, 0.5);
    let k = std::f64::consts::TAU / wavelength;
    let c = ClassicalParams::new(1.0, 1.0, k, 2.0 * x0, l, PhaseMode::RandomUniform).unwrap();
    let p = PacketParams::new(
        0.01,
        x0,
        Exchange::Boson,
        PropagationInput::Optical {
            wavelength,
            distance: l,
        },
    )
    .unwrap();
    let classical_period = std::f64::consts::TAU / (2.0 * k * x0 / l);
    let quantum_period = p.fringe_period().unwrap();
    assert!((classical_period - quantum_period).abs() < 1e-6 * quantum_period);
    let dx = 0.25 * quantum_period;
    let arg = c.cosine_argument(0.5 * dx, -0.5 * dx).abs();
    assert!((arg - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
}
