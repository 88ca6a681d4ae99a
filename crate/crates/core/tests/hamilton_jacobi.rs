use hjdirac::clifford::FourVector;
use hjdirac::hamilton_jacobi::*;
use hjdirac::poly::Polynomial;
use std::sync::Arc;

fn timelike_points(n: usize) -> Vec<[f64; 4]> {
    (0..n)
        .map(|i| {
            let f = i as f64 / n as f64;
            [2.0 + f, 0.8 * (7.0 * f).sin(), 0.6 * (3.0 * f).cos(), 0.3 * f]
        })
        .collect()
}

#[test]
fn geodesic_action_values() {
    let f = GeodesicField { m0: 2.0, base: [1.0, 0.5, -0.5, 0.0], k: 0.75 };
    assert!((f.value(&[6.0, 0.5, -0.5, 0.0]).unwrap() - (10.0 + 0.75)).abs() < 1e-14);

    let f = construct_geodesic_w(1.0, [0.0; 4]);
    assert!((f.value(&[2.0, 1.0, 0.0, 0.0]).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    assert!(matches!(f.value(&[1.0, 1.0, 0.0, 0.0]), Err(HjError::NonTimelikeSeparation(_))));
}

#[test]
fn geodesic_gradient_is_mass_times_lowered_tangent() {
    let f = construct_geodesic_w(1.7, [0.0; 4]);
    for x in timelike_points(10) {
        let g = gradient(&f, &x).unwrap();
        // W = m₀√(t² − |x|²): ∂_t W = m₀t/s, ∂_i W = −m₀xⁱ/s
        let s = (x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3]).sqrt();
        let want = FourVector::new(1.7 * x[0] / s, -1.7 * x[1] / s, -1.7 * x[2] / s, -1.7 * x[3] / s);
        assert!((g - want).max_abs() < 1e-13);
        let u = f.tangent(&x).unwrap();
        assert!((g - u.lower() * 1.7).max_abs() < 1e-13);
    }
    assert!(mass_shell_check(&f, &timelike_points(50)).unwrap() < 1e-8);
}

#[test]
fn analytic_and_fd_gradients_agree() {
    let f = construct_geodesic_w(1.3, [0.0; 4]);
    for x in timelike_points(20) {
        let a = gradient(&f, &x).unwrap();
        let d = gradient_fd(&f, &x).unwrap();
        assert!((a - d).max_abs() < 1e-7);
    }
}

#[test]
fn constant_field_zero_gradient() {
    let f = ConstantField(4.2);
    assert_eq!(gradient(&f, &[1.0, 2.0, 3.0, 4.0]).unwrap(), FourVector::ZERO);
    let rep = is_exact(&GradientForm(&f), &Region::new([0.0; 4], [1.0, 1.0, 1.0, 0.0]), &ExactnessConfig::default());
    assert!(rep.verdict.passed());
    assert_eq!(rep.max_loop_integral, 0.0);
    assert_eq!(rep.closedness_residual, 0.0);
}

#[test]
fn projectile_closed_form() {
    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    // y − y₀ = u_y s − ½ g s²
    assert!((proj.position(2.0)[2] - 2.0).abs() < 1e-15);
    let m0 = 1.0;
    let g = gradient(&proj.field_at(2.0), &proj.position(2.0)).unwrap();
    assert!((g.0[2] - m0 * (2.0 - 2.0 * 1.0)).abs() < 1e-14);
    assert!((g.0[1] - m0 * 1.0).abs() < 1e-14);
    assert!((g.0[0] + m0 * proj.tdot(2.0)).abs() < 1e-14);

    let free = projectile_field(1.0, 1.0, 2.0, 0.0);
    assert_eq!(free.momentum(0.0), free.momentum(1.5));
}

#[test]
fn projectile_action_is_exact_and_on_shell() {
    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let f = proj.field_at(1.0);
    let cfg = ExactnessConfig::default();
    let rep = is_exact(&GradientForm(&f), &Region::new([0.0, -1.0, -1.0, 0.0], [2.0, 1.0, 1.0, 0.0]), &cfg);
    assert!(rep.verdict.passed(), "{rep:?}");
    assert!(rep.max_loop_ratio < 1e-8);
    // (∂W/∂t)² = m₀² + p²
    let pts: Vec<_> = (0..20).map(|i| proj.position(0.1 * i as f64)).collect();
    assert!(mass_shell_check(&f, &pts).unwrap() < 1e-8);
    for x in &pts {
        let g = gradient(&f, x).unwrap();
        let (h, p) = energy_momentum(&g);
        assert!((h * h - 1.0 - p.iter().map(|c| c * c).sum::<f64>()).abs() < 1e-8);
    }
}

#[test]
fn curl_form_fails_with_greens_value() {
    let rep = is_exact(
        &CurlForm,
        &Region::new([0.0, -1.0, -1.0, 0.0], [0.0, 1.0, 1.0, 0.0]),
        &ExactnessConfig { n_loops: 10, ..Default::default() },
    );
    assert!(!rep.verdict.passed());
    for l in &rep.loops {
        assert!((l.integral - 2.0 * l.area()).abs() <= 0.01 * 2.0 * l.area());
    }
}

#[test]
fn null_plane_wave_on_shell() {
    let f = PlaneWaveField::null([0.3, -0.4, 1.2]);
    assert_eq!(f.rest_mass(), Some(0.0));
    let r = mass_shell_check(&f, &timelike_points(5)).unwrap();
    assert!(r < 1e-15, "{r}");
}

#[test]
fn scaling_maps_preserve_exactness() {
    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let f = proj.field_at(0.5).with_offset(20.0);
    let region = Region::new([0.0, -1.0, -1.0, 0.0], [1.0, 1.0, 1.0, 0.0]);
    let cfg = ExactnessConfig::default();

    let id = scale_check(&f, &IdentityMap, &region, &cfg);
    let plain = is_exact(&GradientForm(&f), &region, &cfg);
    assert_eq!(id.forward.max_loop_integral, plain.max_loop_integral);
    assert_eq!(id.forward.closedness_residual, plain.closedness_residual);

    assert!(scale_check(&f, &SquareMap, &region, &cfg).passed());
    assert!(scale_check(&f, &ExpMap { k: 0.3 }, &region, &cfg).passed());

    // p* = k e^{kW} p
    let x = proj.position(0.7);
    let w = f.value(&x).unwrap();
    let scaled = ScaledForm { field: &f, psi: &ExpMap { k: 0.3 } }.covector(&x).unwrap();
    let want = gradient(&f, &x).unwrap() * (0.3 * (0.3 * w).exp());
    assert!((scaled - want).max_abs() <= 1e-12 * want.max_abs());
}

#[test]
fn non_monotone_map_has_no_inverse() {
    let f = projectile_field(1.0, 1.0, 2.0, 1.0).field_at(0.5);
    let region = Region::new([0.0, -1.0, -1.0, 0.0], [1.0, 1.0, 1.0, 0.0]);
    // W changes sign on this box, so W² is not monotone there
    let rep = scale_check(&f, &SquareMap, &region, &ExactnessConfig::default());
    assert!(rep.non_monotone);
    assert!(rep.inverse.is_none());
}

#[test]
fn monotone_inversion() {
    let psi = MonotoneMix { a: 1.0, b: 0.5, c: 0.1, d: 1e-3 };
    for w in [-2.0, -0.3, 0.0, 1.1, 4.0] {
        let back = invert_monotone(&psi, psi.value(w), -10.0, 10.0).unwrap();
        assert!((back - w).abs() < 1e-12);
    }
    assert!(invert_monotone(&psi, psi.value(20.0), -10.0, 10.0).is_none());
}

#[test]
fn trapezoid_error_is_second_order() {
    let f = construct_geodesic_w(1.3, [0.0; 4]);
    let e = |n| loop_integral(&GradientForm(&f), [0, 1], &[2.5, 0.1, -0.3, 0.0], [0.8, 0.6], n).unwrap().abs();
    let (a, b, c) = (e(40), e(80), e(160));
    assert!(((a / b).log2() - 2.0).abs() < 0.1);
    assert!(((b / c).log2() - 2.0).abs() < 0.1);
}

#[test]
fn parallel_split_recovers_injected_constant() {
    let geo = construct_geodesic_w(1.0, [0.0; 4]);
    let pts = timelike_points(40);
    let plain = decompose_parallel_perp(Arc::new(geo.clone()), &geo, &pts).unwrap();
    assert!(plain.spin.max_abs() < 1e-10);

    let c = FourVector::new(0.0, 0.5, 0.0, 0.0);
    let shifted = Arc::new(LinearShift { inner: Arc::new(geo.clone()), c });
    let d = decompose_parallel_perp(shifted, &geo, &pts).unwrap();
    assert!((d.spin - c).max_abs() < 1e-10, "{:?}", d.spin);
    let again = decompose_parallel_perp(Arc::new(d.parallel.clone()), &geo, &pts).unwrap();
    assert!(again.spin.max_abs() < 1e-10);
}

#[test]
fn single_sample_split_is_ill_conditioned() {
    let geo = construct_geodesic_w(1.0, [0.0; 4]);
    let r = decompose_parallel_perp(Arc::new(geo.clone()), &geo, &[[2.0, 0.0, 0.0, 0.0]]);
    assert!(matches!(r, Err(HjError::IllConditioned(_))));
}

#[test]
fn polynomial_field_gradient() {
    let f = PolynomialField { poly: Polynomial::linear([1.0, 2.0, -3.0, 0.5], 7.0), m0: None };
    let g = gradient(&f, &[0.4, 0.1, 0.2, 0.3]).unwrap();
    assert_eq!(g, FourVector::new(1.0, 2.0, -3.0, 0.5));
}

#[test]
fn field_specs_from_json() {
    let spec: FieldSpec =
        serde_json::from_str(r#"{"kind":"geodesic","parameters":{"m0":2.0,"base":[0,0,0,0]}}"#).unwrap();
    let f = spec.build().unwrap();
    assert!((f.value(&[3.0, 0.0, 0.0, 0.0]).unwrap() - 6.0).abs() < 1e-14);
    let bad: FieldSpec = serde_json::from_str(r#"{"kind":"projectile","parameters":{"m0":1,"nope":2}}"#).unwrap();
    assert!(bad.build().is_err());
}
