use hjdirac::clifford::*;
use hjdirac::dirac_ops::*;
use hjdirac::hamilton_jacobi::*;
use hjdirac::poly::Polynomial;

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

#[test]
fn slash_gradient_of_geodesic_action() {
    let rep = build_gamma_rep();
    let f = construct_geodesic_w(1.4, [0.0; 4]);
    let x = [3.0, 0.4, -0.2, 0.7];
    let m = dirac_slash_gradient(&rep, &WaveFunction::Identity, &f, &x).unwrap();
    let want = rep.slash(&f.tangent(&x).unwrap()).matrix * C64::new(1.4, 0.0);
    assert!(max_abs(&(m - want)) < 1e-13);

    let m = dirac_slash_gradient(&rep, &WaveFunction::Constant(C64::new(2.0, 1.0)), &f, &x).unwrap();
    assert_eq!(max_abs(&m), 0.0);
}

#[test]
fn phase_wave_function_slash_gradient() {
    let rep = build_gamma_rep();
    let f = construct_geodesic_w(1.0, [0.0; 4]);
    let x = [2.0, 0.5, 0.0, 0.0];
    let psi = WaveFunction::phase();
    let w = f.value(&x).unwrap();
    let m = dirac_slash_gradient(&rep, &psi, &f, &x).unwrap();
    // ψ′ = i e^{iW}; on the positive branch of u̸ the operator acts as i·ψ
    let u = f.tangent(&x).unwrap();
    let sys = rep.slash_eigensystem(&u).unwrap();
    for xi in &sys.blocks[0].vectors {
        let lhs = m * xi.0;
        let rhs = xi.0 * (i() * psi.value(w));
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

#[test]
fn split_along_geodesic() {
    let rep = build_gamma_rep();
    let m0 = 1.3;
    let f = construct_geodesic_w(m0, [0.0; 4]);
    let u = FourVector::new(1.25, 0.75, 0.0, 0.0);
    let line = StraightLine { origin: [0.0; 4], u };
    let d = split_along_curve(&rep, &line, &WaveFunction::Identity, &f, 2.0).unwrap();
    assert!(max_abs(&d.wedge) < 1e-12);
    assert!((d.scalar - C64::new(m0, 0.0)).norm() < 1e-12);
    assert!(d.reconstruction_residual < 1e-12);
}

#[test]
fn split_along_projectile_matches_curve_derivative() {
    let rep = build_gamma_rep();
    let proj = projectile_field(1.0, 1.0, 2.0, 1.0);
    let f = proj.field_at(1.0);
    for psi in [WaveFunction::Identity, WaveFunction::phase()] {
        let d = split_along_curve(&rep, &proj, &psi, &f, 1.0).unwrap();
        assert!(d.along_curve_residual < 1e-6);
        assert!((d.scalar - d.along_curve).norm() < 1e-6);
    }
}

#[test]
fn split_of_transverse_gradient() {
    let rep = build_gamma_rep();
    let f = PolynomialField { poly: Polynomial::linear([0.0, 0.3, 0.0, 0.0], 0.0), m0: None };
    let line = StraightLine { origin: [0.0; 4], u: FourVector::new(1.0, 0.0, 0.0, 0.0) };
    let d = split_along_curve(&rep, &line, &WaveFunction::Identity, &f, 0.5).unwrap();
    assert!(d.scalar.norm() < 1e-15);
    let want = rep.gamma[0] * rep.gamma[1] * C64::new(0.3, 0.0);
    assert!(max_abs(&(d.wedge - want)) < 1e-15);
}

#[test]
fn common_eigenvectors() {
    let rep = build_gamma_rep();
    let e0 = FourVector::new(1.0, 0.0, 0.0, 0.0);
    let st = simultaneous_eigenvector(&rep, &e0, &e0).unwrap();
    assert!((st.xi.0[0].norm() - 1.0).abs() < 1e-12);
    assert!(st.xi.0[2].norm() < 1e-12 && st.xi.0[3].norm() < 1e-12);

    let w = FourVector::new(2.0, 1.0, 0.0, 0.0);
    let st = simultaneous_eigenvector(&rep, &(w * 2.0), &w).unwrap();
    let r3 = 3f64.sqrt();
    assert!((st.eigen_w - C64::new(r3, 0.0)).norm() < 1e-10);
    assert!((st.eigen_v - C64::new(2.0 * r3, 0.0)).norm() < 1e-10);
    assert!(st.residual_v < 1e-10 && st.residual_w < 1e-10);

    let r = simultaneous_eigenvector(&rep, &e0, &FourVector::new(1.0, 0.5, 0.0, 0.0));
    assert!(matches!(r, Err(DiracError::NotCommuting { .. })));
}

#[test]
fn plane_wave_residuals() {
    let rep = build_gamma_rep();
    let m0 = 1.7;
    let rest = FourVector::new(m0, 0.0, 0.0, 0.0);
    let upper = Bispinor(Spinor::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    let r = conventional_dirac_residual(&rep, i(), m0, &rest, &upper).unwrap();
    assert!(r.residual < 1e-12 && r.alpha_residual < 1e-12);

    let p = FourVector::new(2f64.sqrt(), 1.0, 0.0, 0.0);
    let sys = rep.slash_eigensystem(&p).unwrap();
    for xi in &sys.blocks[0].vectors {
        assert!(conventional_dirac_residual(&rep, i(), 1.0, &p, xi).unwrap().residual < 1e-10);
    }
    for xi in &sys.blocks[1].vectors {
        let r = conventional_dirac_residual(&rep, i(), 1.0, &p, xi).unwrap();
        assert!((r.residual - 2.0).abs() < 1e-10);
    }
    assert!(matches!(
        conventional_dirac_residual(&rep, i(), 2.0, &p, &upper),
        Err(DiracError::OffShell { .. })
    ));
}

#[test]
fn spin_shift_commutes_with_shifted_gradient() {
    let rep = build_gamma_rep();
    let m0 = 1.2;
    let geo = construct_geodesic_w(m0, [0.0; 4]);
    let c = FourVector::new(0.1, 0.4, -0.3, 0.2);
    let f = LinearShift { inner: std::sync::Arc::new(geo.clone()), c };
    let x = [3.0, 0.2, 0.5, -0.4];
    let g = gradient(&f, &x).unwrap();
    let u = geo.tangent(&x).unwrap();
    let ds = spin_shifted_tangent(&u, &c, m0);
    let comm = commutator(&rep.slash_covector(&g), &rep.slash(&ds).matrix);
    assert!(frobenius(&comm) < 1e-10);
    // the unshifted tangent does not commute
    let comm = commutator(&rep.slash_covector(&g), &rep.slash(&u).matrix);
    assert!(frobenius(&comm) > 1e-3);
}

#[test]
fn lie_derivative_examples() {
    let c = DriftCongruence { m0: 1.0, drift: FourVector::new(0.0, 0.2, 0.0, 0.0) };
    assert!(lie_derivative(&c, &[0.3, 0.1, 0.2, 0.0]).unwrap().max_abs() < 1e-12);

    let geo = GeodesicCongruence { field: construct_geodesic_w(1.0, [0.0; 4]) };
    assert!(lie_derivative(&geo, &[3.0, 0.5, 0.2, -0.1]).unwrap().euclid_norm() < 1e-6);

    let tilted = FnCongruence {
        label: "tilted".into(),
        u: Box::new(|_x: &[f64; 4]| FourVector::new(1.0, 0.0, 0.0, 0.0)),
        p: Box::new(|x: &[f64; 4]| FourVector::new(1.0, 0.1 * x[0], 0.0, 0.0)),
    };
    let l = lie_derivative(&tilted, &[0.7, 0.0, 0.0, 0.0]).unwrap();
    assert!((l - FourVector::new(0.0, 0.1, 0.0, 0.0)).max_abs() < 1e-8);
}

#[test]
fn lie_transport_and_eigen_relation_agree() {
    let rep = build_gamma_rep();
    let field = construct_geodesic_w(1.0, [-3.0, 0.1, 0.0, 0.0]);
    let sampling = CongruenceSampling::default();
    let psi = WaveFunction::Identity;

    let r = transport_equivalence_check(&rep, &GeodesicCongruence { field: field.clone() }, &field, &psi, &sampling).unwrap();
    assert!(r.lie_verdict.passed() && r.dirac_verdict.passed(), "{r:?}");
    assert!(r.lie_residual < 1e-6);

    let r = transport_equivalence_check(&rep, &ShearCongruence { field: field.clone(), rate: 0.1 }, &field, &psi, &sampling).unwrap();
    assert!(!r.lie_verdict.passed() && !r.dirac_verdict.passed(), "{r:?}");
    assert!(r.consistent);

    // p = m₀u + constant drift, with W carrying the matching linear term
    let drift = FourVector::new(0.0, 0.3, -0.1, 0.0);
    let w = PolynomialField { poly: Polynomial::linear(FourVector::new(1.0, 0.0, 0.0, 0.0).lower().0, 0.0), m0: Some(1.0) };
    let shifted = LinearShift { inner: std::sync::Arc::new(w), c: drift.lower() };
    let cong = DriftCongruence { m0: 1.0, drift };
    let r = transport_equivalence_check(&rep, &cong, &shifted, &psi, &sampling).unwrap();
    assert!(r.lie_verdict.passed() && r.dirac_verdict.passed(), "{r:?}");
    assert!((r.spin - drift.lower()).max_abs() < 1e-10);
}
