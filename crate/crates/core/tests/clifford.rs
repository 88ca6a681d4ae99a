use hjdirac::clifford::*;
use nalgebra::Matrix2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dirac basis assembled from Pauli blocks, independent of the library.
fn hand_gammas() -> [Mat4; 4] {
    let z = C64::new(0.0, 0.0);
    let pauli = [
        Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
    ];
    let mut g0 = Mat4::zeros();
    for k in 0..4 {
        g0[(k, k)] = if k < 2 { c(1., 0.) } else { c(-1., 0.) };
    }
    let block = |s: &Matrix2<C64>| {
        let mut m = Mat4::from_element(z);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j + 2)] = s[(i, j)];
                m[(i + 2, j)] = -s[(i, j)];
            }
        }
        m
    };
    [g0, block(&pauli[0]), block(&pauli[1]), block(&pauli[2])]
}

#[test]
fn representation_matches_hand_built_dirac_basis() {
    let rep = build_gamma_rep();
    let hand = hand_gammas();
    for a in 0..4 {
        assert_eq!(rep.gamma[a], hand[a], "γ{a}");
    }
    for k in 0..4 {
        let want = if k < 2 { 1.0 } else { -1.0 };
        assert_eq!(rep.gamma[0][(k, k)], c(want, 0.0));
    }
}

#[test]
fn anticommutator_examples() {
    let rep = build_gamma_rep();
    assert_eq!(anticommutator(&rep.gamma[0], &rep.gamma[1]), Mat4::zeros());
    assert_eq!(anticommutator(&rep.gamma[1], &rep.gamma[1]), Mat4::identity() * c(-2.0, 0.0));
    assert_eq!(anticommutator(&rep.gamma[0], &rep.gamma[0]), Mat4::identity() * c(2.0, 0.0));
}

#[test]
fn slash_examples() {
    let rep = build_gamma_rep();
    let h = hand_gammas();
    assert_eq!(rep.slash(&FourVector::ZERO).matrix, Mat4::zeros());
    assert_eq!(rep.slash(&FourVector::new(1., 0., 0., 0.)).matrix, h[0]);
    // index lowered: γ_a vᵃ = 2γ⁰ − γ¹
    let explicit = h[0] * c(2.0, 0.0) - h[1];
    let s = rep.slash(&FourVector::new(2., 1., 0., 0.)).matrix;
    assert!(max_abs(&(s - explicit)) < 1e-15);
    assert!(max_abs(&(explicit * explicit - Mat4::identity() * c(3.0, 0.0))) < 1e-14);
}

#[test]
fn eigenvalues_of_timelike_slash() {
    let rep = build_gamma_rep();
    let sys = rep.slash_eigensystem(&FourVector::new(1., 0., 0., 0.)).unwrap();
    assert_eq!(sys.blocks[0].eigenvalue, c(1.0, 0.0));
    assert_eq!(sys.blocks[1].eigenvalue, c(-1.0, 0.0));

    let v = FourVector::new(2., 1., 0., 0.);
    let sys = rep.slash_eigensystem(&v).unwrap();
    let r3 = 3f64.sqrt();
    assert!((sys.blocks[0].eigenvalue - c(r3, 0.0)).norm() < 1e-10);
    assert!((sys.blocks[1].eigenvalue - c(-r3, 0.0)).norm() < 1e-10);
    // independent oracle: S − λI has exactly two vanishing singular values
    let s = hand_gammas()[0] * c(2.0, 0.0) - hand_gammas()[1];
    for lambda in [r3, -r3] {
        let shifted = s - Mat4::identity() * c(lambda, 0.0);
        let sv = shifted.singular_values();
        let zeros = sv.iter().filter(|x| **x < 1e-10).count();
        assert_eq!(zeros, 2, "λ = {lambda}: {sv:?}");
    }
    for b in &sys.blocks {
        assert_eq!(b.vectors.len(), 2);
    }
}

#[test]
fn null_vector_has_no_eigensystem() {
    let rep = build_gamma_rep();
    assert!(matches!(rep.slash_eigensystem(&FourVector::new(1., 1., 0., 0.)), Err(CliffordError::NullVector { .. })));
}

#[test]
fn product_decomposition_examples() {
    let rep = build_gamma_rep();
    let h = hand_gammas();
    let e0 = FourVector::new(1., 0., 0., 0.);
    let e1 = FourVector::new(0., 1., 0., 0.);

    let d = rep.product_decomposition(&e0, &e0);
    assert_eq!(d.dot, 1.0);
    assert_eq!(max_abs(&d.wedge), 0.0);

    // with the lowered index, slash(e1) = γ_1 = −γ¹, so the wedge is −γ⁰γ¹
    let d = rep.product_decomposition(&e0, &e1);
    assert_eq!(d.dot, 0.0);
    assert!(max_abs(&(d.wedge + h[0] * h[1])) < 1e-15);
    assert!(d.reconstruction_residual(&rep, &e0, &e1) < 1e-15);

    let w = e0 * 3.0;
    let d = rep.product_decomposition(&e0, &w);
    assert_eq!(d.dot, 3.0);
    assert_eq!(max_abs(&d.wedge), 0.0);
}

#[test]
fn alpha_matrices_follow_from_gammas() {
    let rep = build_gamma_rep();
    let h = hand_gammas();
    assert_eq!(rep.alpha[0], h[0]);
    for k in 1..4 {
        assert!(max_abs(&(rep.alpha[k] - h[0] * h[k])) < 1e-15);
    }
}

#[test]
fn commutator_norm_matches_wedge_magnitude() {
    let rep = build_gamma_rep();
    let p = FourVector::new(2.0, 0.3, -0.4, 0.1);
    let q = FourVector::new(0.5, 1.0, 0.2, -0.7);
    // ‖[p̸, q̸]‖_F = 4 ‖p ∧ q‖ with the Euclidean bivector norm
    let mut wedge2 = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let w = p.0[a] * q.0[b] - p.0[b] * q.0[a];
            wedge2 += w * w;
        }
    }
    let n = slash_commutator_norm(&rep, &p, &q);
    assert!((n - 4.0 * wedge2.sqrt()).abs() < 1e-12, "{n}");
}
