use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{smat, svec};

fn el(alg: &Arc<Algebra>, c: &[f64]) -> Element {
    Element::from_slice(alg, c).unwrap()
}

fn families() -> Vec<Arc<Algebra>> {
    vec![
        Algebra::orthant(3),
        Algebra::lorentz(3),
        Algebra::sym_psd(3),
        Algebra::direct_sum(vec![Algebra::lorentz(2), Algebra::sym_psd(2), Algebra::orthant(2)]),
    ]
}

fn assert_close(a: &DVector<f64>, b: &[f64], tol: f64) {
    let b = DVector::from_column_slice(b);
    assert!((a - &b).norm() <= tol, "{a:?} != {b:?}");
}

#[test]
fn orthant_product() {
    let a = Algebra::orthant(2);
    let p = el(&a, &[1.0, 2.0]).jordan_product(&el(&a, &[3.0, 4.0])).unwrap();
    assert_close(p.coords(), &[3.0, 8.0], 0.0);
}

#[test]
fn sym_psd_product_of_diagonals() {
    let a = Algebra::sym_psd(2);
    let x = Element::from_matrix(&a, &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).unwrap();
    let y = Element::from_matrix(&a, &DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 4.0]))).unwrap();
    let p = x.jordan_product(&y).unwrap().to_matrix().unwrap();
    assert!((p - DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 8.0]))).norm() < 1e-15);
}

#[test]
fn identity_is_neutral() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for alg in families() {
        let x = Element::random(&alg, &mut rng);
        let p = Element::identity(&alg).jordan_product(&x).unwrap();
        assert!((p.coords() - x.coords()).norm() < 1e-14);
    }
}

#[test]
fn mismatched_algebras_are_rejected() {
    let a = el(&Algebra::orthant(2), &[1.0, 1.0]);
    let b = el(&Algebra::orthant(3), &[1.0, 1.0, 1.0]);
    assert!(matches!(a.jordan_product(&b), Err(crate::Error::Dimension(_))));
    assert!(Element::from_slice(&Algebra::orthant(2), &[1.0]).is_err());
}

#[test]
fn lorentz_product_formula() {
    let a = Algebra::lorentz(2);
    let x = el(&a, &[2.0, 1.0, -1.0]);
    let y = el(&a, &[0.5, 3.0, 2.0]);
    // (αβ + ā·b̄, α b̄ + β ā)
    let p = x.jordan_product(&y).unwrap();
    assert_close(p.coords(), &[1.0 + 3.0 - 2.0, 6.0 + 0.5, 4.0 - 0.5], 1e-15);
}

#[test]
fn quadratic_representation_examples() {
    let a = Algebra::orthant(2);
    let p = el(&a, &[2.0, 3.0]).quadratic_representation();
    assert_close(&(p * DVector::from_vec(vec![1.0, 1.0])), &[4.0, 9.0], 1e-14);

    for alg in families() {
        let p = Element::identity(&alg).quadratic_representation();
        assert!((p - DMatrix::identity(alg.dim(), alg.dim())).norm() < 1e-14);
    }

    let s = Algebra::sym_psd(2);
    let x = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
    let px = Element::from_matrix(&s, &x).unwrap().quadratic_representation();
    let out = smat((px * svec(&DMatrix::identity(2, 2))).as_slice(), 2);
    assert!((out - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]))).norm() < 1e-14);
}

#[test]
fn sym_psd_quadratic_representation_is_congruence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = Algebra::sym_psd(4);
    for _ in 0..20 {
        let x = Element::random(&s, &mut rng);
        let y = Element::random(&s, &mut rng);
        let mx = x.to_matrix().unwrap();
        let my = y.to_matrix().unwrap();
        let want = svec(&(&mx * my * &mx));
        let got = x.quadratic_representation() * y.coords();
        assert!((got - want).norm() < 1e-12 * (1.0 + mx.norm().powi(2) * 4.0));
    }
}

#[test]
fn spectral_examples() {
    let o = Algebra::orthant(3);
    let sd = el(&o, &[3.0, 1.0, 2.0]).spectral_decompose();
    assert_eq!(sd.eigenvalues, vec![3.0, 2.0, 1.0]);
    assert_close(sd.frame[0].coords(), &[1.0, 0.0, 0.0], 0.0);
    assert_close(sd.frame[1].coords(), &[0.0, 0.0, 1.0], 0.0);
    assert_close(sd.frame[2].coords(), &[0.0, 1.0, 0.0], 0.0);

    let l = Algebra::lorentz(2);
    let sd = el(&l, &[2.0, 1.0, 0.0]).spectral_decompose();
    assert_eq!(sd.eigenvalues, vec![3.0, 1.0]);

    let s = Algebra::sym_psd(2);
    let sd = Element::identity(&s).spectral_decompose();
    assert!((sd.eigenvalues[0] - 1.0).abs() < 1e-15 && (sd.eigenvalues[1] - 1.0).abs() < 1e-15);
    let sum = sd.frame[0].coords() + sd.frame[1].coords();
    assert!((sum - s.identity()).norm() < 1e-14);
}

#[test]
fn lorentz_frame_on_the_axis_uses_first_direction() {
    let l = Algebra::lorentz(3);
    let sd = el(&l, &[2.0, 0.0, 0.0, 0.0]).spectral_decompose();
    assert_close(sd.frame[0].coords(), &[0.5, 0.5, 0.0, 0.0], 0.0);
    assert_close(sd.frame[1].coords(), &[0.5, -0.5, 0.0, 0.0], 0.0);
}

#[test]
fn determinant_examples() {
    assert_eq!(el(&Algebra::orthant(3), &[1.0, 2.0, 3.0]).determinant(), 6.0);
    assert_eq!(el(&Algebra::lorentz(2), &[2.0, 1.0, 0.0]).determinant(), 3.0);
    for alg in families() {
        assert!((Element::identity(&alg).determinant() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn inverse_and_sqrt_examples() {
    let o = Algebra::orthant(2);
    assert_close(el(&o, &[2.0, 4.0]).inverse().unwrap().coords(), &[0.5, 0.25], 1e-15);

    let s = Algebra::sym_psd(2);
    let x = Element::from_matrix(&s, &DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]))).unwrap();
    let r = x.sqrt().unwrap().to_matrix().unwrap();
    assert!((r - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).norm() < 1e-14);

    let l = Algebra::lorentz(2);
    let x = el(&l, &[2.0, 1.0, 0.0]);
    let inv = x.inverse().unwrap();
    assert_close(inv.coords(), &[2.0 / 3.0, -1.0 / 3.0, 0.0], 1e-15);
    assert_close(x.jordan_product(&inv).unwrap().coords(), &[1.0, 0.0, 0.0], 1e-15);
}

#[test]
fn domain_errors() {
    let o = Algebra::orthant(2);
    assert!(matches!(el(&o, &[0.0, 1.0]).inverse(), Err(crate::Error::Domain(_))));
    assert!(matches!(el(&o, &[-1.0, 1.0]).sqrt(), Err(crate::Error::Domain(_))));
    assert!(matches!(el(&o, &[-1.0, 1.0]).power(0.5), Err(crate::Error::Domain(_))));
    assert!(el(&o, &[-1.0, 2.0]).power(2.0).is_ok());
}

#[test]
fn membership_examples() {
    assert_eq!(el(&Algebra::orthant(2), &[1.0, 1.0]).membership(1e-9), Membership::Interior);
    assert_eq!(el(&Algebra::lorentz(2), &[1.0, 1.0, 0.0]).membership(1e-9), Membership::Boundary);
    assert_eq!(el(&Algebra::orthant(2), &[1.0, -1.0]).membership(1e-9), Membership::Exterior);
}

#[test]
fn direct_sum_matches_blockwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let parts = vec![Algebra::lorentz(2), Algebra::sym_psd(2), Algebra::orthant(2)];
    let sum = Algebra::direct_sum(parts.clone());
    assert_eq!(sum.dim(), 3 + 3 + 2);
    assert_eq!(sum.rank(), 2 + 2 + 2);
    for _ in 0..20 {
        let x = Element::random_interior(&sum, 1.0, &mut rng);
        let y = Element::random(&sum, &mut rng);
        let xy = x.jordan_product(&y).unwrap();
        let inv = x.inverse().unwrap();
        for (i, (xb, yb)) in x.blocks().iter().zip(y.blocks()).enumerate() {
            let r = sum.summand_ranges()[i].clone();
            let p = xb.jordan_product(&yb).unwrap();
            assert!((p.coords() - xy.coords().rows(r.start, r.len())).norm() <= 1e-12);
            let bi = xb.inverse().unwrap();
            assert!((bi.coords() - inv.coords().rows(r.start, r.len())).norm() <= 1e-12);
        }
        let det: f64 = x.blocks().iter().map(Element::determinant).product();
        assert!((det - x.determinant()).abs() <= 1e-12 * det.abs());
    }
}

#[test]
fn custom_algebra_matches_native_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for alg in families() {
        let custom = Algebra::custom(alg.structure_tensor()).unwrap();
        assert_eq!(custom.rank(), alg.rank());
        for _ in 0..5 {
            let x = Element::random(&alg, &mut rng);
            let y = Element::from_parts(custom.clone(), alg.to_orthonormal(x.coords()));
            let mut a = x.eigenvalues();
            let mut b = y.eigenvalues();
            a.sort_by(|p, q| p.partial_cmp(q).unwrap());
            b.sort_by(|p, q| p.partial_cmp(q).unwrap());
            assert_eq!(a.len(), b.len(), "rank mismatch for {:?}", alg.family());
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() < 1e-8, "{a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn custom_spectral_handles_repeated_eigenvalues() {
    let alg = Algebra::sym_psd(3);
    let custom = Algebra::custom(alg.structure_tensor()).unwrap();
    let id = Element::identity(&custom);
    let sd = id.spectral_decompose();
    assert_eq!(sd.eigenvalues.len(), 3);
    check_frame(&id, 1e-9);
    let x = Element::from_parts(custom.clone(), 2.0 * custom.identity());
    check_frame(&x, 1e-9);
}

fn check_frame(x: &Element, tol: f64) {
    let sd = x.spectral_decompose();
    let alg = x.algebra();
    assert_eq!(sd.eigenvalues.len(), alg.rank());
    for w in sd.eigenvalues.windows(2) {
        assert!(w[0] >= w[1]);
    }
    let scale = 1.0 + x.norm();
    let mut sum = DVector::zeros(alg.dim());
    for (i, ei) in sd.frame.iter().enumerate() {
        sum += ei.coords();
        for (j, ej) in sd.frame.iter().enumerate() {
            let p = ei.jordan_product(ej).unwrap();
            let want = if i == j { ei.coords().clone() } else { DVector::zeros(alg.dim()) };
            assert!((p.coords() - want).norm() <= tol, "frame product ({i},{j}) residual");
        }
    }
    assert!((sum - alg.identity()).norm() <= tol);
    assert!((sd.reconstruct().coords() - x.coords()).norm() <= tol * scale);
}

#[test]
fn frame_validity_custom_scrambled() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alg = Algebra::direct_sum(vec![Algebra::lorentz(3), Algebra::orthant(2)]);
    let custom = Algebra::custom(alg.structure_tensor()).unwrap();
    for _ in 0..10 {
        check_frame(&Element::random(&custom, &mut rng), 1e-8);
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn pick(idx: usize) -> Arc<Algebra> {
        families()[idx % 4].clone()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn frames_are_valid(seed in any::<u64>(), idx in 0usize..4) {
            let alg = pick(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Element::random(&alg, &mut rng);
            check_frame(&x, 1e-10);
        }

        #[test]
        fn det_and_trace_are_spectral(seed in any::<u64>(), idx in 0usize..4) {
            let alg = pick(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Element::random(&alg, &mut rng);
            let vals = x.eigenvalues();
            let det: f64 = vals.iter().product();
            let tr: f64 = vals.iter().sum();
            prop_assert!((x.determinant() - det).abs() <= 1e-10 * (1.0 + det.abs()));
            prop_assert!((x.trace() - tr).abs() <= 1e-10 * (1.0 + vals.iter().map(|v| v.abs()).sum::<f64>()));
        }

        #[test]
        fn quadratic_representation_identities(seed in any::<u64>(), idx in 0usize..4) {
            let alg = pick(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Element::random_interior(&alg, 1.5, &mut rng);
            let p = x.quadratic_representation();
            let pe = p.clone() * alg.identity();
            prop_assert!((pe - x.square().coords()).norm() <= 1e-8 * (1.0 + x.norm().powi(2)));
            let back = p * x.inverse().unwrap().coords();
            prop_assert!((back - x.coords()).norm() <= 1e-8 * (1.0 + x.norm()));
        }

        #[test]
        fn fundamental_formula(seed in any::<u64>(), idx in 0usize..4) {
            let alg = pick(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = Element::random_interior(&alg, 1.5, &mut rng);
            let x = Element::random_interior(&alg, 1.5, &mut rng);
            let pw = w.quadratic_representation();
            let px = x.quadratic_representation();
            let lhs = x.apply(&pw).unwrap().quadratic_representation();
            let rhs = &pw * &px * &pw;
            prop_assert!((lhs - rhs).norm() <= 1e-8 * pw.norm().powi(2) * px.norm());
        }

        #[test]
        fn multiplication_is_self_adjoint(seed in any::<u64>(), idx in 0usize..4) {
            let alg = pick(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Element::random(&alg, &mut rng);
            let g = DMatrix::from_diagonal(alg.metric());
            let gl = &g * x.multiplication_operator();
            prop_assert!((&gl - gl.transpose()).norm() <= 1e-12 * (1.0 + gl.norm()));
        }

        #[test]
        fn cone_is_self_dual(seed in any::<u64>(), idx in 0usize..4) {
            let alg = pick(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Element::random(&alg, &mut rng).square();
            let s = Element::random(&alg, &mut rng).square();
            prop_assert!(x.inner(&s).unwrap() >= -1e-10);
        }

        #[test]
        fn inverse_and_sqrt_round_trip(seed in any::<u64>(), idx in 0usize..4) {
            let alg = pick(idx);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Element::random_interior(&alg, 1.5, &mut rng);
            let ii = x.inverse().unwrap().inverse().unwrap();
            prop_assert!((ii.coords() - x.coords()).norm() <= 1e-9 * (1.0 + x.norm()));
            let r = x.sqrt().unwrap();
            prop_assert!((r.square().coords() - x.coords()).norm() <= 1e-9 * (1.0 + x.norm()));
        }
    }
}
