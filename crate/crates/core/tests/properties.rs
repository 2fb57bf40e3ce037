use std::sync::OnceLock;

use proptest::prelude::*;

use lieorbit::algebra::{build_algebra, cartan_structure, CartanData, Family};
use lieorbit::deformation::DeformationContext;
use lieorbit::numerics::{rank, svd, Mat, Tolerance, Vector};
use lieorbit::orbit::RParam;
use lieorbit::semidirect::{semidirect_bracket, SemidirectElement};
use lieorbit::symplectic::{max_isotropic, radical, HermitianContext, SkewFormData};

fn sl3r() -> &'static CartanData {
    static CD: OnceLock<CartanData> = OnceLock::new();
    CD.get_or_init(|| cartan_structure(&build_algebra(Family::SlReal(3)).unwrap()).unwrap())
}

fn sl2c() -> &'static CartanData {
    static CD: OnceLock<CartanData> = OnceLock::new();
    CD.get_or_init(|| cartan_structure(&build_algebra(Family::SlComplex(2)).unwrap()).unwrap())
}

fn vec_of(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-3.0..3.0f64, n).prop_map(Vector::from_vec)
}

fn coeffs(basis: &Mat, c: &[f64]) -> Vector {
    basis * Vector::from_column_slice(&c[..basis.ncols()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs_low_rank(m in 1usize..9, n in 1usize..9, k in 0usize..5,
                                 seed in prop::collection::vec(-1.0..1.0f64, 160)) {
        let k = k.min(m).min(n);
        let l = Mat::from_fn(m, k, |i, j| seed[i * 8 + j]);
        let r = Mat::from_fn(k, n, |i, j| seed[80 + i * 8 + j]);
        let a = l * r;
        let d = svd(&a);
        let mut s = Mat::zeros(m, n);
        for (i, &v) in d.s.iter().enumerate() {
            s[(i, i)] = v;
        }
        prop_assert!((&d.u * s * d.v.transpose() - &a).norm() <= 1e-12 * (1.0 + a.norm()));
        prop_assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(rank(&a, Tolerance::default()) <= k);
    }

    #[test]
    fn r_param_display_round_trips(r in 1e-6..1e6f64) {
        let p = RParam::finite(r).unwrap();
        prop_assert_eq!(p.to_string().parse::<RParam>().unwrap(), p);
        let c = p.psi_coefficient();
        prop_assert!(c > -1.0 && c < 1.0);
    }

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(x in vec_of(8), y in vec_of(8), z in vec_of(8)) {
        let alg = sl3r().alg();
        let xy = alg.bracket(&x, &y).unwrap();
        let yx = alg.bracket(&y, &x).unwrap();
        prop_assert!((xy + yx).norm() < 1e-12);
        prop_assert!(alg.jacobi_residual(&x, &y, &z) < 1e-10 * (1.0 + x.norm() * y.norm() * z.norm()));
    }

    #[test]
    fn deformed_killing_is_invariant(r in 0.05..50.0f64, x in vec_of(8), y in vec_of(8), z in vec_of(8)) {
        let ctx = DeformationContext::finite(sl3r(), r).unwrap();
        let lhs = ctx.killing_r(&ctx.bracket_r(&x, &y).unwrap(), &z).unwrap();
        let rhs = ctx.killing_r(&x, &ctx.bracket_r(&y, &z).unwrap()).unwrap();
        let scale = 1.0 + ctx.t_r_inv().unwrap().norm().powi(3) * x.norm() * y.norm() * z.norm();
        prop_assert!((lhs - rhs).abs() < 1e-10 * scale);
    }

    #[test]
    fn semidirect_bracket_antisymmetric(c in prop::collection::vec(-2.0..2.0f64, 20)) {
        let cd = sl3r();
        let a = SemidirectElement::new(cd, coeffs(&cd.k_basis, &c[0..]), coeffs(&cd.s_basis, &c[3..])).unwrap();
        let b = SemidirectElement::new(cd, coeffs(&cd.k_basis, &c[8..]), coeffs(&cd.s_basis, &c[11..])).unwrap();
        let ab = semidirect_bracket(cd, &a, &b).unwrap().total();
        let ba = semidirect_bracket(cd, &b, &a).unwrap().total();
        prop_assert!((ab + ba).norm() < 1e-12);
    }

    #[test]
    fn omega_is_alternating_and_j_compatible(x in vec_of(6), y in vec_of(6)) {
        let ctx = HermitianContext::new(sl2c()).unwrap();
        prop_assert_eq!(ctx.omega_form(&x, &x), 0.0);
        prop_assert!((ctx.omega_form(&x, &y) + ctx.omega_form(&y, &x)).abs() < 1e-12);
        let (jx, jy) = (&ctx.j * &x, &ctx.j * &y);
        prop_assert!((ctx.omega_form(&jx, &jy) - ctx.omega_form(&x, &y)).abs() < 1e-10);
    }

    #[test]
    fn max_isotropic_dimension_formula(d in 1usize..11, m in 0usize..6, seed in 0u64..1000,
                                       p in prop::collection::vec(-1.0..1.0f64, 120)) {
        let m = m.min(d / 2);
        let mut j = Mat::zeros(2 * m, 2 * m);
        for a in 0..m {
            j[(a, m + a)] = 1.0;
            j[(m + a, a)] = -1.0;
        }
        let pm = Mat::from_fn(d, 2 * m, |i, k| p[i * 11 + k]);
        let f = SkewFormData::new(&(&pm * j * pm.transpose()), Tolerance::default()).unwrap();
        let w = max_isotropic(&f, seed);
        prop_assert_eq!(2 * w.ncols(), d + radical(&f).ncols());
        prop_assert!(f.max_on(&w) < 1e-9 * (1.0 + f.gram.amax()));
    }
}
