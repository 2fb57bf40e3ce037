//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so every
//! line is printed; the process exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use lieorbit::algebra::{build_algebra, cartan_structure, CMat, CartanData, Family};
use lieorbit::deformation::{DeformationContext, R_GRID};
use lieorbit::numerics::{matrix_exp, normal_vector, seeded_rng, Mat, Rng, Tolerance, Vector};
use lieorbit::orbit::{FiberTag, RParam};
use lieorbit::semidirect::{
    cotangent_moment, cotangent_moment_rep, fiber_map_ranks, phi_cotangent, phi_rep,
    sample_rep_orbit, sample_semidirect_orbit, semidirect_bracket, AdjointOnS, SemidirectElement,
    SoCanonical,
};
use lieorbit::symplectic::{
    max_isotropic, pullback_check, radical, unique_isotropic_orbit_check, HermitianContext,
    SkewFormData,
};

const FD: f64 = 1e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cartan(f: Family) -> CartanData {
    cartan_structure(&build_algebra(f).unwrap()).unwrap()
}

fn diag(entries: &[f64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(entries[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn unit_matrix(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// H = diag(1, -1) in coordinates of sl(2, R), built from the matrix rather than a preset.
fn sl2r_h(cd: &CartanData) -> Vector {
    cd.alg().coords(&diag(&[1.0, -1.0]))
}

fn random_unitary(rng: &mut Rng, n: usize) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| {
        let v = normal_vector(rng, 2);
        Complex64::new(v[0], v[1])
    });
    z.qr().q()
}

fn random_triple(rng: &mut Rng, dim: usize) -> [Vector; 3] {
    [(); 3].map(|_| normal_vector(rng, dim))
}

/// Smallest over largest singular value, from the eigenvalues of `G^T G`.
fn singular_ratio(g: &Mat) -> f64 {
    let e = SymmetricEigen::new(g.transpose() * g).eigenvalues;
    let (lo, hi) = e.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    (lo.max(0.0) / hi).sqrt()
}

fn c1_cylinder() -> Outcome {
    let cd = cartan(Family::SlReal(2));
    let h = sl2r_h(&cd);
    let samples = sample_semidirect_orbit(&cd, &h, 11, 100, 10).unwrap();
    let worst = samples
        .iter()
        .map(|p| (p.point[0].powi(2) + p.point[1].powi(2) - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        samples.len() == 1000 && worst < 1e-9,
        format!("{} samples, max |x^2+y^2-1| = {worst:.2e} (< 1e-9)", samples.len()),
    )
}

fn c2_hyperboloid() -> Outcome {
    let cd = cartan(Family::SlReal(2));
    let h = sl2r_h(&cd);
    let ctx = DeformationContext::finite(&cd, 1.0).unwrap();
    let samples = ctx.sample_deformed_orbit(&h, 12, 100, 10).unwrap();
    let worst = samples
        .iter()
        .map(|p| {
            let c = &p.point;
            (c[0] * c[0] + c[1] * c[1] - c[2] * c[2] - 1.0).abs()
        })
        .fold(0.0, f64::max);
    outcome(
        samples.len() == 1000 && worst < 1e-8,
        format!("{} samples, max |x^2+y^2-z^2-1| = {worst:.2e} (< 1e-8)", samples.len()),
    )
}

fn c3_deformed_invariance() -> Outcome {
    let cd = cartan(Family::SlReal(2));
    let h = sl2r_h(&cd);
    let hh = cd.alg().killing_form(&h, &h);
    let (mut killing, mut coord) = (0.0_f64, 0.0_f64);
    let mut pass = true;
    for r in [0.1, 0.5, 2.0, 10.0, 100.0] {
        let ctx = DeformationContext::finite(&cd, r).unwrap();
        for p in ctx.sample_deformed_orbit(&h, 13, 50, 4).unwrap() {
            let c = &p.point;
            let k = (ctx.killing_r(c, c).unwrap() - hh).abs();
            let q = (c[0] * c[0] + c[1] * c[1] - c[2] * c[2] / (r * r) - 1.0).abs();
            pass &= k < 1e-6 * (1.0 + c.norm_squared()) && q < 1e-6;
            killing = killing.max(k / (1.0 + c.norm_squared()));
            coord = coord.max(q);
        }
    }
    outcome(
        pass,
        format!(
            "max |<p,p>_r-<H,H>|/(1+|p|^2) = {killing:.2e}, max |x^2+y^2-z^2/r^2-1| = {coord:.2e} \
             (note: the quadric has z^2/r^2, not z^2/r)"
        ),
    )
}

fn c4_convergence() -> Outcome {
    let cd = cartan(Family::SlReal(2));
    let h = sl2r_h(&cd);
    let (seed, n) = (14, 40);
    // oracle: the E12 entry of the tagged fiber element X; psi_r X - psi_inf X = -2/(r+1) theta X
    let grid = lieorbit::deformation::limit_grid(&cd, &h, seed, n).unwrap();
    let c_max = grid
        .iter()
        .map(|p| match &p.tag.as_ref().unwrap().fiber {
            FiberTag::NilPositive { element, .. } => cd.alg().to_matrix(element)[(0, 1)].norm(),
            _ => unreachable!(),
        })
        .fold(0.0, f64::max);
    let mut devs = Vec::new();
    let mut worst_rel = 0.0_f64;
    for r in [10.0, 100.0, 1000.0] {
        let d = DeformationContext::finite(&cd, r)
            .unwrap()
            .limit_deviation(&h, seed, n)
            .unwrap();
        let expected = 2f64.sqrt() * c_max / (r + 1.0);
        worst_rel = worst_rel.max((d - expected).abs() / expected);
        devs.push(d);
    }
    let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && worst_rel < 0.1,
        format!(
            "deviations {:.4e} > {:.4e} > {:.4e}, max relative gap to sqrt(2) c/(r+1) = {worst_rel:.2e} (< 0.1)",
            devs[0], devs[1], devs[2]
        ),
    )
}

fn c5_jacobi() -> Outcome {
    let mut worst = [0.0_f64; 3];
    for f in [Family::SlReal(3), Family::SlComplex(2)] {
        let cd = cartan(f);
        let alg = cd.alg();
        let dim = cd.dim();
        let mut rng = seeded_rng(15);
        for _ in 0..100 {
            let [x, y, z] = random_triple(&mut rng, dim);
            worst[0] = worst[0].max(alg.jacobi_residual(&x, &y, &z));
        }
        for r in R_GRID {
            let ctx = DeformationContext::finite(&cd, r).unwrap();
            let b = |u: &Vector, v: &Vector| ctx.bracket_r(u, v).unwrap();
            for _ in 0..100 {
                let [x, y, z] = random_triple(&mut rng, dim);
                let s = b(&x, &b(&y, &z)) + b(&y, &b(&z, &x)) + b(&z, &b(&x, &y));
                worst[1] = worst[1].max(s.norm());
            }
        }
        let el = |rng: &mut Rng| {
            SemidirectElement::new(
                &cd,
                &cd.k_basis * normal_vector(rng, cd.k_basis.ncols()),
                &cd.s_basis * normal_vector(rng, cd.s_basis.ncols()),
            )
            .unwrap()
        };
        let b = |u: &SemidirectElement, v: &SemidirectElement| semidirect_bracket(&cd, u, v).unwrap();
        for _ in 0..100 {
            let (x, y, z) = (el(&mut rng), el(&mut rng), el(&mut rng));
            let s = b(&x, &b(&y, &z)).total() + b(&y, &b(&z, &x)).total() + b(&z, &b(&x, &y)).total();
            worst[2] = worst[2].max(s.norm());
        }
    }
    outcome(
        worst.iter().all(|&w| w < 1e-10),
        format!(
            "sl3r and sl2c: [.,.] {:.2e}, [.,.]_r over 6 r {:.2e}, semidirect {:.2e} (< 1e-10)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn c6_eigenvectors() -> Outcome {
    let mut worst = 0.0_f64;
    for f in [Family::SlReal(2), Family::SlReal(3), Family::SlComplex(2)] {
        let cd = cartan(f);
        let h = cd.regular_h().unwrap();
        let hm = cd.alg().to_matrix(&h);
        for r in R_GRID {
            let ctx = DeformationContext::finite(&cd, r).unwrap();
            let adr = ctx.ad_r(&h).unwrap();
            for root in &cd.roots {
                for x in root.space_basis.column_iter() {
                    let x = x.into_owned();
                    // oracle: alpha(H) from the matrix commutator [H, X] = alpha(H) X
                    let xm = cd.alg().to_matrix(&x);
                    let comm = &hm * &xm - &xm * &hm;
                    let alpha = (xm.adjoint() * comm).trace().re / (xm.adjoint() * &xm).trace().re;
                    let px = ctx.psi_r_map(&x);
                    worst = worst.max((&adr * &px - &px * alpha).norm());
                }
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("sl2r, sl3r, sl2c over 6 r: max |ad_r(H) psi_r X - alpha(H) psi_r X| = {worst:.2e} (< 1e-9)"),
    )
}

fn c7_nondegenerate() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (f, expected_dim) in [(Family::SlComplex(2), 4), (Family::SlComplex(3), 12)] {
        let cd = cartan(f);
        let ctx = HermitianContext::new(&cd).unwrap();
        let h = cd.regular_h().unwrap();
        let omega_gram = cd.alg().j().unwrap().transpose() * &cd.b_theta;
        let (mut ratio, mut fiber) = (f64::INFINITY, 0.0_f64);
        for p in sample_semidirect_orbit(&cd, &h, 17, 50, 2).unwrap() {
            let t = ctx.orbit_tangent_basis(&p).unwrap();
            pass &= t.ncols() == expected_dim;
            ratio = ratio.min(singular_ratio(&(t.transpose() * &omega_gram * &t)));
            let w = p.base_point().unwrap();
            let fib = cd.ad(&w) * &cd.s_basis;
            fiber = fiber.max((fib.transpose() * &omega_gram * &fib).amax());
        }
        pass &= ratio > 1e-8 && fiber < 1e-10;
        details.push(format!("{f}: sigma_min/sigma_max {ratio:.2e} (> 1e-8), fiber |Omega| {fiber:.2e} (< 1e-10)"));
    }
    outcome(pass, details.join("; "))
}

fn c8_sections() -> Outcome {
    let cd = cartan(Family::SlComplex(2));
    let ctx = HermitianContext::new(&cd).unwrap();
    let h = cd.regular_h().unwrap();
    let j = cd.alg().j().unwrap().clone();
    let omega_gram = j.transpose() * &cd.b_theta;
    let flag = cd.flag_orbit_sample(&h, 18, 20).unwrap();
    let section = |x: &Vector, t: f64| x + &j * ctx.gradient_at(&h, x) * t;
    let mut worst = 0.0_f64;
    for t in [0.0, 0.5, 1.0, 2.0] {
        for p in &flag {
            let x = &p.point;
            let cols: Vec<Vector> = cd
                .k_basis
                .column_iter()
                .map(|a| {
                    let ad = cd.ad(&a.into_owned());
                    let xp = matrix_exp(&(&ad * FD)).unwrap() * x;
                    let xm = matrix_exp(&(&ad * -FD)).unwrap() * x;
                    (section(&xp, t) - section(&xm, t)) / (2.0 * FD)
                })
                .collect();
            let tan = Mat::from_columns(&cols);
            worst = worst.max((tan.transpose() * &omega_gram * &tan).amax());
        }
    }
    outcome(
        worst < 1e-6,
        format!("sl2c, N = H, t in {{0, 0.5, 1, 2}}: max |Omega| on section tangents = {worst:.2e} (< 1e-6)"),
    )
}

fn c9_pullback() -> Outcome {
    let cd = cartan(Family::SlComplex(2));
    let ctx = HermitianContext::new(&cd).unwrap();
    let h = cd.regular_h().unwrap();
    let samples = DeformationContext::finite(&cd, 1.0)
        .unwrap()
        .sample_deformed_orbit(&h, 19, 50, 1)
        .unwrap();
    let res: Vec<(RParam, f64)> = [RParam::Finite(2.0), RParam::Finite(10.0), RParam::Infinite]
        .into_iter()
        .map(|r| (r, pullback_check(&ctx, r, &samples).unwrap()))
        .collect();
    // the fiber part of d psi~_r is psi_r, which multiplies Omega on n_H^+ pairs by 1 - c^2
    let n_plus = cd.h_subspaces(&h).unwrap().n_plus;
    let (d0, d1) = (n_plus.column(0).into_owned(), n_plus.column(1).into_owned());
    let before = ctx.omega_form(&d0, &d1);
    let scale: Vec<String> = res
        .iter()
        .map(|&(r, _)| {
            let c = r.psi_coefficient();
            let psi = DeformationContext::new(&cd, r).unwrap();
            let after = ctx.omega_form(&psi.psi_r_map(&d0), &psi.psi_r_map(&d1));
            format!("r={r}: ratio {:.4} vs 1-c^2 = {:.4}", after / before, 1.0 - c * c)
        })
        .collect();
    outcome(
        res.iter().all(|&(_, v)| v < 1e-5),
        format!(
            "max pullback residual {} (< 1e-5); fiber pairs at H: {}",
            res.iter().map(|(r, v)| format!("r={r}: {v:.3e}")).collect::<Vec<_>>().join(", "),
            scale.join(", ")
        ),
    )
}

fn c10_moment() -> Outcome {
    let cd = cartan(Family::SlComplex(3));
    let ctx = HermitianContext::new(&cd).unwrap();
    let alg = cd.alg();
    let mut rng = seeded_rng(20);
    let mut normal_max = 0.0_f64;
    let mut nil_min = f64::INFINITY;
    for _ in 0..50 {
        let u = random_unitary(&mut rng, 3);
        let z = normal_vector(&mut rng, 6);
        let mut d: Vec<Complex64> = (0..3).map(|i| Complex64::new(z[i], z[3 + i])).collect();
        let tr = (d[0] + d[1] + d[2]) / 3.0;
        d.iter_mut().for_each(|x| *x -= tr);
        let dm = DMatrix::from_fn(3, 3, |i, j| if i == j { d[i] } else { Complex64::new(0.0, 0.0) });
        let x = alg.coords(&(&u * dm * u.adjoint()));
        normal_max = normal_max.max(ctx.u_moment(&x).norm());
        let e = alg.coords(&(&u * unit_matrix(3, 0, 1) * u.adjoint()));
        nil_min = nil_min.min(ctx.u_moment(&e).norm());
    }
    let mut pass = normal_max < 1e-9 && nil_min > 1e-2;
    let mut details = vec![format!(
        "sl3c: max |mu| on normal {normal_max:.2e} (< 1e-9), min |mu| on E12-type {nil_min:.2e} (> 1e-2)"
    )];
    for (f, dims) in [(Family::SlComplex(2), (2, 4)), (Family::SlComplex(3), (6, 12))] {
        let c = cartan(f);
        let ctx = HermitianContext::new(&c).unwrap();
        let rep = unique_isotropic_orbit_check(&ctx, &c.regular_h().unwrap(), 21, 20).unwrap();
        let ok = (rep.flag_dim, rep.orbit_dim) == dims && rep.passes(1e-8);
        pass &= ok;
        details.push(format!(
            "{f}: dims ({}, {}), isotropy dim {} -> {} off the flag",
            rep.flag_dim, rep.orbit_dim, rep.isotropy_dim_h, rep.max_isotropy_dim_shifted
        ));
    }
    outcome(pass, details.join("; "))
}

fn c11_skew_forms() -> Outcome {
    let mut rng = seeded_rng(22);
    let tol = Tolerance::default();
    let mut bad = 0;
    for i in 0..200u64 {
        let d = 2 + (i as usize % 9);
        let m = (i as usize * 7 / 9) % (d / 2 + 1);
        let mut j = Mat::zeros(2 * m, 2 * m);
        for a in 0..m {
            j[(a, m + a)] = 1.0;
            j[(m + a, a)] = -1.0;
        }
        let p = Mat::from_fn(d, 2 * m, |_, _| normal_vector(&mut rng, 1)[0]);
        let f = SkewFormData::new(&(&p * j * p.transpose()), tol).unwrap();
        let w = max_isotropic(&f, i);
        let rad = radical(&f);
        // oracle: the radical of P J P^T has dimension d - 2m for P of full column rank
        if 2 * w.ncols() != d + rad.ncols() || rad.ncols() != d - 2 * m {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("200 forms, dims 2-10: {bad} violations of 2 dim W = dim V + dim R"))
}

fn c12_cotangent() -> Outcome {
    let tol = Tolerance::default();
    let cd = cartan(Family::SlReal(2));
    let rep = AdjointOnS::new(&cd).unwrap();
    let h = sl2r_h(&cd);
    let (mut round, mut rank_bad) = (0.0_f64, 0);
    for p in sample_semidirect_orbit(&cd, &h, 23, 20, 5).unwrap() {
        let (w, cov) = phi_cotangent(&rep, &p, tol).unwrap();
        let back = cotangent_moment(&rep, &w, &cov, tol).unwrap();
        round = round.max((back.total() - &p.point).norm());
        let ranks = fiber_map_ranks(&rep, &rep.frame.s_coords(&w), tol).unwrap();
        rank_bad += usize::from(ranks != (1, 1));
    }
    let so3 = SoCanonical::new(3).unwrap();
    let x = Vector::from_column_slice(&[1.0, 0.0, 0.0]);
    for p in sample_rep_orbit(&so3, &x, 24, 20, 5).unwrap() {
        let (w, gamma) = phi_rep(&so3, &p, tol).unwrap();
        let back = cotangent_moment_rep(&so3, &w, &gamma, tol).unwrap();
        round = round.max((back.g_part - &p.g_part).norm() + (back.v_part - &p.v_part).norm());
        rank_bad += usize::from(fiber_map_ranks(&so3, &w, tol).unwrap() != (2, 2));
    }
    outcome(
        rank_bad == 0 && round < 1e-9,
        format!("sl2r and so3: {rank_bad} rank defects, max |m(phi(p)) - p| = {round:.2e} (< 1e-9)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("sl(2,R) cylinder", c1_cylinder),
        ("sl(2,R) hyperboloid", c2_hyperboloid),
        ("deformed invariance", c3_deformed_invariance),
        ("convergence r -> inf", c4_convergence),
        ("algebra laws", c5_jacobi),
        ("psi_r eigenvectors", c6_eigenvectors),
        ("symplectic non-degeneracy", c7_nondegenerate),
        ("Lagrangian sections", c8_sections),
        ("symplectomorphism pullback", c9_pullback),
        ("moment map and isotropy", c10_moment),
        ("skew-form toolkit", c11_skew_forms),
        ("cotangent identification", c12_cotangent),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {:>2} {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
