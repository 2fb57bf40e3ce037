//! The Hermitian form `H_tau(X,Y) = -<X, tau Y>` of a complex semisimple algebra,
//! its real part `B_tau` and the symplectic form `Omega_tau(X,Y) = B_tau(iX, Y)`.
//!
//! `<.,.>` is the complex Killing form, linear in both slots, so `H_tau` is
//! linear in `X` and antilinear in `Y`. With this convention
//! `Omega_tau = -2 Im H_tau`; only `Omega_tau` is used below.
//!
//! Also here: restriction of skew forms to subspaces, radicals and maximal
//! isotropic subspaces, gradient fields of height functions on flags and their
//! Lagrangian sections, and the moment map of the `Ad(U)` action.

use num_complex::Complex64;

use crate::algebra::CartanData;
use crate::deformation::{parameter_tangents, DeformationContext};
use crate::error::{Error, Result};
use crate::numerics::{
    from_columns, hcat, lstsq, matrix_exp, nullspace_matrix, normal_vector, range_basis, rank,
    rank_rel, seeded_rng, singular_values, Mat, Rng, Tolerance, Vector,
};
use crate::orbit::{FiberTag, OrbitKind, OrbitSample, RParam};

/// Central-difference step for tangent and pullback computations.
pub const FD_STEP: f64 = 1e-5;

/// Relative singular-value cutoff for rank and isotropy-dimension decisions.
pub const RANK_REL: f64 = 1e-8;

/// A skew-symmetric bilinear form given by its Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewFormData {
    pub gram: Mat,
    pub tol: Tolerance,
}

impl SkewFormData {
    /// Antisymmetrizes `gram`.
    pub fn new(gram: &Mat, tol: Tolerance) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::Dimension(format!(
                "skew form Gram matrix is {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        Ok(Self {
            gram: (gram - gram.transpose()) * 0.5,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// `sum_{i<j} g_ij (x_i y_j - x_j y_i)`, so that `eval(x, x)` is exactly zero.
    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                acc += self.gram[(i, j)] * (x[i] * y[j] - x[j] * y[i]);
            }
        }
        acc
    }

    pub fn rank(&self) -> usize {
        rank_rel(&self.gram, RANK_REL)
    }

    /// Largest `|omega(b_i, b_j)|` over columns of `basis`.
    pub fn max_on(&self, basis: &Mat) -> f64 {
        if basis.ncols() == 0 {
            return 0.0;
        }
        (basis.transpose() * &self.gram * basis).amax()
    }
}

/// Gram matrix of the form on the span of `basis`.
pub fn restrict_form(form: &SkewFormData, basis: &Mat) -> Result<SkewFormData> {
    if basis.nrows() != form.dim() {
        return Err(Error::Dimension(format!(
            "basis vectors have length {}, form has dimension {}",
            basis.nrows(),
            form.dim()
        )));
    }
    if rank(basis, form.tol) != basis.ncols() {
        return Err(Error::Dimension("restriction basis is linearly dependent".into()));
    }
    SkewFormData::new(&(basis.transpose() * &form.gram * basis), form.tol)
}

/// `{x : omega(x, .) = 0}`, orthonormal columns.
pub fn radical(form: &SkewFormData) -> Mat {
    let top = singular_values(&form.gram).first().copied().unwrap_or(0.0);
    let tol = Tolerance {
        abs_eps: 0.0,
        rel_eps: RANK_REL,
    };
    if top == 0.0 {
        return Mat::identity(form.dim(), form.dim());
    }
    nullspace_matrix(&form.gram, tol)
}

/// Greedy maximal isotropic subspace: start from the radical and repeatedly add a
/// random vector of the `omega`-orthogonal complement not yet in the span.
pub fn max_isotropic(form: &SkewFormData, seed: u64) -> Mat {
    let mut rng = seeded_rng(seed);
    extend_isotropic(form, &radical(form), &mut rng)
}

/// Extends an isotropic subspace (orthonormal columns) to a maximal one.
pub fn extend_isotropic(form: &SkewFormData, start: &Mat, rng: &mut Rng) -> Mat {
    let n = form.dim();
    let mut w = start.clone();
    let null_tol = Tolerance {
        abs_eps: 0.0,
        rel_eps: RANK_REL,
    };
    while w.ncols() < n {
        let complement = if w.ncols() == 0 {
            Mat::identity(n, n)
        } else {
            let constraint = w.transpose() * &form.gram;
            if constraint.amax() == 0.0 {
                Mat::identity(n, n)
            } else {
                nullspace_matrix(&constraint, null_tol)
            }
        };
        let residual = &complement - &w * (w.transpose() * &complement);
        let fresh = range_basis(&residual, 1e-10, RANK_REL);
        if fresh.ncols() == 0 {
            break;
        }
        let x = &fresh * normal_vector(rng, fresh.ncols());
        let x = &x - &w * (w.transpose() * &x);
        w = hcat(&w, &Mat::from_column_slice(n, 1, x.normalize().as_slice()));
    }
    w
}

/// Hermitian structure on a complex algebra realified as `R^{2m}`.
#[derive(Debug, Clone)]
pub struct HermitianContext<'a> {
    pub cd: &'a CartanData,
    pub j: Mat,
    /// `B_tau = 2 Re H_tau`, equal to `B_theta` of the realified algebra.
    pub b_tau: Mat,
    pub omega: SkewFormData,
}

impl<'a> HermitianContext<'a> {
    pub fn new(cd: &'a CartanData) -> Result<Self> {
        let j = cd.alg().j()?.clone();
        let b_tau = cd.b_theta.clone();
        let omega = SkewFormData::new(&(j.transpose() * &b_tau), cd.tol)?;
        Ok(Self { cd, j, b_tau, omega })
    }

    fn check_len(&self, x: &Vector) -> Result<()> {
        if x.len() != self.cd.dim() {
            return Err(Error::Dimension(format!("vector of length {}", x.len())));
        }
        Ok(())
    }

    /// Complex Killing form `<X,Y> = K(X,Y)/2 - i K(iX,Y)/2`, with `K` the real Killing form.
    pub fn complex_killing(&self, x: &Vector, y: &Vector) -> Complex64 {
        let k = self.cd.alg();
        Complex64::new(
            0.5 * k.killing_form(x, y),
            -0.5 * k.killing_form(&(&self.j * x), y),
        )
    }

    /// `H_tau(X, Y) = -<X, tau Y>`.
    pub fn hermitian_form(&self, x: &Vector, y: &Vector) -> Result<Complex64> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(-self.complex_killing(x, &(&self.cd.theta * y)))
    }

    pub fn b_tau_form(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.b_tau * y)[(0, 0)]
    }

    pub fn omega_form(&self, x: &Vector, y: &Vector) -> f64 {
        self.omega.eval(x, y)
    }

    pub fn tau(&self, x: &Vector) -> Vector {
        &self.cd.theta * x
    }

    /// `|Omega(Ad(e^{tA})X, Ad(e^{tA})Y) - Omega(X,Y)|`.
    pub fn invariance_residual(&self, a: &Vector, t: f64, x: &Vector, y: &Vector) -> Result<f64> {
        let g = matrix_exp(&(self.cd.ad(a) * t))?;
        Ok((self.omega_form(&(&g * x), &(&g * y)) - self.omega_form(x, y)).abs())
    }

    /// Columns `[A_i, x]` for an orthonormal basis `A_i` of `u`.
    pub fn u_directions(&self, x: &Vector) -> Mat {
        let cols: Vec<Vector> = self
            .cd
            .k_basis
            .column_iter()
            .map(|a| self.cd.ad(&a.into_owned()) * x)
            .collect();
        from_columns(&cols, self.cd.dim())
    }

    /// Orthonormal basis of `T_x(Ad(U) x)`.
    pub fn u_orbit_tangent(&self, x: &Vector) -> Mat {
        range_basis(&self.u_directions(x), self.cd.tol.abs_eps, RANK_REL)
    }

    /// Tangent space of the orbit through a tagged sample.
    pub fn orbit_tangent_basis(&self, p: &OrbitSample) -> Result<Mat> {
        let tag = p.tag()?;
        let n_plus = self.cd.h_subspaces(&p.h)?.n_plus.ncols();
        let (basis, expected) = match (&tag.fiber, p.kind) {
            (FiberTag::Zero, OrbitKind::Flag) => (self.u_orbit_tangent(&p.point), n_plus),
            (FiberTag::Symmetric { .. }, _) => {
                let w = p.base_point()?;
                let fiber = self.cd.ad(&w) * &self.cd.s_basis;
                let all = hcat(&self.u_directions(&p.point), &fiber);
                (range_basis(&all, self.cd.tol.abs_eps, RANK_REL), 2 * n_plus)
            }
            (_, kind) => {
                let r = match kind {
                    OrbitKind::Deformed(r) => r,
                    _ => RParam::Finite(1.0),
                };
                let ctx = DeformationContext::new(self.cd, r)?;
                (parameter_tangents(&ctx, p)?, 2 * n_plus)
            }
        };
        if basis.ncols() < expected {
            return Err(Error::Sampling(format!(
                "orbit tangent has rank {} at a sample, expected {expected}",
                basis.ncols()
            )));
        }
        Ok(basis)
    }

    /// Tangent space of the fiber through a semidirect-orbit sample: `ad(w)(i u)`.
    pub fn fiber_tangent_basis(&self, p: &OrbitSample) -> Result<Mat> {
        let w = p.base_point()?;
        Ok(range_basis(
            &(self.cd.ad(&w) * &self.cd.s_basis),
            self.cd.tol.abs_eps,
            RANK_REL,
        ))
    }

    /// `-i [tau x, x]`, the moment map of the `Ad(U)` action.
    pub fn u_moment(&self, x: &Vector) -> Vector {
        -(&self.j * (self.cd.ad(&self.tau(x)) * x))
    }

    /// Largest `|Omega|` on pairs of tangent vectors of `Ad(U) x`.
    pub fn isotropy_residual(&self, x: &Vector) -> f64 {
        self.omega.max_on(&self.u_orbit_tangent(x))
    }

    /// `Y(x)`: `B_tau`-orthogonal projection of `N` onto `T_x(Ad(U) H)`.
    pub fn gradient_at(&self, n: &Vector, x: &Vector) -> Vector {
        let t = self.u_directions(x);
        if t.amax() == 0.0 {
            return Vector::zeros(x.len());
        }
        let gram = t.transpose() * &self.b_tau * &t;
        let rhs = t.transpose() * &self.b_tau * n;
        &t * lstsq(&gram, &rhs)
    }

    /// `d/ds Y(exp(s ad A) x)` at `s = 0` by central differences.
    fn gradient_derivative(&self, n: &Vector, a: &Vector, x: &Vector) -> Result<Vector> {
        let ad = self.cd.ad(a);
        let xp = matrix_exp(&(&ad * FD_STEP))? * x;
        let xm = matrix_exp(&(&ad * -FD_STEP))? * x;
        Ok((self.gradient_at(n, &xp) - self.gradient_at(n, &xm)) / (2.0 * FD_STEP))
    }

    fn section_point(&self, n: &Vector, x: &Vector, t: f64) -> Vector {
        x + &self.j * self.gradient_at(n, x) * t
    }
}

/// Height function `x -> B_tau(x, N)` for `N` in `i u`.
#[derive(Debug, Clone)]
pub struct HeightFunction {
    pub n: Vector,
}

impl HeightFunction {
    pub fn new(ctx: &HermitianContext<'_>, n: Vector) -> Result<Self> {
        ctx.check_len(&n)?;
        if ctx.cd.k_part(&n).norm() > ctx.cd.tol.threshold(n.norm()) {
            return Err(Error::Domain("height direction must lie in i u".into()));
        }
        Ok(Self { n })
    }

    pub fn eval(&self, ctx: &HermitianContext<'_>, x: &Vector) -> f64 {
        ctx.b_tau_form(x, &self.n)
    }
}

/// Flag points, gradient values and the section `x + t i Y(x)` over them.
#[derive(Debug, Clone)]
pub struct SectionSample {
    pub base_points: Vec<Vector>,
    pub field_values: Vec<Vector>,
    pub t: f64,
    pub section_points: Vec<Vector>,
}

pub fn gradient_field(
    ctx: &HermitianContext<'_>,
    f: &HeightFunction,
    flag_samples: &[OrbitSample],
) -> SectionSample {
    let base_points: Vec<Vector> = flag_samples.iter().map(|s| s.point.clone()).collect();
    let field_values = base_points.iter().map(|x| ctx.gradient_at(&f.n, x)).collect();
    SectionSample {
        section_points: base_points.clone(),
        base_points,
        field_values,
        t: 0.0,
    }
}

pub fn lagrangian_section(ctx: &HermitianContext<'_>, field: &SectionSample, t: f64) -> SectionSample {
    let section_points = field
        .base_points
        .iter()
        .zip(&field.field_values)
        .map(|(x, y)| x + &ctx.j * y * t)
        .collect();
    SectionSample {
        base_points: field.base_points.clone(),
        field_values: field.field_values.clone(),
        t,
        section_points,
    }
}

/// Residuals of a gradient field against its defining properties, maximized over samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GradientReport {
    /// Distance of `Y(x)` from `T_x(Ad(U) H)`.
    pub tangency: f64,
    /// Distance of `i Y(x)` from the fiber `ad(x)(i u)`.
    pub fiber: f64,
    /// `|B_tau(Y, [A,x]) - df([A,x])|` with `df` from central differences along `exp(s ad A) x`.
    pub derivative: f64,
}

pub fn gradient_report(
    ctx: &HermitianContext<'_>,
    f: &HeightFunction,
    field: &SectionSample,
) -> Result<GradientReport> {
    let mut rep = GradientReport::default();
    for (x, y) in field.base_points.iter().zip(&field.field_values) {
        let t = ctx.u_orbit_tangent(x);
        rep.tangency = rep.tangency.max((y - &t * (t.transpose() * y)).norm());
        let fib = range_basis(&(ctx.cd.ad(x) * &ctx.cd.s_basis), ctx.cd.tol.abs_eps, RANK_REL);
        let iy = &ctx.j * y;
        rep.fiber = rep.fiber.max((&iy - &fib * (fib.transpose() * &iy)).norm());
        for a in ctx.cd.k_basis.column_iter() {
            let ad = ctx.cd.ad(&a.into_owned());
            let fp = f.eval(ctx, &(matrix_exp(&(&ad * FD_STEP))? * x));
            let fm = f.eval(ctx, &(matrix_exp(&(&ad * -FD_STEP))? * x));
            let fd = (fp - fm) / (2.0 * FD_STEP);
            rep.derivative = rep.derivative.max((ctx.b_tau_form(y, &(&ad * x)) - fd).abs());
        }
    }
    Ok(rep)
}

/// Tangent vectors of the section `x + t i Y(x)` at one base point, one per basis element of `u`.
#[derive(Debug, Clone)]
pub struct SectionTangents {
    /// Central differences of the section along `exp(s ad A) x`.
    pub finite_difference: Mat,
    /// `[A,x] + t i [Y, A~](x) + t i [A, Y(x)]` with `[Y, A~](x) = dY([A,x]) - [A, Y(x)]`.
    pub bracket_formula: Mat,
}

pub fn section_tangents(
    ctx: &HermitianContext<'_>,
    n: &Vector,
    x: &Vector,
    t: f64,
) -> Result<SectionTangents> {
    let mut fd_cols = Vec::new();
    let mut formula_cols = Vec::new();
    let y = ctx.gradient_at(n, x);
    for a in ctx.cd.k_basis.column_iter() {
        let a = a.into_owned();
        let ad = ctx.cd.ad(&a);
        let xp = matrix_exp(&(&ad * FD_STEP))? * x;
        let xm = matrix_exp(&(&ad * -FD_STEP))? * x;
        fd_cols.push(
            (ctx.section_point(n, &xp, t) - ctx.section_point(n, &xm, t)) / (2.0 * FD_STEP),
        );
        let a_y = &ad * &y;
        let lie = ctx.gradient_derivative(n, &a, x)? - &a_y;
        formula_cols.push(&ad * x + &ctx.j * (lie + a_y) * t);
    }
    let dim = x.len();
    Ok(SectionTangents {
        finite_difference: from_columns(&fd_cols, dim),
        bracket_formula: from_columns(&formula_cols, dim),
    })
}

/// Largest `|Omega|` over tangent pairs of the section, and the largest gap between the
/// finite-difference tangents and the bracket formula.
pub fn section_isotropy(
    ctx: &HermitianContext<'_>,
    f: &HeightFunction,
    section: &SectionSample,
) -> Result<(f64, f64)> {
    let mut omega_max: f64 = 0.0;
    let mut formula_gap: f64 = 0.0;
    for x in &section.base_points {
        let tan = section_tangents(ctx, &f.n, x, section.t)?;
        omega_max = omega_max.max(ctx.omega.max_on(&tan.finite_difference));
        formula_gap = formula_gap.max((&tan.finite_difference - &tan.bracket_formula).amax());
    }
    Ok((omega_max, formula_gap))
}

/// Residual of `Omega(v, i Y(w)) = dF(v)` for `F(p) = B_tau(p, N)` at semidirect-orbit samples,
/// with `v` generated by the orbit parameterization and `dF(v)` by central differences.
///
/// In the convention `Omega(X,Y) = B_tau(iX,Y)` this is `iota_{iY} Omega = -dF`.
pub fn hamiltonian_gradient_residual(
    ctx: &HermitianContext<'_>,
    f: &HeightFunction,
    samples: &[OrbitSample],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples {
        let tag = p.tag()?;
        let v = match &tag.fiber {
            FiberTag::Symmetric { element, .. } => element.clone(),
            _ => return Err(Error::Representation("expected semidirect-orbit samples".into())),
        };
        let w = p.base_point()?;
        let iy = &ctx.j * ctx.gradient_at(&f.n, &w);
        let adh = ctx.cd.ad(&p.h);
        let point = |k: &crate::orbit::KElement, v: &Vector| k.act(&(&p.h + &adh * v));
        let mut curves: Vec<(Vector, Vector)> = Vec::new();
        for a in ctx.cd.k_basis.column_iter() {
            let a = a.into_owned();
            let kp = tag.k.left_mul(&(&a * FD_STEP), |x| ctx.cd.ad(x))?;
            let km = tag.k.left_mul(&(&a * -FD_STEP), |x| ctx.cd.ad(x))?;
            curves.push((point(&kp, &v), point(&km, &v)));
        }
        for d in ctx.cd.s_basis.column_iter() {
            let d = d.into_owned();
            curves.push((point(&tag.k, &(&v + &d * FD_STEP)), point(&tag.k, &(&v - &d * FD_STEP))));
        }
        for (pp, pm) in curves {
            let tangent = (&pp - &pm) / (2.0 * FD_STEP);
            let df = (f.eval(ctx, &pp) - f.eval(ctx, &pm)) / (2.0 * FD_STEP);
            worst = worst.max((ctx.omega_form(&tangent, &iy) - df).abs());
        }
    }
    Ok(worst)
}

/// Per-sample rank certification of `Omega` on an orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticReport {
    pub samples: usize,
    pub tangent_dim: usize,
    /// Smallest ratio `sigma_min / sigma_max` of the restricted form.
    pub min_singular_ratio: f64,
    /// Largest `|Omega|` on fiber tangent pairs.
    pub fiber_isotropy: f64,
    /// Every fiber tangent has half the orbit dimension, so is maximal isotropic.
    pub fibers_maximal: bool,
    pub rank_deficient: Vec<usize>,
}

impl SymplecticReport {
    pub fn full_rank(&self) -> bool {
        self.rank_deficient.is_empty() && self.min_singular_ratio > RANK_REL
    }
}

/// Restricts `Omega` to the orbit tangent at each sample and certifies full rank and isotropic,
/// maximal fiber tangents (for samples carrying a semidirect fiber tag).
pub fn check_symplectic_on_orbit(
    ctx: &HermitianContext<'_>,
    samples: &[OrbitSample],
) -> Result<SymplecticReport> {
    let mut rep = SymplecticReport {
        samples: samples.len(),
        tangent_dim: 0,
        min_singular_ratio: f64::INFINITY,
        fiber_isotropy: 0.0,
        fibers_maximal: true,
        rank_deficient: Vec::new(),
    };
    for (i, p) in samples.iter().enumerate() {
        let t = ctx.orbit_tangent_basis(p)?;
        rep.tangent_dim = t.ncols();
        let restricted = restrict_form(&ctx.omega, &t)?;
        let sv = singular_values(&restricted.gram);
        let ratio = match (sv.first(), sv.last()) {
            (Some(&top), Some(&bottom)) if top > 0.0 => bottom / top,
            (None, None) => 1.0,
            _ => 0.0,
        };
        rep.min_singular_ratio = rep.min_singular_ratio.min(ratio);
        if ratio <= RANK_REL {
            rep.rank_deficient.push(i);
        }
        if matches!(p.tag()?.fiber, FiberTag::Symmetric { .. }) {
            let fib = ctx.fiber_tangent_basis(p)?;
            rep.fiber_isotropy = rep.fiber_isotropy.max(ctx.omega.max_on(&fib));
            let in_t = t.transpose() * &fib;
            let w = max_isotropic(&restricted, i as u64);
            let radical_dim = radical(&restricted).ncols();
            let maximal = 2 * fib.ncols() == t.ncols() + radical_dim
                && 2 * w.ncols() == t.ncols() + radical_dim
                && rank(&in_t, ctx.cd.tol) == fib.ncols();
            rep.fibers_maximal &= maximal;
        }
    }
    if samples.is_empty() {
        rep.min_singular_ratio = 1.0;
    }
    Ok(rep)
}

/// `max |Omega(d psi~_r v, d psi~_r w) - Omega(v, w)|` over tangent pairs at tagged adjoint-orbit
/// samples. Tangent vectors and their images come from central differences along tagged curves:
/// `k -> e^{sA} k` for `A` in `u`, and `X -> X + s D` for `D` in `n_H^+`.
pub fn pullback_check(ctx: &HermitianContext<'_>, r: RParam, samples: &[OrbitSample]) -> Result<f64> {
    let source = DeformationContext::new(ctx.cd, RParam::Finite(1.0))?;
    let target = DeformationContext::new(ctx.cd, r)?;
    let mut worst: f64 = 0.0;
    for p in samples {
        let tag = p.tag()?;
        let x = match &tag.fiber {
            FiberTag::NilPositive { element, .. } => element.clone(),
            _ => return Err(Error::Representation("expected n_H^+ fiber tags".into())),
        };
        let n_plus = ctx.cd.h_subspaces(&p.h)?.n_plus;
        let mut src = Vec::new();
        let mut img = Vec::new();
        let diff = |c: &DeformationContext<'_>,
                    kp: &crate::orbit::KElement,
                    km: &crate::orbit::KElement,
                    xp: &Vector,
                    xm: &Vector| {
            (c.point_from_parts(&p.h, kp, xp) - c.point_from_parts(&p.h, km, xm)) / (2.0 * FD_STEP)
        };
        for a in ctx.cd.k_basis.column_iter() {
            let a = a.into_owned();
            let kp = tag.k.left_mul(&(&a * FD_STEP), |y| ctx.cd.ad(y))?;
            let km = tag.k.left_mul(&(&a * -FD_STEP), |y| ctx.cd.ad(y))?;
            src.push(diff(&source, &kp, &km, &x, &x));
            img.push(diff(&target, &kp, &km, &x, &x));
        }
        for d in n_plus.column_iter() {
            let d = d.into_owned();
            let (xp, xm) = (&x + &d * FD_STEP, &x - &d * FD_STEP);
            src.push(diff(&source, &tag.k, &tag.k, &xp, &xm));
            img.push(diff(&target, &tag.k, &tag.k, &xp, &xm));
        }
        let dim = ctx.cd.dim();
        let (s, i) = (from_columns(&src, dim), from_columns(&img, dim));
        let before = s.transpose() * &ctx.omega.gram * &s;
        let after = i.transpose() * &ctx.omega.gram * &i;
        worst = worst.max((after - before).amax());
    }
    Ok(worst)
}

/// `|d/dt Q(alpha(t))/2 - Omega(ad(A) alpha', alpha)|` along random linear curves, and the
/// asymmetry `|beta_A(X,Y) - beta_A(Y,X)|` with `beta_A(X,Y) = Omega(ad(A)X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianReport {
    pub derivative: f64,
    pub symmetry: f64,
}

pub fn hamiltonian_q_check(
    ctx: &HermitianContext<'_>,
    a: &Vector,
    seed: u64,
    curves: usize,
) -> Result<HamiltonianReport> {
    ctx.check_len(a)?;
    if ctx.cd.s_part(a).norm() > ctx.cd.tol.threshold(a.norm()) {
        return Err(Error::Domain("A must lie in u".into()));
    }
    let ad = ctx.cd.ad(a);
    let q = |x: &Vector| ctx.omega_form(&(&ad * x), x);
    let mut rng = seeded_rng(seed);
    let dim = ctx.cd.dim();
    let mut rep = HamiltonianReport {
        derivative: 0.0,
        symmetry: 0.0,
    };
    for _ in 0..curves {
        let x0 = normal_vector(&mut rng, dim);
        let vel = normal_vector(&mut rng, dim);
        let t = normal_vector(&mut rng, 1)[0];
        let at = |s: f64| &x0 + &vel * s;
        let fd = (q(&at(t + FD_STEP)) - q(&at(t - FD_STEP))) / (4.0 * FD_STEP);
        let exact = ctx.omega_form(&(&ad * &vel), &at(t));
        rep.derivative = rep.derivative.max((fd - exact).abs());
        let beta = |u: &Vector, w: &Vector| ctx.omega_form(&(&ad * u), w);
        rep.symmetry = rep.symmetry.max((beta(&x0, &vel) - beta(&vel, &x0)).abs());
    }
    Ok(rep)
}

/// Outcome of the isotropic-orbit classification at `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyReport {
    pub flag_dim: usize,
    pub orbit_dim: usize,
    /// Largest `|Omega|` on tangent pairs of the flag at the sampled flag points.
    pub flag_isotropy: f64,
    pub isotropy_dim_h: usize,
    /// Largest isotropy dimension of `U` at `H + X` over the sampled `X`.
    pub max_isotropy_dim_shifted: usize,
    /// Smallest `||u_moment(H + X)||` over the sampled `X`.
    pub min_moment_shifted: f64,
    pub samples: usize,
}

impl IsotropyReport {
    pub fn passes(&self, isotropy_tol: f64) -> bool {
        2 * self.flag_dim == self.orbit_dim
            && self.flag_isotropy < isotropy_tol
            && (self.samples == 0 || self.max_isotropy_dim_shifted < self.isotropy_dim_h)
            && (self.samples == 0 || self.min_moment_shifted > isotropy_tol)
    }
}

fn isotropy_dim(ctx: &HermitianContext<'_>, x: &Vector) -> usize {
    let m = ctx.u_directions(x);
    m.ncols() - rank_rel(&m, RANK_REL)
}

/// Certifies that the flag through `H` is Lagrangian in `Ad(G) H` and that `Ad(U)(H + X)` is
/// larger than the flag for random nonzero `X` in `n_H^+`, where the moment map is nonzero.
pub fn unique_isotropic_orbit_check(
    ctx: &HermitianContext<'_>,
    h: &Vector,
    seed: u64,
    n_x: usize,
) -> Result<IsotropyReport> {
    let cd = ctx.cd;
    let n_plus = cd.h_subspaces(h)?.n_plus;
    let flag_dim = rank_rel(&ctx.u_directions(h), RANK_REL);
    let all: Vec<Vector> = (0..cd.dim())
        .map(|i| cd.ad(&cd.alg().basis_vector(i)) * h)
        .collect();
    let orbit_dim = rank_rel(&from_columns(&all, cd.dim()), RANK_REL);
    let mut flag_isotropy = ctx.isotropy_residual(h);
    for s in cd.flag_orbit_sample(h, seed, 5)? {
        flag_isotropy = flag_isotropy.max(ctx.isotropy_residual(&s.point));
    }
    let isotropy_dim_h = isotropy_dim(ctx, h);
    let mut rng = seeded_rng(seed ^ 0x5eed);
    let mut max_shift = 0;
    let mut min_moment = f64::INFINITY;
    for _ in 0..n_x {
        let x = &n_plus * normal_vector(&mut rng, n_plus.ncols());
        let p = h + x;
        max_shift = max_shift.max(isotropy_dim(ctx, &p));
        min_moment = min_moment.min(ctx.u_moment(&p).norm());
    }
    Ok(IsotropyReport {
        flag_dim,
        orbit_dim,
        flag_isotropy,
        isotropy_dim_h,
        max_isotropy_dim_shifted: max_shift,
        min_moment_shifted: min_moment,
        samples: n_x,
    })
}

/// `Ad(u) D` with `D` a random complex diagonal element and `u` random in `U`.
pub fn random_normal_element(ctx: &HermitianContext<'_>, rng: &mut Rng) -> Result<Vector> {
    let a = &ctx.cd.a_basis;
    let d = a * normal_vector(rng, a.ncols()) + &ctx.j * (a * normal_vector(rng, a.ncols()));
    Ok(ctx.cd.random_k(rng)?.act(&d))
}

/// `Ad(u) X` with `X` a random element of a single positive root space.
pub fn random_root_vector(ctx: &HermitianContext<'_>, rng: &mut Rng, root: usize) -> Result<Vector> {
    let sp = &ctx.cd.roots[root].space_basis;
    let x = sp * normal_vector(rng, sp.ncols());
    Ok(ctx.cd.random_k(rng)?.act(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_algebra, cartan_structure, Family};
    use crate::semidirect::sample_semidirect_orbit;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn cd(f: Family) -> CartanData {
        cartan_structure(&build_algebra(f).unwrap()).unwrap()
    }

    fn standard(m: usize) -> Mat {
        let mut g = Mat::zeros(2 * m, 2 * m);
        for i in 0..m {
            g[(i, m + i)] = 1.0;
            g[(m + i, i)] = -1.0;
        }
        g
    }

    #[test]
    fn real_algebra_rejected() {
        let c = cd(Family::SlReal(2));
        assert!(matches!(HermitianContext::new(&c), Err(Error::Domain(_))));
    }

    #[test]
    fn hermitian_form_on_sl2c() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        // complex Killing form of sl(2,C) is 4 tr(XY), and tr(H^2) = 2
        let val = ctx.hermitian_form(&h, &h).unwrap();
        assert!((val.re - 8.0).abs() < 1e-12 && val.im.abs() < 1e-12);
        assert!((ctx.b_tau_form(&h, &h) - 16.0).abs() < 1e-12);

        let mut rng = seeded_rng(5);
        for _ in 0..10 {
            let x = normal_vector(&mut rng, 6);
            let y = normal_vector(&mut rng, 6);
            let hxx = ctx.hermitian_form(&x, &x).unwrap();
            assert!(hxx.re > 0.0 && hxx.im.abs() < 1e-12);
            let hxy = ctx.hermitian_form(&x, &y).unwrap();
            let hyx = ctx.hermitian_form(&y, &x).unwrap();
            assert!((hxy - hyx.conj()).norm() < 1e-12);
            let ix = &ctx.j * &x;
            let i = Complex64::new(0.0, 1.0);
            assert!((ctx.hermitian_form(&ix, &y).unwrap() - i * hxy).norm() < 1e-12);
            assert!((ctx.hermitian_form(&x, &(&ctx.j * &y)).unwrap() + i * hxy).norm() < 1e-12);
            assert!((ctx.b_tau_form(&x, &y) - 2.0 * hxy.re).abs() < 1e-12);
            assert!((ctx.omega_form(&x, &y) + 2.0 * hxy.im).abs() < 1e-12);
            assert!((ctx.b_tau_form(&ix, &(&ctx.j * &y)) - ctx.b_tau_form(&x, &y)).abs() < 1e-12);
            assert_eq!(ctx.omega_form(&x, &x), 0.0);
        }
    }

    #[test]
    fn restriction_to_symmetric_part_is_killing() {
        let c = cd(Family::SlComplex(3));
        let ctx = HermitianContext::new(&c).unwrap();
        let mut rng = seeded_rng(6);
        let x = &c.s_basis * normal_vector(&mut rng, c.s_basis.ncols());
        let y = &c.s_basis * normal_vector(&mut rng, c.s_basis.ncols());
        let hv = ctx.hermitian_form(&x, &y).unwrap();
        assert!((hv - ctx.complex_killing(&x, &y)).norm() < 1e-10);
        assert!(hv.im.abs() < 1e-10);
    }

    #[test]
    fn u_is_lagrangian() {
        let c = cd(Family::SlComplex(3));
        let ctx = HermitianContext::new(&c).unwrap();
        let r = restrict_form(&ctx.omega, &c.k_basis).unwrap();
        assert!(r.gram.amax() < 1e-12);
        assert_eq!(2 * c.k_basis.ncols(), c.dim());
    }

    #[test]
    fn restrict_and_radical_examples() {
        let tol = Tolerance::default();
        let f = SkewFormData::new(&standard(2), tol).unwrap();
        let line = Mat::from_column_slice(4, 1, &[1.0, 2.0, 0.0, -1.0]);
        assert_eq!(restrict_form(&f, &line).unwrap().gram, Mat::zeros(1, 1));
        let dep = Mat::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(restrict_form(&f, &dep), Err(Error::Dimension(_))));
        assert_eq!(radical(&f).ncols(), 0);
        let zero = SkewFormData::new(&Mat::zeros(4, 4), tol).unwrap();
        assert_eq!(radical(&zero).ncols(), 4);
        let mut g = Mat::zeros(4, 4);
        g.view_mut((0, 0), (2, 2)).copy_from(&standard(1));
        let partial = SkewFormData::new(&g, tol).unwrap();
        assert_eq!(radical(&partial).ncols(), 2);
    }

    #[test]
    fn max_isotropic_examples() {
        let tol = Tolerance::default();
        let f = SkewFormData::new(&standard(2), tol).unwrap();
        let w = max_isotropic(&f, 1);
        assert_eq!(w.ncols(), 2);
        assert!(f.max_on(&w) < 1e-12);
        assert_eq!(max_isotropic(&SkewFormData::new(&Mat::zeros(3, 3), tol).unwrap(), 1).ncols(), 3);
        let mut g = Mat::zeros(4, 4);
        g.view_mut((0, 0), (2, 2)).copy_from(&standard(1));
        let partial = SkewFormData::new(&g, tol).unwrap();
        assert_eq!(max_isotropic(&partial, 2).ncols(), 3);
    }

    #[test]
    fn antisymmetrized_on_construction() {
        let g = Mat::from_row_slice(2, 2, &[1.0, 3.0, 1.0, 2.0]);
        let f = SkewFormData::new(&g, Tolerance::default()).unwrap();
        assert_eq!(&f.gram + f.gram.transpose(), Mat::zeros(2, 2));
        assert!(SkewFormData::new(&Mat::zeros(2, 3), Tolerance::default()).is_err());
    }

    #[test]
    fn orbit_tangent_dimensions() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        let semi = sample_semidirect_orbit(&c, &h, 1, 3, 2).unwrap();
        assert_eq!(ctx.orbit_tangent_basis(&semi[0]).unwrap().ncols(), 4);
        let flag = c.flag_orbit_sample(&h, 1, 3).unwrap();
        assert_eq!(ctx.orbit_tangent_basis(&flag[0]).unwrap().ncols(), 2);
        let zero = c.flag_orbit_sample(&Vector::zeros(6), 1, 1).unwrap();
        assert_eq!(ctx.orbit_tangent_basis(&zero[0]).unwrap().ncols(), 0);
        let adj = DeformationContext::new(&c, RParam::Finite(1.0))
            .unwrap()
            .sample_deformed_orbit(&h, 1, 2, 2)
            .unwrap();
        assert_eq!(ctx.orbit_tangent_basis(&adj[0]).unwrap().ncols(), 4);
    }

    #[test]
    fn symplectic_on_semidirect_orbit_sl2c() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        let samples = sample_semidirect_orbit(&c, &h, 2, 10, 2).unwrap();
        let rep = check_symplectic_on_orbit(&ctx, &samples).unwrap();
        assert!(rep.full_rank(), "{rep:?}");
        assert_eq!(rep.tangent_dim, 4);
        assert!(rep.fiber_isotropy < 1e-10);
        assert!(rep.fibers_maximal);
    }

    #[test]
    fn gradient_of_height_on_sphere() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        let f = HeightFunction::new(&ctx, h.clone()).unwrap();
        assert!(ctx.gradient_at(&h, &h).norm() < 1e-12);
        assert!(ctx.gradient_at(&h, &-&h).norm() < 1e-12);
        let flag = c.flag_orbit_sample(&h, 3, 10).unwrap();
        let field = gradient_field(&ctx, &f, &flag);
        assert!(field.field_values.iter().any(|y| y.norm() > 1e-3));
        let rep = gradient_report(&ctx, &f, &field).unwrap();
        assert!(rep.tangency < 1e-9 && rep.fiber < 1e-9 && rep.derivative < 1e-6, "{rep:?}");
        assert!(HeightFunction::new(&ctx, c.k_basis.column(0).into_owned()).is_err());
    }

    #[test]
    fn lagrangian_sections_sl2c() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        let f = HeightFunction::new(&ctx, h.clone()).unwrap();
        let flag = c.flag_orbit_sample(&h, 4, 10).unwrap();
        let field = gradient_field(&ctx, &f, &flag);
        for t in [0.0, 0.5, 1.0, 2.0] {
            let sec = lagrangian_section(&ctx, &field, t);
            let (omega, gap) = section_isotropy(&ctx, &f, &sec).unwrap();
            assert!(omega < 1e-6, "t={t} omega={omega}");
            assert!(gap < 1e-6, "t={t} gap={gap}");
        }
        let zero = HeightFunction::new(&ctx, Vector::zeros(6)).unwrap();
        let field0 = gradient_field(&ctx, &zero, &flag);
        let sec = lagrangian_section(&ctx, &field0, 3.0);
        assert_eq!(sec.section_points, sec.base_points);
    }

    #[test]
    fn hamiltonian_gradient_relation() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        let f = HeightFunction::new(&ctx, h.clone()).unwrap();
        let samples = sample_semidirect_orbit(&c, &h, 7, 5, 2).unwrap();
        assert!(hamiltonian_gradient_residual(&ctx, &f, &samples).unwrap() < 1e-6);
    }

    #[test]
    fn pullback_identity_at_r_one() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        let samples = DeformationContext::new(&c, RParam::Finite(1.0))
            .unwrap()
            .sample_deformed_orbit(&h, 3, 5, 1)
            .unwrap();
        assert!(pullback_check(&ctx, RParam::Finite(1.0), &samples).unwrap() < 1e-12);
    }

    #[test]
    fn pullback_scales_fiber_pairs() {
        // at H itself, d psi~_r acts on n_H^+ as psi_r, which multiplies Omega on fiber pairs by 1 - c^2
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        let n_plus = c.h_subspaces(&h).unwrap().n_plus;
        let (d0, d1) = (n_plus.column(0).into_owned(), n_plus.column(1).into_owned());
        let r = 2.0;
        let coef = (r - 1.0) / (r + 1.0);
        let ctx_r = DeformationContext::finite(&c, r).unwrap();
        let after = ctx.omega_form(&ctx_r.psi_r_map(&d0), &ctx_r.psi_r_map(&d1));
        let before = ctx.omega_form(&d0, &d1);
        assert!(before.abs() > 0.5);
        assert!((after - (1.0 - coef * coef) * before).abs() < 1e-10);
    }

    #[test]
    fn moment_examples() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let h = c.regular_h().unwrap();
        assert!(ctx.u_moment(&h).norm() < 1e-14);
        let e12 = v(&[0.0, 0.5, 0.5, 0.0, 0.0, 0.0]);
        // [tau E12, E12] = [-E21, E12] = diag(1, -1)
        let br = c.ad(&ctx.tau(&e12)) * &e12;
        assert!((br - &h).norm() < 1e-14);
        let m = ctx.u_moment(&e12);
        assert!(c.s_part(&m).norm() < 1e-14 && m.norm() > 0.5);

        let c3 = cd(Family::SlComplex(3));
        let ctx3 = HermitianContext::new(&c3).unwrap();
        let mut rng = seeded_rng(10);
        for _ in 0..10 {
            let x = random_normal_element(&ctx3, &mut rng).unwrap();
            assert!(ctx3.u_moment(&x).norm() < 1e-9);
            assert!(ctx3.isotropy_residual(&x) < 1e-8);
            let y = random_root_vector(&ctx3, &mut rng, c3.positive[0]).unwrap();
            assert!(ctx3.u_moment(&y).norm() > 1e-3);
            assert!(ctx3.isotropy_residual(&y) > 1e-8);
        }
    }

    #[test]
    fn hamiltonian_q() {
        let c = cd(Family::SlComplex(2));
        let ctx = HermitianContext::new(&c).unwrap();
        let zero = hamiltonian_q_check(&ctx, &Vector::zeros(6), 1, 5).unwrap();
        assert_eq!(zero.derivative, 0.0);
        let mut rng = seeded_rng(3);
        let a = &c.k_basis * normal_vector(&mut rng, 3);
        let rep = hamiltonian_q_check(&ctx, &a, 2, 20).unwrap();
        assert!(rep.derivative < 1e-6 && rep.symmetry < 1e-10, "{rep:?}");
        assert!(hamiltonian_q_check(&ctx, &c.regular_h().unwrap(), 1, 1).is_err());
    }

    #[test]
    fn omega_is_u_invariant() {
        let c = cd(Family::SlComplex(3));
        let ctx = HermitianContext::new(&c).unwrap();
        let mut rng = seeded_rng(21);
        let a = &c.k_basis * normal_vector(&mut rng, c.k_basis.ncols());
        let x = normal_vector(&mut rng, c.dim());
        let y = normal_vector(&mut rng, c.dim());
        assert!(ctx.invariance_residual(&a, 0.8, &x, &y).unwrap() < 1e-8);
    }

    #[test]
    fn unique_isotropic_orbit() {
        for (fam, dims) in [(Family::SlComplex(2), (2, 4)), (Family::SlComplex(3), (6, 12))] {
            let c = cd(fam);
            let ctx = HermitianContext::new(&c).unwrap();
            let h = c.regular_h().unwrap();
            let rep = unique_isotropic_orbit_check(&ctx, &h, 1, 5).unwrap();
            assert_eq!((rep.flag_dim, rep.orbit_dim), dims);
            assert!(rep.passes(1e-8), "{rep:?}");
        }
    }
}
