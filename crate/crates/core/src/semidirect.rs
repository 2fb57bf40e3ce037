//! Semidirect products `g x_rho V` of a compact algebra with a representation,
//! their moment map `mu(v ^ w)`, coadjoint orbits and the identification of an
//! orbit with the cotangent bundle of `rho(G) x`.
//!
//! Two representations are provided: `k` acting on `s` by the adjoint action
//! (inner product `B_theta`), and `so(n)` acting on `R^n`. Representation
//! coordinates are always orthonormal, so covectors are stored as vectors.
//! The sign convention is `<mu(v ^ w), B> = <v, rho(B) w>`; for the adjoint
//! case this gives `mu(v ^ w) = [v, w]`.

use crate::algebra::{build_algebra, CartanData, Family};
use crate::error::{Error, Result};
use crate::numerics::{
    from_columns, hcat, lstsq, matrix_exp, normal_vector, orthonormalize_in, range_basis, rank,
    seeded_rng, subspace_distance, Mat, Rng, Tolerance, Vector,
};
use crate::orbit::{FiberTag, OrbitKind, OrbitSample, OrbitTag};

const SUBSPACE_EPS: f64 = 1e-10;

/// `(X, v)` with `X` in `k` and `v` in `s`, both in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SemidirectElement {
    pub k_part: Vector,
    pub s_part: Vector,
}

impl SemidirectElement {
    pub fn new(cd: &CartanData, k_part: Vector, s_part: Vector) -> Result<Self> {
        check_in(cd, &k_part, true, "k_part")?;
        check_in(cd, &s_part, false, "s_part")?;
        Ok(Self { k_part, s_part })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            k_part: Vector::zeros(dim),
            s_part: Vector::zeros(dim),
        }
    }

    /// Sum `X + v` as an element of the underlying vector space `k + s`.
    pub fn total(&self) -> Vector {
        &self.k_part + &self.s_part
    }
}

fn check_in(cd: &CartanData, x: &Vector, in_k: bool, what: &str) -> Result<()> {
    if x.len() != cd.dim() {
        return Err(Error::Dimension(format!("{what} has length {}", x.len())));
    }
    let off = if in_k { cd.s_part(x) } else { cd.k_part(x) };
    if off.norm() > SUBSPACE_EPS * x.norm().max(1.0) {
        let space = if in_k { "k" } else { "s" };
        return Err(Error::Domain(format!(
            "{what} is not in {space} (off-component {:.3e})",
            off.norm()
        )));
    }
    Ok(())
}

/// `([X,Y], [X,w] - [Y,v])`.
pub fn semidirect_bracket(
    cd: &CartanData,
    a: &SemidirectElement,
    b: &SemidirectElement,
) -> Result<SemidirectElement> {
    for e in [a, b] {
        check_in(cd, &e.k_part, true, "k_part")?;
        check_in(cd, &e.s_part, false, "s_part")?;
    }
    let alg = cd.alg();
    Ok(SemidirectElement {
        k_part: alg.bracket(&a.k_part, &b.k_part)?,
        s_part: alg.bracket(&a.k_part, &b.s_part)? - alg.bracket(&b.k_part, &a.s_part)?,
    })
}

/// `mu(X ^ Y) = [X, Y]` for `X, Y` in `s`.
pub fn moment_mu(cd: &CartanData, x: &Vector, y: &Vector) -> Result<Vector> {
    check_in(cd, x, false, "X")?;
    check_in(cd, y, false, "Y")?;
    cd.alg().bracket(x, y)
}

/// `B_theta`-orthonormal frames of `k` and `s`; coordinates on `k + s` are taken in this order.
#[derive(Debug, Clone)]
pub struct KsFrame {
    pub k: Mat,
    pub s: Mat,
    b_theta: Mat,
}

impl KsFrame {
    pub fn new(cd: &CartanData) -> Result<Self> {
        Ok(Self {
            k: orthonormalize_in(&cd.k_basis, &cd.b_theta)?,
            s: orthonormalize_in(&cd.s_basis, &cd.b_theta)?,
            b_theta: cd.b_theta.clone(),
        })
    }

    pub fn k_coords(&self, x: &Vector) -> Vector {
        self.k.transpose() * (&self.b_theta * x)
    }

    pub fn s_coords(&self, x: &Vector) -> Vector {
        self.s.transpose() * (&self.b_theta * x)
    }

    /// Restriction of an ambient operator to `k -> k`, `s -> k`, etc., in frame coordinates.
    fn block(&self, op: &Mat, from: &Mat, to: &Mat) -> Mat {
        to.transpose() * &self.b_theta * op * from
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.k.ncols(), self.s.ncols())
    }
}

fn assemble(tl: &Mat, tr: &Mat, bl: &Mat, br: &Mat) -> Mat {
    let (p, q) = (tl.nrows(), br.nrows());
    let mut m = Mat::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(tl);
    m.view_mut((0, p), (p, q)).copy_from(tr);
    m.view_mut((p, 0), (q, p)).copy_from(bl);
    m.view_mut((p, p), (q, q)).copy_from(br);
    m
}

/// `ad_rho(X, Y)` on `k + s` in frame coordinates: `(a, b) -> ([X,a], [X,b] - [a,Y])`.
pub fn semidirect_ad_matrix(cd: &CartanData, frame: &KsFrame, e: &SemidirectElement) -> Mat {
    let adx = cd.ad(&e.k_part);
    let ady = cd.ad(&e.s_part);
    let (p, q) = frame.dims();
    assemble(
        &frame.block(&adx, &frame.k, &frame.k),
        &Mat::zeros(p, q),
        &frame.block(&ady, &frame.k, &frame.s),
        &frame.block(&adx, &frame.s, &frame.s),
    )
}

/// `ad*(X, Y) = [[ad X, -A(Y)], [0, ad X]]` with `A(Y)(Z) = [Y, Z]`, in frame coordinates.
pub fn coad_star_matrix(cd: &CartanData, frame: &KsFrame, e: &SemidirectElement) -> Mat {
    let adx = cd.ad(&e.k_part);
    let ady = cd.ad(&e.s_part);
    let (p, q) = frame.dims();
    assemble(
        &frame.block(&adx, &frame.k, &frame.k),
        &(-frame.block(&ady, &frame.s, &frame.k)),
        &Mat::zeros(q, p),
        &frame.block(&adx, &frame.s, &frame.s),
    )
}

/// `max |<ad_rho(e) a, b> + <a, ad*(e) b>|` over frame basis vectors.
pub fn coadjoint_duality_residual(cd: &CartanData, frame: &KsFrame, e: &SemidirectElement) -> f64 {
    let sum = semidirect_ad_matrix(cd, frame, e).transpose() + coad_star_matrix(cd, frame, e);
    sum.amax()
}

/// Fiber `w + [w, s]` of the semidirect orbit over `w`; `fiber_basis` spans `ad(w)(s)` inside `k`.
#[derive(Debug, Clone)]
pub struct CoadjointFiber {
    pub base: Vector,
    pub fiber_basis: Mat,
}

pub fn coadjoint_fiber(cd: &CartanData, w: &Vector) -> Result<CoadjointFiber> {
    check_in(cd, w, false, "w")?;
    let image = cd.ad(w) * &cd.s_basis;
    Ok(CoadjointFiber {
        base: w.clone(),
        fiber_basis: range_basis(&image, cd.tol.abs_eps, cd.tol.rel_eps),
    })
}

/// Distance between `[H, s]` and `psi(n_H^+)`.
pub fn fiber_over_h_residual(cd: &CartanData, h: &Vector) -> Result<f64> {
    let fiber = coadjoint_fiber(cd, h)?.fiber_basis;
    let n_plus = cd.h_subspaces(h)?.n_plus;
    let psi = Mat::identity(cd.dim(), cd.dim()) + &cd.theta;
    let image = range_basis(&(psi * n_plus), cd.tol.abs_eps, cd.tol.rel_eps);
    Ok(subspace_distance(&fiber, &image))
}

/// Points `Ad(k)(H + [H, v])` over `n_base` random `k` and `n_fiber` random `v` in `s`.
pub fn sample_semidirect_orbit(
    cd: &CartanData,
    h: &Vector,
    seed: u64,
    n_base: usize,
    n_fiber: usize,
) -> Result<Vec<OrbitSample>> {
    cd.chamber_coeffs(h)?;
    let adh = cd.ad(h);
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(n_base * n_fiber);
    for bi in 0..n_base {
        let k = cd.random_k(&mut rng)?;
        for fi in 0..n_fiber {
            let coeffs = normal_vector(&mut rng, cd.s_basis.ncols());
            let element = &cd.s_basis * &coeffs;
            let point = k.act(&(h + &adh * &element));
            out.push(OrbitSample {
                point,
                h: h.clone(),
                kind: OrbitKind::Semidirect,
                tag: Some(OrbitTag {
                    base_index: bi,
                    fiber_index: fi,
                    k: k.clone(),
                    fiber: FiberTag::Symmetric { coeffs, element },
                }),
            });
        }
    }
    Ok(out)
}

/// Splits an orbit point into its `s`-part (the base point) and `k`-part (the fiber coordinate).
pub fn split_point(cd: &CartanData, p: &Vector) -> (Vector, Vector) {
    (cd.s_part(p), cd.k_part(p))
}

/// Re-expresses a semidirect sample through the limit of the deformed orbits:
/// the fiber point `[H, v]` is written as `psi(X)` with `X` in `n_H^+`.
pub fn to_limit_tag(cd: &CartanData, p: &OrbitSample) -> Result<OrbitSample> {
    let tag = p.tag()?;
    let v = match &tag.fiber {
        FiberTag::Symmetric { element, .. } => element,
        _ => return Err(Error::Representation("expected a semidirect fiber tag".into())),
    };
    let n_plus = cd.h_subspaces(&p.h)?.n_plus;
    let psi = Mat::identity(cd.dim(), cd.dim()) + &cd.theta;
    let target = cd.ad(&p.h) * v;
    let coeffs = lstsq(&(psi * &n_plus), &target);
    let element = &n_plus * &coeffs;
    let mut tag = tag.clone();
    tag.fiber = FiberTag::NilPositive { coeffs, element };
    Ok(OrbitSample {
        point: p.point.clone(),
        h: p.h.clone(),
        kind: p.kind,
        tag: Some(tag),
    })
}

/// Inverse of [`to_limit_tag`]: `psi(X) = [H, v]` solved for `v` in `s`.
pub fn from_limit_tag(cd: &CartanData, p: &OrbitSample) -> Result<OrbitSample> {
    let tag = p.tag()?;
    let x = match &tag.fiber {
        FiberTag::NilPositive { element, .. } => element,
        _ => return Err(Error::Representation("expected an n_H^+ fiber tag".into())),
    };
    let target = x + &cd.theta * x;
    let coeffs = lstsq(&(cd.ad(&p.h) * &cd.s_basis), &target);
    let element = &cd.s_basis * &coeffs;
    let point = tag.k.act(&(&p.h + cd.ad(&p.h) * &element));
    let mut tag = tag.clone();
    tag.fiber = FiberTag::Symmetric { coeffs, element };
    Ok(OrbitSample {
        point,
        h: p.h.clone(),
        kind: OrbitKind::Semidirect,
        tag: Some(tag),
    })
}

// ---------------------------------------------------------------------------
// Representations
// ---------------------------------------------------------------------------

/// A representation of a compact algebra `g` on `V`, in orthonormal coordinates on both.
pub trait Representation {
    /// `rho(e_i)` on `V`.
    fn rho_basis(&self) -> &[Mat];
    /// `ad(e_i)` on `g`.
    fn g_ad_basis(&self) -> &[Mat];
    fn v_dim(&self) -> usize;

    fn g_dim(&self) -> usize {
        self.rho_basis().len()
    }

    fn rho(&self, b: &Vector) -> Mat {
        combine(self.rho_basis(), b, self.v_dim())
    }

    fn g_ad(&self, b: &Vector) -> Mat {
        combine(self.g_ad_basis(), b, self.g_dim())
    }

    /// Columns `rho(e_i) w`; their span is the tangent space of `rho(G) w`.
    fn orbit_directions(&self, w: &Vector) -> Mat {
        let cols: Vec<Vector> = self.rho_basis().iter().map(|r| r * w).collect();
        from_columns(&cols, self.v_dim())
    }

    /// `mu(v ^ w)` with `<mu(v ^ w), B> = <v, rho(B) w>`.
    fn mu(&self, v: &Vector, w: &Vector) -> Vector {
        self.orbit_directions(w).transpose() * v
    }
}

fn combine(basis: &[Mat], b: &Vector, n: usize) -> Mat {
    basis
        .iter()
        .zip(b.iter())
        .fold(Mat::zeros(n, n), |acc, (m, &c)| acc + m * c)
}

/// `k` acting on `s` by `ad`, in `B_theta`-orthonormal frames.
#[derive(Debug, Clone)]
pub struct AdjointOnS {
    pub frame: KsFrame,
    rho: Vec<Mat>,
    g_ad: Vec<Mat>,
}

impl AdjointOnS {
    pub fn new(cd: &CartanData) -> Result<Self> {
        let frame = KsFrame::new(cd)?;
        let mut rho = Vec::new();
        let mut g_ad = Vec::new();
        for a in frame.k.column_iter() {
            let ad = cd.ad(&a.into_owned());
            rho.push(frame.block(&ad, &frame.s, &frame.s));
            g_ad.push(frame.block(&ad, &frame.k, &frame.k));
        }
        Ok(Self { frame, rho, g_ad })
    }

    /// Ambient vector `k-part + s-part` from representation coordinates.
    pub fn to_ambient(&self, point: &RepPoint) -> Vector {
        &self.frame.k * &point.g_part + &self.frame.s * &point.v_part
    }

    pub fn from_ambient(&self, p: &Vector) -> RepPoint {
        RepPoint {
            g_part: self.frame.k_coords(p),
            v_part: self.frame.s_coords(p),
        }
    }
}

impl Representation for AdjointOnS {
    fn rho_basis(&self) -> &[Mat] {
        &self.rho
    }
    fn g_ad_basis(&self) -> &[Mat] {
        &self.g_ad
    }
    fn v_dim(&self) -> usize {
        self.frame.s.ncols()
    }
}

/// `so(n)` on `R^n`; `so(n)` carries `<M, B> = tr(M^T B) / 2`, for which `E_ij - E_ji` is orthonormal.
#[derive(Debug, Clone)]
pub struct SoCanonical {
    n: usize,
    rho: Vec<Mat>,
    g_ad: Vec<Mat>,
}

impl SoCanonical {
    pub fn new(n: usize) -> Result<Self> {
        let alg = build_algebra(Family::So(n))?;
        let rho = alg
            .basis
            .iter()
            .map(|m| Mat::from_fn(n, n, |i, j| m[(i, j)].re))
            .collect();
        let g_ad = (0..alg.dim).map(|i| alg.ad(&alg.basis_vector(i))).collect();
        Ok(Self { n, rho, g_ad })
    }

    /// The matrix of a coordinate vector of `so(n)`.
    pub fn matrix(&self, b: &Vector) -> Mat {
        self.rho(b)
    }
}

impl Representation for SoCanonical {
    fn rho_basis(&self) -> &[Mat] {
        &self.rho
    }
    fn g_ad_basis(&self) -> &[Mat] {
        &self.g_ad
    }
    fn v_dim(&self) -> usize {
        self.n
    }
}

/// A point `(xi, w)` of `g* + V` in representation coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RepPoint {
    pub g_part: Vector,
    pub v_part: Vector,
}

/// Group element `exp(B_1) ... exp(B_m)` acting on `g` and on `V`.
#[derive(Debug, Clone)]
pub struct RepGroupElement {
    pub on_g: Mat,
    pub on_v: Mat,
}

impl RepGroupElement {
    pub fn random<R: Representation>(rep: &R, rng: &mut Rng, factors: usize) -> Result<Self> {
        let mut on_g = Mat::identity(rep.g_dim(), rep.g_dim());
        let mut on_v = Mat::identity(rep.v_dim(), rep.v_dim());
        for _ in 0..factors {
            let b = normal_vector(rng, rep.g_dim());
            on_g *= matrix_exp(&rep.g_ad(&b))?;
            on_v *= matrix_exp(&rep.rho(&b))?;
        }
        Ok(Self { on_g, on_v })
    }

    pub fn act(&self, p: &RepPoint) -> RepPoint {
        RepPoint {
            g_part: &self.on_g * &p.g_part,
            v_part: &self.on_v * &p.v_part,
        }
    }
}

/// Orbit of the semidirect group through `x`: points `(mu(v ^ w), w)` with `w = g x`.
pub fn sample_rep_orbit<R: Representation>(
    rep: &R,
    x: &Vector,
    seed: u64,
    n_base: usize,
    n_fiber: usize,
) -> Result<Vec<RepPoint>> {
    if x.len() != rep.v_dim() {
        return Err(Error::Dimension(format!(
            "orbit base has length {}, representation has dimension {}",
            x.len(),
            rep.v_dim()
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(n_base * n_fiber);
    for _ in 0..n_base {
        let g = RepGroupElement::random(rep, &mut rng, crate::algebra::K_FACTORS)?;
        let w = &g.on_v * x;
        for _ in 0..n_fiber {
            let v = normal_vector(&mut rng, rep.v_dim());
            out.push(RepPoint {
                g_part: rep.mu(&v, &w),
                v_part: w.clone(),
            });
        }
    }
    Ok(out)
}

/// Orthonormal basis of the tangent space of `rho(G) w`.
pub fn tangent_basis<R: Representation>(rep: &R, w: &Vector, tol: Tolerance) -> Mat {
    range_basis(&rep.orbit_directions(w), tol.abs_eps, tol.rel_eps)
}

/// `phi(xi, w) = (w, f)` where `f` on `T_w` is `<gamma, .>` and `mu(gamma ^ w) = xi`, `gamma` in `T_w`.
pub fn phi_rep<R: Representation>(rep: &R, p: &RepPoint, tol: Tolerance) -> Result<(Vector, Vector)> {
    if p.g_part.len() != rep.g_dim() || p.v_part.len() != rep.v_dim() {
        return Err(Error::Dimension("point does not match the representation".into()));
    }
    let m = rep.orbit_directions(&p.v_part).transpose();
    let gamma = lstsq(&m, &p.g_part);
    let res = (&m * &gamma - &p.g_part).norm();
    if res > tol.threshold(p.g_part.norm()) {
        return Err(Error::Domain(format!(
            "point is not on the orbit fiber over its base (residual {res:.3e})"
        )));
    }
    Ok((p.v_part.clone(), gamma))
}

/// `m(gamma_y) = mu(gamma ^ y) + y`; the covector is first projected to `T_y`.
pub fn cotangent_moment_rep<R: Representation>(
    rep: &R,
    base: &Vector,
    covector: &Vector,
    tol: Tolerance,
) -> Result<RepPoint> {
    if base.len() != rep.v_dim() || covector.len() != rep.v_dim() {
        return Err(Error::Dimension(format!(
            "base and covector must have length {}",
            rep.v_dim()
        )));
    }
    let t = tangent_basis(rep, base, tol);
    let gamma = &t * (t.transpose() * covector);
    Ok(RepPoint {
        g_part: rep.mu(&gamma, base),
        v_part: base.clone(),
    })
}

/// Rank of `xi -> phi(xi, w)` on the fiber `mu(V ^ w)` against `dim T_w`.
pub fn fiber_map_ranks<R: Representation>(rep: &R, w: &Vector, tol: Tolerance) -> Result<(usize, usize)> {
    let dirs = rep.orbit_directions(w);
    let tangent_dim = rank(&dirs, tol);
    let fiber = range_basis(&dirs.transpose(), tol.abs_eps, tol.rel_eps);
    let mut image = Mat::zeros(rep.v_dim(), 0);
    for xi in fiber.column_iter() {
        let p = RepPoint {
            g_part: xi.into_owned(),
            v_part: w.clone(),
        };
        let (_, gamma) = phi_rep(rep, &p, tol)?;
        image = hcat(&image, &Mat::from_column_slice(rep.v_dim(), 1, gamma.as_slice()));
    }
    Ok((rank(&image, tol), tangent_dim))
}

/// `|| m(g y, g gamma) - g m(y, gamma) ||` for a group element `g`.
pub fn moment_equivariance_residual<R: Representation>(
    rep: &R,
    g: &RepGroupElement,
    base: &Vector,
    covector: &Vector,
    tol: Tolerance,
) -> Result<f64> {
    let lhs = cotangent_moment_rep(rep, &(&g.on_v * base), &(&g.on_v * covector), tol)?;
    let rhs = g.act(&cotangent_moment_rep(rep, base, covector, tol)?);
    Ok((lhs.g_part - rhs.g_part).norm() + (lhs.v_part - rhs.v_part).norm())
}

/// `phi` on a tagged semidirect sample of `k x s`; returns the base point and the
/// covector as a `B_theta`-dual vector in `s`, both in ambient coordinates.
pub fn phi_cotangent(rep: &AdjointOnS, p: &OrbitSample, tol: Tolerance) -> Result<(Vector, Vector)> {
    let w = p.base_point()?;
    let mut q = rep.from_ambient(&p.point);
    q.v_part = rep.frame.s_coords(&w);
    let (_, gamma) = phi_rep(rep, &q, tol)?;
    Ok((w, &rep.frame.s * gamma))
}

/// `m` for `k x s` in ambient coordinates: returns `(mu(gamma ^ y), y)`.
pub fn cotangent_moment(
    rep: &AdjointOnS,
    base: &Vector,
    covector: &Vector,
    tol: Tolerance,
) -> Result<SemidirectElement> {
    if base.len() != covector.len() {
        return Err(Error::Dimension("base and covector lengths differ".into()));
    }
    let q = cotangent_moment_rep(
        rep,
        &rep.frame.s_coords(base),
        &rep.frame.s_coords(covector),
        tol,
    )?;
    Ok(SemidirectElement {
        k_part: &rep.frame.k * q.g_part,
        s_part: &rep.frame.s * q.v_part,
    })
}
