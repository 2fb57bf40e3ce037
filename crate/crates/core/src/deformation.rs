//! The one-parameter family of brackets `[X,Y]_r = T_r[T_r^{-1}X, T_r^{-1}Y]`,
//! where `T_r` scales `k` by `r` and fixes `s`, together with the map
//! `psi_r(Z) = Z + ((r-1)/(r+1)) theta Z` that carries root spaces of the
//! original algebra onto those of the deformed one.
//!
//! Deformed orbits are parameterized as `Ad(k)H + psi_r(Ad(k)X)` with `k` in
//! `K` and `X` in `n_H^+`. At `r = inf` the same formula gives the orbit of
//! the semidirect product, but the bracket itself is not formed there.

use crate::algebra::CartanData;
use crate::error::{Error, Result};
use crate::numerics::{
    matrix_exp, normal_vector, range_basis, seeded_rng, simultaneous_eigenspaces,
    subspace_distance, hcat, Mat, Vector,
};
use crate::orbit::{FiberTag, KElement, OrbitKind, OrbitSample, OrbitTag, RParam};

/// Parameter grid used by the property suites.
pub const R_GRID: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 10.0, 100.0];

#[derive(Debug, Clone)]
pub struct DeformationContext<'a> {
    pub cd: &'a CartanData,
    pub r: RParam,
    t_r: Option<(Mat, Mat)>,
    psi: Mat,
    ad_r_basis: Option<Vec<Mat>>,
}

impl<'a> DeformationContext<'a> {
    pub fn new(cd: &'a CartanData, r: RParam) -> Result<Self> {
        if let RParam::Finite(x) = r {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Domain(format!("r must be positive, got {x}")));
            }
        }
        let c = r.psi_coefficient();
        let dim = cd.dim();
        let psi = Mat::identity(dim, dim) + &cd.theta * c;
        let t_r = r.as_finite().map(|x| {
            let t = &cd.k_proj * x + &cd.s_proj;
            let t_inv = &cd.k_proj / x + &cd.s_proj;
            (t, t_inv)
        });
        let ad_r_basis = t_r.as_ref().map(|(t, t_inv)| {
            (0..dim)
                .map(|i| {
                    let e = t_inv * cd.alg().basis_vector(i);
                    t * cd.ad(&e) * t_inv
                })
                .collect()
        });
        Ok(Self {
            cd,
            r,
            t_r,
            psi,
            ad_r_basis,
        })
    }

    pub fn finite(cd: &'a CartanData, r: f64) -> Result<Self> {
        Self::new(cd, RParam::finite(r)?)
    }

    fn require_finite(&self, op: &str) -> Result<(&Mat, &Mat)> {
        self.t_r
            .as_ref()
            .map(|(t, ti)| (t, ti))
            .ok_or_else(|| {
                Error::Domain(format!(
                    "{op} is not defined at r = inf; use the semidirect product instead"
                ))
            })
    }

    fn check_len(&self, x: &Vector) -> Result<()> {
        if x.len() != self.cd.dim() {
            return Err(Error::Dimension(format!(
                "vector of length {} for algebra of dimension {}",
                x.len(),
                self.cd.dim()
            )));
        }
        Ok(())
    }

    pub fn t_r(&self) -> Result<&Mat> {
        Ok(self.require_finite("T_r")?.0)
    }

    pub fn t_r_inv(&self) -> Result<&Mat> {
        Ok(self.require_finite("T_r^-1")?.1)
    }

    pub fn psi_matrix(&self) -> &Mat {
        &self.psi
    }

    pub fn psi_r_map(&self, z: &Vector) -> Vector {
        &self.psi * z
    }

    /// `T_r [T_r^{-1} X, T_r^{-1} Y]`.
    pub fn bracket_r(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        let (t, ti) = self.require_finite("the deformed bracket")?;
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(t * self.cd.alg().bracket(&(ti * x), &(ti * y))?)
    }

    /// Matrix of `ad_r(X)`, assembled from the deformed structure tensor.
    pub fn ad_r(&self, x: &Vector) -> Result<Mat> {
        let basis = self
            .ad_r_basis
            .as_ref()
            .ok_or_else(|| Error::Domain("ad_r is not defined at r = inf".into()))?;
        self.check_len(x)?;
        let dim = self.cd.dim();
        Ok(basis
            .iter()
            .zip(x.iter())
            .fold(Mat::zeros(dim, dim), |acc, (a, &c)| acc + a * c))
    }

    /// `<T_r^{-1} X, T_r^{-1} Y>`.
    pub fn killing_r(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let ti = self.t_r_inv()?;
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.cd.alg().killing_form(&(ti * x), &(ti * y)))
    }

    /// `tr(ad_r X ad_r Y)`, the Killing form of the deformed algebra computed directly.
    pub fn killing_r_trace(&self, x: &Vector, y: &Vector) -> Result<f64> {
        Ok((self.ad_r(x)? * self.ad_r(y)?).trace())
    }

    /// `exp(t ad_r(A)) Y` for `A` in `k`.
    pub fn ad_r_exp_orbit(&self, a: &Vector, t: f64, y: &Vector) -> Result<Vector> {
        self.check_len(a)?;
        self.check_len(y)?;
        let s = self.cd.s_part(a).norm();
        if s > self.cd.tol.threshold(a.norm()) {
            return Err(Error::Domain(format!(
                "generator has an s-component of norm {s:.3e}; it must lie in k"
            )));
        }
        Ok(matrix_exp(&(self.ad_r(a)? * t))? * y)
    }

    /// `n_{r,H}^+`: eigenvectors of `ad_r(H)` with positive eigenvalue, orthonormal columns.
    pub fn r_positive_space(&self, h: &Vector) -> Result<Mat> {
        self.cd.chamber_coeffs(h)?;
        let spaces = simultaneous_eigenspaces(&[self.ad_r(h)?], self.cd.tol)?;
        let cut = self.cd.tol.threshold(h.norm());
        let mut out = Mat::zeros(self.cd.dim(), 0);
        for sp in spaces.iter().filter(|sp| sp.eigenvalues[0] > cut) {
            out = hcat(&out, &sp.basis);
        }
        Ok(range_basis(&out, self.cd.tol.abs_eps, self.cd.tol.rel_eps))
    }

    /// Mutual projection residual between `n_{r,H}^+` and `psi_r(n_H^+)`.
    pub fn r_root_space_residual(&self, h: &Vector) -> Result<f64> {
        let direct = self.r_positive_space(h)?;
        let n_plus = self.cd.h_subspaces(h)?.n_plus;
        let image = range_basis(&(&self.psi * n_plus), self.cd.tol.abs_eps, self.cd.tol.rel_eps);
        Ok(subspace_distance(&direct, &image))
    }

    /// Largest `||ad_r(H) psi_r X - alpha(H) psi_r X||` over all root-space basis vectors.
    pub fn eigenvector_residual(&self, h: &Vector) -> Result<f64> {
        let c = self.cd.a_coeffs(h)?;
        let adh = self.ad_r(h)?;
        let mut worst: f64 = 0.0;
        for root in &self.cd.roots {
            let val = root.eval(&c);
            for x in root.space_basis.column_iter() {
                let y = &self.psi * x;
                worst = worst.max((&adh * &y - &y * val).norm());
            }
        }
        Ok(worst)
    }

    /// `psi_r(Ad(e^{tA}) X)` against `exp(t r ad_r(A)) psi_r(X)`.
    ///
    /// Since `ad_r(A) = ad(A)/r` on `k`, the one-parameter subgroup generated
    /// by `A` in the original group corresponds to the one generated by `rA`
    /// in the deformed group.
    pub fn equivariance_residual(&self, a: &Vector, t: f64, x: &Vector) -> Result<f64> {
        let r = self
            .r
            .as_finite()
            .ok_or_else(|| Error::Domain("equivariance is checked for finite r".into()))?;
        let lhs = self.psi_r_map(&(matrix_exp(&(self.cd.ad(a) * t))? * x));
        let rhs = self.ad_r_exp_orbit(a, t * r, &self.psi_r_map(x))?;
        Ok((lhs - rhs).norm())
    }

    fn orbit_kind(&self) -> OrbitKind {
        match self.r {
            RParam::Finite(x) if x == 1.0 => OrbitKind::Adjoint,
            r => OrbitKind::Deformed(r),
        }
    }

    /// The point `Ad(k)H + psi_r(Ad(k)X)` for explicit construction data.
    pub fn point_from_parts(&self, h: &Vector, k: &KElement, x: &Vector) -> Vector {
        k.act(h) + self.psi_r_map(&k.act(x))
    }

    /// Samples `Ad(k)H + psi_r(Ad(k)X_c)` over `n_base` random `k` and `n_fiber` random `X_c` in `n_H^+`.
    pub fn sample_deformed_orbit(
        &self,
        h: &Vector,
        seed: u64,
        n_base: usize,
        n_fiber: usize,
    ) -> Result<Vec<OrbitSample>> {
        let n_plus = self.cd.h_subspaces(h)?.n_plus;
        let mut rng = seeded_rng(seed);
        let mut out = Vec::with_capacity(n_base * n_fiber);
        for bi in 0..n_base {
            let k = self.cd.random_k(&mut rng)?;
            for fi in 0..n_fiber {
                let coeffs = normal_vector(&mut rng, n_plus.ncols());
                let element = &n_plus * &coeffs;
                out.push(OrbitSample {
                    point: self.point_from_parts(h, &k, &element),
                    h: h.clone(),
                    kind: self.orbit_kind(),
                    tag: Some(OrbitTag {
                        base_index: bi,
                        fiber_index: fi,
                        k: k.clone(),
                        fiber: FiberTag::NilPositive { coeffs, element },
                    }),
                });
            }
        }
        Ok(out)
    }

    /// Moves a tagged orbit sample to the orbit at this `r`, keeping base point and fiber coordinate.
    pub fn tilde_psi_r(&self, p: &OrbitSample) -> Result<OrbitSample> {
        let tag = p.tag()?;
        let point = match &tag.fiber {
            FiberTag::Zero => tag.k.act(&p.h),
            FiberTag::NilPositive { element, .. } => self.point_from_parts(&p.h, &tag.k, element),
            FiberTag::Symmetric { .. } => {
                return Err(Error::Representation(
                    "sample is tagged with a semidirect fiber, not an n_H^+ coordinate".into(),
                ))
            }
        };
        Ok(OrbitSample {
            point,
            h: p.h.clone(),
            kind: self.orbit_kind(),
            tag: p.tag.clone(),
        })
    }

    /// Max of `||tilde_psi_r(p) - tilde_psi_inf(p)||` over the samples.
    pub fn deviation_on(&self, samples: &[OrbitSample]) -> Result<f64> {
        if self.r.as_finite().is_none() {
            return Ok(0.0);
        }
        let inf = DeformationContext::new(self.cd, RParam::Infinite)?;
        samples.iter().try_fold(0.0_f64, |acc, p| {
            let d = (self.tilde_psi_r(p)?.point - inf.tilde_psi_r(p)?.point).norm();
            Ok(acc.max(d))
        })
    }

    /// Deviation from the limit orbit on the tagged grid `limit_grid(h, seed, n)`.
    pub fn limit_deviation(&self, h: &Vector, seed: u64, n: usize) -> Result<f64> {
        self.deviation_on(&limit_grid(self.cd, h, seed, n)?)
    }
}

/// Tagged adjoint-orbit samples (one fiber point per base point) used for limit comparisons.
pub fn limit_grid(cd: &CartanData, h: &Vector, seed: u64, n: usize) -> Result<Vec<OrbitSample>> {
    DeformationContext::new(cd, RParam::Finite(1.0))?.sample_deformed_orbit(h, seed, n, 1)
}

/// Tangent directions of the deformed orbit at a tagged sample: `[A, p]`-type base
/// moves from `k` and fiber moves from `n_H^+`, as exact derivatives of the parameterization.
pub fn parameter_tangents(ctx: &DeformationContext<'_>, p: &OrbitSample) -> Result<Mat> {
    let tag = p.tag()?;
    let cd = ctx.cd;
    let x = match &tag.fiber {
        FiberTag::NilPositive { element, .. } => element.clone(),
        FiberTag::Zero => Vector::zeros(cd.dim()),
        FiberTag::Symmetric { .. } => {
            return Err(Error::Representation("expected an n_H^+ fiber tag".into()))
        }
    };
    let base = tag.k.act(&(&p.h + ctx.psi_r_map(&x)));
    let mut cols: Vec<Vector> = cd
        .k_basis
        .column_iter()
        .map(|a| cd.ad(&a.into_owned()) * &base)
        .collect();
    let n_plus = cd.h_subspaces(&p.h)?.n_plus;
    for d in n_plus.column_iter() {
        cols.push(ctx.psi_r_map(&tag.k.act(&d.into_owned())));
    }
    let m = crate::numerics::from_columns(&cols, cd.dim());
    Ok(range_basis(&m, cd.tol.abs_eps, cd.tol.rel_eps))
}
