//! Concrete matrix Lie algebras and their Cartan data.
//!
//! Elements are coefficient vectors on a fixed real basis. Complex algebras
//! are stored as real vector spaces of twice the complex dimension: the basis
//! is the real `sl(n,R)` basis followed by `i` times it, and the operator `J`
//! (multiplication by `i`) is kept alongside.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    hcat, lstsq, nullspace_matrix, orthonormalize_in, seeded_rng, simultaneous_eigenspaces,
    Mat, Tolerance, Vector,
};
use crate::orbit::{KElement, OrbitKind, OrbitSample, OrbitTag, FiberTag};

pub type CMat = DMatrix<Complex64>;

const MAX_RANK: usize = 8;

/// Number of exponential factors used for a random element of `K`.
pub const K_FACTORS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    SlReal(usize),
    SlComplex(usize),
    So(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Real,
    Complex,
}

impl Family {
    pub fn matrix_size(&self) -> usize {
        match *self {
            Family::SlReal(n) | Family::SlComplex(n) | Family::So(n) => n,
        }
    }

    pub fn field(&self) -> FieldTag {
        match self {
            Family::SlComplex(_) => FieldTag::Complex,
            _ => FieldTag::Real,
        }
    }

    pub fn is_complex(&self) -> bool {
        self.field() == FieldTag::Complex
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::SlReal(n) => write!(f, "sl{n}r"),
            Family::SlComplex(n) => write!(f, "sl{n}c"),
            Family::So(n) => write!(f, "so{n}"),
        }
    }
}

/// Parses descriptors such as `sl2r`, `sl3c`, `so3`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("unknown algebra descriptor '{s}'"));
        if let Some(rest) = s.strip_prefix("sl") {
            let (num, field) = rest.split_at(rest.len().saturating_sub(1));
            let n: usize = num.parse().map_err(|_| bad())?;
            match field {
                "r" => Ok(Family::SlReal(n)),
                "c" => Ok(Family::SlComplex(n)),
                _ => Err(bad()),
            }
        } else if let Some(num) = s.strip_prefix("so") {
            Ok(Family::So(num.parse().map_err(|_| bad())?))
        } else {
            Err(bad())
        }
    }
}

fn elementary(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

fn frobenius(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

fn sl_real_basis(n: usize) -> Vec<CMat> {
    let mut basis = Vec::new();
    for k in 0..n - 1 {
        basis.push(elementary(n, k, k) - elementary(n, k + 1, k + 1));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    for &(i, j) in &pairs {
        basis.push(elementary(n, i, j) + elementary(n, j, i));
    }
    for &(i, j) in &pairs {
        basis.push(elementary(n, i, j) - elementary(n, j, i));
    }
    basis
}

fn so_basis(n: usize) -> Vec<CMat> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| elementary(n, i, j) - elementary(n, j, i))
        .collect()
}

/// A semisimple matrix Lie algebra over the reals with its structure tensor and Killing form.
#[derive(Debug, Clone)]
pub struct LieAlgebraData {
    pub family: Family,
    pub dim: usize,
    pub basis: Vec<CMat>,
    /// `ad(e_i)` for each basis element: `ad_basis[i][(k, j)] = c[i][j][k]`.
    ad_basis: Vec<Mat>,
    /// `killing[(i, j)] = tr(ad e_i ad e_j)`, the Killing form of the underlying real algebra.
    pub killing: Mat,
    /// Multiplication by `i` on coordinates, for complex families.
    pub complex_structure: Option<Mat>,
    frobenius_gram_inv: Mat,
}

/// Builds the algebra for `family`.
pub fn build_algebra(family: Family) -> Result<LieAlgebraData> {
    let n = family.matrix_size();
    let basis = match family {
        Family::SlReal(n) | Family::SlComplex(n) if (2..=MAX_RANK).contains(&n) => {
            let real = sl_real_basis(n);
            if family.is_complex() {
                let i = Complex64::new(0.0, 1.0);
                let imag: Vec<CMat> = real.iter().map(|b| b * i).collect();
                real.into_iter().chain(imag).collect()
            } else {
                real
            }
        }
        Family::So(n) if (3..=MAX_RANK).contains(&n) => so_basis(n),
        _ => {
            return Err(Error::Config(format!(
                "unsupported algebra {family} (matrix size {n})"
            )))
        }
    };
    let dim = basis.len();
    let gram = Mat::from_fn(dim, dim, |i, j| frobenius(&basis[i], &basis[j]));
    let frobenius_gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Structure("basis is linearly dependent".into()))?;

    let coords = |m: &CMat| -> Vector {
        let b = Vector::from_fn(dim, |i, _| frobenius(&basis[i], m));
        &frobenius_gram_inv * b
    };
    let ad_basis: Vec<Mat> = (0..dim)
        .map(|i| {
            let mut ad = Mat::zeros(dim, dim);
            for j in 0..dim {
                ad.set_column(j, &coords(&commutator(&basis[i], &basis[j])));
            }
            ad
        })
        .collect();
    let killing = Mat::from_fn(dim, dim, |i, j| (&ad_basis[i] * &ad_basis[j]).trace());
    let complex_structure = family.is_complex().then(|| {
        let half = dim / 2;
        let mut j = Mat::zeros(dim, dim);
        for k in 0..half {
            j[(k + half, k)] = 1.0;
            j[(k, k + half)] = -1.0;
        }
        j
    });
    Ok(LieAlgebraData {
        family,
        dim,
        basis,
        ad_basis,
        killing,
        complex_structure,
        frobenius_gram_inv,
    })
}

impl LieAlgebraData {
    fn check_len(&self, x: &Vector, what: &str) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "{what} has length {}, algebra dimension is {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Coefficient vector of a matrix in the span of the basis.
    pub fn coords(&self, m: &CMat) -> Vector {
        let b = Vector::from_fn(self.dim, |i, _| frobenius(&self.basis[i], m));
        &self.frobenius_gram_inv * b
    }

    pub fn to_matrix(&self, x: &Vector) -> CMat {
        let n = self.family.matrix_size();
        self.basis
            .iter()
            .zip(x.iter())
            .fold(CMat::zeros(n, n), |acc, (b, &c)| acc + b * Complex64::new(c, 0.0))
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.ad_basis[i][(k, j)]
    }

    /// Matrix of `ad(x)` on coordinates. Panics on a length mismatch.
    pub fn ad(&self, x: &Vector) -> Mat {
        assert_eq!(x.len(), self.dim, "ad: coefficient length mismatch");
        self.ad_basis
            .iter()
            .zip(x.iter())
            .fold(Mat::zeros(self.dim, self.dim), |acc, (a, &c)| acc + a * c)
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_len(x, "X")?;
        self.check_len(y, "Y")?;
        Ok(self.ad(x) * y)
    }

    pub fn killing_form(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.killing * y)[(0, 0)]
    }

    /// `[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]`.
    pub fn jacobi_residual(&self, x: &Vector, y: &Vector, z: &Vector) -> f64 {
        let b = |u: &Vector, v: &Vector| self.ad(u) * v;
        (b(x, &b(y, z)) + b(y, &b(z, x)) + b(z, &b(x, y))).norm()
    }

    pub fn j(&self) -> Result<&Mat> {
        self.complex_structure
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("{} is not a complex algebra", self.family)))
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut v = Vector::zeros(self.dim);
        v[i] = 1.0;
        v
    }
}

/// One restricted root with its root space.
#[derive(Debug, Clone)]
pub struct RootDatum {
    /// Values `alpha(H_i)` on the columns of `a_basis`.
    pub functional: Vector,
    /// The same functional written as `sum c_m d_m` on diagonal matrices `diag(d)`, with `sum c = 0`.
    pub diagonal_coeffs: Vector,
    /// `B_theta`-orthonormal basis of the root space, as columns.
    pub space_basis: Mat,
    /// Index of `-alpha` in the root list.
    pub theta_image_index: usize,
}

impl RootDatum {
    pub fn eval(&self, a_coeffs: &Vector) -> f64 {
        self.functional.dot(a_coeffs)
    }
}

/// Cartan involution, Cartan decomposition and restricted-root data.
#[derive(Debug, Clone)]
pub struct CartanData {
    pub algebra: LieAlgebraData,
    pub theta: Mat,
    /// Orthonormal coordinate bases (columns) of the `+1` and `-1` eigenspaces of theta.
    pub k_basis: Mat,
    pub s_basis: Mat,
    pub k_proj: Mat,
    pub s_proj: Mat,
    /// `B_theta(X, Y) = -<X, theta Y>`.
    pub b_theta: Mat,
    pub a_basis: Mat,
    pub roots: Vec<RootDatum>,
    pub positive: Vec<usize>,
    pub simple: Vec<usize>,
    /// Joint kernel of `ad(a)`.
    pub zero_space: Mat,
    pub tol: Tolerance,
}

fn diag_real(m: &CMat) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, i)].re).collect()
}

fn is_real_diagonal(m: &CMat) -> bool {
    m.iter()
        .enumerate()
        .all(|(idx, z)| z.im == 0.0 && (z.re == 0.0 || idx % (m.nrows() + 1) == 0))
}

fn lex_positive(c: &Vector, tol: Tolerance) -> bool {
    c.iter()
        .find(|x| x.abs() > tol.abs_eps)
        .map(|&x| x > 0.0)
        .unwrap_or(false)
}

/// Cartan involution `X -> -X^*`, its eigenspaces, and the restricted roots of the
/// diagonal subalgebra ordered lexicographically on diagonal coordinates.
pub fn cartan_structure(alg: &LieAlgebraData) -> Result<CartanData> {
    let tol = Tolerance::default();
    let dim = alg.dim;
    let mut theta = Mat::zeros(dim, dim);
    for (j, b) in alg.basis.iter().enumerate() {
        let image = -b.adjoint();
        theta.set_column(j, &alg.coords(&image));
    }
    if (&theta * &theta - Mat::identity(dim, dim)).norm() > 1e-12 {
        return Err(Error::Structure("theta is not an involution".into()));
    }
    let k_basis = nullspace_matrix(&(&theta - Mat::identity(dim, dim)), tol);
    let s_basis = nullspace_matrix(&(&theta + Mat::identity(dim, dim)), tol);
    if k_basis.ncols() + s_basis.ncols() != dim {
        return Err(Error::Structure("theta eigenspaces do not span".into()));
    }
    let k_proj = (Mat::identity(dim, dim) + &theta) * 0.5;
    let s_proj = (Mat::identity(dim, dim) - &theta) * 0.5;
    let b_theta = -(&alg.killing * &theta);
    let b_theta = (&b_theta + b_theta.transpose()) * 0.5;
    if b_theta.clone().cholesky().is_none() {
        return Err(Error::Structure("B_theta is not positive definite".into()));
    }

    let a_idx: Vec<usize> = (0..dim)
        .filter(|&i| is_real_diagonal(&alg.basis[i]) && alg.basis[i].iter().any(|z| z.re != 0.0))
        .collect();
    let a_basis = crate::numerics::select_columns(&Mat::identity(dim, dim), &a_idx);
    let mut cd = CartanData {
        algebra: alg.clone(),
        theta,
        k_basis,
        s_basis,
        k_proj,
        s_proj,
        b_theta,
        a_basis,
        roots: Vec::new(),
        positive: Vec::new(),
        simple: Vec::new(),
        zero_space: Mat::identity(dim, dim),
        tol,
    };
    if a_idx.is_empty() {
        return Ok(cd);
    }

    let n = alg.family.matrix_size();
    let ops: Vec<Mat> = a_idx.iter().map(|&i| alg.ad(&alg.basis_vector(i))).collect();
    let spaces = simultaneous_eigenspaces(&ops, tol)?;
    // functional on diag(d) from its values on the a-basis, normalized to sum zero
    let mut diag_system = Mat::zeros(a_idx.len() + 1, n);
    for (row, &i) in a_idx.iter().enumerate() {
        for (m, d) in diag_real(&alg.basis[i]).into_iter().enumerate() {
            diag_system[(row, m)] = d;
        }
    }
    for m in 0..n {
        diag_system[(a_idx.len(), m)] = 1.0;
    }

    let mut roots = Vec::new();
    let mut total = 0;
    for sp in spaces {
        total += sp.dim();
        let functional = Vector::from_vec(sp.eigenvalues.clone());
        if functional.iter().all(|x| x.abs() <= tol.abs_eps) {
            cd.zero_space = sp.basis;
            continue;
        }
        let rhs = Vector::from_fn(a_idx.len() + 1, |i, _| {
            if i < a_idx.len() {
                functional[i]
            } else {
                0.0
            }
        });
        let diagonal_coeffs = lstsq(&diag_system, &rhs);
        let space_basis = orthonormalize_in(&sp.basis, &cd.b_theta)?;
        roots.push(RootDatum {
            functional,
            diagonal_coeffs,
            space_basis,
            theta_image_index: usize::MAX,
        });
    }
    if total != dim {
        return Err(Error::Structure(format!(
            "root decomposition spans {total} of {dim} dimensions"
        )));
    }
    roots.sort_by(|a, b| {
        b.diagonal_coeffs
            .iter()
            .zip(a.diagonal_coeffs.iter())
            .map(|(x, y)| {
                if tol.close(*x, *y) {
                    std::cmp::Ordering::Equal
                } else {
                    x.total_cmp(y)
                }
            })
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for i in 0..roots.len() {
        let neg = -&roots[i].functional;
        let j = roots
            .iter()
            .position(|r| (&r.functional - &neg).amax() <= tol.threshold(neg.amax()))
            .ok_or_else(|| Error::Structure("root system not closed under negation".into()))?;
        roots[i].theta_image_index = j;
    }
    let positive: Vec<usize> = (0..roots.len())
        .filter(|&i| lex_positive(&roots[i].diagonal_coeffs, tol))
        .collect();
    let simple: Vec<usize> = positive
        .iter()
        .copied()
        .filter(|&i| {
            !positive.iter().any(|&p| {
                positive.iter().any(|&q| {
                    let sum = &roots[p].functional + &roots[q].functional;
                    (&sum - &roots[i].functional).amax() <= tol.threshold(sum.amax())
                })
            })
        })
        .collect();
    cd.roots = roots;
    cd.positive = positive;
    cd.simple = simple;
    Ok(cd)
}

/// Root-space decomposition attached to `H`.
#[derive(Debug, Clone)]
pub struct HSubspaces {
    /// Sum of root spaces with `alpha(H) > 0`, `B_theta`-orthonormal columns.
    pub n_plus: Mat,
    pub n_minus: Mat,
    /// Centralizer of `H`, orthonormal columns.
    pub z_h: Mat,
}

/// Named elements of the closed Weyl chamber.
#[derive(Debug, Clone, PartialEq)]
pub enum HPreset {
    /// Every simple root takes the value 2.
    Regular,
    /// Simple root `k` (1-based) vanishes, the others take the value 2.
    Wall(usize),
    /// Explicit coefficients on the basis of `a`.
    Coeffs(Vec<f64>),
}

impl FromStr for HPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "regular" {
            return Ok(HPreset::Regular);
        }
        if let Some(k) = t.strip_prefix("wall:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Config(format!("invalid wall index in '{s}'")))?;
            return Ok(HPreset::Wall(k));
        }
        let coeffs: std::result::Result<Vec<f64>, _> =
            t.split(',').map(|x| x.trim().parse::<f64>()).collect();
        coeffs
            .map(HPreset::Coeffs)
            .map_err(|_| Error::Config(format!("invalid H specification '{s}'")))
    }
}

impl CartanData {
    pub fn alg(&self) -> &LieAlgebraData {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim
    }

    pub fn b_theta_form(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.b_theta * y)[(0, 0)]
    }

    pub fn k_part(&self, x: &Vector) -> Vector {
        &self.k_proj * x
    }

    pub fn s_part(&self, x: &Vector) -> Vector {
        &self.s_proj * x
    }

    pub fn ad(&self, x: &Vector) -> Mat {
        self.algebra.ad(x)
    }

    /// Coefficients of `h` on `a_basis`, or a domain error if `h` is not in `a`.
    pub fn a_coeffs(&self, h: &Vector) -> Result<Vector> {
        if h.len() != self.dim() {
            return Err(Error::Dimension("H has the wrong length".into()));
        }
        let c = self.a_basis.transpose() * h;
        if (&self.a_basis * &c - h).norm() > self.tol.threshold(h.norm()) {
            return Err(Error::Domain("H is not in the maximal abelian subalgebra".into()));
        }
        Ok(c)
    }

    /// Domain check for `H` in the closed positive chamber; returns its `a`-coefficients.
    pub fn chamber_coeffs(&self, h: &Vector) -> Result<Vector> {
        let c = self.a_coeffs(h)?;
        for &i in &self.simple {
            let v = self.roots[i].eval(&c);
            if v < -self.tol.threshold(h.norm()) {
                return Err(Error::Domain(format!(
                    "H is outside the closed positive chamber (simple root value {v:.3e})"
                )));
            }
        }
        Ok(c)
    }

    pub fn h_from_a_coeffs(&self, c: &[f64]) -> Result<Vector> {
        if c.len() != self.a_basis.ncols() {
            return Err(Error::Config(format!(
                "expected {} coefficients on a, got {}",
                self.a_basis.ncols(),
                c.len()
            )));
        }
        Ok(&self.a_basis * Vector::from_column_slice(c))
    }

    /// Element of `a` with the given values on the simple roots.
    fn h_with_simple_values(&self, values: &[f64]) -> Result<Vector> {
        let l = self.a_basis.ncols();
        if l == 0 {
            return Ok(Vector::zeros(self.dim()));
        }
        if self.simple.len() != l {
            return Err(Error::Structure("simple roots do not form a basis of a*".into()));
        }
        let m = Mat::from_fn(l, l, |i, j| self.roots[self.simple[i]].functional[j]);
        let c = m
            .lu()
            .solve(&Vector::from_column_slice(values))
            .ok_or_else(|| Error::Structure("simple roots are dependent".into()))?;
        Ok(&self.a_basis * c)
    }

    pub fn h_preset(&self, preset: &HPreset) -> Result<Vector> {
        let l = self.a_basis.ncols();
        let h = match preset {
            HPreset::Regular => self.h_with_simple_values(&vec![2.0; l])?,
            HPreset::Wall(k) => {
                if *k == 0 || *k > l {
                    return Err(Error::Config(format!("wall index {k} out of range 1..={l}")));
                }
                let mut v = vec![2.0; l];
                v[k - 1] = 0.0;
                self.h_with_simple_values(&v)?
            }
            HPreset::Coeffs(c) => self.h_from_a_coeffs(c)?,
        };
        self.chamber_coeffs(&h)?;
        Ok(h)
    }

    pub fn regular_h(&self) -> Result<Vector> {
        self.h_preset(&HPreset::Regular)
    }

    /// `n_H^+`, `n_H^-` and the centralizer `z_H`.
    pub fn h_subspaces(&self, h: &Vector) -> Result<HSubspaces> {
        let c = self.chamber_coeffs(h)?;
        let dim = self.dim();
        let cut = self.tol.threshold(h.norm());
        let mut n_plus = Mat::zeros(dim, 0);
        let mut n_minus = Mat::zeros(dim, 0);
        for root in &self.roots {
            let v = root.eval(&c);
            if v > cut {
                n_plus = hcat(&n_plus, &root.space_basis);
            } else if v < -cut {
                n_minus = hcat(&n_minus, &root.space_basis);
            }
        }
        let z_h = nullspace_matrix(&self.ad(h), self.tol);
        if n_plus.ncols() + n_minus.ncols() + z_h.ncols() != dim {
            return Err(Error::Structure("H-decomposition does not span the algebra".into()));
        }
        Ok(HSubspaces {
            n_plus,
            n_minus,
            z_h,
        })
    }

    /// Random element of `K` (product of exponentials).
    pub fn random_k(&self, rng: &mut crate::numerics::Rng) -> Result<KElement> {
        KElement::random(rng, &self.k_basis, K_FACTORS, |x| self.ad(x))
    }

    /// `count` points of the flag `Ad(K) H`.
    pub fn flag_orbit_sample(&self, h: &Vector, seed: u64, count: usize) -> Result<Vec<OrbitSample>> {
        self.chamber_coeffs(h)?;
        let mut rng = seeded_rng(seed);
        (0..count)
            .map(|i| {
                let k = self.random_k(&mut rng)?;
                Ok(OrbitSample {
                    point: k.act(h),
                    h: h.clone(),
                    kind: OrbitKind::Flag,
                    tag: Some(OrbitTag {
                        base_index: i,
                        fiber_index: 0,
                        k,
                        fiber: FiberTag::Zero,
                    }),
                })
            })
            .collect()
    }
}

pub fn h_subspaces(cd: &CartanData, h: &Vector) -> Result<HSubspaces> {
    cd.h_subspaces(h)
}

pub fn flag_orbit_sample(
    cd: &CartanData,
    h: &Vector,
    seed: u64,
    count: usize,
) -> Result<Vec<OrbitSample>> {
    cd.flag_orbit_sample(h, seed, count)
}
