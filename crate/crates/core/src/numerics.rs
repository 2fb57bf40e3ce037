//! Dense linear-algebra substrate shared by every construction in the crate.
//!
//! Everything works over real coordinate vectors: complex Lie algebras are
//! realified upstream, so a single `f64` path serves both field cases. Rank
//! decisions go through [`Tolerance`], and all randomness comes from a seeded
//! ChaCha stream so equal seeds reproduce bit-identical samples.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type Rng = ChaCha8Rng;

pub const DEFAULT_ABS_EPS: f64 = 1e-9;
pub const DEFAULT_REL_EPS: f64 = 1e-7;

/// Mixed absolute/relative comparison rule `|a-b| <= abs_eps + rel_eps*max(|a|,|b|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_eps: DEFAULT_ABS_EPS,
            rel_eps: DEFAULT_REL_EPS,
        }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self> {
        if !(abs_eps.is_finite() && rel_eps.is_finite()) || abs_eps < 0.0 || rel_eps < 0.0 {
            return Err(Error::Config(format!(
                "tolerances must be finite and nonnegative (abs={abs_eps}, rel={rel_eps})"
            )));
        }
        Ok(Self { abs_eps, rel_eps })
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs_eps + self.rel_eps * a.abs().max(b.abs())
    }

    /// Cutoff for a quantity whose natural magnitude is `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_eps + self.rel_eps * scale.abs()
    }
}

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vector(rng: &mut Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn ensure_finite(a: &Mat, what: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn ensure_square(a: &Mat, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Matrix exponential by Padé scaling-and-squaring.
pub fn matrix_exp(a: &Mat) -> Result<Mat> {
    ensure_square(a, "matrix_exp input")?;
    ensure_finite(a, "matrix_exp input")?;
    let n = a.nrows();
    if n == 0 || a.iter().all(|&x| x == 0.0) {
        return Ok(Mat::identity(n, n));
    }
    let e = a.exp();
    ensure_finite(&e, "matrix_exp output")?;
    Ok(e)
}

/// Full singular value decomposition `a = U diag(s) V^T`, `s` descending.
///
/// Computed with faer; nalgebra's bidiagonal SVD can stall on rank-deficient
/// inputs and return factors that do not reconstruct `a`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

pub fn svd(a: &Mat) -> Svd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd {
            u: Mat::identity(m, m),
            s: Vec::new(),
            v: Mat::identity(n, n),
        };
    }
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = fa.svd().expect("SVD of a finite matrix converges");
    let (u, v, d) = (dec.U(), dec.V(), dec.S());
    let dc = d.column_vector();
    Svd {
        u: Mat::from_fn(m, m, |i, j| u[(i, j)]),
        s: (0..m.min(n)).map(|i| dc[i]).collect(),
        v: Mat::from_fn(n, n, |i, j| v[(i, j)]),
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    svd(a).s
}

pub fn rank(a: &Mat, tol: Tolerance) -> usize {
    let sv = singular_values(a);
    let cutoff = tol.threshold(sv.first().copied().unwrap_or(0.0));
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Rank with a purely relative cutoff `rel * sigma_max`; the zero matrix has rank 0.
pub fn rank_rel(a: &Mat, rel: f64) -> usize {
    let sv = singular_values(a);
    match sv.first() {
        Some(&top) if top > f64::MIN_POSITIVE => sv.iter().filter(|&&s| s > rel * top).count(),
        _ => 0,
    }
}

/// Full right-singular basis with singular values padded by zeros to `ncols`.
fn full_svd_v(a: &Mat) -> (Vec<f64>, Mat) {
    let Svd { mut s, v, .. } = svd(a);
    s.resize(a.ncols(), 0.0);
    (s, v)
}

/// Orthonormal basis (as columns) of `{v : |Av| <= tol}`.
pub fn nullspace_matrix(a: &Mat, tol: Tolerance) -> Mat {
    let n = a.ncols();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return Mat::identity(n, n);
    }
    let (sv, v) = full_svd_v(a);
    let cutoff = tol.threshold(sv[0]);
    let keep: Vec<usize> = (0..n).filter(|&i| sv[i] <= cutoff).collect();
    select_columns(&v, &keep)
}

pub fn nullspace(a: &Mat, tol: Tolerance) -> Vec<Vector> {
    columns(&nullspace_matrix(a, tol))
}

/// Orthonormal basis of the column space, dropping directions with
/// singular value at or below `abs + rel * sigma_max`.
pub fn range_basis(a: &Mat, abs: f64, rel: f64) -> Mat {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return Mat::zeros(m, 0);
    }
    let Svd { u, s, .. } = svd(a);
    let top = s.first().copied().unwrap_or(0.0);
    let cutoff = abs + rel * top;
    let keep: Vec<usize> = (0..s.len())
        .filter(|&i| s[i] > cutoff && s[i] > 0.0)
        .collect();
    select_columns(&u, &keep)
}

pub fn select_columns(a: &Mat, idx: &[usize]) -> Mat {
    let mut out = Mat::zeros(a.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.set_column(j, &a.column(i));
    }
    out
}

pub fn columns(a: &Mat) -> Vec<Vector> {
    (0..a.ncols()).map(|j| a.column(j).into_owned()).collect()
}

pub fn from_columns(cols: &[Vector], nrows: usize) -> Mat {
    let mut out = Mat::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

pub fn hcat(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Re-orthonormalize the columns of `basis` against the inner product `gram`.
pub fn orthonormalize_in(basis: &Mat, gram: &Mat) -> Result<Mat> {
    if basis.ncols() == 0 {
        return Ok(basis.clone());
    }
    let inner = basis.transpose() * gram * basis;
    let inner = (&inner + inner.transpose()) * 0.5;
    let chol = inner
        .cholesky()
        .ok_or_else(|| Error::Structure("inner product not positive on subspace".into()))?;
    let l_inv_t = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Structure("singular Cholesky factor".into()))?;
    Ok(basis * l_inv_t)
}

/// Mutual projection residual between the column spans of `a` and `b` (orthonormalized first).
/// Zero iff the spans coincide; at least 1 when the dimensions differ.
pub fn subspace_distance(a: &Mat, b: &Mat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0 + (a.ncols() as f64 - b.ncols() as f64).abs();
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let (a, b) = (&orthonormal_span(a), &orthonormal_span(b));
    if a.ncols() != b.ncols() {
        return 1.0 + (a.ncols() as f64 - b.ncols() as f64).abs();
    }
    let ra = a - b * (b.transpose() * a);
    let rb = b - a * (a.transpose() * b);
    ra.norm().max(rb.norm())
}

fn orthonormal_span(a: &Mat) -> Mat {
    range_basis(a, 0.0, 1e-12)
}

/// Least-squares solve `a x = b` through the pseudo-inverse.
pub fn lstsq(a: &Mat, b: &Vector) -> Vector {
    if a.ncols() == 0 {
        return Vector::zeros(0);
    }
    let Svd { u, s, v } = svd(a);
    let top = s.first().copied().unwrap_or(0.0);
    let eps = (1e-12 * top).max(f64::MIN_POSITIVE);
    let utb = u.transpose() * b;
    let mut x = Vector::zeros(a.ncols());
    for (i, &si) in s.iter().enumerate() {
        if si > eps {
            x += v.column(i) * (utb[i] / si);
        }
    }
    x
}

/// One joint eigenspace of a commuting family.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    /// Eigenvalue of each operator, in the order the operators were given.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal basis as columns.
    pub basis: Mat,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Joint eigenspace decomposition of pairwise-commuting, real-diagonalizable operators.
///
/// Each operator is restricted to the current pieces and split by its own
/// eigenvalues; eigenvalues within `tol` of each other are merged.
pub fn simultaneous_eigenspaces(ops: &[Mat], tol: Tolerance) -> Result<Vec<Eigenspace>> {
    let first = ops
        .first()
        .ok_or_else(|| Error::Dimension("need at least one operator".into()))?;
    let n = first.nrows();
    for op in ops {
        ensure_square(op, "operator")?;
        ensure_finite(op, "operator")?;
        if op.nrows() != n {
            return Err(Error::Dimension("operators act on different spaces".into()));
        }
    }
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            let comm = a * b - b * a;
            if comm.norm() > tol.threshold(a.norm() * b.norm()) {
                return Err(Error::Structure(format!(
                    "operators do not commute (commutator norm {:.3e})",
                    comm.norm()
                )));
            }
        }
    }

    let mut pieces = vec![Eigenspace {
        eigenvalues: Vec::new(),
        basis: Mat::identity(n, n),
    }];
    for op in ops {
        let mut next = Vec::new();
        for piece in pieces {
            let q = &piece.basis;
            let restricted = q.transpose() * op * q;
            let k = restricted.nrows();
            let scale = restricted.norm();
            let eig = restricted.clone().schur().complex_eigenvalues();
            let mut re = Vec::with_capacity(k);
            for z in eig.iter() {
                if z.im.abs() > tol.threshold(scale).max(1e-12) {
                    return Err(Error::Structure(format!(
                        "operator has non-real eigenvalue {z}"
                    )));
                }
                re.push(z.re);
            }
            re.sort_by(|a, b| a.total_cmp(b));
            let mut clusters: Vec<Vec<f64>> = Vec::new();
            for x in re {
                match clusters.last_mut() {
                    Some(c) if tol.close(*c.last().unwrap(), x) => c.push(x),
                    _ => clusters.push(vec![x]),
                }
            }
            let mut found = 0;
            for c in clusters {
                let lambda = c.iter().sum::<f64>() / c.len() as f64;
                let shifted = &restricted - Mat::identity(k, k) * lambda;
                let ns = nullspace_matrix(&shifted, tol);
                found += ns.ncols();
                let mut vals = piece.eigenvalues.clone();
                vals.push(lambda);
                next.push(Eigenspace {
                    eigenvalues: vals,
                    basis: q * ns,
                });
            }
            if found != k {
                return Err(Error::Structure(format!(
                    "eigenspaces span {found} of {k} dimensions; operator not diagonalizable"
                )));
            }
        }
        pieces = next;
    }
    Ok(pieces)
}
