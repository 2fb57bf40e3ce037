//! Orbit points together with the construction data that produced them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{matrix_exp, normal_vector, Mat, Rng, Vector};

/// Deformation parameter in `(0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RParam {
    Finite(f64),
    Infinite,
}

impl RParam {
    pub fn finite(r: f64) -> Result<Self> {
        if r.is_finite() && r > 0.0 {
            Ok(RParam::Finite(r))
        } else if r == f64::INFINITY {
            Ok(RParam::Infinite)
        } else {
            Err(Error::Domain(format!("deformation parameter must be > 0, got {r}")))
        }
    }

    pub fn as_finite(&self) -> Option<f64> {
        match *self {
            RParam::Finite(r) => Some(r),
            RParam::Infinite => None,
        }
    }

    /// Coefficient of `theta` in `Z -> Z + c theta Z`.
    pub fn psi_coefficient(&self) -> f64 {
        match *self {
            RParam::Finite(r) => (r - 1.0) / (r + 1.0),
            RParam::Infinite => 1.0,
        }
    }

    /// Sort key with infinity last.
    pub fn sort_key(&self) -> f64 {
        self.as_finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for RParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RParam::Finite(r) => write!(f, "{r}"),
            RParam::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for RParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "+inf" | "∞") {
            return Ok(RParam::Infinite);
        }
        let r: f64 = t
            .parse()
            .map_err(|_| Error::Config(format!("invalid r value '{s}'")))?;
        RParam::finite(r).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OrbitKind {
    /// `Ad(K) H`, the flag manifold.
    Flag,
    /// `Ad(G) H`.
    Adjoint,
    /// `Ad_r(G) H` for the deformed bracket; `Infinite` is the limit orbit.
    Deformed(RParam),
    /// Orbit of the semidirect product `K x_Ad s`.
    Semidirect,
}

impl fmt::Display for OrbitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitKind::Flag => write!(f, "flag"),
            OrbitKind::Adjoint => write!(f, "adjoint"),
            OrbitKind::Deformed(r) => write!(f, "deformed({r})"),
            OrbitKind::Semidirect => write!(f, "semidirect"),
        }
    }
}

/// Element of `K` given as a product of exponentials, with its adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KElement {
    /// Generators `A_1, ..., A_m` in ambient coordinates; `k = e^{A_1} ... e^{A_m}`.
    pub generators: Vec<Vector>,
    /// `Ad(k)` on ambient coordinates.
    pub adjoint: Mat,
}

impl KElement {
    pub fn identity(dim: usize) -> Self {
        Self {
            generators: Vec::new(),
            adjoint: Mat::identity(dim, dim),
        }
    }

    /// Builds `Ad(e^{A_1} ... e^{A_m}) = exp(ad A_1) ... exp(ad A_m)`.
    pub fn from_generators(generators: Vec<Vector>, ad: impl Fn(&Vector) -> Mat) -> Result<Self> {
        let dim = generators.first().map(|g| g.len()).unwrap_or(0);
        let mut adjoint = Mat::identity(dim, dim);
        for g in &generators {
            adjoint *= matrix_exp(&ad(g))?;
        }
        Ok(Self {
            generators,
            adjoint,
        })
    }

    /// Random product of `factors` exponentials with standard normal coefficients on `k_basis`.
    pub fn random(
        rng: &mut Rng,
        k_basis: &Mat,
        factors: usize,
        ad: impl Fn(&Vector) -> Mat,
    ) -> Result<Self> {
        if k_basis.ncols() == 0 {
            return Ok(Self::identity(k_basis.nrows()));
        }
        let generators = (0..factors)
            .map(|_| k_basis * normal_vector(rng, k_basis.ncols()))
            .collect();
        Self::from_generators(generators, ad)
    }

    /// Left-multiplies by `e^{A}`.
    pub fn left_mul(&self, a: &Vector, ad: impl Fn(&Vector) -> Mat) -> Result<Self> {
        let mut generators = vec![a.clone()];
        generators.extend(self.generators.iter().cloned());
        Ok(Self {
            generators,
            adjoint: matrix_exp(&ad(a))? * &self.adjoint,
        })
    }

    pub fn act(&self, x: &Vector) -> Vector {
        &self.adjoint * x
    }
}

/// Coordinates of a point along the fiber of its orbit.
#[derive(Debug, Clone, PartialEq)]
pub enum FiberTag {
    /// Point on the zero section.
    Zero,
    /// `X` in `n_H^+`: `coeffs` on the root-space basis, `element` in ambient coordinates.
    NilPositive { coeffs: Vector, element: Vector },
    /// `v` in `s`, fiber point `[Ad(k)H, Ad(k)v]` of the semidirect orbit.
    Symmetric { coeffs: Vector, element: Vector },
}

impl FiberTag {
    pub fn coeffs(&self) -> Option<&Vector> {
        match self {
            FiberTag::Zero => None,
            FiberTag::NilPositive { coeffs, .. } | FiberTag::Symmetric { coeffs, .. } => {
                Some(coeffs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTag {
    pub base_index: usize,
    pub fiber_index: usize,
    pub k: KElement,
    pub fiber: FiberTag,
}

/// A point of an orbit through `h`, optionally tagged with its construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSample {
    pub point: Vector,
    pub h: Vector,
    pub kind: OrbitKind,
    pub tag: Option<OrbitTag>,
}

impl OrbitSample {
    pub fn untagged(point: Vector, h: Vector, kind: OrbitKind) -> Self {
        Self {
            point,
            h,
            kind,
            tag: None,
        }
    }

    pub fn tag(&self) -> Result<&OrbitTag> {
        self.tag
            .as_ref()
            .ok_or_else(|| Error::Representation("orbit sample carries no construction tag".into()))
    }

    /// Base point `Ad(k) H` on the flag.
    pub fn base_point(&self) -> Result<Vector> {
        Ok(self.tag()?.k.act(&self.h))
    }
}
