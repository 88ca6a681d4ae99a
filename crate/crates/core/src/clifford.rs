//! Gamma-matrix algebra over the Minkowski metric `η = diag(+1, −1, −1, −1)`.
//!
//! The representation is the standard Dirac basis: `γ⁰ = diag(1, 1, −1, −1)` and
//! `γᵏ = [[0, σᵏ], [−σᵏ, 0]]` built from Pauli blocks. Every entry is `0`, `±1`
//! or `±i`, so the Clifford identities hold exactly in floating point.
//!
//! A contravariant vector `v` is mapped to the "slashed" operator `γ_a vᵃ`
//! (index lowered with `η`); a covector `c` (for example a gradient) is mapped
//! to `γᵃ c_a`. Both square to the Minkowski norm times the identity.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;
/// 4×4 complex matrix acting on bispinors.
pub type Mat4 = Matrix4<C64>;
pub type Spinor = Vector4<C64>;

/// Tolerance on `|v·v|` below which a vector is treated as null.
pub const TOL_NULL: f64 = 1e-10;

/// Diagonal of the rigid Minkowski metric.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliffordError {
    #[error("vector is null (|v·v| = {norm2:e} ≤ {tol:e}); spectral pairing degenerates")]
    NullVector { norm2: f64, tol: f64 },
    #[error("slashed operators do not commute (‖[v̸, w̸]‖_F = {norm:e})")]
    NotCommuting { norm: f64 },
}

/// The signature `(+, −, −, −)` as an integer diagonal matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinkowskiSignature {
    pub diag: [i8; 4],
}

impl Default for MinkowskiSignature {
    fn default() -> Self {
        Self { diag: [1, -1, -1, -1] }
    }
}

impl MinkowskiSignature {
    pub fn trace(&self) -> i32 {
        self.diag.iter().map(|&d| d as i32).sum()
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::from_iterator(self.diag.iter().map(|&d| d as f64)))
    }
}

/// Causal character of a four-vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Causal {
    Timelike,
    Null,
    Spacelike,
}

impl Causal {
    pub fn of_norm2(norm2: f64, tol: f64) -> Self {
        if norm2.abs() <= tol {
            Causal::Null
        } else if norm2 > 0.0 {
            Causal::Timelike
        } else {
            Causal::Spacelike
        }
    }
}

/// Four real components indexed `a = 0..3` in natural units.
///
/// Whether the components are contravariant or covariant is decided by the
/// caller; [`FourVector::lower`] and [`FourVector::raise`] convert between them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Self([a0, a1, a2, a3])
    }

    /// Minkowski inner product `η_ab uᵃ wᵇ`.
    pub fn dot(&self, other: &FourVector) -> f64 {
        (0..4).map(|a| ETA[a] * self.0[a] * other.0[a]).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    pub fn causal(&self) -> Causal {
        Causal::of_norm2(self.norm2(), TOL_NULL)
    }

    pub fn lower(&self) -> FourVector {
        FourVector(std::array::from_fn(|a| ETA[a] * self.0[a]))
    }

    pub fn raise(&self) -> FourVector {
        // η is its own inverse
        self.lower()
    }

    /// Plain Euclidean length of the component array.
    pub fn euclid_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl From<[f64; 4]> for FourVector {
    fn from(v: [f64; 4]) -> Self {
        FourVector(v)
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|a| self.0[a] + rhs.0[a]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|a| self.0[a] - rhs.0[a]))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, k: f64) -> FourVector {
        FourVector(self.0.map(|c| c * k))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        self * -1.0
    }
}

impl fmt::Display for FourVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// Four complex components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bispinor(pub Spinor);

impl Bispinor {
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Bispinor {
        Bispinor(self.0 / C64::new(self.norm(), 0.0))
    }
}

/// `γ_a vᵃ` together with the vector it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SlashedOperator {
    pub matrix: Mat4,
    pub source: FourVector,
}

/// One eigenvalue of a slashed operator with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBlock {
    pub eigenvalue: C64,
    pub vectors: Vec<Bispinor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Two blocks, ordered by descending real part (then descending imaginary part).
    pub blocks: Vec<EigenBlock>,
    /// Set when `v·v < 0`: the eigenvalues are `±i√|v·v|`.
    pub spacelike: bool,
}

impl EigenSystem {
    /// Flattened `(eigenvalue, eigenvector)` pairs in block order.
    pub fn pairs(&self) -> Vec<(C64, Bispinor)> {
        self.blocks
            .iter()
            .flat_map(|b| b.vectors.iter().map(move |v| (b.eigenvalue, *v)))
            .collect()
    }
}

/// Symmetric/antisymmetric split of a product of two slashed vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDecomposition {
    pub dot: f64,
    pub wedge: Mat4,
}

/// Gamma matrices `γ⁰..γ³` and the derived `α⁰ = γ⁰`, `αᵏ = γ⁰γᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRep {
    pub gamma: [Mat4; 4],
    pub alpha: [Mat4; 4],
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds the Dirac representation.
pub fn build_gamma_rep() -> GammaRep {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let pauli: [[[C64; 2]; 2]; 3] = [
        [[z, one], [one, z]],
        [[z, -i], [i, z]],
        [[one, z], [z, -one]],
    ];

    let g0 = Mat4::from_diagonal(&Spinor::new(one, one, -one, -one));
    let mut gamma = [g0, Mat4::zeros(), Mat4::zeros(), Mat4::zeros()];
    for (k, sigma) in pauli.iter().enumerate() {
        let m = &mut gamma[k + 1];
        for r in 0..2 {
            for col in 0..2 {
                m[(r, col + 2)] = sigma[r][col];
                m[(r + 2, col)] = -sigma[r][col];
            }
        }
    }
    let alpha = [g0, g0 * gamma[1], g0 * gamma[2], g0 * gamma[3]];
    GammaRep { gamma, alpha }
}

impl Default for GammaRep {
    fn default() -> Self {
        build_gamma_rep()
    }
}

impl GammaRep {
    /// `γ_a vᵃ` for a contravariant vector.
    pub fn slash(&self, v: &FourVector) -> SlashedOperator {
        SlashedOperator {
            matrix: self.contract(&v.lower()),
            source: *v,
        }
    }

    /// `γᵃ c_a` for a covector, e.g. a gradient `∂_a W`.
    pub fn slash_covector(&self, cov: &FourVector) -> Mat4 {
        self.contract(cov)
    }

    fn contract(&self, comps: &FourVector) -> Mat4 {
        let mut m = Mat4::zeros();
        for a in 0..4 {
            m += self.gamma[a] * c(comps.0[a], 0.0);
        }
        m
    }

    /// Eigenvalues `±√(v·v)` with orthonormal eigenbases.
    ///
    /// Spacelike vectors yield the imaginary pair `±i√|v·v|` and set
    /// [`EigenSystem::spacelike`]. Null vectors are rejected.
    pub fn slash_eigensystem(&self, v: &FourVector) -> Result<EigenSystem, CliffordError> {
        let norm2 = v.norm2();
        if norm2.abs() <= TOL_NULL {
            return Err(CliffordError::NullVector { norm2, tol: TOL_NULL });
        }
        let spacelike = norm2 < 0.0;
        let root = if spacelike {
            c(0.0, (-norm2).sqrt())
        } else {
            c(norm2.sqrt(), 0.0)
        };
        let s = self.slash(v).matrix;
        let blocks = [root, -root]
            .into_iter()
            .map(|mu| EigenBlock {
                eigenvalue: mu,
                vectors: eigenspace_basis(&spectral_projector(&s, mu)),
            })
            .collect();
        Ok(EigenSystem { blocks, spacelike })
    }

    /// `u̸ w̸ = (u·w) I + ½[u̸, w̸]`.
    pub fn product_decomposition(&self, u: &FourVector, w: &FourVector) -> ProductDecomposition {
        let su = self.slash(u).matrix;
        let sw = self.slash(w).matrix;
        ProductDecomposition {
            dot: u.dot(w),
            wedge: commutator(&su, &sw) * c(0.5, 0.0),
        }
    }
}

impl ProductDecomposition {
    /// Max-abs entry of `u̸ w̸ − (dot·I + wedge)`.
    pub fn reconstruction_residual(&self, rep: &GammaRep, u: &FourVector, w: &FourVector) -> f64 {
        let prod = rep.slash(u).matrix * rep.slash(w).matrix;
        max_abs(&(prod - (Mat4::identity() * c(self.dot, 0.0) + self.wedge)))
    }
}

/// `(I + S/μ)/2`, the projector onto the `μ` eigenspace of an `S` with `S² = μ² I`.
pub fn spectral_projector(s: &Mat4, mu: C64) -> Mat4 {
    (Mat4::identity() + s / mu) * c(0.5, 0.0)
}

/// Orthonormal basis of the column space of a projector, phases fixed so the
/// first nonzero component of each vector is real and positive.
fn eigenspace_basis(projector: &Mat4) -> Vec<Bispinor> {
    let mut basis: Vec<Spinor> = Vec::new();
    for j in 0..4 {
        let mut v: Spinor = projector.column(j).into_owned();
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / c(n, 0.0));
        }
        if basis.len() == 2 {
            break;
        }
    }
    basis.into_iter().map(|v| Bispinor(fix_phase(v))).collect()
}

pub(crate) fn fix_phase(v: Spinor) -> Spinor {
    match v.iter().find(|z| z.norm() > 1e-12) {
        Some(first) => v * (first.conj() / first.norm()),
        None => v,
    }
}

pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b - b * a
}

pub fn anticommutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b + b * a
}

pub fn frobenius(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖[v̸, w̸]‖_F` for two contravariant vectors.
pub fn slash_commutator_norm(rep: &GammaRep, v: &FourVector, w: &FourVector) -> f64 {
    frobenius(&commutator(&rep.slash(v).matrix, &rep.slash(w).matrix))
}
