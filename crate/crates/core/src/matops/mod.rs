//! Hermitian matrix core.
//!
//! Every matrix function in the crate routes through [`eigh`]: a matrix is
//! diagonalized once, a scalar function is applied to its spectrum, and the
//! result is reassembled as `U diag(f(λ)) U†`.
//!
//! Zero-eigenvalue convention for [`matrix_power`]: an eigenvalue at or below
//! the PSD threshold counts as an exact zero, with `0ᵖ = 0` for `p > 0` and
//! `0⁰ = 1`. Negative powers of singular operators are refused.

mod eigen;
pub mod random;

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use random::{random_pd, stream_seed, TrialRng};

/// Dense complex matrix used as the carrier for all operator expressions.
pub type CMatrix = DMatrix<Complex64>;

pub const HERM_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Numerical tolerances shared by the library, the verifier and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity: `‖M − M†‖_max ≤ herm_tol · max(1, ‖M‖_max)`.
    pub herm_tol: f64,
    /// Positivity: `λ_min ≥ −psd_tol · max(1, λ_max)`.
    pub psd_tol: f64,
    /// Relative slack for inequality suites.
    pub slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: HERM_TOL,
            psd_tol: PSD_TOL,
            slack: INEQUALITY_SLACK,
        }
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction symmetrizes the input, so the stored matrix is exactly
/// Hermitian in floating point. Symmetrizing an exactly Hermitian matrix is
/// the identity, which keeps write/parse round trips bit-stable.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tol(m, HERM_TOL)
    }

    pub fn with_tol(m: CMatrix, herm_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::input(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::input("matrix has dimension 0"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        let asym = max_abs(&(&m - m.adjoint()));
        let bound = herm_tol * max_abs(&m).max(1.0);
        if asym > bound {
            return Err(Error::input(format!(
                "matrix is not Hermitian: ‖M − M†‖_max = {asym:.3e} > {bound:.3e}"
            )));
        }
        Ok(Self::hermitize(m))
    }

    /// Symmetrizes a matrix known to be Hermitian up to rounding, e.g. a
    /// product `X Y X` of Hermitian factors.
    pub fn hermitize(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        let adj = m.adjoint();
        Self {
            m: (m + adj).scale(0.5),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        Self { m }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("rows do not form a square matrix"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        }))
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            m: CMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_inner(self) -> CMatrix {
        self.m
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        eigh(self)
            .eigenvalues
            .iter()
            .fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { m: self.m.scale(a) }
    }

    pub fn add_identity(&self, eps: f64) -> Self {
        let mut m = self.m.clone();
        for i in 0..self.dim() {
            m[(i, i)] += Complex64::new(eps, 0.0);
        }
        Self { m }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self {
            m: &self.m - &other.m,
        })
    }

    /// `M · self · M†` for an arbitrary square `M`.
    pub fn congruence(&self, m: &CMatrix) -> Self {
        Self::hermitize(m * &self.m * m.adjoint())
    }

    /// `self · inner · self`.
    pub fn sandwich(&self, inner: &HermitianMatrix) -> Self {
        Self::hermitize(&self.m * &inner.m * &self.m)
    }

    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = &self.m * &other.m;
        let ba = &other.m * &self.m;
        (ab - ba).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            m: &self.m - &rhs.m,
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

fn same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Spectral decomposition `M = U diag(λ) U†`, eigenvalues sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub basis: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(f(λ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.assemble(&values)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.assemble(&self.eigenvalues)
    }

    fn assemble(&self, values: &[f64]) -> HermitianMatrix {
        let n = self.dim();
        let mut scaled = self.basis.clone();
        for (j, &x) in values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= x;
            }
        }
        HermitianMatrix::hermitize(scaled * self.basis.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn eigh(m: &HermitianMatrix) -> EigenSystem {
    let (values, vectors) = eigen::jacobi_eigh(m.as_matrix());
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let basis = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    EigenSystem { eigenvalues, basis }
}

/// A positive semi-definite matrix together with its cached spectrum.
#[derive(Clone, Debug)]
pub struct PsdMatrix {
    herm: HermitianMatrix,
    eig: EigenSystem,
    psd_tol: f64,
}

impl PartialEq for PsdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.herm == other.herm
    }
}

impl PsdMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        Self::with_tol(h, PSD_TOL)
    }

    pub fn with_tol(h: HermitianMatrix, psd_tol: f64) -> Result<Self> {
        let eig = eigh(&h);
        let lmax = eig.eigenvalues[0];
        let lmin = *eig.eigenvalues.last().unwrap();
        if lmin < -psd_tol * lmax.max(1.0) {
            return Err(Error::input(format!(
                "matrix is not positive semi-definite: λ_min = {lmin:.3e}"
            )));
        }
        Ok(Self {
            herm: h,
            eig,
            psd_tol,
        })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    pub fn identity(d: usize) -> Self {
        Self::new(HermitianMatrix::identity(d)).expect("identity is PSD")
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.herm
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.herm
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.herm.as_matrix()
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn psd_tol(&self) -> f64 {
        self.psd_tol
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eig.eigenvalues.last().unwrap()
    }

    /// Eigenvalues at or below this value are treated as exact zeros.
    pub fn zero_threshold(&self) -> f64 {
        self.psd_tol * self.max_eigenvalue().max(1.0)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > self.zero_threshold()
    }

    pub fn rank(&self) -> usize {
        let thr = self.zero_threshold();
        self.eig.eigenvalues.iter().filter(|&&x| x > thr).count()
    }

    /// Spectrum with sub-threshold values replaced by exact zeros.
    pub fn clamped_eigenvalues(&self) -> Vec<f64> {
        let thr = self.zero_threshold();
        self.eig
            .eigenvalues
            .iter()
            .map(|&x| if x <= thr { 0.0 } else { x })
            .collect()
    }

    /// Orthonormal basis (d × rank) of the support.
    pub fn support_basis(&self) -> CMatrix {
        let r = self.rank();
        self.eig.basis.columns(0, r).into_owned()
    }

    pub fn power(&self, p: f64) -> Result<HermitianMatrix> {
        matrix_power(self, p)
    }

    pub fn trace(&self) -> f64 {
        self.herm.trace()
    }

    /// `Tr[self^p]` from the cached spectrum.
    pub fn trace_power(&self, p: f64) -> Result<f64> {
        let mut acc = 0.0;
        for x in self.clamped_eigenvalues() {
            acc += scalar_power(x, p)?;
        }
        Ok(acc)
    }

    pub fn inverse(&self) -> Result<PsdMatrix> {
        PsdMatrix::new(self.power(-1.0)?)
    }

    pub fn add_identity(&self, eps: f64) -> Result<PsdMatrix> {
        PsdMatrix::with_tol(self.herm.add_identity(eps), self.psd_tol)
    }

    pub fn scale(&self, a: f64) -> Result<PsdMatrix> {
        if a < 0.0 {
            return Err(Error::input("negative scale of a PSD matrix"));
        }
        PsdMatrix::with_tol(self.herm.scale(a), self.psd_tol)
    }
}

fn scalar_power(x: f64, p: f64) -> Result<f64> {
    if x == 0.0 {
        if p > 0.0 {
            Ok(0.0)
        } else if p == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::Singular(format!("power {p} of a singular operator")))
        }
    } else {
        Ok(x.powf(p))
    }
}

/// `A^p` for PSD `A`. Negative `p` requires `A` positive definite.
pub fn matrix_power(a: &PsdMatrix, p: f64) -> Result<HermitianMatrix> {
    if !p.is_finite() {
        return Err(Error::input(format!("non-finite exponent {p}")));
    }
    if p == 1.0 {
        return Ok(a.herm.clone());
    }
    let values = a
        .clamped_eigenvalues()
        .into_iter()
        .map(|x| scalar_power(x, p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(a.eig.assemble(&values))
}

/// Sum of the `k` largest singular values (eigenvalue magnitudes).
pub fn kyfan_norm(a: &HermitianMatrix, k: usize) -> Result<f64> {
    let d = a.dim();
    if k == 0 || k > d {
        return Err(Error::input(format!("Ky Fan index {k} outside [1, {d}]")));
    }
    Ok(kyfan_norms(a)[k - 1])
}

/// All Ky Fan norms `k = 1..=d`, i.e. prefix sums of sorted singular values.
pub fn kyfan_norms(a: &HermitianMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = eigh(a).eigenvalues.iter().map(|x| x.abs()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Smallest eigenvalue of `B − A`; non-negative iff `A ⪯ B`.
pub fn loewner_gap(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let diff = b.checked_sub(a)?;
    Ok(*eigh(&diff).eigenvalues.last().unwrap())
}

/// `A ⪯ B` up to `tol · max(1, ‖B − A‖₂)`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    let diff = b.checked_sub(a)?;
    let ev = eigh(&diff).eigenvalues;
    let norm = ev.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    Ok(*ev.last().unwrap() >= -tol * norm.max(1.0))
}

/// `Tr f(A) = Σ f(λᵢ)`.
pub fn trace_fn(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for x in eigh(a).eigenvalues {
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::Domain(format!(
                "function value {y} at eigenvalue {x:e}"
            )));
        }
        acc += y;
    }
    Ok(acc)
}

/// `Tr[X Y]` without forming the product.
pub fn trace_of_product(x: &CMatrix, y: &CMatrix) -> Complex64 {
    let n = x.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Largest singular value of an arbitrary square matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    let gram = HermitianMatrix::hermitize(m.adjoint() * m);
    eigh(&gram).eigenvalues[0].max(0.0).sqrt()
}
