//! Dense complex linear algebra for the small (2×2 and 4×4) operators used
//! throughout the crate.
//!
//! Everything here is written for tiny matrices: closed-form 2×2 routines where
//! they exist, plain loops otherwise. The matrix exponential uses scaling and
//! squaring with a Taylor kernel so that it stays exact at exceptional points,
//! where an eigendecomposition does not exist.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default tolerance on `|tr² − 4 det|` below which a 2×2 matrix is treated as
/// defective.
pub const DEFAULT_TOL_DEFECTIVE: f64 = 1e-9;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// 2×2 matrix from its entries in reading order.
    pub fn mat2(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self::new(2, 2, vec![a, b, c, d])
    }

    pub fn real2(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::mat2(a.into(), b.into(), c.into(), d.into())
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::real2(0.0, 1.0, 1.0, 0.0)
    }

    pub fn pauli_y() -> Self {
        Self::mat2(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::real2(1.0, 0.0, 0.0, -1.0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::new(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    /// Kronecker product `self ⊗ other`; the left factor indexes the more
    /// significant half of the joint basis.
    pub fn kron(&self, other: &CMatrix) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Determinant of a 2×2 matrix.
    pub fn det2(&self) -> C64 {
        debug_assert!(self.rows == 2 && self.cols == 2);
        self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)]
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let n = cols.len();
        let rows = cols[0].len();
        let mut m = Self::zeros(rows, n);
        for (j, c) in cols.iter().enumerate() {
            for (i, &z) in c.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Hermitian inner product `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scaled(v: &[C64], s: C64) -> Vec<C64> {
    v.iter().map(|z| z * s).collect()
}

/// Unit vector orthogonal to the 2-vector `u` (assumed unit norm).
fn perp2(u: &[C64]) -> Vec<C64> {
    vec![-u[1].conj(), u[0].conj()]
}

fn unit_phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        ONE
    } else {
        z / r
    }
}

/// Singular value decomposition `u · diag(sigma) · vdag` of a 2×2 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd2 {
    pub u: CMatrix,
    pub sigma: (f64, f64),
    pub vdag: CMatrix,
}

impl Svd2 {
    pub fn reconstruct(&self) -> CMatrix {
        let s = CMatrix::diag(&[self.sigma.0.into(), self.sigma.1.into()]);
        &(&self.u * &s) * &self.vdag
    }
}

/// SVD of a 2×2 complex matrix.
///
/// The right singular vectors come from an exact Jacobi rotation of `M†M`; the
/// left ones are `Mv₁/σ₁` and its orthogonal complement, which keeps `u`
/// unitary even when `M` is rank deficient. Singular values are returned in
/// descending order and the first non-negligible entry of every column of `u`
/// is made real and non-negative.
pub fn svd_2x2(m: &CMatrix) -> Svd2 {
    assert!(m.rows() == 2 && m.cols() == 2, "svd_2x2 needs a 2x2 matrix");
    let gram = &m.dagger() * m;
    let a = gram[(0, 0)].re;
    let d = gram[(1, 1)].re;
    let b = gram[(0, 1)];
    let theta = 0.5 * (2.0 * b.norm()).atan2(a - d);
    let beta_conj = unit_phase(b).conj();
    let (c, s) = (theta.cos(), theta.sin());
    let mut v1 = vec![C64::from(c), beta_conj * s];
    let mut v2 = vec![C64::from(-s), beta_conj * c];

    let mut w1 = m.apply(&v1);
    let mut s1 = norm2(&w1);
    let w2 = m.apply(&v2);
    if norm2(&w2) > s1 {
        std::mem::swap(&mut v1, &mut v2);
        w1 = w2;
        s1 = norm2(&w1);
    }

    let mut u1 = if s1 > 0.0 {
        scaled(&w1, C64::from(1.0 / s1))
    } else {
        vec![ONE, ZERO]
    };
    let mut u2 = perp2(&u1);
    let proj = inner(&u2, &m.apply(&v2));
    let s2 = proj.norm();
    if s2 > 0.0 {
        u2 = scaled(&u2, unit_phase(proj));
    }

    for (u, v) in [(&mut u1, &mut v1), (&mut u2, &mut v2)] {
        if let Some(lead) = u.iter().copied().find(|z| z.norm() > 1e-14) {
            let ph = unit_phase(lead).conj();
            *u = scaled(u, ph);
            *v = scaled(v, ph);
        }
    }

    Svd2 {
        u: CMatrix::from_columns(&[u1, u2]),
        sigma: (s1, s2),
        vdag: CMatrix::from_columns(&[v1, v2]).dagger(),
    }
}

const TAYLOR_ORDER: usize = 18;

/// Matrix exponential `exp(a)` by scaling and squaring with a degree-18 Taylor
/// kernel (scaled norm at most 1/2).
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square());
    let n = a.rows();
    let norm = a.norm_1();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a.scale_real(0.5f64.powi(squarings));

    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=TAYLOR_ORDER {
        term = (&term * &b).scale_real(1.0 / k as f64);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(−i·h·t)` with ħ = 1. Valid for defective `h`.
pub fn matrix_exp_neg_i(h: &CMatrix, t: f64) -> CMatrix {
    expm(&h.scale(C64::new(0.0, -t)))
}

/// True iff `m†m` deviates from the identity by at most `tol` in every entry.
pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let g = &m.dagger() * m;
    g.max_abs_diff(&CMatrix::identity(m.rows())) <= tol
}

/// Which eigen-branch to take for a 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigBranch {
    /// Decide from the discriminant; ambiguous cases are reported as errors.
    #[default]
    Auto,
    Diagonalizable,
    Defective,
}

/// Jordan-chain partners at an exceptional point.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanChain {
    /// Generalized right vector, `(M − λ)|φᴶ⟩ = |φ⟩`.
    pub right: Vec<C64>,
    /// Generalized left vector, `(M − λ)†|χᴶ⟩ = |χ⟩`.
    pub left: Vec<C64>,
}

/// Right and left eigenvectors of a 2×2 matrix.
///
/// In the diagonalizable case the pairs are bi-orthonormal, `⟨χᵢ|φⱼ⟩ = δᵢⱼ`,
/// with every `|φᵢ⟩` of unit 2-norm. Eigenvalues are ordered as
/// `(tr ± √disc)/2` using the principal square root, so index 0 is the
/// "+" branch. At an exceptional point the single eigenpair is
/// self-orthogonal and [`JordanChain`] carries the generalized vectors, scaled
/// so that `⟨χ|φᴶ⟩ = ⟨χᴶ|φ⟩ = 1` and `⟨χᴶ|φᴶ⟩ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthoEig {
    pub eigenvalues: Vec<C64>,
    pub right: Vec<Vec<C64>>,
    pub left: Vec<Vec<C64>>,
    pub defective: bool,
    pub discriminant: C64,
    pub chain: Option<JordanChain>,
}

impl BiorthoEig {
    /// Eigenvalues of `M†`, the complex conjugates of the right eigenvalues.
    pub fn left_eigenvalues(&self) -> Vec<C64> {
        self.eigenvalues.iter().map(|z| z.conj()).collect()
    }

    /// `Σᵢ λᵢ |φᵢ⟩⟨χᵢ|`; equals the input matrix in the diagonalizable case.
    pub fn spectral_sum(&self) -> CMatrix {
        let mut out = CMatrix::zeros(2, 2);
        for ((lam, phi), chi) in self.eigenvalues.iter().zip(&self.right).zip(&self.left) {
            for i in 0..2 {
                for j in 0..2 {
                    out[(i, j)] += lam * phi[i] * chi[j].conj();
                }
            }
        }
        out
    }
}

/// `tr(M)² − 4 det(M)` of a 2×2 matrix.
pub fn discriminant(m: &CMatrix) -> C64 {
    let tr = m.trace();
    tr * tr - 4.0 * m.det2()
}

/// Bi-orthogonal eigendecomposition of a 2×2 matrix, deciding the branch from
/// the discriminant (see [`biortho_eig_with`]).
pub fn biortho_eig(m: &CMatrix, tol_defective: f64) -> Result<BiorthoEig> {
    biortho_eig_with(m, tol_defective, EigBranch::Auto)
}

/// Bi-orthogonal eigendecomposition with an explicit branch choice.
///
/// With [`EigBranch::Auto`], `|disc| > 10·tol` is diagonalizable,
/// `|disc| < tol/10` is defective, and anything in between is rejected as
/// [`Error::DegenerateAmbiguous`].
pub fn biortho_eig_with(m: &CMatrix, tol_defective: f64, branch: EigBranch) -> Result<BiorthoEig> {
    assert!(m.rows() == 2 && m.cols() == 2, "biortho_eig needs a 2x2 matrix");
    let disc = discriminant(m);
    let mag = disc.norm();
    let branch = match branch {
        EigBranch::Auto if mag > 10.0 * tol_defective => EigBranch::Diagonalizable,
        EigBranch::Auto if mag < tol_defective / 10.0 => EigBranch::Defective,
        EigBranch::Auto => {
            return Err(Error::DegenerateAmbiguous {
                discriminant: mag,
                tolerance: tol_defective,
            })
        }
        b => b,
    };
    match branch {
        EigBranch::Defective => Ok(defective_eig(m, disc, tol_defective)),
        _ => Ok(diagonalizable_eig(m, disc)),
    }
}

fn shifted(m: &CMatrix, lam: C64) -> CMatrix {
    &m.clone() - &CMatrix::identity(2).scale(lam)
}

/// Right null vector of a (numerically) rank-one 2×2 matrix and the left one.
fn null_pair(n: &CMatrix) -> (Svd2, Vec<C64>, Vec<C64>) {
    let svd = svd_2x2(n);
    let right = svd.vdag.dagger().column(1);
    let left = svd.u.column(1);
    (svd, right, left)
}

fn diagonalizable_eig(m: &CMatrix, disc: C64) -> BiorthoEig {
    let tr = m.trace();
    let root = disc.sqrt();
    let lams = [(tr + root) * 0.5, (tr - root) * 0.5];
    let mut right = Vec::with_capacity(2);
    let mut left = Vec::with_capacity(2);
    for &lam in &lams {
        let n = shifted(m, lam);
        if n.norm_max() <= f64::EPSILON * m.norm_max().max(1.0) {
            // Scalar matrix: any basis diagonalizes it.
            let k = right.len();
            let e: Vec<C64> = (0..2).map(|i| if i == k { ONE } else { ZERO }).collect();
            right.push(e.clone());
            left.push(e);
            continue;
        }
        let (_, phi, chi) = null_pair(&n);
        let overlap = inner(&chi, &phi);
        right.push(phi);
        // ⟨χ/c̄|φ⟩ = 1 with c = ⟨χ|φ⟩
        left.push(scaled(&chi, (ONE / overlap).conj()));
    }
    BiorthoEig {
        eigenvalues: lams.to_vec(),
        right,
        left,
        defective: false,
        discriminant: disc,
        chain: None,
    }
}

fn defective_eig(m: &CMatrix, disc: C64, tol: f64) -> BiorthoEig {
    let lam = m.trace() * 0.5;
    let n = shifted(m, lam);
    if n.norm_max() <= tol {
        let mut eig = diagonalizable_eig(m, disc);
        eig.eigenvalues = vec![lam, lam];
        return eig;
    }
    let (svd, phi, chi) = null_pair(&n);
    let s1 = svd.sigma.0;
    let u1 = svd.u.column(0);
    let v1 = svd.vdag.dagger().column(0);

    // Least-norm solutions through the rank-one pseudo-inverse v₁u₁†/σ₁; they
    // are automatically orthogonal to the null vectors.
    let phi_j = scaled(&v1, inner(&u1, &phi) / s1);
    let chi_raw_j = scaled(&u1, inner(&v1, &chi) / s1);

    // Fix the left scale so that ⟨χ|φᴶ⟩ = 1; the chain equation for χᴶ is
    // linear in χ so χᴶ scales along.
    let c = inner(&chi, &phi_j);
    let s = (ONE / c).conj();
    let chi = scaled(&chi, s);
    let mut chi_j = scaled(&chi_raw_j, s);
    // Remaining freedom χᴶ → χᴶ + aχ, fixed by ⟨χᴶ|φᴶ⟩ = 0.
    let resid = inner(&chi_j, &phi_j);
    for (cj, ch) in chi_j.iter_mut().zip(&chi) {
        *cj -= resid.conj() * ch;
    }

    BiorthoEig {
        eigenvalues: vec![lam],
        right: vec![phi.clone()],
        left: vec![chi],
        defective: true,
        discriminant: disc,
        chain: Some(JordanChain {
            right: phi_j,
            left: chi_j,
        }),
    }
}
