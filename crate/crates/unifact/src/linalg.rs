//! Dense complex matrix kernel: products, commutators, exponentials,
//! Hermitian matrix functions, tensor products and partial traces.
//!
//! Everything in the crate is built on [`Operator`], a validated square
//! complex matrix, and [`DensityOperator`], an operator checked to be
//! Hermitian, unit-trace and positive semidefinite within tolerance.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for Hermiticity / positivity checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Eigenvalues below this threshold are treated as exactly zero when taking
/// matrix logarithms (support checks for the relative entropy).
pub const LOG_SUPPORT_EPS: f64 = 1e-14;

/// Which subsystem to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Keep {
    A,
    B,
}

/// JSON wire format for matrices: `{"dim": n, "re": [...], "im": [...]}`,
/// row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// A finite-dimensional dense complex square matrix, the universal carrier
/// for Hamiltonians, propagators and density operators.
///
/// Invariants: square, all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl TryFrom<MatrixJson> for Operator {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.re.len() != m.dim * m.dim || m.im.len() != m.dim * m.dim {
            return Err(Error::InvalidInput(format!(
                "matrix JSON: expected {} entries for dim {}, got re: {}, im: {}",
                m.dim * m.dim,
                m.dim,
                m.re.len(),
                m.im.len()
            )));
        }
        let mat = DMatrix::from_fn(m.dim, m.dim, |i, j| {
            C64::new(m.re[i * m.dim + j], m.im[i * m.dim + j])
        });
        Operator::new(mat)
    }
}

impl From<Operator> for MatrixJson {
    fn from(op: Operator) -> Self {
        let n = op.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(op.mat[(i, j)].re);
                im.push(op.mat[(i, j)].im);
            }
        }
        MatrixJson { dim: n, re, im }
    }
}

impl Operator {
    /// Wrap a matrix, checking squareness and finiteness.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(
                "operator entries must be finite".into(),
            ));
        }
        Ok(Self { mat })
    }

    pub(crate) fn wrap(mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self::wrap(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::wrap(DMatrix::zeros(dim, dim))
    }

    /// Build from a row-major slice of complex entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Build from a row-major slice of real entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &v)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Self::wrap(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_diagonal_reals(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.mat.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.mat.transpose())
    }

    pub fn conjugate(&self) -> Self {
        Self::wrap(self.mat.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().iter().sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::wrap(self.mat.map(|z| z * s))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    /// Squared Hilbert-Schmidt norm: `sum |a_ij|^2 = Tr(a^dag a)`.
    pub fn hs_norm_sq(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Hilbert-Schmidt inner product `<self, other> = Tr(self^dag other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        defect
    }

    pub fn is_hermitian_within(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Hermitian part `(A + A^dag)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::wrap((&self.mat + self.mat.adjoint()).map(|z| z * 0.5))
    }

    fn anti_hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.mat[(i, j)] + self.mat[(j, i)].conj()).norm());
            }
        }
        defect
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator dims {} and {} differ",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::wrap(&self.mat + &rhs.mat)
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::wrap(&self.mat - &rhs.mat)
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::wrap(&self.mat * &rhs.mat)
    }
}

impl std::ops::Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator::wrap(-&self.mat)
    }
}

/// Tensor (Kronecker) product with the first factor as the most significant
/// index: entry ((i1,i2),(j1,j2)) = a_{i1 j1} b_{i2 j2}.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator::wrap(a.mat.kronecker(&b.mat))
}

/// `ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_same_dim(b)?;
    Ok(Operator::wrap(&a.mat * &b.mat - &b.mat * &a.mat))
}

/// `ab + ba`.
pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_same_dim(b)?;
    Ok(Operator::wrap(&a.mat * &b.mat + &b.mat * &a.mat))
}

/// Sorted Hermitian eigendecomposition: eigenvalues ascending, eigenvector
/// columns permuted to match. Deterministic for reproducible matrix
/// functions.
pub fn eigh(op: &Operator) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let scale = op.frobenius_norm().max(1.0);
    let defect = op.hermitian_defect();
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian {
            defect,
            tol: 1e-10 * scale,
        });
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(op.hermitian_part().mat);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

/// Apply a real scalar function to a Hermitian operator through its
/// eigendecomposition: `V f(Lambda) V^dag`.
pub fn hermitian_fn(op: &Operator, f: impl Fn(f64) -> f64) -> Result<Operator> {
    let (values, vectors) = eigh(op)?;
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| C64::new(f(x), 0.0)),
    ));
    Ok(Operator::wrap(&vectors * d * vectors.adjoint()))
}

/// Positive-semidefinite square root; eigenvalues below zero (round-off)
/// are clamped to zero first.
pub fn matrix_sqrt_psd(op: &Operator) -> Result<Operator> {
    hermitian_fn(op, |x| x.max(0.0).sqrt())
}

/// Matrix exponential.
///
/// Hermitian and anti-Hermitian inputs take an eigendecomposition fast
/// path (`exp(-itH) = V exp(-it Lambda) V^dag`); everything else goes
/// through scaling-and-squaring with a 13th-order Pade approximant.
pub fn expm(a: &Operator) -> Operator {
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Operator::identity(a.dim());
    }
    let tol = 1e-13 * scale.max(1.0);
    if a.hermitian_defect() <= tol {
        if let Ok((values, vectors)) = eigh(a) {
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                values.len(),
                values.iter().map(|&x| C64::new(x.exp(), 0.0)),
            ));
            return Operator::wrap(&vectors * d * vectors.adjoint());
        }
    }
    if a.anti_hermitian_defect() <= tol {
        // a = -i h with h Hermitian; exp(a) = V exp(-i Lambda) V^dag.
        let h = a.scale(C64::new(0.0, 1.0));
        if let Ok((values, vectors)) = eigh(&h) {
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                values.len(),
                values.iter().map(|&x| C64::new(0.0, -x).exp()),
            ));
            return Operator::wrap(&vectors * d * vectors.adjoint());
        }
    }
    expm_pade(a)
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Scaling-and-squaring with the Pade(13) approximant (Higham 2005).
fn expm_pade(a: &Operator) -> Operator {
    const THETA_13: f64 = 5.371920351148152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ];

    let n = a.dim();
    let norm = one_norm(&a.mat);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let m = a.mat.map(|z| z / C64::new(2f64.powi(s as i32), 0.0));

    let ident: DMatrix<C64> = DMatrix::identity(n, n);
    let m2 = &m * &m;
    let m4 = &m2 * &m2;
    let m6 = &m4 * &m2;

    let u_inner = &m6 * (m6.map(|z| z * B[13]) + m4.map(|z| z * B[11]) + m2.map(|z| z * B[9]))
        + m6.map(|z| z * B[7])
        + m4.map(|z| z * B[5])
        + m2.map(|z| z * B[3])
        + ident.map(|z| z * B[1]);
    let u = &m * u_inner;
    let v = &m6 * (m6.map(|z| z * B[12]) + m4.map(|z| z * B[10]) + m2.map(|z| z * B[8]))
        + m6.map(|z| z * B[6])
        + m4.map(|z| z * B[4])
        + m2.map(|z| z * B[2])
        + ident.map(|z| z * B[0]);

    let lu = (&v - &u).lu();
    let mut r = lu
        .solve(&(&v + &u))
        .expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    Operator::wrap(r)
}

/// Partial trace of an operator on a `d_a * d_b` space.
pub fn partial_trace_op(op: &Operator, dims: (usize, usize), keep: Keep) -> Result<Operator> {
    let (da, db) = dims;
    if da * db != op.dim() || da == 0 || db == 0 {
        return Err(Error::DimensionMismatch(format!(
            "dims ({da}, {db}) do not factor operator dimension {}",
            op.dim()
        )));
    }
    let out = match keep {
        Keep::A => Operator::from_fn(da, |i, j| {
            (0..db).map(|k| op.mat[(i * db + k, j * db + k)]).sum()
        }),
        Keep::B => Operator::from_fn(db, |i, j| {
            (0..da).map(|k| op.mat[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(out)
}

/// Spectral norm (largest singular value) estimated by power iteration on
/// `A^dag A`; 50 iterations, relative accuracy about 1e-3.
pub fn spectral_norm(op: &Operator) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    let gram = op.mat.adjoint() * &op.mat;
    // Deterministic start with incommensurate components so the iterate is
    // not orthogonal to the leading eigenvector by accident.
    let mut v = DVector::from_fn(n, |i, _| C64::new(1.0 + (i as f64) * 0.613, 0.137 * i as f64));
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    let mut lambda = 0.0;
    for _ in 0..50 {
        let w = &gram * &v;
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        lambda = wn;
        v = w / C64::new(wn, 0.0);
    }
    lambda.sqrt()
}

/// A validated density operator: Hermitian, unit trace, positive
/// semidefinite, all within `tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityOperator {
    op: Operator,
    tolerance: f64,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, DEFAULT_TOL)
    }

    pub fn with_tolerance(op: Operator, tolerance: f64) -> Result<Self> {
        let defect = op.hermitian_defect();
        if defect > tolerance {
            return Err(Error::NotDensity(format!(
                "Hermiticity defect {defect:.3e} exceeds tolerance {tolerance:.3e}"
            )));
        }
        let tr = op.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tolerance {
            return Err(Error::NotDensity(format!(
                "trace {tr} deviates from 1 beyond tolerance {tolerance:.3e}"
            )));
        }
        let (values, _) = eigh(&op.hermitian_part())?;
        let min = values.first().copied().unwrap_or(0.0);
        if min < -tolerance {
            return Err(Error::NotDensity(format!(
                "minimum eigenvalue {min:.3e} below -{tolerance:.3e}"
            )));
        }
        Ok(Self { op, tolerance })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Rank-one projector onto a (normalized) state vector.
    pub fn pure(state: &[C64]) -> Result<Self> {
        let norm_sq: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq == 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let n = state.len();
        let op = Operator::from_fn(n, |i, j| state[i] * state[j].conj() / norm_sq);
        Self::new(op)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale_re(1.0 / dim as f64),
            tolerance: DEFAULT_TOL,
        }
    }

    /// Reduced state; trace is preserved exactly.
    pub fn partial_trace(&self, dims: (usize, usize), keep: Keep) -> Result<Self> {
        let reduced = partial_trace_op(&self.op, dims, keep)?;
        Self::with_tolerance(reduced, self.tolerance)
    }

    /// Conjugation `U rho U^dag`.
    pub fn evolve(&self, u: &Operator) -> Result<Self> {
        self.op.check_same_dim(u)?;
        let rho = u * &(&self.op * &u.adjoint());
        Self::with_tolerance(rho, self.tolerance)
    }
}

/// Haar-like random unitary: QR of a Ginibre matrix with the R-diagonal
/// phases absorbed.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> Operator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / C64::new(d.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Operator::wrap(q)
}

/// Random full-rank density matrix `G G^dag / Tr(G G^dag)`.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    });
    let w = &g * g.adjoint();
    let tr: C64 = w.diagonal().iter().sum();
    let op = Operator::wrap(w.map(|z| z / tr));
    DensityOperator::new(op).expect("Ginibre construction yields a valid density matrix")
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; avoids pulling in rand_distr for two call sites.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Pauli matrices and common fixed operators.
pub mod pauli {
    use super::{C64, Operator};

    pub fn sigma_x() -> Operator {
        Operator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn sigma_y() -> Operator {
        Operator::from_rows(
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap()
    }

    pub fn sigma_z() -> Operator {
        Operator::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// Raising operator `|0><1|` in the (excited, ground) ordering.
    pub fn sigma_plus() -> Operator {
        Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    pub fn sigma_minus() -> Operator {
        Operator::from_real_rows(2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
    }
}

/// Bosonic ladder operators on a Fock-truncated space (levels 0..cutoff).
pub mod fock {
    use super::{C64, Operator};

    /// Annihilation operator, `a |n> = sqrt(n) |n-1>`.
    pub fn annihilation(cutoff: usize) -> Operator {
        Operator::from_fn(cutoff, |i, j| {
            if j == i + 1 {
                C64::new((j as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn creation(cutoff: usize) -> Operator {
        annihilation(cutoff).adjoint()
    }

    pub fn number(cutoff: usize) -> Operator {
        Operator::from_fn(cutoff, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tensor_identities() {
        let i2 = Operator::identity(2);
        let t = tensor(&i2, &i2);
        assert_eq!(t, Operator::identity(4));

        let sz_i = tensor(&pauli::sigma_z(), &i2);
        let expect = Operator::from_diagonal_reals(&[1.0, 1.0, -1.0, -1.0]);
        assert!((&sz_i - &expect).frobenius_norm() < 1e-15);
    }

    #[test]
    fn tensor_matches_quadruple_loop_oracle() {
        let p0 = Operator::from_real_rows(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let sx = pauli::sigma_x();
        let t = tensor(&p0, &sx);
        // Independent index-loop oracle.
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let expect = p0.get(i1, j1) * sx.get(i2, j2);
                        assert_eq!(t.get(i1 * 2 + i2, j1 * 2 + j2), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn commutator_of_paulis() {
        let sx = pauli::sigma_x();
        let sy = pauli::sigma_y();
        let sz = pauli::sigma_z();

        // [A, A] = 0
        assert!(commutator(&sx, &sx).unwrap().frobenius_norm() < 1e-15);

        // [sx, sy] = 2i sz (hand multiplication of 2x2 Pauli matrices)
        let comm = commutator(&sx, &sy).unwrap();
        let expect = sz.scale(c(0.0, 2.0));
        assert!((&comm - &expect).frobenius_norm() < 1e-15);

        // {sx, sy} = 0
        assert!(anticommutator(&sx, &sy).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn commutator_rejects_dim_mismatch() {
        let a = Operator::identity(2);
        let b = Operator::identity(3);
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn expm_zero_is_identity() {
        let e = expm(&Operator::zeros(3));
        assert!((&e - &Operator::identity(3)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn expm_pauli_closed_form() {
        // exp(i pi sx / 2) = i sx  (2x2 closed form cos + i sin)
        let a = pauli::sigma_x().scale(c(0.0, std::f64::consts::FRAC_PI_2));
        let e = expm(&a);
        let expect = pauli::sigma_x().scale(c(0.0, 1.0));
        assert!((&e - &expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut a = Operator::from_fn(4, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        a = a.scale_re(1.0 / a.frobenius_norm().max(1.0)); // norm <= 1

        // 60-term Taylor oracle.
        let mut term = Operator::identity(4);
        let mut sum = Operator::identity(4);
        for k in 1..=60 {
            term = (&term * &a).scale_re(1.0 / k as f64);
            sum = &sum + &term;
        }
        assert!((&expm(&a) - &sum).frobenius_norm() < 1e-10);
    }

    #[test]
    fn expm_inverse_and_unitarity() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let raw = Operator::from_fn(5, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let a = raw.scale_re(5.0 / raw.frobenius_norm());
            let prod = &expm(&a) * &expm(&a.scale_re(-1.0));
            assert!((&prod - &Operator::identity(5)).frobenius_norm() < 1e-10);

            // Anti-Hermitian exponent gives a unitary.
            let h = raw.hermitian_part();
            let u = expm(&h.scale(c(0.0, -1.0)));
            let gram = &u.adjoint() * &u;
            assert!((&gram - &Operator::identity(5)).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let rho_a = DensityOperator::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let rho_b = DensityOperator::maximally_mixed(2);
        let prod = DensityOperator::new(tensor(rho_a.operator(), rho_b.operator())).unwrap();
        let red = prod.partial_trace((2, 2), Keep::A).unwrap();
        assert!((red.operator() - rho_a.operator()).frobenius_norm() < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityOperator::pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        let red = bell.partial_trace((2, 2), Keep::A).unwrap();
        // 4x4 index sum by hand: I/2.
        assert!(
            (red.operator() - DensityOperator::maximally_mixed(2).operator()).frobenius_norm()
                < 1e-14
        );
    }

    #[test]
    fn partial_trace_preserves_trace() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&mut rng, 6);
        let red = rho.partial_trace((2, 3), Keep::B).unwrap();
        assert_abs_diff_eq!(red.operator().trace().re, rho.operator().trace().re, epsilon = 1e-13);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = DensityOperator::maximally_mixed(6);
        assert!(rho.partial_trace((4, 2), Keep::A).is_err());
    }

    #[test]
    fn hs_norm_and_hermitian_fn_basics() {
        assert_abs_diff_eq!(Operator::identity(2).hs_norm_sq(), 2.0);

        let d = Operator::from_diagonal_reals(&[1.0, 4.0]);
        let s = hermitian_fn(&d, f64::sqrt).unwrap();
        assert!((&s - &Operator::from_diagonal_reals(&[1.0, 2.0])).frobenius_norm() < 1e-14);

        let half = DensityOperator::maximally_mixed(2);
        let l = hermitian_fn(half.operator(), f64::ln).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((&l - &Operator::from_diagonal_reals(&[-ln2, -ln2])).frobenius_norm() < 1e-14);
    }

    #[test]
    fn hermitian_fn_rejects_non_hermitian() {
        let a = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            hermitian_fn(&a, f64::sqrt),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn hs_norm_unitary_invariance() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = Operator::from_fn(4, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let u = random_unitary(&mut rng, 4);
        let conj = &(&u * &a) * &u.adjoint();
        assert_abs_diff_eq!(conj.hs_norm_sq(), a.hs_norm_sq(), epsilon = 1e-10);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = Operator::from_diagonal_reals(&[-3.0, 1.0, 2.0]);
        assert_abs_diff_eq!(spectral_norm(&d), 3.0, epsilon = 1e-6);
    }

    #[test]
    fn density_validation_rejects_bad_states() {
        // Trace 2.
        assert!(DensityOperator::new(Operator::identity(2)).is_err());
        // Negative eigenvalue.
        let neg = Operator::from_diagonal_reals(&[1.5, -0.5]);
        assert!(DensityOperator::new(neg).is_err());
        // Non-Hermitian.
        let nh = Operator::from_rows(
            2,
            &[c(0.5, 0.0), c(0.1, 0.1), c(0.3, 0.1), c(0.5, 0.0)],
        )
        .unwrap();
        assert!(DensityOperator::new(nh).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let a = pauli::sigma_y();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("\"dim\":2"));
        let b: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
