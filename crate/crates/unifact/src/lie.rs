//! Closure of a set of seed operators under repeated commutation into a
//! finite-dimensional Lie algebra, with structure constants and adjoint
//! matrices.
//!
//! Seeds keep their given order; discovered elements are appended in
//! (i, j)-lexicographic discovery order, each orthonormalized against the
//! current basis under the Hilbert-Schmidt inner product. The element order
//! fixes the factor order of the Wei-Norman product downstream.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, Operator};

pub const DEFAULT_INDEPENDENCE_TOL: f64 = 1e-10;
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosureOptions {
    pub max_dim: usize,
    /// Relative residual below which a commutator counts as lying in the
    /// current span (separates genuine new directions from round-off).
    pub independence_tol: f64,
    /// Frobenius-norm bound on `[B_i, B_j] - sum_k c_ij^k B_k`.
    pub closure_tol: f64,
    /// When nonzero, closure-residual violations confined to the last
    /// `boundary_rows` rows/columns (the top Fock levels of a truncated
    /// bosonic space) are downgraded to warnings.
    pub boundary_rows: usize,
}

impl ClosureOptions {
    pub fn new(max_dim: usize) -> Self {
        Self {
            max_dim,
            independence_tol: DEFAULT_INDEPENDENCE_TOL,
            closure_tol: DEFAULT_CLOSURE_TOL,
            boundary_rows: 0,
        }
    }
}

/// An ordered operator basis closed under commutation.
///
/// `elements` holds the seeds as given followed by discovered directions
/// (stored orthonormalized under the HS inner product). `structure_slice(i)`
/// carries the constants of `[B_i, B_j] = sum_k c_ij^k B_k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LieBasis {
    elements: Vec<Operator>,
    seed_count: usize,
    /// HS Gram matrix of `elements`.
    gram: Operator,
    /// `c_slices[i].get(j, k) = c_ij^k`.
    c_slices: Vec<Operator>,
    closure_tol: f64,
    independence_tol: f64,
    warnings: Vec<String>,
}

impl LieBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn operator_dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Operator {
        &self.elements[i]
    }

    pub fn seed_count(&self) -> usize {
        self.seed_count
    }

    pub fn gram(&self) -> &Operator {
        &self.gram
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> C64 {
        self.c_slices[i].get(j, k)
    }

    /// Matrix of `ad_{B_i}` in basis coordinates: column j holds the
    /// coordinates of `[B_i, B_j]`, i.e. the slice `c_ij^k` of the
    /// structure tensor.
    pub fn adjoint_matrix(&self, i: usize) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, j| self.structure_constant(i, j, k))
    }

    /// Least-squares expansion of `x` over the basis; returns the
    /// coordinates and the residual Frobenius norm.
    pub fn expand(&self, x: &Operator) -> Result<(DVector<C64>, f64)> {
        if x.dim() != self.operator_dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} does not match basis operator dim {}",
                x.dim(),
                self.operator_dim()
            )));
        }
        let n = self.dim();
        let v = DVector::from_fn(n, |k, _| self.elements[k].hs_inner(x));
        let lu = self.gram.matrix().clone().lu();
        let coords = lu.solve(&v).ok_or_else(|| {
            Error::InvalidInput("Gram matrix is singular; basis not independent".into())
        })?;
        // residual^2 = |x|^2 - 2 Re(c^dag v) + c^dag G c
        let cv: C64 = coords.dotc(&v);
        let gc = self.gram.matrix() * &coords;
        let cgc: C64 = coords.dotc(&gc);
        let res_sq = x.hs_norm_sq() - 2.0 * cv.re + cgc.re;
        Ok((coords, res_sq.max(0.0).sqrt()))
    }

    /// Largest Jacobi-identity defect of the structure constants over all
    /// index quadruples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = C64::new(0.0, 0.0);
                        for m in 0..n {
                            s += self.structure_constant(i, j, m) * self.structure_constant(m, k, l)
                                + self.structure_constant(j, k, m)
                                    * self.structure_constant(m, i, l)
                                + self.structure_constant(k, i, m)
                                    * self.structure_constant(m, j, l);
                        }
                        worst = worst.max(s.norm());
                    }
                }
            }
        }
        worst
    }

    /// Largest closure residual `||[B_i, B_j] - sum_k c_ij^k B_k||_F`.
    pub fn closure_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let comm = commutator(&self.elements[i], &self.elements[j])
                    .expect("basis elements share a dimension");
                let mut rec = Operator::zeros(self.operator_dim());
                for k in 0..n {
                    rec = &rec + &self.elements[k].scale(self.structure_constant(i, j, k));
                }
                worst = worst.max((&comm - &rec).frobenius_norm());
            }
        }
        worst
    }
}

/// Close `seeds` under repeated commutation.
///
/// Fails with [`Error::ClosureOverflow`] if more than `max_dim` directions
/// appear, which signals that the split-step route should be used instead.
pub fn close_algebra(
    seeds: &[Operator],
    max_dim: usize,
    independence_tol: f64,
) -> Result<LieBasis> {
    let mut opts = ClosureOptions::new(max_dim);
    opts.independence_tol = independence_tol;
    close_algebra_with(seeds, &opts)
}

pub fn close_algebra_with(seeds: &[Operator], opts: &ClosureOptions) -> Result<LieBasis> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("seed set is empty".into()));
    }
    if opts.max_dim < seeds.len() {
        return Err(Error::InvalidInput(format!(
            "max_dim {} smaller than seed count {}",
            opts.max_dim,
            seeds.len()
        )));
    }
    let d = seeds[0].dim();
    if seeds.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch(
            "seeds must share a common dimension".into(),
        ));
    }

    // `elements` is the stored basis; `ortho` is a parallel orthonormal set
    // used for projections (modified Gram-Schmidt, applied twice).
    let mut elements: Vec<Operator> = Vec::new();
    let mut ortho: Vec<Operator> = Vec::new();

    let orthonormalize = |ortho: &[Operator], x: &Operator| -> (Operator, f64) {
        let mut r = x.clone();
        for _ in 0..2 {
            for q in ortho {
                let c = q.hs_inner(&r);
                r = &r - &q.scale(c);
            }
        }
        let norm = r.frobenius_norm();
        (r, norm)
    };

    for (idx, s) in seeds.iter().enumerate() {
        let norm = s.frobenius_norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput(format!("seed {idx} is zero")));
        }
        let (r, rnorm) = orthonormalize(&ortho, s);
        if rnorm <= opts.independence_tol * norm {
            return Err(Error::InvalidInput(format!(
                "seed {idx} is linearly dependent on earlier seeds"
            )));
        }
        elements.push(s.clone());
        ortho.push(r.scale_re(1.0 / rnorm));
    }
    let seed_count = elements.len();

    // Repeated sweeps over lexicographic pairs until nothing new appears.
    // With `boundary_rows` set, novelty is judged on the interior block so
    // that truncation artifacts at the top Fock levels do not spawn
    // spurious directions.
    loop {
        let mut added = false;
        let mut i = 0;
        while i < elements.len() {
            let mut j = i + 1;
            while j < elements.len() {
                let comm = commutator(&elements[i], &elements[j])?;
                let comm_norm = masked_frobenius(&comm, opts.boundary_rows);
                let scale = elements[i].frobenius_norm() * elements[j].frobenius_norm();
                if comm_norm > 1e-13 * scale.max(1.0) {
                    let (r, rnorm_full) = orthonormalize(&ortho, &comm);
                    let rnorm_interior = masked_frobenius(&r, opts.boundary_rows);
                    if rnorm_full > 0.0 && rnorm_interior > opts.independence_tol * comm_norm {
                        if elements.len() + 1 > opts.max_dim {
                            return Err(Error::ClosureOverflow {
                                max_dim: opts.max_dim,
                                found: elements.len(),
                            });
                        }
                        let q = r.scale_re(1.0 / rnorm_full);
                        elements.push(q.clone());
                        ortho.push(q);
                        added = true;
                    }
                }
                j += 1;
            }
            i += 1;
        }
        if !added {
            break;
        }
    }

    finalize_basis(elements, seed_count, opts)
}

fn finalize_basis(
    elements: Vec<Operator>,
    seed_count: usize,
    opts: &ClosureOptions,
) -> Result<LieBasis> {
    let n = elements.len();
    let gram = Operator::from_fn(n, |i, j| elements[i].hs_inner(&elements[j]));
    let mut warnings = Vec::new();

    let mut basis = LieBasis {
        elements,
        seed_count,
        gram,
        c_slices: vec![Operator::zeros(n); n],
        closure_tol: opts.closure_tol,
        independence_tol: opts.independence_tol,
        warnings: Vec::new(),
    };

    // Structure constants by least squares against the stored basis;
    // antisymmetry c_ji^k = -c_ij^k holds by construction.
    let mut slices: Vec<DMatrix<C64>> = vec![DMatrix::zeros(n, n); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let comm = commutator(&basis.elements[i], &basis.elements[j])?;
            let (coords, residual) = basis.expand(&comm)?;
            if residual > opts.closure_tol {
                let masked = masked_residual(&basis, &comm, &coords, opts.boundary_rows);
                if opts.boundary_rows > 0 && masked <= opts.closure_tol {
                    warnings.push(format!(
                        "closure residual {residual:.3e} for [B_{i}, B_{j}] is confined to the \
                         top {} truncation rows (interior residual {masked:.3e})",
                        opts.boundary_rows
                    ));
                } else {
                    return Err(Error::ClosureResidual {
                        i,
                        j,
                        residual,
                        tol: opts.closure_tol,
                    });
                }
            }
            for k in 0..n {
                slices[i][(j, k)] = coords[k];
                slices[j][(i, k)] = -coords[k];
            }
        }
    }
    basis.c_slices = slices.into_iter().map(Operator::wrap).collect();
    basis.warnings = warnings;
    Ok(basis)
}

/// Frobenius norm with the last `boundary` rows and columns zeroed.
fn masked_frobenius(op: &Operator, boundary: usize) -> f64 {
    if boundary == 0 {
        return op.frobenius_norm();
    }
    let d = op.dim();
    let interior = d.saturating_sub(boundary);
    let mut sum = 0.0;
    for i in 0..interior {
        for j in 0..interior {
            sum += op.get(i, j).norm_sqr();
        }
    }
    sum.sqrt()
}

/// Residual of the expansion with the last `boundary` rows and columns of
/// the operator zeroed out (truncation edge of a Fock ladder).
fn masked_residual(
    basis: &LieBasis,
    comm: &Operator,
    coords: &DVector<C64>,
    boundary: usize,
) -> f64 {
    if boundary == 0 {
        return f64::INFINITY;
    }
    let d = basis.operator_dim();
    let mut rec = Operator::zeros(d);
    for k in 0..basis.dim() {
        rec = &rec + &basis.elements()[k].scale(coords[k]);
    }
    let diff = comm - &rec;
    let interior = d.saturating_sub(boundary);
    let mut sum = 0.0;
    for i in 0..interior {
        for j in 0..interior {
            sum += diff.get(i, j).norm_sqr();
        }
    }
    sum.sqrt()
}

/// A Hamiltonian `H(t) = sum_i a_i(t) B_{idx(i)}` over a closed basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeDependentHamiltonian {
    pub terms: Vec<HamiltonianTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub generator_index: usize,
    pub coefficient: Coefficient,
}

/// Analytic coefficient functions of time. Kept as data (rather than
/// closures) so Hamiltonian specs are serializable for the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Cosine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `c_0 + c_1 t + c_2 t^2 + ...` with real coefficients.
    Polynomial { coefficients: Vec<f64> },
}

impl Coefficient {
    pub fn constant(re: f64) -> Self {
        Coefficient::Constant { re, im: 0.0 }
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self {
            Coefficient::Constant { re, im } => C64::new(*re, *im),
            Coefficient::Cosine {
                amplitude,
                frequency,
                phase,
            } => C64::new(amplitude * (frequency * t + phase).cos(), 0.0),
            Coefficient::Sine {
                amplitude,
                frequency,
                phase,
            } => C64::new(amplitude * (frequency * t + phase).sin(), 0.0),
            Coefficient::Polynomial { coefficients } => {
                let mut acc = 0.0;
                for &c in coefficients.iter().rev() {
                    acc = acc * t + c;
                }
                C64::new(acc, 0.0)
            }
        }
    }
}

impl TimeDependentHamiltonian {
    pub fn new(terms: Vec<HamiltonianTerm>) -> Self {
        Self { terms }
    }

    pub fn validate(&self, basis: &LieBasis) -> Result<()> {
        for term in &self.terms {
            if term.generator_index >= basis.dim() {
                return Err(Error::InvalidInput(format!(
                    "generator index {} out of range for basis of dimension {}",
                    term.generator_index,
                    basis.dim()
                )));
            }
        }
        Ok(())
    }

    /// Coefficient vector `a(t)` over the full basis (zeros where no term).
    pub fn coefficients(&self, basis_dim: usize, t: f64) -> DVector<C64> {
        let mut a = DVector::from_element(basis_dim, C64::new(0.0, 0.0));
        for term in &self.terms {
            a[term.generator_index] += term.coefficient.eval(t);
        }
        a
    }

    /// Assemble the dense operator `H(t)`.
    pub fn operator_at(&self, basis: &LieBasis, t: f64) -> Operator {
        let mut h = Operator::zeros(basis.operator_dim());
        for term in &self.terms {
            h = &h + &basis.element(term.generator_index).scale(term.coefficient.eval(t));
        }
        h
    }
}
