//! Wei-Norman factorization: solve the nonlinear ODE system for the scalar
//! functions `g_i(t)` and evaluate the factored propagator
//! `U(t) = prod_i exp(g_i(t) B_i)`.
//!
//! The coordinate-change matrix `M(g)` is built numerically from matrix
//! exponentials of the adjoint representation, never symbolically: column i
//! of `M(g)` holds the basis coordinates of
//! `(prod_{j<i} exp(g_j ad_{B_j})) B_i`, and each step solves
//! `M(g) gdot = -i a(t)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{LieBasis, TimeDependentHamiltonian};
use crate::linalg::{expm, Operator};

pub const DEFAULT_COND_MAX: f64 = 1e12;
pub const DEFAULT_ODE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WnOptions {
    /// Condition-number guard on `M(g)`; beyond this the factorization is
    /// declared broken down (the known global-validity limit of the
    /// Wei-Norman product).
    pub cond_max: f64,
    /// Bound on the step-halving discrepancy of the RK4 run.
    pub ode_tol: f64,
}

impl Default for WnOptions {
    fn default() -> Self {
        Self {
            cond_max: DEFAULT_COND_MAX,
            ode_tol: DEFAULT_ODE_TOL,
        }
    }
}

/// The factored propagator over a time grid, with stored derivatives for
/// cubic-Hermite interpolation between samples.
#[derive(Debug, Clone)]
pub struct FactoredPropagator {
    basis: LieBasis,
    grid: Vec<f64>,
    g: Vec<DVector<C64>>,
    gdot: Vec<DVector<C64>>,
    step_halving_error: f64,
}

/// Serializable snapshot of a trajectory (grid plus g samples).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryJson {
    pub grid: Vec<f64>,
    /// Row k holds `[re g_1, im g_1, re g_2, ...]` at grid point k.
    pub g: Vec<Vec<f64>>,
}

impl FactoredPropagator {
    pub fn basis(&self) -> &LieBasis {
        &self.basis
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn g_at_sample(&self, k: usize) -> &DVector<C64> {
        &self.g[k]
    }

    /// Estimated integration error from the step-halved shadow run.
    pub fn step_halving_error(&self) -> f64 {
        self.step_halving_error
    }

    pub fn t_end(&self) -> f64 {
        *self.grid.last().expect("grid is nonempty")
    }

    /// Interpolated `g(t)` (cubic Hermite on each component).
    pub fn g_at(&self, t: f64) -> Result<DVector<C64>> {
        let t0 = self.grid[0];
        let t1 = self.t_end();
        let slack = 1e-9 * (t1 - t0).max(1.0);
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::TimeOutOfRange { t, t0, t1 });
        }
        let t = t.clamp(t0, t1);
        // Grid is uniform; locate the bracketing interval.
        let k = if self.grid.len() < 2 {
            return Ok(self.g[0].clone());
        } else {
            let h = self.grid[1] - self.grid[0];
            (((t - t0) / h).floor() as usize).min(self.grid.len() - 2)
        };
        let (ta, tb) = (self.grid[k], self.grid[k + 1]);
        let h = tb - ta;
        let s = ((t - ta) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = DVector::from_element(self.g[k].len(), C64::new(0.0, 0.0));
        for i in 0..out.len() {
            out[i] = self.g[k][i] * C64::new(h00, 0.0)
                + self.gdot[k][i] * C64::new(h10 * h, 0.0)
                + self.g[k + 1][i] * C64::new(h01, 0.0)
                + self.gdot[k + 1][i] * C64::new(h11 * h, 0.0);
        }
        Ok(out)
    }

    /// Evaluate `U(t) = prod_i exp(g_i(t) B_i)` in stored basis order.
    pub fn evaluate(&self, t: f64) -> Result<Operator> {
        let g = self.g_at(t)?;
        let mut u = Operator::identity(self.basis.operator_dim());
        for (i, b) in self.basis.elements().iter().enumerate() {
            u = &u * &expm(&b.scale(g[i]));
        }
        Ok(u)
    }

    /// Defining residual `||(dU/dt) U^dag + i H(t)||_F` at a stored sample,
    /// computed from the operator identity
    /// `(dU/dt) U^dag = sum_i gdot_i U_{<i} B_i U_{<i}^dag`.
    pub fn defining_residual(&self, h: &TimeDependentHamiltonian, sample: usize) -> Result<f64> {
        let t = self.grid[sample];
        let g = &self.g[sample];
        let gd = &self.gdot[sample];
        let d = self.basis.operator_dim();
        let mut prefix = Operator::identity(d);
        let mut lhs = Operator::zeros(d);
        for (i, b) in self.basis.elements().iter().enumerate() {
            let conj = &(&prefix * b) * &prefix.adjoint();
            lhs = &lhs + &conj.scale(gd[i]);
            prefix = &prefix * &expm(&b.scale(g[i]));
        }
        let target = h.operator_at(&self.basis, t).scale(C64::new(0.0, -1.0));
        Ok((&lhs - &target).frobenius_norm())
    }

    pub fn to_trajectory_json(&self) -> TrajectoryJson {
        let n = self.basis.dim();
        let g = self
            .g
            .iter()
            .map(|gk| {
                let mut row = Vec::with_capacity(2 * n);
                for i in 0..n {
                    row.push(gk[i].re);
                    row.push(gk[i].im);
                }
                row
            })
            .collect();
        TrajectoryJson {
            grid: self.grid.clone(),
            g,
        }
    }
}

/// Adjoint representation of a basis, cached for the RHS evaluations.
struct AdjointRep {
    ads: Vec<DMatrix<C64>>,
}

impl AdjointRep {
    fn new(basis: &LieBasis) -> Self {
        let ads = (0..basis.dim()).map(|i| basis.adjoint_matrix(i)).collect();
        Self { ads }
    }

    /// Coordinate-change matrix `M(g)`.
    fn coordinate_matrix(&self, g: &DVector<C64>) -> DMatrix<C64> {
        let n = self.ads.len();
        let mut m = DMatrix::zeros(n, n);
        let mut prefix: DMatrix<C64> = DMatrix::identity(n, n);
        for i in 0..n {
            m.set_column(i, &prefix.column(i));
            if i + 1 < n {
                let e = expm(&Operator::wrap(self.ads[i].map(|z| z * g[i])));
                prefix = &prefix * e.matrix();
            }
        }
        m
    }
}

/// Solve `M(g) gdot = a` for the Wei-Norman right-hand side.
///
/// `a` must already carry the `-i` convention (see [`integrate_wn`]).
pub fn wn_rhs(g: &DVector<C64>, a: &DVector<C64>, basis: &LieBasis) -> Result<DVector<C64>> {
    let rep = AdjointRep::new(basis);
    wn_rhs_cached(g, a, &rep, DEFAULT_COND_MAX, 0.0)
}

fn wn_rhs_cached(
    g: &DVector<C64>,
    a: &DVector<C64>,
    rep: &AdjointRep,
    cond_max: f64,
    t: f64,
) -> Result<DVector<C64>> {
    let m = rep.coordinate_matrix(g);
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > cond_max {
        return Err(Error::FactorizationBreakdown {
            t,
            cond,
            cond_max,
        });
    }
    svd.solve(a, 0.0)
        .map_err(|e| Error::InvalidInput(format!("coordinate-matrix solve failed: {e}")))
}

/// Integrate the Wei-Norman system with classic fixed-step RK4 over
/// `[0, t_end]`, plus one step-halved shadow run for an error estimate.
///
/// The convention `g_i(t) B_i` absorbs the `-i`: the right-hand side uses
/// `-i a_i(t)` so that the reconstructed product solves `dU/dt = -i H(t) U`.
pub fn integrate_wn(
    h: &TimeDependentHamiltonian,
    basis: &LieBasis,
    t_end: f64,
    step: f64,
) -> Result<FactoredPropagator> {
    integrate_wn_with(h, basis, t_end, step, &WnOptions::default())
}

pub fn integrate_wn_with(
    h: &TimeDependentHamiltonian,
    basis: &LieBasis,
    t_end: f64,
    step: f64,
    opts: &WnOptions,
) -> Result<FactoredPropagator> {
    if t_end <= 0.0 || step <= 0.0 {
        return Err(Error::InvalidInput(
            "t_end and step must be positive".into(),
        ));
    }
    h.validate(basis)?;
    let n = basis.dim();
    let rep = AdjointRep::new(basis);
    let steps = (t_end / step).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;

    let minus_i = C64::new(0.0, -1.0);
    let a_bar = |t: f64| h.coefficients(n, t).map(|c| c * minus_i);

    let rk4_step = |t: f64, g: &DVector<C64>, dt: f64| -> Result<(DVector<C64>, DVector<C64>)> {
        let k1 = wn_rhs_cached(g, &a_bar(t), &rep, opts.cond_max, t)?;
        let g2 = g + &k1 * C64::new(dt / 2.0, 0.0);
        let k2 = wn_rhs_cached(&g2, &a_bar(t + dt / 2.0), &rep, opts.cond_max, t + dt / 2.0)?;
        let g3 = g + &k2 * C64::new(dt / 2.0, 0.0);
        let k3 = wn_rhs_cached(&g3, &a_bar(t + dt / 2.0), &rep, opts.cond_max, t + dt / 2.0)?;
        let g4 = g + &k3 * C64::new(dt, 0.0);
        let k4 = wn_rhs_cached(&g4, &a_bar(t + dt), &rep, opts.cond_max, t + dt)?;
        let incr = (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
            * C64::new(dt / 6.0, 0.0);
        Ok((g + incr, DVector::zeros(0)))
    };

    // Main run with stored samples and derivatives.
    let mut grid = Vec::with_capacity(steps + 1);
    let mut gs = Vec::with_capacity(steps + 1);
    let mut gdots = Vec::with_capacity(steps + 1);
    let mut g = DVector::from_element(n, C64::new(0.0, 0.0));
    for k in 0..=steps {
        let t = k as f64 * dt;
        grid.push(t);
        gdots.push(wn_rhs_cached(&g, &a_bar(t), &rep, opts.cond_max, t)?);
        gs.push(g.clone());
        if k < steps {
            g = rk4_step(t, &g, dt)?.0;
        }
    }

    // Step-halved shadow run, endpoint comparison only.
    let mut g_half = DVector::from_element(n, C64::new(0.0, 0.0));
    for k in 0..(2 * steps) {
        let t = k as f64 * dt / 2.0;
        g_half = rk4_step(t, &g_half, dt / 2.0)?.0;
    }
    let discrepancy = (gs.last().expect("at least one sample") - &g_half)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if discrepancy > opts.ode_tol {
        return Err(Error::StepTooLarge {
            discrepancy,
            tol: opts.ode_tol,
        });
    }

    Ok(FactoredPropagator {
        basis: basis.clone(),
        grid,
        g: gs,
        gdot: gdots,
        step_halving_error: discrepancy,
    })
}
