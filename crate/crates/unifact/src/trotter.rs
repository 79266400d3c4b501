//! Commutator-corrected split-step evolution for bipartite systems whose
//! generator algebra does not close: the three-factor split step, the
//! `2^n`-fold scaled composition, and error metrology against the dense
//! matrix-exponential oracle.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, expm, spectral_norm, tensor, Operator};

pub const DEFAULT_ORACLE_MAX_DIM: usize = 256;

/// `H = H_A (x) I + I (x) H_B + lambda H_int` on a `d_a * d_b` space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BipartiteSystem {
    pub d_a: usize,
    pub d_b: usize,
    pub h_a: Operator,
    pub h_b: Operator,
    pub h_int: Operator,
    pub lambda: f64,
}

impl BipartiteSystem {
    pub fn new(
        d_a: usize,
        d_b: usize,
        h_a: Operator,
        h_b: Operator,
        h_int: Operator,
        lambda: f64,
    ) -> Result<Self> {
        let sys = Self {
            d_a,
            d_b,
            h_a,
            h_b,
            h_int,
            lambda,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_a.dim() != self.d_a || self.h_b.dim() != self.d_b {
            return Err(Error::DimensionMismatch(format!(
                "local Hamiltonian dims ({}, {}) do not match ({}, {})",
                self.h_a.dim(),
                self.h_b.dim(),
                self.d_a,
                self.d_b
            )));
        }
        if self.h_int.dim() != self.d_a * self.d_b {
            return Err(Error::DimensionMismatch(format!(
                "interaction dim {} != d_a * d_b = {}",
                self.h_int.dim(),
                self.d_a * self.d_b
            )));
        }
        for (name, h) in [("h_a", &self.h_a), ("h_b", &self.h_b), ("h_int", &self.h_int)] {
            let defect = h.hermitian_defect();
            if defect > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "{name} not Hermitian: defect {defect:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    /// `H_A (x) I + I (x) H_B` on the full space.
    pub fn free_hamiltonian(&self) -> Operator {
        &tensor(&self.h_a, &Operator::identity(self.d_b))
            + &tensor(&Operator::identity(self.d_a), &self.h_b)
    }

    /// `lambda * H_int`.
    pub fn interaction(&self) -> Operator {
        self.h_int.scale_re(self.lambda)
    }

    pub fn full_hamiltonian(&self) -> Operator {
        &self.free_hamiltonian() + &self.interaction()
    }
}

/// `t_end` split into `2^n` slices of length `tau`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSchedule {
    pub t_end: f64,
    pub n: u32,
}

impl SplitSchedule {
    pub fn new(t_end: f64, n: u32) -> Result<Self> {
        let s = Self { t_end, n };
        if s.tau() <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tau = t_end / 2^n = {} must be positive",
                s.tau()
            )));
        }
        Ok(s)
    }

    pub fn slices(&self) -> u64 {
        1u64 << self.n
    }

    pub fn tau(&self) -> f64 {
        self.t_end / self.slices() as f64
    }
}

/// Whether the split step keeps the commutator correction factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitVariant {
    /// Correction factor `exp(-1/2 [H_A + H_B, lambda H_int] tau^2)` kept.
    #[default]
    Corrected,
    /// Plain first-order Lie-Trotter product for comparison studies.
    Plain,
}

/// One split step:
/// `exp(-1/2 [H_free, H_int] tau^2) * exp(-i H_int tau) * exp(-i H_free tau)`
/// with `H_int` carrying the coupling `lambda`. The commutator of Hermitian
/// operators is anti-Hermitian, so all three factors are unitary.
pub fn split_step(sys: &BipartiteSystem, tau: f64) -> Result<Operator> {
    split_step_variant(sys, tau, SplitVariant::Corrected)
}

pub fn split_step_variant(
    sys: &BipartiteSystem,
    tau: f64,
    variant: SplitVariant,
) -> Result<Operator> {
    if tau <= 0.0 {
        return Err(Error::InvalidInput("tau must be positive".into()));
    }
    let free = sys.free_hamiltonian();
    let int = sys.interaction();
    let u_free = expm(&free.scale(C64::new(0.0, -tau)));
    let u_int = expm(&int.scale(C64::new(0.0, -tau)));
    let step = &u_int * &u_free;
    match variant {
        SplitVariant::Plain => Ok(step),
        SplitVariant::Corrected => {
            let corr = commutator(&free, &int)?.scale_re(-0.5 * tau * tau);
            Ok(&expm(&corr) * &step)
        }
    }
}

/// `(split_step(tau))^{2^n}` by `n` repeated squarings.
pub fn evolve_scaled(sys: &BipartiteSystem, sched: &SplitSchedule) -> Result<Operator> {
    evolve_scaled_variant(sys, sched, SplitVariant::Corrected)
}

pub fn evolve_scaled_variant(
    sys: &BipartiteSystem,
    sched: &SplitSchedule,
    variant: SplitVariant,
) -> Result<Operator> {
    let mut u = split_step_variant(sys, sched.tau(), variant)?;
    for _ in 0..sched.n {
        u = &u * &u;
    }
    Ok(u)
}

/// Spectral-norm distance between the scaled split product and the exact
/// propagator `exp(-iHt)` (power-iteration estimate, relative accuracy
/// about 1e-3).
pub fn trotter_error(sys: &BipartiteSystem, sched: &SplitSchedule) -> Result<f64> {
    trotter_error_variant(sys, sched, SplitVariant::Corrected)
}

pub fn trotter_error_variant(
    sys: &BipartiteSystem,
    sched: &SplitSchedule,
    variant: SplitVariant,
) -> Result<f64> {
    if sys.dim() > DEFAULT_ORACLE_MAX_DIM {
        return Err(Error::OracleInfeasible {
            dim: sys.dim(),
            max: DEFAULT_ORACLE_MAX_DIM,
        });
    }
    let approx = evolve_scaled_variant(sys, sched, variant)?;
    let exact = expm(&sys.full_hamiltonian().scale(C64::new(0.0, -sched.t_end)));
    Ok(spectral_norm(&(&approx - &exact)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn generic_two_qubit(lambda: f64) -> BipartiteSystem {
        BipartiteSystem::new(
            2,
            2,
            pauli::sigma_z(),
            pauli::sigma_z(),
            tensor(&pauli::sigma_x(), &pauli::sigma_x()),
            lambda,
        )
        .unwrap()
    }

    fn commuting_system() -> BipartiteSystem {
        // H_int = sigma_z (x) sigma_z commutes with the free part.
        BipartiteSystem::new(
            2,
            2,
            pauli::sigma_z(),
            pauli::sigma_z(),
            tensor(&pauli::sigma_z(), &pauli::sigma_z()),
            0.7,
        )
        .unwrap()
    }

    #[test]
    fn commuting_split_is_exact() {
        let sys = commuting_system();
        let tau = 0.3;
        let step = split_step(&sys, tau).unwrap();
        let exact = expm(&sys.full_hamiltonian().scale(C64::new(0.0, -tau)));
        assert!((&step - &exact).frobenius_norm() < 1e-12);
    }

    #[test]
    fn zero_coupling_reduces_to_free_evolution() {
        let mut sys = generic_two_qubit(1.0);
        sys.lambda = 0.0;
        let tau = 0.2;
        let step = split_step(&sys, tau).unwrap();
        let free = expm(&sys.free_hamiltonian().scale(C64::new(0.0, -tau)));
        assert!((&step - &free).frobenius_norm() < 1e-13);
    }

    #[test]
    fn split_step_local_error_order() {
        // Fit slope of log-error vs log-tau; the corrected step is O(tau^3)
        // locally, so the slope must be at least 2.7.
        let sys = generic_two_qubit(1.0);
        let taus = [0.2, 0.1, 0.05];
        let errs: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                let step = split_step(&sys, tau).unwrap();
                let exact = expm(&sys.full_hamiltonian().scale(C64::new(0.0, -tau)));
                spectral_norm(&(&step - &exact))
            })
            .collect();
        // Least-squares slope over the three points.
        let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let xm = xs.iter().sum::<f64>() / 3.0;
        let ym = ys.iter().sum::<f64>() / 3.0;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        assert!(slope >= 2.7, "local order slope {slope} below 2.7");
    }

    #[test]
    fn evolve_scaled_n0_is_single_step() {
        let sys = generic_two_qubit(1.0);
        let sched = SplitSchedule::new(0.4, 0).unwrap();
        let a = evolve_scaled(&sys, &sched).unwrap();
        let b = split_step(&sys, 0.4).unwrap();
        assert!((&a - &b).frobenius_norm() < 1e-14);
    }

    #[test]
    fn commuting_case_exact_for_every_n() {
        let sys = commuting_system();
        for n in [0, 2, 5] {
            let sched = SplitSchedule::new(1.0, n).unwrap();
            assert!(trotter_error(&sys, &sched).unwrap() < 1e-12);
        }
    }

    #[test]
    fn repeated_squaring_matches_literal_product() {
        let sys = generic_two_qubit(1.0);
        let sched = SplitSchedule::new(1.0, 6).unwrap();
        let squared = evolve_scaled(&sys, &sched).unwrap();
        let step = split_step(&sys, sched.tau()).unwrap();
        let mut literal = Operator::identity(4);
        for _ in 0..sched.slices() {
            literal = &literal * &step;
        }
        assert!((&squared - &literal).frobenius_norm() < 1e-10);
    }

    #[test]
    fn unitarity_of_split_product() {
        let sys = generic_two_qubit(1.0);
        let sched = SplitSchedule::new(1.0, 5).unwrap();
        let u = evolve_scaled(&sys, &sched).unwrap();
        let gram = &u.adjoint() * &u;
        assert!((&gram - &Operator::identity(4)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn error_monotone_in_n_and_ratio() {
        let sys = generic_two_qubit(1.0);
        let errs: Vec<f64> = (4..=8)
            .map(|n| trotter_error(&sys, &SplitSchedule::new(1.0, n).unwrap()).unwrap())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] * 1.0001, "error not non-increasing: {errs:?}");
            let ratio = w[0] / w[1];
            assert!(
                (3.5..=4.5).contains(&ratio),
                "ratio {ratio} outside [3.5, 4.5]: {errs:?}"
            );
        }
    }

    #[test]
    fn small_coupling_limit() {
        // Error against the free propagator scales linearly in lambda.
        let sched = SplitSchedule::new(1.0, 6).unwrap();
        let err_of = |lambda: f64| {
            let sys = generic_two_qubit(lambda);
            let u = evolve_scaled(&sys, &sched).unwrap();
            let free = expm(&sys.free_hamiltonian().scale(C64::new(0.0, -1.0)));
            spectral_norm(&(&u - &free))
        };
        let e1 = err_of(1e-3);
        let e2 = err_of(5e-4);
        let ratio = e1 / e2;
        assert!((1.8..=2.2).contains(&ratio), "lambda scaling ratio {ratio}");
    }

    #[test]
    fn oracle_dim_guard() {
        let big = Operator::identity(32);
        let sys = BipartiteSystem::new(
            32,
            32,
            big.clone(),
            big.clone(),
            Operator::identity(1024),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            trotter_error(&sys, &SplitSchedule::new(1.0, 2).unwrap()),
            Err(Error::OracleInfeasible { .. })
        ));
    }
}
