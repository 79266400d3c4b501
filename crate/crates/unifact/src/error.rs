use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error(
        "closure overflow: algebra dimension would exceed {max_dim} \
         (consider the split-step route); partial basis has {found} elements"
    )]
    ClosureOverflow { max_dim: usize, found: usize },

    #[error("closure residual {residual:.3e} exceeds tolerance {tol:.3e} for commutator [B_{i}, B_{j}]")]
    ClosureResidual {
        i: usize,
        j: usize,
        residual: f64,
        tol: f64,
    },

    #[error("factorization breakdown at t = {t}: coordinate-change matrix condition number {cond:.3e} exceeds {cond_max:.3e}")]
    FactorizationBreakdown { t: f64, cond: f64, cond_max: f64 },

    #[error("step too large: step-halving discrepancy {discrepancy:.3e} exceeds {tol:.3e}; retry with a smaller step")]
    StepTooLarge { discrepancy: f64, tol: f64 },

    #[error("time {t} outside propagator grid [{t0}, {t1}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },

    #[error("dimension {dim} exceeds oracle limit {max}")]
    OracleInfeasible { dim: usize, max: usize },

    #[error(
        "Fock cutoff leakage: top-level population {population:.3e} exceeds {tol:.3e} at t = {t}; \
         increase the cutoff to at least {suggested}"
    )]
    CutoffLeakage {
        t: f64,
        population: f64,
        tol: f64,
        suggested: usize,
    },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
