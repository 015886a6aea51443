//! Restarted compressed-basis GMRES (CB-GMRES).
//!
//! Krylov vectors are stored through a [`KrylovBasis`] in the configured
//! [`StorageFormat`]; everything else is binary64. No preconditioner is
//! applied. Convergence is only ever declared on the explicitly recomputed
//! relative residual norm `|b - A x| / |b|`; the implicit estimate from the
//! rotated least-squares problem merely ends a cycle early.
//!
//! [`KrylovBasis`]: crate::basis::KrylovBasis

mod arnoldi;
mod givens;

pub use arnoldi::{orthogonalize, ArnoldiOutcome, GmresState, Orthogonalization};
pub use givens::GivensRotation;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::basis::{BasisError, StorageFormat};
use crate::sparsela::{norm2, CsrMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("solver breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: String },
    #[error("right-hand side has zero norm")]
    ZeroRhs,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    /// Arnoldi steps per cycle.
    pub restart: usize,
    pub target_rrn: f64,
    pub max_total_iterations: usize,
    /// Re-orthogonalization threshold on `|w_after| / |w_before|`.
    pub eta: f64,
    pub storage_format: StorageFormat,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            restart: 100,
            target_rrn: 1e-10,
            max_total_iterations: 20_000,
            eta: std::f64::consts::FRAC_1_SQRT_2,
            storage_format: StorageFormat::F64,
        }
    }
}

impl GmresConfig {
    pub fn with_format(storage_format: StorageFormat) -> Self {
        Self { storage_format, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.restart == 0 {
            return Err(SolverError::InvalidConfig("restart must be at least 1".into()));
        }
        if !(self.target_rrn > 0.0) {
            return Err(SolverError::InvalidConfig(format!("target RRN {} must be positive", self.target_rrn)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(SolverError::InvalidConfig(format!("eta {} must lie in (0, 1)", self.eta)));
        }
        Ok(())
    }
}

/// One point of the residual history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRecord {
    pub iteration: usize,
    pub rrn: f64,
    /// Recomputed from `b - A x` rather than estimated.
    pub explicit: bool,
}

/// Implicit estimate and explicit value at the end of a cycle. The history
/// keeps the explicit value; the pair is kept here so the jump between the
/// two stays visible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleEnd {
    pub iteration: usize,
    pub implicit_rrn: f64,
    pub explicit_rrn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub converged: bool,
    pub total_iterations: usize,
    pub restarts: usize,
    /// Explicitly computed relative residual norm of `x`.
    pub final_rrn: f64,
    /// Strictly increasing in `iteration`. Iteration 0 and every cycle end
    /// are explicit records, all others implicit.
    pub residual_history: Vec<ResidualRecord>,
    pub cycle_ends: Vec<CycleEnd>,
    pub elapsed: Duration,
    pub x: Vec<f64>,
}

/// Relative residual norm `|b - A x| / |b|`.
pub fn rrn(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64, SolverError> {
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Err(SolverError::ZeroRhs);
    }
    Ok(norm2(&residual(a, x, b)?) / b_norm)
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<Vec<f64>, SolverError> {
    let mut r = a.spmv(x)?;
    if b.len() != r.len() {
        return Err(LinalgError::DimensionMismatch { expected: r.len(), got: b.len() }.into());
    }
    for (r, &b) in r.iter_mut().zip(b) {
        *r = b - *r;
    }
    Ok(r)
}

/// Solves `A x = b` from `x0` with restarted CB-GMRES.
pub fn gmres_solve(a: &CsrMatrix, b: &[f64], x0: &[f64], cfg: &GmresConfig) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: a.n_cols() }.into());
    }
    for len in [b.len(), x0.len()] {
        if len != n {
            return Err(LinalgError::DimensionMismatch { expected: n, got: len }.into());
        }
    }
    let started = Instant::now();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(SolveResult {
            converged: true,
            total_iterations: 0,
            restarts: 0,
            final_rrn: 0.0,
            residual_history: vec![ResidualRecord { iteration: 0, rrn: 0.0, explicit: true }],
            cycle_ends: Vec::new(),
            elapsed: started.elapsed(),
            x: vec![0.0; n],
        });
    }

    let mut x = x0.to_vec();
    let mut r = residual(a, &x, b)?;
    let mut current = norm2(&r) / b_norm;
    let mut history = vec![ResidualRecord { iteration: 0, rrn: current, explicit: true }];
    let mut cycle_ends = Vec::new();
    let mut state = GmresState::new(n, cfg.restart, cfg.storage_format, cfg.eta)?;
    let mut total = 0;
    let mut cycles = 0usize;

    while current > cfg.target_rrn && total < cfg.max_total_iterations {
        cycles += 1;
        state.start(&r)?;
        let mut estimate;
        loop {
            let outcome = state.arnoldi_step(a).map_err(|e| at_iteration(e, total))?;
            total += 1;
            estimate = state.update_least_squares() / b_norm;
            history.push(ResidualRecord { iteration: total, rrn: estimate, explicit: false });
            if outcome == ArnoldiOutcome::Breakdown
                || estimate <= cfg.target_rrn
                || state.steps() == cfg.restart
                || total >= cfg.max_total_iterations
            {
                break;
            }
        }
        x = state.form_solution(&x).map_err(|e| at_iteration(e, total))?;
        r = residual(a, &x, b)?;
        current = norm2(&r) / b_norm;
        if !current.is_finite() {
            return Err(SolverError::Breakdown { iteration: total, reason: "non-finite residual".into() });
        }
        *history.last_mut().expect("cycle recorded an iteration") =
            ResidualRecord { iteration: total, rrn: current, explicit: true };
        cycle_ends.push(CycleEnd { iteration: total, implicit_rrn: estimate, explicit_rrn: current });
    }

    Ok(SolveResult {
        converged: current <= cfg.target_rrn,
        total_iterations: total,
        restarts: cycles.saturating_sub(1),
        final_rrn: current,
        residual_history: history,
        cycle_ends,
        elapsed: started.elapsed(),
        x,
    })
}

/// Rewrites breakdown positions from cycle-local to global iteration counts.
fn at_iteration(err: SolverError, total: usize) -> SolverError {
    match err {
        SolverError::Breakdown { reason, .. } => SolverError::Breakdown { iteration: total, reason },
        other => other,
    }
}
