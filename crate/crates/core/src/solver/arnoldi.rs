//! One restart cycle of CB-GMRES: Arnoldi with classical Gram-Schmidt over
//! the compressed basis, and the incrementally rotated least-squares
//! problem.

use crate::basis::{KrylovBasis, StorageFormat};
use crate::sparsela::{norm2, CsrMatrix};

use super::givens::GivensRotation;
use super::SolverError;

/// Result of orthogonalizing one vector against the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Orthogonalization {
    /// Projection coefficients, re-orthogonalization correction included.
    pub h: Vec<f64>,
    /// Norm of the orthogonalized vector.
    pub h_next: f64,
    /// Norm of the vector before orthogonalization.
    pub omega: f64,
    pub reorthogonalized: bool,
    /// `h_next` is zero or still below `eta * omega` after the second pass.
    pub breakdown: bool,
}

/// Classical Gram-Schmidt of `w` against every readable column of `basis`,
/// with one re-orthogonalization pass when the norm drops below
/// `eta * omega`. `w` is overwritten with the orthogonalized vector.
pub fn orthogonalize(basis: &KrylovBasis, w: &mut [f64], eta: f64) -> Result<Orthogonalization, SolverError> {
    let k = basis.count();
    let omega = norm2(w);
    let mut h = vec![0.0; k];
    project_out(basis, w, &mut h)?;
    let mut h_next = norm2(w);
    let mut reference = omega;
    let mut reorthogonalized = false;
    if h_next < eta * reference {
        let mut u = vec![0.0; k];
        project_out(basis, w, &mut u)?;
        for (h, u) in h.iter_mut().zip(&u) {
            *h += u;
        }
        reference = h_next;
        h_next = norm2(w);
        reorthogonalized = true;
    }
    let breakdown = h_next == 0.0 || h_next < eta * reference;
    Ok(Orthogonalization { h, h_next, omega, reorthogonalized, breakdown })
}

/// `coeffs := V^T w` (all against the same `w`), then `w := w - V coeffs`.
fn project_out(basis: &KrylovBasis, w: &mut [f64], coeffs: &mut [f64]) -> Result<(), SolverError> {
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c = basis.dot(i, w)?;
    }
    for (i, &c) in coeffs.iter().enumerate() {
        basis.axpy(i, c, w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArnoldiOutcome {
    /// A new basis vector was appended.
    Continue,
    /// The cycle must end after this step; no vector was appended.
    Breakdown,
}

/// Working state of one restart cycle with room for `restart` steps.
#[derive(Debug, Clone)]
pub struct GmresState {
    basis: KrylovBasis,
    restart: usize,
    eta: f64,
    /// Unrotated Hessenberg matrix, column-major, `(restart + 1) x restart`.
    hessenberg: Vec<f64>,
    /// Hessenberg matrix with all rotations so far applied.
    triangular: Vec<f64>,
    rotations: Vec<GivensRotation>,
    g: Vec<f64>,
    beta: f64,
    steps: usize,
    /// Latest basis vector at full precision; the operator is applied to it.
    v: Vec<f64>,
    w: Vec<f64>,
}

impl GmresState {
    pub fn new(n: usize, restart: usize, format: StorageFormat, eta: f64) -> Result<Self, SolverError> {
        if restart == 0 {
            return Err(SolverError::InvalidConfig("restart must be at least 1".into()));
        }
        let ld = restart + 1;
        Ok(Self {
            basis: KrylovBasis::new(n, ld, format)?,
            restart,
            eta,
            hessenberg: vec![0.0; ld * restart],
            triangular: vec![0.0; ld * restart],
            rotations: Vec::with_capacity(restart),
            g: vec![0.0; ld],
            beta: 0.0,
            steps: 0,
            v: vec![0.0; n],
            w: vec![0.0; n],
        })
    }

    /// Begins a cycle from residual `r0`: `beta = |r0|`, `V = [r0 / beta]`.
    pub fn start(&mut self, r0: &[f64]) -> Result<f64, SolverError> {
        let beta = norm2(r0);
        if !(beta.is_finite() && beta > 0.0) {
            return Err(SolverError::Breakdown { iteration: 0, reason: format!("initial residual norm is {beta}") });
        }
        self.basis.clear();
        self.hessenberg.fill(0.0);
        self.triangular.fill(0.0);
        self.rotations.clear();
        self.g.fill(0.0);
        self.g[0] = beta;
        self.beta = beta;
        self.steps = 0;
        for (v, &r) in self.v.iter_mut().zip(r0) {
            *v = r / beta;
        }
        self.basis.write_vector(0, &self.v)?;
        Ok(beta)
    }

    fn ld(&self) -> usize {
        self.restart + 1
    }

    /// Extends the Krylov space by one vector: `w = A v`, orthogonalize,
    /// fill column `steps` of the Hessenberg matrix and append `w / h` to
    /// the basis unless the cycle breaks down.
    pub fn arnoldi_step(&mut self, a: &CsrMatrix) -> Result<ArnoldiOutcome, SolverError> {
        let j = self.steps;
        if j >= self.restart || self.basis.count() != j + 1 {
            return Err(SolverError::InvalidConfig(format!(
                "arnoldi step {j} with {} basis vectors and restart {}",
                self.basis.count(),
                self.restart
            )));
        }
        a.spmv_into(&self.v, &mut self.w)?;
        let ortho = orthogonalize(&self.basis, &mut self.w, self.eta)?;
        if !ortho.h_next.is_finite() || ortho.h.iter().any(|h| !h.is_finite()) {
            return Err(SolverError::Breakdown { iteration: j, reason: "non-finite Hessenberg entry".into() });
        }
        let ld = self.ld();
        let column = &mut self.hessenberg[j * ld..(j + 1) * ld];
        column[..=j].copy_from_slice(&ortho.h);
        column[j + 1] = ortho.h_next;
        self.steps += 1;
        if ortho.breakdown {
            return Ok(ArnoldiOutcome::Breakdown);
        }
        let inv = 1.0 / ortho.h_next;
        for (v, &w) in self.v.iter_mut().zip(&self.w) {
            *v = w * inv;
        }
        self.basis.write_vector(j + 1, &self.v)?;
        Ok(ArnoldiOutcome::Continue)
    }

    /// Rotates the newest Hessenberg column into triangular form and returns
    /// the implicit residual norm `|g[steps]|`.
    pub fn update_least_squares(&mut self) -> f64 {
        let j = self.steps - 1;
        debug_assert_eq!(self.rotations.len(), j);
        let ld = self.ld();
        let column = &mut self.triangular[j * ld..(j + 1) * ld];
        column[..j + 2].copy_from_slice(&self.hessenberg[j * ld..j * ld + j + 2]);
        for (i, rot) in self.rotations.iter().enumerate() {
            (column[i], column[i + 1]) = rot.apply(column[i], column[i + 1]);
        }
        let rot = GivensRotation::annihilating(column[j], column[j + 1]);
        (column[j], column[j + 1]) = rot.apply(column[j], column[j + 1]);
        column[j + 1] = 0.0;
        (self.g[j], self.g[j + 1]) = rot.apply(self.g[j], 0.0);
        self.rotations.push(rot);
        self.g[j + 1].abs()
    }

    /// `x0 + V y` with `y` the least-squares minimizer of the completed steps.
    pub fn form_solution(&self, x0: &[f64]) -> Result<Vec<f64>, SolverError> {
        let k = self.rotations.len();
        if k == 0 {
            return Err(SolverError::InvalidConfig("no completed steps to form a solution from".into()));
        }
        let ld = self.ld();
        let r = |i: usize, j: usize| self.triangular[j * ld + i];
        let mut y = self.g[..k].to_vec();
        for i in (0..k).rev() {
            let diag = r(i, i);
            if diag == 0.0 {
                return Err(SolverError::Breakdown {
                    iteration: i,
                    reason: "singular triangular factor".into(),
                });
            }
            let mut sum = y[i];
            for j in i + 1..k {
                sum -= r(i, j) * y[j];
            }
            y[i] = sum / diag;
        }
        let mut x = x0.to_vec();
        for (i, &yi) in y.iter().enumerate() {
            self.basis.axpy(i, -yi, &mut x)?;
        }
        Ok(x)
    }

    pub fn basis(&self) -> &KrylovBasis {
        &self.basis
    }

    /// Completed Arnoldi steps in this cycle.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Entry `(i, j)` of the unrotated Hessenberg matrix.
    pub fn hessenberg(&self, i: usize, j: usize) -> f64 {
        self.hessenberg[j * self.ld() + i]
    }

    /// Entry `(i, j)` of the rotated, upper-triangular Hessenberg matrix.
    pub fn triangular(&self, i: usize, j: usize) -> f64 {
        self.triangular[j * self.ld() + i]
    }

    /// Rotated right-hand side `g`.
    pub fn rhs(&self) -> &[f64] {
        &self.g
    }
}
