//! Deterministic test problems.

use super::{norm2, CsrMatrix, LinalgError};

/// Right-hand side and reference solution of a generated system.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub b: Vec<f64>,
    pub x_sol: Vec<f64>,
}

/// `s[i] = sin(i)` for `i = 0..n`, `x_sol = s / |s|`, `b = A x_sol`.
///
/// Solves start from the zero vector.
pub fn generate_problem(a: &CsrMatrix) -> Result<Problem, LinalgError> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(LinalgError::InvalidProblem(format!("matrix is {}x{}, not square", n, a.n_cols())));
    }
    if n < 2 {
        return Err(LinalgError::InvalidProblem(format!("need at least 2 unknowns, got {n}")));
    }
    let s: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let norm = norm2(&s);
    let x_sol: Vec<f64> = s.iter().map(|v| v / norm).collect();
    let b = a.spmv(&x_sol)?;
    Ok(Problem { b, x_sol })
}

/// First-order upwind 5-point convection-diffusion operator on an
/// `nx x ny` interior grid with Dirichlet boundaries, scaled by `h^2`.
///
/// The flow runs along `(1, 1)` with grid Peclet number `peclet`, giving
/// the stencil `diag = 4 + 2p`, west/south `-(1 + p)`, east/north `-1`.
/// Rows are weakly diagonally dominant, strictly so next to the boundary.
/// `peclet = 0` is the symmetric 5-point Laplacian.
pub fn gen_convdiff(nx: usize, ny: usize, peclet: f64) -> Result<CsrMatrix, LinalgError> {
    if nx < 2 || ny < 2 {
        return Err(LinalgError::InvalidProblem(format!("grid {nx}x{ny} is smaller than 2x2")));
    }
    if !peclet.is_finite() || peclet < 0.0 {
        return Err(LinalgError::InvalidProblem(format!("peclet {peclet} must be finite and non-negative")));
    }
    let n = nx * ny;
    let upwind = -(1.0 + peclet);
    let mut row_ptrs = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(5 * n);
    let mut values = Vec::with_capacity(5 * n);
    row_ptrs.push(0);
    for iy in 0..ny {
        for ix in 0..nx {
            let k = iy * nx + ix;
            // ascending column order: south, west, centre, east, north
            let neighbours = [
                (iy > 0).then(|| (k - nx, upwind)),
                (ix > 0).then(|| (k - 1, upwind)),
                Some((k, 4.0 + 2.0 * peclet)),
                (ix + 1 < nx).then(|| (k + 1, -1.0)),
                (iy + 1 < ny).then(|| (k + nx, -1.0)),
            ];
            for (j, v) in neighbours.into_iter().flatten() {
                col_idx.push(j);
                values.push(v);
            }
            row_ptrs.push(col_idx.len());
        }
    }
    CsrMatrix::new(n, n, row_ptrs, col_idx, values)
}

/// Scales row `i` by `10^(-decades * i / (n - 1))`, so row magnitudes span
/// `decades` orders of magnitude and vary smoothly between neighbours.
pub fn scale_rows_geometric(a: &CsrMatrix, decades: f64) -> Result<CsrMatrix, LinalgError> {
    let n = a.n_rows();
    let denom = n.saturating_sub(1).max(1) as f64;
    let factors: Vec<f64> = (0..n).map(|i| 10f64.powf(-decades * i as f64 / denom)).collect();
    let mut scaled = a.clone();
    scaled.scale_rows(&factors)?;
    Ok(scaled)
}
