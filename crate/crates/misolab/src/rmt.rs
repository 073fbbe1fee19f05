//! Fixed-point solvers and scalar special functions underlying every
//! deterministic equivalent in the crate.
//!
//! The central object is the weighted resolvent trace
//! `m(z) = (1/N) tr Q (B - zI)^{-1}` of a random matrix
//! `B = R^{1/2} X^H T X R^{1/2} + S`, whose deterministic equivalent is
//! parameterized by the solution `e(z)` of a scalar fixed-point equation.
//! Everything here is pure and safe to call concurrently.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Default absolute tolerance for fixed-point iterations.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration budget for fixed-point iterations.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Model for the deterministic equivalent of `(1/N) tr Q (B - zI)^{-1}` with
/// `B = R^{1/2} X^H T X R^{1/2} + S` and `X` of i.i.d. variance-`1/N` entries.
///
/// `R`, `S` are symmetric nonnegative definite, `Q` symmetric positive
/// definite (all `N x N`), `T` is the diagonal of an `n x n` nonnegative
/// diagonal matrix, `beta = N/n`, and `z < 0` is the evaluation point.
#[derive(Debug, Clone)]
pub struct GeneralDeModel {
    pub r: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub t: DVector<f64>,
    pub beta: f64,
    pub z: f64,
}

/// Converged output of [`GeneralDeModel::solve`].
#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    /// Solution of the scalar fixed point; positive for `z < 0`.
    pub e: f64,
    /// Companion weight `c = (1/beta) (1/n) tr T (I + eT)^{-1}`.
    pub c: f64,
    /// Deterministic equivalent `(1/N) tr Q (cR + S - zI)^{-1}`.
    pub m: f64,
    /// Iterations consumed.
    pub iterations: usize,
    /// `|e - (1/N) tr R (cR + S - zI)^{-1}|` at the returned `(e, c)`.
    pub residual: f64,
}

impl GeneralDeModel {
    /// Builds a model after validating all matrix and scalar invariants.
    pub fn new(
        r: DMatrix<f64>,
        s: DMatrix<f64>,
        q: DMatrix<f64>,
        t: DVector<f64>,
        beta: f64,
        z: f64,
    ) -> Result<Self> {
        let model = GeneralDeModel { r, s, q, t, beta, z };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let n = self.r.nrows();
        if n == 0 || self.t.is_empty() {
            return Err(Error::InvalidModel("empty matrix or diagonal".into()));
        }
        for (name, mat) in [("R", &self.r), ("S", &self.s), ("Q", &self.q)] {
            if mat.nrows() != n || mat.ncols() != n {
                return Err(Error::InvalidModel(format!("{name} must be {n}x{n}")));
            }
            if !is_symmetric(mat) {
                return Err(Error::InvalidModel(format!("{name} is not symmetric")));
            }
        }
        if min_eigenvalue(&self.r) < -sym_tol(&self.r) {
            return Err(Error::InvalidModel("R is not nonnegative definite".into()));
        }
        if min_eigenvalue(&self.s) < -sym_tol(&self.s) {
            return Err(Error::InvalidModel("S is not nonnegative definite".into()));
        }
        if Cholesky::new(self.q.clone()).is_none() {
            return Err(Error::InvalidModel("Q is not positive definite".into()));
        }
        if self.t.iter().any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(Error::InvalidModel("T has a negative or non-finite entry".into()));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidModel("beta must be positive and finite".into()));
        }
        if !(self.z < 0.0) {
            return Err(Error::InvalidModel("z must be strictly negative".into()));
        }
        Ok(())
    }

    /// `c(e) = (1/beta) (1/n) tr T (I + eT)^{-1}`.
    fn companion(&self, e: f64) -> f64 {
        let n = self.t.len() as f64;
        let sum: f64 = self.t.iter().map(|&t| t / (1.0 + e * t)).sum();
        sum / (self.beta * n)
    }

    /// Cholesky factor of `cR + S - zI`; positive definite for `z < 0`, `c >= 0`.
    fn resolvent_factor(&self, c: f64) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        let n = self.r.nrows();
        let mut a = &self.r * c + &self.s;
        for i in 0..n {
            a[(i, i)] -= self.z;
        }
        Cholesky::new(a).ok_or_else(|| {
            Error::InvalidModel("cR + S - zI is not positive definite".into())
        })
    }

    /// Solves the fixed point for `e(z)` and evaluates the deterministic
    /// equivalent `m`, starting from `e0 = -1/z` (the upper end of the
    /// admissible initialization interval).
    ///
    /// Convergence requires both the step `|e_{k+1} - e_k|` and the
    /// defining-equation residual to fall below `tol`.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<FixedPointSolution> {
        self.solve_from(-1.0 / self.z, tol, max_iter)
    }

    /// As [`solve`](Self::solve) with an explicit start `e0 in (0, -1/z]`.
    pub fn solve_from(&self, e0: f64, tol: f64, max_iter: usize) -> Result<FixedPointSolution> {
        self.validate()?;
        if !(tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        let upper = -1.0 / self.z;
        if !(e0 > 0.0 && e0 <= upper) {
            return Err(Error::InvalidInput(format!(
                "e0 must lie in (0, {upper}], got {e0}"
            )));
        }

        let n = self.r.nrows() as f64;
        let mut e = e0;
        for k in 1..=max_iter {
            let c = self.companion(e);
            let chol = self.resolvent_factor(c)?;
            let inv = chol.inverse();
            let e_next = frob_inner(&self.r, &inv) / n;
            let step = (e_next - e).abs();
            e = e_next;
            if step <= tol {
                // Residual with the companion re-evaluated at the final e.
                let c = self.companion(e);
                let chol = self.resolvent_factor(c)?;
                let inv = chol.inverse();
                let residual = (e - frob_inner(&self.r, &inv) / n).abs();
                if residual <= tol {
                    let m = frob_inner(&self.q, &inv) / n;
                    return Ok(FixedPointSolution {
                        e,
                        c,
                        m,
                        iterations: k,
                        residual,
                    });
                }
            }
        }
        let c = self.companion(e);
        let inv = self.resolvent_factor(c)?.inverse();
        let residual = (e - frob_inner(&self.r, &inv) / n).abs();
        Err(Error::NonConvergence {
            iterations: max_iter,
            residual,
        })
    }
}

/// `z`-derivative of the deterministic equivalent `m(z)` by central finite
/// difference of two solver calls at `z +- h`.
///
/// The closed algebraic derivatives used by the SINR formulas live in
/// [`crate::det_equiv`]; this is the generic fallback for arbitrary models.
pub fn resolvent_derivative(
    model: &GeneralDeModel,
    sol: &FixedPointSolution,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h < model.z.abs()) {
        return Err(Error::InvalidInput(format!(
            "h must satisfy 0 < h < |z| = {}",
            model.z.abs()
        )));
    }
    let shifted = |z: f64| -> Result<f64> {
        let m = GeneralDeModel { z, ..model.clone() };
        // Warm start from the converged e, clamped into the admissible interval.
        let e0 = sol.e.min(-1.0 / z);
        Ok(m.solve_from(e0, DEFAULT_TOL, DEFAULT_MAX_ITER)?.m)
    };
    let plus = shifted(model.z + h)?;
    let minus = shifted(model.z - h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Principal branch of the Lambert-W function: the `w >= -1` solving
/// `w e^w = x`, defined for `x >= -1/e`.
///
/// Halley iteration seeded by the branch-point series near `x = -1/e` and by
/// the log asymptotic for large `x`; relative accuracy around `1e-12` on the
/// roundtrip `w e^w`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp(); // -1/e
    if !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w0 expects finite x, got {x}")));
    }
    if x < branch {
        // Tolerate rounding right at the branch point.
        if x > branch - 1e-15 * branch.abs().max(1.0) {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("lambert_w0 requires x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let q = std::f64::consts::E * x + 1.0; // distance from the branch point
    if q <= 0.0 {
        return Ok(-1.0);
    }
    let p = (2.0 * q).sqrt();
    if q < 2e-4 {
        // Branch-point series; Halley is ill-conditioned this close to -1/e.
        let w = -1.0
            + p * (1.0
                + p * (-1.0 / 3.0
                    + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))));
        return Ok(w);
    }

    let mut w = if x < -0.25 {
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
    } else if x < 3.0 {
        let guess = x * (1.0 - x);
        if guess <= -1.0 {
            -0.99
        } else {
            guess
        }
    } else {
        let l = x.ln();
        l - l.ln()
    };

    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        w -= dw;
        if dw.abs() <= 1e-15 * w.abs().max(1e-3) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

/// Stieltjes transform of the Marcenko-Pastur law evaluated at `z = -alpha`,
/// for a sample covariance matrix with aspect ratio `beta`:
///
/// `m(-alpha) = [beta(1 - alpha) - 1 + d] / (2 alpha beta)` with
/// `d = sqrt(beta^2 alpha^2 + 2 alpha beta (1 + beta) + (1 - beta)^2)`.
pub fn marchenko_pastur_stieltjes(alpha: f64, beta: f64) -> f64 {
    assert!(alpha > 0.0 && beta > 0.0, "alpha and beta must be positive");
    let d = (beta * beta * alpha * alpha + 2.0 * alpha * beta * (1.0 + beta)
        + (1.0 - beta) * (1.0 - beta))
        .sqrt();
    (beta * (1.0 - alpha) - 1.0 + d) / (2.0 * alpha * beta)
}

fn is_symmetric(a: &DMatrix<f64>) -> bool {
    let tol = sym_tol(a);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

fn sym_tol(a: &DMatrix<f64>) -> f64 {
    1e-10 * a.amax().max(1.0)
}

fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// `tr(A B)` for symmetric `A`, `B` of equal size.
fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
