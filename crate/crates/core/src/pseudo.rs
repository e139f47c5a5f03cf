//! (P,Y)-pseudo-Jacobi fields: solutions of `V'' - R V = lambda m(Y)` with
//! `g(V', Y) - g(V, Y') = 0`, `V(0) in P` and
//! `V'(0) + S[V(0)] - lambda Y(0) / g(Y(0), Y(0)) in P^perp`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{integrate_columns, vanishing_instants, FieldBasis, FieldSolution, FocalKind, FocalReport, Forcing};
use crate::linalg::{g_orthogonal_complement, null_space, orthonormal_range};
use crate::problem::MorseSturmProblem;

/// Sign of the `lambda Y(0)/g(Y(0),Y(0))` term in the initial condition,
/// fixed by the Lagrange multiplier of the constraint.
const MULTIPLIER_SIGN: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct PseudoField {
    pub solution: FieldSolution,
    /// Coefficient of `m(Y)` in the forcing; 0 when `Y` is singular.
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoSpaceInfo {
    pub dim: usize,
    /// Parameters `(a, b, lambda)` before the constraint: `dim P + (n - dim P) + 1`.
    pub parameters: usize,
    pub constraint_rank: usize,
    pub y_singular: bool,
}

#[derive(Debug, Clone)]
pub struct PseudoBasis {
    pub fields: Vec<PseudoField>,
    pub info: PseudoSpaceInfo,
}

impl PseudoBasis {
    pub fn as_field_basis(&self, n: usize) -> FieldBasis {
        FieldBasis {
            sigma: 1.0,
            fields: self.fields.iter().map(|f| f.solution.clone()).collect(),
            dim: n,
        }
    }
}

/// Initial data `(V(0), V'(0), lambda)` spanning the pseudo-Jacobi space,
/// orthonormal as vectors of `R^{2n+1}`.
pub(crate) fn pseudo_initial_data(
    problem: &MorseSturmProblem,
    sign: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>, PseudoSpaceInfo)> {
    let n = problem.dim();
    let p = problem.p.dim();
    let perp = g_orthogonal_complement(&problem.g, &problem.p)?;
    if perp.dim() != n - p {
        return Err(Error::Regime("P is degenerate".into()));
    }
    let perp = if p == 0 { DMatrix::identity(n, n) } else { perp.matrix().clone() };
    let (y0, y0p, _) = problem.y.eval_all(0.0);
    let gyy = problem.g.inner(&y0, &y0);
    if !(gyy < 0.0) {
        return Err(Error::NotTimelike { t: 0.0, value: gyy });
    }
    let y_singular = problem.y_is_singular();

    // x = (a, b, lambda) -> (V(0), V'(0), lambda_eff)
    let m = n + 1;
    let mut d = DMatrix::zeros(2 * n + 1, m);
    if p > 0 {
        d.view_mut((0, 0), (n, p)).copy_from(problem.p.matrix());
        d.view_mut((n, 0), (n, p)).copy_from(&(-problem.shape_p()));
    }
    d.view_mut((n, p), (n, n - p)).copy_from(&perp);
    d.view_mut((n, n), (n, 1)).copy_from(&(&y0 * (sign / gyy)));
    if !y_singular {
        d[(2 * n, n)] = 1.0;
    }

    let g = problem.g.matrix();
    let gy0 = g * &y0;
    let gy0p = g * &y0p;
    let row = DMatrix::from_fn(1, m, |_, j| {
        let v0 = d.view((0, j), (n, 1));
        let v0p = d.view((n, j), (n, 1));
        v0p.dot(&gy0) - v0.dot(&gy0p)
    });
    let scale = d.amax() * (gy0.norm() + gy0p.norm());
    let (kernel, constraint_rank) = if row.amax() <= crate::jacobi::CONSTRAINT_TOL * scale {
        (DMatrix::identity(m, m), 0)
    } else {
        (null_space(&row, crate::jacobi::CONSTRAINT_TOL), 1)
    };
    let data = orthonormal_range(&(&d * kernel), problem.tolerances.rank_tol);
    let k = data.ncols();
    let x0 = data.rows(0, n).into_owned();
    let v0 = data.rows(n, n).into_owned();
    let lambdas: Vec<f64> = (0..k).map(|j| data[(2 * n, j)]).collect();
    let info = PseudoSpaceInfo { dim: k, parameters: m, constraint_rank, y_singular };
    Ok((x0, v0, lambdas, info))
}

fn basis_with_sign(problem: &MorseSturmProblem, sign: f64) -> Result<PseudoBasis> {
    let (x0, v0, lambdas, info) = pseudo_initial_data(problem, sign)?;
    let forcing = if lambdas.iter().all(|l| *l == 0.0) { Forcing::Zero } else { Forcing::MofY(1.0) };
    let sols = integrate_columns(problem, &x0, &v0, &forcing, &lambdas, 1.0)?;
    let fields = sols.into_iter().zip(lambdas).map(|(solution, lambda)| PseudoField { solution, lambda }).collect();
    Ok(PseudoBasis { fields, info })
}

/// Basis of the pseudo-Jacobi fields on `[0, 1]`; its dimension is reported
/// in `info` (`n`, or `n - 1` when `Y` is singular and the constraint bites).
pub fn pseudo_basis(problem: &MorseSturmProblem) -> Result<PseudoBasis> {
    problem.require_regime()?;
    basis_with_sign(problem, MULTIPLIER_SIGN)
}

/// Instants in `[t_lo, 1]` where a nonzero pseudo-Jacobi field vanishes.
pub fn pseudo_focal_instants(problem: &MorseSturmProblem, t_lo: f64) -> Result<FocalReport> {
    let basis = pseudo_basis(problem)?;
    vanishing_instants(problem, &basis.as_field_basis(problem.dim()), t_lo, FocalKind::PseudoFocal)
}

/// Pseudo-focal report computed with the opposite sign of the multiplier
/// term; only differs from [`pseudo_focal_instants`] when `Y(0)` is not
/// orthogonal to `P`. Kept for cross-checks against the index form.
pub fn pseudo_focal_instants_flipped(problem: &MorseSturmProblem, t_lo: f64) -> Result<FocalReport> {
    problem.require_regime()?;
    let basis = basis_with_sign(problem, -MULTIPLIER_SIGN)?;
    vanishing_instants(problem, &basis.as_field_basis(problem.dim()), t_lo, FocalKind::PseudoFocal)
}

/// `|g(m(Y)(t), Y(t))|` maximised over `count` uniform nodes.
pub fn max_m_y_pairing(problem: &MorseSturmProblem, count: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        let y: DVector<f64> = problem.y.eval(t);
        worst = worst.max(problem.g.inner(&problem.m_of_y(t)?, &y).abs());
    }
    Ok(worst)
}
