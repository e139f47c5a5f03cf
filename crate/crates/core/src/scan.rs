//! Index functions `mu` (on `H*`) and `mu0` (on `H0`) along `sigma`, and the
//! verification of the index theorems and of the distribution properties of
//! focal and pseudo-focal instants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_form::{epsilon_from, index_unchecked, star_correction, two_endpoint_index, IndexResult, SpaceKind};
use crate::jacobi::{multiplicity_at, p_jacobi_basis, vanishing_instants, FocalKind, FocalReport, DEFAULT_T_LO};
use crate::linalg::Inertia;
use crate::problem::{MorseSturmProblem, Regime};
use crate::pseudo::pseudo_basis;

/// Left end of the sigma grid; the index vanishes on a short initial portion.
pub const SIGMA_MIN: f64 = 1e-2;

/// Instants closer than this to `sigma = 1` count as lying at 1.
pub const ENDPOINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub sigma: f64,
    pub nullity0: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexScan {
    pub regime: Regime,
    pub mesh_size: usize,
    pub grid: Vec<f64>,
    pub mu: Vec<usize>,
    pub mu0: Vec<usize>,
    pub nullity0: Vec<usize>,
    pub focal: FocalReport,
    pub pseudo_focal: FocalReport,
    /// `H0` nullity evaluated at each pseudo-focal instant in `(sigma_min, 1)`.
    pub degeneracies: Vec<Degeneracy>,
}

impl IndexScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,mu,mu0,nullity0\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!("{},{},{},{}\n", self.grid[i], self.mu[i], self.mu0[i], self.nullity0[i]));
        }
        out
    }

    pub fn spacing(&self) -> f64 {
        if self.grid.len() < 2 {
            0.0
        } else {
            self.grid[1] - self.grid[0]
        }
    }
}

fn uniform_grid(size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::Schema("grid needs at least two points".into()));
    }
    Ok((0..size)
        .map(|i| (SIGMA_MIN * (size - 1 - i) as f64 + i as f64) / (size - 1) as f64)
        .collect())
}

/// Sweeps `grid_size` uniform values of `sigma` in `[sigma_min, 1]`.
pub fn scan(problem: &MorseSturmProblem, grid_size: usize, mesh: usize) -> Result<IndexScan> {
    let regime = problem.require_regime()?;
    let grid = uniform_grid(grid_size)?;
    let (mut mu, mut mu0, mut nullity0) = (vec![], vec![], vec![]);
    for &s in &grid {
        let star = index_unchecked(problem, s, mesh, SpaceKind::HStar)?;
        let zero = index_unchecked(problem, s, mesh, SpaceKind::H0)?;
        mu.push(star.n_minus);
        mu0.push(zero.n_minus);
        nullity0.push(zero.nullity);
    }
    let jac = p_jacobi_basis(problem, 1.0)?;
    let focal = vanishing_instants(problem, &jac, DEFAULT_T_LO, FocalKind::Focal)?;
    let pb = pseudo_basis(problem)?;
    let pseudo_focal = vanishing_instants(problem, &pb.as_field_basis(problem.dim()), DEFAULT_T_LO, FocalKind::PseudoFocal)?;
    let mut degeneracies = Vec::new();
    for inst in &pseudo_focal.instants {
        if inst.t0 > SIGMA_MIN && inst.t0 < 1.0 - ENDPOINT_TOL {
            let r = index_unchecked(problem, inst.t0, mesh, SpaceKind::H0)?;
            degeneracies.push(Degeneracy { sigma: inst.t0, nullity0: r.nullity });
        }
    }
    Ok(IndexScan { regime, mesh_size: mesh, grid, mu, mu0, nullity0, focal, pseudo_focal, degeneracies })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equality {
    pub lhs: usize,
    pub rhs: usize,
    pub pass: bool,
}

impl Equality {
    fn new(lhs: usize, rhs: usize) -> Self {
        Equality { lhs, rhs, pass: lhs == rhs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoEndpointCheck {
    /// Index of the two-endpoint form.
    pub lhs: usize,
    /// `mu0(1) + n_-(F on J_Q)`.
    pub rhs: usize,
    pub correction: Inertia,
    pub hypothesis_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub id: String,
    pub applicable: bool,
    /// Observations are reported but never fail the verification.
    pub asserted: bool,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub regime: Regime,
    pub mesh_size: usize,
    pub grid_size: usize,
    /// `mu0(1)` against the pseudo-focal count on `(0, 1)`.
    pub index_theorem: Equality,
    pub nullity_at_one: usize,
    pub two_endpoint: Option<TwoEndpointCheck>,
    /// Singular `Y` with `Y(0)` orthogonal to `P`: `mu(1)` against the focal
    /// count on `(0, 1)` plus the endpoint correction on all Jacobi fields.
    pub singular_reduction: Option<Equality>,
    pub epsilon: usize,
    /// `mu0(1) - mu0(sigma_min)` against the summed nullities at interior degeneracies.
    pub jump_sum: Equality,
    pub properties: Vec<PropertyCheck>,
    pub all_pass: bool,
}

/// Grid indices `i >= 1` where `f[i] != f[i - 1]`, with the signed jump.
fn jumps(f: &[usize]) -> Vec<(usize, i64)> {
    (1..f.len()).filter(|&i| f[i] != f[i - 1]).map(|i| (i, f[i] as i64 - f[i - 1] as i64)).collect()
}

/// Whether `t` lies within one cell of the grid interval `(grid[i-1], grid[i]]`.
fn near_jump(grid: &[f64], i: usize, t: f64, cell: f64) -> bool {
    t >= grid[i - 1] - cell && t <= grid[i] + cell
}

fn property(id: &str, applicable: bool, asserted: bool, pass: bool, detail: String) -> PropertyCheck {
    PropertyCheck { id: id.into(), applicable, asserted, pass: pass || !applicable, detail }
}

/// Runs the scan and checks every applicable identity. Failures are reported
/// in the result rather than returned as errors.
pub fn verify(problem: &MorseSturmProblem, grid_size: usize, mesh: usize) -> Result<VerificationReport> {
    let sc = scan(problem, grid_size, mesh)?;
    let last = sc.grid.len() - 1;
    let cell = sc.spacing();
    let rank_tol = problem.tolerances.rank_tol;

    let pseudo_count = sc.pseudo_focal.count_before(1.0, ENDPOINT_TOL);
    let focal_count = sc.focal.count_before(1.0, ENDPOINT_TOL);
    let index_theorem = Equality::new(sc.mu0[last], pseudo_count);

    let two_endpoint = match &problem.q {
        Some(_) => {
            let te = two_endpoint_index(problem, mesh)?;
            let rhs = sc.mu0[last] + te.correction.n_minus;
            Some(TwoEndpointCheck {
                lhs: te.total.n_minus,
                rhs,
                correction: te.correction,
                hypothesis_ok: te.decomposition_valid,
                pass: !te.decomposition_valid || te.total.n_minus == rhs,
            })
        }
        None => None,
    };

    let singular_reduction = if sc.regime == Regime::Singular {
        let corr = star_correction(problem)?;
        let lhs = match &problem.q {
            Some(_) => two_endpoint_index(problem, mesh)?.total.n_minus,
            None => sc.mu[last],
        };
        Some(Equality::new(lhs, focal_count + corr.n_minus))
    } else {
        None
    };

    let star_one = IndexResult { n_minus: sc.mu[last], ..dummy_result(mesh) };
    let zero_one = IndexResult { n_minus: sc.mu0[last], ..dummy_result(mesh) };
    let epsilon = epsilon_from(&star_one, &zero_one).unwrap_or(usize::MAX);

    let interior: usize = sc.degeneracies.iter().map(|d| d.nullity0).sum();
    let jump_sum = Equality::new(sc.mu0[last].saturating_sub(sc.mu0[0]), interior);

    let mut properties = Vec::new();

    let gaps: Vec<i64> = sc.mu.iter().zip(&sc.mu0).map(|(a, b)| *a as i64 - *b as i64).collect();
    let bad_gap = gaps.iter().position(|d| !(0..=1).contains(d));
    properties.push(property(
        "index_gap_in_0_1",
        true,
        true,
        bad_gap.is_none(),
        match bad_gap {
            Some(i) => format!("mu - mu0 = {} at sigma = {}", gaps[i], sc.grid[i]),
            None => "0 <= mu - mu0 <= 1 on the grid".into(),
        },
    ));

    let j0 = jumps(&sc.mu0);
    let neg0 = j0.iter().find(|(_, d)| *d < 0);
    properties.push(property(
        "mu0_nondecreasing",
        true,
        true,
        neg0.is_none(),
        match neg0 {
            Some((i, d)) => format!("mu0 drops by {} at sigma = {}", -d, sc.grid[*i]),
            None => format!("{} upward jumps", j0.len()),
        },
    ));

    let jm = jumps(&sc.mu);
    let negm: Vec<f64> = jm.iter().filter(|(_, d)| *d < 0).map(|(i, _)| sc.grid[*i]).collect();
    properties.push(property(
        "mu_nondecreasing",
        true,
        false,
        negm.is_empty(),
        if negm.is_empty() { "no decrease observed".into() } else { format!("mu decreases at sigma in {negm:?}") },
    ));

    // mu0 jumps exactly at pseudo-focal instants, by their multiplicity
    let interior_pf: Vec<_> = sc
        .pseudo_focal
        .instants
        .iter()
        .filter(|p| p.t0 > sc.grid[0] && p.t0 < 1.0 - ENDPOINT_TOL)
        .collect();
    let mut unmatched_jumps = Vec::new();
    for (i, d) in &j0 {
        let near: usize = interior_pf.iter().filter(|p| near_jump(&sc.grid, *i, p.t0, cell)).map(|p| p.multiplicity).sum();
        if near == 0 || (*d as usize) > near {
            unmatched_jumps.push(sc.grid[*i]);
        }
    }
    let mut missing = Vec::new();
    for p in &interior_pf {
        let near: i64 = j0.iter().filter(|(i, _)| near_jump(&sc.grid, *i, p.t0, cell)).map(|(_, d)| *d).sum();
        if near < p.multiplicity as i64 && p.t0 < sc.grid[last] - cell {
            missing.push(p.t0);
        }
    }
    properties.push(property(
        "mu0_jumps_at_pseudo_focal",
        true,
        true,
        unmatched_jumps.is_empty() && missing.is_empty(),
        format!("unmatched jumps at {unmatched_jumps:?}; pseudo-focal instants without jump {missing:?}"),
    ));

    // effective focal instants: focal instants with a nearby jump of mu
    let non_effective: Vec<f64> = sc
        .focal
        .instants
        .iter()
        .filter(|f| f.t0 > sc.grid[0] && f.t0 < sc.grid[last] - cell)
        .filter(|f| !jm.iter().any(|(i, _)| near_jump(&sc.grid, *i, f.t0, cell)))
        .map(|f| f.t0)
        .collect();
    properties.push(property(
        "all_focal_effective",
        !sc.focal.instants.is_empty(),
        false,
        non_effective.is_empty(),
        format!("focal instants without a jump of mu: {non_effective:?}"),
    ));

    let jac = p_jacobi_basis(problem, 1.0)?;
    let pb = pseudo_basis(problem)?.as_field_basis(problem.dim());
    let mut bad_i = Vec::new();
    for f in &sc.focal.instants {
        let mul0 = multiplicity_at(&pb, f.t0, rank_tol);
        if mul0 + 1 < f.multiplicity {
            bad_i.push((f.t0, f.multiplicity, mul0));
        }
    }
    properties.push(property(
        "mul0_at_least_mul_minus_one",
        !sc.focal.instants.is_empty(),
        true,
        bad_i.is_empty(),
        format!("violations (t0, mul, mul0): {bad_i:?}"),
    ));
    let mut bad_j = Vec::new();
    for p in &sc.pseudo_focal.instants {
        let mul = multiplicity_at(&jac, p.t0, rank_tol);
        if mul + 1 < p.multiplicity {
            bad_j.push((p.t0, p.multiplicity, mul));
        }
    }
    properties.push(property(
        "mul_at_least_mul0_minus_one",
        !sc.pseudo_focal.instants.is_empty(),
        true,
        bad_j.is_empty(),
        format!("violations (t0, mul0, mul): {bad_j:?}"),
    ));

    // an effective focal instant between consecutive pseudo-focal instants below 1
    let below_one: Vec<f64> = sc.pseudo_focal.instants.iter().map(|p| p.t0).filter(|t| *t < 1.0 - ENDPOINT_TOL).collect();
    let mut bad_k = Vec::new();
    let mut pairs = 0;
    for w in below_one.windows(2) {
        let (t1, t2) = (w[0], w[1]);
        if t1 < sc.grid[0] {
            continue;
        }
        pairs += 1;
        if !jm.iter().any(|(i, _)| sc.grid[*i] >= t1 - cell && sc.grid[*i - 1] <= t2 + cell) {
            bad_k.push((t1, t2));
        }
    }
    properties.push(property(
        "mu_jump_between_pseudo_focal",
        pairs > 0,
        true,
        bad_k.is_empty(),
        format!("{pairs} consecutive pairs; without jump of mu: {bad_k:?}"),
    ));

    let non_isolated = sc.focal.instants.windows(2).filter(|w| w[1].t0 - w[0].t0 < cell).count();
    properties.push(property(
        "effective_focal_isolated",
        sc.focal.instants.len() > 1,
        false,
        non_isolated == 0,
        format!("{non_isolated} pairs of focal instants closer than one grid cell"),
    ));

    let first = sc.pseudo_focal.instants.iter().map(|p| p.t0).find(|t| *t > sc.grid[0]);
    let m_ok = first.map(|t0| jm.iter().any(|(i, d)| *d > 0 && sc.grid[*i - 1] <= t0 + cell));
    properties.push(property(
        "positive_mu_jump_by_first_pseudo_focal",
        first.is_some(),
        true,
        m_ok.unwrap_or(true),
        match first {
            Some(t0) => format!("first pseudo-focal instant {t0}"),
            None => "no pseudo-focal instant".into(),
        },
    ));

    let all_pass = index_theorem.pass
        && two_endpoint.is_none_or(|c| c.pass)
        && singular_reduction.is_none_or(|c| c.pass)
        && epsilon <= 1
        && jump_sum.pass
        && properties.iter().filter(|p| p.asserted).all(|p| p.pass);

    Ok(VerificationReport {
        regime: sc.regime,
        mesh_size: mesh,
        grid_size,
        index_theorem,
        nullity_at_one: sc.nullity0[last],
        two_endpoint,
        singular_reduction,
        epsilon,
        jump_sum,
        properties,
        all_pass,
    })
}

fn dummy_result(mesh: usize) -> IndexResult {
    IndexResult { n_minus: 0, nullity: 0, mesh_size: mesh, sigma: 1.0, smallest_abs_eigenvalue: 0.0, space_dim: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{flat_problem, static_constant_curvature_problem, PChoice};
    use std::f64::consts::PI;

    #[test]
    fn flat_scan_is_zero() {
        let sc = scan(&flat_problem(3, PChoice::Point), 5, 16).unwrap();
        assert!(sc.mu.iter().chain(&sc.mu0).all(|m| *m == 0));
        assert!(sc.to_csv().starts_with("sigma,mu,mu0,nullity0\n0.01,0,0,0\n"));
        assert_eq!(sc.to_csv().lines().count(), 6);
    }

    #[test]
    fn sphere_verifies() {
        let p = static_constant_curvature_problem((1.5 * PI).powi(2));
        let rep = verify(&p, 12, 32).unwrap();
        assert!(rep.all_pass, "{rep:#?}");
        assert_eq!((rep.index_theorem.lhs, rep.index_theorem.rhs), (1, 1));
        assert_eq!(rep.singular_reduction.unwrap().lhs, 1);
        assert_eq!(rep.jump_sum, Equality::new(1, 1));
    }

    #[test]
    fn jump_helpers() {
        assert_eq!(jumps(&[0, 0, 1, 1, 0]), vec![(2, 1), (4, -1)]);
        let grid = [0.0, 0.5, 1.0];
        assert!(near_jump(&grid, 1, 0.3, 0.5));
        assert!(!near_jump(&grid, 1, 1.2, 0.1));
    }
}
