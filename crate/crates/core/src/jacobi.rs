//! Fixed-step RK4 integration of `V'' = R(t) V + forcing`, the space of
//! P-Jacobi fields and detection of the instants where a nonzero field of a
//! family vanishes.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::curve::VectorCurve;
use crate::error::{Error, Result};
use crate::linalg::{g_orthogonal_complement, numerical_rank, orthonormal_range, null_space, SubspaceBasis};
use crate::problem::MorseSturmProblem;

/// Default start of the focal scan; the initial portion is focal-free.
pub const DEFAULT_T_LO: f64 = 1e-3;

/// Relative size of `C_V` below which the constraint `C_V = 0` holds for every field.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Inhomogeneous term of the equation.
#[derive(Debug, Clone)]
pub enum Forcing {
    Zero,
    Curve(VectorCurve),
    /// `lambda * m(Y)(t)`.
    MofY(f64),
}

/// One integrated solution on the uniform grid `t_i = sigma i / steps`.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub sigma: f64,
    pub grid: Vec<f64>,
    pub values: Vec<DVector<f64>>,
    pub derivs: Vec<DVector<f64>>,
    /// `C_V = g(V', Y) - g(V, Y')` at `t = 0`.
    pub c_v: f64,
    /// `max_t |C_V(t) - C_V(0)|`.
    pub c_drift: f64,
    /// Richardson estimate of the global error from the half-step run.
    pub richardson_error: f64,
    /// Coefficient of `m(Y)` in the forcing (0 for Jacobi fields).
    pub lambda: f64,
}

impl FieldSolution {
    pub fn steps(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Value and derivative at any `t` in `[0, sigma]` by cubic Hermite
    /// interpolation of the nodal data.
    pub fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let (i, s, h) = locate(t, self.sigma, self.steps());
        let [h00, h10, h01, h11] = hermite(s);
        let [d00, d10, d01, d11] = hermite_d(s);
        let (x0, x1, v0, v1) = (&self.values[i], &self.values[i + 1], &self.derivs[i], &self.derivs[i + 1]);
        let v = x0 * h00 + v0 * (h * h10) + x1 * h01 + v1 * (h * h11);
        let dv = (x0 * d00 + x1 * d01) / h + v0 * d10 + v1 * d11;
        (v, dv)
    }
}

fn locate(t: f64, sigma: f64, steps: usize) -> (usize, f64, f64) {
    let h = sigma / steps as f64;
    let x = (t / h).clamp(0.0, steps as f64);
    let i = (x.floor() as usize).min(steps - 1);
    (i, x - i as f64, h)
}

fn hermite(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2]
}

fn hermite_d(s: f64) -> [f64; 4] {
    let s2 = s * s;
    [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s]
}

/// Coefficients `R(t_j)` and forcing `f(t_j)` on the half-step grid
/// `t_j = sigma j / (2 steps)`.
struct Coefficients {
    r: Vec<DMatrix<f64>>,
    f: Option<Vec<DVector<f64>>>,
}

impl Coefficients {
    fn new(problem: &MorseSturmProblem, forcing: Option<&dyn Fn(f64) -> Result<DVector<f64>>>, sigma: f64, steps: usize) -> Result<Self> {
        let m = 2 * steps;
        let ts: Vec<f64> = (0..=m).map(|j| sigma * j as f64 / m as f64).collect();
        let r = ts.iter().map(|&t| problem.r.eval(t)).collect();
        let f = match forcing {
            Some(f) => Some(ts.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Ok(Self { r, f })
    }
}

/// Integrates all columns of `(x0, v0)` at once. `stride` 1 uses `steps`
/// steps, stride 2 uses `steps / 2`.
fn rk4(
    coeff: &Coefficients,
    x0: &DMatrix<f64>,
    v0: &DMatrix<f64>,
    weights: &RowDVector<f64>,
    sigma: f64,
    steps: usize,
    stride: usize,
) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let n_steps = steps / stride;
    let h = sigma / n_steps as f64;
    let force = |j: usize| -> Option<DMatrix<f64>> { coeff.f.as_ref().map(|f| &f[j] * weights) };
    let accel = |j: usize, x: &DMatrix<f64>| -> DMatrix<f64> {
        let a = &coeff.r[j] * x;
        match force(j) {
            Some(f) => a + f,
            None => a,
        }
    };
    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut vs = Vec::with_capacity(n_steps + 1);
    let (mut x, mut v) = (x0.clone(), v0.clone());
    xs.push(x.clone());
    vs.push(v.clone());
    for i in 0..n_steps {
        let (j0, jm, j1) = (2 * i * stride, (2 * i + 1) * stride, (2 * i + 2) * stride);
        let k1x = v.clone();
        let k1v = accel(j0, &x);
        let k2x = &v + &k1v * (0.5 * h);
        let k2v = accel(jm, &(&x + &k1x * (0.5 * h)));
        let k3x = &v + &k2v * (0.5 * h);
        let k3v = accel(jm, &(&x + &k2x * (0.5 * h)));
        let k4x = &v + &k3v * h;
        let k4v = accel(j1, &(&x + &k3x * h));
        x += (k1x + (k2x + k3x) * 2.0 + k4x) * (h / 6.0);
        v += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);
        xs.push(x.clone());
        vs.push(v.clone());
    }
    (xs, vs)
}

/// Integrates the columns of `(x0, v0)` with forcing `weights[i] * f(t)` on
/// column `i`, checking the Richardson estimate against `ode_tol`.
pub(crate) fn integrate_columns(
    problem: &MorseSturmProblem,
    x0: &DMatrix<f64>,
    v0: &DMatrix<f64>,
    forcing: &Forcing,
    weights: &[f64],
    sigma: f64,
) -> Result<Vec<FieldSolution>> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Schema(format!("sigma = {sigma} outside (0, 1]")));
    }
    let n = problem.dim();
    let k = x0.ncols();
    if x0.nrows() != n || v0.nrows() != n || v0.ncols() != k || weights.len() != k {
        return Err(Error::Dimension { expected: n, got: x0.nrows() });
    }
    let steps = problem.tolerances.ode_steps;
    let f: Option<Box<dyn Fn(f64) -> Result<DVector<f64>> + '_>> = match forcing {
        Forcing::Zero => None,
        Forcing::Curve(c) => {
            if c.dim() != n {
                return Err(Error::Dimension { expected: n, got: c.dim() });
            }
            Some(Box::new(move |t| Ok(c.eval(t))))
        }
        Forcing::MofY(lambda) => {
            let lambda = *lambda;
            Some(Box::new(move |t| Ok(problem.m_of_y(t)? * lambda)))
        }
    };
    let coeff = Coefficients::new(problem, f.as_deref(), sigma, steps)?;
    let w = RowDVector::from_row_slice(weights);
    let (xs, vs) = rk4(&coeff, x0, v0, &w, sigma, steps, 1);
    let (xc, vc) = rk4(&coeff, x0, v0, &w, sigma, steps, 2);

    let g = &problem.g;
    let grid: Vec<f64> = (0..=steps).map(|i| sigma * i as f64 / steps as f64).collect();
    let ys: Vec<(DVector<f64>, DVector<f64>)> = grid
        .iter()
        .map(|&t| {
            let (y, yp, _) = problem.y.eval_all(t);
            (y, yp)
        })
        .collect();

    let mut out = Vec::with_capacity(k);
    for col in 0..k {
        let values: Vec<DVector<f64>> = xs.iter().map(|m| m.column(col).into_owned()).collect();
        let derivs: Vec<DVector<f64>> = vs.iter().map(|m| m.column(col).into_owned()).collect();
        let mut diff: f64 = 0.0;
        let mut size: f64 = 0.0;
        for (i, (xcm, vcm)) in xc.iter().zip(&vc).enumerate() {
            let dx = (&values[2 * i] - xcm.column(col)).norm();
            let dv = (&derivs[2 * i] - vcm.column(col)).norm();
            diff = diff.max(dx).max(dv);
        }
        for (x, v) in values.iter().zip(&derivs) {
            size = size.max(x.norm()).max(v.norm());
        }
        let richardson_error = diff / 15.0;
        let tolerance = problem.tolerances.ode_tol * size.max(f64::MIN_POSITIVE);
        if richardson_error > tolerance {
            return Err(Error::StepCountTooSmall { estimate: richardson_error, tolerance });
        }
        let cs: Vec<f64> = values
            .iter()
            .zip(&derivs)
            .zip(&ys)
            .map(|((x, v), (y, yp))| g.inner(v, y) - g.inner(x, yp))
            .collect();
        let c_v = cs[0];
        let c_drift = cs.iter().map(|c| (c - c_v).abs()).fold(0.0, f64::max);
        out.push(FieldSolution {
            sigma,
            grid: grid.clone(),
            values,
            derivs,
            c_v,
            c_drift,
            richardson_error,
            lambda: weights[col],
        });
    }
    Ok(out)
}

/// Solves `V'' = R(t) V + forcing`, `V(0) = v0`, `V'(0) = v0p` on `[0, sigma]`.
pub fn integrate_field(
    problem: &MorseSturmProblem,
    v0: &DVector<f64>,
    v0p: &DVector<f64>,
    forcing: &Forcing,
    sigma: f64,
) -> Result<FieldSolution> {
    let x0 = DMatrix::from_column_slice(v0.len(), 1, v0.as_slice());
    let xp = DMatrix::from_column_slice(v0p.len(), 1, v0p.as_slice());
    let lambda = match forcing {
        Forcing::Zero => 0.0,
        Forcing::Curve(_) => 1.0,
        Forcing::MofY(l) => *l,
    };
    let forcing = match forcing {
        Forcing::MofY(_) => Forcing::MofY(1.0),
        other => other.clone(),
    };
    let mut sols = integrate_columns(problem, &x0, &xp, &forcing, &[lambda], sigma)?;
    Ok(sols.remove(0))
}

/// A finite family of solutions evaluated together as the columns of a matrix.
#[derive(Debug, Clone)]
pub struct FieldBasis {
    pub sigma: f64,
    pub fields: Vec<FieldSolution>,
    pub dim: usize,
}

impl FieldBasis {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `n x len` matrix of values and of derivatives at `t`.
    pub fn eval(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut m = DMatrix::zeros(self.dim, self.len());
        let mut d = DMatrix::zeros(self.dim, self.len());
        for (j, f) in self.fields.iter().enumerate() {
            let (v, dv) = f.eval(t);
            m.set_column(j, &v);
            d.set_column(j, &dv);
        }
        (m, d)
    }

    pub fn values_at(&self, t: f64) -> DMatrix<f64> {
        self.eval(t).0
    }

    pub fn constants(&self) -> Vec<f64> {
        self.fields.iter().map(|f| f.c_v).collect()
    }
}

/// Initial data `(V(0), V'(0))` of the P-Jacobi basis as two `n x n` matrices.
pub(crate) fn p_jacobi_initial_data(problem: &MorseSturmProblem) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = problem.dim();
    let p = problem.p.dim();
    let perp = g_orthogonal_complement(&problem.g, &problem.p)?;
    if perp.dim() != n - p {
        return Err(Error::Regime("P is degenerate".into()));
    }
    let mut x0 = DMatrix::zeros(n, n);
    let mut v0 = DMatrix::zeros(n, n);
    if p > 0 {
        x0.columns_mut(0, p).copy_from(problem.p.matrix());
        v0.columns_mut(0, p).copy_from(&(-problem.shape_p()));
    }
    if p == 0 {
        v0.copy_from(&DMatrix::identity(n, n));
    } else {
        v0.columns_mut(p, n - p).copy_from(perp.matrix());
    }
    Ok((x0, v0))
}

/// The `n` P-Jacobi fields: `V(0) = p_i, V'(0) = -S p_i` followed by
/// `V(0) = 0, V'(0) = q_j` for a basis `q_j` of the g-orthogonal complement of `P`.
pub fn p_jacobi_basis(problem: &MorseSturmProblem, sigma: f64) -> Result<FieldBasis> {
    let n = problem.dim();
    let (x0, v0) = p_jacobi_initial_data(problem)?;
    let fields = integrate_columns(problem, &x0, &v0, &Forcing::Zero, &vec![0.0; n], sigma)?;
    Ok(FieldBasis { sigma, fields, dim: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocalKind {
    Focal,
    PseudoFocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalInstant {
    pub t0: f64,
    pub multiplicity: usize,
    /// `sigma_min / sigma_max` of the column-normalised value matrix at `t0`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalReport {
    pub kind: FocalKind,
    pub t_lo: f64,
    pub basis_dim: usize,
    pub instants: Vec<FocalInstant>,
    pub nondegenerate_flags: Vec<bool>,
}

impl FocalReport {
    pub fn total_multiplicity(&self) -> usize {
        self.instants.iter().map(|i| i.multiplicity).sum()
    }

    /// Total multiplicity of instants in the open interval `(0, upper)`,
    /// excluding those within `tol` of `upper`.
    pub fn count_before(&self, upper: f64, tol: f64) -> usize {
        self.instants.iter().filter(|i| i.t0 < upper - tol).map(|i| i.multiplicity).sum()
    }
}

fn rel_smallest(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Grid values above this are never refined; a genuine zero sits within half
/// a step of a node, where the normalised `sigma_min` is far smaller.
const CANDIDATE_CEILING: f64 = 0.25;

/// Instants in `[t_lo, sigma]` where the columns of `basis` become linearly
/// dependent: scan `sigma_min / sigma_max` on the integration grid, refine
/// each local minimum by golden-section search and keep those below `rank_tol`.
pub fn vanishing_instants(
    problem: &MorseSturmProblem,
    basis: &FieldBasis,
    t_lo: f64,
    kind: FocalKind,
) -> Result<FocalReport> {
    if !(t_lo > 0.0) {
        return Err(Error::Schema(format!("t_lo = {t_lo} must be positive")));
    }
    let tol = problem.tolerances;
    let mut report = FocalReport { kind, t_lo, basis_dim: basis.len(), instants: vec![], nondegenerate_flags: vec![] };
    if basis.is_empty() {
        return Ok(report);
    }
    let inv = column_normalisation(basis);
    let normalised = |t: f64| basis.values_at(t) * &inv;
    let s_of = |t: f64| rel_smallest(&normalised(t));

    let grid = &basis.fields[0].grid;
    let nodes: Vec<f64> = std::iter::once(t_lo)
        .chain(grid.iter().copied().filter(|&t| t > t_lo))
        .collect();
    if nodes.len() < 2 {
        return Ok(report);
    }
    let s: Vec<f64> = nodes.iter().map(|&t| s_of(t)).collect();
    let last = nodes.len() - 1;
    let mut found: Vec<FocalInstant> = Vec::new();
    for i in 0..=last {
        let left_ok = i == 0 || s[i] <= s[i - 1];
        let right_ok = i == last || s[i] < s[i + 1];
        if !(left_ok && right_ok) || s[i] > CANDIDATE_CEILING {
            continue;
        }
        let mut a = nodes[i.saturating_sub(1)];
        let mut b = nodes[(i + 1).min(last)];
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let (mut fc, mut fd) = (s_of(c), s_of(d));
        while b - a > tol.bisect_tol {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - GOLDEN * (b - a);
                fc = s_of(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + GOLDEN * (b - a);
                fd = s_of(d);
            }
        }
        // the endpoints of the final bracket can beat its interior near the scan boundary
        let (t0, r) = [(a, s_of(a)), (0.5 * (a + b), s_of(0.5 * (a + b))), (b, s_of(b))]
            .into_iter()
            .fold((f64::NAN, f64::INFINITY), |best, x| if x.1 < best.1 { x } else { best });
        if r > tol.rank_tol {
            continue;
        }
        let multiplicity = basis.len() - numerical_rank(&normalised(t0), tol.rank_tol);
        found.push(FocalInstant { t0, multiplicity: multiplicity.max(1), residual: r });
    }
    found.sort_by(|x, y| x.t0.total_cmp(&y.t0));
    let mut merged: Vec<FocalInstant> = Vec::new();
    for inst in found {
        match merged.last_mut() {
            Some(prev) if inst.t0 - prev.t0 < 2.0 * tol.bisect_tol => {
                if inst.residual < prev.residual {
                    *prev = inst;
                }
            }
            _ => merged.push(inst),
        }
    }
    for inst in &merged {
        report.nondegenerate_flags.push(kernel_derivatives_nondegenerate(problem, basis, &inv, inst));
    }
    report.instants = merged;
    Ok(report)
}

/// Diagonal matrix dividing each field by its maximum norm on the grid.
fn column_normalisation(basis: &FieldBasis) -> DMatrix<f64> {
    let inv: Vec<f64> = basis.fields.iter().map(|f| 1.0 / f.max_norm().max(f64::MIN_POSITIVE)).collect();
    DMatrix::from_diagonal(&DVector::from_vec(inv))
}

/// Dimension of the fields of the family vanishing at `t`.
pub fn multiplicity_at(basis: &FieldBasis, t: f64, rank_tol: f64) -> usize {
    if basis.is_empty() {
        return 0;
    }
    let m = basis.values_at(t) * column_normalisation(basis);
    basis.len() - numerical_rank(&m, rank_tol)
}

/// Whether `g` is nondegenerate on `{W'(t0) : W in the family, W(t0) = 0}`.
fn kernel_derivatives_nondegenerate(
    problem: &MorseSturmProblem,
    basis: &FieldBasis,
    inv: &DMatrix<f64>,
    inst: &FocalInstant,
) -> bool {
    let (m, d) = basis.eval(inst.t0);
    let svd = (m * inv).svd(false, true);
    let vt = match svd.v_t {
        Some(vt) => vt,
        None => return false,
    };
    let k = basis.len();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    if vt.nrows() < k {
        return false;
    }
    let cols: Vec<DVector<f64>> =
        order.iter().take(inst.multiplicity).map(|&i| inv * vt.row(i).transpose()).collect();
    let c = DMatrix::from_columns(&cols);
    let w = d * c;
    let q = orthonormal_range(&w, problem.tolerances.rank_tol);
    if q.ncols() < inst.multiplicity {
        return false;
    }
    match SubspaceBasis::new(q) {
        Ok(span) => crate::linalg::is_nondegenerate(&problem.g, &span, problem.tolerances.rank_tol),
        Err(_) => false,
    }
}

/// Focal instants of the P-Jacobi family in `[t_lo, 1]`.
pub fn focal_instants(problem: &MorseSturmProblem, t_lo: f64) -> Result<FocalReport> {
    problem.require_valid()?;
    let basis = p_jacobi_basis(problem, 1.0)?;
    vanishing_instants(problem, &basis, t_lo, FocalKind::Focal)
}

/// Coefficient vectors (columns) of the P-Jacobi combinations with `C = 0`.
pub(crate) fn zero_constant_coefficients(problem: &MorseSturmProblem, basis: &FieldBasis) -> DMatrix<f64> {
    let n = basis.len();
    let c = RowDVector::from_vec(basis.constants());
    let (y0, y0p, _) = problem.y.eval_all(0.0);
    let scale = basis
        .fields
        .iter()
        .map(|f| f.values[0].norm() + f.derivs[0].norm())
        .fold(0.0, f64::max)
        * (y0.norm() + y0p.norm())
        * problem.g.matrix().norm();
    if c.amax() <= CONSTRAINT_TOL * scale {
        return DMatrix::identity(n, n);
    }
    null_space(&DMatrix::from_row_slice(1, n, c.as_slice()), CONSTRAINT_TOL)
}

/// `(J[t], J*[t])`: values at `t` of the P-Jacobi fields with `C = 0`, and of all of them.
pub fn jacobi_value_spaces(problem: &MorseSturmProblem, t: f64) -> Result<(SubspaceBasis, SubspaceBasis)> {
    let basis = p_jacobi_basis(problem, 1.0)?;
    value_spaces(problem, &basis, t)
}

pub(crate) fn value_spaces(
    problem: &MorseSturmProblem,
    basis: &FieldBasis,
    t: f64,
) -> Result<(SubspaceBasis, SubspaceBasis)> {
    let m = basis.values_at(t);
    let rank_tol = problem.tolerances.rank_tol;
    let star = SubspaceBasis::new(orthonormal_range(&m, rank_tol))?;
    let z = zero_constant_coefficients(problem, basis);
    let j = SubspaceBasis::new(orthonormal_range(&(m * z), rank_tol))?;
    Ok((j, star))
}
