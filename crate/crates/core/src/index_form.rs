//! Galerkin discretisation of the reparametrised index form
//! `C_sigma(V, W) = int g(V', W') + sigma^2 g(R(sigma t) V, W) - sigma g(S V(0), W(0))`
//! on piecewise-linear fields, restricted to the weakly imposed constraint
//! `g(V', Y(sigma t)) - sigma g(V, Y'(sigma t)) = 0` (or `= C`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::MatrixCurve;
use crate::error::{Error, Result};
use crate::jacobi::{p_jacobi_basis, value_spaces, zero_constant_coefficients, FieldBasis};
use crate::linalg::{inertia_with_scale, null_space, orthonormal_complement, orthonormal_range, Inertia, SubspaceBasis};
use crate::problem::MorseSturmProblem;

/// Smallest admissible mesh.
pub const MIN_MESH: usize = 8;

/// Tolerance for the containment `Q ⊆ J[1]`.
pub const CONTAINMENT_TOL: f64 = 1e-6;

/// Three-point Gauss-Legendre rule on `[0, 1]`.
const GAUSS: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    /// Homogeneous constraint.
    H0,
    /// Affine constraint with a free constant.
    HStar,
}

/// Piecewise-linear fields on `N` cells with `V(0) = P a` and `V(1) = 0` or `Q b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpace {
    pub n: usize,
    pub mesh_size: usize,
    pub p_dim: usize,
    pub q_dim: Option<usize>,
    pub dof_count: usize,
}

#[derive(Debug, Clone)]
pub struct ConstrainedSubspace {
    pub space: DiscreteSpace,
    /// Orthonormal columns in DOF coordinates.
    pub kernel_basis: DMatrix<f64>,
    pub kind: SpaceKind,
    pub sigma: f64,
    /// Weak constraint operator (one row per cell, plus the `C` column for `H*`).
    pub constraint: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub n_minus: usize,
    pub nullity: usize,
    pub mesh_size: usize,
    pub sigma: f64,
    /// Smallest `|lambda|` of the form relative to the H^1 inner product.
    pub smallest_abs_eigenvalue: f64,
    pub space_dim: usize,
}

/// Raw data for assembly, so that a Riemannian reduction with `g = I` can
/// reuse the machinery.
pub(crate) struct FormData<'a> {
    g: &'a DMatrix<f64>,
    r: &'a MatrixCurve,
    p: &'a DMatrix<f64>,
    /// `sym(G_P S_P)` on P coordinates.
    shape_p: DMatrix<f64>,
    /// Basis of `Q` and `sym(G_Q S_Q)`, for the two-endpoint form.
    q: Option<(&'a DMatrix<f64>, DMatrix<f64>)>,
}

impl<'a> FormData<'a> {
    pub(crate) fn from_problem(problem: &'a MorseSturmProblem, two_endpoint: bool) -> Self {
        let q = if two_endpoint {
            problem.q.as_ref().map(|q| (q.matrix(), problem.shape_form_q().expect("S_Q with Q")))
        } else {
            None
        };
        FormData {
            g: problem.g.matrix(),
            r: &problem.r,
            p: problem.p.matrix(),
            shape_p: problem.shape_form_p(),
            q,
        }
    }

    fn n(&self) -> usize {
        self.g.nrows()
    }
}

/// DOF layout `[a | interior nodes | b]`.
struct Layout {
    n: usize,
    mesh: usize,
    p: DMatrix<f64>,
    q: Option<DMatrix<f64>>,
}

impl Layout {
    fn new(data: &FormData, mesh: usize) -> Self {
        Layout { n: data.n(), mesh, p: data.p.clone(), q: data.q.as_ref().map(|(q, _)| (*q).clone()) }
    }

    fn p_dim(&self) -> usize {
        self.p.ncols()
    }

    fn q_dim(&self) -> usize {
        self.q.as_ref().map_or(0, |q| q.ncols())
    }

    fn dof_count(&self) -> usize {
        self.p_dim() + self.n * (self.mesh - 1) + self.q_dim()
    }

    fn q_offset(&self) -> usize {
        self.p_dim() + self.n * (self.mesh - 1)
    }

    /// Node value as `map * x[offset..offset + map.ncols()]`.
    fn node(&self, j: usize) -> Option<(usize, DMatrix<f64>)> {
        if j == 0 {
            (self.p_dim() > 0).then(|| (0, self.p.clone()))
        } else if j == self.mesh {
            match &self.q {
                Some(q) if q.ncols() > 0 => Some((self.q_offset(), q.clone())),
                _ => None,
            }
        } else {
            Some((self.p_dim() + self.n * (j - 1), DMatrix::identity(self.n, self.n)))
        }
    }

    fn space(&self) -> DiscreteSpace {
        DiscreteSpace {
            n: self.n,
            mesh_size: self.mesh,
            p_dim: self.p_dim(),
            q_dim: self.q.as_ref().map(|q| q.ncols()),
            dof_count: self.dof_count(),
        }
    }

    /// Adds the `2n x 2n` element matrix of cell `c` to `a`.
    fn scatter(&self, a: &mut DMatrix<f64>, c: usize, k: &DMatrix<f64>) {
        let n = self.n;
        let maps = [self.node(c), self.node(c + 1)];
        for (i, mi) in maps.iter().enumerate() {
            let Some((oi, mi)) = mi else { continue };
            for (j, mj) in maps.iter().enumerate() {
                let Some((oj, mj)) = mj else { continue };
                let block = mi.transpose() * k.view((i * n, j * n), (n, n)) * mj;
                let mut target = a.view_mut((*oi, *oj), (block.nrows(), block.ncols()));
                target += block;
            }
        }
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn check_mesh(mesh: usize) -> Result<()> {
    if mesh < MIN_MESH {
        return Err(Error::Discretization(format!("mesh size {mesh} below {MIN_MESH}")));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Schema(format!("sigma = {sigma} outside [0, 1]")));
    }
    Ok(())
}

fn assemble(data: &FormData, layout: &Layout, sigma: f64) -> DMatrix<f64> {
    let n = layout.n;
    let mesh = layout.mesh;
    let h = 1.0 / mesh as f64;
    let mut a = DMatrix::zeros(layout.dof_count(), layout.dof_count());
    for c in 0..mesh {
        let mut k = DMatrix::zeros(2 * n, 2 * n);
        let gs = data.g / h;
        k.view_mut((0, 0), (n, n)).copy_from(&gs);
        k.view_mut((n, n), (n, n)).copy_from(&gs);
        k.view_mut((0, n), (n, n)).copy_from(&(-&gs));
        k.view_mut((n, 0), (n, n)).copy_from(&(-&gs));
        if sigma != 0.0 {
            for (s, w) in GAUSS {
                let t = (c as f64 + s) * h;
                let gr = sym(&(data.g * data.r.eval(sigma * t))) * (w * h * sigma * sigma);
                let phi = [1.0 - s, s];
                for i in 0..2 {
                    for j in 0..2 {
                        let mut blk = k.view_mut((i * n, j * n), (n, n));
                        blk += &gr * (phi[i] * phi[j]);
                    }
                }
            }
        }
        layout.scatter(&mut a, c, &k);
    }
    let p = layout.p_dim();
    if p > 0 {
        let mut blk = a.view_mut((0, 0), (p, p));
        blk -= &data.shape_p * sigma;
    }
    if let Some((_, sq)) = &data.q {
        let (o, q) = (layout.q_offset(), layout.q_dim());
        let mut blk = a.view_mut((o, o), (q, q));
        blk += sq;
    }
    sym(&a)
}

/// Euclidean H^1 Gram matrix `int V'.W' + V.W` on the DOFs.
fn h1_gram(layout: &Layout) -> DMatrix<f64> {
    let n = layout.n;
    let h = 1.0 / layout.mesh as f64;
    let id = DMatrix::<f64>::identity(n, n);
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    let diag = &id * (1.0 / h + h / 3.0);
    let off = &id * (-1.0 / h + h / 6.0);
    k.view_mut((0, 0), (n, n)).copy_from(&diag);
    k.view_mut((n, n), (n, n)).copy_from(&diag);
    k.view_mut((0, n), (n, n)).copy_from(&off);
    k.view_mut((n, 0), (n, n)).copy_from(&off);
    let mut a = DMatrix::zeros(layout.dof_count(), layout.dof_count());
    for c in 0..layout.mesh {
        layout.scatter(&mut a, c, &k);
    }
    a
}

/// Weak constraint rows: cell averages of `g(V', Y(sigma t)) - sigma g(V, Y'(sigma t))`.
fn constraint_matrix(problem: &MorseSturmProblem, layout: &Layout, sigma: f64, kind: SpaceKind) -> DMatrix<f64> {
    let n = layout.n;
    let mesh = layout.mesh;
    let h = 1.0 / mesh as f64;
    let g = problem.g.matrix();
    let extra = usize::from(kind == SpaceKind::HStar);
    let mut f = DMatrix::zeros(mesh, layout.dof_count() + extra);
    for c in 0..mesh {
        let mut left = DVector::zeros(n);
        let mut right = DVector::zeros(n);
        for (s, w) in GAUSS {
            let t = (c as f64 + s) * h;
            let (y, yp, _) = problem.y.eval_all(sigma * t);
            let gy = g * y / h;
            let gyp = g * yp * sigma;
            left += (-&gy - &gyp * (1.0 - s)) * w;
            right += (&gy - &gyp * s) * w;
        }
        for (node, row) in [(c, &left), (c + 1, &right)] {
            if let Some((o, m)) = layout.node(node) {
                let coeffs = m.transpose() * row;
                for (k, v) in coeffs.iter().enumerate() {
                    f[(c, o + k)] += v;
                }
            }
        }
        if extra == 1 {
            f[(c, layout.dof_count())] = -1.0;
        }
    }
    f
}

fn kernel_of(f: &DMatrix<f64>, dofs: usize, kind: SpaceKind, rank_tol: f64, sigma: f64) -> Result<DMatrix<f64>> {
    let k = null_space(f, rank_tol);
    if k.ncols() == 0 {
        return Err(Error::EmptyKernel { sigma });
    }
    let z = match kind {
        SpaceKind::H0 => k,
        SpaceKind::HStar => {
            let top = k.rows(0, dofs).into_owned();
            let z = orthonormal_range(&top, rank_tol);
            if z.ncols() != k.ncols() {
                return Err(Error::Discretization("constraint constant not determined by the field".into()));
            }
            z
        }
    };
    Ok(z)
}

/// Gram matrix of `C_sigma` on the discrete space with `V(1) = 0`.
pub fn assemble_reparametrized_form(problem: &MorseSturmProblem, sigma: f64, mesh: usize) -> Result<(DiscreteSpace, DMatrix<f64>)> {
    check_mesh(mesh)?;
    check_sigma(sigma)?;
    let data = FormData::from_problem(problem, false);
    let layout = Layout::new(&data, mesh);
    Ok((layout.space(), assemble(&data, &layout, sigma)))
}

/// Orthonormal basis of the weak-constraint kernel.
pub fn constraint_kernel(problem: &MorseSturmProblem, sigma: f64, mesh: usize, kind: SpaceKind) -> Result<ConstrainedSubspace> {
    check_mesh(mesh)?;
    check_sigma(sigma)?;
    let data = FormData::from_problem(problem, false);
    let layout = Layout::new(&data, mesh);
    let f = constraint_matrix(problem, &layout, sigma, kind);
    let z = kernel_of(&f, layout.dof_count(), kind, problem.tolerances.rank_tol, sigma)?;
    Ok(ConstrainedSubspace { space: layout.space(), kernel_basis: z, kind, sigma, constraint: f })
}

/// `a * z` using only the nonzero entries of the banded matrix `a`.
fn banded_mul(a: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut nz = Vec::new();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v != 0.0 {
                nz.push((i, j, v));
            }
        }
    }
    let mut out = DMatrix::zeros(a.nrows(), z.ncols());
    for k in 0..z.ncols() {
        let zk = z.column(k);
        let mut ok = out.column_mut(k);
        for &(i, j, v) in &nz {
            ok[i] += v * zk[j];
        }
    }
    out
}

/// Eigenvalues of `a` on the span of `z` relative to the Gram matrix `m`, ascending.
fn relative_spectrum(a: &DMatrix<f64>, m: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<Vec<f64>> {
    let ar = sym(&(z.transpose() * banded_mul(a, z)));
    let mr = sym(&(z.transpose() * banded_mul(m, z)));
    let chol = mr
        .cholesky()
        .ok_or_else(|| Error::Discretization("H1 Gram matrix not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&ar)
        .ok_or_else(|| Error::Discretization("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Discretization("singular Cholesky factor".into()))?;
    let mut eigs: Vec<f64> = sym(&c).symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

pub(crate) fn spectrum(problem: &MorseSturmProblem, data: &FormData, sigma: f64, mesh: usize, kind: SpaceKind) -> Result<Vec<f64>> {
    let layout = Layout::new(data, mesh);
    let a = assemble(data, &layout, sigma);
    let f = constraint_matrix(problem, &layout, sigma, kind);
    let z = kernel_of(&f, layout.dof_count(), kind, problem.tolerances.rank_tol, sigma)?;
    relative_spectrum(&a, &h1_gram(&layout), &z)
}

/// Eigenvalues above this fraction of the spectral radius are never zero,
/// however much they move between meshes.
const DRIFT_CAP: f64 = 1e-3;

/// Counts signs of the fine spectrum; an eigenvalue counts as zero when it is
/// below `kernel_tol` relative to the spectrum, or when it is small and below
/// its own change from the half mesh (the discrete trace of a kernel is `O(h^2)`).
fn classify(fine: &[f64], coarse: &[f64], kernel_tol: f64, mesh: usize, sigma: f64) -> IndexResult {
    let max = fine.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = kernel_tol * max;
    let mut n_minus = 0;
    let mut nullity = 0;
    for (i, l) in fine.iter().enumerate() {
        let drift = coarse.get(i).map_or(0.0, |c| (l - c).abs());
        if l.abs() <= floor || (l.abs() <= drift && l.abs() <= DRIFT_CAP * max) {
            nullity += 1;
        } else if *l < 0.0 {
            n_minus += 1;
        }
    }
    let smallest = fine.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    IndexResult { n_minus, nullity, mesh_size: mesh, sigma, smallest_abs_eigenvalue: smallest, space_dim: fine.len() }
}

fn index_with(problem: &MorseSturmProblem, data: &FormData, sigma: f64, mesh: usize, kind: SpaceKind) -> Result<IndexResult> {
    check_mesh(mesh)?;
    check_sigma(sigma)?;
    let fine = spectrum(problem, data, sigma, mesh, kind)?;
    let coarse = spectrum(problem, data, sigma, mesh / 2, kind)?;
    Ok(classify(&fine, &coarse, problem.tolerances.kernel_tol, mesh, sigma))
}

/// Index and nullity of `C_sigma` restricted to `H_P(sigma)` or `H*_P(sigma)`.
pub fn index_and_nullity(problem: &MorseSturmProblem, sigma: f64, mesh: usize, kind: SpaceKind) -> Result<IndexResult> {
    problem.require_regime()?;
    index_unchecked(problem, sigma, mesh, kind)
}

/// [`index_and_nullity`] without the validation pass, for sweeps that have
/// already validated the problem.
pub(crate) fn index_unchecked(problem: &MorseSturmProblem, sigma: f64, mesh: usize, kind: SpaceKind) -> Result<IndexResult> {
    let data = FormData::from_problem(problem, false);
    index_with(problem, &data, sigma, mesh, kind)
}

/// `n_-(H*) - n_-(H0)` at `sigma = 1`.
pub fn epsilon_invariant(problem: &MorseSturmProblem, mesh: usize) -> Result<usize> {
    problem.require_regime()?;
    let star = index_unchecked(problem, 1.0, mesh, SpaceKind::HStar)?;
    let zero = index_unchecked(problem, 1.0, mesh, SpaceKind::H0)?;
    epsilon_from(&star, &zero)
}

pub(crate) fn epsilon_from(star: &IndexResult, zero: &IndexResult) -> Result<usize> {
    let d = star.n_minus as i64 - zero.n_minus as i64;
    if !(0..=1).contains(&d) {
        return Err(Error::Discretization(format!(
            "index difference {d} between H* and H0 outside {{0, 1}}"
        )));
    }
    Ok(d as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoEndpointResult {
    /// Index of the two-endpoint form on the `H0`-type space with `V(1) in Q`.
    pub total: IndexResult,
    /// Inertia of the endpoint form on `J_Q`.
    pub correction: Inertia,
    pub decomposition_valid: bool,
    pub j_q_dim: usize,
}

/// Endpoint form `F(J1, J2) = g(S_Q J1(1), J2(1)) + g(J1'(1), J2(1))` on the
/// P-Jacobi fields with coefficient vectors in the span of `coeffs` whose
/// value at 1 lies in `Q`; returns its matrix and the dimension of that space.
pub(crate) fn endpoint_form(problem: &MorseSturmProblem, basis: &FieldBasis, coeffs: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = problem.dim();
    let g = problem.g.matrix();
    let (m1, d1) = basis.eval(1.0);
    let (qm, sq) = match (&problem.q, &problem.s_q) {
        (Some(q), Some(s)) => (q.matrix().clone(), s.clone()),
        _ => (DMatrix::zeros(n, 0), DMatrix::zeros(0, 0)),
    };
    let qo = orthonormal_range(&qm, crate::linalg::INDEPENDENCE_TOL);
    let u = orthonormal_complement(&qo);
    let cond = u.transpose() * &m1 * coeffs;
    let k = if cond.nrows() == 0 {
        DMatrix::identity(coeffs.ncols(), coeffs.ncols())
    } else {
        null_space(&cond, problem.tolerances.rank_tol)
    };
    let k = coeffs * k;
    if k.ncols() == 0 {
        return Ok((DMatrix::zeros(0, 0), 0.0));
    }
    let w = &m1 * &k;
    let wp = &d1 * &k;
    let shape_term = if qm.ncols() > 0 {
        let x = qm
            .clone()
            .svd(true, true)
            .solve(&w, 1e-14)
            .map_err(|e| Error::Discretization(e.to_string()))?;
        &qm * sq * x
    } else {
        DMatrix::zeros(n, k.ncols())
    };
    let f = shape_term.transpose() * g * &w + wp.transpose() * g * &w;
    let scale = w.norm() * (d1.norm() + shape_term.norm()) * g.norm();
    Ok((sym(&f), scale))
}

/// Index of the two-endpoint form and the finite-dimensional correction on `J_Q`.
pub fn two_endpoint_index(problem: &MorseSturmProblem, mesh: usize) -> Result<TwoEndpointResult> {
    problem.require_regime()?;
    let q = problem
        .q
        .as_ref()
        .ok_or_else(|| Error::Schema("two-endpoint index needs Q".into()))?;
    let data = FormData::from_problem(problem, true);
    let total = index_with(problem, &data, 1.0, mesh, SpaceKind::H0)?;
    let basis = p_jacobi_basis(problem, 1.0)?;
    let (j1, _) = value_spaces(problem, &basis, 1.0)?;
    let decomposition_valid = j1.contains(q, CONTAINMENT_TOL);
    let coeffs = zero_constant_coefficients(problem, &basis);
    let (f, scale) = endpoint_form(problem, &basis, &coeffs)?;
    let correction = inertia_with_scale(&f, problem.tolerances.kernel_tol, scale)?;
    Ok(TwoEndpointResult { total, correction, decomposition_valid, j_q_dim: f.nrows() })
}

/// Index of the unconstrained Riemannian problem obtained by deleting the
/// coordinates `drop` and replacing `g` with the identity.
pub fn riemannian_reduction_index(problem: &MorseSturmProblem, drop: &[usize], sigma: f64, mesh: usize) -> Result<IndexResult> {
    check_mesh(mesh)?;
    check_sigma(sigma)?;
    let n = problem.dim();
    let keep: Vec<usize> = (0..n).filter(|i| !drop.contains(i)).collect();
    let r = problem.r.delete_coordinates(drop);
    let g = DMatrix::<f64>::identity(keep.len(), keep.len());
    let pm = problem.p.matrix();
    if drop.iter().any(|&i| pm.row(i).amax() > 0.0) {
        return Err(Error::Schema("P must lie in the kept coordinates".into()));
    }
    let p = DMatrix::from_fn(keep.len(), pm.ncols(), |i, j| pm[(keep[i], j)]);
    let shape = p.transpose() * (p.clone() * &problem.s_p);
    let data = FormData { g: &g, r: &r, p: &p, shape_p: sym(&shape), q: None };
    let spec = |mesh: usize| -> Result<Vec<f64>> {
        let layout = Layout::new(&data, mesh);
        let a = assemble(&data, &layout, sigma);
        let z = DMatrix::identity(layout.dof_count(), layout.dof_count());
        relative_spectrum(&a, &h1_gram(&layout), &z)
    };
    Ok(classify(&spec(mesh)?, &spec(mesh / 2)?, problem.tolerances.kernel_tol, mesh, sigma))
}

/// `n_-` of the endpoint form on all P-Jacobi fields with value at 1 in `Q`
/// (vanishing at 1 when there is no `Q`).
pub fn star_correction(problem: &MorseSturmProblem) -> Result<Inertia> {
    let basis = p_jacobi_basis(problem, 1.0)?;
    let all = DMatrix::identity(basis.len(), basis.len());
    let (f, scale) = endpoint_form(problem, &basis, &all)?;
    inertia_with_scale(&f, problem.tolerances.kernel_tol, scale)
}

/// Whether the `H*` and `H0` kernels coincide (as subspaces) at `sigma`.
pub fn kernels_coincide(problem: &MorseSturmProblem, sigma: f64, mesh: usize) -> Result<bool> {
    let a = constraint_kernel(problem, sigma, mesh, SpaceKind::H0)?;
    let b = constraint_kernel(problem, sigma, mesh, SpaceKind::HStar)?;
    let sa = SubspaceBasis::new(a.kernel_basis)?;
    let sb = SubspaceBasis::new(b.kernel_basis)?;
    Ok(sa.same_subspace(&sb, 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::VectorCurve;
    use crate::linalg::MetricForm;
    use crate::problem::Tolerances;
    use nalgebra::dvector;
    use std::f64::consts::PI;

    fn sphere(k: f64) -> MorseSturmProblem {
        MorseSturmProblem::new(
            MetricForm::minkowski(3),
            MatrixCurve::constant(&DMatrix::from_diagonal(&dvector![0.0, 0.0, -k])),
            VectorCurve::constant(&dvector![1.0, 0.0, 0.0]),
            SubspaceBasis::zero(3),
            DMatrix::zeros(0, 0),
            None,
            Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn sigma_zero_is_stiffness() {
        let p = sphere(20.0);
        let (space, a) = assemble_reparametrized_form(&p, 0.0, 8).unwrap();
        assert_eq!(space.dof_count, 3 * 7);
        let (_, flat) = assemble_reparametrized_form(&crate::generators::flat_problem(3, crate::generators::PChoice::Point), 0.0, 8).unwrap();
        assert_eq!(a, flat);
        assert_eq!(a[(0, 0)], -16.0);
        assert_eq!(a[(1, 1)], 16.0);
        assert_eq!(a[(1, 4)], -8.0);
    }

    #[test]
    fn r_term_scales_with_sigma_squared() {
        let p = sphere(20.0);
        let flat = crate::generators::flat_problem(3, crate::generators::PChoice::Point);
        let (_, a1) = assemble_reparametrized_form(&p, 0.5, 16).unwrap();
        let (_, f1) = assemble_reparametrized_form(&flat, 0.5, 16).unwrap();
        let (_, a2) = assemble_reparametrized_form(&p, 1.0, 16).unwrap();
        let (_, f2) = assemble_reparametrized_form(&flat, 1.0, 16).unwrap();
        assert!(((&a2 - &f2) - (&a1 - &f1) * 4.0).amax() < 1e-12);
    }

    #[test]
    fn static_kernels() {
        let p = sphere(20.0);
        let h0 = constraint_kernel(&p, 1.0, 16, SpaceKind::H0).unwrap();
        // e0 components vanish
        for j in 0..h0.kernel_basis.ncols() {
            for node in 0..15 {
                assert!(h0.kernel_basis[(3 * node, j)].abs() < 1e-10);
            }
        }
        assert_eq!(h0.kernel_basis.ncols(), 2 * 15);
        assert!(kernels_coincide(&p, 1.0, 16).unwrap());
    }

    #[test]
    fn sphere_index() {
        let p = sphere((1.5 * PI).powi(2));
        let r = index_and_nullity(&p, 1.0, 64, SpaceKind::H0).unwrap();
        assert_eq!((r.n_minus, r.nullity), (1, 0));
        let r = index_and_nullity(&p, 0.5, 64, SpaceKind::H0).unwrap();
        assert_eq!((r.n_minus, r.nullity), (0, 0));
        let r = index_and_nullity(&p, 2.0 / 3.0, 64, SpaceKind::H0).unwrap();
        assert_eq!(r.nullity, 1);
        assert_eq!(epsilon_invariant(&p, 32).unwrap(), 0);
        let rr = riemannian_reduction_index(&p, &[0], 1.0, 64).unwrap();
        assert_eq!((rr.n_minus, rr.nullity), (1, 0));
    }

    #[test]
    fn two_endpoint_sphere() {
        let e3 = SubspaceBasis::from_vectors(3, &[dvector![0.0, 0.0, 1.0]]).unwrap();
        let p = sphere((1.25 * PI).powi(2)).with_q(e3.clone(), DMatrix::zeros(1, 1)).unwrap();
        let r = two_endpoint_index(&p, 64).unwrap();
        assert!(r.decomposition_valid);
        assert_eq!(r.correction, Inertia { n_minus: 0, n_zero: 0, n_plus: 1 });
        assert_eq!((r.total.n_minus, r.total.nullity), (1, 0));

        let p = sphere((1.5 * PI).powi(2)).with_q(e3, DMatrix::zeros(1, 1)).unwrap();
        let r = two_endpoint_index(&p, 64).unwrap();
        assert_eq!(r.correction, Inertia { n_minus: 0, n_zero: 1, n_plus: 0 });
        assert_eq!((r.total.n_minus, r.total.nullity), (1, 1));
    }
}

