//! Symmetric bilinear forms of index one on `R^n` and the dense linear
//! algebra the rest of the crate leans on: g-orthogonal complements,
//! nondegeneracy tests, inertia counts and orthonormal kernels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative threshold below which an eigenvalue counts as zero.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;

/// Relative smallest-singular-value threshold for linear independence of a
/// basis.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

/// A nondegenerate symmetric bilinear form on `R^n` with exactly one negative
/// direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricForm {
    entries: DMatrix<f64>,
}

impl MetricForm {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::Schema(format!(
                "metric must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::Schema(format!("metric dimension must be >= 2, got {n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::Schema(format!(
                        "metric is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let inertia = inertia(&entries, DEFAULT_KERNEL_TOL)?;
        if inertia != (Inertia { n_minus: 1, n_zero: 0, n_plus: n - 1 }) {
            return Err(Error::Schema(format!(
                "metric must have index 1 and be nondegenerate, got inertia {inertia:?}"
            )));
        }
        Ok(Self { entries })
    }

    /// `diag(-1, 1, ..., 1)`.
    pub fn minkowski(n: usize) -> Self {
        let mut d = DVector::from_element(n, 1.0);
        d[0] = -1.0;
        Self { entries: DMatrix::from_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.entries * v)[(0, 0)]
    }

    /// Gram matrix `B^T g B` of the columns of `basis`.
    pub fn gram(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        basis.transpose() * &self.entries * basis
    }
}

/// `g(u, v) = u^T g v`.
pub fn g_inner(g: &MetricForm, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let n = g.dim();
    for w in [u, v] {
        if w.len() != n {
            return Err(Error::Dimension { expected: n, got: w.len() });
        }
    }
    Ok(g.inner(u, v))
}

/// A linear subspace of `R^n` given by independent column vectors. Zero
/// columns denote the zero subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    vectors: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn new(vectors: DMatrix<f64>) -> Result<Self> {
        if vectors.ncols() > 0 {
            let sv = vectors.singular_values();
            let max = sv.max();
            let min = sv.min();
            if vectors.ncols() > vectors.nrows() || !(min > INDEPENDENCE_TOL * max) {
                return Err(Error::Schema(
                    "subspace basis vectors are not linearly independent".into(),
                ));
            }
        }
        Ok(Self { vectors })
    }

    pub fn from_vectors(ambient_dim: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::Dimension { expected: ambient_dim, got: v.len() });
            }
        }
        if vectors.is_empty() {
            return Ok(Self::zero(ambient_dim));
        }
        Self::new(DMatrix::from_columns(vectors))
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self { vectors: DMatrix::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { vectors: DMatrix::identity(ambient_dim, ambient_dim) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Basis vectors as the columns of an `n x dim` matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    /// Euclidean orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        let q = orthonormal_range(&self.vectors, INDEPENDENCE_TOL);
        &q * q.transpose()
    }

    /// Basis-independent equality: `||P_A - P_B|| < tol`.
    pub fn same_subspace(&self, other: &SubspaceBasis, tol: f64) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && (self.projector() - other.projector()).norm() < tol
    }

    /// Whether `other` lies inside `self` (`||(I - P_self) other|| <= tol ||other||`).
    pub fn contains(&self, other: &SubspaceBasis, tol: f64) -> bool {
        if other.is_zero() {
            return true;
        }
        let p = self.projector();
        let resid = other.matrix() - &p * other.matrix();
        resid.norm() <= tol * other.matrix().norm()
    }
}

/// `{v : g(v, p) = 0 for all p in P}`, as an orthonormal (Euclidean) basis.
pub fn g_orthogonal_complement(g: &MetricForm, p: &SubspaceBasis) -> Result<SubspaceBasis> {
    let n = g.dim();
    if p.ambient_dim() != n {
        return Err(Error::Dimension { expected: n, got: p.ambient_dim() });
    }
    if p.is_zero() {
        return Ok(SubspaceBasis::full(n));
    }
    let constraints = (g.matrix() * p.matrix()).transpose();
    Ok(SubspaceBasis { vectors: null_space(&constraints, INDEPENDENCE_TOL) })
}

/// Whether `g` restricted to `P` is nondegenerate, judged by the relative
/// smallest singular value of the Gram matrix.
pub fn is_nondegenerate(g: &MetricForm, p: &SubspaceBasis, tol: f64) -> bool {
    if p.is_zero() {
        return true;
    }
    let sv = g.gram(p.matrix()).singular_values();
    sv.min() > tol * sv.max()
}

/// Signature counts of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.n_minus + self.n_zero + self.n_plus
    }

    /// Counts eigenvalue signs; `|lambda| <= zero_threshold` counts as zero.
    pub fn from_eigenvalues(eigs: impl IntoIterator<Item = f64>, zero_threshold: f64) -> Self {
        let mut out = Inertia { n_minus: 0, n_zero: 0, n_plus: 0 };
        for l in eigs {
            if l.abs() <= zero_threshold {
                out.n_zero += 1;
            } else if l < 0.0 {
                out.n_minus += 1;
            } else {
                out.n_plus += 1;
            }
        }
        out
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension { expected: m.nrows(), got: m.ncols() });
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Inertia of a symmetric matrix via its eigenvalues; eigenvalues with
/// `|lambda| <= kernel_tol * max|lambda|` count as zero.
pub fn inertia(m: &DMatrix<f64>, kernel_tol: f64) -> Result<Inertia> {
    inertia_with_scale(m, kernel_tol, 0.0)
}

/// Like [`inertia`], but the zero threshold is relative to
/// `max(max|lambda|, scale)`. Needed when the whole form may vanish, so that
/// the largest eigenvalue is itself roundoff.
pub fn inertia_with_scale(m: &DMatrix<f64>, kernel_tol: f64, scale: f64) -> Result<Inertia> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Ok(Inertia { n_minus: 0, n_zero: 0, n_plus: 0 });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eigs = sym.symmetric_eigenvalues();
    let max = eigs.amax().max(scale);
    Ok(Inertia::from_eigenvalues(eigs.iter().copied(), kernel_tol * max))
}

/// Orthonormal basis of the column space of `m`, dropping singular values
/// below `tol * sigma_max`.
pub fn orthonormal_range(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let max = svd.singular_values.max();
    if max == 0.0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol * max)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal columns spanning the orthogonal complement of the columns of
/// `w`, which must already be orthonormal.
pub fn orthonormal_complement(w: &DMatrix<f64>) -> DMatrix<f64> {
    let d = w.nrows();
    let r = w.ncols();
    if r == 0 {
        return DMatrix::identity(d, d);
    }
    if r >= d {
        return DMatrix::zeros(d, 0);
    }
    // Full Householder Q of w: its trailing d - r columns span w^perp.
    let qr = w.clone().qr();
    let mut qt = DMatrix::<f64>::identity(d, d);
    qr.q_tr_mul(&mut qt);
    qt.rows(r, d - r).transpose()
}

/// Orthonormal kernel basis of `m` (columns), singular values below
/// `tol * sigma_max` treated as zero.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 || m.amax() == 0.0 {
        return DMatrix::identity(cols, cols);
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.max();
    let row_space: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol * max)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if row_space.is_empty() {
        return DMatrix::identity(cols, cols);
    }
    orthonormal_complement(&DMatrix::from_columns(&row_space))
}

/// Numerical rank with a relative singular-value threshold.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn inner_products_on_diagonal_metrics() {
        let g2 = MetricForm::minkowski(2);
        assert_eq!(g_inner(&g2, &dvector![1.0, 0.0], &dvector![1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(g_inner(&g2, &dvector![1.0, 0.0], &dvector![0.0, 1.0]).unwrap(), 0.0);
        let g3 = MetricForm::minkowski(3);
        let light = dvector![1.0, 1.0, 0.0];
        assert_eq!(g_inner(&g3, &light, &light).unwrap(), 0.0);
        assert!(matches!(
            g_inner(&g3, &dvector![1.0, 0.0], &light),
            Err(Error::Dimension { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn metric_rejects_wrong_signature() {
        assert!(MetricForm::new(diag(&[1.0, 1.0])).is_err());
        assert!(MetricForm::new(diag(&[-1.0, -1.0, 1.0])).is_err());
        assert!(MetricForm::new(diag(&[-1.0, 0.0, 1.0])).is_err());
        assert!(MetricForm::new(DMatrix::from_row_slice(2, 2, &[-1.0, 0.1, 0.2, 1.0])).is_err());
        assert!(MetricForm::new(diag(&[-2.0, 3.0, 1.0])).is_ok());
    }

    #[test]
    fn complements() {
        let g = MetricForm::minkowski(3);
        let p = SubspaceBasis::from_vectors(3, &[dvector![0.0, 1.0, 0.0]]).unwrap();
        let c = g_orthogonal_complement(&g, &p).unwrap();
        let expected = SubspaceBasis::from_vectors(
            3,
            &[dvector![1.0, 0.0, 0.0], dvector![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(c.same_subspace(&expected, 1e-12));

        let full = g_orthogonal_complement(&g, &SubspaceBasis::zero(3)).unwrap();
        assert_eq!(full.dim(), 3);

        let g2 = MetricForm::minkowski(2);
        let light = SubspaceBasis::from_vectors(2, &[dvector![1.0, 1.0]]).unwrap();
        let lc = g_orthogonal_complement(&g2, &light).unwrap();
        assert!(lc.same_subspace(&light, 1e-12));
    }

    #[test]
    fn nondegeneracy() {
        let g2 = MetricForm::minkowski(2);
        let light = SubspaceBasis::from_vectors(2, &[dvector![1.0, 1.0]]).unwrap();
        assert!(!is_nondegenerate(&g2, &light, 1e-9));
        let g3 = MetricForm::minkowski(3);
        let plane = SubspaceBasis::from_vectors(
            3,
            &[dvector![0.0, 1.0, 0.0], dvector![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(is_nondegenerate(&g3, &plane, 1e-9));
        assert!(is_nondegenerate(&g3, &SubspaceBasis::zero(3), 1e-9));
    }

    #[test]
    fn inertia_examples() {
        let i = inertia(&diag(&[-2.0, 0.0, 5.0]), 1e-9).unwrap();
        assert_eq!(i, Inertia { n_minus: 1, n_zero: 1, n_plus: 1 });
        let i = inertia(&DMatrix::identity(3, 3), 1e-9).unwrap();
        assert_eq!(i, Inertia { n_minus: 0, n_zero: 0, n_plus: 3 });
        let i = inertia(&diag(&[-1.0, -1.0]), 1e-9).unwrap();
        assert_eq!(i, Inertia { n_minus: 2, n_zero: 0, n_plus: 0 });
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(inertia(&bad, 1e-9), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn dependent_basis_rejected() {
        let r = SubspaceBasis::from_vectors(3, &[dvector![1.0, 2.0, 0.0], dvector![2.0, 4.0, 0.0]]);
        assert!(r.is_err());
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0]);
        let k = null_space(&m, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).amax() < 1e-12);
        assert!((k.transpose() * &k - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
