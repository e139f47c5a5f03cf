//! Vector- and matrix-valued curves on `[0, 1]`: constants, polynomials in
//! `t`, and uniformly sampled data with not-a-knot cubic spline
//! interpolation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of nodes in a sampled curve.
pub const MIN_SAMPLES: usize = 33;

/// Curve payload as it appears in a problem file. `T` is `Vec<f64>` for
/// vector curves and `Vec<Vec<f64>>` (row-major) for matrix curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveSpec<T> {
    Constant { value: T },
    /// `f(t) = sum_k coeffs[k] t^k`.
    Polynomial { coeffs: Vec<T> },
    /// Values at `samples.len()` uniform nodes on `[0, 1]`.
    Sampled { samples: Vec<T> },
}

#[derive(Debug, Clone)]
enum Compiled {
    Constant(DVector<f64>),
    Polynomial(Vec<DVector<f64>>),
    Sampled(Spline),
}

/// Flat curve in `R^m` with value and first two derivatives.
#[derive(Debug, Clone)]
struct Curve {
    dim: usize,
    compiled: Compiled,
}

impl Curve {
    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        match &self.compiled {
            Compiled::Constant(c) => (c.clone(), DVector::zeros(self.dim), DVector::zeros(self.dim)),
            Compiled::Polynomial(coeffs) => {
                let mut v = DVector::zeros(self.dim);
                let mut d1 = DVector::zeros(self.dim);
                let mut d2 = DVector::zeros(self.dim);
                // Horner on value and both derivatives.
                for c in coeffs.iter().rev() {
                    d2 = d2 * t + &d1 * 2.0;
                    d1 = d1 * t + &v;
                    v = v * t + c;
                }
                (v, d1, d2)
            }
            Compiled::Sampled(s) => s.eval(t),
        }
    }
}

/// Not-a-knot cubic spline through uniformly spaced samples, one column per
/// component.
#[derive(Debug, Clone)]
struct Spline {
    h: f64,
    values: Vec<DVector<f64>>,
    second: Vec<DVector<f64>>,
}

impl Spline {
    fn new(values: Vec<DVector<f64>>) -> Self {
        let m = values.len();
        let dim = values[0].len();
        let h = 1.0 / (m - 1) as f64;
        let rhs: Vec<DVector<f64>> = (0..m)
            .map(|i| {
                if i == 0 || i == m - 1 {
                    DVector::zeros(dim)
                } else {
                    (&values[i - 1] - &values[i] * 2.0 + &values[i + 1]) * (6.0 / (h * h))
                }
            })
            .collect();
        let mut second = vec![DVector::zeros(dim); m];
        // With not-a-knot ends on a uniform grid, rows 1 and m-2 decouple
        // to 6 M = rhs; the rows in between form a (1, 4, 1) tridiagonal system.
        second[1] = &rhs[1] / 6.0;
        second[m - 2] = &rhs[m - 2] / 6.0;
        let lo = 2;
        let hi = m - 3;
        if hi >= lo {
            let len = hi - lo + 1;
            let mut diag = vec![4.0; len];
            let mut b: Vec<DVector<f64>> = (lo..=hi).map(|i| rhs[i].clone()).collect();
            b[0] -= &second[1];
            b[len - 1] -= &second[m - 2];
            for k in 1..len {
                let w = 1.0 / diag[k - 1];
                diag[k] -= w;
                let prev = b[k - 1].clone();
                b[k] -= prev * w;
            }
            second[hi] = &b[len - 1] / diag[len - 1];
            for k in (0..len - 1).rev() {
                second[lo + k] = (&b[k] - &second[lo + k + 1]) / diag[k];
            }
        }
        second[0] = &second[1] * 2.0 - &second[2];
        second[m - 1] = &second[m - 2] * 2.0 - &second[m - 3];
        Self { h, values, second }
    }

    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let m = self.values.len();
        let t = t.clamp(0.0, 1.0);
        let i = ((t / self.h).floor() as usize).min(m - 2);
        let h = self.h;
        let a = ((i + 1) as f64 * h - t) / h;
        let b = 1.0 - a;
        let (y0, y1) = (&self.values[i], &self.values[i + 1]);
        let (m0, m1) = (&self.second[i], &self.second[i + 1]);
        let v = y0 * a + y1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0);
        let d1 = (y1 - y0) / h - m0 * ((3.0 * a * a - 1.0) * h / 6.0)
            + m1 * ((3.0 * b * b - 1.0) * h / 6.0);
        let d2 = m0 * a + m1 * b;
        (v, d1, d2)
    }
}

fn compile(dim: usize, spec: CurveSpec<DVector<f64>>) -> Result<Curve> {
    let check = |v: &DVector<f64>| -> Result<()> {
        if v.len() != dim {
            return Err(Error::Dimension { expected: dim, got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Schema("curve payload contains non-finite values".into()));
        }
        Ok(())
    };
    let compiled = match spec {
        CurveSpec::Constant { value } => {
            check(&value)?;
            Compiled::Constant(value)
        }
        CurveSpec::Polynomial { coeffs } => {
            if coeffs.is_empty() {
                return Err(Error::Schema("polynomial curve needs at least one coefficient".into()));
            }
            coeffs.iter().try_for_each(check)?;
            Compiled::Polynomial(coeffs)
        }
        CurveSpec::Sampled { samples } => {
            if samples.len() < MIN_SAMPLES {
                return Err(Error::Schema(format!(
                    "sampled curve needs at least {MIN_SAMPLES} nodes, got {}",
                    samples.len()
                )));
            }
            samples.iter().try_for_each(check)?;
            Compiled::Sampled(Spline::new(samples))
        }
    };
    Ok(Curve { dim, compiled })
}

fn map_spec<T, U>(spec: &CurveSpec<T>, mut f: impl FnMut(&T) -> U) -> CurveSpec<U> {
    match spec {
        CurveSpec::Constant { value } => CurveSpec::Constant { value: f(value) },
        CurveSpec::Polynomial { coeffs } => {
            CurveSpec::Polynomial { coeffs: coeffs.iter().map(f).collect() }
        }
        CurveSpec::Sampled { samples } => {
            CurveSpec::Sampled { samples: samples.iter().map(f).collect() }
        }
    }
}

/// A curve `[0, 1] -> R^n`.
#[derive(Debug, Clone)]
pub struct VectorCurve {
    spec: CurveSpec<Vec<f64>>,
    curve: Curve,
}

impl VectorCurve {
    pub fn new(n: usize, spec: CurveSpec<Vec<f64>>) -> Result<Self> {
        let flat = map_spec(&spec, |v| DVector::from_column_slice(v));
        let curve = compile(n, flat)?;
        Ok(Self { spec, curve })
    }

    pub fn constant(v: &DVector<f64>) -> Self {
        Self::new(v.len(), CurveSpec::Constant { value: v.as_slice().to_vec() })
            .expect("finite constant")
    }

    pub fn polynomial(coeffs: &[DVector<f64>]) -> Result<Self> {
        let n = coeffs.first().map_or(0, |c| c.len());
        Self::new(
            n,
            CurveSpec::Polynomial { coeffs: coeffs.iter().map(|c| c.as_slice().to_vec()).collect() },
        )
    }

    pub fn sampled(samples: &[DVector<f64>]) -> Result<Self> {
        let n = samples.first().map_or(0, |c| c.len());
        Self::new(
            n,
            CurveSpec::Sampled { samples: samples.iter().map(|c| c.as_slice().to_vec()).collect() },
        )
    }

    pub fn dim(&self) -> usize {
        self.curve.dim
    }

    pub fn spec(&self) -> &CurveSpec<Vec<f64>> {
        &self.spec
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.spec, CurveSpec::Sampled { .. })
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        self.curve.eval(t).0
    }

    /// Value, first and second derivative at `t`.
    pub fn eval_all(&self, t: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        self.curve.eval(t)
    }

    /// Applies the constant linear map `l` pointwise.
    pub fn map_linear(&self, l: &DMatrix<f64>) -> Self {
        let spec = map_spec(&self.spec, |v| (l * DVector::from_column_slice(v)).as_slice().to_vec());
        Self::new(l.nrows(), spec).expect("linear image of a valid curve")
    }

    /// `t -> self(t) + (a + b t) e`.
    pub fn add_affine(&self, e: &DVector<f64>, a: f64, b: f64) -> Self {
        let n = self.dim();
        let spec = match &self.spec {
            CurveSpec::Constant { value } => {
                let c0 = DVector::from_column_slice(value) + e * a;
                CurveSpec::Polynomial { coeffs: vec![c0.as_slice().to_vec(), (e * b).as_slice().to_vec()] }
            }
            CurveSpec::Polynomial { coeffs } => {
                let mut cs: Vec<DVector<f64>> =
                    coeffs.iter().map(|c| DVector::from_column_slice(c)).collect();
                if cs.len() < 2 {
                    cs.push(DVector::zeros(n));
                }
                cs[0] += e * a;
                cs[1] += e * b;
                CurveSpec::Polynomial { coeffs: cs.iter().map(|c| c.as_slice().to_vec()).collect() }
            }
            CurveSpec::Sampled { samples } => {
                let m = samples.len();
                CurveSpec::Sampled {
                    samples: samples
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let t = i as f64 / (m - 1) as f64;
                            (DVector::from_column_slice(s) + e * (a + b * t)).as_slice().to_vec()
                        })
                        .collect(),
                }
            }
        };
        Self::new(n, spec).expect("affine shift of a valid curve")
    }
}

/// A curve `[0, 1] -> R^{n x n}`.
#[derive(Debug, Clone)]
pub struct MatrixCurve {
    n: usize,
    spec: CurveSpec<Vec<Vec<f64>>>,
    curve: Curve,
}

fn flatten(n: usize, rows: &[Vec<f64>]) -> Result<DVector<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Schema(format!("expected an {n}x{n} matrix")));
    }
    Ok(DVector::from_iterator(n * n, rows.iter().flat_map(|r| r.iter().copied())))
}

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl MatrixCurve {
    pub fn new(n: usize, spec: CurveSpec<Vec<Vec<f64>>>) -> Result<Self> {
        let flat = match &spec {
            CurveSpec::Constant { value } => CurveSpec::Constant { value: flatten(n, value)? },
            CurveSpec::Polynomial { coeffs } => CurveSpec::Polynomial {
                coeffs: coeffs.iter().map(|c| flatten(n, c)).collect::<Result<_>>()?,
            },
            CurveSpec::Sampled { samples } => CurveSpec::Sampled {
                samples: samples.iter().map(|c| flatten(n, c)).collect::<Result<_>>()?,
            },
        };
        let curve = compile(n * n, flat)?;
        Ok(Self { n, spec, curve })
    }

    pub fn constant(m: &DMatrix<f64>) -> Self {
        Self::new(m.nrows(), CurveSpec::Constant { value: to_rows(m) }).expect("square constant")
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(&DMatrix::zeros(n, n))
    }

    pub fn polynomial(coeffs: &[DMatrix<f64>]) -> Result<Self> {
        let n = coeffs.first().map_or(0, |c| c.nrows());
        Self::new(n, CurveSpec::Polynomial { coeffs: coeffs.iter().map(to_rows).collect() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &CurveSpec<Vec<Vec<f64>>> {
        &self.spec
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let flat = self.curve.eval(t).0;
        DMatrix::from_row_slice(self.n, self.n, flat.as_slice())
    }

    /// The curve with the listed coordinates removed from rows and columns.
    pub fn delete_coordinates(&self, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.n).filter(|i| !drop.contains(i)).collect();
        let spec = map_spec(&self.spec, |rows| {
            keep.iter().map(|&i| keep.iter().map(|&j| rows[i][j]).collect()).collect()
        });
        Self::new(keep.len(), spec).expect("sub-block of a valid curve")
    }
}
