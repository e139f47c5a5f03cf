//! Morse-Sturm initial data `(g, R, Y, P, S_P)` with optional second endpoint
//! data `(Q, S_Q)`, the problem-file schema, classification of the timelike
//! Jacobi field `Y`, and validation.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::{to_rows, CurveSpec, MatrixCurve, VectorCurve};
use crate::error::{Error, Result};
use crate::linalg::{is_nondegenerate, MetricForm, SubspaceBasis};

/// Number of uniform nodes on `[0, 1]` used for validation and classification.
pub const VALIDATION_NODES: usize = 257;

/// Relative threshold for `m(Y)` to count as zero.
pub const CLASSIFY_TOL: f64 = 1e-6;

/// Relative Jacobi-equation residual allowed for `Y` given in closed form.
pub const JACOBI_TOL_EXACT: f64 = 1e-8;

/// Relative Jacobi-equation residual allowed for sampled `Y`; spline second
/// derivatives are only second-order accurate.
pub const JACOBI_TOL_SAMPLED: f64 = 1e-3;

/// Relative tolerance for g-symmetry of `R` and the shape operators, and for
/// orthogonality of `Y(0)` to `P`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Numerical knobs carried by a problem file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "defaults::ode_steps")]
    pub ode_steps: usize,
    #[serde(default = "defaults::rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "defaults::kernel_tol")]
    pub kernel_tol: f64,
    #[serde(default = "defaults::bisect_tol")]
    pub bisect_tol: f64,
    /// Allowed Richardson estimate of the integration error, relative to the
    /// solution size.
    #[serde(default = "defaults::ode_tol")]
    pub ode_tol: f64,
}

mod defaults {
    pub fn ode_steps() -> usize {
        2048
    }
    pub fn rank_tol() -> f64 {
        1e-8
    }
    pub fn kernel_tol() -> f64 {
        1e-9
    }
    pub fn bisect_tol() -> f64 {
        1e-10
    }
    pub fn ode_tol() -> f64 {
        1e-8
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_steps: defaults::ode_steps(),
            rank_tol: defaults::rank_tol(),
            kernel_tol: defaults::kernel_tol(),
            bisect_tol: defaults::bisect_tol(),
            ode_tol: defaults::ode_tol(),
        }
    }
}

/// On-disk problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: CurveSpec<Vec<Vec<f64>>>,
    #[serde(rename = "Y")]
    pub y: CurveSpec<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(rename = "S_P")]
    pub s_p: Vec<Vec<f64>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(rename = "S_Q", default, skip_serializing_if = "Option::is_none")]
    pub s_q: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// How `Y` behaves with respect to the vector field `m(Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YKind {
    /// `m(Y)(0) != 0`: `Y(0)` and `Y'(0)` independent.
    Admissible,
    /// `m(Y)` vanishes identically.
    Singular,
    /// Neither of the above.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YClassification {
    pub kind: YKind,
    pub m_at_zero_norm: f64,
    pub max_m_norm: f64,
    /// Normalisation used for the thresholds: `max|Y| / min|g(Y,Y)|`.
    pub scale: f64,
}

/// Which hypothesis of the index theorem holds for the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    YNotOrthogonalToP,
    Admissible,
    Singular,
    /// `Y(0)` orthogonal to `P` and `Y` generic: no theorem applies.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checks: Vec<Check>,
    pub classification: Option<YClassification>,
    pub y0_orthogonal_to_p: bool,
    pub regime: Regime,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Grid search window for [`MorseSturmProblem::perturb_to_admissible`]:
/// `count` equispaced values in `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SearchRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![0.5 * (self.min + self.max)];
        }
        (0..self.count)
            .map(|i| (self.min * (self.count - 1 - i) as f64 + self.max * i as f64) / (self.count - 1) as f64)
            .collect()
    }
}

/// Full Morse-Sturm data. Construction checks shapes only; the analytic
/// hypotheses are checked by [`MorseSturmProblem::validate`].
#[derive(Debug, Clone)]
pub struct MorseSturmProblem {
    pub g: MetricForm,
    pub r: MatrixCurve,
    pub y: VectorCurve,
    pub p: SubspaceBasis,
    /// Shape operator on `P` in the coordinates of the `P` basis.
    pub s_p: DMatrix<f64>,
    pub q: Option<SubspaceBasis>,
    pub s_q: Option<DMatrix<f64>>,
    pub tolerances: Tolerances,
}

fn square(rows: &[Vec<f64>], k: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(Error::Schema(format!("{what} must be {k}x{k}")));
    }
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

fn basis(n: usize, vectors: &[Vec<f64>], what: &str) -> Result<SubspaceBasis> {
    let vs: Vec<DVector<f64>> = vectors
        .iter()
        .map(|v| {
            if v.len() != n {
                Err(Error::Schema(format!("{what} basis vectors must have length {n}")))
            } else {
                Ok(DVector::from_column_slice(v))
            }
        })
        .collect::<Result<_>>()?;
    SubspaceBasis::from_vectors(n, &vs)
        .map_err(|e| Error::Schema(format!("{what}: {e}")))
}

fn linspace(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| i as f64 / (count - 1) as f64)
}

impl MorseSturmProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        g: MetricForm,
        r: MatrixCurve,
        y: VectorCurve,
        p: SubspaceBasis,
        s_p: DMatrix<f64>,
        q: Option<(SubspaceBasis, DMatrix<f64>)>,
        tolerances: Tolerances,
    ) -> Result<Self> {
        let n = g.dim();
        if r.dim() != n {
            return Err(Error::Dimension { expected: n, got: r.dim() });
        }
        if y.dim() != n {
            return Err(Error::Dimension { expected: n, got: y.dim() });
        }
        if p.ambient_dim() != n {
            return Err(Error::Dimension { expected: n, got: p.ambient_dim() });
        }
        if s_p.shape() != (p.dim(), p.dim()) {
            return Err(Error::Schema(format!("S_P must be {0}x{0}", p.dim())));
        }
        let (q, s_q) = match q {
            Some((q, s_q)) => {
                if q.ambient_dim() != n {
                    return Err(Error::Dimension { expected: n, got: q.ambient_dim() });
                }
                if s_q.shape() != (q.dim(), q.dim()) {
                    return Err(Error::Schema(format!("S_Q must be {0}x{0}", q.dim())));
                }
                (Some(q), Some(s_q))
            }
            None => (None, None),
        };
        if tolerances.ode_steps < 4 || tolerances.ode_steps % 2 != 0 {
            return Err(Error::Schema("ode_steps must be an even number >= 4".into()));
        }
        Ok(Self { g, r, y, p, s_p, q, s_q, tolerances })
    }

    pub fn from_file(file: &ProblemFile) -> Result<Self> {
        let n = file.n;
        let g = MetricForm::new(square(&file.g, n, "g")?)?;
        let r = MatrixCurve::new(n, file.r.clone())?;
        let y = VectorCurve::new(n, file.y.clone())?;
        let p = basis(n, &file.p, "P")?;
        let s_p = if p.dim() == 0 && file.s_p.iter().all(|r| r.is_empty()) {
            DMatrix::zeros(0, 0)
        } else {
            square(&file.s_p, p.dim(), "S_P")?
        };
        let q = match (&file.q, &file.s_q) {
            (Some(qv), s) => {
                let q = basis(n, qv, "Q")?;
                let s_q = match s {
                    Some(rows) if !(q.dim() == 0 && rows.iter().all(|r| r.is_empty())) => {
                        square(rows, q.dim(), "S_Q")?
                    }
                    _ => DMatrix::zeros(q.dim(), q.dim()),
                };
                Some((q, s_q))
            }
            (None, Some(_)) => return Err(Error::Schema("S_Q given without Q".into())),
            (None, None) => None,
        };
        Self::new(g, r, y, p, s_p, q, file.tolerances)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> ProblemFile {
        let cols = |b: &SubspaceBasis| -> Vec<Vec<f64>> {
            (0..b.dim()).map(|i| b.vector(i).as_slice().to_vec()).collect()
        };
        ProblemFile {
            n: self.dim(),
            g: to_rows(self.g.matrix()),
            r: self.r.spec().clone(),
            y: self.y.spec().clone(),
            p: cols(&self.p),
            s_p: to_rows(&self.s_p),
            q: self.q.as_ref().map(cols),
            s_q: self.s_q.as_ref().map(to_rows),
            tolerances: self.tolerances,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// A copy with `Y` replaced.
    pub fn with_y(&self, y: VectorCurve) -> Self {
        Self { y, ..self.clone() }
    }

    /// A copy with the second endpoint `(Q, S_Q)` set.
    pub fn with_q(&self, q: SubspaceBasis, s_q: DMatrix<f64>) -> Result<Self> {
        let (p, s_p) = (self.p.clone(), self.s_p.clone());
        Self::new(self.g.clone(), self.r.clone(), self.y.clone(), p, s_p, Some((q, s_q)), self.tolerances)
    }

    /// `S_P` as the map `R^{dim P} -> R^n`, `a -> S[P a]`.
    pub fn shape_p(&self) -> DMatrix<f64> {
        self.p.matrix() * &self.s_p
    }

    /// Symmetric matrix of `(a, b) -> g(S[P a], P b)` on `P` coordinates.
    pub fn shape_form_p(&self) -> DMatrix<f64> {
        let m = self.p.matrix().transpose() * self.g.matrix() * self.shape_p();
        (&m + m.transpose()) * 0.5
    }

    /// Symmetric matrix of `(a, b) -> g(S_Q[Q a], Q b)` on `Q` coordinates.
    pub fn shape_form_q(&self) -> Option<DMatrix<f64>> {
        let (q, s_q) = (self.q.as_ref()?, self.s_q.as_ref()?);
        let m = q.matrix().transpose() * self.g.matrix() * q.matrix() * s_q;
        Some((&m + m.transpose()) * 0.5)
    }

    /// `g(Y(t), Y(t))`.
    pub fn gyy(&self, t: f64) -> f64 {
        let y = self.y.eval(t);
        self.g.inner(&y, &y)
    }

    /// `m(Y)(t) = 2 Y'/g(Y,Y) - 2 Y g(Y,Y')/g(Y,Y)^2`.
    pub fn m_of_y(&self, t: f64) -> Result<DVector<f64>> {
        let (y, yp, _) = self.y.eval_all(t);
        let gyy = self.g.inner(&y, &y);
        if !(gyy < 0.0) {
            return Err(Error::NotTimelike { t, value: gyy });
        }
        let gyyp = self.g.inner(&y, &yp);
        Ok(&yp * (2.0 / gyy) - &y * (2.0 * gyyp / (gyy * gyy)))
    }

    /// Normalisation for `m(Y)`: `max|Y| / min|g(Y,Y)|` over the validation grid.
    fn m_scale(&self) -> f64 {
        let mut max_y: f64 = 0.0;
        let mut min_g = f64::INFINITY;
        for t in linspace(VALIDATION_NODES) {
            let y = self.y.eval(t);
            max_y = max_y.max(y.norm());
            min_g = min_g.min(self.g.inner(&y, &y).abs());
        }
        max_y / min_g
    }

    pub fn classify_y(&self) -> Result<YClassification> {
        let scale = self.m_scale();
        let m0 = self.m_of_y(0.0)?.norm();
        let mut max_m: f64 = 0.0;
        for t in linspace(VALIDATION_NODES) {
            max_m = max_m.max(self.m_of_y(t)?.norm());
        }
        let tol = CLASSIFY_TOL * scale;
        let kind = if max_m <= tol {
            YKind::Singular
        } else if m0 > tol {
            YKind::Admissible
        } else {
            YKind::Generic
        };
        Ok(YClassification { kind, m_at_zero_norm: m0, max_m_norm: max_m, scale })
    }

    pub fn y0_orthogonal_to_p(&self) -> bool {
        let y0 = self.y.eval(0.0);
        let gn = self.g.matrix().norm();
        (0..self.p.dim()).all(|i| {
            let p = self.p.vector(i);
            self.g.inner(&y0, &p).abs() <= 1e-9 * gn * y0.norm() * p.norm()
        })
    }

    fn check_direction(&self, e: &VectorCurve) -> Result<DVector<f64>> {
        if e.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: e.dim() });
        }
        let e0 = e.eval(0.0);
        let scale = e0.norm().max(f64::MIN_POSITIVE);
        for t in linspace(VALIDATION_NODES) {
            let (v, d1, _) = e.eval_all(t);
            let rn = self.r.eval(t).norm();
            if (v - &e0).norm() > 1e-12 * scale || d1.norm() > 1e-12 * scale {
                return Err(Error::Schema("geodesic direction must be constant in the parallel frame".into()));
            }
            if (self.r.eval(t) * &e0).norm() > 1e-10 * (1.0 + rn) * scale {
                return Err(Error::Schema("geodesic direction must satisfy R(t) e = 0".into()));
            }
        }
        Ok(e0)
    }

    /// Replaces `Y` by `Y + (a + b t) e` with the smallest `(a, b)` on the
    /// search grid that is timelike on `[0, 1]` and admissible. Returns
    /// `(0, 0)` and an unchanged problem when `Y` is already admissible.
    pub fn perturb_to_admissible(
        &self,
        gamma_dot: &VectorCurve,
        a_range: SearchRange,
        b_range: SearchRange,
    ) -> Result<(f64, f64, MorseSturmProblem)> {
        let e = self.check_direction(gamma_dot)?;
        let gee = self.g.inner(&e, &e);
        if gee < 0.0 {
            return Err(Error::TimelikeGeodesic);
        }
        if self.classify_y()?.kind == YKind::Admissible {
            return Ok((0.0, 0.0, self.clone()));
        }
        let mut candidates: Vec<(f64, f64)> = a_range
            .values()
            .into_iter()
            .flat_map(|a| b_range.values().into_iter().map(move |b| (a, b)))
            .collect();
        candidates.sort_by(|x, y| {
            let key = |(a, b): (f64, f64)| (a * a + b * b, a.abs(), a < 0.0, b < 0.0);
            key(*x).partial_cmp(&key(*y)).expect("finite search grid")
        });
        for (a, b) in candidates {
            let candidate = self.with_y(self.y.add_affine(&e, a, b));
            let timelike = linspace(VALIDATION_NODES).all(|t| candidate.gyy(t) < 0.0);
            if !timelike {
                continue;
            }
            if candidate.classify_y()?.kind == YKind::Admissible {
                return Ok((a, b, candidate));
            }
        }
        Err(Error::SearchExhausted("no admissible perturbation in the search window".into()))
    }

    /// Replaces `Y` by `Y - g(Y, e) g(e, e)^{-1} e`, timelike and
    /// g-orthogonal to the spacelike direction `e`.
    pub fn orthogonalize_y(&self, gamma_dot: &VectorCurve) -> Result<MorseSturmProblem> {
        let e = self.check_direction(gamma_dot)?;
        let gee = self.g.inner(&e, &e);
        if !(gee > 0.0) {
            return Err(Error::NotSpacelike(gee));
        }
        let n = self.dim();
        let l = DMatrix::identity(n, n) - &e * (e.transpose() * self.g.matrix()) / gee;
        let out = self.with_y(self.y.map_linear(&l));
        for t in linspace(VALIDATION_NODES) {
            let v = out.gyy(t);
            if !(v < 0.0) {
                return Err(Error::NotTimelike { t, value: v });
            }
        }
        Ok(out)
    }

    /// Runs every structural and analytic check and reports which index
    /// theorem regime applies. Never fails; failures are reported.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let mut notes = Vec::new();
        let g = &self.g;
        let gm = g.matrix();
        let tol = &self.tolerances;

        let p_ok = is_nondegenerate(g, &self.p, tol.rank_tol);
        checks.push(Check {
            name: "P nondegenerate".into(),
            pass: p_ok,
            detail: if p_ok { format!("dim P = {}", self.p.dim()) } else { "P degenerate".into() },
        });
        if let Some(q) = &self.q {
            let q_ok = is_nondegenerate(g, q, tol.rank_tol);
            checks.push(Check {
                name: "Q nondegenerate".into(),
                pass: q_ok,
                detail: if q_ok { format!("dim Q = {}", q.dim()) } else { "Q degenerate".into() },
            });
        }

        let gs = self.p.matrix().transpose() * gm * self.shape_p();
        let asym = (&gs - gs.transpose()).amax();
        let sp_ok = asym <= SYMMETRY_TOL * (1.0 + gs.amax());
        checks.push(Check {
            name: "S_P g-symmetric".into(),
            pass: sp_ok,
            detail: format!("asymmetry {asym:.3e}"),
        });
        if let (Some(q), Some(s_q)) = (&self.q, &self.s_q) {
            let gs = q.matrix().transpose() * gm * q.matrix() * s_q;
            let asym = (&gs - gs.transpose()).amax();
            checks.push(Check {
                name: "S_Q g-symmetric".into(),
                pass: asym <= SYMMETRY_TOL * (1.0 + gs.amax()),
                detail: format!("asymmetry {asym:.3e}"),
            });
        }

        let mut r_asym: f64 = 0.0;
        let mut max_r: f64 = 0.0;
        let mut max_y: f64 = 0.0;
        let mut worst_gyy = f64::NEG_INFINITY;
        let mut worst_t = 0.0;
        let mut max_resid: f64 = 0.0;
        for t in linspace(VALIDATION_NODES) {
            let r = self.r.eval(t);
            let gr = gm * &r;
            r_asym = r_asym.max((&gr - gr.transpose()).norm() / (1.0 + gr.norm()));
            max_r = max_r.max(r.norm());
            let (y, _, ypp) = self.y.eval_all(t);
            max_y = max_y.max(y.norm());
            let gyy = g.inner(&y, &y);
            if gyy > worst_gyy {
                worst_gyy = gyy;
                worst_t = t;
            }
            max_resid = max_resid.max((ypp - &r * &y).norm());
        }
        checks.push(Check {
            name: "R g-symmetric".into(),
            pass: r_asym <= SYMMETRY_TOL,
            detail: format!("relative asymmetry {r_asym:.3e}"),
        });
        let timelike = worst_gyy < -tol.rank_tol;
        checks.push(Check {
            name: "Y timelike".into(),
            pass: timelike,
            detail: format!("max g(Y,Y) = {worst_gyy:.6e} at t = {worst_t}"),
        });
        let jacobi_tol = if self.y.is_sampled() { JACOBI_TOL_SAMPLED } else { JACOBI_TOL_EXACT };
        let scale = (1.0 + max_r) * max_y;
        checks.push(Check {
            name: "Y Jacobi".into(),
            pass: max_resid <= jacobi_tol * scale,
            detail: format!("max |Y'' - R Y| = {max_resid:.3e} (scale {scale:.3e})"),
        });

        let classification = if timelike { self.classify_y().ok() } else { None };
        let orth = self.y0_orthogonal_to_p();
        let regime = match (orth, classification.map(|c| c.kind)) {
            (false, _) => Regime::YNotOrthogonalToP,
            (true, Some(YKind::Admissible)) => Regime::Admissible,
            (true, Some(YKind::Singular)) => Regime::Singular,
            _ => Regime::None,
        };
        if orth && self.p.is_zero() {
            notes.push("Y(0) ⊥ P vacuously (P = {0})".into());
        }
        if regime == Regime::None {
            notes.push("Y(0) is orthogonal to P and Y is neither admissible nor singular".into());
        }
        let valid = checks.iter().all(|c| c.pass);
        ValidationReport { valid, checks, classification, y0_orthogonal_to_p: orth, regime, notes }
    }

    /// Validates, turning failed checks into a regime error.
    pub fn require_valid(&self) -> Result<ValidationReport> {
        let report = self.validate();
        if !report.valid {
            let names: Vec<_> = report.failures().iter().map(|c| c.name.clone()).collect();
            return Err(Error::Regime(format!("invalid problem: {}", names.join(", "))));
        }
        Ok(report)
    }

    /// Validates and returns the applicable regime, or a regime error.
    pub fn require_regime(&self) -> Result<Regime> {
        let report = self.require_valid()?;
        if report.regime == Regime::None {
            return Err(Error::Regime(
                "Y is generic and Y(0) is orthogonal to P; the index theorem does not apply".into(),
            ));
        }
        Ok(report.regime)
    }

    /// Whether `Y` is singular; the forcing `lambda m(Y)` then vanishes.
    pub fn y_is_singular(&self) -> bool {
        matches!(self.classify_y(), Ok(YClassification { kind: YKind::Singular, .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn flat2(y: VectorCurve) -> MorseSturmProblem {
        MorseSturmProblem::new(
            MetricForm::minkowski(2),
            MatrixCurve::zero(2),
            y,
            SubspaceBasis::zero(2),
            DMatrix::zeros(0, 0),
            None,
            Tolerances::default(),
        )
        .unwrap()
    }

    fn linear_y() -> VectorCurve {
        VectorCurve::polynomial(&[dvector![1.0, 0.0], dvector![0.0, 0.5]]).unwrap()
    }

    #[test]
    fn m_of_constant_y_vanishes() {
        let p = MorseSturmProblem::new(
            MetricForm::minkowski(3),
            MatrixCurve::zero(3),
            VectorCurve::constant(&dvector![1.0, 0.0, 0.0]),
            SubspaceBasis::zero(3),
            DMatrix::zeros(0, 0),
            None,
            Tolerances::default(),
        )
        .unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(p.m_of_y(t).unwrap().norm(), 0.0);
        }
        assert_eq!(p.classify_y().unwrap().kind, YKind::Singular);
    }

    #[test]
    fn m_of_linear_y() {
        let p = flat2(linear_y());
        let m0 = p.m_of_y(0.0).unwrap();
        assert!((m0 - dvector![0.0, -1.0]).norm() < 1e-15);
        // 2(0, 1/2)/(-3/4) - 2(1, 1/2)(1/4)/(9/16) = (-8/9, -16/9)
        let m1 = p.m_of_y(1.0).unwrap();
        let two_terms = dvector![0.0, 0.5] * (2.0 / -0.75) - dvector![1.0, 0.5] * (2.0 * 0.25 / (0.5625));
        assert!((&m1 - two_terms).norm() < 1e-14);
        assert!((m1 - dvector![-8.0 / 9.0, -16.0 / 9.0]).norm() < 1e-14);
        assert_eq!(p.classify_y().unwrap().kind, YKind::Admissible);
    }

    #[test]
    fn generic_y_is_detected() {
        // Y parallel to Y' everywhere: m vanishes
        let y = VectorCurve::polynomial(&[dvector![1.0, 0.0], dvector![0.0, 0.0], dvector![0.125, 0.0]]).unwrap();
        assert_eq!(flat2(y).classify_y().unwrap().kind, YKind::Singular);
        // Y'(0) = 0 but later Y' leaves the span of Y
        let y = VectorCurve::polynomial(&[dvector![1.0, 0.0], dvector![0.0, 0.0], dvector![0.125, 0.5]]).unwrap();
        assert_eq!(flat2(y).classify_y().unwrap().kind, YKind::Generic);
    }

    #[test]
    fn classification_is_scale_invariant() {
        for c in [0.5, 3.0, 40.0] {
            let y = linear_y().map_linear(&(DMatrix::identity(2, 2) * c));
            assert_eq!(flat2(y).classify_y().unwrap().kind, YKind::Admissible);
        }
    }

    #[test]
    fn perturbation_finds_quarter_slope() {
        let p = flat2(VectorCurve::constant(&dvector![1.0, 0.0]));
        let e = VectorCurve::constant(&dvector![0.0, 1.0]);
        let r = SearchRange::new(-0.5, 0.5, 5);
        let (a, b, q) = p.perturb_to_admissible(&e, r, r).unwrap();
        assert_eq!((a, b), (0.0, 0.25));
        for t in [0.0, 0.5, 1.0] {
            assert!((q.gyy(t) - (-1.0 + t * t / 16.0)).abs() < 1e-15);
        }
        assert_eq!(q.validate().regime, Regime::Admissible);
        assert!(q.validate().valid);
    }

    #[test]
    fn perturbation_noop_and_timelike_errors() {
        let p = flat2(linear_y());
        let e = VectorCurve::constant(&dvector![0.0, 1.0]);
        let r = SearchRange::new(-0.5, 0.5, 5);
        let (a, b, q) = p.perturb_to_admissible(&e, r, r).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        assert_eq!(q.y.spec(), p.y.spec());
        let timelike = VectorCurve::constant(&dvector![1.0, 0.0]);
        assert!(matches!(p.perturb_to_admissible(&timelike, r, r), Err(Error::TimelikeGeodesic)));
    }

    #[test]
    fn orthogonalization() {
        let e = VectorCurve::constant(&dvector![0.0, 1.0]);
        let p = flat2(VectorCurve::constant(&dvector![1.0, 0.0]));
        let q = p.orthogonalize_y(&e).unwrap();
        assert!((q.y.eval(0.7) - dvector![1.0, 0.0]).norm() < 1e-15);
        let q = flat2(linear_y()).orthogonalize_y(&e).unwrap();
        for t in [0.0, 0.4, 1.0] {
            assert!((q.y.eval(t) - dvector![1.0, 0.0]).norm() < 1e-15);
        }
        assert!(matches!(
            p.orthogonalize_y(&VectorCurve::constant(&dvector![1.0, 0.0])),
            Err(Error::NotSpacelike(_))
        ));
    }

    #[test]
    fn validation_regimes() {
        let p = flat2(linear_y());
        let rep = p.validate();
        assert!(rep.valid);
        assert_eq!(rep.regime, Regime::Admissible);
        assert!(rep.notes.iter().any(|n| n.contains("vacuously")));

        let mut degenerate = flat2(VectorCurve::constant(&dvector![1.0, 0.0]));
        degenerate.p = SubspaceBasis::from_vectors(2, &[dvector![1.0, 1.0]]).unwrap();
        degenerate.s_p = DMatrix::zeros(1, 1);
        let rep = degenerate.validate();
        assert!(!rep.valid);
        assert!(rep.checks.iter().any(|c| !c.pass && c.detail == "P degenerate"));
    }

    #[test]
    fn file_round_trip() {
        let p = flat2(linear_y());
        let back = MorseSturmProblem::from_json(&p.to_json()).unwrap();
        assert_eq!(back.to_json(), p.to_json());
        let bad = r#"{"n": 2, "g": [[1,0],[0,1]], "R": {"kind":"constant","value":[[0,0],[0,0]]},
                      "Y": {"kind":"constant","value":[1,0]}, "P": [], "S_P": []}"#;
        assert!(matches!(MorseSturmProblem::from_json(bad), Err(Error::Schema(_))));
    }
}
