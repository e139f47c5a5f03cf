//! Problem generators with known answers, plus seeded random instances.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{MatrixCurve, VectorCurve};
use crate::error::{Error, Result};
use crate::linalg::{MetricForm, SubspaceBasis};
use crate::problem::{MorseSturmProblem, Tolerances};

/// Initial subspace for [`flat_problem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PChoice {
    /// `P = {0}`.
    Point,
    /// `P = span{e_1, ..., e_d}` (spacelike coordinates).
    Spacelike(usize),
}

fn build(g: MetricForm, r: MatrixCurve, y: VectorCurve, p: SubspaceBasis, s_p: DMatrix<f64>) -> MorseSturmProblem {
    MorseSturmProblem::new(g, r, y, p, s_p, None, Tolerances::default()).expect("generator shapes are consistent")
}

fn e(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Minkowski space, `R = 0`, `Y = e_0`, `S_P = 0`.
pub fn flat_problem(n: usize, p: PChoice) -> MorseSturmProblem {
    assert!(n >= 2, "flat_problem needs n >= 2");
    let basis = match p {
        PChoice::Point => SubspaceBasis::zero(n),
        PChoice::Spacelike(d) => {
            assert!(d < n, "at most n - 1 spacelike directions");
            SubspaceBasis::from_vectors(n, &(1..=d).map(|i| e(n, i)).collect::<Vec<_>>()).expect("coordinate vectors")
        }
    };
    let d = basis.dim();
    build(MetricForm::minkowski(n), MatrixCurve::zero(n), VectorCurve::constant(&e(n, 0)), basis, DMatrix::zeros(d, d))
}

/// Horizontal geodesic in a static product with a constant-curvature
/// factor: `n = 3`, `Y = e_0`, `R = diag(0, 0, -k)`, `P = {0}`.
pub fn static_constant_curvature_problem(k: f64) -> MorseSturmProblem {
    assert!(k > 0.0, "curvature must be positive");
    let r = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, -k]));
    build(
        MetricForm::minkowski(3),
        MatrixCurve::constant(&r),
        VectorCurve::constant(&e(3, 0)),
        SubspaceBasis::zero(3),
        DMatrix::zeros(0, 0),
    )
}

/// `n = 2`, `R = 0`, `Y(t) = (1, t/2)`, `P = {0}`.
pub fn flat_admissible_problem() -> MorseSturmProblem {
    let y = VectorCurve::polynomial(&[DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 0.5])])
        .expect("two coefficients");
    build(MetricForm::minkowski(2), MatrixCurve::zero(2), y, SubspaceBasis::zero(2), DMatrix::zeros(0, 0))
}

/// Dimension of random problems.
pub const RANDOM_DIM: usize = 3;

/// Minimum `-g(Y, Y)` accepted on `[0, 1]`.
pub const TIMELIKE_MARGIN: f64 = 0.05;

const RANDOM_ATTEMPTS: usize = 200;
const Y_STEPS: usize = 4096;
const Y_SAMPLES: usize = 1025;

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Samples of the solution of `Y'' = R(t) Y` on `Y_SAMPLES` uniform nodes.
fn integrate_y(r: &MatrixCurve, y0: &DVector<f64>, y1: &DVector<f64>) -> Vec<DVector<f64>> {
    let h = 1.0 / Y_STEPS as f64;
    let stride = Y_STEPS / (Y_SAMPLES - 1);
    let (mut x, mut v) = (y0.clone(), y1.clone());
    let mut out = vec![x.clone()];
    for i in 0..Y_STEPS {
        let t = i as f64 * h;
        let (r0, rm, r1) = (r.eval(t), r.eval(t + 0.5 * h), r.eval(t + h));
        let k1x = v.clone();
        let k1v = &r0 * &x;
        let k2x = &v + &k1v * (0.5 * h);
        let k2v = &rm * (&x + &k1x * (0.5 * h));
        let k3x = &v + &k2v * (0.5 * h);
        let k3v = &rm * (&x + &k2x * (0.5 * h));
        let k4x = &v + &k3v * h;
        let k4v = &r1 * (&x + &k3x * h);
        x += (k1x + (k2x + k3x) * 2.0 + k4x) * (h / 6.0);
        v += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);
        if (i + 1) % stride == 0 {
            out.push(x.clone());
        }
    }
    out
}

fn random_p(rng: &mut ChaCha8Rng, g: &MetricForm) -> (SubspaceBasis, DMatrix<f64>) {
    let n = g.dim();
    let d = rng.gen_range(0..=2usize);
    if d == 0 {
        return (SubspaceBasis::zero(n), DMatrix::zeros(0, 0));
    }
    loop {
        let vs: Vec<DVector<f64>> = (0..d)
            .map(|_| {
                let mut v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                v[0] *= 0.4;
                v
            })
            .collect();
        let Ok(p) = SubspaceBasis::from_vectors(n, &vs) else { continue };
        let gram = g.gram(p.matrix());
        let eig = gram.clone().symmetric_eigenvalues();
        if eig.min() < 0.1 * eig.max().max(0.1) || eig.min() < 0.05 {
            continue;
        }
        let sym = random_symmetric(rng, d);
        let s_p = gram.try_inverse().expect("positive definite Gram") * sym;
        return (p, s_p);
    }
}

/// Seeded random instance: polynomial g-symmetric `R` of the given degree with
/// `max_t |R(t)| <= norm_bound`, `Y` integrated from random timelike data
/// (resampled unless `g(Y, Y) < -0.05` on `[0, 1]`), and a random spacelike
/// `P` of dimension 0 to 2 with random symmetric `S_P`.
pub fn random_problem(seed: u64, degree: usize, norm_bound: f64) -> Result<MorseSturmProblem> {
    let n = RANDOM_DIM;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = MetricForm::minkowski(n);
    let ginv = g.matrix().clone().try_inverse().expect("metric is invertible");
    for _ in 0..RANDOM_ATTEMPTS {
        let mut coeffs: Vec<DMatrix<f64>> = (0..=degree).map(|_| random_symmetric(&mut rng, n)).collect();
        // lean towards focusing curvature on the spacelike block
        let focus = rng.gen_range(0.0..1.5);
        for i in 1..n {
            coeffs[0][(i, i)] -= focus;
        }
        let coeffs: Vec<DMatrix<f64>> = coeffs.iter().map(|c| &ginv * c).collect();
        let raw = MatrixCurve::polynomial(&coeffs)?;
        let peak = (0..=256).map(|i| raw.eval(i as f64 / 256.0).norm()).fold(0.0, f64::max);
        let target = norm_bound * rng.gen_range(0.5..1.0);
        let scale = if peak > 0.0 { target / peak } else { 0.0 };
        let coeffs: Vec<DMatrix<f64>> = coeffs.iter().map(|c| c * scale).collect();
        let r = MatrixCurve::polynomial(&coeffs)?;

        let mut y0 = DVector::from_fn(n, |_, _| rng.gen_range(-0.5..0.5));
        y0[0] = 1.0;
        let y1 = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let (p, s_p) = random_p(&mut rng, &g);

        let samples = integrate_y(&r, &y0, &y1);
        if samples.iter().any(|y| g.inner(y, y) >= -TIMELIKE_MARGIN) {
            continue;
        }
        let y = VectorCurve::sampled(&samples)?;
        let problem = MorseSturmProblem::new(g.clone(), r, y, p, s_p, None, Tolerances::default())?;
        let report = problem.validate();
        if report.valid && report.regime != crate::problem::Regime::None {
            return Ok(problem);
        }
    }
    Err(Error::SearchExhausted(format!("no valid random problem for seed {seed}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Regime, YKind};

    #[test]
    fn generators_validate() {
        let f = flat_problem(3, PChoice::Point);
        let rep = f.validate();
        assert!(rep.valid);
        assert_eq!(rep.regime, Regime::Singular);
        assert_eq!(flat_problem(4, PChoice::Spacelike(2)).validate().regime, Regime::Singular);
        assert_eq!(static_constant_curvature_problem(22.0).validate().regime, Regime::Singular);
        let a = flat_admissible_problem();
        assert_eq!(a.classify_y().unwrap().kind, YKind::Admissible);
        assert_eq!(a.validate().regime, Regime::Admissible);
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        let a = random_problem(7, 2, 20.0).unwrap();
        let b = random_problem(7, 2, 20.0).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.validate().valid);
        let peak = (0..=64).map(|i| a.r.eval(i as f64 / 64.0).norm()).fold(0.0, f64::max);
        assert!(peak <= 20.0 + 1e-9);
        assert_ne!(random_problem(8, 2, 20.0).unwrap().to_json(), a.to_json());
    }
}
