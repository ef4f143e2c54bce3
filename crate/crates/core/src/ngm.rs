//! Basic reproduction number, next-generation matrices and disease-free
//! equilibria.
//!
//! `K = -T * inv(Sigma)` is built from the new-infection matrix `T` and the
//! transition matrix `Sigma` of the linearized infection subsystem. Its
//! spectrum comes from the characteristic polynomial in closed form. The
//! polynomial coefficients are the traces of the compound matrices, and for
//! a product these factor (Cauchy–Binet) as `tr(C_k(-T) C_k(inv(Sigma)))`.
//! For `T` with identical columns every minor of order two or more vanishes
//! exactly in floating point, so the zero eigenvalues come out as exact zeros.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{ModelKind, Params, State, StateMa, StateMb};

pub type Mat<const D: usize> = [[f64; D]; D];

/// `(rho*beta1 + (1-rho)*beta2) / kappa`.
pub fn r0(beta1: f64, beta2: f64, rho: f64, kappa: f64) -> f64 {
    (rho * beta1 + (1.0 - rho) * beta2) / kappa
}

/// Equilibrium share of class 1 under behaviour switching.
pub fn rho_from_alphas(alpha1: f64, alpha2: f64) -> Result<f64> {
    if !(alpha1 > alpha2 && alpha2 > 0.0) {
        return Err(Error::RejectOrder(format!(
            "need alpha1 > alpha2 > 0, got alpha1 = {alpha1}, alpha2 = {alpha2}"
        )));
    }
    Ok(alpha2 / (alpha1 + alpha2))
}

/// Disease-free equilibrium of the model the parameters were validated for.
pub fn dfe_of(model: ModelKind, p: &Params) -> State {
    let n = p.n();
    let rho = match model {
        ModelKind::Single => 1.0,
        _ => p.rho(),
    };
    let (s1, s2) = (rho * n, (1.0 - rho) * n);
    match model {
        ModelKind::Ma | ModelKind::Single => State::Ma(StateMa::new(s1, s2, 0.0, 0.0, 0.0)),
        ModelKind::Mb => State::Mb(StateMb::new(s1, s2, 0.0, 0.0, 0.0, 0.0)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NgmMatrices {
    Two { t: Mat<2>, sigma: Mat<2>, k: Mat<2> },
    Three { t: Mat<3>, sigma: Mat<3>, k: Mat<3> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgmResult {
    pub matrices: NgmMatrices,
    pub eigenvalues: Vec<Complex64>,
    /// Spectral radius of `K`.
    pub dominant: f64,
}

impl NgmResult {
    pub fn dimension(&self) -> usize {
        match self.matrices {
            NgmMatrices::Two { .. } => 2,
            NgmMatrices::Three { .. } => 3,
        }
    }

    /// Relative max-norm residual of `K * Sigma + T`.
    pub fn residual(&self) -> f64 {
        fn rel<const D: usize>(t: &Mat<D>, sigma: &Mat<D>, k: &Mat<D>) -> f64 {
            let ks = matmul(k, sigma);
            let scale = max_abs(t).max(f64::MIN_POSITIVE);
            let mut worst = 0.0f64;
            for i in 0..D {
                for j in 0..D {
                    worst = worst.max((ks[i][j] + t[i][j]).abs());
                }
            }
            worst / scale
        }
        match &self.matrices {
            NgmMatrices::Two { t, sigma, k } => rel(t, sigma, k),
            NgmMatrices::Three { t, sigma, k } => rel(t, sigma, k),
        }
    }
}

fn matmul<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut out = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            out[i][j] = (0..D).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn max_abs<const D: usize>(a: &Mat<D>) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn neg<const D: usize>(a: &Mat<D>) -> Mat<D> {
    a.map(|row| row.map(|v| -v))
}

fn det2(a: &Mat<2>) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn inverse2(a: &Mat<2>) -> Result<Mat<2>> {
    let d = det2(a);
    if !d.is_finite() || d.abs() <= 1e-14 * max_abs(a).powi(2) {
        return Err(Error::SingularSigma);
    }
    Ok([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

/// 2x2 minor of `a` on rows `r` and columns `c`.
fn minor3(a: &Mat<3>, r: (usize, usize), c: (usize, usize)) -> f64 {
    a[r.0][c.0] * a[r.1][c.1] - a[r.0][c.1] * a[r.1][c.0]
}

fn det3(a: &Mat<3>) -> f64 {
    a[0][0] * minor3(a, (1, 2), (1, 2)) - a[0][1] * minor3(a, (1, 2), (0, 2))
        + a[0][2] * minor3(a, (1, 2), (0, 1))
}

fn inverse3(a: &Mat<3>) -> Result<Mat<3>> {
    let d = det3(a);
    if !d.is_finite() || d.abs() <= 1e-14 * max_abs(a).powi(3) {
        return Err(Error::SingularSigma);
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let rows = others(j);
            let cols = others(i);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            inv[i][j] = sign * minor3(a, rows, cols) / d;
        }
    }
    Ok(inv)
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Second compound matrix: all 2x2 minors in lexicographic index order.
fn compound2(a: &Mat<3>) -> Mat<3> {
    let mut c = [[0.0; 3]; 3];
    for (i, &r) in PAIRS.iter().enumerate() {
        for (j, &col) in PAIRS.iter().enumerate() {
            c[i][j] = minor3(a, r, col);
        }
    }
    c
}

fn trace<const D: usize>(a: &Mat<D>) -> f64 {
    (0..D).map(|i| a[i][i]).sum()
}

/// Roots of `x^2 + b x + c`.
fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Avoid cancellation: pick the larger-magnitude root first.
        let q = -0.5 * (b + b.signum() * sq);
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

/// Roots of `x^3 + a x^2 + b x + c`.
fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    if c == 0.0 {
        let [r1, r2] = quadratic_roots(a, b);
        return [r1, r2, Complex64::new(0.0, 0.0)];
    }
    // One real root by the trigonometric / Cardano formulas, polished by
    // Newton, then deflate to a quadratic.
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let mut x = if r * r < q * q * q {
        let theta = (r / (q * q * q).sqrt()).clamp(-1.0, 1.0).acos();
        -2.0 * q.sqrt() * (theta / 3.0).cos() - a / 3.0
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q * q * q).sqrt()).cbrt();
        let big_b = if big_a == 0.0 { 0.0 } else { q / big_a };
        big_a + big_b - a / 3.0
    };
    for _ in 0..3 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df == 0.0 {
            break;
        }
        x -= f / df;
    }
    // x^3 + a x^2 + b x + c = (x - x0)(x^2 + (a + x0) x + (b + (a + x0) x0))
    let p1 = a + x;
    let p0 = b + p1 * x;
    let [r1, r2] = quadratic_roots(p1, p0);
    [Complex64::new(x, 0.0), r1, r2]
}

fn dominant_of(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn ma_matrices(p: &Params) -> (Mat<2>, Mat<2>) {
    let b = p.b_rho();
    let (l, g, k) = (p.lambda(), p.gamma(), p.kappa());
    let t = [[l * b, l * b], [(1.0 - l) * b, (1.0 - l) * b]];
    let sigma = [[-k, g], [0.0, -(g + k)]];
    (t, sigma)
}

fn mb_matrices(p: &Params) -> (Mat<3>, Mat<3>) {
    let sw = p.switching().expect("mb parameters carry switching rates");
    let (l, g, k, rho) = (p.lambda(), p.gamma(), p.kappa(), p.rho());
    let rows = [
        (1.0 - l) * p.beta1() * rho,
        (1.0 - l) * p.beta2() * (1.0 - rho),
        l * p.b_rho(),
    ];
    let t = rows.map(|v| [v; 3]);
    let sigma = [
        [-(sw.alpha1 + g + k), sw.alpha2, 0.0],
        [sw.alpha1, -(sw.alpha2 + g + k), 0.0],
        [g, g, -k],
    ];
    (t, sigma)
}

/// Next-generation matrix and its spectrum at the disease-free equilibrium.
pub fn ngm(model: ModelKind, p: &Params) -> Result<NgmResult> {
    match model {
        ModelKind::Ma | ModelKind::Single => {
            let (t, sigma) = ma_matrices(p);
            let inv = inverse2(&sigma)?;
            let neg_t = neg(&t);
            let k = matmul(&neg_t, &inv);
            // x^2 - tr(K) x + det(K), with det(K) = det(-T) det(inv Sigma)
            let tr = trace(&k);
            let det = det2(&neg_t) * det2(&inv);
            let eigenvalues = quadratic_roots(-tr, det).to_vec();
            Ok(NgmResult {
                dominant: dominant_of(&eigenvalues),
                eigenvalues,
                matrices: NgmMatrices::Two { t, sigma, k },
            })
        }
        ModelKind::Mb => {
            let (t, sigma) = mb_matrices(p);
            let inv = inverse3(&sigma)?;
            let neg_t = neg(&t);
            let k = matmul(&neg_t, &inv);
            let c1 = trace(&k);
            let c2 = trace(&matmul(&compound2(&neg_t), &compound2(&inv)));
            let c3 = det3(&neg_t) * det3(&inv);
            // x^3 - c1 x^2 + c2 x - c3
            let eigenvalues = cubic_roots(-c1, c2, -c3).to_vec();
            Ok(NgmResult {
                dominant: dominant_of(&eigenvalues),
                eigenvalues,
                matrices: NgmMatrices::Three { t, sigma, k },
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Stable => "STABLE",
            Verdict::Unstable => "UNSTABLE",
            Verdict::Marginal => "MARGINAL",
        }
    }
}

/// Relative band around `R0 = 1` reported as marginal.
pub const MARGINAL_TOLERANCE: f64 = 1e-12;

pub fn classify_r0(r0: f64) -> Verdict {
    if r0 < 1.0 - MARGINAL_TOLERANCE {
        Verdict::Stable
    } else if r0 > 1.0 + MARGINAL_TOLERANCE {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub r0: f64,
    pub verdict: Verdict,
    pub dfe: State,
    pub b_rho: f64,
}

pub fn stability(model: ModelKind, p: &Params) -> StabilityReport {
    let rho = match model {
        ModelKind::Single => 1.0,
        _ => p.rho(),
    };
    let r0 = r0(p.beta1(), p.beta2(), rho, p.kappa());
    StabilityReport {
        r0,
        verdict: classify_r0(r0),
        dfe: dfe_of(model, p),
        b_rho: rho * p.beta1() + (1.0 - rho) * p.beta2(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{rhs_ma, rhs_mb};
    use crate::params::{validate_params, RawParams};
    use proptest::prelude::*;

    fn ma(b1: f64, b2: f64, rho: f64, kappa: f64) -> Params {
        let raw = RawParams {
            beta1: Some(b1),
            beta2: Some(b2),
            lambda: Some(0.65),
            gamma: Some(0.005),
            kappa: Some(kappa),
            rho: Some(rho),
            n: Some(100.0),
            ..Default::default()
        };
        validate_params(&raw, ModelKind::Ma).unwrap()
    }

    fn mb(b1: f64, b2: f64, a1: f64, a2: f64, kappa: f64, lambda: f64) -> Params {
        let raw = RawParams {
            beta1: Some(b1),
            beta2: Some(b2),
            lambda: Some(lambda),
            gamma: Some(0.005),
            kappa: Some(kappa),
            alpha1: Some(a1),
            alpha2: Some(a2),
            n: Some(100.0),
            ..Default::default()
        };
        validate_params(&raw, ModelKind::Mb).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn r0_hand_values() {
        assert!(close(r0(0.0042, 0.0009, 0.75, 0.0006), 5.625, 1e-12));
        assert!(close(r0(0.00808, 0.00558, 0.5, 0.0002), 34.15, 1e-12));
        for rho in [0.1, 0.5, 0.9] {
            assert!(close(r0(0.3, 0.3, rho, 0.6), 0.5, 1e-12));
        }
    }

    #[test]
    fn rho_from_alpha_values() {
        assert!(close(rho_from_alphas(0.001, 0.0001).unwrap(), 1.0 / 11.0, 1e-14));
        assert!(close(rho_from_alphas(0.10, 0.010).unwrap(), 1.0 / 11.0, 1e-14));
        assert!(matches!(rho_from_alphas(0.0001, 0.0001), Err(Error::RejectOrder(_))));
    }

    #[test]
    fn dfe_values() {
        let p = ma(0.0042, 0.0009, 0.75, 0.0006);
        assert_eq!(dfe_of(ModelKind::Ma, &p), State::Ma(StateMa::new(75.0, 25.0, 0.0, 0.0, 0.0)));
        let q = p.with(|r| { r.rho = Some(0.5); r.n = Some(1.0) }).unwrap();
        assert_eq!(dfe_of(ModelKind::Ma, &q), State::Ma(StateMa::new(0.5, 0.5, 0.0, 0.0, 0.0)));

        let m = mb(0.0042, 0.0009, 0.001, 0.0001, 0.0006, 0.65);
        match dfe_of(ModelKind::Mb, &m) {
            State::Mb(s) => {
                assert!(close(s.s1, 100.0 / 11.0, 1e-14));
                assert!(close(s.s2, 1000.0 / 11.0, 1e-14));
                let d = rhs_mb(&m, &s).unwrap();
                assert!(d.to_array().iter().all(|v| v.abs() < 1e-15));
            }
            other => panic!("{other:?}"),
        }
        if let State::Ma(s) = dfe_of(ModelKind::Ma, &p) {
            assert_eq!(rhs_ma(&p, &s).unwrap().to_array(), [0.0; 5]);
        }
    }

    #[test]
    fn ma_ngm_spectrum() {
        let p = ma(0.0042, 0.0009, 0.75, 0.0006);
        let res = ngm(ModelKind::Ma, &p).unwrap();
        assert_eq!(res.dimension(), 2);
        assert!(close(res.dominant, 5.625, 1e-12));
        let second = res.eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        assert_eq!(second, 0.0);
        assert!(res.residual() < 1e-12);
    }

    #[test]
    fn mb_ngm_spectrum() {
        let p = mb(0.009, 0.0012, 0.01, 0.001, 0.0009, 0.05);
        assert!(close(p.rho(), 1.0 / 11.0, 1e-14));
        assert!(close(p.b_rho(), 0.0019090909090909, 1e-12));
        let res = ngm(ModelKind::Mb, &p).unwrap();
        assert_eq!(res.dimension(), 3);
        assert!(close(res.dominant, 2.121212121212, 1e-10));
        let zeros = res.eigenvalues.iter().filter(|z| z.norm() <= 1e-10).count();
        assert_eq!(zeros, 2);
        assert!(res.residual() < 1e-12);
    }

    #[test]
    fn mb_fully_symptomatic() {
        let p = mb(0.009, 0.0012, 0.01, 0.001, 0.0009, 1.0);
        let res = ngm(ModelKind::Mb, &p).unwrap();
        if let NgmMatrices::Three { t, .. } = res.matrices {
            assert_eq!(t[0], [0.0; 3]);
            assert_eq!(t[1], [0.0; 3]);
        }
        assert!(close(res.dominant, p.b_rho() / p.kappa(), 1e-10));
    }

    #[test]
    fn cubic_solver_general_roots() {
        // (x-1)(x-2)(x-3)
        let mut roots: Vec<f64> = cubic_roots(-6.0, 11.0, -6.0).iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        for (r, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - want).abs() < 1e-12);
        }
        // (x-2)(x^2+1)
        let roots = cubic_roots(-2.0, 1.0, -2.0);
        assert!(roots.iter().any(|z| (z.re - 2.0).abs() < 1e-12 && z.im == 0.0));
        assert!(roots.iter().any(|z| (z.im - 1.0).abs() < 1e-12));
    }

    #[test]
    fn stability_verdicts() {
        let p = ma(0.0042, 0.0009, 0.75, 0.0006);
        assert_eq!(stability(ModelKind::Ma, &p).verdict, Verdict::Unstable);

        let p = ma(0.0005, 0.0001, 0.5, 0.0006);
        let rep = stability(ModelKind::Ma, &p);
        assert_eq!(rep.verdict, Verdict::Stable);
        assert!(close(rep.r0, 0.5, 1e-12));
        assert!(close(rep.b_rho, 0.0003, 1e-12));

        let (kappa, b2, rho) = (0.0006, 0.0002, 0.5);
        let b1 = (kappa - (1.0 - rho) * b2) / rho;
        let p = ma(b1, b2, rho, kappa);
        assert_eq!(stability(ModelKind::Ma, &p).verdict, Verdict::Marginal);
    }

    #[test]
    fn beta2_above_kappa_is_unstable_for_any_split() {
        for rho in [0.01, 0.3, 0.7, 0.99] {
            for b1 in [0.001, 0.01, 0.5] {
                let p = ma(b1, 0.0009, rho, 0.0006);
                assert_eq!(stability(ModelKind::Ma, &p).verdict, Verdict::Unstable);
            }
        }
    }

    fn arb_ma() -> impl Strategy<Value = Params> {
        (1e-3f64..1.0, 0.01f64..0.99, 0.01f64..1.0, 0.0f64..0.5, 1e-3f64..1.0, 0.01f64..0.99)
            .prop_map(|(b1, frac, l, g, k, rho)| {
                let raw = RawParams {
                    beta1: Some(b1),
                    beta2: Some(b1 * frac),
                    lambda: Some(l),
                    gamma: Some(g),
                    kappa: Some(k),
                    rho: Some(rho),
                    n: Some(100.0),
                    ..Default::default()
                };
                validate_params(&raw, ModelKind::Ma).unwrap()
            })
    }

    fn arb_mb() -> impl Strategy<Value = Params> {
        (arb_ma(), 1e-4f64..0.5, 1.01f64..20.0).prop_map(|(p, a2, ratio)| {
            p.with_model(ModelKind::Mb, |r| {
                r.rho = None;
                r.alpha1 = Some(a2 * ratio);
                r.alpha2 = Some(a2);
            })
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn ma_closed_form_agrees(p in arb_ma()) {
            let res = ngm(ModelKind::Ma, &p).unwrap();
            let want = r0(p.beta1(), p.beta2(), p.rho(), p.kappa());
            prop_assert!(close(res.dominant, want, 1e-10));
            prop_assert!(res.residual() <= 1e-12);
        }

        #[test]
        fn mb_closed_form_agrees(p in arb_mb()) {
            let res = ngm(ModelKind::Mb, &p).unwrap();
            let want = r0(p.beta1(), p.beta2(), p.rho(), p.kappa());
            prop_assert!(close(res.dominant, want, 1e-10));
            prop_assert!(res.residual() <= 1e-12);
            let small = res.eigenvalues.iter().filter(|z| z.norm() <= 1e-10).count();
            prop_assert_eq!(small, 2);
        }

        #[test]
        fn r0_ignores_lambda_and_gamma(p in arb_mb(), l in 0.01f64..1.0, g in 0.0f64..0.5) {
            let a = ngm(ModelKind::Mb, &p).unwrap().dominant;
            let q = p.with(|r| { r.lambda = Some(l); r.gamma = Some(g); }).unwrap();
            let b = ngm(ModelKind::Mb, &q).unwrap().dominant;
            prop_assert!(close(b, a, 1e-12));
        }
    }
}
