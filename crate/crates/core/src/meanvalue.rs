//! Both sides of the weighted disk mean-value equation
//!
//! `sum_{n=s}^{m-1} r^{2n+2} / (2 (n-s)! (n+1)!) (d/dz)^{n-s} (d/dzbar)^n f(z)
//!     = (1/2pi) iint_{|zeta - z| <= r} f(zeta) (zeta - z)^s dxi deta`
//!
//! The residual is always reported as `lhs - rhs` (derivative sum minus disk mean).

use crate::chareq::{self, EquationParams};
use crate::error::{Error, Result};
use crate::fields::{Field, WirtingerOrder};
use crate::par::{self, Exec};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Relative accuracy assumed for a single field evaluation; sets the noise
/// floor added to every quadrature error estimate.
pub const FIELD_EVAL_REL_EPS: f64 = 1e-13;
/// Absolute floor below which residuals are never judged.
pub const RESIDUAL_ABS_FLOOR: f64 = 1e-9;
/// Multiple of the error estimate a solution's residual may reach.
pub const RESIDUAL_ERR_FACTOR: f64 = 3.0;

/// Fixed Gauss-Legendre radial rule on `[0, r]` times a uniform trapezoid in the angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub n_rho: usize,
    pub n_t: usize,
    pub max_n_rho: usize,
    pub max_n_t: usize,
    /// Two-resolution agreement required before doubling stops, relative to the integrand scale.
    pub rel_tol: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self { n_rho: 64, n_t: 256, max_n_rho: 512, max_n_t: 2048, rel_tol: 1e-11 }
    }
}

impl QuadratureRule {
    pub fn new(n_rho: usize, n_t: usize) -> Result<Self> {
        if n_rho < 2 || n_t < 4 || !n_t.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "quadrature needs n_rho >= 2 and even n_t >= 4, got ({n_rho}, {n_t})"
            )));
        }
        Ok(Self { n_rho, n_t, max_n_rho: n_rho.max(512), max_n_t: n_t.max(2048), ..Self::default() })
    }

    pub fn fixed(n_rho: usize, n_t: usize) -> Result<Self> {
        let mut rule = Self::new(n_rho, n_t)?;
        rule.max_n_rho = n_rho;
        rule.max_n_t = n_t;
        Ok(rule)
    }
}

type Nodes = Arc<(Vec<f64>, Vec<f64>)>;

fn gl_nodes(n: usize) -> Nodes {
    static CACHE: OnceLock<Mutex<HashMap<usize, Nodes>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(gauss_legendre(n))).clone()
}

/// Value of the weighted mean plus the magnitude of the summed contributions.
fn disk_mean_at(f: &Field, z: Complex64, s: u32, r: f64, n_rho: usize, n_t: usize) -> Result<(Complex64, f64)> {
    let nodes = gl_nodes(n_rho);
    let (x, w) = (&nodes.0, &nodes.1);
    let angles: Vec<(Complex64, Complex64)> = (0..n_t)
        .map(|j| {
            let t = -PI + 2.0 * PI * j as f64 / n_t as f64;
            (Complex64::from_polar(1.0, t), Complex64::from_polar(1.0, s as f64 * t))
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut abs_total = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let rho = 0.5 * r * (xi + 1.0);
        let weight = 0.5 * r * wi * rho.powi(s as i32 + 1) / n_t as f64;
        let mut ring = Complex64::new(0.0, 0.0);
        let mut ring_abs = 0.0;
        for (e_t, e_st) in &angles {
            let v = f.eval(z + *e_t * rho)?;
            ring += v * *e_st;
            ring_abs += v.norm();
        }
        total += ring * weight;
        abs_total += ring_abs * weight;
    }
    Ok((total, abs_total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskMean {
    pub value: Complex64,
    pub error_estimate: f64,
    /// Sum of absolute contributions (integrand scale).
    pub scale: f64,
    pub n_rho: usize,
    pub n_t: usize,
}

/// `(1/2pi) int_0^r int_{-pi}^{pi} f(z + rho e^{it}) rho^{s+1} e^{ist} dt drho`.
///
/// Starts one level below the rule's nominal resolution and doubles both node
/// counts until consecutive levels agree to `rule.rel_tol` of the integrand
/// scale; the returned estimate is that last difference plus the field
/// evaluation noise floor.
pub fn weighted_disk_mean(f: &Field, z: Complex64, params: &EquationParams, rule: &QuadratureRule) -> Result<DiskMean> {
    let (s, r) = (params.s, params.r);
    let mut nr = (rule.n_rho / 2).max(2);
    let mut nt = (rule.n_t / 2).max(4);
    let (mut prev, _) = disk_mean_at(f, z, s, r, nr, nt)?;
    loop {
        let next_nr = (nr * 2).min(rule.max_n_rho.max(rule.n_rho));
        let next_nt = (nt * 2).min(rule.max_n_t.max(rule.n_t));
        let grew = next_nr != nr || next_nt != nt;
        nr = next_nr;
        nt = next_nt;
        let (cur, scale) = disk_mean_at(f, z, s, r, nr, nt)?;
        let diff = (cur - prev).norm();
        let floor = FIELD_EVAL_REL_EPS * scale;
        let at_nominal = nr >= rule.n_rho && nt >= rule.n_t;
        if at_nominal && diff <= rule.rel_tol * scale.max(f64::MIN_POSITIVE) {
            return Ok(DiskMean { value: cur, error_estimate: diff + floor, scale, n_rho: nr, n_t: nt });
        }
        let capped = nr >= rule.max_n_rho && nt >= rule.max_n_t;
        if capped || !grew {
            if diff <= 1e3 * rule.rel_tol * scale.max(f64::MIN_POSITIVE) {
                return Ok(DiskMean { value: cur, error_estimate: diff + floor, scale, n_rho: nr, n_t: nt });
            }
            return Err(Error::NonConvergence(diff));
        }
        prev = cur;
    }
}

/// `r^{2n+2} / (2 (n-s)! (n+1)!)`
pub fn derivative_sum_coefficient(n: u32, s: u32, r: f64) -> f64 {
    let fact = |k: u32| (1..=k).fold(1.0, |a, v| a * v as f64);
    r.powi(2 * n as i32 + 2) / (2.0 * fact(n - s) * fact(n + 1))
}

/// Left side of the equation and the sum of the magnitudes of its terms.
fn derivative_sum_with_scale(f: &Field, z: Complex64, params: &EquationParams) -> Result<(Complex64, f64)> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for n in params.s..params.m {
        let t = f.wirtinger(z, WirtingerOrder::new(n - params.s, n))? * derivative_sum_coefficient(n, params.s, params.r);
        acc += t;
        scale += t.norm();
    }
    Ok((acc, scale))
}

pub fn derivative_sum(f: &Field, z: Complex64, params: &EquationParams) -> Result<Complex64> {
    Ok(derivative_sum_with_scale(f, z, params)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub z: Complex64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `lhs - rhs`
    pub residual: Complex64,
    pub quad_error_estimate: f64,
    /// Sum of the magnitudes of the contributions to both sides.
    pub scale: f64,
}

impl ResidualReport {
    /// `max(1e-9, 3 * error estimate)`
    pub fn tolerance(&self) -> f64 {
        RESIDUAL_ABS_FLOOR.max(RESIDUAL_ERR_FACTOR * self.quad_error_estimate)
    }

    pub fn satisfied(&self) -> bool {
        self.residual.norm() <= self.tolerance()
    }
}

pub fn residual(f: &Field, z: Complex64, params: &EquationParams, rule: &QuadratureRule) -> Result<ResidualReport> {
    let (lhs, lhs_scale) = derivative_sum_with_scale(f, z, params)?;
    let mean = weighted_disk_mean(f, z, params, rule)?;
    Ok(ResidualReport {
        z,
        lhs,
        rhs: mean.value,
        residual: lhs - mean.value,
        quad_error_estimate: mean.error_estimate + FIELD_EVAL_REL_EPS * lhs_scale,
        scale: mean.scale + lhs_scale,
    })
}

/// Residuals at many centers, evaluated independently.
pub fn residual_sweep(
    f: &Field,
    points: &[Complex64],
    params: &EquationParams,
    rule: &QuadratureRule,
    exec: Exec,
) -> Result<Vec<ResidualReport>> {
    par::try_map_collect(exec, points, |z| residual(f, *z, params, rule))
}

/// Reference configuration at which the unimodular constant of the plane-wave
/// closed form is fixed.
pub const LEMMA2_REFERENCE_LAMBDA: Complex64 = Complex64::new(1.7, 0.0);
pub const LEMMA2_REFERENCE_ALPHA: f64 = 0.3;
pub const LEMMA2_REFERENCE_Z: Complex64 = Complex64::new(0.2, 0.1);

/// Frozen constant `kappa(s)` of the plane-wave closed form: `i^s`.
///
/// Confirmed against the quadrature by [`calibrate_lemma2_constant`].
pub fn lemma2_constant(s: u32) -> Complex64 {
    Complex64::i().powu(s)
}

/// Everything in the closed form except `kappa(s)`:
/// `g_r(lambda) e^{i alpha s} (r^{s+1} / lambda) (lambda r)^{s+1} f(z)`.
fn lemma2_base(lambda: Complex64, alpha: f64, z: Complex64, params: &EquationParams) -> Result<Complex64> {
    if lambda.norm() < 1e-6 {
        return Err(Error::LambdaTooSmall(lambda));
    }
    let s = params.s as i32;
    let r = params.r;
    let g = chareq::eval_g(params, lambda)?;
    let field = Field::plane_wave(lambda, alpha).eval(z)?;
    Ok(g * Complex64::from_polar(1.0, alpha * s as f64) * (r.powi(s + 1) / lambda) * (lambda * r).powi(s + 1) * field)
}

/// Closed-form prediction of `rhs - lhs` (i.e. `-residual`) for the plane wave
/// `exp(i lambda (x cos alpha + y sin alpha))`.
pub fn lemma2_oracle(lambda: Complex64, alpha: f64, z: Complex64, params: &EquationParams) -> Result<Complex64> {
    Ok(lemma2_constant(params.s) * lemma2_base(lambda, alpha, z, params)?)
}

/// Measures `kappa(s)` by quadrature at the reference configuration and snaps it
/// to the nearest of the four unit phases `{+-1, +-i} i^{s+2}`.
pub fn calibrate_lemma2_constant(s: u32, rule: &QuadratureRule) -> Result<Complex64> {
    let params = EquationParams::new(s + 1, s, 1.0)?;
    let f = Field::plane_wave(LEMMA2_REFERENCE_LAMBDA, LEMMA2_REFERENCE_ALPHA);
    let rep = residual(&f, LEMMA2_REFERENCE_Z, &params, rule)?;
    let base = lemma2_base(LEMMA2_REFERENCE_LAMBDA, LEMMA2_REFERENCE_ALPHA, LEMMA2_REFERENCE_Z, &params)?;
    let measured = -rep.residual / base;
    let printed = Complex64::i().powu(s + 2);
    let units = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::i(), -Complex64::i()];
    let best = units
        .iter()
        .map(|u| printed * *u)
        .min_by(|a, b| (measured - a).norm().total_cmp(&(measured - b).norm()))
        .expect("four candidates");
    if (measured - best).norm() > 1e-6 {
        return Err(Error::Certification(format!("measured constant {measured} is not a unit phase")));
    }
    Ok(best)
}

/// One plane-wave test case of the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Case {
    pub lambda: Complex64,
    pub alpha: f64,
    pub z: Complex64,
}

/// Seeded cases with `0.5 <= |lambda| <= 20`, `|Im lambda| <= 3`, `|z| <= 1`.
pub fn lemma2_random_cases(n: usize, seed: u64) -> Vec<Lemma2Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let lambda = Complex64::new(rng.gen_range(-20.0..20.0), rng.gen_range(-3.0..3.0));
        if !(0.5..=20.0).contains(&lambda.norm()) {
            continue;
        }
        let alpha = rng.gen_range(-PI..PI);
        let z = Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI));
        out.push(Lemma2Case { lambda, alpha, z });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Sample {
    pub case: Lemma2Case,
    pub residual: Complex64,
    pub oracle: Complex64,
    pub quad_error_estimate: f64,
    /// `|residual + oracle| / max(1, |oracle|)`
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Sweep {
    pub samples: Vec<Lemma2Sample>,
    pub max_deviation: f64,
}

/// Quadrature residual of each plane wave against [`lemma2_oracle`].
pub fn lemma2_sweep(cases: &[Lemma2Case], params: &EquationParams, rule: &QuadratureRule, exec: Exec) -> Result<Lemma2Sweep> {
    let samples: Vec<Lemma2Sample> = par::try_map_collect(exec, cases, |c| -> Result<Lemma2Sample> {
        let f = Field::plane_wave(c.lambda, c.alpha);
        let rep = residual(&f, c.z, params, rule)?;
        let oracle = lemma2_oracle(c.lambda, c.alpha, c.z, params)?;
        Ok(Lemma2Sample {
            case: *c,
            residual: rep.residual,
            oracle,
            quad_error_estimate: rep.quad_error_estimate,
            deviation: (rep.residual + oracle).norm() / oracle.norm().max(1.0),
        })
    })?;
    let max_deviation = samples.iter().map(|s| s.deviation).fold(0.0, f64::max);
    Ok(Lemma2Sweep { samples, max_deviation })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierCoeff {
    pub value: Complex64,
    /// `|k| > n_t / 4`: the harmonic is close enough to Nyquist to alias.
    pub aliasing_warning: bool,
}

/// `(1/2pi) int_{-pi}^{pi} f(rho e^{it}) e^{-ikt} dt` by the periodic trapezoid rule.
pub fn fourier_coeff(f: &Field, k: i32, rho: f64, n_t: usize) -> Result<FourierCoeff> {
    if n_t == 0 || rho < 0.0 {
        return Err(Error::InvalidParams(format!("need n_t > 0 and rho >= 0, got ({n_t}, {rho})")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_t {
        let t = -PI + 2.0 * PI * j as f64 / n_t as f64;
        acc += f.eval(Complex64::from_polar(rho, t))? * Complex64::from_polar(1.0, -(k as f64) * t);
    }
    Ok(FourierCoeff { value: acc / n_t as f64, aliasing_warning: k.unsigned_abs() as usize > n_t / 4 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_field_means() {
        let rule = QuadratureRule::default();
        let f = Field::constant();
        let p = EquationParams::new(1, 0, 1.3).unwrap();
        let m = weighted_disk_mean(&f, c(0.4, -0.2), &p, &rule).unwrap();
        assert!((m.value - c(1.3 * 1.3 / 2.0, 0.0)).norm() < 1e-13);
        let p2 = EquationParams::new(3, 1, 0.8).unwrap();
        let m2 = weighted_disk_mean(&f, c(0.1, 0.0), &p2, &rule).unwrap();
        assert!(m2.value.norm() < 1e-14);
    }

    #[test]
    fn plane_wave_disk_mean_closed_form() {
        // e^{i alpha s} i^s r^{s+1} J_{s+1}(lambda r) / lambda * f(z)
        let rule = QuadratureRule::default();
        for s in 0..3u32 {
            let p = EquationParams::new(s + 1, s, 0.9).unwrap();
            let (lam, alpha, z) = (c(4.2, 0.7), 1.1, c(0.3, 0.5));
            let f = Field::plane_wave(lam, alpha);
            let got = weighted_disk_mean(&f, z, &p, &rule).unwrap().value;
            let expected = Complex64::from_polar(1.0, alpha * s as f64)
                * Complex64::i().powu(s)
                * 0.9f64.powi(s as i32 + 1)
                * specfun::bessel_j(s as i32 + 1, lam * 0.9).unwrap()
                / lam
                * f.eval(z).unwrap();
            assert!((got - expected).norm() < 1e-12 * expected.norm().max(1.0), "s={s}: {got} vs {expected}");
        }
    }

    #[test]
    fn derivative_sum_small_cases() {
        let p = EquationParams::new(1, 0, 1.7).unwrap();
        let z = c(0.3, -0.9);
        assert!((derivative_sum(&Field::constant(), z, &p).unwrap() - c(1.7 * 1.7 / 2.0, 0.0)).norm() < 1e-15);
        let zbar = Field::monomial(0, 1);
        assert!((derivative_sum(&zbar, z, &p).unwrap() - z.conj() * (1.7 * 1.7 / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_derivative_sum_matches_displayed_form() {
        // 2pi sum r^{2n+2} / ((2n+2)(n-s)! n!) * i^{2n-s} 2^{-(2n-s)} lambda^{2n-s} e^{i alpha s} f, over 2pi
        let p = EquationParams::new(3, 1, 1.1).unwrap();
        let (lam, alpha, z) = (c(2.5, -0.3), 0.7, c(-0.2, 0.4));
        let f = Field::plane_wave(lam, alpha);
        let fact = |k: u32| (1..=k).fold(1.0, |a, v| a * v as f64);
        let mut expected = c(0.0, 0.0);
        for n in 1..3u32 {
            let e = (2 * n - 1) as i32;
            expected += Complex64::i().powi(e) * lam.powi(e) * 0.5f64.powi(e) * 1.1f64.powi(2 * n as i32 + 2)
                / ((2 * n + 2) as f64 * fact(n - 1) * fact(n));
        }
        expected *= Complex64::from_polar(1.0, alpha) * f.eval(z).unwrap();
        let got = derivative_sum(&f, z, &p).unwrap();
        assert!((got - expected).norm() < 1e-13 * expected.norm().max(1.0));
    }

    #[test]
    fn constant_field_residual_vanishes() {
        let rule = QuadratureRule::default();
        for r in [0.5, 1.0, 2.0] {
            let p = EquationParams::new(1, 0, r).unwrap();
            let rep = residual(&Field::constant(), c(1.5, -0.7), &p, &rule).unwrap();
            assert!(rep.residual.norm() < 1e-12);
            assert!(rep.satisfied());
        }
    }

    #[test]
    fn calibrated_constant_equals_frozen() {
        let rule = QuadratureRule::default();
        for s in 0..5 {
            assert_eq!(calibrate_lemma2_constant(s, &rule).unwrap(), lemma2_constant(s));
        }
    }

    #[test]
    fn oracle_guard_and_z_independence() {
        let p = EquationParams::new(2, 0, 1.0).unwrap();
        assert!(matches!(lemma2_oracle(c(1e-7, 0.0), 0.0, c(0.0, 0.0), &p), Err(Error::LambdaTooSmall(_))));
        let (lam, alpha) = (c(3.3, 0.4), 0.25);
        let f = Field::plane_wave(lam, alpha);
        let ratio = |z: Complex64| lemma2_oracle(lam, alpha, z, &p).unwrap() / f.eval(z).unwrap();
        let r0 = ratio(c(0.0, 0.0));
        for z in [c(0.5, 0.5), c(-1.0, 0.2), c(0.3, -0.8)] {
            assert!((ratio(z) - r0).norm() <= 1e-13 * r0.norm());
        }
    }

    #[test]
    fn fourier_coefficients() {
        let z3 = Field::monomial(3, 0);
        let rho = 0.8;
        let fc = fourier_coeff(&z3, 3, rho, 64).unwrap();
        assert!((fc.value - c(rho.powi(3), 0.0)).norm() < 1e-15);
        assert!(fourier_coeff(&z3, 2, rho, 64).unwrap().value.norm() < 1e-15);

        let lam = c(2.0, 0.3);
        let cyl = Field::cylinder(lam, 0, -2);
        let fc = fourier_coeff(&cyl, -2, rho, 64).unwrap();
        assert!((fc.value - specfun::phi(lam, 0, -2, rho).unwrap()).norm() < 1e-14);

        let pw = Field::plane_wave(c(5.0, 0.5), 0.0);
        for k in -4..=4 {
            let fc = fourier_coeff(&pw, k, rho, 128).unwrap();
            let expected = Complex64::i().powi(k) * specfun::bessel_j(k, c(5.0, 0.5) * rho).unwrap();
            assert!((fc.value - expected).norm() < 1e-13, "k={k}");
            assert!(!fc.aliasing_warning);
        }
        assert!(fourier_coeff(&pw, 20, rho, 64).unwrap().aliasing_warning);
    }
}
