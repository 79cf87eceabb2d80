//! The characteristic entire function of the mean-value equation.
//!
//! `G(w) = J_{s+1}(w) / w^{s+1} - sum_{j=0}^{m-s-1} (-1)^j w^{2j} / (j! (j+s+1)! 2^{2j+s+1})`
//! depends only on `(m, s)`; the radius enters through `g_r(z) = G(r z)`.
//! The subtracted polynomial is exactly the first `m - s` terms of the power
//! series of `J_{s+1}(w) / w^{s+1}`, so near the origin `G` is evaluated as
//! the tail of that series.

use crate::error::{Error, Result};
use crate::specfun;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const TAIL_REL_STOP: f64 = 1e-18;
const TAIL_MAX_TERMS: usize = 80;

/// The triple `(m, s, r)` fixing one instance of the mean-value equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationParams {
    pub m: u32,
    pub s: u32,
    pub r: f64,
}

impl EquationParams {
    pub fn new(m: u32, s: u32, r: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("m must be positive".into()));
        }
        if s >= m {
            return Err(Error::InvalidParams(format!("s must satisfy 0 <= s <= m-1, got m={m}, s={s}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParams(format!("radius must be positive, got {r}")));
        }
        Ok(Self { m, s, r })
    }

    pub fn with_radius(&self, r: f64) -> Result<Self> {
        Self::new(self.m, self.s, r)
    }

    pub fn characteristic(&self) -> CharacteristicFn {
        CharacteristicFn::new(self.m, self.s).expect("validated params")
    }
}

/// Value of `G` (or `G'`) together with the magnitude of the terms that
/// produced it, used as the scale for zero tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: Complex64,
    pub deriv: Complex64,
    pub scale: f64,
}

/// Radius-free canonical form of `g_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFn {
    m: u32,
    s: u32,
    threshold: f64,
    // c_j = (-1)^j / (j! (j+s+1)! 2^{2j+s+1}) for j = 0..=m-s (one past the polynomial)
    coeffs: Vec<f64>,
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl CharacteristicFn {
    pub fn new(m: u32, s: u32) -> Result<Self> {
        EquationParams::new(m, s, 1.0)?;
        let d = m - s;
        let threshold = 6f64.max(2.0 * d as f64 + 4.0);
        let coeffs = (0..=d)
            .map(|j| {
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign / (factorial(j) * factorial(j + s + 1) * 2f64.powi((2 * j + s + 1) as i32))
            })
            .collect();
        Ok(Self { m, s, threshold, coeffs })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Order of the zero at the origin: the tail series starts at `w^{2(m-s)}`.
    pub fn origin_multiplicity(&self) -> u32 {
        2 * (self.m - self.s)
    }

    /// Coefficient of `w^{2j}` in the power series of `J_{s+1}(w)/w^{s+1}`.
    pub fn series_coefficient(&self, j: u32) -> f64 {
        let s = self.s;
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign / (factorial(j) * factorial(j + s + 1) * 2f64.powi((2 * j + s + 1) as i32))
    }

    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.eval_full(w)?.value)
    }

    pub fn eval_deriv(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.eval_full(w)?.deriv)
    }

    /// `G(w)` and `G'(w)` by whichever representation the threshold selects.
    pub fn eval_full(&self, w: Complex64) -> Result<Evaluation> {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::NonFinite(w));
        }
        if w.norm() <= self.threshold {
            Ok(self.tail_series(w))
        } else {
            self.bessel_form(w)
        }
    }

    /// Tail series `sum_{j >= m-s} c_j w^{2j}` and its derivative.
    pub fn tail_series(&self, w: Complex64) -> Evaluation {
        let d = (self.m - self.s) as usize;
        let s = self.s as f64;
        let w2 = w * w;
        let mut term = Complex64::new(self.coeffs[d], 0.0) * w2.powu(d as u32);
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        // derivative terms are 2j c_j w^{2j-1}; carried separately to stay exact at w = 0
        let mut dterm = Complex64::new(2.0 * d as f64 * self.coeffs[d], 0.0) * w.powu(2 * d as u32 - 1);
        for n in 0..TAIL_MAX_TERMS {
            let j = (d + n) as f64;
            value += term;
            deriv += dterm;
            scale += term.norm();
            if term.norm() <= TAIL_REL_STOP * value.norm() && n > 0 {
                break;
            }
            let ratio = -w2 / (4.0 * (j + 1.0) * (j + s + 2.0));
            term *= ratio;
            dterm = dterm * ratio * ((j + 1.0) / j);
        }
        Evaluation { value, deriv, scale }
    }

    /// `J_{s+1}(w)/w^{s+1} - poly(w)` and `-J_{s+2}(w)/w^{s+1} - poly'(w)`.
    pub fn bessel_form(&self, w: Complex64) -> Result<Evaluation> {
        let s = self.s as i32;
        let mut block = [Complex64::new(0.0, 0.0); 2];
        specfun::bessel_j_block(s + 1, w, &mut block)?;
        let wpow = w.powi(s + 1);
        let bessel_part = block[0] / wpow;
        let bessel_deriv = -block[1] / wpow;
        let d = (self.m - self.s) as usize;
        let w2 = w * w;
        let mut poly = Complex64::new(0.0, 0.0);
        let mut dpoly = Complex64::new(0.0, 0.0);
        let mut scale = bessel_part.norm();
        let mut pw = Complex64::new(1.0, 0.0); // w^{2j}
        for j in 0..d {
            let t = pw * self.coeffs[j];
            poly += t;
            scale += t.norm();
            if j > 0 {
                dpoly += pw / w * (2.0 * j as f64 * self.coeffs[j]);
            }
            pw *= w2;
        }
        Ok(Evaluation { value: bessel_part - poly, deriv: bessel_deriv - dpoly, scale })
    }
}

/// `g_r(z) = G(r z)`.
pub fn eval_g(params: &EquationParams, z: Complex64) -> Result<Complex64> {
    params.characteristic().eval(z * params.r)
}

/// `g_r'(z) = r G'(r z)`.
pub fn eval_g_deriv(params: &EquationParams, z: Complex64) -> Result<Complex64> {
    Ok(params.characteristic().eval_deriv(z * params.r)? * params.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // J_1(2) by a plain 200-term power series, independent of specfun.
    fn j1_series(x: f64) -> f64 {
        let mut term = x / 2.0;
        let mut sum = term;
        for j in 1..200 {
            term *= -(x * x / 4.0) / (j as f64 * (j + 1) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn params_validation() {
        assert!(EquationParams::new(0, 0, 1.0).is_err());
        assert!(EquationParams::new(2, 2, 1.0).is_err());
        assert!(EquationParams::new(2, 1, 0.0).is_err());
        assert!(EquationParams::new(2, 1, 0.5).is_ok());
    }

    #[test]
    fn zero_at_origin() {
        for (m, s) in [(1, 0), (2, 0), (3, 1), (4, 3)] {
            let g = CharacteristicFn::new(m, s).unwrap();
            assert_eq!(g.eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
            assert_eq!(g.eval_deriv(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn m1_s0_at_two() {
        let g = CharacteristicFn::new(1, 0).unwrap();
        let expected = j1_series(2.0) / 2.0 - 0.5;
        let got = g.eval(c(2.0, 0.0)).unwrap();
        assert!((got - c(expected, 0.0)).norm() < 1e-14, "{got} vs {expected}");
    }

    #[test]
    fn representations_agree_near_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (m, s) in [(1, 0), (2, 0), (2, 1), (3, 1), (3, 2), (4, 1), (5, 0)] {
            let g = CharacteristicFn::new(m, s).unwrap();
            for _ in 0..20 {
                let rad = g.threshold() * rng.gen_range(0.9..1.1);
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                let w = Complex64::from_polar(rad, th);
                if w.im.abs() > 6.0 {
                    continue;
                }
                let a = g.tail_series(w);
                let b = g.bessel_form(w).unwrap();
                let tol = 1e-11 * a.value.norm().max(1.0);
                assert!((a.value - b.value).norm() <= tol, "({m},{s}) w={w}: {} vs {}", a.value, b.value);
                assert!((a.deriv - b.deriv).norm() <= 1e-11 * a.deriv.norm().max(1.0));
            }
        }
    }

    #[test]
    fn tail_identity_small_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = rng.gen_range(1..=5);
            let s = rng.gen_range(0..m);
            let g = CharacteristicFn::new(m, s).unwrap();
            for _ in 0..5 {
                let w = Complex64::from_polar(rng.gen_range(0.5..5.0), rng.gen_range(-3.2..3.2));
                let a = g.tail_series(w).value;
                let b = g.bessel_form(w).unwrap().value;
                assert!((a - b).norm() <= 1e-11 * a.norm().max(1.0), "({m},{s}) w={w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-4;
        for (m, s) in [(1, 0), (2, 1), (3, 1)] {
            let g = CharacteristicFn::new(m, s).unwrap();
            for &w in &[c(1.3, 0.4), c(5.9, -1.0), c(11.0, 2.5), c(23.0, 6.0)] {
                let f = |x: Complex64| g.eval(x).unwrap();
                let fd = (f(w - 2.0 * h) - f(w - h) * 8.0 + f(w + h) * 8.0 - f(w + 2.0 * h)) / (12.0 * h);
                let d = g.eval_deriv(w).unwrap();
                assert!((d - fd).norm() <= 1e-7 * d.norm().max(1e-3), "({m},{s}) {w}: {d} vs {fd}");
                let dm = g.eval_deriv(-w).unwrap();
                assert!((dm + d).norm() <= 1e-12 * d.norm().max(1.0));
            }
        }
    }

    #[test]
    fn even_and_conjugate_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = CharacteristicFn::new(3, 1).unwrap();
        for _ in 0..100 {
            let w = c(rng.gen_range(-30.0..30.0), rng.gen_range(-8.0..8.0));
            let v = g.eval(w).unwrap();
            let tol = 1e-12 * v.norm().max(1.0);
            assert!((g.eval(-w).unwrap() - v).norm() <= tol);
            assert!((g.eval(w.conj()).unwrap() - v.conj()).norm() <= tol);
        }
    }

    #[test]
    fn scaling_and_direct_formula() {
        let p = EquationParams::new(1, 0, 2.0).unwrap();
        let g = CharacteristicFn::new(1, 0).unwrap();
        assert_eq!(eval_g(&p, c(1.0, 0.0)).unwrap(), g.eval(c(2.0, 0.0)).unwrap());
        assert_eq!(eval_g(&p, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));

        for (m, s, r) in [(2u32, 0u32, 0.7), (3, 1, 1.3), (3, 2, 2.0)] {
            let p = EquationParams::new(m, s, r).unwrap();
            for &z in &[c(4.1, 0.9), c(-7.0, 2.2), c(12.0, -3.0)] {
                let rz = z * r;
                let mut direct = specfun::bessel_j(s as i32 + 1, rz).unwrap() / rz.powi(s as i32 + 1);
                for n in s..m {
                    let sign = if (n - s) % 2 == 0 { 1.0 } else { -1.0 };
                    direct -= rz.powi(2 * (n - s) as i32) * sign
                        / (factorial(n + 1) * factorial(n - s) * 2f64.powi((2 * n - s + 1) as i32));
                }
                let got = eval_g(&p, z).unwrap();
                assert!((got - direct).norm() <= 1e-11 * direct.norm().max(1.0), "{got} vs {direct}");
                let unit = p.with_radius(1.0).unwrap();
                assert!((eval_g(&unit, rz).unwrap() - got).norm() <= 1e-14 * got.norm().max(1.0));
            }
        }
    }

    #[test]
    fn single_term_closed_form() {
        for s in 0..3u32 {
            let g = CharacteristicFn::new(s + 1, s).unwrap();
            let constant = 1.0 / (factorial(s + 1) * 2f64.powi(s as i32 + 1));
            for &w in &[c(7.5, 0.3), c(15.0, -2.0), c(3.0, 1.0)] {
                let expected = specfun::bessel_j(s as i32 + 1, w).unwrap() / w.powi(s as i32 + 1) - constant;
                let got = g.eval(w).unwrap();
                assert!((got - expected).norm() <= 1e-11 * expected.norm().max(1.0));
            }
        }
    }
}
