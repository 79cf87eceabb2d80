//! Truncated solutions of the disk mean-value equation.
//!
//! In harmonic `k` a solution is a combination of polynomial terms (a- and
//! b-terms, see [`lemma3_basis`]) and cylinder waves
//! `Phi_{lambda,eta,k}(rho) e^{ik phi}` indexed by zeros `lambda` of `g_r`
//! and `eta < n_lambda`. A [`SolutionSpec`] holds finitely many of these.

use crate::chareq::EquationParams;
use crate::error::{Error, Result};
use crate::fields::{lemma3_basis, BasisRole, Field, WirtingerOrder};
use crate::meanvalue::{residual, QuadratureRule, ResidualReport};
use crate::par::{self, Exec};
use crate::zeroscan::{select_zr, ZeroCatalog};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Coefficient of a polynomial term: harmonic `k`, index `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeff {
    pub k: i32,
    pub p: u32,
    pub re: f64,
    pub im: f64,
}

impl PolyCoeff {
    pub fn new(k: i32, p: u32, value: Complex64) -> Self {
        Self { k, p, re: value.re, im: value.im }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Coefficient `c_{lambda,eta,k}` of a cylinder wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveCoeff {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub eta: u32,
    pub k: i32,
    pub re: f64,
    pub im: f64,
}

impl WaveCoeff {
    pub fn new(lambda: Complex64, eta: u32, k: i32, value: Complex64) -> Self {
        Self { lambda_re: lambda.re, lambda_im: lambda.im, eta, k, re: value.re, im: value.im }
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSpec {
    pub m: u32,
    pub s: u32,
    pub r: f64,
    /// Harmonics range over `-K..=K`.
    #[serde(rename = "K")]
    pub k_max: u32,
    /// Declared decay exponent: `|c| <= C |lambda|^{-alpha}`.
    pub alpha: f64,
    #[serde(rename = "C")]
    pub decay_const: f64,
    pub a: Vec<PolyCoeff>,
    pub b: Vec<PolyCoeff>,
    pub c: Vec<WaveCoeff>,
}

impl SolutionSpec {
    pub fn empty(params: &EquationParams, k_max: u32, alpha: f64, decay_const: f64) -> Self {
        Self { m: params.m, s: params.s, r: params.r, k_max, alpha, decay_const, a: vec![], b: vec![], c: vec![] }
    }

    pub fn params(&self) -> Result<EquationParams> {
        EquationParams::new(self.m, self.s, self.r)
    }

    /// Index ranges, harmonic bounds and decay declaration.
    pub fn validate(&self) -> Result<EquationParams> {
        let params = self.params()?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.decay_const > 0.0 && self.decay_const.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "decay declaration needs alpha > 0 and C > 0, got alpha={} C={}",
                self.alpha, self.decay_const
            )));
        }
        let kmax = self.k_max as i32;
        let check_k = |k: i32, what: &str| {
            if k.abs() > kmax {
                Err(Error::InvalidParams(format!("{what} harmonic {k} outside -{kmax}..={kmax}")))
            } else {
                Ok(())
            }
        };
        for t in &self.a {
            check_k(t.k, "a-term")?;
            if t.p >= self.s || t.p as i32 + t.k < 0 {
                return Err(Error::InvalidParams(format!(
                    "a-term (k={}, p={}) needs p <= s-1 = {} and p+k >= 0",
                    t.k,
                    t.p,
                    self.s as i32 - 1
                )));
            }
        }
        for t in &self.b {
            check_k(t.k, "b-term")?;
            if t.p >= self.m - self.s {
                return Err(Error::InvalidParams(format!(
                    "b-term (k={}, p={}) needs p <= m-s-1 = {}",
                    t.k,
                    t.p,
                    self.m - self.s - 1
                )));
            }
        }
        for t in &self.c {
            check_k(t.k, "c-term")?;
            let lam = t.lambda();
            if !(lam.re.is_finite() && lam.im.is_finite()) || lam.norm() == 0.0 {
                return Err(Error::InvalidParams(format!("c-term frequency {lam} must be finite and nonzero")));
            }
        }
        Ok(params)
    }

    /// Checks every c-frequency against `Z_r` of the catalog, with `eta < n_lambda`.
    pub fn check_zeros(&self, catalog: &ZeroCatalog, tol: f64) -> Result<()> {
        if catalog.m != self.m || catalog.s != self.s {
            return Err(Error::Precondition(format!(
                "catalog is for (m, s) = ({}, {}), spec for ({}, {})",
                catalog.m, catalog.s, self.m, self.s
            )));
        }
        let zr = select_zr(catalog, self.r);
        for t in &self.c {
            let lam = t.lambda();
            let hit = zr.iter().find(|z| (z.lambda - lam).norm() <= tol * (1.0 + lam.norm()));
            match hit {
                None => return Err(Error::Precondition(format!("c-term frequency {lam} is not in Z_r"))),
                Some(z) if t.eta >= z.multiplicity => {
                    return Err(Error::Precondition(format!(
                        "c-term at {lam} has eta={} but the zero has multiplicity {}",
                        t.eta, z.multiplicity
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// The truncated series as a single superposition.
pub fn build_solution(spec: &SolutionSpec) -> Result<Field> {
    let params = spec.validate()?;
    let mut terms = Vec::with_capacity(spec.a.len() + spec.b.len() + spec.c.len());
    for (coeffs, role) in [(&spec.a, BasisRole::ATerm), (&spec.b, BasisRole::BTerm)] {
        for t in coeffs {
            let basis = lemma3_basis(t.k, &params);
            let mono = basis
                .iter()
                .find(|b| b.role == role && b.p == t.p)
                .ok_or_else(|| Error::InvalidParams(format!("no basis term for {role:?} k={} p={}", t.k, t.p)))?;
            terms.push((t.value(), mono.field()));
        }
    }
    for t in &spec.c {
        terms.push((t.value(), Field::cylinder(t.lambda(), t.eta, t.k)));
    }
    Ok(Field::superposition(terms))
}

/// Field made of the cylinder-wave terms only.
pub fn wave_part(spec: &SolutionSpec) -> Field {
    Field::superposition(spec.c.iter().map(|t| (t.value(), Field::cylinder(t.lambda(), t.eta, t.k))).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub ok: bool,
    /// `max |c| |lambda|^alpha / C`; at most 1 when the declaration holds.
    pub max_ratio: f64,
    /// Index into `spec.c` of the largest ratio.
    pub worst: Option<usize>,
}

pub fn check_decay(spec: &SolutionSpec) -> DecayReport {
    let mut max_ratio: f64 = 0.0;
    let mut worst = None;
    for (i, t) in spec.c.iter().enumerate() {
        let ratio = t.value().norm() * t.lambda().norm().powf(spec.alpha) / spec.decay_const;
        if ratio > max_ratio {
            max_ratio = ratio;
            worst = Some(i);
        }
    }
    DecayReport { ok: max_ratio <= 1.0 + 1e-12, max_ratio, worst }
}

/// `(d/dz)^{m-s} (d/dzbar)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdeOperator {
    pub p: u32,
    pub q: u32,
}

impl PdeOperator {
    pub fn for_params(params: &EquationParams) -> Self {
        Self { p: params.m - params.s, q: params.m }
    }
}

pub fn apply_pde(f: &Field, z: Complex64, op: PdeOperator) -> Result<Complex64> {
    f.wirtinger(z, WirtingerOrder::new(op.p, op.q))
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Origin, eight points at `0.98 radius`, then `n` Halton points (bases 2, 3)
/// mapped to the disk, with a seeded rotation of the Halton torus.
pub fn disk_samples(radius: f64, n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (du, dv): (f64, f64) = (rng.gen(), rng.gen());
    let phase: f64 = rng.gen::<f64>() * 2.0 * PI / 8.0;
    let mut pts = Vec::with_capacity(n + 9);
    pts.push(Complex64::new(0.0, 0.0));
    for j in 0..8 {
        pts.push(Complex64::from_polar(0.98 * radius, phase + 2.0 * PI * j as f64 / 8.0));
    }
    for i in 1..=n as u64 {
        let u = (radical_inverse(i, 2) + du).fract();
        let v = (radical_inverse(i, 3) + dv).fract();
        pts.push(Complex64::from_polar(radius * u.sqrt(), 2.0 * PI * v));
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub big_r: f64,
    pub samples: Vec<ResidualReport>,
    pub max_residual: f64,
    /// `max |residual| / tolerance` over the samples.
    pub max_excess: f64,
    pub all_satisfied: bool,
    /// Only "representation implies equation" is checked; the converse is not.
    pub converse_certified: bool,
}

/// Residual of the built solution at `disk_samples(R - r, n, seed)`.
pub fn verify_theorem1(
    spec: &SolutionSpec,
    big_r: f64,
    n: usize,
    seed: u64,
    rule: &QuadratureRule,
    exec: Exec,
) -> Result<Theorem1Report> {
    let params = spec.validate()?;
    if !(big_r > params.r) {
        return Err(Error::Precondition(format!("R = {big_r} must exceed r = {}", params.r)));
    }
    let f = build_solution(spec)?;
    let pts = disk_samples(big_r - params.r, n, seed);
    let samples = par::try_map_collect(exec, &pts, |z| residual(&f, *z, &params, rule))?;
    let max_residual = samples.iter().map(|s| s.residual.norm()).fold(0.0, f64::max);
    let max_excess = samples.iter().map(|s| s.residual.norm() / s.tolerance()).fold(0.0, f64::max);
    Ok(Theorem1Report {
        big_r,
        all_satisfied: samples.iter().all(|s| s.satisfied()),
        samples,
        max_residual,
        max_excess,
        converse_certified: false,
    })
}

/// Options for [`random_spec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpecOptions {
    pub k_max: u32,
    pub max_zeros: usize,
    /// Zeros are drawn from this many smallest elements of `Z_r`.
    pub zero_pool: usize,
    pub alpha: f64,
    pub decay_const: f64,
}

impl Default for RandomSpecOptions {
    fn default() -> Self {
        Self { k_max: 2, max_zeros: 5, zero_pool: 10, alpha: 4.0, decay_const: 1.0 }
    }
}

fn random_unit_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

/// Seeded spec with random polynomial terms and up to `max_zeros` frequencies
/// from `Z_r`, every c-coefficient inside the declared decay bound.
pub fn random_spec(catalog: &ZeroCatalog, r: f64, opts: &RandomSpecOptions, seed: u64) -> Result<SolutionSpec> {
    let params = EquationParams::new(catalog.m, catalog.s, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = SolutionSpec::empty(&params, opts.k_max, opts.alpha, opts.decay_const);
    let kmax = opts.k_max as i32;
    for k in -kmax..=kmax {
        for b in lemma3_basis(k, &params) {
            if rng.gen_bool(0.5) {
                let t = PolyCoeff::new(k, b.p, random_unit_disk(&mut rng));
                match b.role {
                    BasisRole::ATerm => spec.a.push(t),
                    BasisRole::BTerm => spec.b.push(t),
                }
            }
        }
    }
    let pool: Vec<_> = select_zr(catalog, r).into_iter().take(opts.zero_pool).collect();
    if pool.is_empty() {
        return Err(Error::Precondition("catalog has no zeros to draw from".into()));
    }
    let n_zeros = rng.gen_range(1..=opts.max_zeros.min(pool.len()));
    let mut chosen: Vec<usize> = Vec::with_capacity(n_zeros);
    while chosen.len() < n_zeros {
        let i = rng.gen_range(0..pool.len());
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    for i in chosen {
        let z = &pool[i];
        let bound = opts.decay_const * z.lambda.norm().powf(-opts.alpha);
        let k = rng.gen_range(-kmax..=kmax);
        for eta in 0..z.multiplicity {
            spec.c.push(WaveCoeff::new(z.lambda, eta, k, random_unit_disk(&mut rng) * bound));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::monomial_wirtinger_exact;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_spec() {
        let params = EquationParams::new(1, 0, 1.0).unwrap();
        let mut spec = SolutionSpec::empty(&params, 0, 1.0, 1.0);
        spec.b.push(PolyCoeff::new(0, 0, c(1.0, 0.0)));
        let f = build_solution(&spec).unwrap();
        for z in [c(0.0, 0.0), c(0.3, -2.0)] {
            assert_eq!(f.eval(z).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn single_wave_spec() {
        let params = EquationParams::new(2, 1, 1.0).unwrap();
        let mut spec = SolutionSpec::empty(&params, 0, 1.0, 1.0);
        let lam = c(-3.0, 1.0);
        spec.c.push(WaveCoeff::new(lam, 0, 0, c(1.0, 0.0)));
        let f = build_solution(&spec).unwrap();
        let z = c(0.4, 0.1);
        assert_eq!(f.eval(z).unwrap(), Field::cylinder(lam, 0, 0).eval(z).unwrap());
    }

    #[test]
    fn range_violations() {
        let params = EquationParams::new(2, 1, 1.0).unwrap();
        let base = SolutionSpec::empty(&params, 1, 1.0, 1.0);
        let mut s1 = base.clone();
        s1.a.push(PolyCoeff::new(0, 1, c(1.0, 0.0)));
        assert!(build_solution(&s1).is_err());
        let mut s2 = base.clone();
        s2.a.push(PolyCoeff::new(-1, 0, c(1.0, 0.0)));
        assert!(build_solution(&s2).is_err());
        let mut s3 = base.clone();
        s3.b.push(PolyCoeff::new(2, 0, c(1.0, 0.0)));
        assert!(build_solution(&s3).is_err());
        let mut s4 = base;
        s4.c.push(WaveCoeff::new(c(0.0, 0.0), 0, 0, c(1.0, 0.0)));
        assert!(build_solution(&s4).is_err());
    }

    #[test]
    fn decay_cases() {
        let params = EquationParams::new(1, 0, 1.0).unwrap();
        let mut spec = SolutionSpec::empty(&params, 0, 2.0, 3.0);
        assert!(check_decay(&spec).ok);
        let lam = c(-5.0, 2.0);
        let at_bound = 3.0 * lam.norm().powf(-2.0);
        spec.c.push(WaveCoeff::new(lam, 0, 0, c(0.0, at_bound)));
        assert!(check_decay(&spec).ok);
        spec.c.push(WaveCoeff::new(lam * 2.0, 0, 0, c(2.0 * 3.0 * (2.0 * lam.norm()).powf(-2.0), 0.0)));
        let rep = check_decay(&spec);
        assert!(!rep.ok);
        assert_eq!(rep.worst, Some(1));
        assert!((rep.max_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monomial_part_is_annihilated_exactly() {
        for (m, s) in [(1, 0), (2, 1), (3, 1), (3, 2)] {
            let params = EquationParams::new(m, s, 1.0).unwrap();
            let op = PdeOperator::for_params(&params);
            for k in -3..=3 {
                for b in lemma3_basis(k, &params) {
                    assert_eq!(monomial_wirtinger_exact(b.a, b.b, WirtingerOrder::new(op.p, op.q)), None);
                    assert_eq!(apply_pde(&b.field(), c(0.7, -0.2), op).unwrap(), c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn zero_field_pde() {
        let op = PdeOperator { p: 1, q: 1 };
        assert_eq!(apply_pde(&Field::zero(), c(0.5, 0.5), op).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn cylinder_pde_closed_form() {
        // m=1, s=0: d/dz d/dzbar Phi_{l,0,0} = -(l/2)^2 J_0(l rho)
        let lam = c(2.5, 0.7);
        let z = c(0.3, 0.4);
        let got = apply_pde(&Field::cylinder(lam, 0, 0), z, PdeOperator { p: 1, q: 1 }).unwrap();
        let expected = -(lam * 0.5) * (lam * 0.5) * crate::specfun::bessel_j(0, lam * z.norm()).unwrap();
        assert!((got - expected).norm() < 1e-13 * expected.norm());
    }

    #[test]
    fn polynomial_spec_verifies() {
        let params = EquationParams::new(3, 1, 1.0).unwrap();
        let mut spec = SolutionSpec::empty(&params, 2, 1.0, 1.0);
        for k in -2..=2 {
            for b in lemma3_basis(k, &params) {
                let t = PolyCoeff::new(k, b.p, c(0.5 + k as f64 * 0.1, 0.3));
                match b.role {
                    BasisRole::ATerm => spec.a.push(t),
                    BasisRole::BTerm => spec.b.push(t),
                }
            }
        }
        let rep = verify_theorem1(&spec, 3.0, 6, 7, &QuadratureRule::default(), Exec::default()).unwrap();
        assert!(rep.max_residual <= 1e-9, "{}", rep.max_residual);
        assert!(!rep.converse_certified);
        assert_eq!(rep.samples.len(), 15);
    }

    #[test]
    fn samples_in_disk_and_seeded() {
        let a = disk_samples(2.0, 20, 5);
        assert_eq!(a, disk_samples(2.0, 20, 5));
        assert_ne!(a, disk_samples(2.0, 20, 6));
        assert!(a.iter().all(|z| z.norm() < 2.0));
        assert_eq!(a[0], c(0.0, 0.0));
    }

    #[test]
    fn spec_json_field_names() {
        let params = EquationParams::new(2, 1, 1.0).unwrap();
        let mut spec = SolutionSpec::empty(&params, 1, 4.0, 1.0);
        spec.a.push(PolyCoeff::new(1, 0, c(1.0, 2.0)));
        spec.c.push(WaveCoeff::new(c(-3.0, 1.0), 0, -1, c(0.5, 0.0)));
        let v = serde_json::to_value(&spec).unwrap();
        for key in ["m", "s", "r", "K", "alpha", "C", "a", "b", "c"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["c"][0]["lambda_re"], -3.0);
        let back: SolutionSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }
}
