//! Smooth test fields with exact mixed Wirtinger derivatives.
//!
//! `d/dz = (d/dx - i d/dy) / 2`, `d/dzbar = (d/dx + i d/dy) / 2`.
//! Every variant carries a closed form for `(d/dz)^p (d/dzbar)^q`;
//! [`wirtinger_fd`] is an independent finite-difference route used only to
//! cross-check those closed forms.

use crate::chareq::EquationParams;
use crate::error::{Error, Result};
use crate::specfun::{self, MAX_DERIV_ORDER};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `(p, q)`: `p` derivatives in `z`, `q` in `zbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WirtingerOrder {
    pub p: u32,
    pub q: u32,
}

impl WirtingerOrder {
    pub const fn new(p: u32, q: u32) -> Self {
        Self { p, q }
    }

    pub fn total(&self) -> u32 {
        self.p + self.q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    /// `exp(i lambda (x cos alpha + y sin alpha))`
    PlaneWave { lambda: Complex64, alpha: f64 },
    /// `Phi_{lambda,eta,k}(|z|) exp(i k arg z)`
    CylinderWave { lambda: Complex64, eta: u32, k: i32 },
    /// `z^a zbar^b`
    Monomial { a: u32, b: u32 },
    Superposition { terms: Vec<(Complex64, Field)> },
}

impl Field {
    pub fn plane_wave(lambda: Complex64, alpha: f64) -> Self {
        Field::PlaneWave { lambda, alpha }
    }

    pub fn cylinder(lambda: Complex64, eta: u32, k: i32) -> Self {
        Field::CylinderWave { lambda, eta, k }
    }

    pub fn monomial(a: u32, b: u32) -> Self {
        Field::Monomial { a, b }
    }

    pub fn constant() -> Self {
        Field::Monomial { a: 0, b: 0 }
    }

    pub fn zero() -> Self {
        Field::Superposition { terms: Vec::new() }
    }

    pub fn superposition(terms: Vec<(Complex64, Field)>) -> Self {
        Field::Superposition { terms }.normalized()
    }

    /// Flattens nested superpositions into a single level of leaf fields.
    pub fn normalized(self) -> Self {
        match self {
            Field::Superposition { terms } => {
                let mut flat = Vec::with_capacity(terms.len());
                flatten_into(Complex64::new(1.0, 0.0), terms, &mut flat);
                Field::Superposition { terms: flat }
            }
            leaf => leaf,
        }
    }

    /// Leaf fields with their coefficients (a leaf is its own single term).
    pub fn terms(&self) -> Vec<(Complex64, &Field)> {
        match self {
            Field::Superposition { terms } => terms.iter().map(|(c, f)| (*c, f)).collect(),
            leaf => vec![(Complex64::new(1.0, 0.0), leaf)],
        }
    }

    /// Inverse length over which the field varies near `z`; sizes finite-difference steps.
    pub fn local_frequency(&self, z: Complex64) -> f64 {
        let rho = z.norm().max(1e-3);
        match self {
            Field::PlaneWave { lambda, .. } => lambda.norm(),
            Field::CylinderWave { lambda, .. } => lambda.norm(),
            Field::Monomial { a, b } => (a + b) as f64 / rho,
            Field::Superposition { terms } => terms.iter().map(|(_, f)| f.local_frequency(z)).fold(0.0, f64::max),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Field::PlaneWave { lambda, alpha } => Ok(plane_wave_value(*lambda, *alpha, z)),
            Field::CylinderWave { lambda, eta, k } => {
                let rho = z.norm();
                let v = specfun::phi(*lambda, *eta, *k, rho)?;
                Ok(v * angular(*k, z))
            }
            Field::Monomial { a, b } => Ok(z.powu(*a) * z.conj().powu(*b)),
            Field::Superposition { terms } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, f) in terms {
                    acc += *c * f.eval(z)?;
                }
                Ok(acc)
            }
        }
    }

    /// Exact `(d/dz)^p (d/dzbar)^q` at `z`.
    pub fn wirtinger(&self, z: Complex64, ord: WirtingerOrder) -> Result<Complex64> {
        match self {
            Field::PlaneWave { lambda, alpha } => {
                let n = ord.total() as i32;
                let factor = (Complex64::i() * *lambda * 0.5).powi(n)
                    * Complex64::from_polar(1.0, *alpha * (ord.q as f64 - ord.p as f64));
                Ok(factor * plane_wave_value(*lambda, *alpha, z))
            }
            Field::CylinderWave { lambda, eta, k } => cylinder_wirtinger(*lambda, *eta, *k, z, ord),
            Field::Monomial { a, b } => match monomial_wirtinger_exact(*a, *b, ord) {
                None => Ok(Complex64::new(0.0, 0.0)),
                Some((coef, a2, b2)) => Ok(z.powu(a2) * z.conj().powu(b2) * coef as f64),
            },
            Field::Superposition { terms } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, f) in terms {
                    acc += *c * f.wirtinger(z, ord)?;
                }
                Ok(acc)
            }
        }
    }
}

fn flatten_into(scale: Complex64, terms: Vec<(Complex64, Field)>, out: &mut Vec<(Complex64, Field)>) {
    for (c, f) in terms {
        match f {
            Field::Superposition { terms: inner } => flatten_into(scale * c, inner, out),
            leaf => out.push((scale * c, leaf)),
        }
    }
}

#[inline]
fn plane_wave_value(lambda: Complex64, alpha: f64, z: Complex64) -> Complex64 {
    let proj = z.re * alpha.cos() + z.im * alpha.sin();
    (Complex64::i() * lambda * proj).exp()
}

/// `exp(i k arg z)`, with `arg 0 = 0`.
#[inline]
fn angular(k: i32, z: Complex64) -> Complex64 {
    let rho = z.norm();
    if rho == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (z / rho).powi(k)
}

/// Falling-factorial form of `(d/dz)^p (d/dzbar)^q z^a zbar^b`:
/// `Some((a!/(a-p)! * b!/(b-q)!, a-p, b-q))`, or `None` when the result is identically zero.
pub fn monomial_wirtinger_exact(a: u32, b: u32, ord: WirtingerOrder) -> Option<(u128, u32, u32)> {
    if ord.p > a || ord.q > b {
        return None;
    }
    let falling = |n: u32, k: u32| -> u128 { ((n - k + 1)..=n).map(u128::from).product() };
    Some((falling(a, ord.p) * falling(b, ord.q), a - ord.p, b - ord.q))
}

/// Mixed derivative of `Phi_{lambda,eta,k}(rho) e^{ik phi}`.
///
/// For `eta = 0` the result is `(lambda/2)^{p+q} (-1)^q Phi_{lambda,0,k+q-p} e^{i(k+q-p) phi}`;
/// `eta > 0` differentiates that expression `eta` times in `lambda` (product rule over
/// the power of `lambda` and the Bessel factor).
fn cylinder_wirtinger(lambda: Complex64, eta: u32, k: i32, z: Complex64, ord: WirtingerOrder) -> Result<Complex64> {
    if eta > MAX_DERIV_ORDER {
        return Err(Error::DerivativeOrderTooHigh(eta, MAX_DERIV_ORDER));
    }
    let n = ord.total();
    let kk = k + ord.q as i32 - ord.p as i32;
    let rho = z.norm();
    let sign = if ord.q.is_multiple_of(2) { 1.0 } else { -1.0 };
    let ang = angular(kk, z);
    // Phi_{lambda,e,kk}(rho) for e = 0..=eta
    let mut phis = [Complex64::new(0.0, 0.0); MAX_DERIV_ORDER as usize + 1];
    if rho == 0.0 {
        phis[0] = if kk == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    } else {
        let len = 2 * eta as usize + 1;
        let mut block = [Complex64::new(0.0, 0.0); 2 * MAX_DERIV_ORDER as usize + 1];
        specfun::bessel_j_block(kk - eta as i32, lambda * rho, &mut block[..len])?;
        for e in 0..=eta {
            let off = (eta - e) as usize;
            phis[e as usize] = specfun::deriv_from_block(e, &block[off..off + 2 * e as usize + 1]) * rho.powi(e as i32);
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for j in 0..=eta.min(n) {
        if j > 0 {
            binom = binom * (eta - j + 1) as f64 / j as f64;
        }
        // d^j/dl^j (l/2)^n = n!/(n-j)! l^{n-j} / 2^n
        let falling: f64 = ((n - j + 1)..=n).map(|v| v as f64).product();
        let lam_part = lambda.powu(n - j) * (falling / 2f64.powi(n as i32));
        acc += lam_part * phis[(eta - j) as usize] * binom;
    }
    Ok(acc * sign * ang)
}

const STENCIL_1: &[(i32, f64)] = &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];
const STENCIL_2: &[(i32, f64)] = &[
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];
const STENCIL_3: &[(i32, f64)] = &[
    (-3, 1.0 / 8.0),
    (-2, -1.0),
    (-1, 13.0 / 8.0),
    (1, -13.0 / 8.0),
    (2, 1.0),
    (3, -1.0 / 8.0),
];
const STENCIL_4: &[(i32, f64)] = &[
    (-3, -1.0 / 6.0),
    (-2, 2.0),
    (-1, -6.5),
    (0, 28.0 / 3.0),
    (1, -6.5),
    (2, 2.0),
    (3, -1.0 / 6.0),
];

fn stencil(order: u32) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => STENCIL_1,
        2 => STENCIL_2,
        3 => STENCIL_3,
        _ => STENCIL_4,
    }
}

/// Smallest and largest admissible finite-difference steps.
pub const FD_STEP_RANGE: (f64, f64) = (1e-5, 1e-2);

/// Step that balances truncation against rounding for a fourth-order stencil
/// of total order `n`: `eps^{1/(n+4)}` over the local frequency.
pub fn default_fd_step(f: &Field, z: Complex64, ord: WirtingerOrder) -> f64 {
    let n = ord.total().max(1) as f64;
    let h = f64::EPSILON.powf(1.0 / (n + 4.0)) / f.local_frequency(z).max(1e-3);
    h.clamp(FD_STEP_RANGE.0, FD_STEP_RANGE.1)
}

/// Central-difference approximation of the mixed Wirtinger derivative.
pub fn wirtinger_fd(f: &Field, z: Complex64, ord: WirtingerOrder, h: f64) -> Result<Complex64> {
    let n = ord.total();
    if n > 4 {
        return Err(Error::DerivativeOrderTooHigh(n, 4));
    }
    if !(FD_STEP_RANGE.0..=FD_STEP_RANGE.1).contains(&h) {
        return Err(Error::Precondition(format!(
            "finite-difference step {h} outside [{}, {}]",
            FD_STEP_RANGE.0, FD_STEP_RANGE.1
        )));
    }
    if n == 0 {
        return f.eval(z);
    }
    // (dx - i dy)^p (dx + i dy)^q / 2^n expanded as sum over dx^a dy^b
    let mut poly = vec![Complex64::new(1.0, 0.0)]; // coefficient of dx^(n_sofar - j) dy^j at index j
    let mul = |poly: &Vec<Complex64>, cy: Complex64| -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            out[j] += *c;
            out[j + 1] += *c * cy;
        }
        out
    };
    for _ in 0..ord.p {
        poly = mul(&poly, -Complex64::i());
    }
    for _ in 0..ord.q {
        poly = mul(&poly, Complex64::i());
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, coef) in poly.iter().enumerate() {
        if *coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        let ax = n - j as u32;
        let by = j as u32;
        let mut d = Complex64::new(0.0, 0.0);
        for &(ix, wx) in stencil(ax) {
            for &(iy, wy) in stencil(by) {
                let pt = z + Complex64::new(ix as f64 * h, iy as f64 * h);
                d += f.eval(pt)? * (wx * wy);
            }
        }
        acc += *coef * d / h.powi(n as i32);
    }
    Ok(acc / 2f64.powi(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisRole {
    ATerm,
    BTerm,
}

/// One polynomial solution `rho^{...} e^{ik phi}` written as `z^a zbar^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisMonomial {
    pub a: u32,
    pub b: u32,
    pub role: BasisRole,
    pub p: u32,
    pub k: i32,
}

impl BasisMonomial {
    pub fn field(&self) -> Field {
        Field::monomial(self.a, self.b)
    }

    pub fn rho_power(&self) -> u32 {
        self.a + self.b
    }
}

/// Polynomial solutions of the `(m-s, m)` mixed equation in harmonic `k`:
/// a-terms `rho^{2p+k}` for `0 <= p <= s-1`, `p + k >= 0`, and b-terms
/// `rho^{2p+s+|k+s|}` for `0 <= p <= m-s-1`, each times `e^{ik phi}`.
pub fn lemma3_basis(k: i32, params: &EquationParams) -> Vec<BasisMonomial> {
    let m = params.m as i32;
    let s = params.s as i32;
    let mut out = Vec::new();
    for p in 0..s {
        if p + k >= 0 {
            out.push(BasisMonomial { a: (p + k) as u32, b: p as u32, role: BasisRole::ATerm, p: p as u32, k });
        }
    }
    for p in 0..(m - s) {
        let (a, b) = if k + s >= 0 { (p + s + k, p + s) } else { (p, p - k) };
        out.push(BasisMonomial { a: a as u32, b: b as u32, role: BasisRole::BTerm, p: p as u32, k });
    }
    out
}
