//! Common zeros of `g_{r1}` and `g_{r2}` and the resulting regime for a pair of radii.

use crate::chareq::EquationParams;
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::meanvalue::{residual, QuadratureRule, ResidualReport};
use crate::par::{self, Exec};
use crate::synthesis::{apply_pde, disk_samples, PdeOperator};
use crate::zeroscan::{select_zr, ZeroCatalog};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MATCH_TOL: f64 = 1e-9;

/// One element of `Z_{r1} ∩ Z_{r2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonZero {
    pub lambda: Complex64,
    /// Indices into `select_zr(catalog, 1.0)`.
    pub w1: usize,
    pub w2: usize,
    /// `|w2/w1 - r2/r1|`
    pub ratio_defect: f64,
}

/// `lambda = w1/r1 = w2/r2` for selected zeros `w1`, `w2` of `G`, matched by
/// `|w2 - w1 r2/r1| <= tol (1 + |w1|)`.
pub fn common_zeros(catalog: &ZeroCatalog, r1: f64, r2: f64, tol: f64, exec: Exec) -> Vec<CommonZero> {
    let sel: Vec<Complex64> = select_zr(catalog, 1.0).into_iter().map(|z| z.lambda).collect();
    if r1 == r2 {
        return sel
            .iter()
            .enumerate()
            .map(|(i, w)| CommonZero { lambda: w / r1, w1: i, w2: i, ratio_defect: 0.0 })
            .collect();
    }
    let ratio = r2 / r1;
    let idx: Vec<usize> = (0..sel.len()).collect();
    par::map_collect(exec, &idx, |&i| {
        let w1 = sel[i];
        let target = w1 * ratio;
        sel.iter()
            .enumerate()
            .filter(|(_, w2)| (**w2 - target).norm() <= tol * (1.0 + w1.norm()))
            .map(|(j, w2)| CommonZero { lambda: w1 / r1, w1: i, w2: j, ratio_defect: (w2 / w1 - ratio).norm() })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Pairs of selected zeros with `w2 / w1` real and greater than one (within
/// `tol` in argument); each gives radii `r1 = 1`, `r2 = |w2| / |w1|` with a
/// common zero.
pub fn real_ratio_pairs(catalog: &ZeroCatalog, tol: f64) -> Vec<(usize, usize, f64)> {
    let sel: Vec<Complex64> = select_zr(catalog, 1.0).into_iter().map(|z| z.lambda).collect();
    let mut out = Vec::new();
    for (i, a) in sel.iter().enumerate() {
        for (j, b) in sel.iter().enumerate() {
            let q = b / a;
            if i != j && q.re > 1.0 && q.im.abs() <= tol * q.re {
                out.push((i, j, q.norm()));
            }
        }
    }
    out
}

pub fn counterexample(lambda: Complex64) -> Result<Field> {
    if lambda.norm() == 0.0 || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::Precondition(format!("counterexample frequency must be a nonzero common zero, got {lambda}")));
    }
    Ok(Field::cylinder(lambda, 0, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleCheck {
    pub lambda: Complex64,
    pub residuals_r1: Vec<ResidualReport>,
    pub residuals_r2: Vec<ResidualReport>,
    pub mean_value_ok: bool,
    pub max_abs_pde: f64,
    pub max_abs_field: f64,
    /// `max |apply_pde| >= 1e-3 max |f|` over the samples.
    pub violates_pde: bool,
}

/// Counterexample contract: the equation holds for `r = r_i` at samples with
/// `|z| < R - r_i`, while the PDE fails at the same points.
#[allow(clippy::too_many_arguments)]
pub fn check_counterexample(
    lambda: Complex64,
    m: u32,
    s: u32,
    r1: f64,
    r2: f64,
    big_r: f64,
    n: usize,
    seed: u64,
    rule: &QuadratureRule,
    exec: Exec,
) -> Result<CounterexampleCheck> {
    let f = counterexample(lambda)?;
    let p1 = EquationParams::new(m, s, r1)?;
    let p2 = EquationParams::new(m, s, r2)?;
    let pts1 = disk_samples(big_r - r1, n, seed);
    let pts2 = disk_samples(big_r - r2, n, seed);
    let residuals_r1 = par::try_map_collect(exec, &pts1, |z| residual(&f, *z, &p1, rule))?;
    let residuals_r2 = par::try_map_collect(exec, &pts2, |z| residual(&f, *z, &p2, rule))?;
    let op = PdeOperator::for_params(&p1);
    let mut max_abs_pde: f64 = 0.0;
    let mut max_abs_field: f64 = 0.0;
    for z in pts1.iter().chain(&pts2) {
        max_abs_pde = max_abs_pde.max(apply_pde(&f, *z, op)?.norm());
        max_abs_field = max_abs_field.max(f.eval(*z)?.norm());
    }
    Ok(CounterexampleCheck {
        lambda,
        mean_value_ok: residuals_r1.iter().chain(&residuals_r2).all(|r| r.satisfied()),
        residuals_r1,
        residuals_r2,
        max_abs_pde,
        max_abs_field,
        violates_pde: max_abs_pde >= 1e-3 * max_abs_field,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `R > r1 + r2` and no common zero was found.
    Injective,
    /// A common zero exists; `Phi_{lambda,0,0}` is attached.
    CounterexampleConstructed,
    /// `R < r1 + r2`, no common zero: a counterexample exists but is not built.
    NonconstructiveCounterexampleRegime,
    /// `R = r1 + r2`.
    Indeterminate,
}

/// Bounds within which emptiness of the intersection was checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    /// Scan bound of the catalog, radius-1 scale.
    pub lambda_max: f64,
    pub tol: f64,
    /// Largest `|lambda|` for which both `Z_{r1}` and `Z_{r2}` are complete.
    pub searched_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoRadiiReport {
    pub m: u32,
    pub s: u32,
    pub r1: f64,
    pub r2: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub common_zeros: Vec<CommonZero>,
    pub regime: Regime,
    pub counterexample: Option<Field>,
    pub scope: Scope,
}

pub fn classify(catalog: &ZeroCatalog, r1: f64, r2: f64, big_r: f64, tol: f64, exec: Exec) -> Result<TwoRadiiReport> {
    if !(r1 > 0.0 && r2 > 0.0 && tol > 0.0) {
        return Err(Error::Precondition(format!("need r1, r2, tol > 0, got {r1}, {r2}, {tol}")));
    }
    if !(r1.max(r2) < big_r) {
        return Err(Error::Precondition(format!("need max(r1, r2) < R, got r1={r1} r2={r2} R={big_r}")));
    }
    let common = common_zeros(catalog, r1, r2, tol, exec);
    let sum = r1 + r2;
    let regime = if !common.is_empty() {
        Regime::CounterexampleConstructed
    } else if (big_r - sum).abs() <= 1e-12 * sum {
        Regime::Indeterminate
    } else if big_r > sum {
        Regime::Injective
    } else {
        Regime::NonconstructiveCounterexampleRegime
    };
    let counterexample = match common.first() {
        Some(c) => Some(counterexample(c.lambda)?),
        None => None,
    };
    Ok(TwoRadiiReport {
        m: catalog.m,
        s: catalog.s,
        r1,
        r2,
        big_r,
        common_zeros: common,
        regime,
        counterexample,
        scope: Scope { lambda_max: catalog.lambda_max, tol, searched_bound: catalog.lambda_max / r1.max(r2) },
    })
}
