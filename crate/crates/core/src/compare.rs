//! Head-to-head evaluation of the three transfer strategies.
//!
//! Entanglement purification is always run on an odd pool: with an even
//! budget one ebit is discarded up front, since an odd pool can never lose
//! every ebit.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::entpur::expected_fidelity_dp;
use crate::estimate::estimation_fidelity;
use crate::qmath::WernerParam;
use crate::qubitpur::average_fidelity;
use crate::{Error, Result};

/// Points of the sign-change prescan that precedes bisection.
pub const PRESCAN_POINTS: usize = 64;
pub const MIN_CROSSING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    EntPur,
    QubitPur,
    Estimation,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::EntPur, Method::QubitPur, Method::Estimation];

    pub fn name(self) -> &'static str {
        match self {
            Method::EntPur => "ent_pur",
            Method::QubitPur => "qubit_pur",
            Method::Estimation => "estimation",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ent" | "ent_pur" => Ok(Method::EntPur),
            "qubit" | "qubit_pur" => Ok(Method::QubitPur),
            "est" | "estimation" => Ok(Method::Estimation),
            other => Err(Error::input(alloc::format!("unknown method {other:?}"))),
        }
    }
}

/// Entanglement-purification fidelity with the odd-pool rule applied.
pub fn effective_entpur_fidelity(n: usize, lam0: WernerParam) -> Result<f64> {
    let pool = if n >= 2 && n.is_multiple_of(2) { n - 1 } else { n };
    Ok(expected_fidelity_dp(pool, lam0)?.expected_fidelity)
}

/// Average fidelity of `method` with `n` resources at channel quality `lam0`.
pub fn method_fidelity(method: Method, n: usize, lam0: WernerParam) -> Result<f64> {
    match method {
        Method::EntPur => effective_entpur_fidelity(n, lam0),
        Method::QubitPur => Ok(average_fidelity(n, lam0)?.expected_fidelity),
        Method::Estimation => Ok(estimation_fidelity(n)?.fidelity),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub n: usize,
    pub lambda0: WernerParam,
    pub fidelity: f64,
}

/// `points` equally spaced values strictly inside `(1/4, 1)`.
pub fn interior_grid(points: usize) -> Vec<f64> {
    let step = (1.0 - WernerParam::CRITICAL) / (points + 1) as f64;
    (1..=points)
        .map(|k| WernerParam::CRITICAL + step * k as f64)
        .collect()
}

/// One row per `(method, n, λ₀)`, ordered by method, then `n`, then `λ₀`.
pub fn sweep(methods: &[Method], n_values: &[usize], lambda_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if methods.is_empty() || n_values.is_empty() || lambda_grid.is_empty() {
        return Err(Error::input("sweep needs methods, N values and a λ₀ grid"));
    }
    if let Some(&bad) = lambda_grid
        .iter()
        .find(|&&l| !(l > WernerParam::CRITICAL && l < 1.0))
    {
        return Err(Error::Domain {
            value: bad,
            min: WernerParam::CRITICAL,
            max: 1.0,
        });
    }
    if n_values.contains(&0) {
        return Err(Error::input("N must be positive"));
    }
    let mut methods = methods.to_vec();
    methods.sort_unstable();
    methods.dedup();
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut grid = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut rows = Vec::with_capacity(methods.len() * ns.len() * grid.len());
    for &method in &methods {
        for &n in &ns {
            for &l in &grid {
                let lambda0 = WernerParam::protocol(l)?;
                rows.push(SweepRow {
                    method,
                    n,
                    lambda0,
                    fidelity: method_fidelity(method, n, lambda0)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Channel qualities at which the purification strategies match estimation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingResult {
    pub n: usize,
    /// Entanglement purification vs estimation.
    pub lambda_1: Option<f64>,
    /// Qubit purification vs estimation.
    pub lambda_2: Option<f64>,
    pub tolerance: f64,
}

/// Root of `f(λ) = target` on `[1/4, 1]`: a [`PRESCAN_POINTS`] grid must show
/// exactly one sign change, which is then bisected to width `tol`.
pub fn find_crossing(
    f: impl Fn(WernerParam) -> Result<f64>,
    target: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let (lo, hi) = (WernerParam::CRITICAL, 1.0);
    let g = |x: f64| -> Result<f64> { Ok(f(WernerParam::protocol(x)?)? - target) };
    let xs: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (PRESCAN_POINTS - 1) as f64)
        .collect();
    let gs = xs.iter().map(|&x| g(x)).collect::<Result<Vec<f64>>>()?;

    let nonzero: Vec<usize> = (0..xs.len()).filter(|&i| gs[i] != 0.0).collect();
    let changes: Vec<(usize, usize)> = nonzero
        .windows(2)
        .filter(|w| (gs[w[0]] < 0.0) != (gs[w[1]] < 0.0))
        .map(|w| (w[0], w[1]))
        .collect();
    let (i, j) = match changes.as_slice() {
        [] => return Ok(None),
        [single] => *single,
        many => {
            return Err(Error::Ambiguous {
                sign_changes: many.len(),
            })
        }
    };
    if j > i + 1 {
        // exact zero on a grid node between the two signs
        return Ok(Some(xs[i + 1]));
    }
    let (mut a, mut b) = (xs[i], xs[j]);
    let sign_a = gs[i] < 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(Some(mid));
        }
        if (gm < 0.0) == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// Crossings of both purification strategies with estimation at resource count `n`.
pub fn crossing_points(n: usize, tol: f64) -> Result<CrossingResult> {
    if n == 0 {
        return Err(Error::input("N must be positive"));
    }
    if tol.is_nan() || tol < MIN_CROSSING_TOL {
        return Err(Error::input(alloc::format!("tolerance must be at least {MIN_CROSSING_TOL:e}")));
    }
    let target = estimation_fidelity(n)?.fidelity;
    let lambda_1 = find_crossing(|l| effective_entpur_fidelity(n, l), target, tol)?;
    let lambda_2 = find_crossing(|l| Ok(average_fidelity(n, l)?.expected_fidelity), target, tol)?;
    Ok(CrossingResult {
        n,
        lambda_1,
        lambda_2,
        tolerance: tol,
    })
}

/// Best strategy for `n` resources; ties go to estimation, which needs no quantum channel.
/// Entanglement purification never wins against qubit purification and is not offered.
pub fn recommend(n: usize, lam0: WernerParam) -> Result<Method> {
    let qubit = average_fidelity(n, lam0)?.expected_fidelity;
    let est = estimation_fidelity(n)?.fidelity;
    Ok(if qubit > est {
        Method::QubitPur
    } else {
        Method::Estimation
    })
}
