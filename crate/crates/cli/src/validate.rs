//! Oracle comparisons and invariant checks behind `qtransfer validate`.
//!
//! Closed-form expressions are taken from [`Formulas`] so that a test can swap
//! one for a corrupted version and watch the suite fail.

use core::f64::consts::{PI, TAU};

use qtransfer::channel::{self, teleport_oracle, MixtureCoefficients};
use qtransfer::compare::{crossing_points, effective_entpur_fidelity};
use qtransfer::entpur::{self, expected_fidelity_dp, step_oracle};
use qtransfer::estimate::estimation_fidelity;
use qtransfer::qubitpur::{
    self, average_fidelity, reduced_state_quadrature_oracle, spin_projector_oracle, OutcomeDistribution,
    DEFAULT_QUADRATURE_NODES,
};
use qtransfer::qmath::{bloch_to_ket, fidelity_pure};
use qtransfer::{BlochAngles, Result, WernerParam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EXIT_OK, EXIT_VALIDATION};
use crate::format::Table;

/// The closed forms under test.
#[derive(Clone, Copy)]
pub struct Formulas {
    /// `(c1, c0)` of the teleported mixture.
    pub teleport_coefficients: fn(WernerParam) -> (f64, f64),
    pub single_shot_fidelity: fn(WernerParam) -> f64,
    pub pass_probability: fn(WernerParam) -> f64,
    pub purify_lambda: fn(WernerParam) -> f64,
    /// Bell weights after a successful step, in `phi+, psi+, phi-, psi-` order.
    pub purified_weights: fn(WernerParam) -> [f64; 4],
    pub outcome_distribution: fn(usize, WernerParam) -> Result<OutcomeDistribution>,
    pub single_qubit_fidelity: fn(usize, WernerParam) -> f64,
}

impl Default for Formulas {
    fn default() -> Self {
        Self {
            teleport_coefficients: |l| {
                let c = MixtureCoefficients::from_lambda(l);
                (c.c1, c.c0)
            },
            single_shot_fidelity: channel::single_shot_fidelity,
            pass_probability: entpur::pass_probability,
            purify_lambda: |l| entpur::purify_lambda(l).value(),
            purified_weights: |l| entpur::purified_bell_diagonal(l).0.weights(),
            outcome_distribution: qubitpur::outcome_distribution,
            single_qubit_fidelity: qubitpur::single_qubit_fidelity,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest deviation seen (a z-score for the Monte Carlo check).
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    fn within(name: &'static str, max_error: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: max_error <= tolerance,
            max_error,
            tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationSummary {
    pub checks: Vec<Check>,
}

impl ValidationSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn exit_status(&self) -> u8 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_VALIDATION
        }
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["name", "passed", "max_error", "tolerance"]);
        for c in &self.checks {
            t.push(vec![c.name.into(), c.passed.into(), c.max_error.into(), c.tolerance.into()]);
        }
        t
    }
}

fn lam(x: f64) -> WernerParam {
    WernerParam::new(x).expect("grid values lie in [0, 1]")
}

/// `points` values from 1/4 to 1 inclusive.
fn protocol_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| 0.25 + 0.75 * k as f64 / (points - 1) as f64)
        .collect()
}

fn teleport_checks(f: &Formulas, seed: u64) -> Result<[Check; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut state_err, mut fid_err) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let l = lam(rng.random_range(0.25..=1.0));
        let angles = BlochAngles::new(rng.random_range(0.0..=PI), rng.random_range(0.0..TAU))?;
        let out = teleport_oracle(l, angles)?;
        let (c1, c0) = (f.teleport_coefficients)(l);
        let expected = MixtureCoefficients { c1, c0 }.state(angles);
        state_err = state_err.max(out.matrix().max_abs_diff(expected.matrix()));
        let fid = fidelity_pure(&bloch_to_ket(angles), &out)?;
        fid_err = fid_err.max((fid - (f.single_shot_fidelity)(l)).abs());
    }
    Ok([
        Check::within("teleport_state", state_err, 1e-12),
        Check::within("teleport_fidelity", fid_err, 1e-12),
    ])
}

fn step_checks(f: &Formulas) -> Result<[Check; 3]> {
    let (mut w_err, mut p_err, mut l_err) = (0.0f64, 0.0f64, 0.0f64);
    for x in protocol_grid(20) {
        let l = lam(x);
        let (bd, p) = step_oracle(l)?;
        let weights = (f.purified_weights)(l);
        for (a, b) in bd.weights().iter().zip(weights) {
            w_err = w_err.max((a - b).abs());
        }
        p_err = p_err.max((p - (f.pass_probability)(l)).abs());
        l_err = l_err.max((bd.phi_plus - (f.purify_lambda)(l)).abs());
    }
    Ok([
        Check::within("step_weights", w_err, 1e-12),
        Check::within("step_pass_probability", p_err, 1e-12),
        Check::within("step_lambda", l_err, 1e-12),
    ])
}

fn fixed_point_check(f: &Formulas) -> Check {
    let fixed = ((f.purify_lambda)(lam(0.5)) - 0.5)
        .abs()
        .max(((f.purify_lambda)(lam(1.0)) - 1.0).abs());
    let improves = (1..=1000).all(|k| {
        let x = 0.5 + 0.5 * k as f64 / 1001.0;
        (f.purify_lambda)(lam(x)) > x
    });
    Check {
        passed: fixed <= 1e-14 && improves,
        ..Check::within("purify_fixed_points", fixed, 1e-14)
    }
}

fn spin_check(f: &Formulas) -> Result<Check> {
    let mut err = 0.0f64;
    for n in 1..=6 {
        for x in [0.3, 0.5, 0.7, 0.9] {
            let oracle = spin_projector_oracle(n, lam(x))?;
            err = err.max(oracle.max_abs_diff(&(f.outcome_distribution)(n, lam(x))?));
        }
    }
    Ok(Check::within("spin_projector", err, 1e-10))
}

fn quadrature_check(f: &Formulas) -> Result<Check> {
    let mut err = 0.0f64;
    for m in 1..=4 {
        for x in [0.3, 0.6, 0.9] {
            let oracle = reduced_state_quadrature_oracle(m, lam(x), DEFAULT_QUADRATURE_NODES)?;
            err = err.max((oracle - (f.single_qubit_fidelity)(m, lam(x))).abs());
        }
    }
    Ok(Check::within("quadrature", err, 1e-6))
}

fn normalisation_check(f: &Formulas) -> Result<Check> {
    let mut err = 0.0f64;
    for n in 1..=20 {
        for x in protocol_grid(20) {
            err = err.max(((f.outcome_distribution)(n, lam(x))?.total() - 1.0).abs());
        }
    }
    Ok(Check::within("distribution_normalisation", err, 1e-12))
}

fn mc_check(seed: u64, samples: u64) -> Result<Check> {
    let mut worst = 0.0f64;
    for (n, x) in [(5, 0.7), (9, 0.8), (15, 0.9)] {
        let dp = expected_fidelity_dp(n, lam(x))?.expected_fidelity;
        let mc = crate::commands::mc_parallel(n, lam(x), samples, seed)?;
        let z = if mc.stderr > 0.0 {
            (mc.estimate - dp).abs() / mc.stderr
        } else if mc.estimate == dp {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    Ok(Check::within("dp_vs_monte_carlo", worst, 5.0))
}

fn dp_mass_check() -> Result<Check> {
    let mut err = 0.0f64;
    for n in 1..=33 {
        for x in [0.3, 0.5, 0.7, 0.9] {
            err = err.max((expected_fidelity_dp(n, lam(x))?.total_probability - 1.0).abs());
        }
    }
    Ok(Check::within("dp_probability_mass", err, 1e-12))
}

fn identity_check() -> Result<Check> {
    let mut err = 0.0f64;
    for x in protocol_grid(20) {
        let single = (1.0 + 2.0 * x) / 3.0;
        for n in [1, 2] {
            err = err.max((average_fidelity(n, lam(x))?.expected_fidelity - single).abs());
        }
    }
    Ok(Check::within("small_n_identities", err, 1e-12))
}

fn dominance_check() -> Result<Check> {
    let mut violation = 0.0f64;
    for k in 1..=200 {
        let l = lam(0.25 + 0.75 * k as f64 / 201.0);
        let gap = effective_entpur_fidelity(9, l)? - average_fidelity(9, l)?.expected_fidelity;
        violation = violation.max(gap);
    }
    Ok(Check::within("qubit_dominates_ent", violation, 1e-12))
}

fn odd_even_check() -> Result<Check> {
    let mut violation = f64::NEG_INFINITY;
    for x in [0.6, 0.7, 0.8, 0.9] {
        let f: Vec<f64> = (0..=32)
            .map(|n| if n == 0 { Ok(0.0) } else { Ok(expected_fidelity_dp(n, lam(x))?.expected_fidelity) })
            .collect::<Result<_>>()?;
        for k in 1..=15 {
            violation = violation.max(f[2 * k] - f[2 * k + 1]).max(f[2 * k + 2] - f[2 * k + 1]);
        }
    }
    // the inequalities are strict
    Ok(Check {
        passed: violation < 0.0,
        ..Check::within("odd_even_structure", violation.max(0.0), 0.0)
    })
}

fn estimation_check() -> Result<Check> {
    let ok = estimation_fidelity(1)?.fidelity == 2.0 / 3.0 && estimation_fidelity(9)?.fidelity == 10.0 / 11.0;
    Ok(Check {
        passed: ok,
        ..Check::within("estimation_values", if ok { 0.0 } else { 1.0 }, 0.0)
    })
}

fn crossing_check() -> Result<Check> {
    let one = crossing_points(1, 1e-12)?;
    let two = crossing_points(2, 1e-12)?;
    let err = match (one.lambda_1, one.lambda_2, two.lambda_1, two.lambda_2) {
        (Some(a), Some(b), Some(c), Some(d)) => (a - 0.5).abs().max((b - 0.5).abs()).max((c - d).abs()),
        _ => f64::INFINITY,
    };
    Ok(Check::within("crossing_anchors", err, 1e-9))
}

/// Runs every check; only errors from the evaluators themselves abort the run.
pub fn run_validation(f: &Formulas, seed: u64, mc_samples: u64) -> Result<ValidationSummary> {
    let mut checks = Vec::new();
    checks.extend(teleport_checks(f, seed)?);
    checks.extend(step_checks(f)?);
    checks.push(fixed_point_check(f));
    checks.push(spin_check(f)?);
    checks.push(quadrature_check(f)?);
    checks.push(normalisation_check(f)?);
    checks.push(mc_check(seed, mc_samples)?);
    checks.push(dp_mass_check()?);
    checks.push(identity_check()?);
    checks.push(dominance_check()?);
    checks.push(odd_even_check()?);
    checks.push(estimation_check()?);
    checks.push(crossing_check()?);
    Ok(ValidationSummary { checks })
}
