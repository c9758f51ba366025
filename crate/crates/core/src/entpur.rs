//! Entanglement purification followed by a single teleportation.
//!
//! Each recurrence step consumes two Werner ebits and keeps one with
//! probability `p_pass(λ) = (8λ² − 4λ + 5)/9`; after twirling the survivor has
//! `λ' = (10λ² − 2λ + 1)/(8λ² − 4λ + 5)`.
//!
//! The repeated algorithm starts from `N` ebits. An odd pool first stores one
//! ebit, the rest are purified pairwise. Two or more survivors are purified
//! again, a single survivor is used for teleportation, and when nothing
//! survives the most recently stored ebit is used instead (or, with nothing
//! stored, the receiver guesses and gets fidelity 1/2).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::single_shot_fidelity;
use crate::combin::binomial_pmf;
use crate::qmath::{
    apply_unitary, computational_projectors, gates, measure_projective, partial_trace, tensor,
    werner_density, BellDiagonal, DensityOperator, WernerParam,
};
use crate::{Error, Result};

/// Largest ebit pool accepted by the exact and sampled evaluators.
pub const MAX_EBITS: usize = 1024;

/// Fidelity of a blind guess when no ebit is left.
pub const NO_EBIT_FIDELITY: f64 = 0.5;

/// `(8λ² − 4λ + 5)/9`
pub fn pass_probability(lam: WernerParam) -> f64 {
    let l = lam.value();
    (8.0 * l * l - 4.0 * l + 5.0) / 9.0
}

/// Werner parameter after one successful step and twirl.
pub fn purify_lambda(lam: WernerParam) -> WernerParam {
    let l = lam.value();
    let next = (10.0 * l * l - 2.0 * l + 1.0) / (8.0 * l * l - 4.0 * l + 5.0);
    WernerParam::new(next.clamp(0.0, 1.0)).expect("clamped into [0, 1]")
}

/// Bell weights of the surviving pair (before twirling) and the pass probability.
pub fn purified_bell_diagonal(lam: WernerParam) -> (BellDiagonal, f64) {
    let l = lam.value();
    let p = pass_probability(lam);
    let side = 2.0 * (1.0 - l) * (1.0 - l) / (9.0 * p);
    let bd = BellDiagonal {
        phi_plus: (10.0 * l * l - 2.0 * l + 1.0) / (9.0 * p),
        psi_plus: side,
        phi_minus: 2.0 * (l - l * l) / (3.0 * p),
        psi_minus: side,
    };
    (bd, p)
}

/// Probability that exactly `j` of `pairs` simultaneous steps succeed.
pub fn outcome_probability(pairs: usize, j: usize, lam: WernerParam) -> Result<f64> {
    if pairs == 0 || j > pairs {
        return Err(Error::input(alloc::format!(
            "need 0 <= j <= pairs with pairs >= 1, got j = {j}, pairs = {pairs}"
        )));
    }
    Ok(binomial_pmf(pairs as u64, j as u64, pass_probability(lam)))
}

/// One purification step simulated on the 16×16 density matrix of two Werner pairs.
///
/// Qubit order is Alice₁ Bob₁ Alice₂ Bob₂. Alice rotates her qubits by `R_x(π/2)`,
/// Bob by `R_x(−π/2)`; both apply a CNOT from pair 1 onto pair 2, measure their
/// pair-2 qubits and keep pair 1 when the results coincide. Returns the Bell
/// weights of the kept pair and the probability of keeping it.
pub fn step_oracle(lam: WernerParam) -> Result<(BellDiagonal, f64)> {
    let pair = werner_density(lam);
    let mut rho = tensor(&pair, &pair)?;
    let half_pi = core::f64::consts::FRAC_PI_2;
    for (qubit, angle) in [(0, half_pi), (1, -half_pi), (2, half_pi), (3, -half_pi)] {
        rho = apply_unitary(&rho, &gates::rotation_x(angle), &[qubit])?;
    }
    rho = apply_unitary(&rho, &gates::cnot(), &[0, 2])?;
    rho = apply_unitary(&rho, &gates::cnot(), &[1, 3])?;

    let outcomes = measure_projective(&rho, &computational_projectors(&[2, 3], 4)?)?;
    // indices 0b00 and 0b11: both targets agree
    let mut kept = crate::qmath::ComplexMatrix::zeros(16);
    let mut p_pass = 0.0;
    for outcome in [&outcomes[0b00], &outcomes[0b11]] {
        if let Some(state) = &outcome.state {
            kept.add_scaled(state.matrix(), outcome.probability);
            p_pass += outcome.probability;
        }
    }
    let kept = DensityOperator::from_matrix_unchecked(kept.scale_real(1.0 / p_pass));
    let control = partial_trace(&kept, &[0, 1])?;
    Ok((BellDiagonal::from_density(&control)?, p_pass))
}

/// Node of the repeated-purification recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PurificationDPState {
    /// Ebits still in play.
    pub count: usize,
    /// Purification steps already applied to them.
    pub round: usize,
    /// Round at which the most recently stored ebit was set aside.
    pub stored_round: Option<usize>,
}

impl PurificationDPState {
    pub fn initial(n_ebits: usize) -> Self {
        Self {
            count: n_ebits,
            round: 0,
            stored_round: None,
        }
    }
}

/// Upper bound on the number of purification rounds for `n` ebits.
pub fn max_rounds(n_ebits: usize) -> usize {
    n_ebits.max(2).next_power_of_two().trailing_zeros() as usize + 1
}

/// `λ_0, λ_1, …` obtained by iterating [`purify_lambda`].
#[derive(Clone, Debug)]
pub struct LambdaSchedule {
    lambdas: Vec<WernerParam>,
}

impl LambdaSchedule {
    pub fn new(lam0: WernerParam, rounds: usize) -> Self {
        let mut lambdas = Vec::with_capacity(rounds + 1);
        lambdas.push(lam0);
        for r in 0..rounds {
            lambdas.push(purify_lambda(lambdas[r]));
        }
        Self { lambdas }
    }

    pub fn get(&self, round: usize) -> WernerParam {
        self.lambdas[round]
    }

    fn fidelity(&self, round: usize) -> f64 {
        single_shot_fidelity(self.lambdas[round])
    }

    fn fallback(&self, stored_round: Option<usize>) -> f64 {
        stored_round.map_or(NO_EBIT_FIDELITY, |r| self.fidelity(r))
    }
}

/// Expectation of the repeated-purification protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntPurResult {
    pub expected_fidelity: f64,
    /// Terminal paths through the recursion, zero-probability branches included.
    pub path_count: u64,
    /// Sum of all terminal path probabilities; one up to rounding.
    pub total_probability: f64,
    pub monte_carlo: Option<McEstimate>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Node {
    value: f64,
    mass: f64,
    paths: u64,
}

impl Node {
    fn leaf(value: f64) -> Self {
        Self {
            value,
            mass: 1.0,
            paths: 1,
        }
    }

    fn accumulate(&mut self, weight: f64, child: Node) {
        self.value += weight * child.value;
        self.mass += weight * child.mass;
        self.paths += child.paths;
    }
}

struct Evaluator {
    schedule: LambdaSchedule,
    memo: BTreeMap<PurificationDPState, Node>,
}

impl Evaluator {
    fn eval(&mut self, state: PurificationDPState) -> Node {
        if let Some(node) = self.memo.get(&state) {
            return *node;
        }
        let PurificationDPState {
            mut count,
            round,
            mut stored_round,
        } = state;
        if count % 2 == 1 {
            stored_round = Some(round);
            count -= 1;
        }
        let node = if count == 0 {
            Node::leaf(self.schedule.fallback(stored_round))
        } else {
            let pairs = count / 2;
            let p = pass_probability(self.schedule.get(round));
            let mut node = Node::default();
            for j in 0..=pairs {
                let w = binomial_pmf(pairs as u64, j as u64, p);
                let child = match j {
                    0 => Node::leaf(self.schedule.fallback(stored_round)),
                    1 => Node::leaf(self.schedule.fidelity(round + 1)),
                    _ => self.eval(PurificationDPState {
                        count: j,
                        round: round + 1,
                        stored_round,
                    }),
                };
                node.accumulate(w, child);
            }
            node
        };
        self.memo.insert(state, node);
        node
    }
}

fn check_pool(n_ebits: usize, lam0: WernerParam) -> Result<WernerParam> {
    if n_ebits == 0 {
        return Err(Error::input("need at least one ebit"));
    }
    if n_ebits > MAX_EBITS {
        return Err(Error::Resource {
            requested: n_ebits,
            limit: MAX_EBITS,
        });
    }
    lam0.require_protocol()
}

/// Exact average fidelity of the repeated-purification protocol with `n_ebits` ebits.
pub fn expected_fidelity_dp(n_ebits: usize, lam0: WernerParam) -> Result<EntPurResult> {
    let lam0 = check_pool(n_ebits, lam0)?;
    let mut evaluator = Evaluator {
        schedule: LambdaSchedule::new(lam0, max_rounds(n_ebits) + 1),
        memo: BTreeMap::new(),
    };
    let root = evaluator.eval(PurificationDPState::initial(n_ebits));
    Ok(EntPurResult {
        expected_fidelity: root.value,
        path_count: root.paths,
        total_probability: root.mass,
        monte_carlo: None,
    })
}

/// Sample mean of terminal fidelities with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Running mean and centred second moment (Welford), mergeable across partitions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct McAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl McAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination; merging in a fixed order is deterministic.
    pub fn merge(&mut self, other: &McAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        libm::sqrt(var / self.count as f64)
    }

    pub fn finish(&self, seed: u64) -> McEstimate {
        McEstimate {
            estimate: self.mean,
            stderr: self.stderr(),
            samples: self.count,
            seed,
        }
    }
}

/// Runs the protocol once, drawing one Bernoulli trial per purified pair.
fn sample_once<R: Rng>(schedule: &LambdaSchedule, n_ebits: usize, rng: &mut R) -> f64 {
    let mut count = n_ebits;
    let mut round = 0;
    let mut stored_round = None;
    loop {
        if count % 2 == 1 {
            stored_round = Some(round);
            count -= 1;
        }
        if count == 0 {
            return schedule.fallback(stored_round);
        }
        let p = pass_probability(schedule.get(round));
        let survivors = (0..count / 2).filter(|_| rng.random_bool(p)).count();
        match survivors {
            0 => return schedule.fallback(stored_round),
            1 => return schedule.fidelity(round + 1),
            j => {
                count = j;
                round += 1;
            }
        }
    }
}

/// Samples `samples` protocol runs on the random stream `partition` derived from `seed`.
pub fn mc_partition(
    n_ebits: usize,
    lam0: WernerParam,
    samples: u64,
    seed: u64,
    partition: u64,
) -> Result<McAccumulator> {
    let lam0 = check_pool(n_ebits, lam0)?;
    let schedule = LambdaSchedule::new(lam0, max_rounds(n_ebits) + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition);
    let mut acc = McAccumulator::default();
    for _ in 0..samples {
        acc.push(sample_once(&schedule, n_ebits, &mut rng));
    }
    Ok(acc)
}

/// Sample count of partition `index` when `samples` are split `partitions` ways.
pub fn partition_size(samples: u64, partitions: u64, index: u64) -> u64 {
    samples / partitions + u64::from(index < samples % partitions)
}

/// Monte Carlo estimate split over `partitions` independent streams, merged in order.
pub fn mc_simulate_partitioned(
    n_ebits: usize,
    lam0: WernerParam,
    samples: u64,
    seed: u64,
    partitions: u64,
) -> Result<McEstimate> {
    if samples == 0 || partitions == 0 {
        return Err(Error::input("samples and partitions must be positive"));
    }
    let mut total = McAccumulator::default();
    for index in 0..partitions {
        let size = partition_size(samples, partitions, index);
        total.merge(&mc_partition(n_ebits, lam0, size, seed, index)?);
    }
    Ok(total.finish(seed))
}

/// Monte Carlo estimate of the protocol's average fidelity on a single stream.
pub fn mc_simulate(n_ebits: usize, lam0: WernerParam, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_simulate_partitioned(n_ebits, lam0, samples, seed, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(x: f64) -> WernerParam {
        WernerParam::new(x).unwrap()
    }

    /// Independent evaluation: enumerates every individual pass/fail pattern of the
    /// pairs in a round instead of using the binomial law.
    fn brute_force(count: usize, round: usize, stored: Option<usize>, lambdas: &[f64]) -> f64 {
        let f = |r: usize| (2.0 * lambdas[r] + 1.0) / 3.0;
        let (mut count, mut stored) = (count, stored);
        if count % 2 == 1 {
            stored = Some(round);
            count -= 1;
        }
        let fallback = stored.map_or(0.5, f);
        if count == 0 {
            return fallback;
        }
        let l = lambdas[round];
        let p = (8.0 * l * l - 4.0 * l + 5.0) / 9.0;
        let pairs = count / 2;
        let mut total = 0.0;
        for pattern in 0u32..(1 << pairs) {
            let j = pattern.count_ones() as usize;
            let w = p.powi(j as i32) * (1.0 - p).powi((pairs - j) as i32);
            total += w * match j {
                0 => fallback,
                1 => f(round + 1),
                _ => brute_force(j, round + 1, stored, lambdas),
            };
        }
        total
    }

    fn lambdas(l0: f64) -> Vec<f64> {
        let mut v = alloc::vec![l0];
        for _ in 0..8 {
            let l = *v.last().unwrap();
            v.push((10.0 * l * l - 2.0 * l + 1.0) / (8.0 * l * l - 4.0 * l + 5.0));
        }
        v
    }

    #[test]
    fn pass_probability_examples() {
        assert!((pass_probability(lam(1.0)) - 1.0).abs() < 1e-15);
        assert!((pass_probability(lam(0.25)) - 0.5).abs() < 1e-15);
        assert!((pass_probability(lam(0.5)) - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn purify_lambda_examples() {
        assert_eq!(purify_lambda(lam(1.0)).value(), 1.0);
        assert!((purify_lambda(lam(0.5)).value() - 0.5).abs() < 1e-15);
        assert!((purify_lambda(lam(0.7)).value() - 4.5 / 6.12).abs() < 1e-15);
        assert!((purify_lambda(lam(0.7)).value() - 0.735294).abs() < 1e-6);
    }

    #[test]
    fn purified_weights() {
        let (bd, p) = purified_bell_diagonal(lam(1.0));
        assert_eq!((bd.phi_plus, bd.psi_plus, bd.phi_minus, bd.psi_minus, p), (1.0, 0.0, 0.0, 0.0, 1.0));
        let (bd, p) = purified_bell_diagonal(lam(0.7));
        assert!((p - 6.12 / 9.0).abs() < 1e-15);
        assert!((bd.phi_plus - (10.0 * 0.49 - 1.4 + 1.0) / (9.0 * p)).abs() < 1e-15);
        for x in [0.0, 0.3, 0.55, 0.9] {
            let (bd, _) = purified_bell_diagonal(lam(x));
            assert!((bd.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!((bd.phi_plus - purify_lambda(lam(x)).value()).abs() < 1e-14);
        }
    }

    #[test]
    fn outcome_probability_examples() {
        assert_eq!(outcome_probability(1, 1, lam(1.0)).unwrap(), 1.0);
        assert_eq!(outcome_probability(1, 0, lam(1.0)).unwrap(), 0.0);
        let fair = lam(0.25);
        let probs: Vec<f64> = (0..=2).map(|j| outcome_probability(2, j, fair).unwrap()).collect();
        for (got, want) in probs.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        let p = 6.92 / 9.0;
        let want = 4.0 * p * p * p * (2.08 / 9.0);
        assert!((outcome_probability(4, 3, lam(0.8)).unwrap() - want).abs() < 1e-15);
        assert!(outcome_probability(2, 3, fair).is_err());
        assert!(outcome_probability(0, 0, fair).is_err());
    }

    #[test]
    fn step_oracle_examples() {
        let (bd, p) = step_oracle(lam(1.0)).unwrap();
        assert!((p - 1.0).abs() < 1e-12 && (bd.phi_plus - 1.0).abs() < 1e-12);
        let (bd, p) = step_oracle(lam(0.25)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        for w in bd.weights() {
            assert!((w - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn step_oracle_reproduces_closed_form_on_grid() {
        for k in 0..20 {
            let x = k as f64 / 19.0;
            let (oracle, p_oracle) = step_oracle(lam(x)).unwrap();
            let (closed, p_closed) = purified_bell_diagonal(lam(x));
            assert!((p_oracle - p_closed).abs() < 1e-12, "λ = {x}");
            for (a, b) in oracle.weights().iter().zip(closed.weights()) {
                assert!((a - b).abs() < 1e-12, "λ = {x}: {oracle:?} vs {closed:?}");
            }
        }
    }

    #[test]
    fn fixed_points_and_improvement() {
        assert!((purify_lambda(lam(0.5)).value() - 0.5).abs() < 1e-14);
        assert!((purify_lambda(lam(1.0)).value() - 1.0).abs() < 1e-14);
        for k in 1..1000 {
            let x = 0.5 + 0.5 * k as f64 / 1000.0;
            assert!(purify_lambda(lam(x)).value() > x, "λ = {x}");
        }
    }

    #[test]
    fn dp_hand_anchors() {
        for l in [0.3, 0.7, 1.0] {
            let r = expected_fidelity_dp(1, lam(l)).unwrap();
            assert!((r.expected_fidelity - single_shot_fidelity(lam(l))).abs() < 1e-15);
            assert_eq!(r.path_count, 1);
        }
        let p = 6.92 / 9.0;
        let f1 = (2.0 * (5.8 / 6.92) + 1.0) / 3.0;
        let two = expected_fidelity_dp(2, lam(0.8)).unwrap().expected_fidelity;
        assert!((two - (p * f1 + (1.0 - p) / 2.0)).abs() < 1e-14);
        assert!((two - 0.801482).abs() < 1e-6);
        let three = expected_fidelity_dp(3, lam(0.8)).unwrap().expected_fidelity;
        assert!((three - (p * f1 + (1.0 - p) * 2.6 / 3.0)).abs() < 1e-14);
        assert!((three - 0.886222).abs() < 1e-6);
    }

    #[test]
    fn dp_matches_pattern_enumeration() {
        for l0 in [0.3, 0.55, 0.8, 0.95] {
            let ls = lambdas(l0);
            for n in 1..=13 {
                let dp = expected_fidelity_dp(n, lam(l0)).unwrap().expected_fidelity;
                let bf = brute_force(n, 0, None, &ls);
                assert!((dp - bf).abs() < 1e-13, "N = {n}, λ0 = {l0}: {dp} vs {bf}");
            }
        }
    }

    #[test]
    fn dp_probability_mass_and_range() {
        for n in 1..=33 {
            for k in 1..20 {
                let l0 = 0.25 + 0.75 * k as f64 / 20.0;
                let r = expected_fidelity_dp(n, lam(l0)).unwrap();
                assert!((r.total_probability - 1.0).abs() < 1e-12);
                assert!((0.5..=1.0).contains(&r.expected_fidelity));
            }
        }
    }

    #[test]
    fn dp_rejects_bad_input() {
        assert!(expected_fidelity_dp(0, lam(0.8)).is_err());
        assert!(matches!(expected_fidelity_dp(3, lam(0.2)), Err(Error::Domain { .. })));
        assert!(matches!(expected_fidelity_dp(MAX_EBITS + 1, lam(0.8)), Err(Error::Resource { .. })));
    }

    #[test]
    fn mc_degenerate_cases_are_exact() {
        let r = mc_simulate(7, lam(1.0), 1000, 3).unwrap();
        assert_eq!((r.estimate, r.stderr), (1.0, 0.0));
        let r = mc_simulate(1, lam(0.7), 1000, 3).unwrap();
        assert_eq!(r.estimate, single_shot_fidelity(lam(0.7)));
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn mc_is_deterministic_per_seed_and_partitioning() {
        let a = mc_simulate_partitioned(9, lam(0.8), 20_000, 11, 4).unwrap();
        let b = mc_simulate_partitioned(9, lam(0.8), 20_000, 11, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 20_000);
        let c = mc_simulate(9, lam(0.8), 20_000, 12).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn mc_agrees_with_dp() {
        let exact = expected_fidelity_dp(9, lam(0.8)).unwrap().expected_fidelity;
        let mc = mc_simulate(9, lam(0.8), 200_000, 1).unwrap();
        assert!((mc.estimate - exact).abs() <= 5.0 * mc.stderr, "{mc:?} vs {exact}");
    }

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 / 7.0).collect();
        let mut whole = McAccumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = McAccumulator::default();
        let mut right = McAccumulator::default();
        xs[..40].iter().for_each(|&x| left.push(x));
        xs[40..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(left.count(), 100);
        assert!((left.mean() - whole.mean()).abs() < 1e-14);
        assert!((left.stderr() - whole.stderr()).abs() < 1e-14);
    }
}
