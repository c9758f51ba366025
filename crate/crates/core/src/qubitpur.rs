//! Teleport every copy through the raw channel, then purify the received qubits.
//!
//! The receiver holds `N` copies of `ρ_B = c1 |ψ⟩⟨ψ| + c0 |ψ̄⟩⟨ψ̄|` and projects
//! them onto total-spin sectors. Sector `J` leaves `M = 2J` useful qubits (the
//! remaining `(N − M)/2` pairs are singlets and are discarded) and occurs with
//!
//! ```text
//! p_M = d_M (c0 c1)^((N−M)/2) (c1^(M+1) − c0^(M+1)) / (c1 − c0)
//! ```
//!
//! where `d_M = C(N, (N−M)/2) − C(N, (N−M)/2 − 1)` counts the sector copies.
//! One qubit of the `M`-qubit output has fidelity `f_M` with `|ψ⟩`.
//!
//! Both ratio forms are `0/0` at `λ₀ = 1/4` (`c1 = c0`); they are evaluated as
//! finite geometric sums in `r = c0/c1`, which are exact there as well.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::channel::MixtureCoefficients;
use crate::combin::{binomial_exact, ln_binomial, EXACT_LIMIT};
use crate::qmath::{
    bloch_to_ket, embed, fidelity_pure, gates, orthogonal_ket, partial_trace, tensor_power,
    BlochAngles, ComplexMatrix, DensityOperator, WernerParam, C64,
};
use crate::quadrature::sphere_rule;
use crate::{Error, Result};

/// Largest register the total-spin oracle builds densely.
pub const MAX_ORACLE_QUBITS: usize = 8;
/// Largest output size accepted by the quadrature oracle.
pub const MAX_QUADRATURE_QUBITS: usize = 4;
/// Default Gauss–Legendre (and azimuthal) node count of the quadrature oracle.
pub const DEFAULT_QUADRATURE_NODES: usize = 64;
pub const MIN_QUADRATURE_NODES: usize = 32;
/// Largest number of copies for the closed forms.
pub const MAX_COPIES: usize = 4096;
/// Relative tolerance for grouping degenerate `S²` eigenvalues.
pub const SPIN_GROUP_TOL: f64 = 1e-8;

/// `c1 = (1 + 2λ₀)/3`, `c0 = 2(1 − λ₀)/3`.
pub fn mixture_coefficients(lam0: WernerParam) -> MixtureCoefficients {
    MixtureCoefficients::from_lambda(lam0)
}

fn check_sector(n: usize, m: usize) -> Result<()> {
    if n == 0 || m > n || !(n - m).is_multiple_of(2) {
        return Err(Error::input(alloc::format!(
            "M = {m} is not a spin sector of N = {n} qubits"
        )));
    }
    Ok(())
}

/// Number of copies of the spin-`M/2` irrep in `N` spin-1/2 particles.
pub fn multiplicity(n: usize, m: usize) -> Result<u128> {
    check_sector(n, m)?;
    if m == n {
        return Ok(1);
    }
    let k = ((n - m) / 2) as u64;
    let n = n as u64;
    let overflow = || Error::Resource {
        requested: n as usize,
        limit: 120,
    };
    let hi = binomial_exact(n, k).ok_or_else(overflow)?;
    let lo = binomial_exact(n, k - 1).ok_or_else(overflow)?;
    Ok(hi - lo)
}

/// `ln d_M` via `d_M = C(N, k) (M + 1)/(N − k + 1)`.
fn ln_multiplicity(n: usize, m: usize) -> f64 {
    let k = (n - m) / 2;
    ln_binomial(n as u64, k as u64) + libm::log((m + 1) as f64 / (n - k + 1) as f64)
}

/// `(c1^(M+1) − c0^(M+1))/(c1 − c0) = Σ_{i=0}^{M} c1^i c0^(M−i)`, returned as
/// `(ln scale, sum)` with `scale = max(c1, c0)^M` and `sum = Σ r^t`, `r ≤ 1`.
fn geometric(coeffs: MixtureCoefficients, m: usize) -> (f64, f64) {
    let (big, small) = if coeffs.c1 >= coeffs.c0 {
        (coeffs.c1, coeffs.c0)
    } else {
        (coeffs.c0, coeffs.c1)
    };
    let r = small / big;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..=m {
        sum += term;
        term *= r;
    }
    (m as f64 * libm::log(big), sum)
}

/// Sector probabilities `M ↦ p_M` for `N` received copies.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub n: usize,
    pub lambda0: WernerParam,
    pub probs: BTreeMap<usize, f64>,
}

impl OutcomeDistribution {
    /// `N, N − 2, …` down to 1 or 0.
    pub fn sectors(n: usize) -> impl Iterator<Item = usize> {
        (n % 2..=n).step_by(2)
    }

    pub fn get(&self, m: usize) -> Option<f64> {
        self.probs.get(&m).copied()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Largest absolute difference over the union of sectors.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|m| (self.get(*m).unwrap_or(0.0) - other.get(*m).unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }
}

fn sector_probability(n: usize, m: usize, coeffs: MixtureCoefficients) -> f64 {
    let k = (n - m) / 2;
    let pair = coeffs.c0 * coeffs.c1;
    let (ln_scale, sum) = geometric(coeffs, m);
    if n as u64 <= EXACT_LIMIT {
        let d = multiplicity(n, m).expect("valid sector") as f64;
        d * libm::pow(pair, k as f64) * libm::exp(ln_scale) * sum
    } else if pair == 0.0 && k > 0 {
        0.0
    } else {
        let ln_pair = if k == 0 { 0.0 } else { k as f64 * libm::log(pair) };
        libm::exp(ln_multiplicity(n, m) + ln_pair + ln_scale) * sum
    }
}

/// Closed-form sector probabilities.
pub fn outcome_distribution(n: usize, lam0: WernerParam) -> Result<OutcomeDistribution> {
    if n == 0 {
        return Err(Error::input("need at least one copy"));
    }
    if n > MAX_COPIES {
        return Err(Error::Resource {
            requested: n,
            limit: MAX_COPIES,
        });
    }
    let coeffs = mixture_coefficients(lam0);
    let probs = OutcomeDistribution::sectors(n)
        .map(|m| (m, sector_probability(n, m, coeffs)))
        .collect();
    Ok(OutcomeDistribution {
        n,
        lambda0: lam0,
        probs,
    })
}

/// Fidelity with `|ψ⟩` of one qubit of the `M`-qubit purified output; 1/2 for `M = 0`.
///
/// Evaluated as `(1/M) Σ_{i<M} (M − i) r^i / Σ_{i≤M} r^i` with `r = c0/c1`,
/// which equals the ratio form for `c1 ≠ c0` and its limit 1/2 at `c1 = c0`.
pub fn single_qubit_fidelity(m: usize, lam0: WernerParam) -> f64 {
    if m == 0 {
        return 0.5;
    }
    let coeffs = mixture_coefficients(lam0);
    let r = coeffs.c0 / coeffs.c1;
    let mut power = 1.0;
    let mut numer = 0.0;
    let mut denom = 0.0;
    for i in 0..=m {
        numer += (m - i) as f64 * power;
        denom += power;
        power *= r;
    }
    numer / (m as f64 * denom)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QubitPurResult {
    pub expected_fidelity: f64,
    pub distribution: OutcomeDistribution,
    pub per_m_fidelity: BTreeMap<usize, f64>,
}

/// `Σ_M p_M f_M` over the sectors of `N` copies.
pub fn average_fidelity(n: usize, lam0: WernerParam) -> Result<QubitPurResult> {
    let lam0 = lam0.require_protocol()?;
    let distribution = outcome_distribution(n, lam0)?;
    let per_m_fidelity: BTreeMap<usize, f64> = distribution
        .probs
        .keys()
        .map(|&m| (m, single_qubit_fidelity(m, lam0)))
        .collect();
    let expected_fidelity = distribution
        .probs
        .iter()
        .map(|(m, p)| p * per_m_fidelity[m])
        .sum();
    Ok(QubitPurResult {
        expected_fidelity,
        distribution,
        per_m_fidelity,
    })
}

/// Eigenspaces of the total spin `S² = (½ Σ σ⃗_i)²` on `n` qubits, grouped by `M = 2J`.
#[derive(Clone, Debug)]
pub struct SpinSectors {
    n: usize,
    /// Orthonormal real eigenvectors of each sector.
    sectors: BTreeMap<usize, Vec<Vec<f64>>>,
}

impl SpinSectors {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("need at least one qubit"));
        }
        if n > MAX_ORACLE_QUBITS {
            return Err(Error::Resource {
                requested: 1 << n,
                limit: 1 << MAX_ORACLE_QUBITS,
            });
        }
        let s2 = total_spin_squared(n)?;
        let dim = s2.dim();
        if s2.entries().iter().any(|z| z.im.abs() > 1e-12) {
            return Err(Error::input("S² is expected to be real in the computational basis"));
        }
        let real = nalgebra::DMatrix::from_fn(dim, dim, |r, c| s2[(r, c)].re);
        let eig = nalgebra::SymmetricEigen::new(real);

        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut sectors: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
        let mut group_value = f64::NAN;
        let mut group_m = 0;
        for idx in order {
            let value = eig.eigenvalues[idx];
            if group_value.is_nan() || (value - group_value).abs() > SPIN_GROUP_TOL * group_value.abs().max(1.0) {
                group_value = value;
                // S² = J(J + 1)  ⇒  2J = sqrt(1 + 4 S²) − 1
                let two_j = libm::sqrt(1.0 + 4.0 * value.max(0.0)) - 1.0;
                group_m = libm::round(two_j) as usize;
                if (two_j - group_m as f64).abs() > 1e-6 || check_sector(n, group_m).is_err() {
                    return Err(Error::input(alloc::format!(
                        "S² eigenvalue {value} is not of the form J(J+1) for {n} qubits"
                    )));
                }
            }
            sectors
                .entry(group_m)
                .or_default()
                .push(eig.eigenvectors.column(idx).iter().copied().collect());
        }
        Ok(Self { n, sectors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the eigenspace belonging to `M`.
    pub fn dimension(&self, m: usize) -> usize {
        self.sectors.get(&m).map_or(0, Vec::len)
    }

    /// `Tr(P_M ρ)` for every sector.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<BTreeMap<usize, f64>> {
        if rho.dim() != 1 << self.n {
            return Err(Error::input("state does not match the register size"));
        }
        let m = rho.matrix();
        Ok(self
            .sectors
            .iter()
            .map(|(&sector, vectors)| {
                let p = vectors
                    .iter()
                    .map(|v| {
                        let ket: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
                        m.expectation(&ket).re
                    })
                    .sum();
                (sector, p)
            })
            .collect())
    }
}

/// Dense `S_x² + S_y² + S_z²` for `n` spin-1/2 particles.
pub fn total_spin_squared(n: usize) -> Result<ComplexMatrix> {
    let dim = 1usize << n;
    let mut s2 = ComplexMatrix::zeros(dim);
    for pauli in [gates::pauli_x(), gates::pauli_y(), gates::pauli_z()] {
        let mut component = ComplexMatrix::zeros(dim);
        for q in 0..n {
            component.add_scaled(&embed(&pauli, &[q], n)?, 0.5);
        }
        s2.add_scaled(&(&component * &component), 1.0);
    }
    Ok(s2)
}

/// Sector probabilities from explicit total-spin projectors on `ρ_B^{⊗n}`, input `|0⟩`.
pub fn spin_projector_oracle(n: usize, lam0: WernerParam) -> Result<OutcomeDistribution> {
    spin_projector_oracle_for_state(n, lam0, BlochAngles::NORTH)
}

/// As [`spin_projector_oracle`] for an arbitrary input state.
pub fn spin_projector_oracle_for_state(
    n: usize,
    lam0: WernerParam,
    angles: BlochAngles,
) -> Result<OutcomeDistribution> {
    let sectors = SpinSectors::new(n)?;
    let rho = tensor_power(&mixture_coefficients(lam0).state(angles), n)?;
    Ok(OutcomeDistribution {
        n,
        lambda0: lam0,
        probs: sectors.probabilities(&rho)?,
    })
}

/// Purified `M`-qubit state obtained by integrating the sphere representation
/// `(M+1)(c1 − c0)/(c1^(M+1) − c0^(M+1)) ∫ dΩ'/4π (|Ψ⟩⟨Ψ|)^{⊗M}` with
/// `|Ψ(θ', φ')⟩ = √c1 cos(θ'/2)|ψ⟩ + √c0 sin(θ'/2) e^{iφ'}|ψ̄⟩`.
pub fn purified_state_quadrature(
    m: usize,
    lam0: WernerParam,
    nodes: usize,
    angles: BlochAngles,
) -> Result<DensityOperator> {
    if m == 0 || m > MAX_QUADRATURE_QUBITS {
        return Err(Error::input(alloc::format!(
            "quadrature oracle supports 1 <= M <= {MAX_QUADRATURE_QUBITS}, got {m}"
        )));
    }
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::input(alloc::format!(
            "quadrature oracle needs at least {MIN_QUADRATURE_NODES} nodes"
        )));
    }
    let MixtureCoefficients { c1, c0 } = mixture_coefficients(lam0);
    let psi = bloch_to_ket(angles);
    let psi_bar = orthogonal_ket(angles);
    let dim = 1usize << m;
    let mut acc = ComplexMatrix::zeros(dim);
    for node in sphere_rule(nodes, nodes)? {
        let a = C64::new(libm::sqrt(c1 * (1.0 + node.cos_theta) / 2.0), 0.0);
        let b = C64::from_polar(libm::sqrt(c0 * (1.0 - node.cos_theta) / 2.0), node.phi);
        let single = [a * psi[0] + b * psi_bar[0], a * psi[1] + b * psi_bar[1]];
        let mut ket = alloc::vec![C64::new(1.0, 0.0)];
        for _ in 0..m {
            ket = ket.iter().flat_map(|x| [x * single[0], x * single[1]]).collect();
        }
        acc.add_scaled(&ComplexMatrix::outer(&ket), node.weight);
    }
    let mf = m as f64;
    let norm = if (c1 - c0).abs() > 1e-12 {
        (mf + 1.0) * (c1 - c0) / (libm::pow(c1, mf + 1.0) - libm::pow(c0, mf + 1.0))
    } else {
        1.0 / libm::pow(c1, mf)
    };
    Ok(DensityOperator::from_matrix_unchecked(acc.scale_real(norm)))
}

/// Fidelity of the first qubit of the quadrature-built purified state, input `|0⟩`.
pub fn reduced_state_quadrature_oracle(m: usize, lam0: WernerParam, nodes: usize) -> Result<f64> {
    reduced_state_quadrature_oracle_for_state(m, lam0, nodes, BlochAngles::NORTH)
}

pub fn reduced_state_quadrature_oracle_for_state(
    m: usize,
    lam0: WernerParam,
    nodes: usize,
    angles: BlochAngles,
) -> Result<f64> {
    let rho = purified_state_quadrature(m, lam0, nodes, angles)?;
    let reduced = partial_trace(&rho, &[0])?;
    fidelity_pure(&bloch_to_ket(angles), &reduced)
}
