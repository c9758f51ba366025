//! Teleportation through a Werner-state ebit.
//!
//! The receiver ends up with `c1 |ψ⟩⟨ψ| + c0 |ψ̄⟩⟨ψ̄|` where
//! `c1 = (1 + 2λ)/3` and `c0 = 2(1 − λ)/3`, independent of the input state.
//! [`teleport_oracle`] reproduces this by running the full three-qubit protocol.

use alloc::vec::Vec;

use crate::qmath::{
    apply_unitary, bell_state, bloch_to_ket, embed, gates, measure_projective, orthogonal_ket,
    partial_trace, tensor, werner_density, BellLabel, BlochAngles, ComplexMatrix,
    DensityOperator, WernerParam,
};
use crate::Result;

/// Weights of `|ψ⟩⟨ψ|` (`c1`) and `|ψ̄⟩⟨ψ̄|` (`c0`) in the teleported state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureCoefficients {
    pub c1: f64,
    pub c0: f64,
}

impl MixtureCoefficients {
    /// Valid for any `λ ∈ [0, 1]`; only `λ ≥ 1/4` keeps `c1 ≥ c0`.
    pub fn from_lambda(lam: WernerParam) -> Self {
        let l = lam.value();
        Self {
            c1: (1.0 + 2.0 * l) / 3.0,
            c0: 2.0 * (1.0 - l) / 3.0,
        }
    }

    /// The mixed qubit `c1 |ψ⟩⟨ψ| + c0 |ψ̄⟩⟨ψ̄|`.
    pub fn state(&self, angles: BlochAngles) -> DensityOperator {
        let mut m = ComplexMatrix::outer(&bloch_to_ket(angles)).scale_real(self.c1);
        m.add_scaled(&ComplexMatrix::outer(&orthogonal_ket(angles)), self.c0);
        DensityOperator::from_matrix_unchecked(m)
    }
}

/// Closed-form channel action for a protocol-range Werner parameter.
pub fn teleport_map(lam: WernerParam) -> Result<MixtureCoefficients> {
    Ok(MixtureCoefficients::from_lambda(lam.require_protocol()?))
}

/// `(2λ + 1)/3`, also used for the no-ebit fallback at `λ = 1/4`.
pub fn single_shot_fidelity(lam: WernerParam) -> f64 {
    (2.0 * lam.value() + 1.0) / 3.0
}

/// Pauli correction applied by the receiver after each Bell outcome.
pub fn correction(outcome: BellLabel) -> ComplexMatrix {
    match outcome {
        BellLabel::PhiPlus => ComplexMatrix::identity(2),
        BellLabel::PsiPlus => gates::pauli_x(),
        BellLabel::PhiMinus => gates::pauli_z(),
        BellLabel::PsiMinus => &gates::pauli_x() * &gates::pauli_z(),
    }
}

/// Result of a simulated teleportation.
#[derive(Clone, Debug)]
pub struct TeleportRun {
    /// Receiver's state averaged over the measurement record.
    pub output: DensityOperator,
    /// Probability of each Bell outcome, in [`BellLabel::ALL`] order.
    pub outcome_probabilities: [f64; 4],
}

/// Simulates teleportation of `|ψ⟩` on qubit 0 through the ebit on qubits 1 (sender)
/// and 2 (receiver): Bell measurement of qubits 0 and 1, Pauli correction of qubit 2.
pub fn teleport_simulation(lam: WernerParam, psi: BlochAngles) -> Result<TeleportRun> {
    let input = DensityOperator::from_pure(&bloch_to_ket(psi))?;
    let joint = tensor(&input, &werner_density(lam))?;
    let projectors = BellLabel::ALL
        .iter()
        .map(|&l| embed(&ComplexMatrix::outer(&bell_state(l)), &[0, 1], 3))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = measure_projective(&joint, &projectors)?;

    let mut output = ComplexMatrix::zeros(2);
    let mut outcome_probabilities = [0.0; 4];
    for ((label, outcome), slot) in BellLabel::ALL
        .iter()
        .zip(&outcomes)
        .zip(outcome_probabilities.iter_mut())
    {
        *slot = outcome.probability;
        if let Some(post) = &outcome.state {
            let corrected = apply_unitary(post, &correction(*label), &[2])?;
            let bob = partial_trace(&corrected, &[2])?;
            output.add_scaled(bob.matrix(), outcome.probability);
        }
    }
    Ok(TeleportRun {
        output: DensityOperator::from_matrix_unchecked(output),
        outcome_probabilities,
    })
}

/// Receiver's 2×2 state from the full density-matrix simulation.
pub fn teleport_oracle(lam: WernerParam, psi: BlochAngles) -> Result<DensityOperator> {
    teleport_simulation(lam, psi).map(|run| run.output)
}
