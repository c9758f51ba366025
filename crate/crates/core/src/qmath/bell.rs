use alloc::format;
use core::f64::consts::FRAC_1_SQRT_2;
use core::str::FromStr;

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::state::DensityOperator;
use crate::{Error, Result};

/// The four Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PhiPlus,
    PsiPlus,
    PhiMinus,
    PsiMinus,
}

impl BellLabel {
    /// Same order as the fields of [`BellDiagonal`].
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi+" => Ok(BellLabel::PhiPlus),
            "psi+" => Ok(BellLabel::PsiPlus),
            "phi-" | "phi−" => Ok(BellLabel::PhiMinus),
            "psi-" | "psi−" => Ok(BellLabel::PsiMinus),
            other => Err(Error::input(format!("unknown Bell label {other:?}"))),
        }
    }
}

/// Bell vector in the `|00⟩, |01⟩, |10⟩, |11⟩` basis.
pub fn bell_state(label: BellLabel) -> [C64; 4] {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    match label {
        BellLabel::PhiPlus => [h, ZERO, ZERO, h],
        BellLabel::PhiMinus => [h, ZERO, ZERO, -h],
        BellLabel::PsiPlus => [ZERO, h, h, ZERO],
        BellLabel::PsiMinus => [ZERO, h, -h, ZERO],
    }
}

/// Werner parameter `λ ∈ [0, 1]`: the `|φ+⟩` weight of a Werner state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct WernerParam(f64);

impl WernerParam {
    /// Below this value teleportation through the ebit is useless.
    pub const CRITICAL: f64 = 0.25;

    pub fn new(lambda: f64) -> Result<Self> {
        Self::in_range(lambda, 0.0, 1.0)
    }

    /// Accepts only the teleportation-useful range `[1/4, 1]`.
    pub fn protocol(lambda: f64) -> Result<Self> {
        Self::in_range(lambda, Self::CRITICAL, 1.0)
    }

    fn in_range(lambda: f64, min: f64, max: f64) -> Result<Self> {
        if (min..=max).contains(&lambda) {
            Ok(Self(lambda))
        } else {
            Err(Error::Domain {
                value: lambda,
                min,
                max,
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Re-checks the protocol range on an existing parameter.
    pub fn require_protocol(self) -> Result<Self> {
        Self::protocol(self.0)
    }
}

/// Weights of a Bell-diagonal two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellDiagonal {
    pub phi_plus: f64,
    pub psi_plus: f64,
    pub phi_minus: f64,
    pub psi_minus: f64,
}

const WEIGHT_TOL: f64 = 1e-12;

impl BellDiagonal {
    pub fn new(phi_plus: f64, psi_plus: f64, phi_minus: f64, psi_minus: f64) -> Result<Self> {
        let bd = Self {
            phi_plus,
            psi_plus,
            phi_minus,
            psi_minus,
        };
        let ws = bd.weights();
        if ws.iter().any(|w| !(-WEIGHT_TOL..=1.0 + WEIGHT_TOL).contains(w)) {
            return Err(Error::input("Bell weights must lie in [0, 1]"));
        }
        if (ws.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::input("Bell weights must sum to one"));
        }
        Ok(bd)
    }

    pub fn werner(lam: WernerParam) -> Self {
        let rest = (1.0 - lam.0) / 3.0;
        Self {
            phi_plus: lam.0,
            psi_plus: rest,
            phi_minus: rest,
            psi_minus: rest,
        }
    }

    /// Weights in [`BellLabel::ALL`] order.
    pub fn weights(&self) -> [f64; 4] {
        [self.phi_plus, self.psi_plus, self.phi_minus, self.psi_minus]
    }

    pub fn weight(&self, label: BellLabel) -> f64 {
        match label {
            BellLabel::PhiPlus => self.phi_plus,
            BellLabel::PsiPlus => self.psi_plus,
            BellLabel::PhiMinus => self.phi_minus,
            BellLabel::PsiMinus => self.psi_minus,
        }
    }

    /// Diagonal of a two-qubit state in the Bell basis (`⟨B|ρ|B⟩`).
    /// Off-diagonal Bell coherences are ignored.
    pub fn from_density(rho: &DensityOperator) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::input("Bell weights need a two-qubit state"));
        }
        let w = |l| rho.matrix().expectation(&bell_state(l)).re;
        Self::new(
            w(BellLabel::PhiPlus),
            w(BellLabel::PsiPlus),
            w(BellLabel::PhiMinus),
            w(BellLabel::PsiMinus),
        )
    }

    pub fn to_density(&self) -> DensityOperator {
        let mut m = ComplexMatrix::zeros(4);
        for label in BellLabel::ALL {
            m.add_scaled(&ComplexMatrix::outer(&bell_state(label)), self.weight(label));
        }
        DensityOperator::from_matrix_unchecked(m)
    }
}

/// `λ|φ+⟩⟨φ+| + (1−λ)/3 (|ψ+⟩⟨ψ+| + |φ−⟩⟨φ−| + |ψ−⟩⟨ψ−|)`
pub fn werner_density(lam: WernerParam) -> DensityOperator {
    BellDiagonal::werner(lam).to_density()
}

/// Werner parameter reached by local random twirling: the `|φ+⟩` weight survives,
/// the other three are equalised.
pub fn twirl_to_werner(bd: &BellDiagonal) -> WernerParam {
    WernerParam(bd.phi_plus.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::state::{apply_unitary, partial_trace};
    use crate::qmath::gates;
    use crate::qmath::matrix::ONE;
    use proptest::prelude::*;

    fn inner(a: &[C64; 4], b: &[C64; 4]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        for a in BellLabel::ALL {
            for b in BellLabel::ALL {
                let expected = if a == b { ONE } else { ZERO };
                assert!((inner(&bell_state(a), &bell_state(b)) - expected).norm() < 1e-14);
            }
        }
        let h = FRAC_1_SQRT_2;
        let m = bell_state(BellLabel::PsiMinus);
        assert_eq!([m[0].re, m[1].re, m[2].re, m[3].re], [0.0, h, -h, 0.0]);
    }

    #[test]
    fn labels_parse() {
        assert_eq!("phi+".parse::<BellLabel>().unwrap(), BellLabel::PhiPlus);
        assert_eq!("psi−".parse::<BellLabel>().unwrap(), BellLabel::PsiMinus);
        assert!("chi+".parse::<BellLabel>().is_err());
    }

    #[test]
    fn werner_endpoints() {
        let pure = werner_density(WernerParam::new(1.0).unwrap());
        let phi = ComplexMatrix::outer(&bell_state(BellLabel::PhiPlus));
        assert!(pure.matrix().max_abs_diff(&phi) < 1e-15);
        let mixed = werner_density(WernerParam::new(0.25).unwrap());
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        let bd = BellDiagonal::from_density(&werner_density(WernerParam::new(0.7).unwrap())).unwrap();
        for (w, e) in bd.weights().iter().zip([0.7, 0.1, 0.1, 0.1]) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn werner_param_ranges() {
        assert!(WernerParam::new(1.2).is_err());
        assert!(WernerParam::new(f64::NAN).is_err());
        assert!(WernerParam::protocol(0.2).is_err());
        assert!(WernerParam::protocol(0.25).is_ok());
    }

    #[test]
    fn twirl_examples() {
        let bd = BellDiagonal::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(twirl_to_werner(&bd).value(), 1.0);
        let bd = BellDiagonal::new(0.25, 0.25, 0.25, 0.25).unwrap();
        assert_eq!(twirl_to_werner(&bd).value(), 0.25);
        assert!(BellDiagonal::new(0.5, 0.5, 0.5, -0.5).is_err());
    }

    #[test]
    fn werner_reduced_state_is_mixed() {
        let rho = werner_density(WernerParam::new(0.7).unwrap());
        let red = partial_trace(&rho, &[0]).unwrap();
        assert!(red.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let phi = werner_density(WernerParam::new(1.0).unwrap());
        for keep in [0, 1] {
            let red = partial_trace(&phi, &[keep]).unwrap();
            assert!(red.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        }
    }

    #[test]
    fn x_on_first_qubit_maps_phi_plus_to_psi_plus() {
        let phi = werner_density(WernerParam::new(1.0).unwrap());
        let out = apply_unitary(&phi, &gates::pauli_x(), &[0]).unwrap();
        let psi = ComplexMatrix::outer(&bell_state(BellLabel::PsiPlus));
        assert!(out.matrix().max_abs_diff(&psi) < 1e-15);
    }

    proptest! {
        #[test]
        fn werner_states_are_valid_and_bell_diagonal(lam in 0.0f64..=1.0) {
            let w = WernerParam::new(lam).unwrap();
            let rho = werner_density(w);
            prop_assert!(rho.validate().is_ok());
            let bd = BellDiagonal::from_density(&rho).unwrap();
            let rest = (1.0 - lam) / 3.0;
            for (got, want) in bd.weights().iter().zip([lam, rest, rest, rest]) {
                prop_assert!((got - want).abs() < 1e-12);
            }
            prop_assert_eq!(twirl_to_werner(&BellDiagonal::werner(w)).value(), lam);
        }
    }
}
