use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use super::matrix::{ComplexMatrix, C64, MAX_DIM, ONE, ZERO};
use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue tolerated before a matrix stops counting as PSD.
pub const EIGEN_FLOOR: f64 = -1e-9;
pub const UNITARY_TOL: f64 = 1e-12;

/// Pure qubit on the Bloch sphere, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

impl BlochAngles {
    /// Clamps `theta` into `[0, π]` and wraps `phi` into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::input("Bloch angles must be finite"));
        }
        let mut phi = libm::fmod(phi, TAU);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self {
            theta: theta.clamp(0.0, PI),
            phi,
        })
    }

    /// `|0⟩`
    pub const NORTH: Self = Self { theta: 0.0, phi: 0.0 };

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `cos(θ/2)|0⟩ + sin(θ/2) e^{iφ}|1⟩`
pub fn bloch_to_ket(angles: BlochAngles) -> [C64; 2] {
    let (s, c) = libm::sincos(angles.theta / 2.0);
    [C64::new(c, 0.0), C64::from_polar(s, angles.phi)]
}

/// `sin(θ/2)|0⟩ − cos(θ/2) e^{iφ}|1⟩`, orthogonal to [`bloch_to_ket`].
pub fn orthogonal_ket(angles: BlochAngles) -> [C64; 2] {
    let (s, c) = libm::sincos(angles.theta / 2.0);
    [C64::new(s, 0.0), -C64::from_polar(c, angles.phi)]
}

/// Hermitian, unit-trace, positive semidefinite matrix on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates all density-operator invariants, including the eigenvalue floor.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Trusted constructor for results of trace- and positivity-preserving maps.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.dim().is_power_of_two());
        Self { matrix }
    }

    pub fn from_pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::input(format!("state vector has squared norm {norm}")));
        }
        check_qubit_dim(ket.len())?;
        Ok(Self::from_matrix_unchecked(ComplexMatrix::outer(ket)))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        check_qubit_dim(dim)?;
        Ok(Self::from_matrix_unchecked(
            ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        ))
    }

    /// Convex combination `Σ w_k ρ_k`; the weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::input("empty mixture"))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::input("mixture weights must be a probability vector"));
        }
        let mut m = ComplexMatrix::zeros(first.1.dim());
        for (w, rho) in parts {
            if rho.dim() != m.dim() {
                return Err(Error::input("mixture components differ in dimension"));
            }
            m.add_scaled(rho.matrix(), *w);
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// Checks Hermiticity and unit trace at 1e-12 and the eigenvalue floor at −1e-9.
    pub fn validate(&self) -> Result<()> {
        check_qubit_dim(self.dim())?;
        let herm = self.matrix.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::input(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::input(format!("trace {tr} differs from one")));
        }
        let min = self.eigenvalues()[0];
        if min < EIGEN_FLOOR {
            return Err(Error::input(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Spectrum in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }
}

fn check_qubit_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::Resource {
            requested: dim,
            limit: MAX_DIM,
        });
    }
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::input(format!("dimension {dim} is not a qubit register")));
    }
    Ok(())
}

/// `a ⊗ b`, with `a` occupying the leading qubits.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::Resource {
            requested: dim,
            limit: MAX_DIM,
        });
    }
    Ok(DensityOperator::from_matrix_unchecked(a.matrix.kron(&b.matrix)))
}

/// `ρ^{⊗n}`
pub fn tensor_power(rho: &DensityOperator, n: usize) -> Result<DensityOperator> {
    if n == 0 {
        return Err(Error::input("tensor power needs at least one factor"));
    }
    let mut out = rho.clone();
    for _ in 1..n {
        out = tensor(&out, rho)?;
    }
    Ok(out)
}

#[inline]
fn bit(index: usize, qubit: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - 1 - qubit)) & 1
}

/// Gathers the bits of `index` at `qubits` into a compact index, first qubit most significant.
fn gather(index: usize, qubits: &[usize], n_qubits: usize) -> usize {
    qubits
        .iter()
        .fold(0, |acc, &q| (acc << 1) | bit(index, q, n_qubits))
}

fn check_qubit_set(qubits: &[usize], n_qubits: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::input("qubit set is empty"));
    }
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::input(format!("qubit {q} out of range for {n_qubits} qubits")));
        }
        if qubits[..i].contains(&q) {
            return Err(Error::input(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Lifts `op` acting on `targets` (in the given order) to the full `n_qubits` register.
pub fn embed(op: &ComplexMatrix, targets: &[usize], n_qubits: usize) -> Result<ComplexMatrix> {
    check_qubit_set(targets, n_qubits)?;
    if op.dim() != 1 << targets.len() {
        return Err(Error::input("operator size does not match the target count"));
    }
    let dim = 1usize << n_qubits;
    if dim > MAX_DIM {
        return Err(Error::Resource {
            requested: dim,
            limit: MAX_DIM,
        });
    }
    let rest_mask = (0..n_qubits)
        .filter(|q| !targets.contains(q))
        .fold(0usize, |m, q| m | (1 << (n_qubits - 1 - q)));
    let mut out = ComplexMatrix::zeros(dim);
    for r in 0..dim {
        let rs = gather(r, targets, n_qubits);
        for c in 0..dim {
            if r & rest_mask == c & rest_mask {
                out[(r, c)] = op[(rs, gather(c, targets, n_qubits))];
            }
        }
    }
    Ok(out)
}

/// Reduced state on the `keep` qubits, listed in ascending register order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let n = rho.n_qubits();
    check_qubit_set(keep, n)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(1 << kept.len());
    for r in 0..dim {
        let rt = gather(r, &traced, n);
        let rk = gather(r, &kept, n);
        for c in 0..dim {
            if gather(c, &traced, n) == rt {
                out[(rk, gather(c, &kept, n))] += rho.matrix[(r, c)];
            }
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(out))
}

/// `U ρ U†` with `u` acting on `targets`.
pub fn apply_unitary(
    rho: &DensityOperator,
    u: &ComplexMatrix,
    targets: &[usize],
) -> Result<DensityOperator> {
    if !u.is_unitary(UNITARY_TOL) {
        return Err(Error::input("operator is not unitary"));
    }
    let full = embed(u, targets, rho.n_qubits())?;
    let m = &(&full * &rho.matrix) * &full.adjoint();
    Ok(DensityOperator::from_matrix_unchecked(m))
}

/// One branch of a projective measurement.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub probability: f64,
    /// `P ρ P / p`, absent when the branch has (numerically) zero probability.
    pub state: Option<DensityOperator>,
}

const ZERO_BRANCH: f64 = 1e-14;

/// Projective measurement with full-register projectors summing to the identity.
pub fn measure_projective(
    rho: &DensityOperator,
    projectors: &[ComplexMatrix],
) -> Result<Vec<MeasurementOutcome>> {
    let dim = rho.dim();
    let mut sum = ComplexMatrix::zeros(dim);
    for p in projectors {
        if p.dim() != dim {
            return Err(Error::input("projector dimension mismatch"));
        }
        if (p * p).max_abs_diff(p) > HERMITIAN_TOL || !p.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::input("operator is not an orthogonal projector"));
        }
        sum.add_scaled(p, 1.0);
    }
    if sum.max_abs_diff(&ComplexMatrix::identity(dim)) > HERMITIAN_TOL {
        return Err(Error::input("projectors do not sum to the identity"));
    }
    Ok(projectors
        .iter()
        .map(|p| {
            let branch = &(p * &rho.matrix) * p;
            let probability = branch.trace().re.max(0.0);
            let state = (probability > ZERO_BRANCH).then(|| {
                DensityOperator::from_matrix_unchecked(branch.scale_real(1.0 / probability))
            });
            MeasurementOutcome { probability, state }
        })
        .collect())
}

/// Computational-basis projectors `|k⟩⟨k|` on the `qubits` subset, embedded in the register.
pub fn computational_projectors(qubits: &[usize], n_qubits: usize) -> Result<Vec<ComplexMatrix>> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|outcome| {
            let mut diag = alloc::vec![ZERO; 1 << k];
            diag[outcome] = ONE;
            embed(&ComplexMatrix::diagonal(&diag), qubits, n_qubits)
        })
        .collect()
}

/// `⟨ψ|ρ|ψ⟩`, clamped into `[0, 1]`.
pub fn fidelity_pure(psi: &[C64], rho: &DensityOperator) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::input(format!(
            "state of length {} against a {}-dimensional operator",
            psi.len(),
            rho.dim()
        )));
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::input("state vector is not normalised"));
    }
    Ok(rho.matrix.expectation(psi).re.clamp(0.0, 1.0))
}
