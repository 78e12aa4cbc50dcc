//! Ancilla dilation of a non-unitary single-qubit evolution.
//!
//! `exp(−iHt)` is split as `U Σ V†`, scaled so that its largest singular value
//! is one, and the remaining contraction `diag(1, m)` is realised as the
//! controlled rotation `CΣ = I ⊕ U(m)` on system ⊗ ancilla. Acting on
//! `|ξ⟩|0⟩`, the assembled unitary leaves `NUTE_N|ξ⟩` on the ancilla-0 branch.
//!
//! Two-qubit operators use the system ⊗ ancilla ordering throughout: basis
//! index `2·s + a` for system bit `s` and ancilla bit `a`.

use crate::error::{check_unit_interval, Error, Result};
use crate::linalg::{self, CMatrix, C64, ZERO};

/// Values of `m` within this distance outside `[0, 1]` are clamped.
const CLAMP_SLACK: f64 = 1e-12;

/// Embeds a single-system operator into system ⊗ ancilla.
pub fn on_system(op: &CMatrix) -> CMatrix {
    op.kron(&CMatrix::identity(2))
}

/// Real rotation `[[a, −√(1−a²)], [√(1−a²), a]]`.
pub fn gate_u(a: f64) -> Result<CMatrix> {
    check_unit_interval("a", a)?;
    let s = (1.0 - a * a).sqrt();
    Ok(CMatrix::real2(a, -s, s, a))
}

/// The ancilla operator paired with `Σ'` in `CΣ = Σ⊗I + Σ'⊗ZX`: `Z` applied
/// first, then `X`, i.e. the matrix `[[0, −1], [1, 0]]`.
pub fn zx() -> CMatrix {
    &CMatrix::pauli_x() * &CMatrix::pauli_z()
}

/// `Σ = diag(1, m)` and `Σ' = diag(0, √(1−m²))`.
pub fn sigma_pair(m: f64) -> Result<(CMatrix, CMatrix)> {
    check_unit_interval("m", m)?;
    let s = (1.0 - m * m).sqrt();
    Ok((CMatrix::real2(1.0, 0.0, 0.0, m), CMatrix::real2(0.0, 0.0, 0.0, s)))
}

/// `CΣ = U(1) ⊕ U(m)`: identity on the system-0 block and the rotation
/// [`gate_u`]`(m)` on the ancilla when the system is 1.
pub fn build_csigma(m: f64) -> Result<CMatrix> {
    let um = gate_u(m)?;
    let mut out = CMatrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            out[(2 + i, 2 + j)] = um[(i, j)];
        }
    }
    Ok(out)
}

fn clamp_m(m: f64) -> f64 {
    if (1.0..=1.0 + CLAMP_SLACK).contains(&m) {
        1.0
    } else if (-CLAMP_SLACK..=0.0).contains(&m) {
        0.0
    } else {
        m
    }
}

/// Divides `nute` by its largest singular value; returns `(nute_n, σ_max, m)`
/// where `m = σ₂/σ₁` is the smaller singular value of `nute_n`.
pub fn normalize_l2(nute: &CMatrix) -> Result<(CMatrix, f64, f64)> {
    let svd = linalg::svd_2x2(nute);
    let (s1, s2) = svd.sigma;
    if s1 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let m = clamp_m(s2 / s1);
    Ok((nute.scale_real(1.0 / s1), s1, m))
}

/// Gate sequence realising `exp(−iHt)/σ_max` on the ancilla-0 branch.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedCircuit {
    pub vdag_gate: CMatrix,
    pub csigma_gate: CMatrix,
    pub u_gate: CMatrix,
    pub sigma_max: f64,
    pub m: f64,
    pub source_hamiltonian: CMatrix,
    pub time: f64,
}

impl DilatedCircuit {
    /// The full 4×4 unitary `(U⊗I)·CΣ·(V†⊗I)`.
    pub fn assembled(&self) -> CMatrix {
        let right = &self.csigma_gate * &on_system(&self.vdag_gate);
        &on_system(&self.u_gate) * &right
    }

    /// `U Σ V†`, the evolution the ancilla-0 branch carries.
    pub fn normalized_evolution(&self) -> CMatrix {
        let sigma = CMatrix::real2(1.0, 0.0, 0.0, self.m);
        &(&self.u_gate * &sigma) * &self.vdag_gate
    }

    /// `U Σ' V†`, the evolution on the ancilla-1 branch.
    pub fn complementary_evolution(&self) -> CMatrix {
        let s = (1.0 - self.m * self.m).sqrt();
        let sigma_p = CMatrix::real2(0.0, 0.0, 0.0, s);
        &(&self.u_gate * &sigma_p) * &self.vdag_gate
    }
}

/// Dilates `exp(−i·h·t)` into a system ⊗ ancilla circuit.
pub fn dilate(h: &CMatrix, t: f64) -> Result<DilatedCircuit> {
    if h.rows() != 2 || h.cols() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: h.rows().max(h.cols()),
        });
    }
    let nute = linalg::matrix_exp_neg_i(h, t);
    let svd = linalg::svd_2x2(&nute);
    let (s1, s2) = svd.sigma;
    if s1 == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let m = clamp_m(s2 / s1);
    Ok(DilatedCircuit {
        vdag_gate: svd.vdag,
        csigma_gate: build_csigma(m)?,
        u_gate: svd.u,
        sigma_max: s1,
        m,
        source_hamiltonian: h.clone(),
        time: t,
    })
}

/// `|ψ⟩ ⊗ |0⟩` in the system ⊗ ancilla ordering.
pub fn with_ancilla_zero(psi: &[C64]) -> Vec<C64> {
    psi.iter().flat_map(|&z| [z, ZERO]).collect()
}
