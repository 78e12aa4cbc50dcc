//! Single-qubit density matrices, amplitude-damping and Pauli channels, and
//! sweeps of the best attainable QFI under noise.

use crate::error::{check_unit_interval, Error, Result};
use crate::exec::Exec;
use crate::hamiltonians::ModelKind;
use crate::linalg::{CMatrix, C64};
use crate::qfi::{self, Family};

/// Tolerance used when accepting a matrix as a density matrix.
pub const STATE_TOL: f64 = 1e-9;

/// 2×2 Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates `m` to within [`STATE_TOL`] and stores its Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: m.rows().max(m.cols()),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonphysicalState("non-finite entry".into()));
        }
        let herm_err = m.max_abs_diff(&m.dagger());
        if herm_err > STATE_TOL {
            return Err(Error::NonphysicalState(format!(
                "not Hermitian (deviation {herm_err:e})"
            )));
        }
        let m = (&m + &m.dagger()).scale_real(0.5);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::NonphysicalState(format!("trace {tr}")));
        }
        let rho = Self { m };
        let low = rho.min_eigenvalue();
        if low < -STATE_TOL {
            return Err(Error::NonphysicalState(format!("negative eigenvalue {low:e}")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(n2 > 0.0) {
            return Err(Error::NonphysicalState("zero state vector".into()));
        }
        let mut m = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = psi[i] * psi[j].conj() / n2;
            }
        }
        Self::new(m)
    }

    /// `(I + r·σ)/2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let m = CMatrix::mat2(
            C64::from((1.0 + r[2]) / 2.0),
            C64::new(r[0], -r[1]) / 2.0,
            C64::new(r[0], r[1]) / 2.0,
            C64::from((1.0 - r[2]) / 2.0),
        );
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn bloch(&self) -> [f64; 3] {
        let off = self.m[(0, 1)];
        [2.0 * off.re, -2.0 * off.im, (self.m[(0, 0)] - self.m[(1, 1)]).re]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let r = self.bloch();
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        (self.m.trace().re - len) / 2.0
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }
}

/// A single-qubit channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseChannel {
    /// Decay `|1⟩ → |0⟩` with probability `b`.
    AmplitudeDamping { b: f64 },
    /// `X`, `Y`, `Z` errors with probabilities `p1`, `p2`, `p3`.
    Pauli { p1: f64, p2: f64, p3: f64 },
}

impl NoiseChannel {
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match *self {
            NoiseChannel::AmplitudeDamping { b } => amplitude_damping(rho, b),
            NoiseChannel::Pauli { p1, p2, p3 } => pauli_channel(rho, p1, p2, p3),
        }
    }
}

/// `[[ρ₀₀ + bρ₁₁, √(1−b)ρ₀₁], [√(1−b)ρ₁₀, (1−b)ρ₁₁]]`.
pub fn amplitude_damping(rho: &DensityMatrix, b: f64) -> Result<DensityMatrix> {
    check_unit_interval("b", b)?;
    let r = rho.matrix();
    let k = (1.0 - b).sqrt();
    let p1 = r[(1, 1)] * (1.0 - b);
    // Population of |0⟩ written as 1 − p1 so that b = 1 lands exactly on |0⟩⟨0|.
    DensityMatrix::new(CMatrix::mat2(
        C64::from(1.0) - p1,
        r[(0, 1)] * k,
        r[(1, 0)] * k,
        p1,
    ))
}

/// `(1−p)ρ + p1·XρX + p2·YρY + p3·ZρZ` with `p = p1 + p2 + p3`.
pub fn pauli_channel(rho: &DensityMatrix, p1: f64, p2: f64, p3: f64) -> Result<DensityMatrix> {
    for (what, v) in [("p1", p1), ("p2", p2), ("p3", p3)] {
        check_unit_interval(what, v)?;
    }
    let p = p1 + p2 + p3;
    if p > 1.0 + 1e-12 {
        return Err(Error::Domain {
            what: "p1 + p2 + p3",
            value: p,
            allowed: "<= 1",
        });
    }
    if p == 0.0 {
        return Ok(rho.clone());
    }
    // Each Pauli flips the two Bloch components orthogonal to its axis, so the
    // channel scales r componentwise. This keeps exact zeros exact (p = 3/4
    // with equal weights lands on I/2).
    let r = rho.bloch();
    let shrink = [
        1.0 - 2.0 * (p2 + p3),
        1.0 - 2.0 * (p1 + p3),
        1.0 - 2.0 * (p1 + p2),
    ];
    DensityMatrix::from_bloch([r[0] * shrink[0], r[1] * shrink[1], r[2] * shrink[2]])
}

/// One-parameter channel families swept by [`noise_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelFamily {
    AmplitudeDamping,
    PauliX,
    PauliY,
    PauliZ,
    /// `p1 = p2 = p3 = p/3`.
    PauliEqual,
}

impl ChannelFamily {
    pub fn channel(&self, p: f64) -> NoiseChannel {
        match self {
            ChannelFamily::AmplitudeDamping => NoiseChannel::AmplitudeDamping { b: p },
            ChannelFamily::PauliX => NoiseChannel::Pauli { p1: p, p2: 0.0, p3: 0.0 },
            ChannelFamily::PauliY => NoiseChannel::Pauli { p1: 0.0, p2: p, p3: 0.0 },
            ChannelFamily::PauliZ => NoiseChannel::Pauli { p1: 0.0, p2: 0.0, p3: p },
            ChannelFamily::PauliEqual => NoiseChannel::Pauli {
                p1: p / 3.0,
                p2: p / 3.0,
                p3: p / 3.0,
            },
        }
    }
}

/// Which side(s) of the centre a [`GammaGrid`] covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    Below,
    Above,
    Both,
}

/// Points `center ± δ` with `δ` log-spaced in `[min_offset, max_offset]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    pub center: f64,
    pub sides: Sides,
    pub min_offset: f64,
    pub max_offset: f64,
    pub per_side: usize,
}

impl GammaGrid {
    /// Grid around the EP of `kind`, 40 offsets per side from 1e-4 to 1e-1.
    ///
    /// NH1 is only sampled above its EP at γ = 0.5; below it the `+` state
    /// is real and the Pauli-X/Y roles swap. NH2 is sampled on both sides of
    /// γ = 0 and NH3 on both sides of γ = 0.05.
    pub fn around_ep(kind: ModelKind) -> Self {
        let (center, sides) = match kind {
            ModelKind::Nh1 => (0.5, Sides::Above),
            ModelKind::Nh2 { .. } => (0.0, Sides::Both),
            ModelKind::Nh3 => (0.05, Sides::Both),
        };
        Self {
            center,
            sides,
            min_offset: 1e-4,
            max_offset: 1e-1,
            per_side: 40,
        }
    }

    pub fn offsets(&self) -> Vec<f64> {
        logspace(self.min_offset, self.max_offset, self.per_side)
    }

    /// Grid points in ascending order.
    pub fn points(&self) -> Vec<f64> {
        let offs = self.offsets();
        let below = offs.iter().rev().map(|o| self.center - o);
        let above = offs.iter().map(|o| self.center + o);
        match self.sides {
            Sides::Below => below.collect(),
            Sides::Above => above.collect(),
            Sides::Both => below.chain(above).collect(),
        }
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// One row of a noise sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePoint {
    pub noise_param: f64,
    /// Natural log of the largest QFI over the γ grid; `-inf` when the QFI
    /// vanishes everywhere.
    pub max_log_qfi: f64,
    pub argmax_gamma: f64,
    /// γ values whose evaluation failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

/// `|φ₊(γ)⟩⟨φ₊(γ)|/⟨φ₊|φ₊⟩` for the `+` right eigenvector.
pub fn eigenstate_projector<F: Family + ?Sized>(
    family: &F,
    gamma: f64,
    tol_defective: f64,
) -> Result<DensityMatrix> {
    let eig = qfi::eig_guarded(family, gamma, tol_defective)?;
    DensityMatrix::pure(&eig.right[0])
}

/// Step used for the Bloch-vector derivative in noise sweeps.
pub const SWEEP_STEP: f64 = 1e-6;

/// For every noise parameter: prepare the `+` eigenstate along the γ grid,
/// apply the channel, and take the largest mixed-state QFI.
///
/// Points that fail are recorded in [`NoisePoint::failures`]; the sweep only
/// fails if every γ point fails for some noise parameter.
pub fn noise_sweep(
    kind: ModelKind,
    family: ChannelFamily,
    noise_grid: &[f64],
    gamma_grid: &GammaGrid,
    exec: Exec,
) -> Result<Vec<NoisePoint>> {
    let gammas = gamma_grid.points();
    let ng = gammas.len();
    let tol = crate::linalg::DEFAULT_TOL_DEFECTIVE;
    let values = exec.map(noise_grid.len() * ng, |k| {
        let (i, j) = (k / ng, k % ng);
        let channel = family.channel(noise_grid[i]);
        let rho_family = |g: f64| channel.apply(&eigenstate_projector(&kind, g, tol)?);
        qfi::qfi_mixed(&rho_family, gammas[j], SWEEP_STEP).map(|s| s.qfi_numeric)
    });

    let mut out = Vec::with_capacity(noise_grid.len());
    for (i, &p) in noise_grid.iter().enumerate() {
        let mut best: Option<(f64, f64)> = None;
        let mut failures = Vec::new();
        let mut first_err = None;
        for (j, v) in values[i * ng..(i + 1) * ng].iter().enumerate() {
            match v {
                Ok(q) => {
                    if best.is_none_or(|(b, _)| *q > b) {
                        best = Some((*q, gammas[j]));
                    }
                }
                Err(e) => {
                    failures.push((gammas[j], e.to_string()));
                    first_err.get_or_insert_with(|| e.clone());
                }
            }
        }
        let (q, g) = match best {
            Some(b) => b,
            None => return Err(first_err.unwrap_or(Error::Unsupported("empty gamma grid".into()))),
        };
        out.push(NoisePoint {
            noise_param: p,
            max_log_qfi: q.ln(),
            argmax_gamma: g,
            failures,
        });
    }
    Ok(out)
}
