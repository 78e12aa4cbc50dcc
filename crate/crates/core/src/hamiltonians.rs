//! The two-level models studied here: three one-parameter non-Hermitian
//! families with exceptional points and the effective transmon sub-system used
//! for Rabi sensing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ONE};

/// One-parameter family `γ ↦ H(γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// `[[0, ½+γ], [½−γ, 0]]`, defined for `γ ≥ 0`.
    Nh1,
    /// `[[(γ−iε)/2, g], [g, −(γ−iε)/2]]`.
    Nh2 { eps: f64, g: f64 },
    /// `[[1, sin 10πγ], [cos 10πγ, 1]]`.
    Nh3,
}

impl ModelKind {
    pub const NH2_DEFAULT: ModelKind = ModelKind::Nh2 { eps: 2.0, g: 1.0 };

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Nh1 => "nh1",
            ModelKind::Nh2 { .. } => "nh2",
            ModelKind::Nh3 => "nh3",
        }
    }

    /// `H(γ)`.
    pub fn at(&self, gamma: f64) -> Result<CMatrix> {
        match *self {
            ModelKind::Nh1 => build(&HamiltonianModel::Nh1 { gamma }),
            ModelKind::Nh2 { eps, g } => build(&HamiltonianModel::Nh2 { gamma, eps, g }),
            ModelKind::Nh3 => build(&HamiltonianModel::Nh3 { gamma }),
        }
    }

    /// `∂H/∂γ`, exact.
    pub fn derivative(&self, gamma: f64) -> CMatrix {
        match *self {
            ModelKind::Nh1 => CMatrix::real2(0.0, 1.0, -1.0, 0.0),
            ModelKind::Nh2 { .. } => CMatrix::real2(0.5, 0.0, 0.0, -0.5),
            ModelKind::Nh3 => {
                let w = 10.0 * PI;
                let x = w * gamma;
                CMatrix::real2(0.0, w * x.cos(), -w * x.sin(), 0.0)
            }
        }
    }
}

/// A concrete model with all parameters fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HamiltonianModel {
    Nh1 { gamma: f64 },
    Nh2 { gamma: f64, eps: f64, g: f64 },
    Nh3 { gamma: f64 },
    Transmon(Transmon),
}

/// The 2×2 Hamiltonian of `model`.
pub fn build(model: &HamiltonianModel) -> Result<CMatrix> {
    match *model {
        HamiltonianModel::Nh1 { gamma } => {
            if !(gamma >= 0.0) {
                return Err(Error::Domain {
                    what: "gamma",
                    value: gamma,
                    allowed: ">= 0",
                });
            }
            Ok(CMatrix::real2(0.0, 0.5 + gamma, 0.5 - gamma, 0.0))
        }
        HamiltonianModel::Nh2 { gamma, eps, g } => {
            let a = C64::new(gamma, -eps) * 0.5;
            Ok(CMatrix::mat2(a, g.into(), g.into(), -a))
        }
        HamiltonianModel::Nh3 { gamma } => {
            let x = 10.0 * PI * gamma;
            Ok(CMatrix::real2(1.0, x.sin(), x.cos(), 1.0))
        }
        HamiltonianModel::Transmon(t) => Ok(t.hamiltonian()),
    }
}

/// Exceptional points of a family. NH3 has infinitely many, so a search
/// range is required for it and ignored otherwise.
pub fn ep_locus(kind: ModelKind, range: Option<(f64, f64)>) -> Result<Vec<f64>> {
    match kind {
        ModelKind::Nh1 => Ok(vec![0.5]),
        ModelKind::Nh2 { eps, g } => {
            if (g - eps.abs() / 2.0).abs() <= 1e-12 * g.abs().max(1.0) {
                Ok(vec![0.0])
            } else {
                Ok(vec![])
            }
        }
        ModelKind::Nh3 => {
            let (lo, hi) = range.ok_or_else(|| {
                Error::Unsupported("nh3 has an infinite EP lattice; give a gamma range".into())
            })?;
            let first = (lo * 20.0 - 1e-9).ceil() as i64;
            let last = (hi * 20.0 + 1e-9).floor() as i64;
            Ok((first..=last).map(|a| a as f64 / 20.0).collect())
        }
    }
}

/// Closed-form QFI value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticQfi {
    Exact(f64),
    /// Leading small-γ behaviour only; the prefactor is not asserted.
    Asymptotic(f64),
}

impl AnalyticQfi {
    pub fn value(&self) -> f64 {
        match *self {
            AnalyticQfi::Exact(v) | AnalyticQfi::Asymptotic(v) => v,
        }
    }
}

const SINGULAR_TOL: f64 = 1e-12;

/// Closed-form QFI of the `+` eigenstate: `4/(4γ²−1)²` for NH1,
/// `200π²/sin²(20πγ)` for NH3 and the asymptote `1/(4γ²)` for NH2 at
/// `ε = 2, g = 1`.
pub fn analytic_qfi(kind: ModelKind, gamma: f64) -> Result<AnalyticQfi> {
    match kind {
        ModelKind::Nh1 => {
            let den = 4.0 * gamma * gamma - 1.0;
            if den.abs() < SINGULAR_TOL {
                return Err(Error::Singular { gamma });
            }
            Ok(AnalyticQfi::Exact(4.0 / (den * den)))
        }
        ModelKind::Nh2 { eps, g } => {
            if eps != 2.0 || g != 1.0 {
                return Err(Error::Unsupported(format!(
                    "no closed-form QFI for nh2 with eps = {eps}, g = {g}"
                )));
            }
            if gamma.abs() < SINGULAR_TOL {
                return Err(Error::Singular { gamma });
            }
            Ok(AnalyticQfi::Asymptotic(1.0 / (4.0 * gamma * gamma)))
        }
        ModelKind::Nh3 => {
            let s = (20.0 * PI * gamma).sin();
            if s.abs() < SINGULAR_TOL {
                return Err(Error::Singular { gamma });
            }
            Ok(AnalyticQfi::Exact(200.0 * PI * PI / (s * s)))
        }
    }
}

/// Effective `{e, f}` sub-system of a driven transmon,
/// `H = Jσx + ΔI − i(γe/2)|e⟩⟨e|` with `J = J̃ + εVx/2`.
///
/// Vectors are written in the `(e, f)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmon {
    pub jtilde: f64,
    pub delta: f64,
    pub gamma_e: f64,
    /// Transduced signal `εVx`.
    pub evx: f64,
}

/// Which level the sub-system starts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    E,
    F,
}

/// Spectral data of a [`Transmon`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonState {
    /// `4√(J² − γe²/16)`, principal branch.
    pub d: C64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    /// Weight of the `+` mode in the `f` trajectory; undefined for `J = 0`.
    pub c: Option<C64>,
}

/// Populations of the sub-system at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub pe_norm: f64,
    pub pf_norm: f64,
    pub pe_raw: f64,
    pub pf_raw: f64,
    /// True when the smooth continuation through `d → 0` was used.
    pub limit_branch: bool,
}

/// `|d|` below `LIMIT_RATIO · γe` switches to the smooth continuation.
pub const LIMIT_RATIO: f64 = 1e-5;

impl Transmon {
    pub fn j(&self) -> f64 {
        self.jtilde + self.evx / 2.0
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let j = C64::from(self.j());
        CMatrix::mat2(
            C64::new(self.delta, -self.gamma_e / 2.0),
            j,
            j,
            self.delta.into(),
        )
    }

    pub fn state(&self) -> TransmonState {
        let j = self.j();
        let d = 4.0 * C64::from(j * j - self.gamma_e * self.gamma_e / 16.0).sqrt();
        let mu = C64::new(self.delta, -self.gamma_e / 4.0);
        let c = (j != 0.0).then(|| (d * (d + I * self.gamma_e) - 8.0 * j * j) / (8.0 * j * j));
        TransmonState {
            d,
            lambda_plus: mu + d / 4.0,
            lambda_minus: mu - d / 4.0,
            c,
        }
    }

    /// Signal value `εVx = γe/2 − 2J̃` that puts the sub-system at its EP
    /// (together with `Δ = 0`).
    pub fn ep_signal(jtilde: f64, gamma_e: f64) -> f64 {
        gamma_e / 2.0 - 2.0 * jtilde
    }

    /// `Δ = 0` and `εVx = γe/2 − 2J̃`, each to within `tol`.
    pub fn is_at_ep(&self, tol: f64) -> bool {
        self.delta.abs() <= tol && (self.evx - Self::ep_signal(self.jtilde, self.gamma_e)).abs() <= tol
    }

    /// Unnormalized `e`/`f` trajectory started from `init`:
    /// `|e⟩/√2` evolves into `φe(t)`, `|f⟩` into `φf(t)`.
    pub fn trajectory(&self, t: f64, init: Level) -> (Vec<C64>, bool) {
        let st = self.state();
        let j = self.j();
        let use_limit = st.d.norm() < LIMIT_RATIO * self.gamma_e || j == 0.0;
        let psi = if use_limit {
            self.trajectory_smooth(&st, t, init)
        } else {
            self.trajectory_modal(&st, t, init)
        };
        (psi, use_limit)
    }

    /// Eigenmode expansion with explicit `1/d` and `1/J` prefactors.
    fn trajectory_modal(&self, st: &TransmonState, t: f64, init: Level) -> Vec<C64> {
        let j = self.j();
        let ge = self.gamma_e;
        let d = st.d;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mode = |sign: f64| [(C64::new(0.0, -ge) + sign * d) / (4.0 * j) * r, C64::from(r)];
        let (phi_p, phi_m) = (mode(1.0), mode(-1.0));
        let ep = (-I * st.lambda_plus * t).exp();
        let em = (-I * st.lambda_minus * t).exp();
        match init {
            Level::E => {
                let k = -2.0 * j / d;
                (0..2).map(|i| k * (em * phi_m[i] - ep * phi_p[i])).collect()
            }
            Level::F => {
                let c = st.c.expect("modal form needs J != 0");
                let k = 128f64.sqrt() * j * j / (d * (d + I * ge));
                (0..2).map(|i| k * (em * phi_m[i] + c * ep * phi_p[i])).collect()
            }
        }
    }

    /// Same trajectories rewritten with `S = (e^{−iλ₋t} − e^{−iλ₊t})/d` and
    /// `A = (e^{−iλ₋t} + e^{−iλ₊t})/2`, both regular at `d = 0` and `J = 0`.
    fn trajectory_smooth(&self, st: &TransmonState, t: f64, init: Level) -> Vec<C64> {
        let mu = C64::new(self.delta, -self.gamma_e / 4.0);
        let phase = (-I * mu * t).exp();
        let z = st.d * t / 4.0;
        let s = phase * I * (t / 2.0) * sinc(z);
        let a = phase * z.cos();
        let j = self.j();
        let half_ge = I * (self.gamma_e / 2.0);
        match init {
            Level::E => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                vec![(a + half_ge * s) * r, -2.0 * j * s * r]
            }
            Level::F => vec![-2.0 * j * s, a - half_ge * s],
        }
    }
}

/// `sin z / z`, by its Taylor series near the removable singularity.
fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Normalized populations of the `{e, f}` sub-system at time `t`.
pub fn transmon_populations(model: &Transmon, t: f64, init: Level) -> Result<Populations> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            allowed: ">= 0",
        });
    }
    let (psi, limit_branch) = model.trajectory(t, init);
    let pe_raw = psi[0].norm_sqr();
    let pf_raw = psi[1].norm_sqr();
    let total = pe_raw + pf_raw;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::VanishingBranch { p0: total });
    }
    Ok(Populations {
        pe_norm: pe_raw / total,
        pf_norm: pf_raw / total,
        pe_raw,
        pf_raw,
        limit_branch,
    })
}
