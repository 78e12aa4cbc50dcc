//! Quantum Fisher information of the `+` eigenstate of a non-Hermitian
//! family, by closed form, bi-orthogonal derivative, Bures fidelity and the
//! single-qubit mixed-state formula, plus fits of the eigenvalue splitting
//! near exceptional points.
//!
//! Finite differences need a smooth gauge along γ. Around a reference point
//! `γ₀` the `+` pair at a neighbouring `γ` is the eigenpair with the largest
//! `|⟨χ₊(γ₀)|φ(γ)⟩|`, rescaled so that this overlap is exactly 1 (and the left
//! vector by the conjugate factor, keeping `⟨χ|φ⟩ = 1`). This is the
//! parallel-transport gauge; in it the derivative formula is independent of
//! how the eigensolver normalizes its vectors.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamiltonians::{analytic_qfi, ModelKind};
use crate::linalg::{
    biortho_eig_with, discriminant, inner, BiorthoEig, CMatrix, EigBranch, C64,
    DEFAULT_TOL_DEFECTIVE,
};
use crate::noise::DensityMatrix;

/// Default finite-difference step for γ.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Points closer to an EP than `EP_GUARD_FACTOR · tol_defective` (measured
/// on the discriminant) are refused.
pub const EP_GUARD_FACTOR: f64 = 10.0;

/// Scale factor applied to the Bures estimate, fixed by matching NH1 at
/// γ = 0.3 against its closed form (see [`calibrate_kappa`]).
pub const DEFAULT_BURES_KAPPA: f64 = 4.0;

/// Reference point used by [`calibrate_kappa`].
pub const KAPPA_REFERENCE_GAMMA: f64 = 0.3;

/// A one-parameter family of 2×2 matrices.
pub trait Family: Sync {
    fn matrix(&self, gamma: f64) -> Result<CMatrix>;
}

impl Family for ModelKind {
    fn matrix(&self, gamma: f64) -> Result<CMatrix> {
        self.at(gamma)
    }
}

impl<F> Family for F
where
    F: Fn(f64) -> Result<CMatrix> + Sync,
{
    fn matrix(&self, gamma: f64) -> Result<CMatrix> {
        self(gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiMethod {
    BiorthoDeriv,
    BuresFd,
    MixedSld,
    ClosedForm,
}

/// One QFI evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiSample {
    pub gamma: f64,
    /// Non-negative estimate.
    pub qfi_numeric: f64,
    pub qfi_analytic: Option<f64>,
    pub method: QfiMethod,
    pub step: f64,
    /// Value before taking the modulus (bi-orthogonal route) or before
    /// calibration (Bures route).
    pub raw: C64,
}

/// Eigendecomposition at `gamma`, refusing points inside the EP guard.
pub fn eig_guarded<F: Family + ?Sized>(family: &F, gamma: f64, tol: f64) -> Result<BiorthoEig> {
    let m = family.matrix(gamma)?;
    let disc = discriminant(&m);
    if disc.norm() <= EP_GUARD_FACTOR * tol {
        return Err(Error::EpProximity {
            gamma,
            discriminant: disc.norm(),
        });
    }
    biortho_eig_with(&m, tol, EigBranch::Diagonalizable)
}

/// Right/left pair in the transported gauge relative to `chi_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugedPair {
    pub eigenvalue: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

/// Picks the branch of `eig` continuing `chi_ref` and rescales it so that
/// `⟨chi_ref|φ⟩ = ⟨χ|φ⟩ = 1`.
pub fn transport(eig: &BiorthoEig, chi_ref: &[C64]) -> GaugedPair {
    let k = (0..eig.right.len())
        .max_by(|&a, &b| {
            let oa = inner(chi_ref, &eig.right[a]).norm();
            let ob = inner(chi_ref, &eig.right[b]).norm();
            oa.total_cmp(&ob)
        })
        .unwrap_or(0);
    let c = inner(chi_ref, &eig.right[k]);
    GaugedPair {
        eigenvalue: eig.eigenvalues[k],
        right: eig.right[k].iter().map(|z| z / c).collect(),
        left: eig.left[k].iter().map(|z| z * c.conj()).collect(),
    }
}

/// `4(⟨∂χ|∂φ⟩ − |⟨∂χ|φ⟩|²)` from central differences of the transported `+`
/// branch; `center`, `plus`, `minus` are the decompositions at `γ`, `γ+h`,
/// `γ−h`. The result is complex in general.
pub fn biortho_qfi_from_eigs(
    center: &BiorthoEig,
    plus: &BiorthoEig,
    minus: &BiorthoEig,
    h: f64,
) -> C64 {
    let phi0 = &center.right[0];
    let chi0 = &center.left[0];
    let p = transport(plus, chi0);
    let m = transport(minus, chi0);
    let d_phi: Vec<C64> = p.right.iter().zip(&m.right).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let d_chi: Vec<C64> = p.left.iter().zip(&m.left).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    4.0 * (inner(&d_chi, &d_phi) - inner(&d_chi, phi0).norm_sqr())
}

/// Bi-orthogonal derivative QFI with central step `h`; `qfi_numeric` is the
/// modulus of the complex value kept in `raw`.
pub fn qfi_biortho_deriv<F: Family + ?Sized>(
    family: &F,
    gamma: f64,
    h: f64,
    tol: f64,
) -> Result<QfiSample> {
    let center = eig_guarded(family, gamma, tol)?;
    let plus = eig_guarded(family, gamma + h, tol)?;
    let minus = eig_guarded(family, gamma - h, tol)?;
    let raw = biortho_qfi_from_eigs(&center, &plus, &minus, h);
    Ok(QfiSample {
        gamma,
        qfi_numeric: raw.norm(),
        qfi_analytic: None,
        method: QfiMethod::BiorthoDeriv,
        step: h,
        raw,
    })
}

/// `|⟨χ₊(γ+δ)|φ₊(γ)⟩|²` with bi-orthonormal vectors and the left vector at
/// `γ+δ` transported from `γ`.
pub fn fidelity_bi<F: Family + ?Sized>(family: &F, gamma: f64, delta: f64, tol: f64) -> Result<f64> {
    let center = eig_guarded(family, gamma, tol)?;
    if delta == 0.0 {
        // The pair is bi-orthonormal by construction.
        return Ok(1.0);
    }
    let moved = transport(&eig_guarded(family, gamma + delta, tol)?, &center.left[0]);
    Ok(inner(&moved.left, &center.right[0]).norm_sqr())
}

/// Bures finite difference `(2 − 2F)/(4δ²)`; `qfi_numeric` is `kappa` times
/// its modulus and `raw` keeps the uncalibrated value.
pub fn qfi_bures_fd<F: Family + ?Sized>(
    family: &F,
    gamma: f64,
    delta: f64,
    tol: f64,
    kappa: f64,
) -> Result<QfiSample> {
    let f = fidelity_bi(family, gamma, delta, tol)?;
    let raw = (2.0 - 2.0 * f) / (4.0 * delta * delta);
    Ok(QfiSample {
        gamma,
        qfi_numeric: kappa * raw.abs(),
        qfi_analytic: None,
        method: QfiMethod::BuresFd,
        step: delta,
        raw: raw.into(),
    })
}

/// κ such that the Bures route reproduces `4/(4γ²−1)²` for NH1 at γ = 0.3.
pub fn calibrate_kappa(delta: f64) -> Result<f64> {
    let raw = qfi_bures_fd(&ModelKind::Nh1, KAPPA_REFERENCE_GAMMA, delta, DEFAULT_TOL_DEFECTIVE, 1.0)?;
    let target = analytic_qfi(ModelKind::Nh1, KAPPA_REFERENCE_GAMMA)?.value();
    Ok(target / raw.qfi_numeric)
}

/// Purity deficit `1 − |r|²` below which a state is treated as pure.
const PURE_CUTOFF: f64 = 1e-9;

/// Single-qubit SLD QFI of `γ ↦ ρ(γ)` from its Bloch vector:
/// `|r'|² + (r·r')²/(1 − |r|²)`, or `|r'|²` for pure states. `r'` uses the
/// five-point central stencil with step `h`.
pub fn qfi_mixed<R>(rho_family: &R, gamma: f64, h: f64) -> Result<QfiSample>
where
    R: Fn(f64) -> Result<DensityMatrix> + ?Sized,
{
    let r = rho_family(gamma)?.bloch();
    let at = |g: f64| rho_family(g).map(|rho| rho.bloch());
    let (p1, m1, p2, m2) = (at(gamma + h)?, at(gamma - h)?, at(gamma + 2.0 * h)?, at(gamma - 2.0 * h)?);
    let mut dr = [0.0; 3];
    for k in 0..3 {
        dr[k] = (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * h);
    }
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let deficit = 1.0 - dot(&r, &r);
    let q = if deficit < PURE_CUTOFF {
        dot(&dr, &dr)
    } else {
        dot(&dr, &dr) + dot(&r, &dr).powi(2) / deficit
    };
    Ok(QfiSample {
        gamma,
        qfi_numeric: q.max(0.0),
        qfi_analytic: None,
        method: QfiMethod::MixedSld,
        step: h,
        raw: q.into(),
    })
}

/// Which side of the reference point a fit samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// Power-law fit `y ≈ prefactor · |γ − γ_ref|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PuiseuxFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Offsets `(lo, hi)` from the reference point.
    pub window: (f64, f64),
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Ordinary least squares of `ys` on `xs`: `(slope, intercept, rms residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// `|λ₊ − λ₋| = |√(tr² − 4 det)|`.
pub fn eigen_gap<F: Family + ?Sized>(family: &F, gamma: f64) -> Result<f64> {
    Ok(discriminant(&family.matrix(gamma)?).norm().sqrt())
}

fn fit_window<F>(
    gamma_ref: f64,
    window: (f64, f64),
    n_points: usize,
    side: Side,
    f: F,
) -> Result<PuiseuxFit>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = window;
    if n_points < 8 {
        return Err(Error::Domain {
            what: "n_points",
            value: n_points as f64,
            allowed: ">= 8",
        });
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain {
            what: "window",
            value: lo,
            allowed: "0 < lo < hi (offsets from the reference point)",
        });
    }
    let sign = match side {
        Side::Below => -1.0,
        Side::Above => 1.0,
    };
    let mut xs = Vec::with_capacity(n_points);
    let mut ys = Vec::with_capacity(n_points);
    for off in crate::noise::logspace(lo, hi, n_points) {
        let gamma = gamma_ref + sign * off;
        let y = f(gamma)?;
        if !(y >= 1e-13) {
            return Err(Error::DegenerateFit { gamma, gap: y });
        }
        xs.push(off.ln());
        ys.push(y.ln());
    }
    let (exponent, intercept, residual) = linear_fit(&xs, &ys);
    Ok(PuiseuxFit {
        exponent,
        prefactor: intercept.exp(),
        window,
        residual,
    })
}

/// Fits `log|λ₊ − λ₋|` against `log|γ − γ_ep|` over log-spaced offsets in
/// `window` on one side of `gamma_ep`.
pub fn puiseux_fit<F: Family + ?Sized>(
    family: &F,
    gamma_ep: f64,
    window: (f64, f64),
    n_points: usize,
    side: Side,
) -> Result<PuiseuxFit> {
    fit_window(gamma_ep, window, n_points, side, |g| eigen_gap(family, g))
}

/// Same fit for `|gap(γ) − gap(γ_ref)|`, the splitting's deviation from its
/// value at a regular point such as an avoided crossing.
pub fn gap_deviation_fit<F: Family + ?Sized>(
    family: &F,
    gamma_ref: f64,
    window: (f64, f64),
    n_points: usize,
    side: Side,
) -> Result<PuiseuxFit> {
    let g0 = eigen_gap(family, gamma_ref)?;
    fit_window(gamma_ref, window, n_points, side, |g| {
        Ok((eigen_gap(family, g)? - g0).abs())
    })
}

/// Settings shared by the points of a [`qfi_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub method: QfiMethod,
    pub step: f64,
    pub tol_defective: f64,
    pub kappa: f64,
    /// Extra exclusion radius around known EPs, on top of the guard.
    pub exclude_radius: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            method: QfiMethod::BiorthoDeriv,
            step: DEFAULT_STEP,
            tol_defective: DEFAULT_TOL_DEFECTIVE,
            kappa: DEFAULT_BURES_KAPPA,
            exclude_radius: 0.0,
        }
    }
}

/// A grid point that produced no sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Excluded {
    pub gamma: f64,
    pub reason: String,
}

/// Result of a sweep over γ.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiCurve {
    /// Ascending in γ.
    pub samples: Vec<QfiSample>,
    pub excluded: Vec<Excluded>,
}

impl QfiCurve {
    /// `(γ, qfi_numeric, qfi_analytic, ln qfi_numeric)` rows.
    pub fn rows(&self) -> Vec<(f64, f64, Option<f64>, f64)> {
        self.samples
            .iter()
            .map(|s| (s.gamma, s.qfi_numeric, s.qfi_analytic, s.qfi_numeric.ln()))
            .collect()
    }
}

/// Evaluates the QFI of `kind` at every grid value, in parallel when `exec`
/// allows. Points inside the EP guard, within `exclude_radius` of a known
/// EP, or failing for any other reason are listed in
/// [`QfiCurve::excluded`].
pub fn qfi_sweep(kind: ModelKind, grid: &[f64], settings: &SweepSettings, exec: Exec) -> QfiCurve {
    let mut order: Vec<f64> = grid.to_vec();
    order.sort_by(f64::total_cmp);
    let lo = order.first().copied().unwrap_or(0.0);
    let hi = order.last().copied().unwrap_or(0.0);
    let eps = crate::hamiltonians::ep_locus(kind, Some((lo - 1.0, hi + 1.0))).unwrap_or_default();

    let results = exec.map(order.len(), |i| {
        let g = order[i];
        if settings.exclude_radius > 0.0 {
            if let Some(ep) = eps.iter().find(|&&ep| (g - ep).abs() <= settings.exclude_radius) {
                return Err(format!("within {} of the EP at {}", settings.exclude_radius, ep));
            }
        }
        let sample = match settings.method {
            QfiMethod::BuresFd => qfi_bures_fd(&kind, g, settings.step, settings.tol_defective, settings.kappa),
            _ => qfi_biortho_deriv(&kind, g, settings.step, settings.tol_defective),
        };
        match sample {
            Ok(mut s) => {
                s.qfi_analytic = analytic_qfi(kind, g).ok().map(|a| a.value());
                if s.qfi_numeric.is_finite() && s.qfi_numeric > 0.0 {
                    Ok(s)
                } else {
                    Err(format!("non-finite or zero QFI {}", s.qfi_numeric))
                }
            }
            Err(e) => Err(e.to_string()),
        }
    });

    let mut curve = QfiCurve {
        samples: Vec::new(),
        excluded: Vec::new(),
    };
    for (g, r) in order.into_iter().zip(results) {
        match r {
            Ok(s) => curve.samples.push(s),
            Err(reason) => curve.excluded.push(Excluded { gamma: g, reason }),
        }
    }
    curve
}
