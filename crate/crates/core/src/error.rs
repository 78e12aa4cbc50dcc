use thiserror::Error;

/// Errors produced by the simulation, estimation and export routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its allowed domain ({allowed})")]
    Domain {
        what: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("matrix has zero largest singular value")]
    ZeroMatrix,

    #[error("eigenvalue discriminant {discriminant:e} is within a factor 10 of the defective tolerance {tolerance:e}; choose a branch explicitly")]
    DegenerateAmbiguous { discriminant: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("post-selected branch has vanishing probability {p0:e}")]
    VanishingBranch { p0: f64 },

    #[error("repeat-until-success gave up after {attempts} attempts (p0 = {p0})")]
    MaxAttemptsExceeded { attempts: u64, p0: f64 },

    #[error("closed form is singular at gamma = {gamma}")]
    Singular { gamma: f64 },

    #[error("gamma = {gamma} is within the exceptional-point guard (discriminant {discriminant:e})")]
    EpProximity { gamma: f64, discriminant: f64 },

    #[error("non-physical density matrix: {0}")]
    NonphysicalState(String),

    #[error("eigenvalue gap {gap:e} at gamma = {gamma} is too small to fit")]
    DegenerateFit { gamma: f64, gap: f64 },

    #[error("Euler-angle extraction residual {residual:e} exceeds tolerance")]
    DecompositionFail { residual: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("malformed circuit text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            allowed: "[0, 1]",
        })
    }
}
