//! Statevector simulation of the dilated circuit, ancilla post-selection,
//! repeat-until-success sampling and the SWAP-test fidelity estimator.
//!
//! Every stochastic routine takes its generator explicitly. Batched helpers
//! derive one ChaCha stream per batch from `(seed, batch index)` so results do
//! not depend on how batches are scheduled.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use crate::dilation::{with_ancilla_zero, DilatedCircuit};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{inner, norm2, C64, ONE, ZERO};

/// Post-selection below this success probability is refused.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

/// Generator for stream `stream` of the experiment seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Amplitudes of a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// Rescales to unit 2-norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm2(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::VanishingBranch { p0: n * n });
        }
        Ok(Self::new(amplitudes.into_iter().map(|z| z / n).collect()))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        Self::new((0..dim).map(|i| if i == k { ONE } else { ZERO }).collect())
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&x| C64::from(x)).collect())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.overlap(other).norm_sqr()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// Runs the dilated circuit on `|ξ⟩|0⟩`.
pub fn evolve(circuit: &DilatedCircuit, xi: &StateVector) -> Result<StateVector> {
    check_dim(2, xi.dim())?;
    let joint = with_ancilla_zero(xi.amplitudes());
    Ok(StateVector::new(circuit.assembled().apply(&joint)))
}

/// Result of projecting the ancilla onto `|0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    /// Renormalized system state of the ancilla-0 branch.
    pub system: StateVector,
    /// Born-rule success probability `⟨φ|φ⟩`.
    pub p0: f64,
    /// Squared norm of the discarded ancilla-1 branch, `⟨φ'|φ'⟩`.
    pub p1: f64,
}

impl PostSelection {
    /// The alternative success figure `⟨φ|φ⟩² / (⟨φ|φ⟩² + ⟨φ'|φ'⟩²)`. Kept
    /// for comparison only; sampling always uses [`Self::p0`].
    pub fn quadratic_ratio(&self) -> f64 {
        let (a, b) = (self.p0 * self.p0, self.p1 * self.p1);
        a / (a + b)
    }
}

/// Projects the ancilla of a system ⊗ ancilla state onto `|0⟩`.
pub fn post_select(joint: &StateVector) -> Result<PostSelection> {
    check_dim(4, joint.dim())?;
    let a = joint.amplitudes();
    let phi = vec![a[0], a[2]];
    let phi_p = [a[1], a[3]];
    let p0 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let p1 = phi_p.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if p0 < MIN_BRANCH_PROBABILITY {
        return Err(Error::VanishingBranch { p0 });
    }
    Ok(PostSelection {
        system: StateVector::normalized(phi)?,
        p0,
        p1,
    })
}

/// Outcome of one repeat-until-success run.
#[derive(Debug, Clone, PartialEq)]
pub struct RusOutcome {
    pub system: StateVector,
    pub attempts: u64,
    pub p0: f64,
}

/// Bookkeeping for one run inside a seeded batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    /// Ancilla bit of the accepted shot (always 0), or 1 if the run gave up.
    pub outcome: u8,
    pub attempts: u64,
    pub seed: u64,
    pub stream: u64,
}

/// Repeats the circuit until the ancilla reads 0, at most `max_attempts`
/// times.
pub fn rus_run<R: Rng + ?Sized>(
    circuit: &DilatedCircuit,
    xi: &StateVector,
    rng: &mut R,
    max_attempts: u64,
) -> Result<RusOutcome> {
    if max_attempts == 0 {
        return Err(Error::Domain {
            what: "max_attempts",
            value: 0.0,
            allowed: ">= 1",
        });
    }
    let ps = post_select(&evolve(circuit, xi)?)?;
    let attempts = sample_attempts(ps.p0, rng, max_attempts)?;
    Ok(RusOutcome {
        system: ps.system,
        attempts,
        p0: ps.p0,
    })
}

/// Number of Bernoulli(`p0`) trials up to and including the first success.
pub fn sample_attempts<R: Rng + ?Sized>(p0: f64, rng: &mut R, max_attempts: u64) -> Result<u64> {
    let coin = Bernoulli::new(p0.clamp(0.0, 1.0)).map_err(|_| Error::Domain {
        what: "p0",
        value: p0,
        allowed: "[0, 1]",
    })?;
    for attempt in 1..=max_attempts {
        if coin.sample(rng) {
            return Ok(attempt);
        }
    }
    Err(Error::MaxAttemptsExceeded {
        attempts: max_attempts,
        p0,
    })
}

/// `runs` independent RUS runs split into `batches` seeded streams.
///
/// Runs that hit `max_attempts` are recorded with outcome 1 rather than
/// aborting the batch.
pub fn rus_batch(
    circuit: &DilatedCircuit,
    xi: &StateVector,
    seed: u64,
    batches: usize,
    runs_per_batch: usize,
    max_attempts: u64,
    exec: Exec,
) -> Result<Vec<ShotRecord>> {
    let p0 = post_select(&evolve(circuit, xi)?)?.p0;
    let per_batch = exec.map(batches, |b| {
        let mut rng = stream_rng(seed, b as u64);
        (0..runs_per_batch)
            .map(|_| match sample_attempts(p0, &mut rng, max_attempts) {
                Ok(attempts) => ShotRecord {
                    outcome: 0,
                    attempts,
                    seed,
                    stream: b as u64,
                },
                Err(_) => ShotRecord {
                    outcome: 1,
                    attempts: max_attempts,
                    seed,
                    stream: b as u64,
                },
            })
            .collect::<Vec<_>>()
    });
    Ok(per_batch.into_iter().flatten().collect())
}

/// Control-qubit outcome statistics of a SWAP test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapEstimate {
    /// `clamp(2·p0_estimate − 1, 0, 1)`.
    pub f_estimate: f64,
    pub p0_estimate: f64,
    /// Exact probability of reading the control as 0.
    pub p0_exact: f64,
    pub shots: u64,
}

/// Exact probability of the control reading 0 after H, controlled-SWAP, H on
/// the register control ⊗ ψ₁ ⊗ ψ₂.
pub fn swap_test_p0(psi1: &StateVector, psi2: &StateVector) -> Result<f64> {
    check_dim(psi1.dim(), psi2.dim())?;
    let d = psi1.dim();
    let block = d * d;
    let r = std::f64::consts::FRAC_1_SQRT_2;

    let mut reg = vec![ZERO; 2 * block];
    for i in 0..d {
        for j in 0..d {
            reg[i * d + j] = psi1.amplitudes()[i] * psi2.amplitudes()[j];
        }
    }
    let hadamard = |reg: &mut Vec<C64>| {
        for k in 0..block {
            let (a, b) = (reg[k], reg[block + k]);
            reg[k] = (a + b) * r;
            reg[block + k] = (a - b) * r;
        }
    };
    hadamard(&mut reg);
    for i in 0..d {
        for j in (i + 1)..d {
            reg.swap(block + i * d + j, block + j * d + i);
        }
    }
    hadamard(&mut reg);
    Ok(reg[..block].iter().map(|z| z.norm_sqr()).sum::<f64>().min(1.0))
}

/// SWAP-test fidelity estimate from `shots` binomially sampled control
/// readouts.
pub fn swap_test<R: Rng + ?Sized>(
    psi1: &StateVector,
    psi2: &StateVector,
    shots: u64,
    rng: &mut R,
) -> Result<SwapEstimate> {
    if shots == 0 {
        return Err(Error::Domain {
            what: "shots",
            value: 0.0,
            allowed: ">= 1",
        });
    }
    let p0_exact = swap_test_p0(psi1, psi2)?;
    let zeros = Binomial::new(shots, p0_exact.clamp(0.0, 1.0))
        .map_err(|_| Error::Domain {
            what: "p0",
            value: p0_exact,
            allowed: "[0, 1]",
        })?
        .sample(rng);
    let p0_estimate = zeros as f64 / shots as f64;
    Ok(SwapEstimate {
        f_estimate: (2.0 * p0_estimate - 1.0).clamp(0.0, 1.0),
        p0_estimate,
        p0_exact,
        shots,
    })
}

/// `batches` independent SWAP tests, batch `b` drawing from stream `b`.
pub fn swap_test_batches(
    psi1: &StateVector,
    psi2: &StateVector,
    shots_per_batch: u64,
    batches: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<SwapEstimate>> {
    exec.map(batches, |b| {
        swap_test(psi1, psi2, shots_per_batch, &mut stream_rng(seed, b as u64))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::dilate;
    use crate::linalg::CMatrix;

    fn ep_circuit() -> DilatedCircuit {
        dilate(&CMatrix::real2(0.0, 1.0, 0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn identity_circuit_keeps_ancilla_zero() {
        let c = dilate(&CMatrix::zeros(2, 2), 1.0).unwrap();
        let xi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let out = evolve(&c, &xi).unwrap();
        let want = [0.6, 0.0, 0.8, 0.0];
        for (z, w) in out.amplitudes().iter().zip(want) {
            assert!((z - C64::from(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn ep_post_selection_probabilities() {
        let c = ep_circuit();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let ps0 = post_select(&evolve(&c, &StateVector::basis(2, 0)).unwrap()).unwrap();
        assert!((ps0.p0 - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((ps0.system.fidelity(&StateVector::basis(2, 0)) - 1.0).abs() < 1e-12);
        let ps1 = post_select(&evolve(&c, &StateVector::basis(2, 1)).unwrap()).unwrap();
        assert!((ps1.p0 - 2.0 / (golden * golden)).abs() < 1e-12);
        assert!((ps1.p0 + ps1.p1 - 1.0).abs() < 1e-12);
        assert!(ps0.quadratic_ratio() < ps0.p0);
    }

    #[test]
    fn post_select_examples() {
        let psi = StateVector::from_real(&[0.6, 0.0, 0.8, 0.0]).unwrap();
        let ps = post_select(&psi).unwrap();
        assert_eq!(ps.p0, 1.0);
        assert!((ps.system.amplitudes()[1] - C64::from(0.8)).norm() < 1e-15);
        let bell = StateVector::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        let ps = post_select(&bell).unwrap();
        assert!((ps.p0 - 0.5).abs() < 1e-15);
        assert_eq!(ps.system, StateVector::basis(2, 0));
        let dead = StateVector::basis(4, 1);
        assert!(matches!(post_select(&dead), Err(Error::VanishingBranch { .. })));
        assert!(matches!(
            post_select(&StateVector::basis(2, 0)),
            Err(Error::Dimension { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn rus_certain_success_takes_one_attempt() {
        let c = dilate(&CMatrix::pauli_x(), 0.7).unwrap();
        let mut rng = stream_rng(7, 0);
        for _ in 0..100 {
            let out = rus_run(&c, &StateVector::basis(2, 1), &mut rng, 1).unwrap();
            assert_eq!(out.attempts, 1);
        }
    }

    #[test]
    fn rus_gives_up_after_max_attempts() {
        let mut rng = stream_rng(1, 0);
        let mut failures = 0;
        for _ in 0..100 {
            if let Err(Error::MaxAttemptsExceeded { attempts, p0 }) =
                sample_attempts(1e-6, &mut rng, 1)
            {
                assert_eq!(attempts, 1);
                assert_eq!(p0, 1e-6);
                failures += 1;
            }
        }
        assert!(failures > 90);
    }

    #[test]
    fn batches_are_schedule_independent() {
        let c = ep_circuit();
        let xi = StateVector::basis(2, 0);
        let a = rus_batch(&c, &xi, 11, 8, 200, 1000, Exec::Sequential).unwrap();
        let b = rus_batch(&c, &xi, 11, 8, 200, 1000, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn swap_test_exact_probabilities() {
        let zero = StateVector::basis(2, 0);
        let one = StateVector::basis(2, 1);
        let plus = StateVector::from_real(&[1.0, 1.0]).unwrap();
        assert!((swap_test_p0(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!((swap_test_p0(&zero, &one).unwrap() - 0.5).abs() < 1e-15);
        assert!((swap_test_p0(&zero, &plus).unwrap() - 0.75).abs() < 1e-15);
        let est = swap_test(&plus, &plus, 17, &mut stream_rng(3, 0)).unwrap();
        assert_eq!((est.p0_estimate, est.f_estimate), (1.0, 1.0));
        assert!(swap_test(&zero, &StateVector::basis(4, 0), 10, &mut stream_rng(0, 0)).is_err());
    }
}
