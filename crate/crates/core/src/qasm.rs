//! OpenQASM 2.0 export of the dilated circuit and of the SWAP test, and a
//! small statevector interpreter for the emitted subset.
//!
//! Qubit `q[k]` is bit `k` of the basis index (little-endian). The dilated
//! circuit puts the system on `q[0]` and the ancilla on `q[1]`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::circuit::StateVector;
use crate::dilation::DilatedCircuit;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ONE, ZERO};

pub const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

/// Gate names the emitter may use.
pub const GATE_SET: [&str; 6] = ["u3", "cx", "cry", "measure", "reset", "barrier"];

/// Largest allowed reconstruction error of an Euler-angle extraction.
pub const EULER_TOL: f64 = 1e-9;

/// Emitted circuit text plus what an executor needs to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct QasmProgram {
    pub text: String,
    pub qubit_count: usize,
    pub creg_count: usize,
    /// Classical bit whose 0 outcome marks an accepted shot.
    pub postselect_bit: Option<usize>,
    /// Sum of the global phases dropped from single-qubit gates.
    pub global_phase: f64,
}

/// `U = e^{iα}·u3(θ, φ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
    pub alpha: f64,
}

/// The qelib1 `u3` matrix.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    CMatrix::mat2(
        c.into(),
        -(I * lambda).exp() * s,
        (I * phi).exp() * s,
        (I * (phi + lambda)).exp() * c,
    )
}

const SMALL: f64 = 1e-12;

/// ZYZ Euler angles of a 2×2 unitary.
pub fn zyz_decompose(u: &CMatrix) -> Result<Euler> {
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let theta = 2.0 * u10.norm().atan2(u00.norm());
    let (alpha, phi, lambda) = if u00.norm() < SMALL {
        let alpha = (-u01).arg();
        (alpha, u10.arg() - alpha, 0.0)
    } else if u10.norm() < SMALL {
        let alpha = u00.arg();
        (alpha, 0.0, u11.arg() - alpha)
    } else {
        let alpha = u00.arg();
        (alpha, u10.arg() - alpha, (-u01).arg() - alpha)
    };
    let e = Euler {
        theta,
        phi,
        lambda,
        alpha,
    };
    let rebuilt = u3_matrix(theta, phi, lambda).scale((I * alpha).exp());
    let residual = rebuilt.max_abs_diff(u);
    if residual > EULER_TOL {
        return Err(Error::DecompositionFail { residual });
    }
    Ok(e)
}

fn num(x: f64) -> String {
    // Avoid "-0.0..." in the golden text.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn u3_line(out: &mut String, e: &Euler, q: usize) {
    let _ = writeln!(
        out,
        "u3({},{},{}) q[{q}];",
        num(e.theta),
        num(e.phi),
        num(e.lambda)
    );
}

/// Emits `V†`, `CΣ`, `U` and the ancilla measurement.
pub fn to_qasm(circuit: &DilatedCircuit) -> Result<QasmProgram> {
    let vdag = zyz_decompose(&circuit.vdag_gate)?;
    let u = zyz_decompose(&circuit.u_gate)?;
    let global_phase = vdag.alpha + u.alpha;
    let cry_angle = 2.0 * circuit.m.clamp(0.0, 1.0).acos();

    let mut text = String::from(HEADER);
    let _ = writeln!(text, "// global_phase: {}", num(global_phase));
    let _ = writeln!(text, "// sigma_max: {}", num(circuit.sigma_max));
    text.push_str("qreg q[2];\ncreg c[1];\n");
    u3_line(&mut text, &vdag, 0);
    let _ = writeln!(text, "cry({}) q[0],q[1];", num(cry_angle));
    u3_line(&mut text, &u, 0);
    text.push_str("measure q[1] -> c[0];\n");
    text.push_str("// postselect: c[0] == 0\n");
    text.push_str("// keep only shots with ancilla q[1] in |0>; repeat until success\n");
    Ok(QasmProgram {
        text,
        qubit_count: 2,
        creg_count: 1,
        postselect_bit: Some(0),
        global_phase,
    })
}

const H: Euler = Euler {
    theta: PI / 2.0,
    phi: 0.0,
    lambda: PI,
    alpha: 0.0,
};

fn phase_gate(lambda: f64) -> Euler {
    Euler {
        theta: 0.0,
        phi: 0.0,
        lambda,
        alpha: 0.0,
    }
}

fn cx(out: &mut String, c: usize, t: usize) {
    let _ = writeln!(out, "cx q[{c}],q[{t}];");
}

/// Toffoli in the {u3, cx} basis (the standard 6-CNOT network).
fn ccx(out: &mut String, a: usize, b: usize, c: usize) {
    let t = phase_gate(PI / 4.0);
    let tdg = phase_gate(-PI / 4.0);
    u3_line(out, &H, c);
    cx(out, b, c);
    u3_line(out, &tdg, c);
    cx(out, a, c);
    u3_line(out, &t, c);
    cx(out, b, c);
    u3_line(out, &tdg, c);
    cx(out, a, c);
    u3_line(out, &t, b);
    u3_line(out, &t, c);
    u3_line(out, &H, c);
    cx(out, a, b);
    u3_line(out, &t, a);
    u3_line(out, &tdg, b);
    cx(out, a, b);
}

/// Unitary taking `|0⟩` to `psi`.
fn preparation(psi: &StateVector) -> CMatrix {
    let a = psi.amplitudes();
    CMatrix::mat2(a[0], -a[1].conj(), a[1], a[0].conj())
}

/// SWAP test on `q[0]` (control), `q[1]`, `q[2]` with both registers left in
/// `|0⟩`. `dim` must be 2.
pub fn swap_test_qasm(dim: usize) -> Result<QasmProgram> {
    if dim != 2 {
        return Err(Error::Dimension { expected: 2, got: dim });
    }
    swap_test_qasm_with(None, None)
}

/// SWAP test with optional single-qubit state preparations on the two
/// registers.
pub fn swap_test_qasm_with(
    psi1: Option<&StateVector>,
    psi2: Option<&StateVector>,
) -> Result<QasmProgram> {
    let mut text = String::from(HEADER);
    let mut global_phase = 0.0;
    let mut preps = String::new();
    for (q, psi) in [(1, psi1), (2, psi2)] {
        if let Some(psi) = psi {
            if psi.dim() != 2 {
                return Err(Error::Dimension { expected: 2, got: psi.dim() });
            }
            let e = zyz_decompose(&preparation(psi))?;
            global_phase += e.alpha;
            u3_line(&mut preps, &e, q);
        }
    }
    let _ = writeln!(text, "// global_phase: {}", num(global_phase));
    text.push_str("qreg q[3];\ncreg c[1];\n");
    text.push_str(&preps);
    text.push_str("barrier q[0],q[1],q[2];\n");
    u3_line(&mut text, &H, 0);
    cx(&mut text, 2, 1);
    ccx(&mut text, 0, 1, 2);
    cx(&mut text, 2, 1);
    u3_line(&mut text, &H, 0);
    text.push_str("barrier q[0],q[1],q[2];\n");
    text.push_str("measure q[0] -> c[0];\n");
    text.push_str("// fidelity = 2*P(c[0] == 0) - 1\n");
    Ok(QasmProgram {
        text,
        qubit_count: 3,
        creg_count: 1,
        postselect_bit: None,
        global_phase,
    })
}

/// Final statevector of an interpreted program, measurements ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub qubits: usize,
    pub amplitudes: Vec<C64>,
    /// `(qubit, clbit)` pairs in program order.
    pub measurements: Vec<(usize, usize)>,
}

impl Simulation {
    /// Probability that `qubit` reads 0.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i >> qubit & 1 == 0)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Remaining qubits after projecting `qubit` onto `|0⟩`, renormalized.
    pub fn condition_zero(&self, qubit: usize) -> Result<StateVector> {
        let kept: Vec<C64> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i >> qubit & 1 == 0)
            .map(|(_, z)| *z)
            .collect();
        StateVector::normalized(kept)
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_index(tok: &str, reg: &str, line: usize) -> Result<usize> {
    let tok = tok.trim();
    tok.strip_prefix(reg)
        .and_then(|r| r.strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected {reg}[k], found `{tok}`")))
}

fn apply_1q(amps: &mut [C64], q: usize, g: &CMatrix) {
    let bit = 1 << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a, b) = (amps[i], amps[i | bit]);
            amps[i] = g[(0, 0)] * a + g[(0, 1)] * b;
            amps[i | bit] = g[(1, 0)] * a + g[(1, 1)] * b;
        }
    }
}

fn apply_controlled(amps: &mut [C64], c: usize, t: usize, g: &CMatrix) {
    let (cb, tb) = (1 << c, 1 << t);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            let (a, b) = (amps[i], amps[i | tb]);
            amps[i] = g[(0, 0)] * a + g[(0, 1)] * b;
            amps[i | tb] = g[(1, 0)] * a + g[(1, 1)] * b;
        }
    }
}

/// Runs a program written in the emitted subset from `|0…0⟩`.
pub fn simulate_qasm(text: &str) -> Result<Simulation> {
    let mut qubits: Option<usize> = None;
    let mut amps: Vec<C64> = Vec::new();
    let mut measurements = Vec::new();
    let mut saw_header = false;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let stmt = line
            .strip_suffix(';')
            .ok_or_else(|| parse_err(line_no, "missing `;`"))?
            .trim();
        if stmt == "OPENQASM 2.0" {
            saw_header = true;
            continue;
        }
        if stmt.starts_with("include") || stmt.starts_with("creg") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            let k = parse_index(rest, "q", line_no)?;
            qubits = Some(k);
            amps = vec![ZERO; 1 << k];
            amps[0] = ONE;
            continue;
        }
        let nq = qubits.ok_or_else(|| parse_err(line_no, "gate before qreg"))?;
        let check = |q: usize| {
            if q < nq {
                Ok(q)
            } else {
                Err(parse_err(line_no, format!("qubit {q} out of range")))
            }
        };

        if let Some(rest) = stmt.strip_prefix("measure") {
            let (q, c) = rest
                .split_once("->")
                .ok_or_else(|| parse_err(line_no, "measure needs `->`"))?;
            measurements.push((check(parse_index(q, "q", line_no)?)?, parse_index(c, "c", line_no)?));
            continue;
        }
        if stmt.starts_with("barrier") {
            continue;
        }
        if stmt.starts_with("reset") {
            return Err(Error::Unsupported(format!("line {line_no}: reset is not simulated")));
        }

        let (head, args) = match stmt.find(')') {
            Some(p) => (&stmt[..=p], stmt[p + 1..].trim()),
            None => stmt
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(line_no, "missing operands"))?,
        };
        let (name, params) = match head.split_once('(') {
            Some((nm, p)) => {
                let p = p.trim_end_matches(')');
                let vals: std::result::Result<Vec<f64>, _> =
                    p.split(',').map(|x| x.trim().parse::<f64>()).collect();
                (nm.trim(), vals.map_err(|e| parse_err(line_no, e.to_string()))?)
            }
            None => (head.trim(), Vec::new()),
        };
        let qs: Vec<usize> = args
            .split(',')
            .map(|a| parse_index(a, "q", line_no).and_then(check))
            .collect::<Result<_>>()?;
        match (name, params.as_slice(), qs.as_slice()) {
            ("u3", [t, p, l], [q]) => apply_1q(&mut amps, *q, &u3_matrix(*t, *p, *l)),
            ("cx", [], [c, t]) => apply_controlled(&mut amps, *c, *t, &CMatrix::pauli_x()),
            ("cry", [t], [c, q]) => {
                let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
                apply_controlled(&mut amps, *c, *q, &CMatrix::real2(co, -si, si, co));
            }
            _ => return Err(parse_err(line_no, format!("unsupported statement `{stmt}`"))),
        }
    }
    if !saw_header {
        return Err(parse_err(1, "missing OPENQASM 2.0 header"));
    }
    let qubits = qubits.ok_or_else(|| parse_err(1, "no qreg declared"))?;
    Ok(Simulation {
        qubits,
        amplitudes: amps,
        measurements,
    })
}

/// Runs `program` on `|ξ⟩|0⟩` (system `q[0]`, ancilla `q[1]`) by prepending a
/// preparation of `ξ`, and returns the post-selected system state.
pub fn resimulate_dilated(program: &QasmProgram, xi: &StateVector) -> Result<StateVector> {
    let prep = zyz_decompose(&preparation(xi))?;
    let mut text = String::new();
    let mut inserted = false;
    for line in program.text.lines() {
        text.push_str(line);
        text.push('\n');
        if !inserted && line.starts_with("creg") {
            u3_line(&mut text, &prep, 0);
            inserted = true;
        }
    }
    let sim = simulate_qasm(&text)?;
    sim.condition_zero(1)
}

/// Names of all gates appearing in a program.
pub fn gate_names(text: &str) -> Vec<String> {
    let mut names = Vec::new();
    for line in text.lines() {
        let line = line.split("//").next().unwrap_or("").trim();
        if line.is_empty()
            || line.starts_with("OPENQASM")
            || line.starts_with("include")
            || line.starts_with("qreg")
            || line.starts_with("creg")
        {
            continue;
        }
        let name: String = line
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names
}
