//! Dense state-vector simulation for the single-query hidden-string
//! pipeline: Hadamard layers, two interchangeable phase-oracle
//! constructions, and deterministic readout.
//!
//! Basis ordering: qubit 1 is the least significant bit of the amplitude
//! index, matching the bit-string convention where s_1 is the rightmost
//! written character. Basis labels therefore print most-significant first.

use num_complex::Complex64;

use crate::bits::SecretString;
use crate::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Maximum register width for the dense simulator.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state |index⟩ on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Domain(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hadamard on one qubit (0-based).
    pub fn apply_h(&mut self, qubit: usize) {
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a = self.amps[i];
                let b = self.amps[i | mask];
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | mask] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    /// Pauli X on one qubit (0-based).
    pub fn apply_x(&mut self, qubit: usize) {
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
    }

    /// Pauli Z on one qubit (0-based).
    pub fn apply_z(&mut self, qubit: usize) {
        let mask = 1usize << qubit;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *amp = -*amp;
            }
        }
    }

    /// Controlled NOT (0-based control and target).
    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
    }

    /// `true` when the states agree up to one global complex phase.
    pub fn equal_up_to_global_phase(&self, other: &Self, tol: f64) -> bool {
        if self.n_qubits != other.n_qubits {
            return false;
        }
        let overlap: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        if overlap.norm() < tol {
            return false;
        }
        let phase = overlap / overlap.norm();
        self.amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }
}

/// Hadamard on every qubit of the register.
pub fn apply_hadamard_all(psi: &mut StateVector) {
    for q in 0..psi.n_qubits() {
        psi.apply_h(q);
    }
}

/// |+⟩^⊗n, with a trailing |−⟩ ancilla (built as H·X|0⟩) when requested.
pub fn prepare_query_register(n: usize, with_ancilla: bool) -> Result<StateVector> {
    let total = n + usize::from(with_ancilla);
    let mut psi = StateVector::basis(total, 0)?;
    if with_ancilla {
        psi.apply_x(n);
        psi.apply_h(n);
    }
    for q in 0..n {
        psi.apply_h(q);
    }
    Ok(psi)
}

/// Which circuit realizes the phase oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleConstruction {
    /// CNOT from every defect qubit onto a |−⟩ ancilla at position n+1.
    CnotAncilla,
    /// A Z gate on every defect qubit; no ancilla.
    ZOnly,
}

/// The sealed secret together with its oracle realization.
#[derive(Debug, Clone)]
pub struct OracleSpec {
    pub secret: SecretString,
    pub construction: OracleConstruction,
}

impl OracleSpec {
    /// Register width the oracle expects (secret length plus ancilla).
    pub fn register_width(&self) -> usize {
        match self.construction {
            OracleConstruction::CnotAncilla => self.secret.len() + 1,
            OracleConstruction::ZOnly => self.secret.len(),
        }
    }
}

/// Applies the phase oracle once: each basis amplitude |x⟩ gains the phase
/// (−1)^(x·s) (with the CNOT form, via kickback off the |−⟩ ancilla).
pub fn apply_oracle(psi: &mut StateVector, spec: &OracleSpec) -> Result<()> {
    if psi.n_qubits() != spec.register_width() {
        return Err(Error::LengthMismatch {
            expected: spec.register_width(),
            actual: psi.n_qubits(),
        });
    }
    let n = spec.secret.len();
    match spec.construction {
        OracleConstruction::CnotAncilla => {
            for i in 1..=n {
                if spec.secret.bit(i) {
                    psi.apply_cnot(i - 1, n);
                }
            }
        }
        OracleConstruction::ZOnly => {
            for i in 1..=n {
                if spec.secret.bit(i) {
                    psi.apply_z(i - 1);
                }
            }
        }
    }
    Ok(())
}

/// Most-likely basis label (printed most-significant first) and its
/// probability. Deterministic states report probability 1 within tolerance.
pub fn measure_deterministic(psi: &StateVector) -> (String, f64) {
    let (index, prob) = psi
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| (i, a.norm_sqr()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("state vector is never empty");
    (format_basis_label(index, psi.n_qubits()), prob)
}

fn format_basis_label(index: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Result of one full pipeline run.
#[derive(Debug, Clone)]
pub struct BvOutcome {
    pub recovered: SecretString,
    pub oracle_calls: u32,
    /// Probability of the recovered label (marginal over the ancilla).
    pub probability: f64,
}

/// Runs the single-query pipeline: prepare, one oracle application, a
/// Hadamard layer on the data qubits, then deterministic readout.
pub fn run_bv(secret: &SecretString, construction: OracleConstruction) -> Result<BvOutcome> {
    let n = secret.len();
    let spec = OracleSpec { secret: secret.clone(), construction };
    let with_ancilla = construction == OracleConstruction::CnotAncilla;
    let mut psi = prepare_query_register(n, with_ancilla)?;

    let mut oracle_calls = 0u32;
    apply_oracle(&mut psi, &spec)?;
    oracle_calls += 1;

    for q in 0..n {
        psi.apply_h(q);
    }

    // Marginal readout over the data qubits.
    let data_dim = 1usize << n;
    let mut probs = vec![0.0f64; data_dim];
    for (i, a) in psi.amplitudes().iter().enumerate() {
        probs[i & (data_dim - 1)] += a.norm_sqr();
    }
    let (best, probability) = probs
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let recovered: SecretString = format_basis_label(best, n).parse()?;
    Ok(BvOutcome { recovered, oracle_calls, probability })
}
