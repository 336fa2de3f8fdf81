//! Jones-calculus simulation of the polarizer-only hidden-string pipeline:
//! per-beam 2x2 complex optics with birefringent plates and linear
//! polarizers, plus a readout that reproduces the quantum result beam by
//! beam.
//!
//! Beam index 1 is the bottom-most input and carries bit s_1 (the rightmost
//! written character of the secret).

use num_complex::Complex64;
use serde::Serialize;

use crate::bits::SecretString;
use crate::{Error, Result};

/// Two complex field amplitudes (E_H, E_V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector(pub [Complex64; 2]);

impl JonesVector {
    pub fn horizontal() -> Self {
        Self([Complex64::ONE, Complex64::ZERO])
    }

    pub fn vertical() -> Self {
        Self([Complex64::ZERO, Complex64::ONE])
    }

    /// The fixed stand-in for unpolarized source light: (1,1)/sqrt(2).
    pub fn unpolarized_proxy() -> Self {
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self([c, c])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::ZeroVector);
        }
        Ok(Self([self.0[0] / n, self.0[1] / n]))
    }
}

/// A 2x2 complex transformation, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub [[Complex64; 2]; 2]);

impl JonesMatrix {
    pub fn identity() -> Self {
        Self([
            [Complex64::ONE, Complex64::ZERO],
            [Complex64::ZERO, Complex64::ONE],
        ])
    }

    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        JonesVector([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn mul(&self, rhs: &JonesMatrix) -> JonesMatrix {
        let mut out = [[Complex64::ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        JonesMatrix(out)
    }

    /// Entry-wise distance to another matrix, maximized over entries.
    pub fn max_entry_distance(&self, other: &JonesMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// Entry-wise distance minimized over one global phase.
    pub fn distance_up_to_global_phase(&self, other: &JonesMatrix) -> f64 {
        let overlap: Complex64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| self.0[i][j].conj() * other.0[i][j])
            .sum();
        if overlap.norm() < 1e-300 {
            return self.max_entry_distance(other);
        }
        let phase = overlap / overlap.norm();
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] * phase - other.0[i][j]).norm());
            }
        }
        worst
    }
}

/// General birefringent plate: retardation `eta`, circularity `phi`, fast
/// axis at angle `theta` from horizontal. All angles in radians. Carries the
/// e^(-i eta/2) prefactor exactly.
pub fn bf_matrix(eta: f64, phi: f64, theta: f64) -> JonesMatrix {
    let pre = (Complex64::new(0.0, -eta / 2.0)).exp();
    let e = Complex64::new(0.0, eta).exp();
    let (s, c) = theta.sin_cos();
    let (c2, s2) = (c * c, s * s);
    let cross = (Complex64::ONE - e) * c * s;
    let ephi = Complex64::new(0.0, phi).exp();
    JonesMatrix([
        [
            pre * (c2 + e * s2),
            pre * cross * ephi.conj(),
        ],
        [pre * cross * ephi, pre * (s2 + e * c2)],
    ])
}

/// Linear polarizer with transmission axis at `theta` radians.
pub fn lp_matrix(theta: f64) -> JonesMatrix {
    let (s, c) = theta.sin_cos();
    let re = |x: f64| Complex64::new(x, 0.0);
    JonesMatrix([[re(c * c), re(c * s)], [re(c * s), re(s * s)]])
}

/// Half-wave plate at 22.5 degrees: a Hadamard up to the e^(-i pi/2) phase.
pub fn hadamard_plate() -> JonesMatrix {
    bf_matrix(std::f64::consts::PI, 0.0, std::f64::consts::FRAC_PI_8)
}

/// Half-wave plate at 0 degrees: a Z gate up to the e^(-i pi/2) phase.
pub fn z_plate() -> JonesMatrix {
    bf_matrix(std::f64::consts::PI, 0.0, 0.0)
}

/// One optical element with its tag and (for plates) its angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "element", rename_all = "snake_case")]
pub enum OpticalElement {
    /// Linear polarizer at `theta`.
    Lp { theta: f64 },
    /// Birefringent plate with retardation `eta`, circularity `phi`, axis
    /// `theta`.
    Bf { eta: f64, phi: f64, theta: f64 },
    Identity,
}

impl OpticalElement {
    pub fn matrix(&self) -> JonesMatrix {
        match *self {
            OpticalElement::Lp { theta } => lp_matrix(theta),
            OpticalElement::Bf { eta, phi, theta } => bf_matrix(eta, phi, theta),
            OpticalElement::Identity => JonesMatrix::identity(),
        }
    }
}

/// N independent beams, each a fixed stage sequence LP -> H -> (Z|I) -> H.
#[derive(Debug, Clone)]
pub struct OpticalPipeline {
    beams: Vec<Vec<OpticalElement>>,
}

impl OpticalPipeline {
    /// Beam element lists; beam i (1-based) is `beams()[i - 1]`.
    pub fn beams(&self) -> &[Vec<OpticalElement>] {
        &self.beams
    }

    pub fn n_beams(&self) -> usize {
        self.beams.len()
    }
}

/// Builds the N-beam pipeline encoding the secret: beam i carries a Z plate
/// exactly when s_i = 1.
pub fn build_optical_bv(s: &SecretString) -> OpticalPipeline {
    use std::f64::consts::{FRAC_PI_8, PI};
    let beams = (1..=s.len())
        .map(|i| {
            vec![
                OpticalElement::Lp { theta: 0.0 },
                OpticalElement::Bf { eta: PI, phi: 0.0, theta: FRAC_PI_8 },
                if s.bit(i) {
                    OpticalElement::Bf { eta: PI, phi: 0.0, theta: 0.0 }
                } else {
                    OpticalElement::Identity
                },
                OpticalElement::Bf { eta: PI, phi: 0.0, theta: FRAC_PI_8 },
            ]
        })
        .collect();
    OpticalPipeline { beams }
}

/// Per-beam propagation result.
#[derive(Debug, Clone)]
pub struct BeamOutput {
    pub vector: JonesVector,
    /// Fraction of intensity surviving the LP stage (1/2 for the
    /// unpolarized proxy into LP(0)).
    pub attenuation: f64,
}

/// Pushes one input vector through every beam in stage order. The beam is
/// renormalized right after the LP stage; the lost intensity is reported as
/// `attenuation`. A beam fully absorbed by its polarizer is an error.
pub fn propagate(
    pipeline: &OpticalPipeline,
    inputs: &[JonesVector],
) -> Result<Vec<BeamOutput>> {
    if inputs.len() != pipeline.n_beams() {
        return Err(Error::LengthMismatch {
            expected: pipeline.n_beams(),
            actual: inputs.len(),
        });
    }
    pipeline
        .beams
        .iter()
        .zip(inputs)
        .enumerate()
        .map(|(idx, (elements, input))| {
            let mut v = *input;
            let mut attenuation = 1.0;
            for element in elements {
                v = element.matrix().apply(&v);
                if let OpticalElement::Lp { .. } = element {
                    let survived = v.norm();
                    if survived < 1e-12 {
                        return Err(Error::DegenerateBeam { beam: idx + 1 });
                    }
                    attenuation = survived * survived;
                    v = v.normalized()?;
                }
            }
            Ok(BeamOutput { vector: v, attenuation })
        })
        .collect()
}

/// `true` when the vectors agree up to one global complex phase.
pub fn equal_up_to_global_phase(a: &JonesVector, b: &JonesVector, tol: f64) -> Result<bool> {
    if a.norm() < 1e-300 || b.norm() < 1e-300 {
        return Err(Error::ZeroVector);
    }
    let overlap = a.0[0].conj() * b.0[0] + a.0[1].conj() * b.0[1];
    if overlap.norm() < tol {
        return Ok(false);
    }
    let phase = overlap / overlap.norm();
    let d0 = (a.0[0] * phase - b.0[0]).norm();
    let d1 = (a.0[1] * phase - b.0[1]).norm();
    Ok(d0 <= tol && d1 <= tol)
}

/// Tolerance for deciding a beam's output polarization.
pub const READOUT_TOL: f64 = 1e-8;

/// Maps each beam output to a bit: horizontal -> 0, vertical -> 1.
pub fn readout(outputs: &[BeamOutput]) -> Result<SecretString> {
    let mut bits = Vec::with_capacity(outputs.len());
    for (idx, out) in outputs.iter().enumerate() {
        let v = out.vector.normalized()?;
        if equal_up_to_global_phase(&v, &JonesVector::horizontal(), READOUT_TOL)? {
            bits.push(false);
        } else if equal_up_to_global_phase(&v, &JonesVector::vertical(), READOUT_TOL)? {
            bits.push(true);
        } else {
            return Err(Error::AmbiguousReadout { beam: idx + 1 });
        }
    }
    SecretString::new(bits)
}

/// Result of one full optical run.
#[derive(Debug, Clone)]
pub struct OpticalOutcome {
    pub recovered: SecretString,
    pub beams: Vec<BeamOutput>,
}

/// Builds the pipeline for `s`, feeds every beam the unpolarized proxy, and
/// reads the secret back out.
pub fn run_optical_bv(s: &SecretString) -> Result<OpticalOutcome> {
    let pipeline = build_optical_bv(s);
    let inputs = vec![JonesVector::unpolarized_proxy(); pipeline.n_beams()];
    let beams = propagate(&pipeline, &inputs)?;
    let recovered = readout(&beams)?;
    Ok(OpticalOutcome { recovered, beams })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8, PI};

    fn s(text: &str) -> SecretString {
        text.parse().unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hadamard_plate_matrix_is_a_phased_hadamard() {
        // e^{-i pi/2}/sqrt(2) * [[1,1],[1,-1]], entry-wise.
        let phase = Complex64::new(0.0, -FRAC_PI_2).exp();
        let expected = JonesMatrix([
            [phase * re(FRAC_1_SQRT_2), phase * re(FRAC_1_SQRT_2)],
            [phase * re(FRAC_1_SQRT_2), phase * re(-FRAC_1_SQRT_2)],
        ]);
        assert!(hadamard_plate().max_entry_distance(&expected) < 1e-12);

        let hadamard = JonesMatrix([
            [re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)],
            [re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)],
        ]);
        assert!(hadamard_plate().distance_up_to_global_phase(&hadamard) < 1e-12);
    }

    #[test]
    fn z_plate_matrix_is_a_phased_z() {
        let phase = Complex64::new(0.0, -FRAC_PI_2).exp();
        let expected = JonesMatrix([
            [phase, Complex64::ZERO],
            [Complex64::ZERO, -phase],
        ]);
        assert!(z_plate().max_entry_distance(&expected) < 1e-12);

        let z = JonesMatrix([[re(1.0), Complex64::ZERO], [Complex64::ZERO, re(-1.0)]]);
        assert!(z_plate().distance_up_to_global_phase(&z) < 1e-12);
    }

    #[test]
    fn zero_retardation_is_identity() {
        for phi_step in 0..8 {
            for theta_step in 0..8 {
                let m = bf_matrix(0.0, phi_step as f64, theta_step as f64 * 0.7);
                assert!(m.max_entry_distance(&JonesMatrix::identity()) < 1e-12);
            }
        }
    }

    #[test]
    fn lp_is_a_rank_one_projector() {
        assert!(lp_matrix(0.0)
            .max_entry_distance(&JonesMatrix([
                [re(1.0), Complex64::ZERO],
                [Complex64::ZERO, Complex64::ZERO]
            ]))
            < 1e-12);
        assert!(lp_matrix(FRAC_PI_2)
            .max_entry_distance(&JonesMatrix([
                [Complex64::ZERO, Complex64::ZERO],
                [Complex64::ZERO, re(1.0)]
            ]))
            < 1e-12);
        for k in 0..36 {
            let theta = k as f64 * PI / 36.0;
            let m = lp_matrix(theta);
            assert!(m.mul(&m).max_entry_distance(&m) < 1e-12, "not idempotent at {theta}");
            // Rank 1: determinant vanishes, trace is 1.
            let det = m.0[0][0] * m.0[1][1] - m.0[0][1] * m.0[1][0];
            let trace = m.0[0][0] + m.0[1][1];
            assert!(det.norm() < 1e-12);
            assert!((trace - re(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn bf_is_unitary_on_a_grid() {
        for ei in 0..36 {
            for pi_ in 0..36 {
                for ti in 0..36 {
                    let m = bf_matrix(
                        ei as f64 * 2.0 * PI / 36.0,
                        pi_ as f64 * 2.0 * PI / 36.0,
                        ti as f64 * PI / 36.0,
                    );
                    // M * M^dagger = I.
                    let dag = JonesMatrix([
                        [m.0[0][0].conj(), m.0[1][0].conj()],
                        [m.0[0][1].conj(), m.0[1][1].conj()],
                    ]);
                    assert!(
                        m.mul(&dag).max_entry_distance(&JonesMatrix::identity()) < 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn two_qwps_make_a_hwp_up_to_phase() {
        for k in 0..36 {
            let theta = k as f64 * PI / 36.0;
            let qwp = bf_matrix(FRAC_PI_2, 0.0, theta);
            let hwp = bf_matrix(PI, 0.0, theta);
            assert!(qwp.mul(&qwp).distance_up_to_global_phase(&hwp) < 1e-10);
        }
    }

    #[test]
    fn pipeline_structure_for_10110() {
        let pipeline = build_optical_bv(&s("10110"));
        assert_eq!(pipeline.n_beams(), 5);
        let has_z = |beam: &[OpticalElement]| {
            matches!(beam[2], OpticalElement::Bf { theta, .. } if theta == 0.0)
        };
        // s_1 = 0, s_2 = 1, s_3 = 1, s_4 = 0, s_5 = 1 (rightmost is s_1).
        let expect = [false, true, true, false, true];
        for (beam, want) in pipeline.beams().iter().zip(expect) {
            assert_eq!(beam.len(), 4);
            assert!(matches!(beam[0], OpticalElement::Lp { theta } if theta == 0.0));
            assert_eq!(has_z(beam), want);
        }
    }

    #[test]
    fn single_beam_outputs() {
        // s = 1: output proportional to (0,1); s = 0: proportional to (1,0).
        let out1 = run_optical_bv(&s("1")).unwrap();
        assert!(equal_up_to_global_phase(
            &out1.beams[0].vector,
            &JonesVector::vertical(),
            1e-10
        )
        .unwrap());
        assert!((out1.beams[0].attenuation - 0.5).abs() < 1e-12);

        let out0 = run_optical_bv(&s("0")).unwrap();
        assert!(equal_up_to_global_phase(
            &out0.beams[0].vector,
            &JonesVector::horizontal(),
            1e-10
        )
        .unwrap());
    }

    #[test]
    fn five_beam_secret_reads_out() {
        assert_eq!(run_optical_bv(&s("10110")).unwrap().recovered.to_string(), "10110");
    }

    #[test]
    fn exhaustive_round_trip_n_up_to_8() {
        for n in 1..=8usize {
            for val in 0..(1usize << n) {
                let text: String = (0..n)
                    .rev()
                    .map(|b| if val >> b & 1 == 1 { '1' } else { '0' })
                    .collect();
                let secret = s(&text);
                let outcome = run_optical_bv(&secret).unwrap();
                assert_eq!(outcome.recovered, secret, "failed for {text}");
            }
        }
    }

    #[test]
    fn vertical_input_into_lp0_is_degenerate() {
        let pipeline = build_optical_bv(&s("01"));
        let inputs = vec![JonesVector::vertical(), JonesVector::unpolarized_proxy()];
        match propagate(&pipeline, &inputs) {
            Err(Error::DegenerateBeam { beam }) => assert_eq!(beam, 1),
            other => panic!("expected degenerate beam, got {other:?}"),
        }
    }

    #[test]
    fn ambiguous_readout_is_rejected() {
        let diagonal = JonesVector([re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]);
        let outputs = vec![BeamOutput { vector: diagonal, attenuation: 1.0 }];
        match readout(&outputs) {
            Err(Error::AmbiguousReadout { beam }) => assert_eq!(beam, 1),
            other => panic!("expected ambiguous readout, got {other:?}"),
        }
    }

    #[test]
    fn global_phase_equality() {
        let a = JonesVector::horizontal();
        let b = JonesVector([Complex64::new(0.0, 1.0), Complex64::ZERO]);
        assert!(equal_up_to_global_phase(&a, &b, 1e-12).unwrap());
        assert!(!equal_up_to_global_phase(&a, &JonesVector::vertical(), 1e-12).unwrap());
        let zero = JonesVector([Complex64::ZERO, Complex64::ZERO]);
        assert!(equal_up_to_global_phase(&a, &zero, 1e-12).is_err());
    }

    #[test]
    fn optical_beams_match_single_qubit_states() {
        // Beam-by-beam agreement with H * Z^{s_i} * H |0>.
        use crate::statevector::StateVector;
        for n in 1..=8usize {
            for val in 0..(1usize << n) {
                let text: String = (0..n)
                    .rev()
                    .map(|b| if val >> b & 1 == 1 { '1' } else { '0' })
                    .collect();
                let secret = s(&text);
                let outcome = run_optical_bv(&secret).unwrap();
                for i in 1..=n {
                    let mut psi = StateVector::basis(1, 0).unwrap();
                    psi.apply_h(0);
                    if secret.bit(i) {
                        psi.apply_z(0);
                    }
                    psi.apply_h(0);
                    let qubit = JonesVector([psi.amplitudes()[0], psi.amplitudes()[1]]);
                    assert!(equal_up_to_global_phase(
                        &outcome.beams[i - 1].vector,
                        &qubit,
                        1e-10
                    )
                    .unwrap());
                }
            }
        }
    }
}
