//! Brute-force statevector semantics.
//!
//! Qubit `k` is bit `k` of a basis index. Gates are applied from their
//! exact matrices, independently of the `{H, S, CX}` lowering used by the
//! tableau code, so this module can serve as the reference everything
//! else is checked against.

mod distribution;
mod hybrid;
mod simulate;

use num_complex::Complex64;

use crate::circuit::{GateKind, InputKind};
use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, Sign};
use crate::tableau::BasicGate;

pub use distribution::{additive_distance, distance, multiplicative_error, tvd, DistanceReport, Distribution, Metric};
pub use hybrid::{exact_distribution_driver, exact_distribution_hybrid, exact_distribution_static, quantum_distribution, DenseBackend};
pub use simulate::{circuit_unitary, exact_distribution, exact_distribution_with, phase_residual, unitary_equal_up_to_phase};

/// Limits for exhaustive simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_lines: usize,
    pub max_branches: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_lines: 14, max_branches: 1 << 20 }
    }
}

impl Budget {
    pub(crate) fn check_lines(&self, n: usize) -> Result<()> {
        if n > self.max_lines {
            Err(Error::Budget(format!("{n} lines exceed the dense limit of {}", self.max_lines)))
        } else {
            Ok(())
        }
    }
}

/// Branch probabilities below this are pruned; their mass is reported.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const O: Complex64 = c(0.0, 0.0);
const ONE: Complex64 = c(1.0, 0.0);
const I: Complex64 = c(0.0, 1.0);

fn omega() -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)
}

/// Exact single-qubit matrix, or `None` for two-qubit gates.
pub fn matrix_1q(kind: GateKind) -> Option<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Some(match kind {
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::S => [[ONE, O], [O, I]],
        GateKind::Sdg => [[ONE, O], [O, -I]],
        GateKind::X => [[O, ONE], [ONE, O]],
        GateKind::Y => [[O, -I], [I, O]],
        GateKind::Z => [[ONE, O], [O, -ONE]],
        GateKind::T => [[ONE, O], [O, omega()]],
        GateKind::Tdg => [[ONE, O], [O, omega().conj()]],
        GateKind::SqrtX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        GateKind::SqrtXdg => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
        GateKind::SqrtY => [[c(0.5, 0.5), c(-0.5, -0.5)], [c(0.5, 0.5), c(0.5, 0.5)]],
        GateKind::SqrtYdg => [[c(0.5, -0.5), c(0.5, -0.5)], [c(-0.5, 0.5), c(0.5, -0.5)]],
        _ => return None,
    })
}

/// Exact two-qubit matrix in the basis `|b_first b_second⟩`, index
/// `2·b_first + b_second`.
pub fn matrix_2q(kind: GateKind) -> Option<Mat4> {
    let mut m = [[O; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    match kind {
        GateKind::CX => {
            m[2] = [O, O, O, ONE];
            m[3] = [O, O, ONE, O];
        }
        GateKind::CZ => m[3][3] = -ONE,
        GateKind::CS => m[3][3] = I,
        GateKind::CSdg => m[3][3] = -I,
        _ => return None,
    }
    Some(m)
}

/// A pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![O; 1 << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::contract("amplitude count is not a power of two"));
        }
        Ok(StateVector { n: amps.len().trailing_zeros() as usize, amps })
    }

    /// Product state of `|0⟩` and `|A⟩` inputs.
    pub fn product(inputs: &[InputKind]) -> Self {
        let mut s = StateVector::zero(inputs.len());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (q, k) in inputs.iter().enumerate() {
            if *k == InputKind::MagicA {
                s.apply_1q(q, &[[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]);
                s.apply_1q(q, &matrix_1q(GateKind::T).expect("single-qubit gate"));
            }
        }
        s
    }

    /// `|A⟩^{⊗t}`.
    pub fn magic(t: usize) -> Self {
        StateVector::product(&vec![InputKind::MagicA; t])
    }

    /// Projects the first `m` lines onto the state stabilized by `gens`,
    /// starting from the first basis assignment with non-zero overlap.
    pub fn with_stabilizer_block(inputs: &[InputKind], gens: &[PauliOperator]) -> Result<Self> {
        let m = gens.first().map_or(0, |g| g.num_qubits());
        let lines: Vec<usize> = (0..m).collect();
        for b in 0..(1usize << m) {
            let mut s = StateVector::product(inputs);
            for q in 0..m {
                if (b >> q) & 1 == 1 {
                    s.apply_1q(q, &matrix_1q(GateKind::X).expect("single-qubit gate"));
                }
            }
            for g in gens {
                s.project_pauli(&g.embed(inputs.len(), &lines), Sign::Plus);
            }
            if s.norm_sqr() > 1e-6 {
                s.normalize();
                return Ok(s);
            }
        }
        Err(Error::contract("stabilizer generators do not define a state"))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= norm);
        }
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_2q(&mut self, a: usize, b: usize, m: &Mat4) {
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ba == 0 && i & bb == 0 {
                let idx = [i, i | bb, i | ba, i | ba | bb];
                let v = idx.map(|j| self.amps[j]);
                for (r, &j) in idx.iter().enumerate() {
                    self.amps[j] = (0..4).map(|k| m[r][k] * v[k]).sum();
                }
            }
        }
    }

    pub fn apply_gate(&mut self, kind: GateKind, targets: &[usize]) {
        match kind.arity() {
            1 => self.apply_1q(targets[0], &matrix_1q(kind).expect("single-qubit gate")),
            _ => self.apply_2q(targets[0], targets[1], &matrix_2q(kind).expect("two-qubit gate")),
        }
    }

    pub fn apply_basic(&mut self, g: BasicGate) {
        match g {
            BasicGate::H(q) => self.apply_gate(GateKind::H, &[q]),
            BasicGate::S(q) => self.apply_gate(GateKind::S, &[q]),
            BasicGate::CX(a, b) => self.apply_gate(GateKind::CX, &[a, b]),
        }
    }

    /// Probability that a `Z` measurement of `q` gives `-1`.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Keeps the component with `Z_q = (-1)^bit`, without renormalizing.
    pub fn project_z(&mut self, q: usize, bit: bool) {
        let mask = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) != bit {
                *a = O;
            }
        }
    }

    /// `P|ψ⟩`, via `P|i⟩ = s · i^{#Y} · (-1)^{|i ∧ z|} |i ⊕ x⟩`.
    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        assert_eq!(p.num_qubits(), self.n);
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u32);
        for q in 0..self.n {
            if p.x_bit(q) {
                xm |= 1 << q;
            }
            if p.z_bit(q) {
                zm |= 1 << q;
            }
            if p.x_bit(q) && p.z_bit(q) {
                ny += 1;
            }
        }
        let base = crate::pauli::Phase::from_exponent(ny + if p.sign().is_negative() { 2 } else { 0 }).to_complex();
        let mut out = vec![O; self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let s = if (i & zm).count_ones() % 2 == 1 { -base } else { base };
            out[i ^ xm] = s * a;
        }
        self.amps = out;
    }

    /// Applies `(I + s·P)/2`, without renormalizing.
    pub fn project_pauli(&mut self, p: &PauliOperator, outcome: Sign) {
        let mut pp = self.clone();
        pp.apply_pauli(p);
        let s = outcome.as_f64();
        for (a, b) in self.amps.iter_mut().zip(&pp.amps) {
            *a = (*a + b * s) * 0.5;
        }
    }

    pub fn expectation(&self, p: &PauliOperator) -> f64 {
        let mut pp = self.clone();
        pp.apply_pauli(p);
        self.amps.iter().zip(&pp.amps).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::testutil::dense_pauli;

    #[test]
    fn lowering_words_match_exact_matrices() {
        for kind in GateKind::ALL.into_iter().filter(|k| k.is_clifford()) {
            let targets: Vec<usize> = (0..kind.arity()).collect();
            let mut exact = Circuit::new(2);
            exact.gate(kind, &targets);
            let mut word = Circuit::new(2);
            for g in kind.basic_word(&targets).unwrap() {
                match g {
                    BasicGate::H(q) => word.gate(GateKind::H, &[q]),
                    BasicGate::S(q) => word.gate(GateKind::S, &[q]),
                    BasicGate::CX(a, b) => word.gate(GateKind::CX, &[a, b]),
                };
            }
            assert!(unitary_equal_up_to_phase(&exact, &word).unwrap(), "{kind}");
        }
    }

    #[test]
    fn inverse_gates_have_inverse_matrices() {
        for kind in GateKind::ALL {
            let targets: Vec<usize> = (0..kind.arity()).collect();
            let mut c = Circuit::new(2);
            c.gate(kind, &targets).gate(kind.inverse(), &targets);
            let u = circuit_unitary(&c).unwrap();
            let id = circuit_unitary(&Circuit::new(2)).unwrap();
            assert!(phase_residual(&u, &id) < 1e-12, "{kind}");
            assert!((u[0][0] - ONE).norm() < 1e-12, "{kind} is not exactly inverted");
        }
    }

    #[test]
    fn pauli_action_matches_kronecker_oracle() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(21);
        for _ in 0..50 {
            let p = crate::random::random_pauli(&mut rng, 3);
            let m = dense_pauli(&p);
            for col in 0..8 {
                let mut s = StateVector::zero(3);
                s.amps = (0..8).map(|i| if i == col { ONE } else { O }).collect();
                s.apply_pauli(&p);
                for r in 0..8 {
                    assert!((s.amps[r] - m[r][col]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn magic_state_has_the_right_amplitudes() {
        let a = StateVector::magic(1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a.amps[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((a.amps[1] - omega() * h).norm() < 1e-15);
    }

    #[test]
    fn stabilizer_block_state_is_stabilized() {
        let gens: Vec<PauliOperator> = ["XX", "-ZZ"].iter().map(|s| s.parse().unwrap()).collect();
        let s = StateVector::with_stabilizer_block(&[InputKind::Zero, InputKind::Zero, InputKind::MagicA], &gens).unwrap();
        for g in &gens {
            assert!((s.expectation(&g.embed(3, &[0, 1])) - 1.0).abs() < 1e-12);
        }
    }
}
