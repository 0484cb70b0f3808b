//! Seeded random objects for property tests and benchmarks.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::circuit::{Circuit, GateKind, InputKind, ParityControl};
use crate::pauli::{DependenceBasis, Pauli, PauliOperator, Sign};

pub fn random_pauli<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PauliOperator {
    let letters: Vec<Pauli> = (0..n).map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)]).collect();
    PauliOperator::from_paulis(Sign::from_bit(rng.random_bool(0.5)), &letters)
}

/// `m ≤ n` independent, pairwise commuting operators with random signs.
pub fn random_commuting_set<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Vec<PauliOperator> {
    assert!(m <= n);
    let mut out: Vec<PauliOperator> = Vec::with_capacity(m);
    let mut basis = DependenceBasis::new(n);
    while out.len() < m {
        let p = random_pauli(rng, n);
        if out.iter().any(|q| q.anticommutes_unchecked(&p)) {
            continue;
        }
        if basis.query(&p).expect("same dimension").is_some() {
            continue;
        }
        basis.insert(&p).expect("same dimension");
        out.push(p);
    }
    out
}

/// Shape of a random circuit from [`random_circuit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitShape {
    pub zero_lines: usize,
    pub magic_lines: usize,
    pub gates: usize,
    /// Measurements placed between gates; every line is measured at the end too.
    pub mid_measurements: usize,
    /// Probability that a Clifford gate after the first measurement is
    /// classically controlled. `T` gates are never controlled.
    pub control_prob: f64,
    pub postselect_prob: f64,
    /// Probability that a single-qubit gate is `T` or `T†`.
    pub t_prob: f64,
}

impl Default for CircuitShape {
    fn default() -> Self {
        CircuitShape {
            zero_lines: 2,
            magic_lines: 2,
            gates: 12,
            mid_measurements: 2,
            control_prob: 0.0,
            postselect_prob: 0.0,
            t_prob: 0.0,
        }
    }
}

/// A random circuit over the Clifford gate set, optionally with `T`s,
/// controls and postselection. Inputs are shuffled over the lines.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, shape: &CircuitShape) -> Circuit {
    let n = shape.zero_lines + shape.magic_lines;
    let mut inputs = vec![InputKind::Zero; shape.zero_lines];
    inputs.extend(vec![InputKind::MagicA; shape.magic_lines]);
    inputs.shuffle(rng);
    let mut c = Circuit::with_inputs(inputs);
    let one: Vec<GateKind> = GateKind::ALL.iter().copied().filter(|k| k.is_clifford() && k.arity() == 1).collect();
    let two: Vec<GateKind> = GateKind::ALL.iter().copied().filter(|k| k.is_clifford() && k.arity() == 2).collect();
    let mut records: Vec<String> = Vec::new();
    let mut meas_at: Vec<usize> = (0..shape.mid_measurements).map(|_| rng.random_range(0..=shape.gates)).collect();
    meas_at.sort_unstable();
    let mut next_meas = 0;
    let measure = |c: &mut Circuit, rng: &mut R, records: &mut Vec<String>, line: usize| {
        let id = format!("m{}", records.len());
        if rng.random_bool(shape.postselect_prob) {
            c.measure_post(line, id.clone(), Sign::from_bit(rng.random_bool(0.5)));
        } else {
            c.measure(line, id.clone());
        }
        records.push(id);
    };
    for g in 0..=shape.gates {
        while next_meas < meas_at.len() && meas_at[next_meas] == g {
            let line = rng.random_range(0..n);
            measure(&mut c, rng, &mut records, line);
            next_meas += 1;
        }
        if g == shape.gates {
            break;
        }
        let (kind, targets) = if n >= 2 && rng.random_bool(0.4) {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            (two[rng.random_range(0..two.len())], vec![a, b])
        } else if rng.random_bool(shape.t_prob) {
            ([GateKind::T, GateKind::Tdg][rng.random_range(0..2)], vec![rng.random_range(0..n)])
        } else {
            (one[rng.random_range(0..one.len())], vec![rng.random_range(0..n)])
        };
        if !records.is_empty() && !kind.is_t_like() && rng.random_bool(shape.control_prob) {
            let k = rng.random_range(1..=records.len().min(3));
            let ctl: Vec<String> = records.choose_multiple(rng, k).cloned().collect();
            c.gate_if(kind, &targets, ParityControl { records: ctl, invert: rng.random_bool(0.5) });
        } else {
            c.gate(kind, &targets);
        }
    }
    for line in 0..n {
        measure(&mut c, rng, &mut records, line);
    }
    c
}
