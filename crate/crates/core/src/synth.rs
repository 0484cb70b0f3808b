//! Clifford synthesis: a gate word mapping given commuting Paulis to `Z`s,
//! and the circuits built from it.

use crate::circuit::{Circuit, GateKind, InputKind};
use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, Sign};
use crate::pbc::{CompiledProgram, NextAction, StaticProgram};
use crate::tableau::{conjugate_pauli, extend_to_full_set_n, inverse_word, BasicGate, Direction, StabilizerTableau};

/// Gate-count constant: every synthesized word has at most `SYNTH_BOUND · n²`
/// basic gates.
pub const SYNTH_BOUND: usize = 17;

/// A word `U` (application order) with `U† Z_i U = gens[i]`, signs included.
pub fn synthesize(gens: &[PauliOperator]) -> Result<Vec<BasicGate>> {
    let n = gens.first().map(PauliOperator::num_qubits).ok_or_else(|| Error::contract("no generators to synthesize"))?;
    synthesize_n(n, gens)
}

pub fn synthesize_n(n: usize, gens: &[PauliOperator]) -> Result<Vec<BasicGate>> {
    let (stab, destab) = extend_to_full_set_n(n, gens)?;
    let mut tab = StabilizerTableau::from_rows(stab, destab)?;
    let mut word = Vec::new();
    let mut apply = |tab: &mut StabilizerTableau, g: BasicGate| {
        tab.apply_gate(g).expect("gate within range");
        word.push(g);
    };
    for j in 0..n {
        // Destabilizer j has identity on the qubits already reduced.
        let d = tab.destab_rows()[j].clone();
        if !(j..n).any(|k| d.x_bit(k)) {
            let k = (j..n).find(|&k| d.z_bit(k)).expect("destabilizer is not the identity");
            apply(&mut tab, BasicGate::H(k));
        }
        if !tab.destab_rows()[j].x_bit(j) {
            let k = (j + 1..n).find(|&k| tab.destab_rows()[j].x_bit(k)).expect("an X component exists");
            for g in [BasicGate::CX(j, k), BasicGate::CX(k, j), BasicGate::CX(j, k)] {
                apply(&mut tab, g);
            }
        }
        for k in j + 1..n {
            if tab.destab_rows()[j].x_bit(k) {
                apply(&mut tab, BasicGate::CX(j, k));
            }
        }
        if tab.destab_rows()[j].z_bit(j) {
            apply(&mut tab, BasicGate::S(j));
        }
        for k in j + 1..n {
            if tab.destab_rows()[j].z_bit(k) {
                for g in [BasicGate::H(k), BasicGate::CX(j, k), BasicGate::H(k)] {
                    apply(&mut tab, g);
                }
            }
        }
        // Stabilizer j: reduce the tail to Z's, fold them onto j with CX
        // gates that fix X_j, then turn a Y on j into Z with H S H.
        for k in j + 1..n {
            let s = &tab.stab_rows()[j];
            match (s.x_bit(k), s.z_bit(k)) {
                (true, true) => {
                    apply(&mut tab, BasicGate::S(k));
                    apply(&mut tab, BasicGate::H(k));
                }
                (true, false) => apply(&mut tab, BasicGate::H(k)),
                _ => {}
            }
            if tab.stab_rows()[j].z_bit(k) {
                apply(&mut tab, BasicGate::CX(k, j));
            }
        }
        if tab.stab_rows()[j].x_bit(j) {
            for g in [BasicGate::H(j), BasicGate::S(j), BasicGate::H(j)] {
                apply(&mut tab, g);
            }
        }
        if tab.stab_rows()[j].sign().is_negative() {
            for g in [BasicGate::H(j), BasicGate::S(j), BasicGate::S(j), BasicGate::H(j)] {
                apply(&mut tab, g);
            }
        }
    }
    if word.len() > SYNTH_BOUND * n * n {
        return Err(Error::contract(format!("synthesized {} gates, above the {SYNTH_BOUND}n² bound", word.len())));
    }
    for (i, g) in gens.iter().enumerate() {
        if conjugate_pauli(&word, &PauliOperator::z(n, i), Direction::Reverse)? != *g {
            return Err(Error::contract(format!("synthesis check failed for generator {i}")));
        }
    }
    Ok(word)
}

fn push_basic(c: &mut Circuit, g: BasicGate) {
    match g {
        BasicGate::H(q) => c.gate(GateKind::H, &[q]),
        BasicGate::S(q) => c.gate(GateKind::S, &[q]),
        BasicGate::CX(a, b) => c.gate(GateKind::CX, &[a, b]),
    };
}

/// A Clifford circuit on `t` magic inputs realizing a static program's
/// measurement list: the synthesized `U`, then `Z` on lines `0..s`, recorded
/// as `q0, q1, …`. Its output distribution is over the non-postselected
/// `q`s in order, ready for [`StaticProgram::push_forward`].
pub fn emit_cm(prog: &StaticProgram) -> Result<Circuit> {
    let ops: Vec<PauliOperator> = prog.measurements.iter().map(|m| m.op.clone()).collect();
    let word = synthesize_n(prog.t, &ops)?;
    let mut c = Circuit::with_inputs(vec![InputKind::MagicA; prog.t]);
    for &g in &word {
        push_basic(&mut c, g);
    }
    for (i, m) in prog.measurements.iter().enumerate() {
        match m.postselect {
            Some(s) => c.measure_post(i, format!("q{i}"), s),
            None => c.measure(i, format!("q{i}")),
        };
    }
    Ok(c)
}

/// A step of an adaptive `t`-qubit circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DriverStep {
    /// Apply `gates`, then measure `Z` on line 0 and provide the outcome.
    Measure { gates: Vec<BasicGate>, postselect: Option<Sign> },
    DrawRandom { record: String },
    EmitClassical { record: String, outcome: Sign },
    Done,
}

/// An interactive program re-expressed as Clifford gates plus single-qubit
/// `Z` measurements: the `i`-th measurement of `P_i` becomes
/// `W_i = U_i U_{i-1}†` followed by `Z_0`, where `U_i† Z_0 U_i = P_i`.
#[derive(Debug, Clone)]
pub struct AdaptiveDriver {
    prog: CompiledProgram,
    prev: Vec<BasicGate>,
}

pub fn emit_adaptive(prog: CompiledProgram) -> AdaptiveDriver {
    AdaptiveDriver { prog, prev: Vec::new() }
}

impl AdaptiveDriver {
    pub fn num_qubits(&self) -> usize {
        self.prog.num_magic()
    }

    pub fn program(&self) -> &CompiledProgram {
        &self.prog
    }

    pub fn next_step(&mut self) -> Result<DriverStep> {
        Ok(match self.prog.next_action()? {
            NextAction::MeasurePauli { op, postselect } => {
                let u = synthesize_n(op.num_qubits(), std::slice::from_ref(&op))?;
                let mut gates = inverse_word(&self.prev);
                gates.extend_from_slice(&u);
                self.prev = u;
                DriverStep::Measure { gates, postselect }
            }
            NextAction::DrawRandom { record } => DriverStep::DrawRandom { record },
            NextAction::EmitClassical { record, outcome } => DriverStep::EmitClassical { record, outcome },
            NextAction::Done => DriverStep::Done,
        })
    }

    pub fn provide(&mut self, outcome: Sign) -> Result<()> {
        self.prog.provide(outcome)
    }

    pub fn output(&self) -> Result<Vec<Sign>> {
        self.prog.output()
    }
}
