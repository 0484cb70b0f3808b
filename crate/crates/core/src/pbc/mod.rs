//! Compilation of Clifford circuits with magic-state inputs into Pauli-based
//! computations on the magic register.
//!
//! The engine keeps a Clifford frame `C` such that measuring `Z` on a line
//! of the real circuit is the same as measuring `C Z C†` on the initial
//! state `|0⟩^n ⊗ |A⟩^t`. Each measured operator is then either
//!
//! * anticommuting with a known stabilizer `N` of the current virtual state:
//!   its outcome is a fair coin `λ` and the frame absorbs
//!   `V = (N + λ P)/√2`,
//! * a product of known stabilizers: its outcome is computed classically,
//! * otherwise a genuine measurement of the restricted operator on the
//!   `t` magic qubits.
//!
//! Outcomes are tracked as affine GF(2) forms over variables (quantum
//! outcomes `q_k` and coins `r_j`). In interactive mode every variable is
//! valued as soon as it is created; in static mode they stay symbolic, which
//! makes the list of quantum measurements independent of the coins.

mod engine;
mod static_program;

use rand::Rng;

use crate::bits::BitSet;
use crate::circuit::{Circuit, Structure};
use crate::error::{Error, Result};
use crate::pauli::{DependenceBasis, PauliOperator, Sign};

pub use engine::CompiledProgram;
pub use static_program::{AffineSign, RecordKind, StaticMeasurement, StaticProgram, StaticRecord};

/// What the interactive program needs next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextAction {
    /// Measure this Pauli on the `t` magic qubits and [`provide`] the outcome.
    ///
    /// [`provide`]: CompiledProgram::provide
    MeasurePauli { op: PauliOperator, postselect: Option<Sign> },
    /// Flip a fair coin for this record and [`provide`] it.
    ///
    /// [`provide`]: CompiledProgram::provide
    DrawRandom { record: String },
    /// The record's outcome was determined without any input.
    EmitClassical { record: String, outcome: Sign },
    /// All steps processed; the output sample is available.
    Done,
}

/// An executor of Pauli measurements on a `t`-qubit register.
pub trait PauliBackend {
    fn measure(&mut self, op: &PauliOperator) -> Result<Sign>;
}

/// Compiles a Clifford circuit into an interactive program.
pub fn compile(c: &Circuit) -> Result<CompiledProgram> {
    CompiledProgram::new(c, engine::Mode::Interactive)
}

/// As [`compile`], then runs the deterministic prefix so that a
/// postselection that certainly fails is reported now.
pub fn compile_postselected(c: &Circuit) -> Result<CompiledProgram> {
    let prog = compile(c)?;
    let mut probe = prog.clone();
    loop {
        match probe.next_action()? {
            NextAction::EmitClassical { .. } => {}
            NextAction::MeasurePauli { postselect: Some(target), .. } => probe.provide(target)?,
            NextAction::MeasurePauli { postselect: None, .. } | NextAction::DrawRandom { .. } | NextAction::Done => break,
        }
    }
    Ok(prog)
}

/// Compiles a non-adaptive circuit into a fixed measurement list.
///
/// Non-terminal measurements are first deferred onto fresh `|0⟩` ancillas,
/// and postselected measurements are moved ahead of the others; all of
/// them commute once they sit at the end. Coins stay symbolic, so the list
/// itself is deterministic and all randomness lives in the reconstruction.
pub fn compile_nonadaptive(c: &Circuit) -> Result<StaticProgram> {
    c.validate()?;
    if c.classify().structure == Structure::Adaptive {
        return Err(Error::contract("circuit is adaptive; use pbc::compile for an interactive program"));
    }
    let prepared = c.defer_measurements()?.postselected_first();
    let mut prog = CompiledProgram::new(&prepared, engine::Mode::Static)?;
    prog.run_static()
}

/// Drives a program to completion and returns the output sample.
pub fn run_with<B: PauliBackend + ?Sized, R: Rng + ?Sized>(
    prog: &mut CompiledProgram,
    backend: &mut B,
    rng: &mut R,
) -> Result<Vec<Sign>> {
    loop {
        match prog.next_action()? {
            NextAction::MeasurePauli { op, .. } => {
                let o = backend.measure(&op)?;
                prog.provide(o)?;
            }
            NextAction::DrawRandom { .. } => prog.provide(Sign::from_bit(rng.random_bool(0.5)))?,
            NextAction::EmitClassical { .. } => {}
            NextAction::Done => break,
        }
    }
    prog.output()
}

/// Checks that a list of quantum measurements is pairwise commuting,
/// independent and at most `t` long.
pub fn check_measurement_list(ops: &[PauliOperator], t: usize) -> Result<()> {
    if ops.len() > t {
        return Err(Error::contract(format!("{} quantum measurements on {t} qubits", ops.len())));
    }
    let mut basis = DependenceBasis::new(t);
    for (i, op) in ops.iter().enumerate() {
        if let Some(j) = ops[..i].iter().position(|o| o.anticommutes_unchecked(op)) {
            return Err(Error::contract(format!("quantum measurements {j} and {i} anticommute")));
        }
        if !basis.insert(op)? {
            return Err(Error::contract(format!("quantum measurement {i} depends on earlier ones")));
        }
    }
    Ok(())
}

/// `±1 · ∏ vars`, an affine form over GF(2) in bit notation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct SignForm {
    pub constant: Sign,
    pub vars: BitSet,
}

impl SignForm {
    pub fn constant(s: Sign) -> Self {
        SignForm { constant: s, vars: BitSet::new() }
    }

    pub fn var(v: usize) -> Self {
        SignForm { constant: Sign::Plus, vars: BitSet::singleton(v) }
    }

    pub fn times_vars(mut self, vars: &BitSet) -> Self {
        self.vars.xor_with(vars);
        self
    }
}
