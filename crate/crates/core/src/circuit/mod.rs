//! Circuit intermediate representation.
//!
//! A [`Circuit`] is a list of [`Step`]s on `num_lines` qubit lines. Gates may
//! be controlled by the parity of earlier measurement records; measurements
//! are non-destructive `Z` measurements that may carry a postselection target.

mod text;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, Sign};
use crate::tableau::BasicGate;

pub use text::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    CX,
    CZ,
    T,
    Tdg,
    SqrtX,
    SqrtXdg,
    SqrtY,
    SqrtYdg,
    CS,
    CSdg,
}

impl GateKind {
    pub const ALL: [GateKind; 16] = [
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::CX,
        GateKind::CZ,
        GateKind::T,
        GateKind::Tdg,
        GateKind::SqrtX,
        GateKind::SqrtXdg,
        GateKind::SqrtY,
        GateKind::SqrtYdg,
        GateKind::CS,
        GateKind::CSdg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::SqrtX => "SqrtX",
            GateKind::SqrtXdg => "SqrtXdg",
            GateKind::SqrtY => "SqrtY",
            GateKind::SqrtYdg => "SqrtYdg",
            GateKind::CS => "CS",
            GateKind::CSdg => "CSdg",
        }
    }

    /// Case-insensitive lookup by name.
    pub fn from_name(s: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::CS | GateKind::CSdg => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, GateKind::T | GateKind::Tdg | GateKind::CS | GateKind::CSdg)
    }

    /// `T` or `T†`.
    pub fn is_t_like(self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }

    pub fn inverse(self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::SqrtX => GateKind::SqrtXdg,
            GateKind::SqrtXdg => GateKind::SqrtX,
            GateKind::SqrtY => GateKind::SqrtYdg,
            GateKind::SqrtYdg => GateKind::SqrtY,
            GateKind::CS => GateKind::CSdg,
            GateKind::CSdg => GateKind::CS,
            other => other,
        }
    }

    /// The gate as a word over `{H, S, CX}` in application order, equal up
    /// to a global phase.
    pub fn basic_word(self, targets: &[usize]) -> Result<Vec<BasicGate>> {
        use BasicGate::{CX, H, S};
        if targets.len() != self.arity() {
            return Err(Error::contract(format!("{} takes {} targets, got {}", self.name(), self.arity(), targets.len())));
        }
        let a = targets[0];
        Ok(match self {
            GateKind::H => vec![H(a)],
            GateKind::S => vec![S(a)],
            GateKind::Sdg => vec![S(a), S(a), S(a)],
            GateKind::Z => vec![S(a), S(a)],
            GateKind::X => vec![H(a), S(a), S(a), H(a)],
            GateKind::Y => vec![S(a), S(a), H(a), S(a), S(a), H(a)],
            GateKind::SqrtX => vec![H(a), S(a), H(a)],
            GateKind::SqrtXdg => vec![H(a), S(a), S(a), S(a), H(a)],
            GateKind::SqrtY => vec![S(a), S(a), H(a)],
            GateKind::SqrtYdg => vec![H(a), S(a), S(a)],
            GateKind::CX => vec![CX(a, targets[1])],
            GateKind::CZ => vec![H(targets[1]), CX(a, targets[1]), H(targets[1])],
            GateKind::T | GateKind::Tdg | GateKind::CS | GateKind::CSdg => {
                return Err(Error::contract(format!("{} is not a Clifford gate", self.name())))
            }
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fires iff the XOR of the referenced outcome bits, XOR `invert`, is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityControl {
    pub records: Vec<String>,
    pub invert: bool,
}

impl ParityControl {
    pub fn on(record: impl Into<String>) -> Self {
        ParityControl { records: vec![record.into()], invert: false }
    }

    pub fn on_plus(record: impl Into<String>) -> Self {
        ParityControl { records: vec![record.into()], invert: true }
    }

    /// Evaluates the control given outcome bits for its records.
    pub fn fires(&self, bits: impl IntoIterator<Item = bool>) -> bool {
        bits.into_iter().fold(self.invert, |acc, b| acc ^ b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub control: Option<ParityControl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measurement {
    pub line: usize,
    pub record: String,
    pub postselect: Option<Sign>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Step {
    Gate(Gate),
    Measure(Measurement),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    /// `|0⟩`.
    Zero,
    /// `|A⟩ = (|0⟩ + e^{iπ/4}|1⟩)/√2`.
    MagicA,
}

impl InputKind {
    pub fn token(self) -> &'static str {
        match self {
            InputKind::Zero => "Z0",
            InputKind::MagicA => "A",
        }
    }
}

/// Which records make up an output sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum OutputSpec {
    /// Every record that is not postselected, in declaration order.
    #[default]
    All,
    /// The last record measured on each listed line.
    Lines(Vec<usize>),
    Records(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub num_lines: usize,
    pub inputs: Vec<InputKind>,
    /// Generators of a pure stabilizer state on lines `0..m`, replacing
    /// their `|0⟩` inputs.
    pub stabilizer_block: Option<Vec<PauliOperator>>,
    pub steps: Vec<Step>,
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    Unitary,
    NonAdaptive,
    Adaptive,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Unitary => "unitary",
            Structure::NonAdaptive => "non-adaptive",
            Structure::Adaptive => "adaptive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Classification {
    pub structure: Structure,
    pub clifford_only: bool,
    /// Number of `T` and `T†` gates.
    pub t_count: usize,
}

impl Circuit {
    pub fn new(num_lines: usize) -> Self {
        Circuit {
            num_lines,
            inputs: vec![InputKind::Zero; num_lines],
            stabilizer_block: None,
            steps: Vec::new(),
            outputs: OutputSpec::All,
        }
    }

    pub fn with_inputs(inputs: Vec<InputKind>) -> Self {
        let mut c = Circuit::new(inputs.len());
        c.inputs = inputs;
        c
    }

    pub fn add_line(&mut self, input: InputKind) -> usize {
        self.inputs.push(input);
        self.num_lines += 1;
        self.num_lines - 1
    }

    pub fn gate(&mut self, kind: GateKind, targets: &[usize]) -> &mut Self {
        self.steps.push(Step::Gate(Gate { kind, targets: targets.to_vec(), control: None }));
        self
    }

    pub fn gate_if(&mut self, kind: GateKind, targets: &[usize], control: ParityControl) -> &mut Self {
        self.steps.push(Step::Gate(Gate { kind, targets: targets.to_vec(), control: Some(control) }));
        self
    }

    pub fn measure(&mut self, line: usize, record: impl Into<String>) -> &mut Self {
        self.steps.push(Step::Measure(Measurement { line, record: record.into(), postselect: None }));
        self
    }

    pub fn measure_post(&mut self, line: usize, record: impl Into<String>, target: Sign) -> &mut Self {
        self.steps.push(Step::Measure(Measurement { line, record: record.into(), postselect: Some(target) }));
        self
    }

    pub fn measurements(&self) -> impl Iterator<Item = &Measurement> {
        self.steps.iter().filter_map(|s| match s {
            Step::Measure(m) => Some(m),
            _ => None,
        })
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.steps.iter().filter_map(|s| match s {
            Step::Gate(g) => Some(g),
            _ => None,
        })
    }

    /// Record ids in declaration order.
    pub fn record_ids(&self) -> Vec<&str> {
        self.measurements().map(|m| m.record.as_str()).collect()
    }

    pub fn record_index(&self) -> HashMap<&str, usize> {
        self.record_ids().into_iter().enumerate().map(|(i, r)| (r, i)).collect()
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements().count()
    }

    pub fn t_count(&self) -> usize {
        self.gates().filter(|g| g.kind.is_t_like()).count()
    }

    pub fn num_magic_inputs(&self) -> usize {
        self.inputs.iter().filter(|&&k| k == InputKind::MagicA).count()
    }

    pub fn is_clifford_only(&self) -> bool {
        self.gates().all(|g| g.kind.is_clifford())
    }

    pub fn is_controlled(&self) -> bool {
        self.gates().any(|g| g.control.is_some())
    }

    pub fn has_postselection(&self) -> bool {
        self.measurements().any(|m| m.postselect.is_some())
    }

    /// A record name not used by this circuit, of the form `{prefix}{k}`.
    pub fn fresh_record(&self, prefix: &str, start: &mut usize) -> String {
        let ids: std::collections::HashSet<&str> = self.record_ids().into_iter().collect();
        loop {
            let name = format!("{prefix}{start}");
            *start += 1;
            if !ids.contains(name.as_str()) {
                return name;
            }
        }
    }

    /// Indices into [`record_ids`](Self::record_ids) forming one output sample.
    pub fn output_records(&self) -> Result<Vec<usize>> {
        let ms: Vec<&Measurement> = self.measurements().collect();
        match &self.outputs {
            OutputSpec::All => Ok((0..ms.len()).filter(|&i| ms[i].postselect.is_none()).collect()),
            OutputSpec::Lines(lines) => lines
                .iter()
                .map(|&l| {
                    ms.iter()
                        .rposition(|m| m.line == l)
                        .ok_or_else(|| Error::semantic(format!("output line {l} is never measured")))
                })
                .collect(),
            OutputSpec::Records(ids) => {
                let index = self.record_index();
                ids.iter()
                    .map(|r| index.get(r.as_str()).copied().ok_or_else(|| Error::semantic(format!("unknown output record {r}"))))
                    .collect()
            }
        }
    }

    /// Replaces the output spec by the explicit record list it denotes.
    pub fn explicit_outputs(&self) -> Result<Vec<String>> {
        let ids = self.record_ids();
        Ok(self.output_records()?.into_iter().map(|i| ids[i].to_string()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_at(None)
    }

    /// Validation with an optional source line per step for error messages.
    pub(crate) fn validate_at(&self, step_lines: Option<&[usize]>) -> Result<()> {
        let at = |i: usize| step_lines.map(|l| l[i]);
        let sem = |line: Option<usize>, msg: String| Error::Semantic { line, msg };
        if self.inputs.len() != self.num_lines {
            return Err(sem(None, format!("{} inputs declared for {} lines", self.inputs.len(), self.num_lines)));
        }
        if let Some(block) = &self.stabilizer_block {
            let m = block.len();
            if m == 0 || m > self.num_lines {
                return Err(sem(None, format!("stabilizer block of {m} generators on {} lines", self.num_lines)));
            }
            if let Some(g) = block.iter().find(|g| g.num_qubits() != m) {
                return Err(sem(None, format!("stabilizer generator {g} does not cover exactly {m} lines")));
            }
            if (0..m).any(|l| self.inputs[l] != InputKind::Zero) {
                return Err(sem(None, "stabilizer block lines must be declared Z0".into()));
            }
            crate::tableau::extend_to_full_set(block).map_err(|e| sem(None, format!("invalid stabilizer block: {e}")))?;
        }
        let mut seen: HashMap<&str, bool> = HashMap::new();
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::Gate(g) => {
                    if g.targets.len() != g.kind.arity() {
                        return Err(sem(at(i), format!("{} takes {} targets", g.kind, g.kind.arity())));
                    }
                    if let Some(&t) = g.targets.iter().find(|&&t| t >= self.num_lines) {
                        return Err(sem(at(i), format!("line {t} out of range")));
                    }
                    if g.targets.len() == 2 && g.targets[0] == g.targets[1] {
                        return Err(sem(at(i), format!("{} needs two distinct lines", g.kind)));
                    }
                    if let Some(c) = &g.control {
                        if c.records.is_empty() {
                            return Err(sem(at(i), "empty parity control".into()));
                        }
                        if let Some(r) = c.records.iter().find(|r| !seen.contains_key(r.as_str())) {
                            return Err(sem(at(i), format!("control references record {r} before it is measured")));
                        }
                    }
                }
                Step::Measure(m) => {
                    if m.line >= self.num_lines {
                        return Err(sem(at(i), format!("line {} out of range", m.line)));
                    }
                    if !valid_record_id(&m.record) {
                        return Err(sem(at(i), format!("invalid record id {:?}", m.record)));
                    }
                    if seen.insert(&m.record, m.postselect.is_some()).is_some() {
                        return Err(sem(at(i), format!("duplicate record id {}", m.record)));
                    }
                }
            }
        }
        match &self.outputs {
            OutputSpec::All => {}
            OutputSpec::Lines(lines) => {
                for &l in lines {
                    if l >= self.num_lines {
                        return Err(sem(None, format!("output line {l} out of range")));
                    }
                    if self.measurements().any(|m| m.line == l && m.postselect.is_some()) {
                        return Err(sem(None, format!("output line {l} carries a postselected measurement")));
                    }
                }
                self.output_records()?;
            }
            OutputSpec::Records(ids) => {
                for r in ids {
                    match seen.get(r.as_str()) {
                        None => return Err(sem(None, format!("unknown output record {r}"))),
                        Some(true) => return Err(sem(None, format!("output record {r} is postselected"))),
                        Some(false) => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether measurement step `i` is followed by no gate on its line.
    fn is_terminal(&self, i: usize) -> bool {
        let Step::Measure(m) = &self.steps[i] else { return false };
        !self.steps[i + 1..].iter().any(|s| matches!(s, Step::Gate(g) if g.targets.contains(&m.line)))
    }

    pub fn classify(&self) -> Classification {
        let structure = if self.is_controlled() {
            Structure::Adaptive
        } else if (0..self.steps.len()).all(|i| !matches!(self.steps[i], Step::Measure(_)) || self.is_terminal(i)) {
            Structure::Unitary
        } else {
            Structure::NonAdaptive
        };
        Classification { structure, clifford_only: self.is_clifford_only(), t_count: self.t_count() }
    }

    /// Moves every measurement after all gates, keeping their relative order.
    ///
    /// Requires each measurement to be terminal and the circuit to have no
    /// controls.
    pub fn normalize_measurements_to_end(&self) -> Result<Circuit> {
        if self.is_controlled() {
            return Err(Error::contract("adaptive circuits cannot be end-normalized"));
        }
        if let Some(i) = (0..self.steps.len()).find(|&i| matches!(self.steps[i], Step::Measure(_)) && !self.is_terminal(i)) {
            return Err(Error::contract(format!("measurement at step {i} is followed by a gate on its line")));
        }
        let mut out = self.clone();
        let (gates, meas): (Vec<Step>, Vec<Step>) = self.steps.iter().cloned().partition(|s| matches!(s, Step::Gate(_)));
        out.steps = gates.into_iter().chain(meas).collect();
        Ok(out)
    }

    /// Replaces each non-terminal measurement by a `CX` copy onto a fresh
    /// `|0⟩` ancilla that is measured at the end. Outputs become explicit
    /// record lists so that they keep pointing at the same records.
    pub fn defer_measurements(&self) -> Result<Circuit> {
        if self.is_controlled() {
            return Err(Error::contract("measurements of an adaptive circuit cannot be deferred"));
        }
        let mut out = self.clone();
        out.outputs = match &self.outputs {
            OutputSpec::Lines(_) => OutputSpec::Records(self.explicit_outputs()?),
            other => other.clone(),
        };
        out.steps.clear();
        let mut deferred = Vec::new();
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::Measure(m) if !self.is_terminal(i) => {
                    let a = out.add_line(InputKind::Zero);
                    out.gate(GateKind::CX, &[m.line, a]);
                    deferred.push(Step::Measure(Measurement { line: a, ..m.clone() }));
                }
                Step::Measure(m) => deferred.push(Step::Measure(m.clone())),
                other => out.steps.push(other.clone()),
            }
        }
        // Measurements that were already terminal can move to the end too.
        out.steps.extend(deferred);
        Ok(out)
    }

    /// Stable reorder putting postselected measurements first among a
    /// trailing block of measurements.
    pub(crate) fn postselected_first(&self) -> Circuit {
        let first_meas = self.steps.iter().position(|s| matches!(s, Step::Measure(_))).unwrap_or(self.steps.len());
        let mut out = self.clone();
        let tail: Vec<Step> = out.steps.split_off(first_meas);
        let (post, rest): (Vec<Step>, Vec<Step>) =
            tail.into_iter().partition(|s| matches!(s, Step::Measure(m) if m.postselect.is_some()));
        out.steps.extend(post);
        out.steps.extend(rest);
        out
    }

    pub fn serialize(&self) -> String {
        text::serialize(self)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl std::str::FromStr for Circuit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

pub(crate) fn valid_record_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        let mut c = Circuit::new(2);
        c.gate(GateKind::H, &[0]).gate(GateKind::CX, &[0, 1]).measure(0, "a").measure(1, "b");
        assert_eq!(c.classify(), Classification { structure: Structure::Unitary, clifford_only: true, t_count: 0 });

        let mut c = Circuit::new(1);
        c.measure(0, "a").gate(GateKind::H, &[0]).gate(GateKind::T, &[0]).measure(0, "b");
        let k = c.classify();
        assert_eq!((k.structure, k.clifford_only, k.t_count), (Structure::NonAdaptive, false, 1));

        let mut c = Circuit::new(1);
        c.measure(0, "a").gate_if(GateKind::X, &[0], ParityControl::on("a"));
        assert_eq!(c.classify().structure, Structure::Adaptive);
        assert!(c.classify().clifford_only);
    }

    #[test]
    fn validation_errors() {
        let mut c = Circuit::new(1);
        c.gate_if(GateKind::X, &[0], ParityControl::on("m9")).measure(0, "m9");
        assert!(matches!(c.validate(), Err(Error::Semantic { .. })));

        let mut c = Circuit::new(1);
        c.measure(0, "a").measure(0, "a");
        assert!(matches!(c.validate(), Err(Error::Semantic { .. })));

        let mut c = Circuit::new(2);
        c.gate(GateKind::CX, &[1, 1]);
        assert!(c.validate().is_err());

        let mut c = Circuit::new(1);
        c.measure_post(0, "a", Sign::Plus);
        c.outputs = OutputSpec::Lines(vec![0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn output_resolution() {
        let mut c = Circuit::new(2);
        c.measure(0, "a").measure_post(1, "p", Sign::Minus).measure(0, "b");
        assert_eq!(c.output_records().unwrap(), vec![0, 2]);
        c.outputs = OutputSpec::Lines(vec![0]);
        assert_eq!(c.output_records().unwrap(), vec![2]);
        c.outputs = OutputSpec::Records(vec!["a".into()]);
        assert_eq!(c.explicit_outputs().unwrap(), vec!["a".to_string()]);
    }

    #[test]
    fn deferral_moves_measurements_to_the_end() {
        let mut c = Circuit::new(2);
        c.gate(GateKind::H, &[0]).measure(0, "a").gate(GateKind::CX, &[0, 1]).measure(1, "b");
        let d = c.defer_measurements().unwrap();
        assert_eq!(d.num_lines, 3);
        assert_eq!(d.classify().structure, Structure::Unitary);
        assert_eq!(d.record_ids(), vec!["a", "b"]);
        d.validate().unwrap();
    }

    #[test]
    fn end_normalization_requires_terminal_measurements() {
        let mut c = Circuit::new(2);
        c.measure(0, "a").gate(GateKind::H, &[1]).measure(1, "b");
        let n = c.normalize_measurements_to_end().unwrap();
        assert!(matches!(n.steps[0], Step::Gate(_)));
        let mut c = Circuit::new(1);
        c.measure(0, "a").gate(GateKind::H, &[0]);
        assert!(c.normalize_measurements_to_end().is_err());
    }

    #[test]
    fn non_clifford_words_are_rejected() {
        assert!(GateKind::T.basic_word(&[0]).is_err());
        assert!(GateKind::CS.basic_word(&[0, 1]).is_err());
        assert_eq!(GateKind::CZ.basic_word(&[0, 1]).unwrap().len(), 3);
    }
}
