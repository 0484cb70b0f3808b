use std::fmt::Write as _;

use crate::circuit::valid_record_id;
use crate::dense::Distribution;
use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, Sign};

/// A quantum measurement of a static program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticMeasurement {
    pub op: PauliOperator,
    pub postselect: Option<Sign>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    /// Outcome of a quantum measurement (up to a known sign).
    Quantum,
    /// A fair coin.
    Random,
    /// A postselected record in the coin position, fixed to its target.
    Forced,
    /// Determined by earlier outcomes.
    Classical,
}

impl RecordKind {
    pub fn name(self) -> &'static str {
        match self {
            RecordKind::Quantum => "quantum",
            RecordKind::Random => "random",
            RecordKind::Forced => "forced",
            RecordKind::Classical => "classical",
        }
    }

    pub fn from_name(s: &str) -> Option<RecordKind> {
        [RecordKind::Quantum, RecordKind::Random, RecordKind::Forced, RecordKind::Classical].into_iter().find(|k| k.name() == s)
    }
}

/// `constant · ∏ q_k · ∏ r_j` over quantum outcomes `q` and coins `r`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AffineSign {
    pub constant: Sign,
    pub quantum: Vec<usize>,
    pub coins: Vec<usize>,
}

impl AffineSign {
    pub fn evaluate(&self, quantum: &[Sign], coins: &[Sign]) -> Sign {
        self.quantum.iter().map(|&k| quantum[k]).chain(self.coins.iter().map(|&j| coins[j])).fold(self.constant, |a, b| a * b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticRecord {
    pub id: String,
    pub kind: RecordKind,
    pub value: AffineSign,
}

/// A non-adaptive Pauli-based program: a fixed list of commuting
/// measurements on `t` magic qubits and an affine reconstruction of every
/// record from their outcomes and `coins` fair coins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticProgram {
    pub t: usize,
    pub measurements: Vec<StaticMeasurement>,
    pub coins: usize,
    pub records: Vec<StaticRecord>,
    /// Indices into `records`.
    pub outputs: Vec<usize>,
}

impl StaticProgram {
    pub fn num_quantum(&self) -> usize {
        self.measurements.len()
    }

    pub fn check(&self) -> Result<()> {
        if let Some(m) = self.measurements.iter().find(|m| m.op.num_qubits() != self.t) {
            return Err(Error::Dimension { left: m.op.num_qubits(), right: self.t });
        }
        let ops: Vec<PauliOperator> = self.measurements.iter().map(|m| m.op.clone()).collect();
        super::check_measurement_list(&ops, self.t)?;
        for r in &self.records {
            if r.value.quantum.iter().any(|&k| k >= self.measurements.len()) || r.value.coins.iter().any(|&j| j >= self.coins) {
                return Err(Error::contract(format!("record {} refers to an unknown variable", r.id)));
            }
        }
        if self.outputs.iter().any(|&i| i >= self.records.len()) {
            return Err(Error::contract("output refers to an unknown record"));
        }
        Ok(())
    }

    /// Output signs for given quantum outcomes and coins.
    pub fn evaluate(&self, quantum: &[Sign], coins: &[Sign]) -> Vec<Sign> {
        self.outputs.iter().map(|&i| self.records[i].value.evaluate(quantum, coins)).collect()
    }

    /// Turns a distribution over the non-postselected quantum outcomes (in
    /// order, as produced by the circuit from [`crate::synth::emit_cm`]) into
    /// the output distribution, averaging over the coins.
    pub fn push_forward(&self, quantum: &Distribution) -> Result<Distribution> {
        if self.coins > 20 {
            return Err(Error::Budget(format!("{} coins to enumerate", self.coins)));
        }
        let free: Vec<usize> = (0..self.measurements.len()).filter(|&k| self.measurements[k].postselect.is_none()).collect();
        let mut out = Distribution::new();
        let forced = self.records.iter().filter(|r| r.kind == RecordKind::Forced).count();
        out.weight = quantum.weight * 0.5f64.powi(forced as i32);
        out.pruned = quantum.pruned;
        let scale = 1.0 / (1u64 << self.coins) as f64;
        let mut q: Vec<Sign> = self.measurements.iter().map(|m| m.postselect.unwrap_or(Sign::Plus)).collect();
        for (key, p) in quantum.iter() {
            if key.len() != free.len() {
                return Err(Error::Dimension { left: key.len(), right: free.len() });
            }
            for (&k, b) in free.iter().zip(key.bytes()) {
                q[k] = Sign::from_bit(b == b'1');
            }
            for mask in 0..1u64 << self.coins {
                let coins: Vec<Sign> = (0..self.coins).map(|j| Sign::from_bit(mask >> j & 1 == 1)).collect();
                let bits: String = self.evaluate(&q, &coins).into_iter().map(|s| if s.bit() { '1' } else { '0' }).collect();
                out.add(bits, p * scale);
            }
        }
        Ok(out)
    }

    /// Text form, one statement per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pbc t={} s={}", self.t, self.measurements.len());
        let _ = writeln!(out, "coins {}", self.coins);
        for m in &self.measurements {
            let sign = if m.op.sign().is_negative() { "" } else { "+" };
            let _ = write!(out, "measure {sign}{}", m.op);
            if let Some(s) = m.postselect {
                let _ = write!(out, " post {s}");
            }
            out.push('\n');
        }
        for r in &self.records {
            let _ = write!(out, "record {} {} {}", r.id, r.kind.name(), r.value.constant);
            for k in &r.value.quantum {
                let _ = write!(out, " q{k}");
            }
            for j in &r.value.coins {
                let _ = write!(out, " r{j}");
            }
            out.push('\n');
        }
        out.push_str("output");
        for &i in &self.outputs {
            let _ = write!(out, " {}", self.records[i].id);
        }
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<StaticProgram> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let syntax = |line: usize, msg: String| Error::Syntax { line, msg };
        let (ln, header) = lines.next().ok_or_else(|| syntax(1, "empty program".into()))?;
        let field = |tok: Option<&str>, key: &str| -> Result<usize> {
            tok.and_then(|t| t.strip_prefix(key))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| syntax(ln, format!("expected `pbc t=<n> s=<n>`, found {header:?}")))
        };
        let mut toks = header.split_whitespace();
        if toks.next() != Some("pbc") {
            return Err(syntax(ln, format!("expected `pbc t=<n> s=<n>`, found {header:?}")));
        }
        let t = field(toks.next(), "t=")?;
        let s = field(toks.next(), "s=")?;
        let mut prog = StaticProgram { t, measurements: Vec::new(), coins: 0, records: Vec::new(), outputs: Vec::new() };
        let mut seen_output = false;
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "coins" if toks.len() == 2 => {
                    prog.coins = toks[1].parse().map_err(|_| syntax(ln, format!("bad coin count {:?}", toks[1])))?;
                }
                "measure" if toks.len() == 2 || (toks.len() == 4 && toks[2] == "post") => {
                    let op: PauliOperator = toks[1].parse().map_err(|e| syntax(ln, format!("{e}")))?;
                    let postselect = match toks.get(3) {
                        Some(v) => Some(Sign::parse_outcome(v).ok_or_else(|| syntax(ln, format!("bad outcome {v:?}")))?),
                        None => None,
                    };
                    prog.measurements.push(StaticMeasurement { op, postselect });
                }
                "record" if toks.len() >= 4 => {
                    if !valid_record_id(toks[1]) {
                        return Err(syntax(ln, format!("invalid record id {:?}", toks[1])));
                    }
                    let kind = RecordKind::from_name(toks[2]).ok_or_else(|| syntax(ln, format!("unknown record kind {:?}", toks[2])))?;
                    let constant = Sign::parse_outcome(toks[3]).ok_or_else(|| syntax(ln, format!("bad sign {:?}", toks[3])))?;
                    let mut value = AffineSign { constant, ..Default::default() };
                    for v in &toks[4..] {
                        let bad = || syntax(ln, format!("bad variable {v:?}"));
                        if let Some(k) = v.strip_prefix('q') {
                            value.quantum.push(k.parse().map_err(|_| bad())?);
                        } else if let Some(j) = v.strip_prefix('r') {
                            value.coins.push(j.parse().map_err(|_| bad())?);
                        } else {
                            return Err(bad());
                        }
                    }
                    prog.records.push(StaticRecord { id: toks[1].to_string(), kind, value });
                }
                "output" if !seen_output => {
                    seen_output = true;
                    for id in &toks[1..] {
                        let i = prog
                            .records
                            .iter()
                            .position(|r| r.id == *id)
                            .ok_or_else(|| syntax(ln, format!("unknown output record {id}")))?;
                        prog.outputs.push(i);
                    }
                }
                _ => return Err(syntax(ln, format!("unexpected statement {line:?}"))),
            }
        }
        if prog.measurements.len() != s {
            return Err(syntax(ln, format!("header says s={s} but {} measurements follow", prog.measurements.len())));
        }
        if !seen_output {
            return Err(syntax(ln, "missing output statement".into()));
        }
        prog.check()?;
        Ok(prog)
    }
}
