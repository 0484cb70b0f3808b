//! Line-oriented text format.
//!
//! ```text
//! qubits 2
//! input Z0 A
//! gate H 0
//! gate CX 0 1
//! measure 1 -> m0
//! gate S 0 if m0
//! measure 0 -> m1 post +1
//! output-bits m0
//! ```

use std::fmt::Write as _;

use super::{valid_record_id, Circuit, Gate, GateKind, InputKind, Measurement, OutputSpec, ParityControl, Step};
use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, Sign};

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, msg: msg.into() }
}

fn parse_line_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| syntax(line, format!("expected a line number, found {tok:?}")))
}

fn parse_control(tok: &str, line: usize) -> Result<ParityControl> {
    let mut records = Vec::new();
    let mut invert = false;
    let parts: Vec<&str> = tok.split('^').collect();
    for (i, part) in parts.iter().enumerate() {
        if *part == "1" && i == parts.len() - 1 && i > 0 {
            invert = true;
        } else if valid_record_id(part) {
            records.push(part.to_string());
        } else {
            return Err(syntax(line, format!("bad parity control {tok:?}")));
        }
    }
    Ok(ParityControl { records, invert })
}

/// Parses the text format. Line numbers in errors are 1-based.
pub fn parse(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut step_lines = Vec::new();
    let mut saw_input = false;
    let mut saw_output = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some(c) = circuit.as_mut() else {
            if toks[0] != "qubits" || toks.len() != 2 {
                return Err(syntax(line, "the first statement must be `qubits N`"));
            }
            let n = parse_line_index(toks[1], line)?;
            circuit = Some(Circuit::new(n));
            continue;
        };
        match toks[0] {
            "qubits" => return Err(syntax(line, "duplicate `qubits` statement")),
            "input" => {
                if saw_input || !c.steps.is_empty() {
                    return Err(syntax(line, "`input` must appear once, before any step"));
                }
                saw_input = true;
                let kinds = toks[1..]
                    .iter()
                    .map(|t| match *t {
                        "Z0" => Ok(InputKind::Zero),
                        "A" => Ok(InputKind::MagicA),
                        other => Err(syntax(line, format!("unknown input kind {other:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if kinds.len() != c.num_lines {
                    return Err(Error::Semantic { line: Some(line), msg: format!("{} inputs for {} lines", kinds.len(), c.num_lines) });
                }
                c.inputs = kinds;
            }
            "input-stab" => {
                if c.stabilizer_block.is_some() || !c.steps.is_empty() {
                    return Err(syntax(line, "`input-stab` must appear once, before any step"));
                }
                let gens = toks[1..]
                    .iter()
                    .map(|t| {
                        let t = t.trim_matches('"');
                        t.parse::<PauliOperator>().map_err(|e| syntax(line, e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if gens.is_empty() {
                    return Err(syntax(line, "`input-stab` needs at least one generator"));
                }
                c.stabilizer_block = Some(gens);
            }
            "gate" => {
                let name = toks.get(1).ok_or_else(|| syntax(line, "missing gate name"))?;
                let kind = GateKind::from_name(name).ok_or_else(|| syntax(line, format!("unknown gate {name:?}")))?;
                let (target_toks, control) = match toks.iter().position(|&t| t == "if") {
                    Some(p) => {
                        if p + 2 != toks.len() {
                            return Err(syntax(line, "`if` takes exactly one parity expression"));
                        }
                        (&toks[2..p], Some(parse_control(toks[p + 1], line)?))
                    }
                    None => (&toks[2..], None),
                };
                if target_toks.len() != kind.arity() {
                    return Err(syntax(line, format!("{kind} takes {} targets", kind.arity())));
                }
                let targets = target_toks.iter().map(|t| parse_line_index(t, line)).collect::<Result<Vec<_>>>()?;
                c.steps.push(Step::Gate(Gate { kind, targets, control }));
                step_lines.push(line);
            }
            "measure" => {
                if toks.len() < 4 || toks[2] != "->" {
                    return Err(syntax(line, "expected `measure LINE -> ID [post +1|-1]`"));
                }
                let l = parse_line_index(toks[1], line)?;
                let record = toks[3].to_string();
                if !valid_record_id(&record) {
                    return Err(syntax(line, format!("invalid record id {record:?}")));
                }
                let postselect = match &toks[4..] {
                    [] => None,
                    ["post", v] => Some(Sign::parse_outcome(v).ok_or_else(|| syntax(line, format!("bad postselection value {v:?}")))?),
                    _ => return Err(syntax(line, "trailing tokens after measurement")),
                };
                c.steps.push(Step::Measure(Measurement { line: l, record, postselect }));
                step_lines.push(line);
            }
            "output" | "output-bits" => {
                if saw_output {
                    return Err(syntax(line, "duplicate output statement"));
                }
                saw_output = true;
                c.outputs = if toks[0] == "output" {
                    OutputSpec::Lines(toks[1..].iter().map(|t| parse_line_index(t, line)).collect::<Result<_>>()?)
                } else {
                    for t in &toks[1..] {
                        if !valid_record_id(t) {
                            return Err(syntax(line, format!("invalid record id {t:?}")));
                        }
                    }
                    OutputSpec::Records(toks[1..].iter().map(|t| t.to_string()).collect())
                };
            }
            other => return Err(syntax(line, format!("unknown statement {other:?}"))),
        }
    }
    let circuit = circuit.ok_or_else(|| syntax(1, "empty circuit file"))?;
    circuit.validate_at(Some(&step_lines))?;
    Ok(circuit)
}

pub(super) fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "qubits {}", c.num_lines);
    let inputs: Vec<&str> = c.inputs.iter().map(|k| k.token()).collect();
    if inputs.is_empty() {
        out.push_str("input\n");
    } else {
        let _ = writeln!(out, "input {}", inputs.join(" "));
    }
    if let Some(block) = &c.stabilizer_block {
        let gens: Vec<String> = block.iter().map(|g| format!("\"{g}\"")).collect();
        let _ = writeln!(out, "input-stab {}", gens.join(" "));
    }
    for step in &c.steps {
        match step {
            Step::Gate(g) => {
                out.push_str("gate ");
                out.push_str(g.kind.name());
                for t in &g.targets {
                    let _ = write!(out, " {t}");
                }
                if let Some(ctrl) = &g.control {
                    let _ = write!(out, " if {}", ctrl.records.join("^"));
                    if ctrl.invert {
                        out.push_str("^1");
                    }
                }
                out.push('\n');
            }
            Step::Measure(m) => {
                let _ = write!(out, "measure {} -> {}", m.line, m.record);
                if let Some(s) = m.postselect {
                    let _ = write!(out, " post {s}");
                }
                out.push('\n');
            }
        }
    }
    match &c.outputs {
        OutputSpec::All => {}
        OutputSpec::Lines(ls) => {
            out.push_str("output");
            for l in ls {
                let _ = write!(out, " {l}");
            }
            out.push('\n');
        }
        OutputSpec::Records(rs) => {
            out.push_str("output-bits");
            for r in rs {
                let _ = write!(out, " {r}");
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_cm_circuit() {
        let c = parse("qubits 1\ninput A\nmeasure 0 -> m0\noutput-bits m0\n").unwrap();
        assert_eq!(c.num_lines, 1);
        assert_eq!(c.inputs, vec![InputKind::MagicA]);
        assert_eq!(c.outputs, OutputSpec::Records(vec!["m0".into()]));
        assert_eq!(c.serialize(), "qubits 1\ninput A\nmeasure 0 -> m0\noutput-bits m0\n");
    }

    #[test]
    fn forward_reference_is_semantic() {
        let err = parse("qubits 1\ngate X 0 if m9\nmeasure 0 -> m9\n").unwrap_err();
        assert!(matches!(err, Error::Semantic { line: Some(2), .. }), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse("qubits 1\n\ngate FOO 0\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }));
        assert!(matches!(parse("gate H 0"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse("qubits 1\nmeasure 0 m0"), Err(Error::Syntax { line: 2, .. })));
        assert!(matches!(parse("qubits 1\nmeasure 3 -> m0"), Err(Error::Semantic { line: Some(2), .. })));
    }

    #[test]
    fn controls_and_postselection_round_trip() {
        let src = "qubits 3\ninput Z0 Z0 A\ninput-stab \"XX\" \"-ZZ\"\ngate CX 2 0\nmeasure 0 -> a\nmeasure 2 -> b post -1\ngate Z 1 if a^b^1\ngate S 1 if a\nmeasure 1 -> c\noutput 1\n";
        let c = parse(src).unwrap();
        assert_eq!(c.serialize(), src);
        assert_eq!(parse(&c.serialize()).unwrap(), c);
    }

    #[test]
    fn comments_and_spacing_are_ignored() {
        let c = parse("# header\nqubits   2 # two lines\n\n  gate  cx 0   1\nmeasure 0 -> x\n").unwrap();
        assert_eq!(c.serialize(), "qubits 2\ninput Z0 Z0\ngate CX 0 1\nmeasure 0 -> x\n");
    }
}
