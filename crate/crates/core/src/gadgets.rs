//! Local circuit rewrites: `T` gadgets, correction stripping, `CS`
//! expansion and the `|A⟩ → |0⟩` conversion prefix.

use crate::circuit::{Circuit, Gate, GateKind, InputKind, OutputSpec, ParityControl, Step};
use crate::error::{Error, Result};
use crate::pauli::Sign;

/// Record-name prefix for gadget measurements.
pub const GADGET_PREFIX: &str = "g";

fn outputs_fixed(c: &Circuit) -> Result<OutputSpec> {
    Ok(OutputSpec::Records(c.explicit_outputs()?))
}

fn rewrite_t(c: &Circuit, postselected: bool) -> Result<Circuit> {
    if c.t_count() == 0 {
        return Ok(c.clone());
    }
    c.validate()?;
    let mut out = c.clone();
    out.outputs = outputs_fixed(c)?;
    out.steps.clear();
    let mut counter = 0;
    for step in &c.steps {
        let g = match step {
            Step::Gate(g) if g.kind.is_t_like() => g,
            other => {
                out.steps.push(other.clone());
                continue;
            }
        };
        if g.control.is_some() {
            return Err(Error::contract("classically controlled T gates are not supported by the gadget rewrite"));
        }
        let k = g.targets[0];
        let dagger = g.kind == GateKind::Tdg;
        let a = out.add_line(InputKind::MagicA);
        let record = c.fresh_record(GADGET_PREFIX, &mut counter);
        out.gate(GateKind::CX, &[k, a]);
        if postselected {
            out.measure_post(a, record, if dagger { Sign::Minus } else { Sign::Plus });
        } else if dagger {
            out.measure(a, record.clone());
            // S³ = Z·S, applied on outcome +1.
            out.gate_if(GateKind::Z, &[k], ParityControl::on_plus(record.clone()));
            out.gate_if(GateKind::S, &[k], ParityControl::on_plus(record));
        } else {
            out.measure(a, record.clone());
            out.gate_if(GateKind::S, &[k], ParityControl::on(record));
        }
    }
    Ok(out)
}

/// Replaces every `T`/`T†` by a gadget: a fresh `|A⟩` ancilla, `CX` from
/// the data line onto it, a measurement, and an `S` (for `T`, on `-1`) or
/// `S³` (for `T†`, on `+1`) correction. Outputs become the explicit list of
/// the original output records.
pub fn gadgetize(c: &Circuit) -> Result<Circuit> {
    rewrite_t(c, false)
}

/// As [`gadgetize`], but each gadget measurement is postselected on the
/// outcome that needs no correction (`+1` for `T`, `-1` for `T†`).
pub fn gadgetize_postselected(c: &Circuit) -> Result<Circuit> {
    rewrite_t(c, true)
}

/// Records whose only role is to drive gadget corrections.
fn gadget_controls(c: &Circuit) -> Result<Vec<String>> {
    let mut records = Vec::new();
    for g in c.gates() {
        let Some(ctl) = &g.control else { continue };
        if ctl.records.len() != 1 || !matches!(g.kind, GateKind::S | GateKind::Z) {
            return Err(Error::contract(format!("control on {} is not a gadget correction", g.kind)));
        }
        if !records.contains(&ctl.records[0]) {
            records.push(ctl.records[0].clone());
        }
    }
    let lines: Vec<(usize, &str)> = c.measurements().map(|m| (m.line, m.record.as_str())).collect();
    for r in &records {
        let (line, _) = lines.iter().find(|(_, id)| id == r).expect("validated control");
        if c.inputs[*line] != InputKind::MagicA || c.gates().any(|g| g.control.is_none() && g.targets.last() != Some(line) && g.targets.contains(line)) {
            return Err(Error::contract(format!("record {r} is not a gadget measurement")));
        }
    }
    Ok(records)
}

/// Drops every gadget correction and appends the gadget records to the
/// outputs, giving the circuit with outputs `(x, τ)`.
///
/// `τ` lists the gadget records in measurement order; bit `1` (outcome
/// `-1`) means the gadget implemented `T†`.
pub fn strip_corrections(c: &Circuit) -> Result<Circuit> {
    c.validate()?;
    let mut gadgets = gadget_controls(c)?;
    let ids: Vec<&str> = c.record_ids();
    gadgets.sort_by_key(|r| ids.iter().position(|id| id == r));
    let mut outputs = c.explicit_outputs()?;
    outputs.retain(|r| !gadgets.contains(r));
    outputs.extend(gadgets);
    let mut out = c.clone();
    out.steps.retain(|s| !matches!(s, Step::Gate(g) if g.control.is_some()));
    out.outputs = OutputSpec::Records(outputs);
    Ok(out)
}

/// `CS(a, b) = T_a T_b · CX(a,b) · T†_b · CX(a,b)`, and its mirror for `CS†`.
pub fn cs_word(kind: GateKind, a: usize, b: usize) -> Result<Vec<(GateKind, Vec<usize>)>> {
    let (t, tdg) = match kind {
        GateKind::CS => (GateKind::T, GateKind::Tdg),
        GateKind::CSdg => (GateKind::Tdg, GateKind::T),
        other => return Err(Error::contract(format!("{other} is not a controlled-S gate"))),
    };
    Ok(vec![(t, vec![a]), (t, vec![b]), (GateKind::CX, vec![a, b]), (tdg, vec![b]), (GateKind::CX, vec![a, b])])
}

/// Replaces each `CS`/`CS†` by its Clifford+T word. A control on the
/// original gate is copied onto every gate of the word.
pub fn expand_cs(c: &Circuit) -> Result<Circuit> {
    let mut out = c.clone();
    out.steps.clear();
    for step in &c.steps {
        match step {
            Step::Gate(g) if matches!(g.kind, GateKind::CS | GateKind::CSdg) => {
                for (kind, targets) in cs_word(g.kind, g.targets[0], g.targets[1])? {
                    out.steps.push(Step::Gate(Gate { kind, targets, control: g.control.clone() }));
                }
            }
            other => out.steps.push(other.clone()),
        }
    }
    Ok(out)
}

/// Steps turning `|A⟩` on each of `lines` into `|0⟩` (conditionally): a
/// `T` gadget postselected on `-1` (so it applies `T†`, giving `|+⟩`), then
/// `H`. Ancillas are appended after `c`'s lines as new `|A⟩` lines; the
/// returned circuit holds only the fragment, with record names unused by `c`.
pub fn a_to_zero_prefix(c: &Circuit, lines: &[usize]) -> Result<Circuit> {
    if let Some(&l) = lines.iter().find(|&&l| l >= c.num_lines || c.inputs[l] != InputKind::MagicA) {
        return Err(Error::contract(format!("line {l} does not have input A")));
    }
    let mut out = c.clone();
    out.steps.clear();
    out.outputs = OutputSpec::Records(Vec::new());
    let mut counter = 0;
    for &l in lines {
        let a = out.add_line(InputKind::MagicA);
        let record = c.fresh_record("z", &mut counter);
        out.gate(GateKind::CX, &[l, a]);
        out.measure_post(a, record, Sign::Minus);
        out.gate(GateKind::H, &[l]);
    }
    Ok(out)
}

/// Feeds every `|0⟩` line of `c` from `|A⟩` through [`a_to_zero_prefix`],
/// giving a circuit whose inputs are all `|A⟩`.
pub fn apply_a_to_zero(c: &Circuit) -> Result<Circuit> {
    if c.stabilizer_block.is_some() {
        return Err(Error::contract("stabilizer-block inputs cannot be converted from |A⟩"));
    }
    let outputs = outputs_fixed(c)?;
    let zero: Vec<usize> = (0..c.num_lines).filter(|&l| c.inputs[l] == InputKind::Zero).collect();
    let mut base = c.clone();
    for &l in &zero {
        base.inputs[l] = InputKind::MagicA;
    }
    let mut out = a_to_zero_prefix(&base, &zero)?;
    out.steps.extend(c.steps.iter().cloned());
    out.outputs = outputs;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{circuit_unitary, exact_distribution, phase_residual, tvd, StateVector};
    use crate::random::{random_circuit, CircuitShape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn t_free_circuits_pass_through() {
        let mut c = Circuit::new(2);
        c.gate(GateKind::H, &[0]).measure(0, "m");
        assert_eq!(gadgetize(&c).unwrap(), c);
        assert_eq!(gadgetize_postselected(&c).unwrap(), c);
    }

    #[test]
    fn gadget_structure() {
        let mut c = Circuit::new(2);
        c.gate(GateKind::T, &[0]).gate(GateKind::Tdg, &[1]).gate(GateKind::T, &[1]).measure(0, "a");
        let g = gadgetize(&c).unwrap();
        assert_eq!(g.num_lines, 5);
        assert_eq!(g.num_measurements(), 4);
        assert_eq!(g.gates().filter(|x| x.control.is_some()).count(), 4);
        assert!(g.is_clifford_only());
        assert_eq!(gadgetize(&g).unwrap(), g);
        assert!(gadgetize(&{
            let mut d = Circuit::new(1);
            d.measure(0, "m").gate_if(GateKind::T, &[0], ParityControl::on("m"));
            d
        })
        .is_err());
    }

    #[test]
    fn single_t_on_plus() {
        let mut c = Circuit::new(1);
        c.gate(GateKind::H, &[0]).gate(GateKind::T, &[0]).gate(GateKind::H, &[0]).measure(0, "x");
        let g = gadgetize(&c).unwrap();
        let (p, q) = (exact_distribution(&c).unwrap(), exact_distribution(&g).unwrap());
        assert!(tvd(&p, &q) < 1e-12);
        let mut marginal = g.clone();
        marginal.outputs = OutputSpec::Records(vec!["g0".into()]);
        let m = exact_distribution(&marginal).unwrap();
        assert!((m.get("0") - 0.5).abs() < 1e-12 && (m.get("1") - 0.5).abs() < 1e-12);
    }

    /// State of line 0 after the postselected steps, ancillas traced out by
    /// projection.
    fn line0_state(c: &Circuit) -> StateVector {
        let mut s = StateVector::product(&c.inputs);
        for step in &c.steps {
            match step {
                Step::Gate(g) => s.apply_gate(g.kind, &g.targets),
                Step::Measure(m) => {
                    s.project_z(m.line, m.postselect.unwrap().bit());
                    s.normalize();
                }
            }
        }
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 2];
        for (i, a) in s.amplitudes().iter().enumerate() {
            if a.norm() > 1e-12 {
                amps[i & 1] += *a;
            }
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn postselected_gadget_states() {
        let mut c = Circuit::new(1);
        c.gate(GateKind::H, &[0]).gate(GateKind::T, &[0]);
        let g = gadgetize_postselected(&c).unwrap();
        assert!((line0_state(&g).fidelity(&StateVector::magic(1)) - 1.0).abs() < 1e-12);

        let mut c = Circuit::with_inputs(vec![InputKind::MagicA]);
        c.gate(GateKind::Tdg, &[0]);
        let g = gadgetize_postselected(&c).unwrap();
        let mut plus = StateVector::zero(1);
        plus.apply_gate(GateKind::H, &[0]);
        assert!((line0_state(&g).fidelity(&plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn a_to_zero_fragment() {
        let c = Circuit::with_inputs(vec![InputKind::MagicA]);
        let f = a_to_zero_prefix(&c, &[0]).unwrap();
        assert_eq!((f.num_lines, f.num_measurements(), f.gates().count()), (2, 1, 2));
        assert!((line0_state(&f).fidelity(&StateVector::zero(1)) - 1.0).abs() < 1e-12);
        let mut probe = f.clone();
        probe.measure(0, "m");
        probe.outputs = OutputSpec::All;
        let d = exact_distribution(&probe).unwrap();
        assert!((d.weight - 0.5).abs() < 1e-12);
        assert!((d.get("0") - 1.0).abs() < 1e-12);
        assert!(a_to_zero_prefix(&Circuit::new(1), &[0]).is_err());
    }

    #[test]
    fn cs_word_matches_matrix() {
        for kind in [GateKind::CS, GateKind::CSdg] {
            let mut direct = Circuit::new(2);
            direct.gate(kind, &[0, 1]);
            let expanded = expand_cs(&direct).unwrap();
            assert_eq!(expanded.t_count(), 3);
            let r = phase_residual(&circuit_unitary(&direct).unwrap(), &circuit_unitary(&expanded).unwrap());
            assert!(r < 1e-12, "{kind}: residual {r}");
        }
    }

    #[test]
    fn gadgetize_preserves_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let shape = CircuitShape { zero_lines: 2, magic_lines: 0, gates: 8, t_prob: 0.5, control_prob: 0.2, ..Default::default() };
            let c = random_circuit(&mut rng, &shape);
            if c.t_count() > 3 {
                continue;
            }
            let g = gadgetize(&c).unwrap();
            assert!(tvd(&exact_distribution(&c).unwrap(), &exact_distribution(&g).unwrap()) < 1e-12, "{c}");
        }
    }

    #[test]
    fn strip_gives_unitary_clifford() {
        let mut c = Circuit::new(2);
        c.gate(GateKind::H, &[0]).gate(GateKind::T, &[0]).gate(GateKind::CX, &[0, 1]).measure(0, "a").measure(1, "b");
        let s = strip_corrections(&gadgetize(&c).unwrap()).unwrap();
        assert_eq!(s.explicit_outputs().unwrap(), vec!["a", "b", "g0"]);
        let cls = s.normalize_measurements_to_end().unwrap().classify();
        assert!(cls.clifford_only && cls.structure == crate::circuit::Structure::Unitary);
        let mut bad = Circuit::new(1);
        bad.measure(0, "a").gate_if(GateKind::X, &[0], ParityControl::on("a"));
        assert!(strip_corrections(&bad).is_err());
    }
}
