use num_complex::Complex64;

use super::{Budget, Distribution, StateVector, PRUNE_THRESHOLD};
use crate::circuit::{Circuit, Step};
use crate::error::{Error, Result};

fn initial_state(c: &Circuit) -> Result<StateVector> {
    match &c.stabilizer_block {
        Some(gens) => StateVector::with_stabilizer_block(&c.inputs, gens),
        None => Ok(StateVector::product(&c.inputs)),
    }
}

struct Branch {
    step: usize,
    state: StateVector,
    weight: f64,
    bits: Vec<bool>,
}

pub fn exact_distribution(c: &Circuit) -> Result<Distribution> {
    exact_distribution_with(c, Budget::default())
}

/// Enumerates every measurement branch and renormalizes over postselection.
pub fn exact_distribution_with(c: &Circuit, budget: Budget) -> Result<Distribution> {
    c.validate()?;
    budget.check_lines(c.num_lines)?;
    let index = c.record_index();
    let outputs = c.output_records()?;
    let controls: Vec<Option<Vec<usize>>> = c
        .steps
        .iter()
        .map(|s| match s {
            Step::Gate(g) => g.control.as_ref().map(|ctl| ctl.records.iter().map(|r| index[r.as_str()]).collect()),
            Step::Measure(_) => None,
        })
        .collect();
    let mut dist = Distribution::new();
    let mut pruned = 0.0;
    let mut branches = 1usize;
    let mut stack = vec![Branch { step: 0, state: initial_state(c)?, weight: 1.0, bits: Vec::new() }];
    while let Some(mut b) = stack.pop() {
        loop {
            if b.step == c.steps.len() {
                let key: String = outputs.iter().map(|&i| if b.bits[i] { '1' } else { '0' }).collect();
                dist.add(key, b.weight);
                break;
            }
            match &c.steps[b.step] {
                Step::Gate(g) => {
                    let fire = match (&g.control, &controls[b.step]) {
                        (Some(ctl), Some(idx)) => ctl.fires(idx.iter().map(|&i| b.bits[i])),
                        _ => true,
                    };
                    if fire {
                        b.state.apply_gate(g.kind, &g.targets);
                    }
                    b.step += 1;
                }
                Step::Measure(m) => {
                    let p1 = b.state.prob_one(m.line).clamp(0.0, 1.0);
                    let options: Vec<(bool, f64)> = match m.postselect {
                        Some(target) => vec![(target.bit(), if target.bit() { p1 } else { 1.0 - p1 })],
                        None => vec![(false, 1.0 - p1), (true, p1)],
                    };
                    let live: Vec<(bool, f64)> = options
                        .into_iter()
                        .filter(|&(_, p)| {
                            if p < PRUNE_THRESHOLD {
                                pruned += b.weight * p.max(0.0);
                                false
                            } else {
                                true
                            }
                        })
                        .collect();
                    if live.is_empty() {
                        break;
                    }
                    branches += live.len() - 1;
                    if branches > budget.max_branches {
                        return Err(Error::Budget(format!("more than {} measurement branches", budget.max_branches)));
                    }
                    let step = b.step + 1;
                    let mut rest = live.into_iter();
                    let (bit0, p0) = rest.next().expect("at least one live branch");
                    for (bit, p) in rest {
                        let mut s = b.state.clone();
                        s.project_z(m.line, bit);
                        s.normalize();
                        let mut bits = b.bits.clone();
                        bits.push(bit);
                        stack.push(Branch { step, state: s, weight: b.weight * p, bits });
                    }
                    b.state.project_z(m.line, bit0);
                    b.state.normalize();
                    b.bits.push(bit0);
                    b.weight *= p0;
                    b.step = step;
                }
            }
        }
    }
    let total = dist.total();
    if total <= 1e-12 {
        let record = c
            .measurements()
            .find(|m| m.postselect.is_some())
            .map_or_else(|| "(none)".to_string(), |m| m.record.clone());
        return Err(Error::ProbabilityZero { record });
    }
    let mut dist = dist.normalized()?;
    dist.pruned = pruned;
    Ok(dist)
}

/// The unitary of a measurement-free, uncontrolled circuit, ignoring inputs.
/// Entry `[row][col]` maps basis state `col` to `row`.
pub fn circuit_unitary(c: &Circuit) -> Result<Vec<Vec<Complex64>>> {
    if c.measurements().next().is_some() || c.is_controlled() {
        return Err(Error::contract("circuit is not unitary"));
    }
    Budget::default().check_lines(c.num_lines)?;
    let d = 1usize << c.num_lines;
    let mut u = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for col in 0..d {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[col] = Complex64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps)?;
        for g in c.gates() {
            s.apply_gate(g.kind, &g.targets);
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[row][col] = *a;
        }
    }
    Ok(u)
}

/// `min_φ ‖U − e^{iφ} V‖_F`.
pub fn phase_residual(u: &[Vec<Complex64>], v: &[Vec<Complex64>]) -> f64 {
    let tr: Complex64 = u.iter().zip(v).flat_map(|(ru, rv)| ru.iter().zip(rv).map(|(a, b)| b.conj() * a)).sum();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { Complex64::new(1.0, 0.0) };
    u.iter().zip(v).flat_map(|(ru, rv)| ru.iter().zip(rv).map(move |(a, b)| (a - phase * b).norm_sqr())).sum::<f64>().sqrt()
}

pub fn unitary_equal_up_to_phase(c1: &Circuit, c2: &Circuit) -> Result<bool> {
    if c1.num_lines != c2.num_lines {
        return Err(Error::Dimension { left: c1.num_lines, right: c2.num_lines });
    }
    Ok(phase_residual(&circuit_unitary(c1)?, &circuit_unitary(c2)?) <= 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, InputKind, ParityControl};
    use crate::pauli::Sign;

    #[test]
    fn basic_distributions() {
        let mut c = Circuit::with_inputs(vec![InputKind::MagicA]);
        c.measure(0, "m");
        let d = exact_distribution(&c).unwrap();
        assert!((d.get("0") - 0.5).abs() < 1e-15 && (d.get("1") - 0.5).abs() < 1e-15);

        let mut c = Circuit::new(1);
        c.gate(GateKind::H, &[0]).measure(0, "m");
        let d = exact_distribution(&c).unwrap();
        assert!((d.get("0") - 0.5).abs() < 1e-15);

        let mut c = Circuit::new(3);
        c.gate(GateKind::H, &[0]).gate(GateKind::CX, &[0, 1]).gate(GateKind::CX, &[1, 2]);
        c.measure(0, "a").measure(1, "b").measure(2, "c");
        let d = exact_distribution(&c).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.get("000") - 0.5).abs() < 1e-12 && (d.get("111") - 0.5).abs() < 1e-12);
    }

    #[test]
    fn controls_and_postselection() {
        // Teleport-like reset: measure, then flip back if the outcome was -1.
        let mut c = Circuit::new(1);
        c.gate(GateKind::H, &[0]).measure(0, "a").gate_if(GateKind::X, &[0], ParityControl::on("a")).measure(0, "b");
        c.outputs = crate::circuit::OutputSpec::Records(vec!["b".into()]);
        assert!((exact_distribution(&c).unwrap().get("0") - 1.0).abs() < 1e-12);

        let mut c = Circuit::new(2);
        c.gate(GateKind::H, &[0]).gate(GateKind::CX, &[0, 1]).measure_post(0, "p", Sign::Minus).measure(1, "x");
        let d = exact_distribution(&c).unwrap();
        assert!((d.get("1") - 1.0).abs() < 1e-12);
        assert!((d.weight - 0.5).abs() < 1e-12);

        let mut c = Circuit::new(1);
        c.measure_post(0, "p", Sign::Minus);
        assert!(matches!(exact_distribution(&c), Err(Error::ProbabilityZero { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let c = Circuit::new(15);
        assert!(matches!(exact_distribution(&c), Err(Error::Budget(_))));
        let mut c = Circuit::new(4);
        for q in 0..4 {
            c.gate(GateKind::H, &[q]);
        }
        for q in 0..4 {
            c.measure(q, format!("m{q}"));
        }
        let tight = Budget { max_lines: 14, max_branches: 8 };
        assert!(matches!(exact_distribution_with(&c, tight), Err(Error::Budget(_))));
    }

    #[test]
    fn global_phase_is_ignored() {
        let mut a = Circuit::new(1);
        a.gate(GateKind::H, &[0]);
        let mut b = a.clone();
        b.gate(GateKind::Z, &[0]).gate(GateKind::X, &[0]).gate(GateKind::Z, &[0]).gate(GateKind::X, &[0]);
        assert!(unitary_equal_up_to_phase(&a, &a).unwrap());
        assert!(unitary_equal_up_to_phase(&a, &b).unwrap());
        let mut hsh = Circuit::new(1);
        hsh.gate(GateKind::H, &[0]).gate(GateKind::S, &[0]).gate(GateKind::H, &[0]);
        let mut sx = Circuit::new(1);
        sx.gate(GateKind::SqrtX, &[0]);
        assert!(unitary_equal_up_to_phase(&hsh, &sx).unwrap());
        assert!(!unitary_equal_up_to_phase(&hsh, &a).unwrap());
        let mut m = Circuit::new(1);
        m.measure(0, "x");
        assert!(unitary_equal_up_to_phase(&m, &a).is_err());
    }
}
