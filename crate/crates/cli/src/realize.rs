//! One seeded run of an adaptive compressed circuit on a dense `|A⟩^t`
//! register.

use std::fmt::Write;

use clifford_magic::dense::StateVector;
use clifford_magic::synth::{AdaptiveDriver, DriverStep};
use clifford_magic::{BasicGate, Circuit, Error, GateKind, InputKind, Result, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcomes below this probability are treated as impossible.
const MIN_PROB: f64 = 1e-14;
const MAX_LINES: usize = 14;

pub struct Run {
    /// Gates and `Z` measurements actually performed.
    pub circuit: Circuit,
    /// One line per step with the outcome obtained.
    pub transcript: String,
    pub measurements: usize,
    pub coins: usize,
    pub output: String,
}

pub fn run(mut driver: AdaptiveDriver, seed: u64) -> Result<Run> {
    let t = driver.num_qubits();
    if t > MAX_LINES {
        return Err(Error::Budget(format!("{t} lines exceed the dense limit of {MAX_LINES}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = StateVector::magic(t);
    let mut circuit = Circuit::with_inputs(vec![InputKind::MagicA; t]);
    let mut transcript = format!("run t={t} seed={seed}\n");
    let (mut measurements, mut coins) = (0, 0);
    loop {
        match driver.next_step()? {
            DriverStep::Measure { gates, postselect } => {
                for g in gates {
                    state.apply_basic(g);
                    match g {
                        BasicGate::H(q) => circuit.gate(GateKind::H, &[q]),
                        BasicGate::S(q) => circuit.gate(GateKind::S, &[q]),
                        BasicGate::CX(a, b) => circuit.gate(GateKind::CX, &[a, b]),
                    };
                }
                let p_one = state.prob_one(0).clamp(0.0, 1.0);
                let record = format!("s{measurements}");
                let bit = match postselect {
                    Some(target) => {
                        let p = if target.bit() { p_one } else { 1.0 - p_one };
                        if p < MIN_PROB {
                            return Err(Error::PostselectionMiss { record });
                        }
                        circuit.measure_post(0, record.as_str(), target);
                        target.bit()
                    }
                    None => {
                        circuit.measure(0, record.as_str());
                        rng.random_bool(p_one)
                    }
                };
                state.project_z(0, bit);
                state.normalize();
                let outcome = Sign::from_bit(bit);
                driver.provide(outcome)?;
                let _ = writeln!(transcript, "measure {record} {outcome}");
                measurements += 1;
            }
            DriverStep::DrawRandom { record } => {
                let outcome = Sign::from_bit(rng.random_bool(0.5));
                driver.provide(outcome)?;
                let _ = writeln!(transcript, "coin {record} {outcome}");
                coins += 1;
            }
            DriverStep::EmitClassical { record, outcome } => {
                let _ = writeln!(transcript, "classical {record} {outcome}");
            }
            DriverStep::Done => break,
        }
    }
    let output: String = driver.output()?.into_iter().map(|s| if s.bit() { '1' } else { '0' }).collect();
    let _ = writeln!(transcript, "output {output}");
    Ok(Run { circuit, transcript, measurements, coins, output })
}
