//! Dense execution of compiled programs on `|A⟩^t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Budget, Distribution, StateVector, PRUNE_THRESHOLD};
use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, Sign};
use crate::pbc::{CompiledProgram, NextAction, PauliBackend, StaticProgram};
use crate::synth::{AdaptiveDriver, DriverStep};

/// Samples Pauli measurements on a dense `|A⟩^t` register.
#[derive(Debug, Clone)]
pub struct DenseBackend {
    state: StateVector,
    rng: ChaCha8Rng,
    /// Number of measurements performed.
    pub calls: usize,
}

impl DenseBackend {
    pub fn new(t: usize, seed: u64) -> Result<Self> {
        Budget::default().check_lines(t)?;
        Ok(DenseBackend { state: StateVector::magic(t), rng: ChaCha8Rng::seed_from_u64(seed), calls: 0 })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

impl PauliBackend for DenseBackend {
    fn measure(&mut self, op: &PauliOperator) -> Result<Sign> {
        if op.num_qubits() != self.state.num_qubits() {
            return Err(Error::Dimension { left: op.num_qubits(), right: self.state.num_qubits() });
        }
        let p_minus = ((1.0 - self.state.expectation(op)) / 2.0).clamp(0.0, 1.0);
        let outcome = Sign::from_bit(self.rng.random_bool(p_minus));
        self.state.project_pauli(op, outcome);
        self.state.normalize();
        self.calls += 1;
        Ok(outcome)
    }
}

/// Live outcomes of a `±1` measurement with `P(-1) = p_minus`, restricted
/// to the postselection target; pruned mass is added to `pruned`.
fn outcomes(p_minus: f64, postselect: Option<Sign>, weight: f64, pruned: &mut f64) -> Vec<(Sign, f64)> {
    let p_minus = p_minus.clamp(0.0, 1.0);
    [(Sign::Plus, 1.0 - p_minus), (Sign::Minus, p_minus)]
        .into_iter()
        .filter(|&(s, _)| postselect.is_none_or(|t| t == s))
        .filter(|&(_, p)| {
            if p < PRUNE_THRESHOLD {
                *pruned += weight * p;
                false
            } else {
                true
            }
        })
        .collect()
}

fn finish(dist: Distribution, pruned: f64) -> Result<Distribution> {
    let mut d = dist.normalized()?;
    d.pruned = pruned;
    Ok(d)
}

fn count_branch(branches: &mut usize, extra: usize, budget: Budget) -> Result<()> {
    *branches += extra;
    if *branches > budget.max_branches {
        return Err(Error::Budget(format!("more than {} branches", budget.max_branches)));
    }
    Ok(())
}

/// Exact output distribution of an interactive program, enumerating every
/// quantum outcome and coin.
pub fn exact_distribution_hybrid(prog: &CompiledProgram) -> Result<Distribution> {
    let budget = Budget::default();
    budget.check_lines(prog.num_magic())?;
    let mut dist = Distribution::new();
    let mut pruned = 0.0;
    let mut branches = 1;
    let mut stack = vec![(prog.clone(), StateVector::magic(prog.num_magic()), 1.0)];
    while let Some((mut p, state, w)) = stack.pop() {
        let action = match p.next_action() {
            Ok(a) => a,
            // A dependent postselection failing on this branch only.
            Err(Error::PostselectionMiss { .. }) => continue,
            Err(e) => return Err(e),
        };
        match action {
            NextAction::Done => dist.add(p.output_bits()?, w * p.forced_weight()),
            NextAction::EmitClassical { .. } => stack.push((p, state, w)),
            NextAction::DrawRandom { .. } => {
                count_branch(&mut branches, 1, budget)?;
                for s in [Sign::Plus, Sign::Minus] {
                    let mut q = p.clone();
                    q.provide(s)?;
                    stack.push((q, state.clone(), w / 2.0));
                }
            }
            NextAction::MeasurePauli { op, postselect } => {
                let p_minus = (1.0 - state.expectation(&op)) / 2.0;
                let live = outcomes(p_minus, postselect, w, &mut pruned);
                count_branch(&mut branches, live.len().saturating_sub(1), budget)?;
                for (s, pr) in live {
                    let mut q = p.clone();
                    q.provide(s)?;
                    let mut st = state.clone();
                    st.project_pauli(&op, s);
                    st.normalize();
                    stack.push((q, st, w * pr));
                }
            }
        }
    }
    finish(dist, pruned)
}

/// Exact distribution of the quantum outcomes of a static program's
/// measurement list on `|A⟩^t`, keyed by the non-postselected outcomes.
pub fn quantum_distribution(prog: &StaticProgram) -> Result<Distribution> {
    let budget = Budget::default();
    budget.check_lines(prog.t)?;
    let mut dist = Distribution::new();
    let mut pruned = 0.0;
    let mut branches = 1;
    let mut stack = vec![(0usize, StateVector::magic(prog.t), 1.0, String::new())];
    while let Some((k, state, w, key)) = stack.pop() {
        let Some(m) = prog.measurements.get(k) else {
            dist.add(key, w);
            continue;
        };
        let p_minus = (1.0 - state.expectation(&m.op)) / 2.0;
        let live = outcomes(p_minus, m.postselect, w, &mut pruned);
        count_branch(&mut branches, live.len().saturating_sub(1), budget)?;
        for (s, pr) in live {
            let mut st = state.clone();
            st.project_pauli(&m.op, s);
            st.normalize();
            let mut key = key.clone();
            if m.postselect.is_none() {
                key.push(if s.bit() { '1' } else { '0' });
            }
            stack.push((k + 1, st, w * pr, key));
        }
    }
    finish(dist, pruned)
}

/// Exact output distribution of a static program.
pub fn exact_distribution_static(prog: &StaticProgram) -> Result<Distribution> {
    prog.push_forward(&quantum_distribution(prog)?)
}

/// Exact output distribution of an adaptive driver, simulating its gates
/// and `Z_0` measurements densely.
pub fn exact_distribution_driver(driver: &AdaptiveDriver) -> Result<Distribution> {
    let budget = Budget::default();
    budget.check_lines(driver.num_qubits())?;
    let mut dist = Distribution::new();
    let mut pruned = 0.0;
    let mut branches = 1;
    let mut stack = vec![(driver.clone(), StateVector::magic(driver.num_qubits()), 1.0)];
    while let Some((mut d, mut state, w)) = stack.pop() {
        let step = match d.next_step() {
            Ok(s) => s,
            Err(Error::PostselectionMiss { .. }) => continue,
            Err(e) => return Err(e),
        };
        match step {
            DriverStep::Done => dist.add(d.program().output_bits()?, w * d.program().forced_weight()),
            DriverStep::EmitClassical { .. } => stack.push((d, state, w)),
            DriverStep::DrawRandom { .. } => {
                count_branch(&mut branches, 1, budget)?;
                for s in [Sign::Plus, Sign::Minus] {
                    let mut e = d.clone();
                    e.provide(s)?;
                    stack.push((e, state.clone(), w / 2.0));
                }
            }
            DriverStep::Measure { gates, postselect } => {
                for g in gates {
                    state.apply_basic(g);
                }
                let live = outcomes(state.prob_one(0), postselect, w, &mut pruned);
                count_branch(&mut branches, live.len().saturating_sub(1), budget)?;
                for (s, pr) in live {
                    let mut e = d.clone();
                    e.provide(s)?;
                    let mut st = state.clone();
                    st.project_z(0, s.bit());
                    st.normalize();
                    stack.push((e, st, w * pr));
                }
            }
        }
    }
    finish(dist, pruned)
}
