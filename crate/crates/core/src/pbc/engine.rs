use std::collections::HashMap;
use std::sync::Arc;

use super::static_program::{AffineSign, RecordKind, StaticMeasurement, StaticProgram, StaticRecord};
use super::{NextAction, SignForm};
use crate::bits::BitSet;
use crate::circuit::{Circuit, InputKind, Step};
use crate::error::{Error, Result};
use crate::pauli::{
    conjugate_by_v_unchecked, product_of, restrict, DependenceBasis, MeasurementKind, PauliOperator, RecordedMeasurement, Sign,
};
use crate::tableau::{inverse_word, BasicGate, StabilizerTableau};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Interactive,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    /// Outcome of the `k`-th quantum measurement.
    Quantum(usize),
    /// The `j`-th coin.
    Coin(usize),
}

#[derive(Debug, Clone)]
struct Var {
    kind: VarKind,
    value: Option<Sign>,
}

/// The frame `C` with symbolic signs: row `q` is `(∏ vars) · op`.
#[derive(Debug, Clone)]
struct Frame {
    tab: StabilizerTableau,
    stab_vars: Vec<BitSet>,
    destab_vars: Vec<BitSet>,
}

impl Frame {
    fn identity(n: usize) -> Self {
        Frame { tab: StabilizerTableau::identity(n), stab_vars: vec![BitSet::new(); n], destab_vars: vec![BitSet::new(); n] }
    }

    fn image(&self, p: &PauliOperator) -> (PauliOperator, BitSet) {
        let op = self.tab.image(p).expect("frame rows stay a valid tableau");
        let mut vars = BitSet::new();
        for q in 0..self.tab.num_qubits() {
            if p.x_bit(q) {
                vars.xor_with(&self.destab_vars[q]);
            }
            if p.z_bit(q) {
                vars.xor_with(&self.stab_vars[q]);
            }
        }
        (op, vars)
    }

    /// `C ← C g†`.
    fn prepend_inverse(&mut self, g: BasicGate) {
        let n = self.tab.num_qubits();
        let mut updates = Vec::new();
        for q in g.qubits() {
            let mut z = PauliOperator::z(n, q);
            let mut x = PauliOperator::x(n, q);
            crate::tableau::conjugate_basic(&mut z, g, true);
            crate::tableau::conjugate_basic(&mut x, g, true);
            updates.push((q, self.image(&z), self.image(&x)));
        }
        let (stab, destab) = self.tab.rows_mut();
        for (q, (zs, zv), (xs, xv)) in updates {
            stab[q] = zs;
            destab[q] = xs;
            self.stab_vars[q] = zv;
            self.destab_vars[q] = xv;
        }
    }

    /// Every row `R` becomes `V R V` for `V = (N + λ P)/√2`, where
    /// `λ = lam_const · ∏ lam_vars`.
    fn absorb_v(&mut self, n_op: &PauliOperator, p_op: &PauliOperator, lam_const: Sign, lam_vars: &BitSet) {
        let (stab, destab) = self.tab.rows_mut();
        for (row, vars) in stab.iter_mut().zip(self.stab_vars.iter_mut()).chain(destab.iter_mut().zip(self.destab_vars.iter_mut())) {
            match (row.anticommutes_unchecked(n_op), row.anticommutes_unchecked(p_op)) {
                (false, false) => {}
                (true, true) => row.negate(),
                _ => {
                    *row = conjugate_by_v_unchecked(row, n_op, lam_const, p_op);
                    vars.xor_with(lam_vars);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct HistoryEntry {
    op: PauliOperator,
    vars: BitSet,
    kind: MeasurementKind,
}

#[derive(Debug, Clone)]
struct RecordState {
    kind: RecordKind,
    operator: PauliOperator,
    value: SignForm,
}

#[derive(Debug, Clone)]
enum Pending {
    Quantum { var: usize, postselect: Option<Sign> },
    Coin { var: usize },
}

/// Data shared between clones of a program.
#[derive(Debug)]
struct Plan {
    steps: Vec<Step>,
    ids: Vec<String>,
    /// Lowered gate words on virtual qubits, `None` for measurements.
    words: Vec<Option<Vec<BasicGate>>>,
    /// Record indices of each step's parity control.
    controls: Vec<Option<Vec<usize>>>,
    /// Virtual qubit of each line: `|0⟩` lines first, then magic lines.
    line_map: Vec<usize>,
    outputs: Vec<usize>,
}

/// An interactive Pauli-based program compiled from a Clifford circuit.
///
/// Call [`next_action`](Self::next_action) repeatedly, answering
/// `MeasurePauli` and `DrawRandom` with [`provide`](Self::provide), until it
/// returns `Done`; then read [`output`](Self::output). Cloning is cheap
/// enough to branch a run.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    plan: Arc<Plan>,
    mode: Mode,
    n: usize,
    t: usize,
    frame: Frame,
    history: Vec<HistoryEntry>,
    basis: DependenceBasis,
    vars: Vec<Var>,
    records: Vec<RecordState>,
    quantum_ops: Vec<PauliOperator>,
    quantum_post: Vec<Option<Sign>>,
    coins: usize,
    /// Postselections fixed in the coin position, each of probability ½.
    forced: usize,
    step: usize,
    pending: Option<(Pending, NextAction)>,
    /// No coin drawn and no unpostselected quantum outcome seen yet.
    branch_free: bool,
    done: bool,
}

impl CompiledProgram {
    pub(crate) fn new(c: &Circuit, mode: Mode) -> Result<Self> {
        c.validate()?;
        if let Some(g) = c.gates().find(|g| !g.kind.is_clifford()) {
            return Err(Error::contract(format!("{} is not Clifford; gadgetize the circuit first", g.kind)));
        }
        if mode == Mode::Static && c.is_controlled() {
            return Err(Error::contract("static compilation needs a circuit without controls"));
        }
        let zero: Vec<usize> = (0..c.num_lines).filter(|&l| c.inputs[l] == InputKind::Zero).collect();
        let magic: Vec<usize> = (0..c.num_lines).filter(|&l| c.inputs[l] == InputKind::MagicA).collect();
        let (n, t) = (zero.len(), magic.len());
        let mut line_map = vec![0; c.num_lines];
        for (v, &l) in zero.iter().chain(&magic).enumerate() {
            line_map[l] = v;
        }
        let index = c.record_index();
        let mut words = Vec::with_capacity(c.steps.len());
        let mut controls = Vec::with_capacity(c.steps.len());
        for s in &c.steps {
            match s {
                Step::Gate(g) => {
                    let targets: Vec<usize> = g.targets.iter().map(|&l| line_map[l]).collect();
                    words.push(Some(g.kind.basic_word(&targets)?));
                    controls.push(g.control.as_ref().map(|ctl| ctl.records.iter().map(|r| index[r.as_str()]).collect()));
                }
                Step::Measure(_) => {
                    words.push(None);
                    controls.push(None);
                }
            }
        }
        let plan = Plan {
            steps: c.steps.clone(),
            ids: c.record_ids().into_iter().map(String::from).collect(),
            words,
            controls,
            line_map,
            outputs: c.output_records()?,
        };
        let total = n + t;
        let mut prog = CompiledProgram {
            plan: Arc::new(plan),
            mode,
            n,
            t,
            frame: Frame::identity(total),
            history: Vec::new(),
            basis: DependenceBasis::new(total),
            vars: Vec::new(),
            records: Vec::new(),
            quantum_ops: Vec::new(),
            quantum_post: Vec::new(),
            coins: 0,
            forced: 0,
            step: 0,
            pending: None,
            branch_free: true,
            done: false,
        };
        for q in 0..n {
            let z = PauliOperator::z(total, q);
            prog.basis.insert(&z)?;
            prog.history.push(HistoryEntry { op: z, vars: BitSet::new(), kind: MeasurementKind::Dummy });
        }
        if let Some(block) = &c.stabilizer_block {
            // Lines 0..m are |0⟩ lines, hence virtual qubits 0..m.
            let u = crate::synth::synthesize(block)?;
            for g in inverse_word(&u) {
                prog.frame.prepend_inverse(g);
            }
        }
        Ok(prog)
    }

    /// Number of `|0⟩` lines (the stabilizer part of the register).
    pub fn num_stabilizer(&self) -> usize {
        self.n
    }

    /// Number of magic lines, the width of every emitted measurement.
    pub fn num_magic(&self) -> usize {
        self.t
    }

    /// Quantum measurements emitted so far, with their compile-time signs.
    pub fn quantum_operators(&self) -> &[PauliOperator] {
        &self.quantum_ops
    }

    pub fn num_coins(&self) -> usize {
        self.coins
    }

    /// Probability of the postselections met so far in the coin position.
    pub fn forced_weight(&self) -> f64 {
        0.5f64.powi(self.forced as i32)
    }

    pub fn record_ids(&self) -> &[String] {
        &self.plan.ids
    }

    /// The records processed so far, with the operator that was effectively
    /// measured on the initial state and its outcome (`+1` while unknown).
    pub fn records(&self) -> Vec<RecordedMeasurement> {
        self.records
            .iter()
            .map(|r| {
                let kind = match r.kind {
                    RecordKind::Quantum => MeasurementKind::Quantum,
                    RecordKind::Classical => MeasurementKind::ClassicalDependent,
                    RecordKind::Random | RecordKind::Forced => MeasurementKind::RandomLambda,
                };
                RecordedMeasurement::new(r.operator.clone(), self.eval_form(&r.value).unwrap_or(Sign::Plus), kind)
            })
            .collect()
    }

    /// The stabilizers of the virtual state: dummies `Z_q` on the `|0⟩`
    /// lines followed by one entry per quantum measurement.
    pub fn history(&self) -> Vec<RecordedMeasurement> {
        self.history
            .iter()
            .map(|h| RecordedMeasurement::new(h.op.clone(), self.eval(&h.vars).unwrap_or(Sign::Plus), h.kind))
            .collect()
    }

    fn eval(&self, vars: &BitSet) -> Option<Sign> {
        vars.iter().try_fold(Sign::Plus, |acc, v| self.vars[v].value.map(|s| acc * s))
    }

    fn eval_form(&self, f: &SignForm) -> Option<Sign> {
        self.eval(&f.vars).map(|s| s * f.constant)
    }

    fn new_var(&mut self, kind: VarKind) -> usize {
        self.vars.push(Var { kind, value: None });
        self.vars.len() - 1
    }

    fn miss(&self, record: usize) -> Error {
        let record = self.plan.ids[record].clone();
        if self.branch_free {
            Error::ProbabilityZero { record }
        } else {
            Error::PostselectionMiss { record }
        }
    }

    pub fn next_action(&mut self) -> Result<NextAction> {
        if let Some((_, action)) = &self.pending {
            return Ok(action.clone());
        }
        while self.step < self.plan.steps.len() {
            let i = self.step;
            self.step += 1;
            let plan = Arc::clone(&self.plan);
            match &plan.steps[i] {
                Step::Gate(g) => {
                    let fire = match (&g.control, &plan.controls[i]) {
                        (Some(ctl), Some(idx)) => {
                            let bits = idx
                                .iter()
                                .map(|&r| self.eval_form(&self.records[r].value).map(Sign::bit))
                                .collect::<Option<Vec<bool>>>()
                                .ok_or_else(|| Error::contract("control depends on an unresolved record"))?;
                            ctl.fires(bits)
                        }
                        _ => true,
                    };
                    if fire {
                        for &b in plan.words[i].as_ref().expect("gate step has a word") {
                            self.frame.prepend_inverse(b);
                        }
                    }
                }
                Step::Measure(m) => {
                    if let Some(action) = self.measure(plan.line_map[m.line], m.postselect)? {
                        return Ok(action);
                    }
                }
            }
        }
        self.done = true;
        Ok(NextAction::Done)
    }

    /// Processes one measurement of `Z` on virtual qubit `vq`.
    fn measure(&mut self, vq: usize, postselect: Option<Sign>) -> Result<Option<NextAction>> {
        let rec = self.records.len();
        let id = self.plan.ids[rec].clone();
        let (op, m_vars) = (self.frame.tab.stab_rows()[vq].clone(), self.frame.stab_vars[vq].clone());
        let sigma = self.eval(&m_vars);

        if let Some(h) = self.history.iter().position(|e| e.op.anticommutes_unchecked(&op)) {
            let (lambda, kind, pending) = match postselect {
                Some(target) => {
                    let s = sigma.ok_or_else(|| Error::contract(format!("postselected record {id} has a coin-dependent sign")))?;
                    self.forced += 1;
                    (SignForm::constant(target * s), RecordKind::Forced, None)
                }
                None => {
                    let v = self.new_var(VarKind::Coin(self.coins));
                    self.coins += 1;
                    (SignForm::var(v), RecordKind::Random, Some(v))
                }
            };
            let entry = &self.history[h];
            let mut lam_vars = entry.vars.clone();
            lam_vars.xor_with(&lambda.vars);
            let n_op = entry.op.clone();
            self.frame.absorb_v(&n_op, &op, lambda.constant, &lam_vars);
            self.records.push(RecordState { kind, operator: op, value: lambda.times_vars(&m_vars) });
            if let Some(var) = pending {
                self.branch_free = false;
                if self.mode == Mode::Interactive {
                    let action = NextAction::DrawRandom { record: id };
                    self.pending = Some((Pending::Coin { var }, action.clone()));
                    return Ok(Some(action));
                }
            }
            return Ok(None);
        }

        if let Some(idx) = self.basis.query(&op)? {
            let prod = product_of(op.num_qubits(), &self.history.iter().map(|h| &h.op).collect::<Vec<_>>(), &idx)?;
            let mut value = SignForm::constant(op.sign() * prod.sign()).times_vars(&m_vars);
            for &k in &idx {
                value.vars.xor_with(&self.history[k].vars);
            }
            let outcome = self.eval_form(&value);
            if let Some(target) = postselect {
                match outcome {
                    Some(o) if o != target => return Err(self.miss(rec)),
                    Some(_) => {}
                    None => return Err(Error::contract(format!("postselected record {id} has a coin-dependent value"))),
                }
            }
            self.records.push(RecordState { kind: RecordKind::Classical, operator: op, value });
            return Ok(match (self.mode, outcome) {
                (Mode::Interactive, Some(outcome)) => Some(NextAction::EmitClassical { record: id, outcome }),
                _ => None,
            });
        }

        let e = restrict(&op, self.n)?;
        let k = self.quantum_ops.len();
        if k >= self.t {
            return Err(Error::contract("more independent measurements than magic qubits"));
        }
        let var = self.new_var(VarKind::Quantum(k));
        self.basis.insert(&op)?;
        self.history.push(HistoryEntry { op: op.clone(), vars: BitSet::singleton(var), kind: MeasurementKind::Quantum });
        self.records.push(RecordState { kind: RecordKind::Quantum, operator: op, value: SignForm::var(var).times_vars(&m_vars) });
        // The emitted operator carries only its compile-time sign; the
        // symbolic part of the sign moves into the record and the target.
        let e_post = match postselect {
            Some(target) => Some(
                target * sigma.ok_or_else(|| Error::contract(format!("postselected record {id} has a coin-dependent sign")))?,
            ),
            None => {
                self.branch_free = false;
                None
            }
        };
        self.quantum_ops.push(e.clone());
        self.quantum_post.push(e_post);
        match self.mode {
            Mode::Interactive => {
                let action = NextAction::MeasurePauli { op: e, postselect: e_post };
                self.pending = Some((Pending::Quantum { var, postselect: e_post }, action.clone()));
                Ok(Some(action))
            }
            Mode::Static => {
                if let Some(s) = e_post {
                    self.vars[var].value = Some(s);
                }
                Ok(None)
            }
        }
    }

    /// Answers the pending `MeasurePauli` (outcome of the emitted operator)
    /// or `DrawRandom` (the coin's sign).
    pub fn provide(&mut self, value: Sign) -> Result<()> {
        let (pending, _) = self.pending.take().ok_or_else(|| Error::contract("no measurement or coin is pending"))?;
        match pending {
            Pending::Quantum { var, postselect } => {
                if postselect.is_some_and(|s| s != value) {
                    self.pending = None;
                    let rec = self.records.len() - 1;
                    return Err(Error::PostselectionMiss { record: self.plan.ids[rec].clone() });
                }
                self.vars[var].value = Some(value);
            }
            Pending::Coin { var } => self.vars[var].value = Some(value),
        }
        Ok(())
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// The output sample, one sign per output record.
    pub fn output(&self) -> Result<Vec<Sign>> {
        if !self.done {
            return Err(Error::contract("program has not finished"));
        }
        self.plan
            .outputs
            .iter()
            .map(|&r| self.eval_form(&self.records[r].value).ok_or_else(|| Error::Unresolved { record: self.plan.ids[r].clone() }))
            .collect()
    }

    /// `'0'`/`'1'` key of the output sample (`-1 ↦ 1`).
    pub fn output_bits(&self) -> Result<String> {
        Ok(self.output()?.into_iter().map(|s| if s.bit() { '1' } else { '0' }).collect())
    }

    pub(crate) fn run_static(&mut self) -> Result<StaticProgram> {
        debug_assert_eq!(self.mode, Mode::Static);
        match self.next_action()? {
            NextAction::Done => {}
            other => return Err(Error::contract(format!("static run stopped at {other:?}"))),
        }
        let mut qmap = HashMap::new();
        let mut cmap = HashMap::new();
        for (v, var) in self.vars.iter().enumerate() {
            match var.kind {
                VarKind::Quantum(k) => qmap.insert(v, k),
                VarKind::Coin(j) => cmap.insert(v, j),
            };
        }
        let records = self
            .records
            .iter()
            .zip(&self.plan.ids)
            .map(|(r, id)| {
                let mut value = AffineSign { constant: r.value.constant, quantum: Vec::new(), coins: Vec::new() };
                for v in r.value.vars.iter() {
                    match (qmap.get(&v), cmap.get(&v)) {
                        (Some(&k), _) => value.quantum.push(k),
                        (_, Some(&j)) => value.coins.push(j),
                        _ => unreachable!("every variable is a quantum outcome or a coin"),
                    }
                }
                value.quantum.sort_unstable();
                value.coins.sort_unstable();
                StaticRecord { id: id.clone(), kind: r.kind, value }
            })
            .collect();
        let measurements = self
            .quantum_ops
            .iter()
            .zip(&self.quantum_post)
            .map(|(op, &postselect)| StaticMeasurement { op: op.clone(), postselect })
            .collect();
        let prog = StaticProgram { t: self.t, measurements, coins: self.coins, records, outputs: self.plan.outputs.clone() };
        prog.check()?;
        Ok(prog)
    }
}
