//! Parameterized circuit families, their T/T† expansion, and checks on
//! how the expansion acts on the parameters.
//!
//! Every instance is built from a seed: the seed fixes the parameter record
//! `theta`, and `theta` alone fixes the circuit. Circuits come out in
//! lowered form, with `T` and `T†` as the only non-Clifford gates.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, GateKind, Step};
use crate::dense::{exact_distribution, unitary_equal_up_to_phase, Budget, Distribution, StateVector};
use crate::error::{Error, Result};
use crate::gadgets::{cs_word, gadgetize, strip_corrections};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassId {
    IqpIsing,
    SparseIqp,
    Rcs,
    ConjugatedClifford,
}

impl ClassId {
    pub const ALL: [ClassId; 4] = [ClassId::IqpIsing, ClassId::SparseIqp, ClassId::Rcs, ClassId::ConjugatedClifford];

    pub fn name(self) -> &'static str {
        match self {
            ClassId::IqpIsing => "iqp-ising",
            ClassId::SparseIqp => "sparse-iqp",
            ClassId::Rcs => "rcs",
            ClassId::ConjugatedClifford => "conjugated-clifford",
        }
    }

    /// Accepts `conjugated` as a short form.
    pub fn from_name(s: &str) -> Option<ClassId> {
        match s {
            "conjugated" => Some(ClassId::ConjugatedClifford),
            _ => ClassId::ALL.into_iter().find(|c| c.name() == s),
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Powers of `T` on each line and of `CS` on each pair `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IqpParams {
    pub n: usize,
    /// `v[i] ∈ 0..8`.
    pub v: Vec<u8>,
    /// `w[pair_index(n, i, j)] ∈ 0..4`, pairs in lexicographic order.
    pub w: Vec<u8>,
}

impl IqpParams {
    pub fn zero(n: usize) -> Self {
        IqpParams { n, v: vec![0; n], w: vec![0; n * n.saturating_sub(1) / 2] }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub fn w_at(&self, i: usize, j: usize) -> u8 {
        self.w[pair_index(self.n, i, j)]
    }

    /// Phase of `|x⟩` in units of `π/4`, modulo 8.
    pub fn phase(&self, x: usize) -> u8 {
        let bit = |i: usize| (x >> i & 1) as u32;
        let lin: u32 = (0..self.n).map(|i| self.v[i] as u32 * bit(i)).sum();
        let quad: u32 = self.pairs().map(|(i, j)| 2 * self.w_at(i, j) as u32 * bit(i) * bit(j)).sum();
        ((lin + quad) % 8) as u8
    }

    fn num_two_qubit(&self) -> usize {
        self.w.iter().filter(|&&w| w != 0).count()
    }
}

/// Index of the pair `(i, j)`, `i < j`, in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// The random-circuit gate set, closed under inverses.
pub const RCS_GATES: [GateKind; 7] =
    [GateKind::CZ, GateKind::SqrtX, GateKind::SqrtXdg, GateKind::SqrtY, GateKind::SqrtYdg, GateKind::T, GateKind::Tdg];

/// One gate choice on a pair of neighbouring lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RcsChoice {
    pub gate: GateKind,
    /// For single-qubit gates, 0 puts the gate on the first line of the pair
    /// and 1 on the second.
    pub slot: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Theta {
    Iqp(IqpParams),
    SparseIqp { p: f64, params: IqpParams },
    Rcs { n: usize, layers: Vec<Vec<RcsChoice>> },
    Conjugated { n: usize, v_word: Vec<GateKind>, u: Vec<(GateKind, Vec<usize>)> },
}

impl Theta {
    pub fn num_lines(&self) -> usize {
        match self {
            Theta::Iqp(p) | Theta::SparseIqp { params: p, .. } => p.n,
            Theta::Rcs { n, .. } | Theta::Conjugated { n, .. } => *n,
        }
    }

    pub fn iqp(&self) -> Option<&IqpParams> {
        match self {
            Theta::Iqp(p) | Theta::SparseIqp { params: p, .. } => Some(p),
            _ => None,
        }
    }

    /// The lowered circuit this parameter record denotes.
    pub fn circuit(&self) -> Result<Circuit> {
        match self {
            Theta::Iqp(p) | Theta::SparseIqp { params: p, .. } => iqp_circuit(p),
            Theta::Rcs { n, layers } => rcs_circuit(*n, layers),
            Theta::Conjugated { n, v_word, u } => conjugated_circuit(*n, v_word, u),
        }
    }
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "-".to_string()
    } else {
        v.join(sep)
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let iqp = |f: &mut fmt::Formatter<'_>, p: &IqpParams| write!(f, "v={} w={}", join(&p.v, ","), join(&p.w, ","));
        match self {
            Theta::Iqp(p) => iqp(f, p),
            Theta::SparseIqp { p, params } => {
                write!(f, "p={p} ")?;
                iqp(f, params)
            }
            Theta::Rcs { layers, .. } => {
                let layer = |l: &Vec<RcsChoice>| {
                    join(l.iter().map(|c| if c.gate.arity() == 2 { c.gate.to_string() } else { format!("{}@{}", c.gate, c.slot) }), ",")
                };
                write!(f, "layers={}", join(layers.iter().map(layer), ";"))
            }
            Theta::Conjugated { v_word, u, .. } => {
                let gate = |(k, t): &(GateKind, Vec<usize>)| format!("{k}@{}", join(t, "-"));
                write!(f, "v_word={} u={}", join(v_word, ","), join(u.iter().map(gate), ","))
            }
        }
    }
}

/// Which family to draw from, with its size parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassSpec {
    IqpIsing { n: usize },
    SparseIqp { n: usize, p: f64 },
    Rcs { n: usize, depth: usize },
    /// `u_len` random gates from `{H, S, CX}` between `V` and `V†`.
    Conjugated { n: usize, v_word: Vec<GateKind>, u_len: usize },
}

impl ClassSpec {
    pub fn class_id(&self) -> ClassId {
        match self {
            ClassSpec::IqpIsing { .. } => ClassId::IqpIsing,
            ClassSpec::SparseIqp { .. } => ClassId::SparseIqp,
            ClassSpec::Rcs { .. } => ClassId::Rcs,
            ClassSpec::Conjugated { .. } => ClassId::ConjugatedClifford,
        }
    }

    pub fn num_lines(&self) -> usize {
        match self {
            ClassSpec::IqpIsing { n } | ClassSpec::SparseIqp { n, .. } | ClassSpec::Rcs { n, .. } | ClassSpec::Conjugated { n, .. } => *n,
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            ClassSpec::IqpIsing { n } | ClassSpec::SparseIqp { n, .. } | ClassSpec::Conjugated { n, .. } if *n == 0 => {
                Err(Error::contract("a class instance needs at least one line"))
            }
            ClassSpec::SparseIqp { p, .. } if !(0.0..=1.0).contains(p) => {
                Err(Error::contract(format!("sparsity {p} is outside [0, 1]")))
            }
            ClassSpec::Rcs { n, depth } if *n < 2 || *depth == 0 => {
                Err(Error::contract(format!("random circuits need n ≥ 2 and depth ≥ 1, got n={n} depth={depth}")))
            }
            ClassSpec::Conjugated { v_word, .. } => match v_word.iter().find(|k| k.arity() != 1) {
                Some(k) => Err(Error::contract(format!("V must be a single-qubit word, found {k}"))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Draws a parameter record from the class distribution.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Theta> {
        self.check()?;
        Ok(match self {
            ClassSpec::IqpIsing { n } => Theta::Iqp(sample_iqp(*n, 1.0, rng)),
            ClassSpec::SparseIqp { n, p } => Theta::SparseIqp { p: *p, params: sample_iqp(*n, *p, rng) },
            ClassSpec::Rcs { n, depth } => Theta::Rcs {
                n: *n,
                layers: (0..*depth)
                    .map(|l| {
                        (l % 2..n - 1)
                            .step_by(2)
                            .map(|_| RcsChoice { gate: RCS_GATES[rng.random_range(0..RCS_GATES.len())], slot: rng.random_range(0..2) })
                            .collect()
                    })
                    .collect(),
            },
            ClassSpec::Conjugated { n, v_word, u_len } => {
                let u = (0..*u_len)
                    .map(|_| match (rng.random_range(0..3), *n) {
                        (2, n) if n >= 2 => {
                            let a = rng.random_range(0..n);
                            (GateKind::CX, vec![a, (a + rng.random_range(1..n)) % n])
                        }
                        (0, n) | (2, n) => (GateKind::H, vec![rng.random_range(0..n)]),
                        (_, n) => (GateKind::S, vec![rng.random_range(0..n)]),
                    })
                    .collect();
                Theta::Conjugated { n: *n, v_word: v_word.clone(), u }
            }
        })
    }

    /// The instance with the given seed.
    pub fn generate(&self, seed: u64) -> Result<ClassInstance> {
        let theta = self.sample_theta(&mut ChaCha8Rng::seed_from_u64(seed))?;
        let circuit = theta.circuit()?;
        let t_count = circuit.t_count();
        Ok(ClassInstance { class_id: self.class_id(), theta, seed, circuit, t_count })
    }
}

fn sample_iqp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> IqpParams {
    let mut params = IqpParams::zero(n);
    for v in &mut params.v {
        *v = rng.random_range(0..8);
    }
    for w in &mut params.w {
        if rng.random_bool(p) {
            *w = rng.random_range(0..4);
        }
    }
    params
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassInstance {
    pub class_id: ClassId,
    pub theta: Theta,
    pub seed: u64,
    pub circuit: Circuit,
    /// Number of `T` and `T†` gates in `circuit`.
    pub t_count: usize,
}

impl ClassInstance {
    pub fn num_lines(&self) -> usize {
        self.circuit.num_lines
    }

    /// Line-oriented description of the instance.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "class {}", self.class_id);
        let _ = writeln!(out, "n {}", self.num_lines());
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "theta {}", self.theta);
        let _ = writeln!(out, "t_count {}", self.t_count);
        out
    }

    /// `T` and `T†` positions: `true` where the original gate is `T†`.
    pub fn tau0(&self) -> Vec<bool> {
        self.circuit.gates().filter(|g| g.kind.is_t_like()).map(|g| g.kind == GateKind::Tdg).collect()
    }
}

pub fn gen_iqp_ising<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ClassInstance> {
    ClassSpec::IqpIsing { n }.generate(rng.random())
}

pub fn gen_sparse_iqp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<ClassInstance> {
    ClassSpec::SparseIqp { n, p }.generate(rng.random())
}

pub fn gen_rcs<R: Rng + ?Sized>(n: usize, depth: usize, rng: &mut R) -> Result<ClassInstance> {
    ClassSpec::Rcs { n, depth }.generate(rng.random())
}

/// Default length of the random Clifford part of a conjugated instance.
pub fn default_u_len(n: usize) -> usize {
    4 * n * n
}

pub fn gen_conjugated_clifford<R: Rng + ?Sized>(n: usize, v_word: &[GateKind], rng: &mut R) -> Result<ClassInstance> {
    ClassSpec::Conjugated { n, v_word: v_word.to_vec(), u_len: default_u_len(n) }.generate(rng.random())
}

/// `T^v` as a word over `{Z, S, T}`.
pub fn t_power_word(v: u8) -> Vec<GateKind> {
    let mut word = Vec::new();
    if v & 4 != 0 {
        word.push(GateKind::Z);
    }
    if v & 2 != 0 {
        word.push(GateKind::S);
    }
    if v & 1 != 0 {
        word.push(GateKind::T);
    }
    word
}

/// `CS^w` on `(a, b)` in Clifford+T form.
pub fn cs_power_word(w: u8, a: usize, b: usize) -> Result<Vec<(GateKind, Vec<usize>)>> {
    match w % 4 {
        0 => Ok(Vec::new()),
        1 => cs_word(GateKind::CS, a, b),
        2 => Ok(vec![(GateKind::CZ, vec![a, b])]),
        _ => cs_word(GateKind::CSdg, a, b),
    }
}

fn measure_all(c: &mut Circuit) {
    for i in 0..c.num_lines {
        c.measure(i, format!("x{i}"));
    }
}

fn iqp_circuit(p: &IqpParams) -> Result<Circuit> {
    let mut c = Circuit::new(p.n);
    for i in 0..p.n {
        c.gate(GateKind::H, &[i]);
    }
    for i in 0..p.n {
        for k in t_power_word(p.v[i]) {
            c.gate(k, &[i]);
        }
    }
    for (i, j) in p.pairs() {
        for (k, t) in cs_power_word(p.w_at(i, j), i, j)? {
            c.gate(k, &t);
        }
    }
    for i in 0..p.n {
        c.gate(GateKind::H, &[i]);
    }
    measure_all(&mut c);
    Ok(c)
}

/// `√X^{±1}` and `√Y^{±1}` as words over `{H, S, S†, Z}`, equal up to phase.
pub fn lower_sqrt(kind: GateKind) -> Vec<GateKind> {
    use GateKind::{Sdg, H, S, Z};
    match kind {
        GateKind::SqrtX => vec![H, S, H],
        GateKind::SqrtXdg => vec![H, Sdg, H],
        GateKind::SqrtY => vec![Z, H],
        GateKind::SqrtYdg => vec![H, Z],
        other => vec![other],
    }
}

fn rcs_circuit(n: usize, layers: &[Vec<RcsChoice>]) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for (l, layer) in layers.iter().enumerate() {
        let starts: Vec<usize> = (l % 2..n - 1).step_by(2).collect();
        if starts.len() != layer.len() {
            return Err(Error::contract(format!("layer {l} has {} choices for {} pairs", layer.len(), starts.len())));
        }
        for (&a, choice) in starts.iter().zip(layer) {
            if choice.gate.arity() == 2 {
                c.gate(choice.gate, &[a, a + 1]);
            } else {
                let line = a + usize::from(choice.slot & 1);
                for k in lower_sqrt(choice.gate) {
                    c.gate(k, &[line]);
                }
            }
        }
    }
    measure_all(&mut c);
    Ok(c)
}

fn conjugated_circuit(n: usize, v_word: &[GateKind], u: &[(GateKind, Vec<usize>)]) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for line in 0..n {
        for &k in v_word {
            c.gate(k, &[line]);
        }
    }
    for (k, t) in u {
        if t.iter().any(|&q| q >= n) {
            return Err(Error::contract(format!("gate {k} targets a line outside 0..{n}")));
        }
        c.gate(*k, t);
    }
    for line in 0..n {
        for &k in v_word.iter().rev() {
            c.gate(k.inverse(), &[line]);
        }
    }
    measure_all(&mut c);
    Ok(c)
}

/// Bit `i` swaps the `i`-th `T`/`T†` gate, in program order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TauAssignment {
    pub bits: Vec<bool>,
}

impl TauAssignment {
    pub fn zeros(t: usize) -> Self {
        TauAssignment { bits: vec![false; t] }
    }

    /// Bit `i` is bit `i` of `mask`.
    pub fn from_mask(t: usize, mask: u64) -> Self {
        TauAssignment { bits: (0..t).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Swaps `T ↔ T†` at the positions selected by `tau`.
pub fn expand_ct(inst: &ClassInstance, tau: &TauAssignment) -> Result<Circuit> {
    swap_t_gates(&inst.circuit, tau)
}

pub fn swap_t_gates(c: &Circuit, tau: &TauAssignment) -> Result<Circuit> {
    let t = c.t_count();
    if tau.len() != t {
        return Err(Error::contract(format!("τ has {} bits for {t} T gates", tau.len())));
    }
    let mut out = c.clone();
    let mut i = 0;
    for step in &mut out.steps {
        if let Step::Gate(g) = step {
            if g.kind.is_t_like() {
                if tau.bits[i] {
                    g.kind = g.kind.inverse();
                }
                i += 1;
            }
        }
    }
    Ok(out)
}

/// What [`closure_check`] found for one `(θ, τ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureReport {
    /// Parameters predicted by tracking each swapped gate's phase.
    pub by_rules: Option<IqpParams>,
    /// Parameters read off the diagonal of the swapped circuit.
    pub by_phases: Option<IqpParams>,
    /// Whether `by_phases` reproduces the swapped circuit up to phase.
    pub verified: bool,
}

impl ClosureReport {
    /// The recovered parameters, when both methods agree and the unitary
    /// check passed.
    pub fn recovered(&self) -> Option<&IqpParams> {
        match (&self.by_rules, &self.by_phases) {
            (Some(a), Some(b)) if a == b && self.verified => Some(b),
            _ => None,
        }
    }
}

fn unitary_part(c: &Circuit) -> Circuit {
    let mut u = c.clone();
    u.steps.retain(|s| matches!(s, Step::Gate(_)));
    u
}

/// The diagonal middle of an IQP circuit: everything between the two
/// `H` layers.
fn iqp_middle(c: &Circuit) -> Result<&[Step]> {
    let n = c.num_lines;
    let is_h = |s: &Step| matches!(s, Step::Gate(g) if g.kind == GateKind::H);
    if c.steps.len() < 3 * n || !c.steps[..n].iter().all(is_h) || !c.steps[c.steps.len() - 2 * n..c.steps.len() - n].iter().all(is_h) {
        return Err(Error::contract("not an IQP circuit"));
    }
    Ok(&c.steps[n..c.steps.len() - 2 * n])
}

/// Applies the effect of each swapped `T`/`T†` to `params`. On the wire a
/// `T`-type gate sees a parity `ℓ(x)` of input bits; turning `T` into `T†`
/// changes the phase by `-2ℓ(x)` eighth-turns and the reverse by `+2ℓ(x)`.
/// A parity of one bit shifts that line's `v`; a parity `x_a ⊕ x_b` shifts
/// both `v`s and `w_ab` (since `x_a ⊕ x_b = x_a + x_b − 2x_a x_b`).
fn closure_by_rules(inst: &ClassInstance, params: &IqpParams, tau: &TauAssignment) -> Result<Option<IqpParams>> {
    let n = params.n;
    let mut forms: Vec<u64> = (0..n).map(|i| 1 << i).collect();
    let mut dv = vec![0i64; n];
    let mut dw = vec![0i64; params.w.len()];
    let mut k = 0;
    for step in iqp_middle(&inst.circuit)? {
        let Step::Gate(g) = step else { continue };
        match g.kind {
            GateKind::CX => forms[g.targets[1]] ^= forms[g.targets[0]],
            kind if kind.is_t_like() => {
                if tau.bits[k] {
                    let s = if kind == GateKind::T { 1 } else { -1 };
                    let lines: Vec<usize> = (0..n).filter(|&i| forms[g.targets[0]] >> i & 1 == 1).collect();
                    match lines[..] {
                        [a] => dv[a] -= 2 * s,
                        [a, b] => {
                            dv[a] -= 2 * s;
                            dv[b] -= 2 * s;
                            dw[pair_index(n, a, b)] += 2 * s;
                        }
                        _ => return Ok(None),
                    }
                }
                k += 1;
            }
            _ => {}
        }
    }
    let mut out = params.clone();
    for (v, d) in out.v.iter_mut().zip(dv) {
        *v = (*v as i64 + d).rem_euclid(8) as u8;
    }
    for (w, d) in out.w.iter_mut().zip(dw) {
        *w = (*w as i64 + d).rem_euclid(4) as u8;
    }
    Ok(Some(out))
}

/// Reads `v` and `w` off the phases the swapped diagonal puts on each
/// basis state, or `None` if they do not have IQP form.
fn closure_by_phases(swapped: &Circuit) -> Result<Option<IqpParams>> {
    let n = swapped.num_lines;
    Budget::default().check_lines(n)?;
    let d = 1usize << n;
    let middle = iqp_middle(swapped)?;
    let mut eighths = Vec::with_capacity(d);
    for x in 0..d {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[x] = Complex64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps)?;
        for step in middle {
            if let Step::Gate(g) = step {
                s.apply_gate(g.kind, &g.targets);
            }
        }
        let a = s.amplitudes()[x];
        if (a.norm() - 1.0).abs() > 1e-9 {
            return Ok(None);
        }
        let e = a.arg() / FRAC_PI_4;
        if (e - e.round()).abs() > 1e-9 {
            return Ok(None);
        }
        eighths.push(e.round() as i64);
    }
    let rel = |x: usize| (eighths[x] - eighths[0]).rem_euclid(8) as u8;
    let mut params = IqpParams::zero(n);
    for i in 0..n {
        params.v[i] = rel(1 << i);
    }
    for i in 0..n {
        for j in i + 1..n {
            let q = (rel(1 << i | 1 << j) as i64 - params.v[i] as i64 - params.v[j] as i64).rem_euclid(8);
            if q % 2 != 0 {
                return Ok(None);
            }
            params.w[pair_index(n, i, j)] = (q / 2) as u8;
        }
    }
    Ok((0..d).all(|x| params.phase(x) == rel(x)).then_some(params))
}

/// Finds `θ'` with `C_θ' = expand_ct(C_θ, τ)` up to phase, for IQP-type
/// instances.
pub fn closure_check(inst: &ClassInstance, tau: &TauAssignment) -> Result<ClosureReport> {
    let params = inst.theta.iqp().ok_or_else(|| Error::contract(format!("closure is checked on IQP instances, not {}", inst.class_id)))?;
    let swapped = expand_ct(inst, tau)?;
    let by_rules = closure_by_rules(inst, params, tau)?;
    let by_phases = closure_by_phases(&swapped)?;
    let verified = match &by_phases {
        Some(p) => unitary_equal_up_to_phase(&unitary_part(&iqp_circuit(p)?), &unitary_part(&swapped))?,
        None => false,
    };
    Ok(ClosureReport { by_rules, by_phases, verified })
}

/// Compares each swapped circuit's output law with the gadget circuit
/// whose corrections were removed: `p_{θ,τ}(x) = 2^t · u_θ(x, τ ⊕ τ₀)`,
/// where `u_θ` is the joint law of the outputs and the gadget outcomes
/// and `τ₀` marks the gates that were `T†` to begin with. Returns the
/// largest absolute deviation over all `τ` and `x`.
pub fn eq5_deviation(inst: &ClassInstance) -> Result<f64> {
    let t = inst.t_count;
    if t > 16 {
        return Err(Error::Budget(format!("{t} T gates give too many assignments")));
    }
    let stripped = strip_corrections(&gadgetize(&inst.circuit)?)?;
    let joint = exact_distribution(&stripped)?;
    let tau0 = inst.tau0();
    let scale = (1u64 << t) as f64;
    let mut worst: f64 = 0.0;
    for mask in 0..1u64 << t {
        let tau = TauAssignment::from_mask(t, mask);
        let p = exact_distribution(&expand_ct(inst, &tau)?)?;
        let gadget_bits: String = tau.bits.iter().zip(&tau0).map(|(&a, &b)| if a ^ b { '1' } else { '0' }).collect();
        for x in 0..1usize << inst.num_lines() {
            let key: String = (0..inst.num_lines()).map(|i| if x >> i & 1 == 1 { '1' } else { '0' }).collect();
            let u = joint.get(&format!("{key}{gadget_bits}"));
            worst = worst.max((p.get(&key) - scale * u).abs());
        }
    }
    Ok(worst)
}

/// Result of comparing the law of `θ̃(θ, τ')` with the class law.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSamplingReport {
    pub class_id: ClassId,
    pub n: usize,
    /// `(θ, τ')` pairs examined.
    pub pairs: usize,
    /// Exhaustive runs: `max_θ₀ |Σ π(θ)ν'(τ')[θ̃ = θ₀] − π(θ₀)|`.
    /// Sampled runs: total-variation distance between the empirical
    /// per-parameter histograms of `θ̃` and the exact marginals.
    pub distance: f64,
    /// Sampled runs only: the same distance for a fresh sample from `π`
    /// of equal size, as a yardstick for sampling noise.
    pub baseline: Option<f64>,
    /// Every swap kept the number of two-qubit gates.
    pub two_qubit_count_preserved: bool,
    /// Every `(θ, τ')` was recovered by [`closure_check`].
    pub all_recovered: bool,
}

impl fmt::Display for ThetaSamplingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theta_class={}", self.class_id)?;
        writeln!(f, "theta_n={}", self.n)?;
        writeln!(f, "theta_pairs={}", self.pairs)?;
        writeln!(f, "theta_distance={:e}", self.distance)?;
        if let Some(b) = self.baseline {
            writeln!(f, "theta_baseline={b:e}")?;
        }
        writeln!(f, "theta_two_qubit_preserved={}", self.two_qubit_count_preserved)?;
        writeln!(f, "theta_all_recovered={}", self.all_recovered)
    }
}

/// Probability of `params` under the class law.
fn iqp_prob(spec: &ClassSpec, params: &IqpParams) -> f64 {
    let p = match spec {
        ClassSpec::SparseIqp { p, .. } => *p,
        _ => 1.0,
    };
    let w_prob = |w: u8| if w == 0 { 0.25 + 0.75 * (1.0 - p) } else { p / 4.0 };
    params.v.iter().map(|_| 0.125).product::<f64>() * params.w.iter().map(|&w| w_prob(w)).product::<f64>()
}

fn iqp_spec_n(spec: &ClassSpec) -> Result<usize> {
    spec.check()?;
    match spec {
        ClassSpec::IqpIsing { n } | ClassSpec::SparseIqp { n, .. } => Ok(*n),
        _ => Err(Error::contract(format!("θ sampling is checked on IQP classes, not {}", spec.class_id()))),
    }
}

fn instance_from(spec: &ClassSpec, params: IqpParams) -> Result<ClassInstance> {
    let theta = match spec {
        ClassSpec::SparseIqp { p, .. } => Theta::SparseIqp { p: *p, params },
        _ => Theta::Iqp(params),
    };
    let circuit = theta.circuit()?;
    Ok(ClassInstance { class_id: spec.class_id(), t_count: circuit.t_count(), theta, seed: 0, circuit })
}

/// Exhaustive version of [`theta_sampling_check`] for `n ≤ 2`: sums over
/// every `θ` and `τ'` exactly.
pub fn theta_sampling_exact(spec: &ClassSpec) -> Result<ThetaSamplingReport> {
    let n = iqp_spec_n(spec)?;
    if n > 2 {
        return Err(Error::Budget(format!("exhaustive θ enumeration is limited to n ≤ 2, got {n}")));
    }
    let npairs = n * (n - 1) / 2;
    let mut law: BTreeMap<(Vec<u8>, Vec<u8>), f64> = BTreeMap::new();
    let mut all_params = Vec::new();
    let mut pairs = 0;
    let mut preserved = true;
    let mut recovered = true;
    for code in 0..(8usize.pow(n as u32) * 4usize.pow(npairs as u32)) {
        let mut params = IqpParams::zero(n);
        let mut rest = code;
        for v in &mut params.v {
            *v = (rest % 8) as u8;
            rest /= 8;
        }
        for w in &mut params.w {
            *w = (rest % 4) as u8;
            rest /= 4;
        }
        let pi = iqp_prob(spec, &params);
        all_params.push(params.clone());
        let inst = instance_from(spec, params.clone())?;
        let weight = pi / (1u64 << inst.t_count) as f64;
        for mask in 0..1u64 << inst.t_count {
            pairs += 1;
            let report = closure_check(&inst, &TauAssignment::from_mask(inst.t_count, mask))?;
            match report.recovered() {
                Some(q) => {
                    preserved &= q.num_two_qubit() == params.num_two_qubit();
                    *law.entry((q.v.clone(), q.w.clone())).or_default() += weight;
                }
                None => recovered = false,
            }
        }
    }
    let distance = all_params
        .iter()
        .map(|p| (law.get(&(p.v.clone(), p.w.clone())).copied().unwrap_or(0.0) - iqp_prob(spec, p)).abs())
        .fold(0.0, f64::max);
    Ok(ThetaSamplingReport {
        class_id: spec.class_id(),
        n,
        pairs,
        distance,
        baseline: None,
        two_qubit_count_preserved: preserved,
        all_recovered: recovered,
    })
}

/// Samples `θ ~ π` and a uniform `τ'`, maps them through
/// [`closure_check`], and compares the per-parameter histograms of `θ̃`
/// with the exact class marginals.
pub fn theta_sampling_check<R: Rng + ?Sized>(spec: &ClassSpec, samples: usize, rng: &mut R) -> Result<ThetaSamplingReport> {
    let n = iqp_spec_n(spec)?;
    let p = match spec {
        ClassSpec::SparseIqp { p, .. } => *p,
        _ => 1.0,
    };
    let mut mixed = (vec![0usize; 8], vec![0usize; 4]);
    let mut fresh = (vec![0usize; 8], vec![0usize; 4]);
    let mut preserved = true;
    let mut recovered = true;
    let tally = |h: &mut (Vec<usize>, Vec<usize>), q: &IqpParams| {
        q.v.iter().for_each(|&v| h.0[v as usize] += 1);
        q.w.iter().for_each(|&w| h.1[w as usize] += 1);
    };
    for _ in 0..samples {
        let inst = spec.generate(rng.random())?;
        let params = inst.theta.iqp().expect("IQP class").clone();
        let tau = TauAssignment { bits: (0..inst.t_count).map(|_| rng.random_bool(0.5)).collect() };
        match closure_check(&inst, &tau)?.recovered() {
            Some(q) => {
                preserved &= q.num_two_qubit() == params.num_two_qubit();
                tally(&mut mixed, q);
            }
            None => recovered = false,
        }
        tally(&mut fresh, spec.generate(rng.random())?.theta.iqp().expect("IQP class"));
    }
    let w0 = 0.25 + 0.75 * (1.0 - p);
    let exact_w = [w0, p / 4.0, p / 4.0, p / 4.0];
    let dist = |h: &(Vec<usize>, Vec<usize>)| {
        let tv = |counts: &[usize], law: &dyn Fn(usize) -> f64| {
            let total: usize = counts.iter().sum();
            if total == 0 {
                return 0.0;
            }
            counts.iter().enumerate().map(|(k, &c)| (c as f64 / total as f64 - law(k)).abs()).sum::<f64>() / 2.0
        };
        tv(&h.0, &|_| 0.125).max(tv(&h.1, &|k| exact_w[k]))
    };
    Ok(ThetaSamplingReport {
        class_id: spec.class_id(),
        n,
        pairs: samples,
        distance: dist(&mixed),
        baseline: Some(dist(&fresh)),
        two_qubit_count_preserved: preserved,
        all_recovered: recovered,
    })
}

/// Empirical fraction of `(θ, x)` with `p_θ(x) ≥ α/2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticoncentrationReport {
    pub n: usize,
    pub alpha: f64,
    pub samples: usize,
    pub hits: usize,
    pub fraction: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl fmt::Display for AnticoncentrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "anticoncentration_n={}", self.n)?;
        writeln!(f, "anticoncentration_alpha={}", self.alpha)?;
        writeln!(f, "anticoncentration_samples={}", self.samples)?;
        writeln!(f, "anticoncentration_hits={}", self.hits)?;
        writeln!(f, "anticoncentration_fraction={:.6}", self.fraction)?;
        writeln!(f, "anticoncentration_ci95_low={:.6}", self.ci_low)?;
        writeln!(f, "anticoncentration_ci95_high={:.6}", self.ci_high)
    }
}

/// 95% Wilson score interval for `hits` successes in `n` trials.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let p = hits as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let centre = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Draws `instances` circuits from `spec` and `outcomes` uniform `x` for
/// each.
pub fn anticoncentration_estimate<R: Rng + ?Sized>(
    spec: &ClassSpec,
    instances: usize,
    outcomes: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<AnticoncentrationReport> {
    spec.check()?;
    anticoncentration_with(spec.num_lines(), instances, outcomes, alpha, rng, |seed| exact_distribution(&spec.generate(seed)?.circuit))
}

/// Like [`anticoncentration_estimate`], with instances supplied by
/// `sample`, which maps a seed to an output distribution over `n` bits.
pub fn anticoncentration_with<R, F>(n: usize, instances: usize, outcomes: usize, alpha: f64, rng: &mut R, mut sample: F) -> Result<AnticoncentrationReport>
where
    R: Rng + ?Sized,
    F: FnMut(u64) -> Result<Distribution>,
{
    Budget::default().check_lines(n)?;
    // Relative slack so that outcomes sitting exactly on the threshold count.
    let threshold = alpha / (1u64 << n) as f64 * (1.0 - 1e-9);
    let mut hits = 0;
    for _ in 0..instances {
        let dist = sample(rng.random())?;
        for _ in 0..outcomes {
            let x: String = (0..n).map(|_| if rng.random_bool(0.5) { '1' } else { '0' }).collect();
            if dist.get(&x) >= threshold {
                hits += 1;
            }
        }
    }
    let samples = instances * outcomes;
    let (ci_low, ci_high) = wilson_interval(hits, samples);
    let fraction = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
    Ok(AnticoncentrationReport { n, alpha, samples, hits, fraction, ci_low, ci_high })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{circuit_unitary, matrix_1q, phase_residual, tvd};
    use crate::pipeline::{compress_pipeline, PipelineMode};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn single(kind: GateKind) -> Circuit {
        let mut c = Circuit::new(1);
        c.gate(kind, &[0]);
        c
    }

    fn word(kinds: &[GateKind], n: usize) -> Circuit {
        let mut c = Circuit::new(n);
        for &k in kinds {
            c.gate(k, &[0]);
        }
        c
    }

    #[test]
    fn pair_index_is_lexicographic() {
        let n = 5;
        let expected: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for (k, &(i, j)) in expected.iter().enumerate() {
            assert_eq!(pair_index(n, i, j), k);
        }
    }

    #[test]
    fn t_power_words() {
        for v in 0..8u8 {
            let mut t = Circuit::new(1);
            for _ in 0..v {
                t.gate(GateKind::T, &[0]);
            }
            let w = word(&t_power_word(v), 1);
            assert!(unitary_equal_up_to_phase(&t, &w).unwrap(), "v={v}");
            assert_eq!(w.t_count(), (v & 1) as usize);
        }
    }

    #[test]
    fn cs_power_words() {
        for w in 0..4u8 {
            let mut reference = Circuit::new(2);
            for _ in 0..w {
                reference.gate(GateKind::CS, &[0, 1]);
            }
            let mut lowered = Circuit::new(2);
            for (k, t) in cs_power_word(w, 0, 1).unwrap() {
                lowered.gate(k, &t);
            }
            assert!(unitary_equal_up_to_phase(&reference, &lowered).unwrap(), "w={w}");
        }
    }

    #[test]
    fn sqrt_lowering_matches_matrices() {
        for k in [GateKind::SqrtX, GateKind::SqrtXdg, GateKind::SqrtY, GateKind::SqrtYdg] {
            let m = matrix_1q(k).unwrap();
            let u: Vec<Vec<Complex64>> = m.iter().map(|r| r.to_vec()).collect();
            let lowered = circuit_unitary(&word(&lower_sqrt(k), 1)).unwrap();
            assert!(phase_residual(&u, &lowered) < 1e-12, "{k}");
            assert!(phase_residual(&u, &circuit_unitary(&single(k)).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn identity_iqp_is_a_point_mass() {
        let inst = instance_from(&ClassSpec::IqpIsing { n: 3 }, IqpParams::zero(3)).unwrap();
        let d = exact_distribution(&inst.circuit).unwrap();
        assert!((d.get("000") - 1.0).abs() < 1e-12);
        let r = anticoncentration_with(3, 4, 200, 1.0, &mut rng(1), |_| exact_distribution(&inst.circuit)).unwrap();
        assert!((r.fraction - 0.125).abs() < 0.05, "{r}");
    }

    #[test]
    fn uniform_class_is_fully_anticoncentrated() {
        let mut c = Circuit::new(4);
        for i in 0..4 {
            c.gate(GateKind::H, &[i]);
        }
        measure_all(&mut c);
        let r = anticoncentration_with(4, 3, 50, 1.0, &mut rng(2), |_| exact_distribution(&c)).unwrap();
        assert_eq!(r.fraction, 1.0);
    }

    #[test]
    fn iqp_instances_are_normalized_and_regenerable() {
        let mut r = rng(3);
        for _ in 0..10 {
            let inst = gen_iqp_ising(2, &mut r).unwrap();
            let d = exact_distribution(&inst.circuit).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-12);
            let again = ClassSpec::IqpIsing { n: 2 }.generate(inst.seed).unwrap();
            assert_eq!(again, inst);
            assert_eq!(again.circuit.serialize(), inst.circuit.serialize());
            assert_eq!(inst.theta.circuit().unwrap(), inst.circuit);
            let parsed: Circuit = inst.circuit.serialize().parse().unwrap();
            assert_eq!(parsed.serialize(), inst.circuit.serialize());
        }
    }

    /// Chi-square statistic of observed counts against a law.
    fn chi_square(counts: &[usize], law: &[f64]) -> f64 {
        let total: usize = counts.iter().sum();
        counts.iter().zip(law).map(|(&c, &p)| (c as f64 - total as f64 * p).powi(2) / (total as f64 * p)).sum()
    }

    #[test]
    fn parameter_marginals_are_uniform() {
        let mut r = rng(4);
        let mut v = [0usize; 8];
        let mut w = [0usize; 4];
        for _ in 0..10_000 {
            let p = sample_iqp(2, 1.0, &mut r);
            v[p.v[0] as usize] += 1;
            w[p.w[0] as usize] += 1;
        }
        // 0.1% critical values for 7 and 3 degrees of freedom.
        assert!(chi_square(&v, &[0.125; 8]) < 24.32);
        assert!(chi_square(&w, &[0.25; 4]) < 16.27);
    }

    #[test]
    fn sparse_law() {
        let mut r = rng(5);
        for p in [0.0, 0.3, 1.0] {
            let mut zeros = 0;
            for _ in 0..10_000 {
                zeros += sample_iqp(2, p, &mut r).w.iter().filter(|&&w| w == 0).count();
            }
            let expected = 0.25 + 0.75 * (1.0 - p);
            assert!((zeros as f64 / 1e4 - expected).abs() < 0.02, "p={p}");
        }
        for _ in 0..20 {
            let inst = gen_sparse_iqp(3, 0.0, &mut r).unwrap();
            assert!(inst.circuit.gates().all(|g| g.kind.arity() == 1));
        }
        assert!(matches!(gen_sparse_iqp(2, 1.5, &mut r), Err(Error::Contract(_))));
    }

    #[test]
    fn rcs_structure() {
        let mut r = rng(6);
        for _ in 0..20 {
            let inst = gen_rcs(2, 1, &mut r).unwrap();
            let Theta::Rcs { layers, .. } = &inst.theta else { panic!() };
            assert_eq!(layers.len(), 1);
            assert_eq!(layers[0].len(), 1);
        }
        let inst = gen_rcs(4, 6, &mut r).unwrap();
        let Theta::Rcs { layers, .. } = &inst.theta else { panic!() };
        let draws = layers.iter().flatten().filter(|c| c.gate.is_t_like()).count();
        assert_eq!(inst.t_count, draws);
        assert_eq!(layers.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 1, 2, 1, 2, 1]);
        let d = exact_distribution(&inst.circuit).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
        assert!(gen_rcs(1, 3, &mut r).is_err());
    }

    #[test]
    fn clifford_rcs_compresses_to_nothing() {
        let layers = vec![vec![RcsChoice { gate: GateKind::CZ, slot: 0 }], vec![], vec![RcsChoice { gate: GateKind::SqrtY, slot: 1 }]];
        let c = rcs_circuit(2, &layers).unwrap();
        let (out, report) = compress_pipeline(&c, PipelineMode::Plain).unwrap();
        assert_eq!(report.compressed_lines, 0);
        assert!(tvd(&out.exact_distribution().unwrap(), &exact_distribution(&c).unwrap()) < 1e-12);
    }

    #[test]
    fn conjugated_instances() {
        let mut r = rng(7);
        let plain = gen_conjugated_clifford(3, &[], &mut r).unwrap();
        assert_eq!(compress_pipeline(&plain.circuit, PipelineMode::Plain).unwrap().1.compressed_lines, 0);
        let t = gen_conjugated_clifford(3, &[GateKind::T], &mut r).unwrap();
        assert_eq!(t.t_count, 6);
        let inst = gen_conjugated_clifford(3, &[GateKind::H, GateKind::T], &mut r).unwrap();
        let (out, _) = compress_pipeline(&inst.circuit, PipelineMode::Plain).unwrap();
        assert!(tvd(&out.exact_distribution().unwrap(), &exact_distribution(&inst.circuit).unwrap()) < 1e-9);
    }

    #[test]
    fn expand_ct_identity_and_involution() {
        let inst = gen_iqp_ising(3, &mut rng(8)).unwrap();
        let zero = TauAssignment::zeros(inst.t_count);
        assert_eq!(expand_ct(&inst, &zero).unwrap(), inst.circuit);
        let tau = TauAssignment::from_mask(inst.t_count, 0b1011_0110_1101);
        let once = expand_ct(&inst, &tau).unwrap();
        assert_eq!(swap_t_gates(&once, &tau).unwrap(), inst.circuit);
        assert!(expand_ct(&inst, &TauAssignment::zeros(inst.t_count + 1)).is_err());
    }

    #[test]
    fn flipping_a_line_t_shifts_v_by_two() {
        let mut params = IqpParams::zero(2);
        params.v = vec![3, 0];
        let inst = instance_from(&ClassSpec::IqpIsing { n: 2 }, params).unwrap();
        let report = closure_check(&inst, &TauAssignment::from_mask(1, 1)).unwrap();
        assert_eq!(report.recovered().unwrap().v, vec![1, 0]);
    }

    #[test]
    fn flipping_the_middle_tdg_shifts_both_lines_and_w() {
        let mut params = IqpParams::zero(2);
        params.w = vec![1];
        let inst = instance_from(&ClassSpec::IqpIsing { n: 2 }, params).unwrap();
        assert_eq!(inst.t_count, 3);
        // Gates in order: T_a, T_b, T†_b (between the CXs).
        let report = closure_check(&inst, &TauAssignment::from_mask(3, 0b100)).unwrap();
        let q = report.recovered().unwrap();
        assert_eq!(q.v, vec![2, 2]);
        assert_eq!(q.w, vec![3]);
    }

    #[test]
    fn closure_is_exhaustive_at_two_lines() {
        let mut r = rng(9);
        for _ in 0..5 {
            let inst = gen_iqp_ising(2, &mut r).unwrap();
            for mask in 0..1u64 << inst.t_count {
                let report = closure_check(&inst, &TauAssignment::from_mask(inst.t_count, mask)).unwrap();
                assert!(report.recovered().is_some(), "{report:?}");
            }
        }
    }

    #[test]
    fn eq5_holds_on_small_instances() {
        let mut r = rng(10);
        for _ in 0..3 {
            let inst = gen_iqp_ising(2, &mut r).unwrap();
            assert!(eq5_deviation(&inst).unwrap() < 1e-10);
        }
    }

    #[test]
    fn theta_law_is_invariant() {
        let r = theta_sampling_exact(&ClassSpec::IqpIsing { n: 2 }).unwrap();
        assert!(r.all_recovered && r.two_qubit_count_preserved);
        assert!(r.distance < 1e-12, "{r}");
        let r = theta_sampling_exact(&ClassSpec::SparseIqp { n: 2, p: 0.4 }).unwrap();
        assert!(r.distance < 1e-12 && r.two_qubit_count_preserved, "{r}");
        let s = theta_sampling_check(&ClassSpec::SparseIqp { n: 3, p: 0.5 }, 200, &mut rng(11)).unwrap();
        assert!(s.all_recovered && s.two_qubit_count_preserved, "{s}");
    }

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(30, 100);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
    }

    #[test]
    fn manifest_lists_the_parameters() {
        let inst = gen_iqp_ising(2, &mut rng(12)).unwrap();
        let m = inst.manifest();
        assert!(m.starts_with("class iqp-ising\nn 2\n"));
        assert!(m.contains(&format!("t_count {}", inst.t_count)));
    }
}
