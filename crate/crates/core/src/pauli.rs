//! Signed Pauli operators on `n` qubits.
//!
//! An operator is stored as two bit-packed vectors `x` and `z` plus a sign.
//! Qubit `q` carries `I`, `X`, `Y` or `Z` according to `(x_q, z_q)`:
//! `(0,0)`, `(1,0)`, `(1,1)`, `(0,1)`. The stored operator is always
//! Hermitian, so only the signs `+1` and `-1` are representable; the `±i`
//! phases that show up in products are returned separately as a [`Phase`].

use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use crate::bits::BitSet;
use crate::error::{Error, Result};

/// A sign in `{+1, -1}`, also used for measurement outcomes.
///
/// Outcome bits follow the global convention `+1 ↦ 0`, `-1 ↦ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bit(bit: bool) -> Sign {
        if bit {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn bit(self) -> bool {
        self == Sign::Minus
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Minus
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// Parses `+1`, `-1`, `+` or `-`.
    pub fn parse_outcome(s: &str) -> Option<Sign> {
        match s {
            "+1" | "+" | "1" => Some(Sign::Plus),
            "-1" | "-" => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bit(self.bit() ^ rhs.bit())
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign::from_bit(!self.bit())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// A power of `i`: `i^k` with `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    /// `Some(sign)` when the phase is real.
    pub fn to_sign(self) -> Option<Sign> {
        match self.0 {
            0 => Some(Sign::Plus),
            2 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        use num_complex::Complex64;
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl From<Sign> for Phase {
    fn from(s: Sign) -> Phase {
        if s.is_negative() {
            Phase::MINUS_ONE
        } else {
            Phase::ONE
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64)
}

/// A Hermitian, signed `n`-qubit Pauli operator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Sign,
}

impl PauliOperator {
    pub fn identity(n: usize) -> PauliOperator {
        PauliOperator { n, x: vec![0; words(n)], z: vec![0; words(n)], sign: Sign::Plus }
    }

    /// The scalar `±1`, an operator on zero qubits.
    pub fn scalar(sign: Sign) -> PauliOperator {
        PauliOperator::identity(0).with_sign(sign)
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> PauliOperator {
        let mut op = PauliOperator::identity(n);
        op.set(qubit, p);
        op
    }

    pub fn z(n: usize, qubit: usize) -> PauliOperator {
        PauliOperator::single(n, qubit, Pauli::Z)
    }

    pub fn x(n: usize, qubit: usize) -> PauliOperator {
        PauliOperator::single(n, qubit, Pauli::X)
    }

    pub fn from_paulis(sign: Sign, letters: &[Pauli]) -> PauliOperator {
        let mut op = PauliOperator::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            op.set(q, p);
        }
        op.sign = sign;
        op
    }

    /// Builds an operator from per-qubit bit slices.
    pub fn from_bits(sign: Sign, x: &[bool], z: &[bool]) -> Result<PauliOperator> {
        if x.len() != z.len() {
            return Err(Error::Dimension { left: x.len(), right: z.len() });
        }
        let mut op = PauliOperator::identity(x.len());
        for q in 0..x.len() {
            op.set(q, Pauli::from_bits(x[q], z[q]));
        }
        op.sign = sign;
        Ok(op)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn set_sign(&mut self, sign: Sign) {
        self.sign = sign;
    }

    pub fn with_sign(mut self, sign: Sign) -> PauliOperator {
        self.sign = sign;
        self
    }

    pub fn negate(&mut self) {
        self.sign = -self.sign;
    }

    pub fn unsigned(&self) -> PauliOperator {
        self.clone().with_sign(Sign::Plus)
    }

    pub fn x_bit(&self, q: usize) -> bool {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (xb, zb) = p.bits();
        let (w, m) = (q / 64, 1u64 << (q % 64));
        self.x[w] = (self.x[w] & !m) | if xb { m } else { 0 };
        self.z[w] = (self.z[w] & !m) | if zb { m } else { 0 };
    }

    pub(crate) fn set_x_bit(&mut self, q: usize, v: bool) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        self.x[w] = (self.x[w] & !m) | if v { m } else { 0 };
    }

    pub(crate) fn set_z_bit(&mut self, q: usize, v: bool) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        self.z[w] = (self.z[w] & !m) | if v { m } else { 0 };
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// True when the operator has no `X` or `Y` factor.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n).map(|q| self.get(q)).collect()
    }

    fn check_dim(&self, other: &PauliOperator) -> Result<()> {
        if self.n != other.n {
            Err(Error::Dimension { left: self.n, right: other.n })
        } else {
            Ok(())
        }
    }

    /// Symplectic inner product, `true` when the operators anticommute.
    pub(crate) fn anticommutes_unchecked(&self, other: &PauliOperator) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc & 1 == 1
    }

    /// Exponent `k` such that `self * other = i^k * (xor product)`, signs included.
    pub(crate) fn product_exponent(&self, other: &PauliOperator) -> u32 {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (px, py, pz) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (qx, qy, qz) = (x2 & !z2, x2 & z2, !x2 & z2);
            plus += ((px & qy) | (py & qz) | (pz & qx)).count_ones();
            minus += ((py & qx) | (pz & qy) | (px & qz)).count_ones();
        }
        let signs = 2 * (self.sign.bit() as u32 + other.sign.bit() as u32);
        (plus + 3 * minus + signs) % 4
    }

    /// In-place product `self <- self * other` for commuting operators.
    pub(crate) fn mul_assign_commuting(&mut self, other: &PauliOperator) {
        debug_assert!(!self.anticommutes_unchecked(other));
        let k = self.product_exponent(other);
        debug_assert!(k % 2 == 0);
        self.xor_bits(other);
        self.sign = Sign::from_bit(k == 2);
    }

    /// XORs the bit vectors of `other` into `self`, ignoring signs.
    pub(crate) fn xor_bits(&mut self, other: &PauliOperator) {
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    /// Keeps only the given qubits, in the given order.
    pub fn select(&self, qubits: &[usize]) -> PauliOperator {
        let mut out = PauliOperator::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set(i, self.get(q));
        }
        out.sign = self.sign;
        out
    }

    /// Embeds into a register of `n` qubits, qubit `i` going to `lines[i]`.
    pub fn embed(&self, n: usize, lines: &[usize]) -> PauliOperator {
        assert_eq!(lines.len(), self.n);
        let mut out = PauliOperator::identity(n);
        for (i, &q) in lines.iter().enumerate() {
            out.set(q, self.get(i));
        }
        out.sign = self.sign;
        out
    }

    /// Bit vector `(x_0..x_{n-1}, z_0..z_{n-1})` packed into words.
    pub(crate) fn symplectic_vector(&self) -> BitSet {
        let mut v = BitSet::new();
        for q in 0..self.n {
            if self.x_bit(q) {
                v.toggle(q);
            }
            if self.z_bit(q) {
                v.toggle(self.n + q);
            }
        }
        v
    }
}

impl AsRef<PauliOperator> for PauliOperator {
    fn as_ref(&self) -> &PauliOperator {
        self
    }
}

/// Product `P·Q = phase · product` with `product` unsigned.
///
/// Input signs are folded into the returned phase.
pub fn multiply(p: &PauliOperator, q: &PauliOperator) -> Result<(Phase, PauliOperator)> {
    p.check_dim(q)?;
    let k = p.product_exponent(q);
    let mut out = PauliOperator::identity(p.n);
    for i in 0..out.x.len() {
        out.x[i] = p.x[i] ^ q.x[i];
        out.z[i] = p.z[i] ^ q.z[i];
    }
    Ok((Phase::from_exponent(k), out))
}

/// Product of two commuting operators, which is again Hermitian.
pub fn multiply_commuting(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator> {
    let (phase, prod) = multiply(p, q)?;
    match phase.to_sign() {
        Some(s) => Ok(prod.with_sign(s)),
        None => Err(Error::contract(format!("{p} and {q} anticommute"))),
    }
}

pub fn commutes(p: &PauliOperator, q: &PauliOperator) -> Result<bool> {
    p.check_dim(q)?;
    Ok(!p.anticommutes_unchecked(q))
}

/// Kind of a recorded measurement in a compilation history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementKind {
    /// A stabilizer generator of the known input block, outcome `+1`.
    Dummy,
    /// Outcome computed from earlier records.
    ClassicalDependent,
    /// Outcome chosen by a fair coin.
    RandomLambda,
    /// Outcome obtained from a quantum measurement.
    Quantum,
}

impl MeasurementKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::Dummy => "dummy",
            MeasurementKind::ClassicalDependent => "classical",
            MeasurementKind::RandomLambda => "random",
            MeasurementKind::Quantum => "quantum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedMeasurement {
    pub operator: PauliOperator,
    pub outcome: Sign,
    pub kind: MeasurementKind,
}

impl RecordedMeasurement {
    pub fn new(operator: PauliOperator, outcome: Sign, kind: MeasurementKind) -> Self {
        RecordedMeasurement { operator, outcome, kind }
    }

    pub fn dummy(operator: PauliOperator) -> Self {
        RecordedMeasurement::new(operator, Sign::Plus, MeasurementKind::Dummy)
    }
}

impl AsRef<PauliOperator> for RecordedMeasurement {
    fn as_ref(&self) -> &PauliOperator {
        &self.operator
    }
}

#[derive(Clone, Debug)]
struct BasisRow {
    pivot: usize,
    vector: BitSet,
    combination: BitSet,
}

/// Incremental GF(2) row reduction over symplectic vectors.
///
/// Each inserted operator gets an index. Queries return the set of inserted
/// indices whose product equals the query up to sign, if one exists.
#[derive(Clone, Debug, Default)]
pub struct DependenceBasis {
    n: usize,
    rows: Vec<BasisRow>,
    inserted: usize,
}

impl DependenceBasis {
    pub fn new(n: usize) -> Self {
        DependenceBasis { n, rows: Vec::new(), inserted: 0 }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.inserted
    }

    pub fn is_empty(&self) -> bool {
        self.inserted == 0
    }

    fn reduce(&self, p: &PauliOperator) -> (BitSet, BitSet) {
        let mut v = p.symplectic_vector();
        let mut comb = BitSet::new();
        for row in &self.rows {
            if v.get(row.pivot) {
                v.xor_with(&row.vector);
                comb.xor_with(&row.combination);
            }
        }
        (v, comb)
    }

    fn check(&self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension { left: p.num_qubits(), right: self.n });
        }
        Ok(())
    }

    /// Indices whose product is `±p`, or `None` when `p` is independent.
    pub fn query(&self, p: &PauliOperator) -> Result<Option<Vec<usize>>> {
        self.check(p)?;
        let (v, comb) = self.reduce(p);
        Ok(v.is_empty().then(|| comb.iter().collect()))
    }

    /// Adds `p` as the next index. Returns `false` if it was dependent, in
    /// which case the rank is unchanged.
    pub fn insert(&mut self, p: &PauliOperator) -> Result<bool> {
        self.check(p)?;
        let (v, mut comb) = self.reduce(p);
        let index = self.inserted;
        self.inserted += 1;
        match v.first() {
            Some(pivot) => {
                comb.toggle(index);
                self.rows.push(BasisRow { pivot, vector: v, combination: comb });
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

/// Signed product of the selected operators, which must pairwise commute.
pub fn product_of<T: AsRef<PauliOperator>>(n: usize, ops: &[T], indices: &[usize]) -> Result<PauliOperator> {
    let mut acc = PauliOperator::identity(n);
    for &i in indices {
        let op = ops[i].as_ref();
        acc.check_dim(op)?;
        if acc.anticommutes_unchecked(op) {
            return Err(Error::contract(format!("history operator {i} anticommutes with earlier factors")));
        }
        acc.mul_assign_commuting(op);
    }
    Ok(acc)
}

/// Writes `p` as `sign · ∏ history[i]` over the returned indices, if possible.
pub fn decompose_dependence<T: AsRef<PauliOperator>>(
    p: &PauliOperator,
    history: &[T],
) -> Result<Option<(Sign, Vec<usize>)>> {
    let mut basis = DependenceBasis::new(p.num_qubits());
    for h in history {
        basis.insert(h.as_ref())?;
    }
    let Some(indices) = basis.query(p)? else {
        return Ok(None);
    };
    let prod = product_of(p.num_qubits(), history, &indices)?;
    Ok(Some((p.sign * prod.sign, indices)))
}

/// Implied outcome of a dependent measurement.
pub fn implied_outcome(sign: Sign, history: &[RecordedMeasurement], indices: &[usize]) -> Sign {
    indices.iter().fold(sign, |s, &i| s * history[i].outcome)
}

/// `V R V†` for `V = (λP·P + λQ·Q)/√2`, with `P` and `Q` anticommuting.
///
/// If `R` commutes with both it is unchanged, if it anticommutes with both
/// it is negated. Otherwise the image is `±λP·λQ · R·P·Q`, with `+` when `R`
/// commutes with `P`.
pub fn conjugate_by_v(
    r: &PauliOperator,
    p: &PauliOperator,
    lambda_p: Sign,
    q: &PauliOperator,
    lambda_q: Sign,
) -> Result<PauliOperator> {
    r.check_dim(p)?;
    r.check_dim(q)?;
    if !p.anticommutes_unchecked(q) {
        return Err(Error::contract(format!("{p} and {q} commute, V is not defined")));
    }
    Ok(conjugate_by_v_unchecked(r, p, lambda_p * lambda_q, q))
}

pub(crate) fn conjugate_by_v_unchecked(r: &PauliOperator, p: &PauliOperator, lambda: Sign, q: &PauliOperator) -> PauliOperator {
    let ap = r.anticommutes_unchecked(p);
    let aq = r.anticommutes_unchecked(q);
    match (ap, aq) {
        (false, false) => r.clone(),
        (true, true) => {
            let mut out = r.clone();
            out.negate();
            out
        }
        _ => {
            let (k1, rp) = multiply(r, p).expect("dimensions checked");
            let (k2, rpq) = multiply(&rp, q).expect("dimensions checked");
            let total = (k1 * k2).to_sign().expect("R·P·Q is Hermitian when R anticommutes with exactly one of P, Q");
            let s = if ap { -lambda } else { lambda };
            rpq.with_sign(total * s)
        }
    }
}

/// Drops the first `prefix_len` qubits, which must carry only `I` or `Z`.
pub fn restrict(p: &PauliOperator, prefix_len: usize) -> Result<PauliOperator> {
    if prefix_len > p.n {
        return Err(Error::Dimension { left: prefix_len, right: p.n });
    }
    if let Some(q) = (0..prefix_len).find(|&q| p.x_bit(q)) {
        return Err(Error::contract(format!("{p} has an X or Y factor on prefix qubit {q}")));
    }
    let rest: Vec<usize> = (prefix_len..p.n).collect();
    Ok(p.select(&rest))
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign.is_negative() {
            f.write_str("-")?;
        } else if self.n == 0 {
            f.write_str("+")?;
        }
        for q in 0..self.n {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid Pauli string {text:?}: {reason}")]
pub struct ParsePauliError {
    pub text: String,
    pub reason: String,
}

impl FromStr for PauliOperator {
    type Err = ParsePauliError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (Sign::Minus, rest),
            None => (Sign::Plus, s.strip_prefix('+').unwrap_or(s)),
        };
        let mut letters = Vec::with_capacity(body.len());
        for c in body.chars() {
            match Pauli::from_letter(c) {
                Some(p) => letters.push(p),
                None => {
                    return Err(ParsePauliError { text: s.to_string(), reason: format!("unexpected character {c:?}") })
                }
            }
        }
        Ok(PauliOperator::from_paulis(sign, &letters))
    }
}
