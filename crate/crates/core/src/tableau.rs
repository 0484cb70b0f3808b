//! Stabilizer/destabilizer tableaux over the basic gate set `{H, S, CX}`.

use std::fmt;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::pauli::{commutes, DependenceBasis, Pauli, PauliOperator, Sign};

/// The gates the tableau understands natively. Every other Clifford gate is
/// lowered to a word over these (see [`crate::circuit::GateKind::basic_word`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasicGate {
    H(usize),
    S(usize),
    /// Control, target.
    CX(usize, usize),
}

impl BasicGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            BasicGate::H(q) | BasicGate::S(q) => vec![q],
            BasicGate::CX(a, b) => vec![a, b],
        }
    }

    pub fn max_qubit(&self) -> usize {
        match *self {
            BasicGate::H(q) | BasicGate::S(q) => q,
            BasicGate::CX(a, b) => a.max(b),
        }
    }

    pub fn remap(&self, map: &[usize]) -> BasicGate {
        match *self {
            BasicGate::H(q) => BasicGate::H(map[q]),
            BasicGate::S(q) => BasicGate::S(map[q]),
            BasicGate::CX(a, b) => BasicGate::CX(map[a], map[b]),
        }
    }
}

impl fmt::Display for BasicGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicGate::H(q) => write!(f, "H {q}"),
            BasicGate::S(q) => write!(f, "S {q}"),
            BasicGate::CX(a, b) => write!(f, "CX {a} {b}"),
        }
    }
}

/// Word for `G†` given the word for `G`, both in application order.
///
/// `S†` is spelled `S S S`.
pub fn inverse_word(gates: &[BasicGate]) -> Vec<BasicGate> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates.iter().rev() {
        match *g {
            BasicGate::S(q) => out.extend([BasicGate::S(q); 3]),
            other => out.push(other),
        }
    }
    out
}

/// Replaces `p` by `g p g†`, or by `g† p g` when `inverse` is set.
pub fn conjugate_basic(p: &mut PauliOperator, g: BasicGate, inverse: bool) {
    match g {
        BasicGate::H(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            if x && z {
                p.negate();
            }
            p.set_x_bit(q, z);
            p.set_z_bit(q, x);
        }
        BasicGate::S(q) => {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            // S X S† = Y, S Y S† = -X; S† X S = -Y, S† Y S = X.
            if x && (z != inverse) {
                p.negate();
            }
            p.set_z_bit(q, z ^ x);
        }
        BasicGate::CX(c, t) => {
            let (xc, zc, xt, zt) = (p.x_bit(c), p.z_bit(c), p.x_bit(t), p.z_bit(t));
            if xc && zt && (xt == zc) {
                p.negate();
            }
            p.set_x_bit(t, xt ^ xc);
            p.set_z_bit(c, zc ^ zt);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `G P G†`.
    Forward,
    /// `G† P G`.
    Reverse,
}

/// Conjugates `p` through the composite `G` of a gate list in application order.
pub fn conjugate_pauli(gates: &[BasicGate], p: &PauliOperator, direction: Direction) -> Result<PauliOperator> {
    let mut out = p.clone();
    for g in gates {
        if g.max_qubit() >= p.num_qubits() {
            return Err(Error::contract(format!("gate {g} out of range for {} qubits", p.num_qubits())));
        }
    }
    match direction {
        Direction::Forward => gates.iter().for_each(|&g| conjugate_basic(&mut out, g, false)),
        Direction::Reverse => gates.iter().rev().for_each(|&g| conjugate_basic(&mut out, g, true)),
    }
    Ok(out)
}

/// `n` stabilizer rows and `n` destabilizer rows.
///
/// Read as a Clifford `C`, row `i` of `stab` is `C Z_i C†` and row `i` of
/// `destab` is `C X_i C†`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StabilizerTableau {
    n: usize,
    stab: Vec<PauliOperator>,
    destab: Vec<PauliOperator>,
}

impl StabilizerTableau {
    pub fn identity(n: usize) -> Self {
        StabilizerTableau {
            n,
            stab: (0..n).map(|i| PauliOperator::z(n, i)).collect(),
            destab: (0..n).map(|i| PauliOperator::x(n, i)).collect(),
        }
    }

    pub fn from_rows(stab: Vec<PauliOperator>, destab: Vec<PauliOperator>) -> Result<Self> {
        let n = stab.len();
        if destab.len() != n {
            return Err(Error::Dimension { left: n, right: destab.len() });
        }
        if let Some(r) = stab.iter().chain(&destab).find(|r| r.num_qubits() != n) {
            return Err(Error::Dimension { left: r.num_qubits(), right: n });
        }
        let tab = StabilizerTableau { n, stab, destab };
        tab.check_invariants()?;
        Ok(tab)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stab_rows(&self) -> &[PauliOperator] {
        &self.stab
    }

    pub fn destab_rows(&self) -> &[PauliOperator] {
        &self.destab
    }

    pub(crate) fn rows_mut(&mut self) -> (&mut [PauliOperator], &mut [PauliOperator]) {
        (&mut self.stab, &mut self.destab)
    }

    /// Commutation pattern of a valid tableau. Independence follows from it.
    pub fn check_invariants(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                if i < j && !commutes(&self.stab[i], &self.stab[j])? {
                    return Err(Error::contract(format!("stabilizer rows {i} and {j} anticommute")));
                }
                if i < j && !commutes(&self.destab[i], &self.destab[j])? {
                    return Err(Error::contract(format!("destabilizer rows {i} and {j} anticommute")));
                }
                if commutes(&self.destab[i], &self.stab[j])? == (i == j) {
                    return Err(Error::contract(format!("destabilizer {i} and stabilizer {j} have the wrong commutation")));
                }
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: BasicGate) -> Result<()> {
        if g.max_qubit() >= self.n {
            return Err(Error::contract(format!("gate {g} out of range for {} qubits", self.n)));
        }
        for row in self.stab.iter_mut().chain(self.destab.iter_mut()) {
            conjugate_basic(row, g, false);
        }
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[BasicGate]) -> Result<()> {
        gates.iter().try_for_each(|&g| self.apply_gate(g))
    }

    /// `C P C†` computed from the rows.
    pub fn image(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension { left: p.num_qubits(), right: self.n });
        }
        let mut acc = PauliOperator::identity(self.n);
        // Exponent of i, with Y_q = i X_q Z_q.
        let mut k = if p.sign().is_negative() { 2u32 } else { 0 };
        for q in 0..self.n {
            let (x, z) = (p.x_bit(q), p.z_bit(q));
            if x {
                k += acc.product_exponent(&self.destab[q]);
                acc.xor_bits(&self.destab[q]);
                acc.set_sign(Sign::Plus);
            }
            if z {
                k += acc.product_exponent(&self.stab[q]);
                acc.xor_bits(&self.stab[q]);
                acc.set_sign(Sign::Plus);
            }
            if x && z {
                k += 1;
            }
        }
        match k % 4 {
            0 => Ok(acc),
            2 => Ok(acc.with_sign(Sign::Minus)),
            _ => Err(Error::contract("tableau rows do not form a valid Clifford image")),
        }
    }

    /// Replaces `C` by `C g` (or `C g†` when `inverse`): only rows on the
    /// gate's qubits change.
    pub fn prepend(&mut self, g: BasicGate, inverse: bool) -> Result<()> {
        if g.max_qubit() >= self.n {
            return Err(Error::contract(format!("gate {g} out of range for {} qubits", self.n)));
        }
        let mut updates = Vec::new();
        for q in g.qubits() {
            let mut z = PauliOperator::z(self.n, q);
            let mut x = PauliOperator::x(self.n, q);
            conjugate_basic(&mut z, g, inverse);
            conjugate_basic(&mut x, g, inverse);
            updates.push((q, self.image(&z)?, self.image(&x)?));
        }
        for (q, z, x) in updates {
            self.stab[q] = z;
            self.destab[q] = x;
        }
        Ok(())
    }
}

fn pauli_from_symplectic(n: usize, v: &BitSet) -> PauliOperator {
    let mut p = PauliOperator::identity(n);
    for q in 0..n {
        p.set(q, Pauli::from_bits(v.get(q), v.get(n + q)));
    }
    p
}

/// Completes `m` independent commuting generators to a full tableau.
///
/// The returned stabilizers start with `gens` unchanged. Destabilizers for
/// the given generators are found by solving the linear system
/// `⟨d_i, g_j⟩ = δ_ij`; the remaining pairs come from symplectic
/// Gram–Schmidt over the single-qubit `X` and `Z` operators.
pub fn extend_to_full_set(gens: &[PauliOperator]) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>)> {
    let n = match gens.first() {
        Some(g) => g.num_qubits(),
        None => return Err(Error::contract("an empty generator list has no qubit count; use extend_to_full_set_n")),
    };
    extend_to_full_set_n(n, gens)
}

/// As [`extend_to_full_set`], with the qubit count given explicitly so that
/// an empty generator list is allowed.
pub fn extend_to_full_set_n(n: usize, gens: &[PauliOperator]) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>)> {
    let m = gens.len();
    if m > n {
        return Err(Error::contract(format!("{m} generators on {n} qubits")));
    }
    for (i, g) in gens.iter().enumerate() {
        if g.num_qubits() != n {
            return Err(Error::Dimension { left: g.num_qubits(), right: n });
        }
        for (j, h) in gens.iter().enumerate().take(i) {
            if g.anticommutes_unchecked(h) {
                return Err(Error::contract(format!("generators {j} and {i} anticommute")));
            }
        }
    }
    let mut basis = DependenceBasis::new(n);
    for (i, g) in gens.iter().enumerate() {
        if !basis.insert(g)? {
            let idx = basis.query(g)?.unwrap_or_default();
            return Err(Error::contract(format!("generator {i} is dependent on generators {idx:?}")));
        }
    }

    // Rows of the linear map d -> (<d, g_j>)_j, in (d_x, d_z) coordinates.
    let mut rows: Vec<(BitSet, BitSet)> = gens
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let mut r = BitSet::new();
            for q in 0..n {
                if g.z_bit(q) {
                    r.toggle(q);
                }
                if g.x_bit(q) {
                    r.toggle(n + q);
                }
            }
            (r, BitSet::singleton(j))
        })
        .collect();
    let mut pivots = Vec::with_capacity(m);
    for l in 0..m {
        let pivot = rows[l].0.first().expect("independent generators give full row rank");
        for r in 0..m {
            if r != l && rows[r].0.get(pivot) {
                let (a, b) = (rows[l].0.clone(), rows[l].1.clone());
                rows[r].0.xor_with(&a);
                rows[r].1.xor_with(&b);
            }
        }
        pivots.push(pivot);
    }
    let mut destab: Vec<PauliOperator> = (0..m)
        .map(|i| {
            let v: BitSet = (0..m).filter(|&l| rows[l].1.get(i)).map(|l| pivots[l]).collect();
            pauli_from_symplectic(n, &v)
        })
        .collect();
    for j in 0..m {
        for i in 0..j {
            if destab[j].anticommutes_unchecked(&destab[i]) {
                destab[j].xor_bits(&gens[i]);
            }
        }
    }

    let mut stab: Vec<PauliOperator> = gens.to_vec();
    let project = |v: &mut PauliOperator, stab: &[PauliOperator], destab: &[PauliOperator]| {
        for (a, b) in stab.iter().zip(destab) {
            let with_b = v.anticommutes_unchecked(b);
            let with_a = v.anticommutes_unchecked(a);
            if with_b {
                v.xor_bits(a);
            }
            if with_a {
                v.xor_bits(b);
            }
        }
        v.set_sign(Sign::Plus);
    };
    let mut pool: Vec<PauliOperator> =
        (0..n).flat_map(|q| [PauliOperator::z(n, q), PauliOperator::x(n, q)]).collect();
    while stab.len() < n {
        let mut v = pool.remove(0);
        project(&mut v, &stab, &destab);
        if v.is_identity() {
            continue;
        }
        let mut partner = None;
        for (idx, w) in pool.iter().enumerate() {
            let mut w = w.clone();
            project(&mut w, &stab, &destab);
            if w.anticommutes_unchecked(&v) {
                partner = Some((idx, w));
                break;
            }
        }
        let (idx, w) = partner.expect("symplectic form is non-degenerate on the complement");
        pool.remove(idx);
        stab.push(v);
        destab.push(w);
    }
    Ok((stab, destab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{cx_matrix, dagger, dense_pauli, h_2x2, mat_close, mat_mul, on_qubit, random_commuting_set, random_pauli, s_2x2, Mat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn gate_matrix(n: usize, g: BasicGate) -> Mat {
        match g {
            BasicGate::H(q) => on_qubit(n, q, &h_2x2()),
            BasicGate::S(q) => on_qubit(n, q, &s_2x2()),
            BasicGate::CX(a, b) => cx_matrix(n, a, b),
        }
    }

    fn random_gates(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<BasicGate> {
        (0..len)
            .map(|_| match rng.random_range(0..3) {
                0 => BasicGate::H(rng.random_range(0..n)),
                1 => BasicGate::S(rng.random_range(0..n)),
                _ if n < 2 => BasicGate::H(0),
                _ => {
                    let a = rng.random_range(0..n);
                    let mut b = rng.random_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    BasicGate::CX(a, b)
                }
            })
            .collect()
    }

    fn composite(n: usize, gates: &[BasicGate]) -> Mat {
        let mut u = crate::testutil::eye(1 << n);
        for &g in gates {
            u = mat_mul(&gate_matrix(n, g), &u);
        }
        u
    }

    #[test]
    fn single_gate_examples() {
        let mut t = StabilizerTableau::identity(2);
        t.apply_gate(BasicGate::H(0)).unwrap();
        assert_eq!(t.stab_rows()[0], p("XI"));
        let mut t = StabilizerTableau::identity(2);
        t.apply_gate(BasicGate::S(0)).unwrap();
        assert_eq!(t.destab_rows()[0], p("YI"));
        assert_eq!(conjugate_pauli(&[BasicGate::CX(0, 1)], &p("ZI"), Direction::Forward).unwrap(), p("ZI"));
        assert_eq!(conjugate_pauli(&[BasicGate::H(0)], &p("ZI"), Direction::Forward).unwrap(), p("XI"));
    }

    #[test]
    fn basic_rules_match_dense() {
        for n in 1..=3 {
            for g in [BasicGate::H(n - 1), BasicGate::S(0)].into_iter().chain((n >= 2).then_some(BasicGate::CX(n - 1, 0))) {
                let u = gate_matrix(n, g);
                for _ in 0..1 {
                    for k in 0..4usize.pow(n as u32) {
                        let letters: Vec<Pauli> = (0..n).map(|q| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][(k >> (2 * q)) & 3]).collect();
                        for sign in [Sign::Plus, Sign::Minus] {
                            let pp = PauliOperator::from_paulis(sign, &letters);
                            let mut fwd = pp.clone();
                            conjugate_basic(&mut fwd, g, false);
                            let expect = mat_mul(&mat_mul(&u, &dense_pauli(&pp)), &dagger(&u));
                            assert!(mat_close(&expect, &dense_pauli(&fwd), 1e-12), "{g}: {pp} -> {fwd}");
                            let mut inv = pp.clone();
                            conjugate_basic(&mut inv, g, true);
                            let expect = mat_mul(&mat_mul(&dagger(&u), &dense_pauli(&pp)), &u);
                            assert!(mat_close(&expect, &dense_pauli(&inv), 1e-12), "{g}†: {pp} -> {inv}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn random_circuits_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.random_range(1..=4);
            let gates = random_gates(&mut rng, n, 20);
            let u = composite(n, &gates);
            let mut t = StabilizerTableau::identity(n);
            t.apply_gates(&gates).unwrap();
            t.check_invariants().unwrap();
            for q in 0..n {
                let z = dense_pauli(&PauliOperator::z(n, q));
                assert!(mat_close(&mat_mul(&mat_mul(&u, &z), &dagger(&u)), &dense_pauli(&t.stab_rows()[q]), 1e-10));
            }
            let r = random_pauli(&mut rng, n);
            let fwd = conjugate_pauli(&gates, &r, Direction::Forward).unwrap();
            assert!(mat_close(&mat_mul(&mat_mul(&u, &dense_pauli(&r)), &dagger(&u)), &dense_pauli(&fwd), 1e-10));
            let rev = conjugate_pauli(&gates, &r, Direction::Reverse).unwrap();
            assert!(mat_close(&mat_mul(&mat_mul(&dagger(&u), &dense_pauli(&r)), &u), &dense_pauli(&rev), 1e-10));
            assert_eq!(conjugate_pauli(&gates, &fwd, Direction::Reverse).unwrap(), r);
            assert_eq!(t.image(&r).unwrap(), fwd);
        }
    }

    #[test]
    fn prepend_composes_on_the_right() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = rng.random_range(1..=5);
            let gates = random_gates(&mut rng, n, 25);
            let extra = random_gates(&mut rng, n, 6);
            let mut t = StabilizerTableau::identity(n);
            t.apply_gates(&gates).unwrap();
            for &g in extra.iter().rev() {
                t.prepend(g, false).unwrap();
            }
            let mut direct = StabilizerTableau::identity(n);
            direct.apply_gates(&extra).unwrap();
            direct.apply_gates(&gates).unwrap();
            assert_eq!(t, direct);
            let inv = inverse_word(&extra);
            for &g in &extra {
                t.prepend(g, true).unwrap();
            }
            let mut direct = StabilizerTableau::identity(n);
            direct.apply_gates(&extra).unwrap();
            direct.apply_gates(&inv).unwrap();
            direct.apply_gates(&gates).unwrap();
            assert_eq!(t, direct);
        }
    }

    #[test]
    fn inverse_word_undoes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let gates = random_gates(&mut rng, 3, 30);
        let mut t = StabilizerTableau::identity(3);
        t.apply_gates(&gates).unwrap();
        t.apply_gates(&inverse_word(&gates)).unwrap();
        assert_eq!(t, StabilizerTableau::identity(3));
    }

    #[test]
    fn extension_examples() {
        let zs: Vec<_> = (0..3).map(|q| PauliOperator::z(3, q)).collect();
        let (s, d) = extend_to_full_set(&zs).unwrap();
        assert_eq!(s, zs);
        StabilizerTableau::from_rows(s, d).unwrap();
        let (s, d) = extend_to_full_set(&[p("XX")]).unwrap();
        assert_eq!(s[0], p("XX"));
        StabilizerTableau::from_rows(s, d).unwrap();
        assert!(matches!(extend_to_full_set(&[p("XI"), p("ZI")]), Err(Error::Contract(_))));
        assert!(matches!(extend_to_full_set(&[p("XI"), p("-XI")]), Err(Error::Contract(_))));
        let (s, d) = extend_to_full_set_n(2, &[]).unwrap();
        StabilizerTableau::from_rows(s, d).unwrap();
    }

    #[test]
    fn random_extensions_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..500 {
            let n = rng.random_range(1..=8);
            let m = rng.random_range(0..=n);
            let gens = random_commuting_set(&mut rng, n, m);
            let (s, d) = extend_to_full_set_n(n, &gens).unwrap();
            assert_eq!(&s[..m], &gens[..]);
            StabilizerTableau::from_rows(s, d).unwrap();
        }
    }
}
