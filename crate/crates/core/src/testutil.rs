//! Dense matrix helpers used as independent oracles in unit tests.
//!
//! Qubit `k` is bit `k` of a basis index, so an operator `A_{n-1} ⊗ … ⊗ A_0`
//! is built with the highest qubit as the leftmost Kronecker factor.

use num_complex::Complex64;

pub use crate::random::{random_commuting_set, random_pauli};
use crate::pauli::{Pauli, PauliOperator};

pub type Mat = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (da, db) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); da * db]; da * db];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn mat_scale(a: &Mat, s: Complex64) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn dagger(a: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn mat_close(a: &Mat, b: &Mat, tol: f64) -> bool {
    a.iter().zip(b).all(|(r1, r2)| r1.iter().zip(r2).all(|(x, y)| (x - y).norm() <= tol))
}

pub fn pauli_2x2(p: Pauli) -> Mat {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => vec![vec![o, z], vec![z, o]],
        Pauli::X => vec![vec![z, o], vec![o, z]],
        Pauli::Y => vec![vec![z, -i], vec![i, z]],
        Pauli::Z => vec![vec![o, z], vec![z, -o]],
    }
}

/// Embeds single-qubit matrices, `factors[k]` acting on qubit `k`.
pub fn tensor(factors: &[Mat]) -> Mat {
    let mut out = vec![vec![c(1.0, 0.0)]];
    for f in factors.iter().rev() {
        out = kron(&out, f);
    }
    out
}

pub fn dense_pauli(p: &PauliOperator) -> Mat {
    let factors: Vec<Mat> = p.letters().into_iter().map(pauli_2x2).collect();
    mat_scale(&tensor(&factors), c(p.sign().as_f64(), 0.0))
}

pub fn h_2x2() -> Mat {
    let s = 1.0 / 2f64.sqrt();
    vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
}

pub fn s_2x2() -> Mat {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.0)]]
}

pub fn on_qubit(n: usize, q: usize, m: &Mat) -> Mat {
    let factors: Vec<Mat> = (0..n).map(|k| if k == q { m.clone() } else { eye(2) }).collect();
    tensor(&factors)
}

/// CX with control `a` and target `b`, built as `|0⟩⟨0|_a ⊗ I + |1⟩⟨1|_a ⊗ X_b`.
pub fn cx_matrix(n: usize, a: usize, b: usize) -> Mat {
    let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
    let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let f0: Vec<Mat> = (0..n).map(|k| if k == a { p0.clone() } else { eye(2) }).collect();
    let f1: Vec<Mat> = (0..n)
        .map(|k| if k == a { p1.clone() } else if k == b { pauli_2x2(Pauli::X) } else { eye(2) })
        .collect();
    let (m0, m1) = (tensor(&f0), tensor(&f1));
    m0.iter().zip(&m1).map(|(r0, r1)| r0.iter().zip(r1).map(|(x, y)| x + y).collect()).collect()
}
