//! Text round trips over a seeded corpus of circuits and programs.

use clifford_magic::circuit::{parse, Circuit};
use clifford_magic::classes::ClassSpec;
use clifford_magic::dense::{additive_distance, exact_distribution, Distribution};
use clifford_magic::pbc::{compile_nonadaptive, StaticProgram};
use clifford_magic::random::{random_circuit, CircuitShape};
use clifford_magic::{Error, GateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<Circuit> {
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();
    for i in 0..40 {
        let shape = CircuitShape {
            zero_lines: r.random_range(1..=4),
            magic_lines: r.random_range(0..=2),
            gates: r.random_range(0..=25),
            mid_measurements: r.random_range(0..=3),
            control_prob: if i % 3 == 0 { 0.4 } else { 0.0 },
            postselect_prob: if i % 4 == 1 { 0.3 } else { 0.0 },
            t_prob: if i % 2 == 0 { 0.3 } else { 0.0 },
        };
        out.push(random_circuit(&mut r, &shape));
    }
    for seed in 0..3 {
        out.push(ClassSpec::IqpIsing { n: 3 }.generate(seed).unwrap().circuit);
        out.push(ClassSpec::Rcs { n: 3, depth: 4 }.generate(seed).unwrap().circuit);
        out.push(ClassSpec::Conjugated { n: 2, v_word: vec![GateKind::H, GateKind::T], u_len: 8 }.generate(seed).unwrap().circuit);
    }
    out.push(ClassSpec::SparseIqp { n: 4, p: 0.5 }.generate(9).unwrap().circuit);
    out
}

#[test]
fn corpus_round_trips() {
    let corpus = corpus();
    assert_eq!(corpus.len(), 50);
    for c in &corpus {
        let text = c.serialize();
        let back = parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(&back, c);
        assert_eq!(back.serialize(), text);
    }
}

#[test]
fn corpus_distributions_survive_the_text_form() {
    for c in corpus().iter().take(20) {
        let back = parse(&c.serialize()).unwrap();
        match (exact_distribution(c), exact_distribution(&back)) {
            (Ok(p), Ok(q)) => assert!(additive_distance(&p, &q) == 0.0),
            (Err(Error::ProbabilityZero { .. }), Err(Error::ProbabilityZero { .. })) => {}
            (a, b) => panic!("{a:?} vs {b:?}"),
        }
    }
}

#[test]
fn static_programs_round_trip() {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let shape = CircuitShape { zero_lines: 2, magic_lines: 3, gates: 20, mid_measurements: 2, postselect_prob: 0.2, ..Default::default() };
        let c = random_circuit(&mut r, &shape);
        let Ok(p) = compile_nonadaptive(&c) else { continue };
        let text = p.dump();
        let back = StaticProgram::parse(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.dump(), text);
    }
}

#[test]
fn distribution_dumps_round_trip() {
    let c = parse("qubits 2\ninput A Z0\ngate H 1\ngate CX 1 0\nmeasure 0 -> a\nmeasure 1 -> b\n").unwrap();
    let d = exact_distribution(&c).unwrap();
    let back = Distribution::parse_dump(&d.dump()).unwrap();
    assert!(additive_distance(&d, &back) < 1e-13);
}

#[test]
fn malformed_inputs_report_their_line() {
    let cases = [
        ("gate H 0\n", 1),
        ("qubits 1\ngate Q 0\n", 2),
        ("qubits 1\n\n# comment\nmeasure 0 m\n", 4),
        ("qubits 2\ninput Z0\n", 2),
        ("qubits 1\ngate CX 0\n", 2),
    ];
    for (text, line) in cases {
        match parse(text) {
            Err(Error::Syntax { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            Err(Error::Semantic { line: Some(l), .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}
