//! End-to-end compression of Clifford+T circuits.

use std::fmt;

use crate::circuit::{Circuit, Structure};
use crate::dense::{exact_distribution, exact_distribution_driver, exact_distribution_static, Distribution};
use crate::error::{Error, Result};
use crate::gadgets::{apply_a_to_zero, gadgetize, gadgetize_postselected};
use crate::pbc::{compile, compile_nonadaptive, compile_postselected, StaticProgram};
use crate::synth::{emit_adaptive, emit_cm, AdaptiveDriver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PipelineMode {
    /// Gadgets with corrections; adaptive circuits give an adaptive driver.
    Plain,
    /// Postselected gadgets, compiled to a CM circuit on the magic register.
    PostselectedA,
    /// Postselected gadgets, then every `|0⟩` line fed from `|A⟩`.
    PostselectedB,
}

impl PipelineMode {
    pub fn name(self) -> &'static str {
        match self {
            PipelineMode::Plain => "plain",
            PipelineMode::PostselectedA => "postselected-a",
            PipelineMode::PostselectedB => "postselected-b",
        }
    }
}

/// Result of [`compress_pipeline`].
#[derive(Debug, Clone)]
pub enum Compressed {
    /// A CM circuit on the magic register plus the classical reconstruction.
    Cm { circuit: Circuit, program: StaticProgram },
    /// An adaptive driver over the magic register.
    Adaptive(AdaptiveDriver),
    /// A postselected circuit whose inputs are all `|A⟩`, sampled directly.
    Direct(Circuit),
}

impl Compressed {
    /// Exact output distribution of the compressed form, in the original
    /// circuit's output order.
    pub fn exact_distribution(&self) -> Result<Distribution> {
        match self {
            Compressed::Cm { circuit, program } => program.push_forward(&exact_distribution(circuit)?),
            Compressed::Adaptive(d) => exact_distribution_driver(d),
            Compressed::Direct(c) => exact_distribution(c),
        }
    }

    /// Width of the compressed register.
    pub fn num_lines(&self) -> usize {
        match self {
            Compressed::Cm { circuit, .. } | Compressed::Direct(circuit) => circuit.num_lines,
            Compressed::Adaptive(d) => d.num_qubits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineReport {
    pub mode: PipelineMode,
    pub original_lines: usize,
    pub original_gates: usize,
    pub t_count: usize,
    pub compressed_lines: usize,
    /// Quantum measurements of the compiled program (`None` when adaptive or direct).
    pub quantum_measurements: Option<usize>,
    pub coins: Option<usize>,
    pub emitted_gates: Option<usize>,
    pub emitted_measurements: Option<usize>,
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        writeln!(f, "mode={}", self.mode.name())?;
        writeln!(f, "n={}", self.original_lines)?;
        writeln!(f, "gates_in={}", self.original_gates)?;
        writeln!(f, "t_count={}", self.t_count)?;
        writeln!(f, "t={}", self.compressed_lines)?;
        writeln!(f, "s={}", opt(self.quantum_measurements))?;
        writeln!(f, "coins={}", opt(self.coins))?;
        writeln!(f, "gates_out={}", opt(self.emitted_gates))?;
        writeln!(f, "measurements_out={}", opt(self.emitted_measurements))
    }
}

/// Gadgetizes, compiles and re-emits `c` according to `mode`.
pub fn compress_pipeline(c: &Circuit, mode: PipelineMode) -> Result<(Compressed, PipelineReport)> {
    c.validate()?;
    let gadgetized = match mode {
        PipelineMode::Plain => gadgetize(c)?,
        PipelineMode::PostselectedA | PipelineMode::PostselectedB => gadgetize_postselected(c)?,
    };
    let adaptive = gadgetized.classify().structure == Structure::Adaptive;
    let compressed = match mode {
        PipelineMode::PostselectedB => {
            if adaptive {
                return Err(Error::contract("the |A⟩-prefix path needs a circuit without classical control"));
            }
            let direct = apply_a_to_zero(&gadgetized.defer_measurements()?)?;
            Compressed::Direct(direct.normalize_measurements_to_end()?)
        }
        _ if adaptive => {
            let prog = if mode == PipelineMode::Plain { compile(&gadgetized)? } else { compile_postselected(&gadgetized)? };
            Compressed::Adaptive(emit_adaptive(prog))
        }
        _ => {
            let program = compile_nonadaptive(&gadgetized)?;
            Compressed::Cm { circuit: emit_cm(&program)?, program }
        }
    };
    let (s, coins, gates, meas) = match &compressed {
        Compressed::Cm { circuit, program } => {
            (Some(program.num_quantum()), Some(program.coins), Some(circuit.gates().count()), Some(circuit.num_measurements()))
        }
        Compressed::Direct(d) => (None, None, Some(d.gates().count()), Some(d.num_measurements())),
        Compressed::Adaptive(_) => (None, None, None, None),
    };
    let report = PipelineReport {
        mode,
        original_lines: c.num_lines,
        original_gates: c.gates().count(),
        t_count: c.t_count(),
        compressed_lines: compressed.num_lines(),
        quantum_measurements: s,
        coins,
        emitted_gates: gates,
        emitted_measurements: meas,
    };
    Ok((compressed, report))
}

/// Exact distribution of a static program, for callers holding only the
/// program.
pub fn static_distribution(p: &StaticProgram) -> Result<Distribution> {
    exact_distribution_static(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::dense::tvd;
    use crate::random::{random_circuit, CircuitShape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clifford_only_compresses_to_nothing() {
        let mut c = Circuit::new(3);
        c.gate(GateKind::H, &[0]).gate(GateKind::CX, &[0, 1]).measure(0, "a").measure(1, "b").measure(2, "c");
        let (out, report) = compress_pipeline(&c, PipelineMode::Plain).unwrap();
        assert_eq!(report.compressed_lines, 0);
        assert!(tvd(&out.exact_distribution().unwrap(), &exact_distribution(&c).unwrap()) < 1e-12);
    }

    #[test]
    fn register_width_is_t_count() {
        let mut c = Circuit::new(2);
        c.gate(GateKind::H, &[0]).gate(GateKind::T, &[0]).gate(GateKind::CX, &[0, 1]).gate(GateKind::Tdg, &[1]);
        c.gate(GateKind::H, &[1]).gate(GateKind::T, &[1]).measure(0, "a").measure(1, "b");
        for mode in [PipelineMode::Plain, PipelineMode::PostselectedA] {
            let (out, report) = compress_pipeline(&c, mode).unwrap();
            assert_eq!(report.compressed_lines, 3, "{mode:?}");
            let expected = exact_distribution(&c).unwrap();
            assert!(tvd(&out.exact_distribution().unwrap(), &expected) < 1e-9, "{mode:?}");
        }
        let (_, report) = compress_pipeline(&c, PipelineMode::PostselectedB).unwrap();
        assert_eq!(report.compressed_lines, 2 * 2 + 3);
    }

    #[test]
    fn both_postselected_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let mut checked = 0;
        while checked < 20 {
            let shape = CircuitShape { zero_lines: 2, magic_lines: 0, gates: 8, mid_measurements: 0, postselect_prob: 0.3, t_prob: 0.4, ..Default::default() };
            let c = random_circuit(&mut rng, &shape);
            if c.t_count() > 3 {
                continue;
            }
            let expected = exact_distribution(&c);
            for mode in [PipelineMode::PostselectedA, PipelineMode::PostselectedB] {
                let got = compress_pipeline(&c, mode).and_then(|(o, _)| o.exact_distribution());
                match (&expected, got) {
                    (Ok(p), Ok(q)) => assert!(tvd(p, &q) < 1e-9, "{mode:?}\n{c}"),
                    (Err(Error::ProbabilityZero { .. }), Err(Error::ProbabilityZero { .. })) => {}
                    (e, g) => panic!("{mode:?}: {e:?} vs {g:?}\n{c}"),
                }
            }
            checked += 1;
        }
    }
}
