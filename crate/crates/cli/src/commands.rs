use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clifford_magic::circuit::{parse, Circuit};
use clifford_magic::classes::{
    anticoncentration_estimate, anticoncentration_with, default_u_len, eq5_deviation, theta_sampling_check, theta_sampling_exact,
    ClassSpec,
};
use clifford_magic::dense::{additive_distance, exact_distribution, exact_distribution_hybrid, exact_distribution_static, exact_distribution_with, tvd, Budget};
use clifford_magic::gadgets::{gadgetize, gadgetize_postselected};
use clifford_magic::pbc::{compile, compile_nonadaptive, compile_postselected, StaticProgram};
use clifford_magic::pipeline::{compress_pipeline, Compressed, PipelineMode};
use clifford_magic::{Error, GateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{realize, Command, Emit, GenClass, Mode, Path, StatsClass};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Param(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Syntax { .. } | Error::Semantic { .. }) | CliError::Io(..) | CliError::Param(_) => 2,
            CliError::Core(Error::ProbabilityZero { .. } | Error::PostselectionMiss { .. }) => 4,
            CliError::Core(Error::Budget(_)) => 5,
            CliError::Core(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Param(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Compile { input, mode, path, emit, seed, out, report } => {
            compile_cmd(&input, pipeline_mode(mode, path), emit, seed, out.as_deref(), report.as_deref())
        }
        Command::Verify { input, against, program, mode, path, budget, tol } => {
            verify_cmd(&input, &against, program.as_deref(), pipeline_mode(mode, path), budget, tol)
        }
        Command::Gen { class, n, p, depth, v_word, u_len, count, seed, outdir } => {
            let spec = class_spec(class.into(), n, p, depth, &v_word, u_len)?;
            gen_cmd(&spec, count, seed, &outdir)
        }
        Command::Stats { class, n, p, depth, v_word, u_len, alpha, samples, outcomes, seed } => {
            stats_cmd(class, n, p, depth, &v_word, u_len, alpha, samples, outcomes, seed)
        }
    }
}

fn pipeline_mode(mode: Mode, path: Path) -> PipelineMode {
    match (mode, path) {
        (Mode::Plain, _) => PipelineMode::Plain,
        (Mode::Postselected, Path::A) => PipelineMode::PostselectedA,
        (Mode::Postselected, Path::B) => PipelineMode::PostselectedB,
    }
}

fn read(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &FsPath, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_circuit(path: &FsPath) -> Result<Circuit> {
    Ok(parse(&read(path)?)?)
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rng().random())
}

fn compile_cmd(input: &FsPath, mode: PipelineMode, emit: Emit, seed: Option<u64>, out: Option<&FsPath>, report: Option<&FsPath>) -> Result<ExitCode> {
    let c = read_circuit(input)?;
    let seed = seed_or_entropy(seed);
    let (compressed, summary) = compress_pipeline(&c, mode)?;
    let mut rep = summary.to_string();
    let (structure, emitted) = match (compressed, emit) {
        (Compressed::Cm { circuit, .. }, Emit::Cm) => ("static", circuit.serialize()),
        (Compressed::Cm { program, .. }, Emit::Pbc) => ("static", program.dump()),
        (Compressed::Direct(d), Emit::Cm) => ("direct", d.serialize()),
        (Compressed::Direct(d), Emit::Pbc) => ("direct", compile_nonadaptive(&d)?.dump()),
        (Compressed::Adaptive(driver), emit) => {
            let run = realize::run(driver, seed)?;
            let _ = writeln!(rep, "run_measurements={}", run.measurements);
            let _ = writeln!(rep, "run_coins={}", run.coins);
            let _ = writeln!(rep, "run_output={}", run.output);
            ("adaptive", if emit == Emit::Cm { run.circuit.serialize() } else { run.transcript })
        }
    };
    let _ = writeln!(rep, "structure={structure}");
    let _ = writeln!(rep, "seed={seed}");
    match out {
        Some(p) => write(p, &emitted)?,
        None => print!("{emitted}"),
    }
    match (report, out) {
        (Some(p), _) => write(p, &rep)?,
        (None, Some(_)) => print!("{rep}"),
        (None, None) => eprint!("{rep}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(input: &FsPath, against: &str, program: Option<&FsPath>, mode: PipelineMode, lines: usize, tol: f64) -> Result<ExitCode> {
    let c = read_circuit(input)?;
    let budget = Budget { max_lines: lines, ..Budget::default() };
    let within = |n: usize| {
        if n > lines {
            Err(Error::Budget(format!("{n} lines exceed the dense limit of {lines}")))
        } else {
            Ok(())
        }
    };
    let reference = exact_distribution_with(&c, budget)?;
    let other = match against {
        "compiled" => {
            let (compressed, _) = compress_pipeline(&c, mode)?;
            within(compressed.num_lines())?;
            compressed.exact_distribution()?
        }
        // The interactive program itself, without re-emission as a circuit.
        "self" => {
            let prog = if mode == PipelineMode::Plain { compile(&gadgetize(&c)?)? } else { compile_postselected(&gadgetize_postselected(&c)?)? };
            within(prog.num_magic())?;
            exact_distribution_hybrid(&prog)?
        }
        file => {
            let text = read(FsPath::new(file))?;
            if text.trim_start().starts_with("pbc") {
                let prog = StaticProgram::parse(&text)?;
                within(prog.t)?;
                exact_distribution_static(&prog)?
            } else {
                let other = parse(&text)?;
                let dist = exact_distribution_with(&other, budget)?;
                match program {
                    Some(p) => StaticProgram::parse(&read(p)?)?.push_forward(&dist)?,
                    None => dist,
                }
            }
        }
    };
    let additive = additive_distance(&reference, &other);
    let total = tvd(&reference, &other);
    println!("additive_distance={additive:e}");
    println!("tvd={total:e}");
    println!("tol={tol:e}");
    if additive <= tol && total <= tol {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: distributions differ by more than {tol:e}");
        Ok(ExitCode::from(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RealClass {
    IqpIsing,
    SparseIqp,
    Rcs,
    Conjugated,
}

impl From<GenClass> for RealClass {
    fn from(c: GenClass) -> Self {
        match c {
            GenClass::IqpIsing => RealClass::IqpIsing,
            GenClass::SparseIqp => RealClass::SparseIqp,
            GenClass::Rcs => RealClass::Rcs,
            GenClass::Conjugated => RealClass::Conjugated,
        }
    }
}

fn parse_word(word: &str) -> Result<Vec<GateKind>> {
    word.split(',')
        .map(|t| GateKind::from_name(t.trim()).ok_or_else(|| CliError::Param(format!("unknown gate {:?} in --v-word", t.trim()))))
        .collect()
}

fn class_spec(class: RealClass, n: usize, p: f64, depth: usize, v_word: &str, u_len: Option<usize>) -> Result<ClassSpec> {
    let spec = match class {
        RealClass::IqpIsing => ClassSpec::IqpIsing { n },
        RealClass::SparseIqp => ClassSpec::SparseIqp { n, p },
        RealClass::Rcs => ClassSpec::Rcs { n, depth },
        RealClass::Conjugated => ClassSpec::Conjugated { n, v_word: parse_word(v_word)?, u_len: u_len.unwrap_or_else(|| default_u_len(n)) },
    };
    if let Err(Error::Contract(m)) = spec.check() {
        return Err(CliError::Param(format!("invalid parameters: {m}")));
    }
    Ok(spec)
}

fn gen_cmd(spec: &ClassSpec, count: usize, seed: Option<u64>, outdir: &FsPath) -> Result<ExitCode> {
    let seed = seed_or_entropy(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fs::create_dir_all(outdir).map_err(|e| CliError::Io(outdir.to_path_buf(), e))?;
    let class = spec.class_id();
    let mut manifest = String::new();
    for i in 0..count {
        let inst = spec.generate(rng.random())?;
        let name = format!("{class}-{i:03}.circ");
        write(&outdir.join(&name), &inst.circuit.serialize())?;
        let _ = writeln!(manifest, "file {name}");
        manifest.push_str(&inst.manifest());
        manifest.push('\n');
    }
    write(&outdir.join("manifest.txt"), &manifest)?;
    println!("class={class}");
    println!("count={count}");
    println!("seed={seed}");
    println!("outdir={}", outdir.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn stats_cmd(
    class: StatsClass,
    n: usize,
    p: f64,
    depth: usize,
    v_word: &str,
    u_len: Option<usize>,
    alpha: f64,
    samples: usize,
    outcomes: usize,
    seed: Option<u64>,
) -> Result<ExitCode> {
    if !(alpha > 0.0) || outcomes == 0 || samples == 0 {
        return Err(CliError::Param("--alpha, --samples and --outcomes must be positive".into()));
    }
    let seed = seed_or_entropy(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = samples.div_ceil(outcomes);
    let real = match class {
        StatsClass::IqpIsing => Some(RealClass::IqpIsing),
        StatsClass::SparseIqp => Some(RealClass::SparseIqp),
        StatsClass::Rcs => Some(RealClass::Rcs),
        StatsClass::Conjugated => Some(RealClass::Conjugated),
        StatsClass::Uniform | StatsClass::Point => None,
    };
    println!("class={}", class_name(class));
    println!("seed={seed}");
    let Some(real) = real else {
        if n == 0 {
            return Err(CliError::Param("--n must be positive".into()));
        }
        let mut toy = Circuit::new(n);
        for q in 0..n {
            if class == StatsClass::Uniform {
                toy.gate(GateKind::H, &[q]);
            }
            toy.measure(q, format!("x{q}"));
        }
        let dist = exact_distribution(&toy)?;
        let report = anticoncentration_with(n, instances, outcomes, alpha, &mut rng, |_| Ok(dist.clone()))?;
        print!("{report}");
        println!("eq5=not-applicable");
        println!("eq6=not-applicable");
        return Ok(ExitCode::SUCCESS);
    };
    let is_iqp = matches!(real, RealClass::IqpIsing | RealClass::SparseIqp);
    // Reduced instances for the exhaustive exchange checks.
    let small = |m: usize| match real {
        RealClass::Rcs => class_spec(real, m.max(2), p, depth.min(3), v_word, None),
        _ => class_spec(real, m, p, depth, v_word, None),
    };
    let spec = class_spec(real, n, p, depth, v_word, u_len)?;
    let report = anticoncentration_estimate(&spec, instances, outcomes, alpha, &mut rng)?;
    print!("{report}");

    let eq5_spec = small(2)?;
    let mut worst = 0.0f64;
    let eq5_instances = 3;
    for _ in 0..eq5_instances {
        worst = worst.max(eq5_deviation(&eq5_spec.generate(rng.random())?)?);
    }
    println!("eq5_n={}", eq5_spec.num_lines());
    println!("eq5_instances={eq5_instances}");
    println!("eq5_max_deviation={worst:e}");

    if is_iqp {
        let exact = theta_sampling_exact(&small(2)?)?;
        for line in exact.to_string().lines() {
            println!("eq6_exact_{line}");
        }
        let sampled = theta_sampling_check(&small(n.min(3))?, 300, &mut rng)?;
        for line in sampled.to_string().lines() {
            println!("eq6_sampled_{line}");
        }
    } else {
        println!("eq6=not-applicable");
    }
    Ok(ExitCode::SUCCESS)
}


fn class_name(c: StatsClass) -> &'static str {
    match c {
        StatsClass::IqpIsing => "iqp-ising",
        StatsClass::SparseIqp => "sparse-iqp",
        StatsClass::Rcs => "rcs",
        StatsClass::Conjugated => "conjugated-clifford",
        StatsClass::Uniform => "uniform",
        StatsClass::Point => "point",
    }
}
