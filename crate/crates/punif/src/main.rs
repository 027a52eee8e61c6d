use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use punif::cache::{completeness_name, level_set, LevelCache, CACHE_DIR_ENV};
use punif::error::{exit, CliError, Result};
use punif::expr::{GateSource, GateSpec};
use punif::matrix_json::MatrixFile;
use punif::report::{
    render, Coefficient, EnumerateOut, FidelityOut, Format, FourierOut, MembershipOut, NormOut, Representative,
    TesterOut,
};
use punif::verify::run_suite;
use punif_core::hierarchy::{
    fidelity, in_level_with_budget, Completeness, Outcome, Witness, DEFAULT_MAX_LEAVES, DEFAULT_TOL_BASE,
};
use punif_core::matcore::DEFAULT_UNITARITY_TOL;
use punif_core::testersim::{c3_tester, OracleHandle, SwapMode, TesterConfig, DEFAULT_CONFIDENCE};
use punif_core::uniformity::{
    fourier_coeffs, pnorm_exact_with, pnorm_sampled, ExactConfig, NormMode, DEFAULT_MAX_BASE_EVALUATIONS,
};
use punif_core::UnitaryHandle;

const GRAMMAR: &str = "\
Gate expressions:
  expr    := product
  product := tensor (('*' | '·') tensor)*  matrix product, left to right
  tensor  := postfix (('x' | '⊗') postfix)*
  postfix := atom '''*                     adjoint
  atom    := NAME | W[u1,..|v1,..] | exp(i*ANGLE) | '(' expr ')'
  NAME    := I X Y Z H S T CZ CNOT          (d > 2: only I, X, Z and W[..])
  ANGLE   := arithmetic over numbers and pi with + - * / and parentheses
Precedence: adjoint binds tighter than tensor, tensor tighter than product.
I and exp(i*θ) take the size of the surrounding expression; alone they act on
one qudit unless --n is given. Qudit 0 is the leftmost tensor factor.

Exit codes: 0 ok, 1 failure (including verify failures), 2 parse or
argument error, 3 budget exceeded, 4 out-of-scope parameters.";

#[derive(Parser, Debug)]
#[command(name = "punif", version, about = "Pauli uniformity norms, Clifford hierarchy and the level-3 tester", after_help = GRAMMAR)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Base seed for every randomized operation.
    #[arg(long, global = true, env = "PUNIF_SEED", default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PUNIF_THREADS")]
    threads: Option<usize>,
    /// Directory for cached level sets (default: no cache).
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    /// Base tolerance of membership decisions, doubled per level.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_BASE)]
    tol: f64,
    /// Unitarity tolerance for matrix files.
    #[arg(long, global = true, default_value_t = DEFAULT_UNITARITY_TOL)]
    unitarity_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GateArgs {
    /// Gate expression (see below).
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    gate: Option<String>,
    /// JSON matrix file {"n", "d", "re", "im"}.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Number of qudits.
    #[arg(long)]
    n: Option<usize>,
    /// Qudit dimension (prime).
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Print the gate as a matrix file and stop.
    #[arg(long)]
    dump_matrix: bool,
}

impl GateArgs {
    fn spec(&self) -> GateSpec {
        let source = match (&self.gate, &self.matrix) {
            (Some(g), _) => GateSource::Expr(g.clone()),
            (None, Some(p)) => GateSource::File(p.clone()),
            (None, None) => unreachable!("clap requires one of --gate and --matrix"),
        };
        GateSpec { source, n: self.n, d: self.d }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pauli uniformity norm of order k.
    Norm {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, required_unless_present = "dump_matrix")]
        k: Option<u32>,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Samples in sampled mode.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Cap on order-2 base evaluations in exact mode.
        #[arg(long, default_value_t = DEFAULT_MAX_BASE_EVALUATIONS)]
        max_evals: u128,
    },
    /// Weyl-basis Fourier coefficients.
    Fourier {
        #[command(flatten)]
        gate: GateArgs,
        /// List every coefficient, not only the nonzero ones.
        #[arg(long)]
        all: bool,
    },
    /// Decide membership in level k of the Clifford hierarchy.
    Membership {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, required_unless_present = "dump_matrix")]
        k: Option<u32>,
        /// Cap on leaves of the derivative recursion.
        #[arg(long, default_value_t = DEFAULT_MAX_LEAVES)]
        max_leaves: u128,
    },
    /// Degree-k Clifford fidelity.
    Fidelity {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, required_unless_present = "dump_matrix")]
        k: Option<u32>,
    },
    /// Enumerate level k up to phase.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        k: u32,
        /// Include the representative matrices.
        #[arg(long)]
        matrices: bool,
    },
    /// Run the level-3 tester against the gate as an oracle.
    TestC3 {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, default_value_t = 0.02)]
        epsilon: f64,
        /// Override the repetition count derived from epsilon and confidence.
        #[arg(long)]
        repetitions: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
        confidence: f64,
        /// Simulate the swap test on the full controlled-swap state.
        #[arg(long)]
        circuit: bool,
    },
    /// Run the invariant suite: all, algebra, norms, hierarchy or tester.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

/// A rendered report and the exit code to finish with.
struct Output {
    text: String,
    code: u8,
}

fn ok(text: String) -> Result<Output> {
    Ok(Output { text, code: exit::OK })
}

fn resolve(cli: &Cli, gate: &GateArgs) -> Result<std::result::Result<UnitaryHandle, Output>> {
    let u = gate.spec().resolve(cli.unitarity_tol)?;
    if gate.dump_matrix {
        let mut text = MatrixFile::from_operator(&u).to_json();
        text.push('\n');
        return Ok(Err(Output { text, code: exit::OK }));
    }
    Ok(Ok(u))
}

macro_rules! gate_or_dump {
    ($cli:expr, $gate:expr) => {
        match resolve($cli, $gate)? {
            Ok(u) => u,
            Err(dump) => return Ok(dump),
        }
    };
}

fn run(cli: &Cli) -> Result<Output> {
    let cache = cli.cache_dir.as_ref().map(LevelCache::new);
    let start = Instant::now();
    match &cli.command {
        Command::Norm { gate, k, mode, samples, max_evals } => {
            let u = gate_or_dump!(cli, gate);
            let k = &k.unwrap_or_default();
            let reg = u.register();
            let r = match mode {
                ModeArg::Exact => pnorm_exact_with(&u, *k, &ExactConfig { max_base_evaluations: *max_evals })?,
                ModeArg::Sampled => pnorm_sampled(&u, *k, *samples, cli.seed)?,
            };
            let mut out = NormOut {
                n: reg.n,
                d: reg.d.get(),
                order: r.order,
                value: r.value,
                raw: r.raw,
                mode: "exact",
                term_count: None,
                samples: None,
                stderr: None,
                seed: None,
                runtime_ms: 0,
            };
            match r.mode {
                NormMode::Exact { term_count } => out.term_count = Some(term_count),
                NormMode::Sampled { samples, stderr } => {
                    out.mode = "sampled";
                    out.samples = Some(samples);
                    out.stderr = Some(stderr);
                    out.seed = Some(cli.seed);
                }
            }
            out.runtime_ms = start.elapsed().as_millis();
            ok(render(&out, cli.format)?)
        }
        Command::Fourier { gate, all } => {
            let u = gate_or_dump!(cli, gate);
            let reg = u.register();
            let table = fourier_coeffs(&u);
            let support = table.support(1e-12).len();
            let coefficients = table
                .iter()
                .filter(|(_, c)| *all || c.norm() > 1e-12)
                .map(|(a, c)| Coefficient { label: a.to_string(), re: c.re, im: c.im, abs: c.norm() })
                .collect();
            let out = FourierOut {
                n: reg.n,
                d: reg.d.get(),
                parseval: table.parseval(),
                l4_fourth: table.l4_fourth(),
                support,
                coefficients,
                runtime_ms: start.elapsed().as_millis(),
            };
            ok(render(&out, cli.format)?)
        }
        Command::Membership { gate, k, max_leaves } => {
            let u = gate_or_dump!(cli, gate);
            let k = &k.unwrap_or_default();
            let reg = u.register();
            let v = in_level_with_budget(&u, *k, cli.tol, *max_leaves);
            let witness = v.witness.as_ref().map(|w| match w {
                Witness::Phase(theta) => format!("phase {theta}"),
                Witness::Weyl(a) => format!("W{a}"),
                Witness::Directions(hs) => {
                    format!("derivative {}", hs.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(" "))
                }
            });
            let (decision, code) = match v.outcome {
                Outcome::Accepted => ("accept", exit::OK),
                Outcome::Rejected => ("reject", exit::OK),
                Outcome::Undecided => {
                    eprintln!("membership: the recursion needs more than {max_leaves} leaves; raise --max-leaves");
                    ("undecided", exit::BUDGET)
                }
            };
            let out = MembershipOut {
                n: reg.n,
                d: reg.d.get(),
                k: *k,
                decision,
                tolerance: v.tolerance,
                defect: v.defect,
                witness,
                runtime_ms: start.elapsed().as_millis(),
            };
            Ok(Output { text: render(&out, cli.format)?, code })
        }
        Command::Fidelity { gate, k } => {
            let u = gate_or_dump!(cli, gate);
            let k = &k.unwrap_or_default();
            let reg = u.register();
            let (set, _) = level_set(cache.as_ref(), reg.n, reg.d.get(), *k)?;
            let f = fidelity(&u, *k, &set)?;
            let argmax = match k {
                0 => "I".to_string(),
                1 => {
                    let a = reg.label(f.argmax_index);
                    if a.is_zero() {
                        "I".to_string()
                    } else {
                        format!("W{a}")
                    }
                }
                _ => format!("rep[{}]", f.argmax_index),
            };
            let out = FidelityOut {
                n: reg.n,
                d: reg.d.get(),
                k: *k,
                value: f.value,
                argmax,
                argmax_index: f.argmax_index,
                bound: if f.completeness == Completeness::Exact { "exact" } else { "lower-bound" },
                set_size: set.len(),
                construction: set.construction,
                runtime_ms: start.elapsed().as_millis(),
            };
            ok(render(&out, cli.format)?)
        }
        Command::Enumerate { n, d, k, matrices } => {
            let (set, cached) = level_set(cache.as_ref(), *n, *d, *k)?;
            let representatives = matrices.then(|| {
                set.representatives
                    .iter()
                    .enumerate()
                    .map(|(index, u)| {
                        let m = MatrixFile::from_operator(u);
                        Representative { index, re: m.re, im: m.im }
                    })
                    .collect()
            });
            let out = EnumerateOut {
                n: *n,
                d: *d,
                k: *k,
                count: set.len(),
                completeness: completeness_name(set.completeness),
                construction: set.construction,
                cached,
                representatives,
                runtime_ms: start.elapsed().as_millis(),
            };
            ok(render(&out, cli.format)?)
        }
        Command::TestC3 { gate, epsilon, repetitions, confidence, circuit } => {
            let u = gate_or_dump!(cli, gate);
            let mut cfg = TesterConfig::new(*epsilon, *confidence, cli.seed)?;
            if let Some(r) = repetitions {
                cfg.repetitions = *r;
            }
            if *circuit {
                cfg = cfg.with_swap(SwapMode::Circuit);
            }
            let r = c3_tester(&OracleHandle::new(u), &cfg)?;
            let out = TesterOut {
                n: r.n,
                d: r.d,
                k: r.k,
                epsilon: r.epsilon,
                repetitions: r.repetitions,
                estimate: r.estimate,
                threshold: r.threshold,
                decision: u8::from(r.accept),
                queries_u: r.queries_u,
                queries_u_adj: r.queries_u_adj,
                swap: if *circuit { "circuit" } else { "exact" },
                seed: r.seed,
                runtime_ms: start.elapsed().as_millis(),
            };
            ok(render(&out, cli.format)?)
        }
        Command::Verify { suite } => {
            let report = run_suite(suite, cli.seed, cache.as_ref())?;
            let code = if report.all_passed() { exit::OK } else { exit::FAILURE };
            for p in report.properties.iter().filter(|p| p.status == "fail") {
                eprintln!("FAIL {}/{}: {}", p.suite, p.name, p.detail);
            }
            Ok(Output { text: render(&report, cli.format)?, code })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::PARSE } else { exit::OK });
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(exit::FAILURE);
        }
    }
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(exit::FAILURE);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Core(punif_core::Error::BudgetExceeded { .. })) {
                eprintln!("hint: pass --mode sampled, or raise --max-evals");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
