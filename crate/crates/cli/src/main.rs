use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qerasure::channel::{sample_instance, trial_rng, CodeSide, DumpRecord, Side};
use qerasure::code::{random_regular_seed, SeedOptions};
use qerasure::combinatorial::{outcome_of, Peeler};
use qerasure::harness::{
    emit, load_code_ref, run_sweep_on, DecoderConfig, DecoderKind, HarnessError, OutputFormat, SweepSpec, TrialDecoder,
};
use qerasure::io::{write_alist, FormatError};
use qerasure::iterative::{BpConfig, Bpgd, PlainBp, TieBreak};
use qerasure::{CssCode, ErasureDecoder};

#[derive(Parser)]
#[command(name = "qerasure", version, about = "Erasure decoding simulations for quantum LDPC codes")]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep over erasure rates.
    Sweep(SweepArgs),
    /// Check that a code is a valid CSS code.
    Validate(CodeArgs),
    /// Print the parameters of a code.
    DescribeCode(CodeArgs),
    /// Re-decode one dumped instance and print a trace.
    Replay(ReplayArgs),
    /// Generate a random regular classical seed matrix in alist format.
    GenSeed(GenSeedArgs),
}

#[derive(Args)]
struct CodeArgs {
    /// Built-in id (hgp-1600-64, hgp-2025-81, b1-882-24) or a .css/.alist/.lifted file.
    #[arg(long)]
    code: String,
}

#[derive(Args, Clone)]
struct DecoderArgs {
    #[arg(long, default_value = "bpgd")]
    decoder: DecoderKind,
    /// BP iterations per round (T).
    #[arg(long)]
    bp_iters: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    c_opt: Option<f64>,
    #[arg(long)]
    llr_max: Option<f64>,
    #[arg(long)]
    llr_min: Option<f64>,
    /// Pruning depth M for pruned peeling.
    #[arg(long, default_value_t = 1)]
    prune_depth: usize,
    /// Break decimation ties at random with this seed instead of by index.
    #[arg(long)]
    random_ties: Option<u64>,
    /// Score undecodable ML instances by a guessed solution.
    #[arg(long)]
    ml_fair_guess: bool,
    /// TOML file with BP settings (iterations, llr_max, llr_min, c_opt, gamma, tie_break).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value = "x")]
    side: Side,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Comma-separated erasure rates.
    #[arg(long, value_delimiter = ',', required = true)]
    rates: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Stop each point after this many failures.
    #[arg(long)]
    min_failures: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "QERASURE_WORKERS")]
    workers: Option<usize>,
    /// Leave the seconds column empty so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Write failing instances to this file, one record per line.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// File written by `sweep --dump`.
    #[arg(long)]
    dump: PathBuf,
    /// 1-based record number in the dump file.
    #[arg(long, default_value_t = 1)]
    record: usize,
}

#[derive(Args)]
struct GenSeedArgs {
    #[arg(long)]
    vars: usize,
    #[arg(long)]
    checks: usize,
    #[arg(long, default_value_t = 3)]
    var_degree: usize,
    #[arg(long, default_value_t = 4)]
    check_degree: usize,
    /// Allow 4-cycles in the Tanner graph.
    #[arg(long)]
    allow_four_cycles: bool,
    /// Accept rank-deficient matrices.
    #[arg(long)]
    any_rank: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io { .. } | HarnessError::Format(FormatError::Io { .. }) => Failure::Io(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.verbose { "info" } else { "warn" }))
        .init();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Validate(a) => validate(a),
        Command::DescribeCode(a) => describe(a),
        Command::Replay(a) => replay(a),
        Command::GenSeed(a) => gen_seed(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn load(code: &str) -> Result<Arc<CssCode>, Failure> {
    Ok(Arc::new(load_code_ref(code)?))
}

fn decoder_config(args: &DecoderArgs) -> Result<DecoderConfig, Failure> {
    let mut cfg = DecoderConfig::new(args.decoder);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        let bad = |e: toml::de::Error| Failure::Validation(format!("{}: {e}", path.display()));
        cfg.bp = toml::from_str(&text).map_err(bad)?;
        // values set in the file win over the per-rate tables
        let keys: toml::Table = toml::from_str(&text).map_err(bad)?;
        if keys.contains_key("gamma") {
            cfg.gamma = Some(cfg.bp.gamma);
        }
        if keys.contains_key("c_opt") {
            cfg.c_opt = Some(cfg.bp.c_opt);
        }
    }
    if let Some(t) = args.bp_iters {
        cfg.bp.iterations = t;
    }
    if let Some(x) = args.llr_max {
        cfg.bp.llr_max = x;
    }
    if let Some(x) = args.llr_min {
        cfg.bp.llr_min = x;
    }
    if let Some(seed) = args.random_ties {
        cfg.bp.tie_break = TieBreak::Random { seed };
    }
    cfg.gamma = args.gamma.or(cfg.gamma);
    cfg.c_opt = args.c_opt.or(cfg.c_opt);
    cfg.prune_depth = if args.decoder == DecoderKind::PrunedPeeling { args.prune_depth } else { 0 };
    cfg.ml_fair_guess = args.ml_fair_guess;
    Ok(cfg)
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let spec = SweepSpec {
        code: a.code.code.clone(),
        side: a.side,
        decoder: decoder_config(&a.decoder)?,
        rates: a.rates,
        trials: a.trials,
        min_failures: a.min_failures,
        seed: a.seed,
    };
    spec.validate()?;
    let code = load(&spec.code)?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    info!("{} on {} ({} side), {} workers", spec.decoder.kind, code.name(), spec.side, workers);
    let points = run_sweep_on(&spec, code.clone(), workers)?;
    emit(&spec, &points, a.format, !a.no_timing, a.out.as_deref())?;
    let unsound: u64 = points.iter().map(|p| p.unsound).sum();
    if unsound > 0 {
        log::error!("{unsound} converged estimates did not match their syndrome");
    }
    if let Some(path) = &a.dump {
        let code_side = CodeSide::new(code, spec.side);
        let mut lines = String::new();
        for p in &points {
            for &t in &p.failed_trials {
                let instance = sample_instance(&code_side, p.rate, &mut trial_rng(spec.seed, spec.side, t));
                lines.push_str(&DumpRecord::new(spec.seed, t, spec.side, &instance).to_line());
                lines.push('\n');
            }
        }
        std::fs::write(path, lines).map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

fn validate(a: CodeArgs) -> Result<(), Failure> {
    let code = match load_code_ref(&a.code) {
        Err(HarnessError::Format(FormatError::Code(e))) => return Err(Failure::Validation(format!("{}: {e}", a.code))),
        other => other?,
    };
    let violations = code.validate();
    if violations.is_empty() {
        println!("{}: valid CSS code, n={} k={}", code.name(), code.n(), code.k());
        Ok(())
    } else {
        for v in &violations {
            println!("{v}");
        }
        Err(Failure::Validation(format!("{} violations", violations.len())))
    }
}

fn describe(a: CodeArgs) -> Result<(), Failure> {
    let code = load(&a.code)?;
    println!("name: {}", code.name());
    println!("n: {}", code.n());
    println!("k: {}", code.k());
    for (label, h) in [("H_X", code.h_x()), ("H_Z", code.h_z())] {
        let rows: Vec<usize> = (0..h.rows()).map(|r| h.row_weight(r)).collect();
        let cols: Vec<usize> = (0..h.cols()).map(|c| h.column(c).weight()).collect();
        let range = |w: &[usize]| {
            let lo = w.iter().min().copied().unwrap_or(0);
            let hi = w.iter().max().copied().unwrap_or(0);
            if lo == hi {
                lo.to_string()
            } else {
                format!("{lo}..{hi}")
            }
        };
        println!(
            "{label}: {}x{}, rank {}, row weight {}, column weight {}",
            h.rows(),
            h.cols(),
            h.rank(),
            range(&rows),
            range(&cols)
        );
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.dump).map_err(|e| io_failure(&a.dump, e))?;
    let (line_no, line) = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .nth(a.record.saturating_sub(1))
        .ok_or_else(|| Failure::Validation(format!("{} has no record {}", a.dump.display(), a.record)))?;
    let record = DumpRecord::parse(line_no + 1, line).map_err(|e| Failure::Validation(e.to_string()))?;
    let code = load(&a.code.code)?;
    let code_side = CodeSide::new(code, record.side);
    let instance = record.instance(&code_side).map_err(|e| Failure::Validation(e.to_string()))?;
    let cfg = decoder_config(&a.decoder)?;
    let bp: BpConfig = cfg.resolve(&a.code.code, record.rate);
    if cfg.kind.is_iterative() {
        bp.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    }
    println!(
        "trial {} seed {} side {} rate {}: {} erased, error weight {}",
        record.trial,
        record.seed,
        record.side,
        record.rate,
        instance.mask.weight(),
        instance.error.weight()
    );
    let result = match cfg.kind {
        DecoderKind::Ml => {
            let outcome = TrialDecoder::new(&code_side, &cfg, bp).run(&instance).outcome;
            println!("outcome: {outcome}");
            return Ok(());
        }
        DecoderKind::Bp => PlainBp::new(&code_side, bp).decode(&instance),
        DecoderKind::Peeling | DecoderKind::PrunedPeeling => Peeler::new(&code_side, cfg.prune_depth).decode(&instance),
        _ => {
            println!("config: {bp}");
            Bpgd::new(&code_side, bp).decode_traced(&instance, |t| {
                let decimated = match t.decimated {
                    Some((v, prior)) => format!(" decimate v{v} -> {prior}{}", if t.vacuous { " (vacuous)" } else { "" }),
                    None => String::new(),
                };
                println!(
                    "round {:4}: iters {:3} matched {} max|m| {:.3} undetermined {}{}",
                    t.round, t.iterations_computed, t.matched, t.max_abs_belief, t.erased_zero_beliefs, decimated
                );
            })
        }
    };
    let outcome = outcome_of(&result, &instance, &code_side).map_err(|e| Failure::Validation(e.to_string()))?;
    println!(
        "status {:?} after {} rounds ({} BP iterations): {outcome}",
        result.status, result.rounds_used, result.bp_iterations_total
    );
    Ok(())
}

fn gen_seed(a: GenSeedArgs) -> Result<(), Failure> {
    if a.vars * a.var_degree != a.checks * a.check_degree {
        return Err(Failure::Validation("vars * var_degree must equal checks * check_degree".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let options = SeedOptions {
        full_rank: !a.any_rank,
        avoid_four_cycles: !a.allow_four_cycles,
    };
    let h = random_regular_seed(a.vars, a.checks, a.var_degree, a.check_degree, options, &mut rng)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let text = write_alist(&h);
    match &a.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e))?,
        None => print!("{text}"),
    }
    Ok(())
}
