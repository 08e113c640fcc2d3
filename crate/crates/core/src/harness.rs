//! Monte Carlo sweeps over erasure rates.
//!
//! Trial `t` of a sweep draws its instance from `trial_rng(seed, side, t)`
//! regardless of the rate, so results depend only on the [`SweepSpec`] and
//! never on the number of workers.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builtin::builtin_code;
use crate::channel::{sample_instance, trial_rng, CodeSide, ErasureInstance, Side};
use crate::code::CssCode;
use crate::combinatorial::{ml_erasure_outcome, outcome_of, ClassifyError, Outcome, Peeler};
use crate::decode::ErasureDecoder;
use crate::io::{load_code, CodeFormat, FormatError};
use crate::iterative::{BpConfig, Bpgd, ConfigError, PlainBp};
use crate::params::{lookup, Parameter};

/// z for a two-sided 95% interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Trials decoded per parallel batch.
const BATCH: u64 = 2048;

/// Failing trial indices kept per point.
const MAX_RECORDED_FAILURES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Bp,
    Bpgd,
    BpgdDamped,
    BpgdAdjllr,
    BpgdCombined,
    Peeling,
    PrunedPeeling,
    Ml,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 8] = [
        DecoderKind::Bp,
        DecoderKind::Bpgd,
        DecoderKind::BpgdDamped,
        DecoderKind::BpgdAdjllr,
        DecoderKind::BpgdCombined,
        DecoderKind::Peeling,
        DecoderKind::PrunedPeeling,
        DecoderKind::Ml,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::Bp => "bp",
            DecoderKind::Bpgd => "bpgd",
            DecoderKind::BpgdDamped => "bpgd-damped",
            DecoderKind::BpgdAdjllr => "bpgd-adjllr",
            DecoderKind::BpgdCombined => "bpgd-combined",
            DecoderKind::Peeling => "peeling",
            DecoderKind::PrunedPeeling => "pruned-peeling",
            DecoderKind::Ml => "ml",
        }
    }

    pub fn is_iterative(self) -> bool {
        matches!(
            self,
            DecoderKind::Bp | DecoderKind::Bpgd | DecoderKind::BpgdDamped | DecoderKind::BpgdAdjllr | DecoderKind::BpgdCombined
        )
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DecoderKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown decoder {s:?}"))
    }
}

/// Decoder choice plus its settings.
///
/// `gamma` and `c_opt`, when set, override both `bp` and the bundled
/// per-rate tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub kind: DecoderKind,
    pub bp: BpConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_opt: Option<f64>,
    /// Pruning search depth M for `pruned-peeling`.
    #[serde(default)]
    pub prune_depth: usize,
    /// Score undecodable ML instances by a guessed solution instead of
    /// counting them as logical errors.
    #[serde(default)]
    pub ml_fair_guess: bool,
}

impl DecoderConfig {
    pub fn new(kind: DecoderKind) -> Self {
        Self {
            kind,
            bp: BpConfig::default(),
            gamma: None,
            c_opt: None,
            prune_depth: if kind == DecoderKind::PrunedPeeling { 1 } else { 0 },
            ml_fair_guess: false,
        }
    }

    /// BP settings for `code` at erasure rate `p`.
    ///
    /// Plain `bpgd` and `bp` use `bp` as given. The damped, adjusted and
    /// combined presets take missing values from the code's tables and fall
    /// back to `bp` for codes without tables.
    pub fn resolve(&self, code: &str, p: f64) -> BpConfig {
        let mut cfg = self.bp;
        let table = |par| lookup(code, par, p);
        match self.kind {
            DecoderKind::BpgdDamped => {
                if let Some(g) = table(Parameter::Gamma) {
                    cfg.gamma = g;
                }
            }
            DecoderKind::BpgdAdjllr => {
                if let Some(c) = table(Parameter::COpt) {
                    cfg.c_opt = c;
                }
            }
            DecoderKind::BpgdCombined => {
                if let Some(g) = table(Parameter::Gamma) {
                    cfg.gamma = g;
                }
                if let Some(c) = table(Parameter::CombinedCOpt).or_else(|| table(Parameter::COpt)) {
                    cfg.c_opt = c;
                }
            }
            _ => {}
        }
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(c) = self.c_opt {
            cfg.c_opt = c;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Built-in code id or path to a code file.
    pub code: String,
    pub side: Side,
    pub decoder: DecoderConfig,
    pub rates: Vec<f64>,
    /// Trials per rate; with `min_failures` set, the maximum.
    pub trials: u64,
    /// Stop a point once this many failures are seen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_failures: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Emit(String),
    #[error("unknown code {0:?}: not a built-in id and no recognised file extension")]
    UnknownCode(String),
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidSpec(m));
        if self.rates.is_empty() {
            return bad("no erasure rates".into());
        }
        if let Some(p) = self.rates.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("erasure rate {p} outside [0, 1]"));
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.min_failures == Some(0) {
            return bad("min_failures must be at least 1".into());
        }
        if self.decoder.kind == DecoderKind::PrunedPeeling && self.decoder.prune_depth < 1 {
            return bad("pruned peeling needs a depth of at least 1".into());
        }
        if self.decoder.kind.is_iterative() {
            for &p in &self.rates {
                self.decoder.resolve(&self.code, p).validate()?;
            }
        }
        Ok(())
    }
}

/// Loads a built-in code by id, or a code file by path.
pub fn load_code_ref(code: &str) -> Result<CssCode, HarnessError> {
    if let Some(c) = builtin_code(code) {
        return Ok(c?);
    }
    let path = Path::new(code);
    let format = CodeFormat::from_path(path).ok_or_else(|| HarnessError::UnknownCode(code.to_string()))?;
    Ok(load_code(path, format)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub rate: f64,
    pub trials: u64,
    pub exact: u64,
    pub degenerate: u64,
    pub logical: u64,
    pub nonconv: u64,
    pub failure_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(default)]
    pub seconds: Option<f64>,
    /// `(r - 1) / (N - 1)` when the point stopped at its r-th failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_binomial: Option<f64>,
    /// Converged estimates whose syndrome did not match; counted as logical.
    #[serde(default)]
    pub unsound: u64,
    /// Mean BPGD rounds per trial, for iterative decoders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_rounds: Option<f64>,
    /// Lowest failing trial indices, for dumping and replay.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_trials: Vec<u64>,
}

impl PointStats {
    pub fn failures(&self) -> u64 {
        self.logical + self.nonconv
    }

    fn from_counts(rate: f64, counts: &Tally, seconds: f64, inverse_binomial: Option<f64>) -> Self {
        let failures = counts.logical + counts.nonconv;
        let (ci_low, ci_high) = wilson_interval(failures, counts.trials).expect("at least one trial");
        Self {
            rate,
            trials: counts.trials,
            exact: counts.exact,
            degenerate: counts.degenerate,
            logical: counts.logical,
            nonconv: counts.nonconv,
            failure_rate: failures as f64 / counts.trials as f64,
            ci_low,
            ci_high,
            seconds: Some(seconds),
            inverse_binomial,
            unsound: counts.unsound,
            mean_rounds: None,
            failed_trials: counts.failed.clone(),
        }
    }
}

/// 95% Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64) -> Result<(f64, f64), HarnessError> {
    if trials == 0 {
        return Err(HarnessError::InvalidSpec("confidence interval of zero trials".into()));
    }
    if failures > trials {
        return Err(HarnessError::InvalidSpec(format!("{failures} failures out of {trials} trials")));
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if failures == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let high = if failures == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok((low, high))
}

/// Unbiased rate estimate `(r - 1) / (N - 1)` for sampling that stops at the
/// r-th failure, observed at trial N.
pub fn inverse_binomial_estimate(failures: u64, trials: u64) -> Option<f64> {
    (failures >= 2 && trials >= 2).then(|| (failures - 1) as f64 / (trials - 1) as f64)
}

#[derive(Debug, Clone, Default)]
struct Tally {
    trials: u64,
    exact: u64,
    degenerate: u64,
    logical: u64,
    nonconv: u64,
    unsound: u64,
    rounds: u64,
    failed: Vec<u64>,
}

impl Tally {
    fn add(&mut self, trial: u64, r: &TrialResult) {
        self.trials += 1;
        self.rounds += r.rounds as u64;
        match r.outcome {
            Outcome::ExactMatch => self.exact += 1,
            Outcome::DegenerateMatch => self.degenerate += 1,
            Outcome::LogicalError => self.logical += 1,
            Outcome::DecoderFailure => self.nonconv += 1,
        }
        if r.unsound {
            self.unsound += 1;
        }
        if r.outcome.is_failure() && self.failed.len() < MAX_RECORDED_FAILURES {
            self.failed.push(trial);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrialResult {
    pub outcome: Outcome,
    pub rounds: usize,
    /// The decoder claimed convergence with a wrong syndrome.
    pub unsound: bool,
}

/// One decoder instance; each worker owns one.
pub enum TrialDecoder<'a> {
    Iterative(Box<dyn ErasureDecoder + 'a>),
    Ml { code_side: &'a CodeSide, fair_guess: bool },
}

impl<'a> TrialDecoder<'a> {
    pub fn new(code_side: &'a CodeSide, decoder: &DecoderConfig, bp: BpConfig) -> Self {
        match decoder.kind {
            DecoderKind::Bp => TrialDecoder::Iterative(Box::new(PlainBp::new(code_side, bp))),
            DecoderKind::Bpgd | DecoderKind::BpgdDamped | DecoderKind::BpgdAdjllr | DecoderKind::BpgdCombined => {
                TrialDecoder::Iterative(Box::new(Bpgd::new(code_side, bp)))
            }
            DecoderKind::Peeling => TrialDecoder::Iterative(Box::new(Peeler::new(code_side, 0))),
            DecoderKind::PrunedPeeling => TrialDecoder::Iterative(Box::new(Peeler::new(code_side, decoder.prune_depth))),
            DecoderKind::Ml => TrialDecoder::Ml {
                code_side,
                fair_guess: decoder.ml_fair_guess,
            },
        }
    }

    pub fn run(&mut self, instance: &ErasureInstance) -> TrialResult {
        match self {
            TrialDecoder::Iterative(d) => {
                let result = d.decode(instance);
                match outcome_of(&result, instance, d.code_side()) {
                    Ok(outcome) => TrialResult {
                        outcome,
                        rounds: result.rounds_used,
                        unsound: false,
                    },
                    Err(ClassifyError::SyndromeMismatch) => TrialResult {
                        outcome: Outcome::LogicalError,
                        rounds: result.rounds_used,
                        unsound: true,
                    },
                    Err(e) => panic!("classification failed: {e}"),
                }
            }
            TrialDecoder::Ml { code_side, fair_guess } => {
                let outcome = ml_erasure_outcome(code_side, instance, *fair_guess).expect("instance belongs to this code side");
                TrialResult {
                    outcome,
                    rounds: 1,
                    unsound: false,
                }
            }
        }
    }
}

/// Runs a sweep on `workers` threads (at least one).
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<PointStats>, HarnessError> {
    let code = Arc::new(load_code_ref(&spec.code)?);
    run_sweep_on(spec, code, workers)
}

/// Like [`run_sweep`] with an already loaded code.
pub fn run_sweep_on(spec: &SweepSpec, code: Arc<CssCode>, workers: usize) -> Result<Vec<PointStats>, HarnessError> {
    spec.validate()?;
    let violations = code.validate();
    if !violations.is_empty() {
        return Err(FormatError::from(crate::code::CodeError::Invalid(violations)).into());
    }
    let code_side = CodeSide::new(code, spec.side);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::InvalidSpec(format!("cannot start workers: {e}")))?;
    let mut points = Vec::with_capacity(spec.rates.len());
    for &rate in &spec.rates {
        let bp = spec.decoder.resolve(&spec.code, rate);
        let start = Instant::now();
        let mut tally = Tally::default();
        let mut stopped = false;
        let mut next = 0u64;
        while next < spec.trials && !stopped {
            let end = (next + BATCH).min(spec.trials);
            let results: Vec<TrialResult> = pool.install(|| {
                (next..end)
                    .into_par_iter()
                    .map_init(
                        || TrialDecoder::new(&code_side, &spec.decoder, bp),
                        |decoder, t| {
                            let instance = sample_instance(&code_side, rate, &mut trial_rng(spec.seed, spec.side, t));
                            decoder.run(&instance)
                        },
                    )
                    .collect()
            });
            // scanned in trial order so the stopping point is deterministic
            for (t, r) in (next..end).zip(&results) {
                tally.add(t, r);
                if spec.min_failures.is_some_and(|m| tally.logical + tally.nonconv >= m) {
                    stopped = true;
                    break;
                }
            }
            next = end;
        }
        let inverse = if stopped {
            inverse_binomial_estimate(tally.logical + tally.nonconv, tally.trials)
        } else {
            None
        };
        let mut stats = PointStats::from_counts(rate, &tally, start.elapsed().as_secs_f64(), inverse);
        if spec.decoder.kind.is_iterative() {
            stats.mean_rounds = Some(tally.rounds as f64 / tally.trials as f64);
        }
        log::info!(
            "p={rate}: {}/{} failures ({:.3e}) in {:.1}s",
            stats.failures(),
            stats.trials,
            stats.failure_rate,
            stats.seconds.unwrap_or(0.0)
        );
        points.push(stats);
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format {s:?}, expected csv or json")),
        }
    }
}

pub const CSV_COLUMNS: [&str; 10] = [
    "rate",
    "trials",
    "exact",
    "degenerate",
    "logical",
    "nonconv",
    "failure_rate",
    "ci_low",
    "ci_high",
    "seconds",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub points: Vec<PointStats>,
}

/// Serializes results. With `timing` unset the `seconds` field is left
/// empty, which makes repeated runs byte-identical.
pub fn render(spec: &SweepSpec, points: &[PointStats], format: OutputFormat, timing: bool) -> Result<String, HarnessError> {
    let points: Vec<PointStats> = points
        .iter()
        .map(|p| PointStats {
            seconds: if timing { p.seconds } else { None },
            ..p.clone()
        })
        .collect();
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let emit_err = |e: csv::Error| HarnessError::Emit(e.to_string());
            w.write_record(CSV_COLUMNS).map_err(emit_err)?;
            for p in &points {
                w.write_record([
                    p.rate.to_string(),
                    p.trials.to_string(),
                    p.exact.to_string(),
                    p.degenerate.to_string(),
                    p.logical.to_string(),
                    p.nonconv.to_string(),
                    p.failure_rate.to_string(),
                    p.ci_low.to_string(),
                    p.ci_high.to_string(),
                    p.seconds.map(|s| format!("{s:.3}")).unwrap_or_default(),
                ])
                .map_err(emit_err)?;
            }
            let bytes = w.into_inner().map_err(|e| HarnessError::Emit(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        OutputFormat::Json => {
            let report = SweepReport {
                spec: spec.clone(),
                points,
            };
            serde_json::to_string_pretty(&report).map_err(|e| HarnessError::Emit(e.to_string()))
        }
    }
}

/// Writes rendered results to `path`, or to stdout when `path` is `None`.
pub fn emit(
    spec: &SweepSpec,
    points: &[PointStats],
    format: OutputFormat,
    timing: bool,
    path: Option<&Path>,
) -> Result<(), HarnessError> {
    let text = render(spec, points, format, timing)?;
    match path {
        Some(path) => std::fs::write(path, text).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| HarnessError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

/// Parses CSV produced by [`render`].
pub fn parse_csv(text: &str) -> Result<Vec<PointStats>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |m: String| HarnessError::Emit(m);
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    if header != CSV_COLUMNS {
        return Err(bad(format!("unexpected columns {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", CSV_COLUMNS[i])));
        let u = |i: usize| rec[i].parse::<u64>().map_err(|e| bad(format!("column {}: {e}", CSV_COLUMNS[i])));
        out.push(PointStats {
            rate: f(0)?,
            trials: u(1)?,
            exact: u(2)?,
            degenerate: u(3)?,
            logical: u(4)?,
            nonconv: u(5)?,
            failure_rate: f(6)?,
            ci_low: f(7)?,
            ci_high: f(8)?,
            seconds: if rec[9].is_empty() { None } else { Some(f(9)?) },
            inverse_binomial: None,
            unsound: 0,
            mean_rounds: None,
            failed_trials: Vec::new(),
        });
    }
    Ok(out)
}

/// Indices `i` where the failure rate drops from point `i` to `i + 1` with
/// disjoint confidence intervals, assuming increasing rates.
pub fn monotonicity_violations(points: &[PointStats]) -> Vec<usize> {
    points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].rate > w[0].rate && w[1].ci_high < w[0].ci_low)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: DecoderKind, rates: Vec<f64>, trials: u64) -> SweepSpec {
        SweepSpec {
            code: "b1-882-24".into(),
            side: Side::X,
            decoder: DecoderConfig::new(kind),
            rates,
            trials,
            min_failures: None,
            seed: 7,
        }
    }

    #[test]
    fn wilson_examples() {
        assert_eq!(wilson_interval(0, 100).unwrap().0, 0.0);
        let (lo, hi) = wilson_interval(50, 100).unwrap();
        assert!(((0.5 - lo) - (hi - 0.5)).abs() < 1e-12);
        // oracle: roots of (p - x)^2 = z^2 x (1 - x) / n
        let (n, p) = (1000.0f64, 0.01f64);
        let z2 = Z_95 * Z_95;
        let (a, b, c) = (1.0 + z2 / n, -(2.0 * p + z2 / n), p * p);
        let disc = (b * b - 4.0 * a * c).sqrt();
        let (r1, r2) = ((-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a));
        let (lo, hi) = wilson_interval(10, 1000).unwrap();
        assert!((lo - r1).abs() < 1e-12 && (hi - r2).abs() < 1e-12);
        assert!((lo - 0.0054).abs() < 5e-5 && (hi - 0.0183).abs() < 5e-5);
        assert!(wilson_interval(1, 0).is_err());
        assert_eq!(wilson_interval(5, 5).unwrap().1, 1.0);
    }

    #[test]
    fn decoder_names_round_trip() {
        for k in DecoderKind::ALL {
            assert_eq!(k.as_str().parse::<DecoderKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.as_str()));
        }
        assert!("min-sum".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn parameter_resolution() {
        let damped = DecoderConfig::new(DecoderKind::BpgdDamped);
        let cfg = damped.resolve("hgp-2025-81", 0.24);
        assert_eq!((cfg.gamma, cfg.c_opt), (0.90, 1.0));
        let adj = DecoderConfig::new(DecoderKind::BpgdAdjllr);
        assert_eq!(adj.resolve("b1-882-24", 0.44).c_opt, 0.5);
        let comb = DecoderConfig::new(DecoderKind::BpgdCombined);
        let cfg = comb.resolve("hgp-2025-81", 0.24);
        assert_eq!((cfg.gamma, cfg.c_opt), (0.90, 0.135));
        let plain = DecoderConfig::new(DecoderKind::Bpgd);
        assert_eq!(plain.resolve("hgp-2025-81", 0.24), BpConfig::default());
        let mut over = DecoderConfig::new(DecoderKind::BpgdDamped);
        over.gamma = Some(0.5);
        assert_eq!(over.resolve("hgp-2025-81", 0.24).gamma, 0.5);
        assert_eq!(damped.resolve("custom.css", 0.24), BpConfig::default());
    }

    #[test]
    fn zero_rate_never_fails() {
        let pts = run_sweep(&spec(DecoderKind::Bpgd, vec![0.0], 1000), 1).unwrap();
        assert_eq!(pts[0].failure_rate, 0.0);
        assert_eq!(pts[0].exact, 1000);
    }

    #[test]
    fn spec_validation() {
        assert!(spec(DecoderKind::Bpgd, vec![1.5], 10).validate().is_err());
        assert!(spec(DecoderKind::Bpgd, vec![0.1], 0).validate().is_err());
        assert!(spec(DecoderKind::Bpgd, vec![], 10).validate().is_err());
        let mut s = spec(DecoderKind::PrunedPeeling, vec![0.1], 10);
        s.decoder.prune_depth = 0;
        assert!(s.validate().is_err());
        let mut s = spec(DecoderKind::Bpgd, vec![0.1], 10);
        s.decoder.bp.iterations = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let s = spec(DecoderKind::Peeling, vec![0.3, 0.4], 200);
        let pts = run_sweep(&s, 1).unwrap();
        for p in &pts {
            assert_eq!(p.exact + p.degenerate + p.logical + p.nonconv, p.trials);
            assert!(p.ci_low <= p.failure_rate && p.failure_rate <= p.ci_high);
        }
        let empty = render(&s, &[], OutputFormat::Csv, true).unwrap();
        assert_eq!(empty.trim_end(), CSV_COLUMNS.join(","));
        let csv = render(&s, &pts, OutputFormat::Csv, false).unwrap();
        let back = parse_csv(&csv).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.iter().zip(&pts) {
            assert_eq!((a.rate, a.trials, a.logical, a.nonconv), (b.rate, b.trials, b.logical, b.nonconv));
            assert_eq!((a.failure_rate, a.ci_low, a.ci_high), (b.failure_rate, b.ci_low, b.ci_high));
            assert_eq!(a.seconds, None);
        }
        let json = render(&s, &pts, OutputFormat::Json, true).unwrap();
        let report: SweepReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report.spec, s);
        assert_eq!(report.points, pts);
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let s = spec(DecoderKind::Bpgd, vec![0.36, 0.42], 60);
        let one = run_sweep(&s, 1).unwrap();
        let three = run_sweep(&s, 3).unwrap();
        assert_eq!(
            render(&s, &one, OutputFormat::Csv, false).unwrap(),
            render(&s, &three, OutputFormat::Csv, false).unwrap()
        );
    }

    #[test]
    fn stop_at_failures() {
        let mut s = spec(DecoderKind::Peeling, vec![0.45], 100_000);
        s.min_failures = Some(20);
        let pts = run_sweep(&s, 2).unwrap();
        assert_eq!(pts[0].failures(), 20);
        assert!(pts[0].trials < 100_000);
        let est = pts[0].inverse_binomial.unwrap();
        assert_eq!(est, 19.0 / (pts[0].trials - 1) as f64);
        // the stop point is the 20th failure of the unstopped stream
        let full = run_sweep(&spec(DecoderKind::Peeling, vec![0.45], pts[0].trials), 1).unwrap();
        assert_eq!(full[0].failures(), 20);
        assert!(full[0].failed_trials.last() == Some(&(pts[0].trials - 1)));
    }

    #[test]
    fn inverse_binomial_formula() {
        assert_eq!(inverse_binomial_estimate(10, 101), Some(0.09));
        assert_eq!(inverse_binomial_estimate(1, 5), None);
    }
}
