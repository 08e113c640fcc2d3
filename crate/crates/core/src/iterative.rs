//! Sum-product belief propagation on the Tanner graph and BP with guided
//! decimation (BPGD) for erasures, with optional damping and scaled priors.
//!
//! Messages are LLRs `ln(P(0)/P(1))` and every stored message is clamped to
//! `[-llr_max, llr_max]`. Beliefs are not clamped. The schedule is flooding:
//! all checks, then all variables, per iteration.
//!
//! The engine only recomputes nodes whose inputs changed since their last
//! update. Every node update is a deterministic function of its inputs, so
//! this yields exactly the messages of a full recomputation, and once an
//! iteration changes nothing the remaining iterations of the round are
//! skipped.

use std::fmt;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{CodeSide, ErasureInstance};
use crate::code::TannerGraph;
use crate::decode::{DecodeResult, DecodeStatus, ErasureDecoder};
use crate::gf2::BitVector;

pub const DEFAULT_LLR_MAX: f64 = 25.0;
pub const DEFAULT_ITERATIONS: usize = 32;

/// How the decimation step breaks ties in `|belief|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    /// Uniform among the tied candidates, seeded from `seed` and the instance.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpConfig {
    /// BP iterations per round.
    pub iterations: usize,
    pub llr_max: f64,
    /// Prior of erased bits.
    pub llr_min: f64,
    /// Unerased bits start at `c_opt * llr_max`.
    pub c_opt: f64,
    /// Damping factor; 1 disables damping.
    pub gamma: f64,
    pub tie_break: TieBreak,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            llr_max: DEFAULT_LLR_MAX,
            llr_min: 0.0,
            c_opt: 1.0,
            gamma: 1.0,
            tie_break: TieBreak::LowestIndex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid BP configuration: {0}")]
pub struct ConfigError(pub String);

impl BpConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        if self.iterations < 1 {
            return fail("iterations must be at least 1".into());
        }
        if !(self.llr_max > 0.0 && self.llr_max.is_finite()) {
            return fail(format!("llr_max must be positive, got {}", self.llr_max));
        }
        if !(0.0 <= self.llr_min && self.llr_min < self.llr_max) {
            return fail(format!("llr_min must lie in [0, llr_max), got {}", self.llr_min));
        }
        if !(self.c_opt > 0.0 && self.c_opt <= 1.0) {
            return fail(format!("c_opt must lie in (0, 1], got {}", self.c_opt));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        Ok(())
    }
}

impl fmt::Display for BpConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "T={} llr_max={} llr_min={} c_opt={} gamma={}",
            self.iterations, self.llr_max, self.llr_min, self.c_opt, self.gamma
        )
    }
}

/// `ln((1 - p) / p)`. Outside the open unit interval the value saturates to
/// `±llr_max`.
pub fn channel_llr(p: f64, llr_max: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 || p.is_nan() {
        warn!("channel_llr: probability {p} outside (0, 1); saturating");
        return if p >= 1.0 { -llr_max } else { llr_max };
    }
    ((1.0 - p) / p).ln().clamp(-llr_max, llr_max)
}

/// Erased bits get `llr_min`; the rest get `c_opt * llr_max`.
pub fn init_priors(mask: &BitVector, cfg: &BpConfig) -> Vec<f64> {
    let unerased = cfg.c_opt * cfg.llr_max;
    (0..mask.len())
        .map(|i| if mask.get(i) { cfg.llr_min } else { unerased })
        .collect()
}

/// Message-passing state for one Tanner graph.
#[derive(Debug, Clone)]
pub struct BpState {
    v2c: Vec<f64>,
    /// `tanh(v2c / 2)`, kept in step with `v2c`.
    half_tanh: Vec<f64>,
    c2v: Vec<f64>,
    /// Product behind each `c2v` entry; NaN before the first update.
    c2v_product: Vec<f64>,
    beliefs: Vec<f64>,
    /// Iterations run so far (logical count).
    pub iteration: usize,
    check_dirty: Vec<bool>,
    var_dirty: Vec<bool>,
    dirty_checks: Vec<usize>,
    dirty_vars: Vec<usize>,
    prefix: Vec<f64>,
    carry: Vec<usize>,
}

impl BpState {
    /// Fresh state with `m_{v->c} = prior_v` on every edge.
    pub fn new(graph: &TannerGraph, priors: &[f64]) -> Self {
        let mut s = Self {
            v2c: vec![0.0; graph.num_edges()],
            half_tanh: vec![0.0; graph.num_edges()],
            c2v: vec![0.0; graph.num_edges()],
            c2v_product: vec![f64::NAN; graph.num_edges()],
            beliefs: vec![0.0; graph.num_vars()],
            iteration: 0,
            check_dirty: vec![false; graph.num_checks()],
            var_dirty: vec![false; graph.num_vars()],
            dirty_checks: Vec::new(),
            dirty_vars: Vec::new(),
            prefix: Vec::new(),
            carry: Vec::new(),
        };
        s.reset(graph, priors);
        s
    }

    pub fn reset(&mut self, graph: &TannerGraph, priors: &[f64]) {
        assert_eq!(priors.len(), graph.num_vars());
        self.v2c.resize(graph.num_edges(), 0.0);
        self.half_tanh.resize(graph.num_edges(), 0.0);
        self.c2v.clear();
        self.c2v.resize(graph.num_edges(), 0.0);
        self.c2v_product.clear();
        self.c2v_product.resize(graph.num_edges(), f64::NAN);
        self.beliefs.clear();
        self.beliefs.extend_from_slice(priors);
        self.iteration = 0;
        for e in 0..graph.num_edges() {
            self.v2c[e] = priors[graph.edge_var(e)];
            self.half_tanh[e] = half_tanh(self.v2c[e]);
        }
        self.check_dirty.clear();
        self.check_dirty.resize(graph.num_checks(), true);
        self.var_dirty.clear();
        self.var_dirty.resize(graph.num_vars(), true);
        self.dirty_checks.clear();
        self.dirty_checks.extend(0..graph.num_checks());
        self.dirty_vars.clear();
        self.dirty_vars.extend(0..graph.num_vars());
    }

    /// Variable-to-check messages, indexed by edge.
    pub fn v2c(&self) -> &[f64] {
        &self.v2c
    }

    /// Check-to-variable messages, indexed by edge.
    pub fn c2v(&self) -> &[f64] {
        &self.c2v
    }

    /// Output LLR of every variable.
    pub fn beliefs(&self) -> &[f64] {
        &self.beliefs
    }

    /// Marks a variable whose prior changed so the next variable update
    /// recomputes it.
    pub fn prior_changed(&mut self, v: usize) {
        if !self.var_dirty[v] {
            self.var_dirty[v] = true;
            self.dirty_vars.push(v);
        }
    }

    /// True when another iteration would change nothing.
    pub fn at_fixed_point(&self) -> bool {
        self.dirty_checks.is_empty() && self.dirty_vars.is_empty()
    }

    fn mark_var(&mut self, v: usize) {
        if !self.var_dirty[v] {
            self.var_dirty[v] = true;
            self.dirty_vars.push(v);
        }
    }
}

/// Check-node half-iteration:
/// `m_{c->v} = (-1)^{s_c} 2 atanh(prod_{v' != v} tanh(m_{v'->c} / 2))`,
/// clamped to `±llr_max`.
pub fn check_update(graph: &TannerGraph, state: &mut BpState, syndrome: &BitVector, llr_max: f64) {
    let checks = std::mem::take(&mut state.dirty_checks);
    let mut prefix = std::mem::take(&mut state.prefix);
    for &c in &checks {
        state.check_dirty[c] = false;
        let edges = graph.check_edges(c);
        let (first, degree) = (edges.start, edges.len());
        let sign = if syndrome.get(c) { -1.0 } else { 1.0 };
        let t = &state.half_tanh[edges];
        // prefix[i] = product over edges before i
        prefix.clear();
        let mut acc = 1.0f64;
        for &x in t {
            prefix.push(acc);
            acc *= x;
        }
        let mut suffix = 1.0f64;
        for i in (0..degree).rev() {
            let e = first + i;
            let product = prefix[i] * suffix;
            suffix *= t[i];
            if product == state.c2v_product[e] {
                continue;
            }
            state.c2v_product[e] = product;
            let msg = (sign * two_atanh(product)).clamp(-llr_max, llr_max);
            if msg != state.c2v[e] {
                state.c2v[e] = msg;
                let v = graph.edge_var(e);
                if !state.var_dirty[v] {
                    state.var_dirty[v] = true;
                    state.dirty_vars.push(v);
                }
            }
        }
    }
    state.prefix = prefix;
    state.dirty_checks = checks;
    state.dirty_checks.clear();
}

/// Variable-node half-iteration:
/// `m~_{v->c} = prior_v + sum_{c' != c} m_{c'->v}`, emitted as
/// `(1 - gamma) m_old + gamma m~` and clamped; `belief_v = prior_v + sum_c m_{c->v}`.
pub fn var_update(graph: &TannerGraph, state: &mut BpState, priors: &[f64], cfg: &BpConfig) {
    let vars = std::mem::take(&mut state.dirty_vars);
    let mut carry = std::mem::take(&mut state.carry);
    let damped = cfg.gamma != 1.0;
    let keep = 1.0 - cfg.gamma;
    for &v in &vars {
        state.var_dirty[v] = false;
        let edges = graph.var_edges(v);
        let mut total = priors[v];
        for &e in edges {
            total += state.c2v[e];
        }
        state.beliefs[v] = total;
        let mut moved = false;
        for &e in edges {
            let candidate = total - state.c2v[e];
            let blended = if damped { keep * state.v2c[e] + cfg.gamma * candidate } else { candidate };
            let msg = blended.clamp(-cfg.llr_max, cfg.llr_max);
            if msg != state.v2c[e] {
                state.v2c[e] = msg;
                state.half_tanh[e] = half_tanh(msg);
                moved = true;
                let c = graph.edge_check(e);
                if !state.check_dirty[c] {
                    state.check_dirty[c] = true;
                    state.dirty_checks.push(c);
                }
            }
        }
        // a damped message keeps moving until it stops changing
        if damped && moved {
            carry.push(v);
        }
    }
    state.dirty_vars = vars;
    state.dirty_vars.clear();
    for &v in &carry {
        state.mark_var(v);
    }
    carry.clear();
    state.carry = carry;
}

/// `tanh(x / 2)`.
#[inline]
pub fn half_tanh(x: f64) -> f64 {
    let a = (-x.abs()).exp();
    ((1.0 - a) / (1.0 + a)).copysign(x)
}

/// `2 atanh(p)`, infinite at `|p| = 1`.
#[inline]
pub fn two_atanh(p: f64) -> f64 {
    let a = p.abs();
    ((1.0 + a) / (1.0 - a)).ln().copysign(p)
}

/// Runs up to `iterations` flooding iterations, stopping early once a fixed
/// point is reached. Returns the number actually computed.
pub fn run_iterations(
    graph: &TannerGraph,
    state: &mut BpState,
    priors: &[f64],
    syndrome: &BitVector,
    cfg: &BpConfig,
    iterations: usize,
) -> usize {
    let mut computed = 0;
    for _ in 0..iterations {
        if state.at_fixed_point() {
            break;
        }
        check_update(graph, state, syndrome, cfg.llr_max);
        var_update(graph, state, priors, cfg);
        computed += 1;
    }
    state.iteration += iterations;
    computed
}

/// `x_i = 1` iff `belief_i < 0`; a zero belief decides "no error".
pub fn hard_decision(beliefs: &[f64]) -> BitVector {
    let mut x = BitVector::zeros(beliefs.len());
    for (i, &b) in beliefs.iter().enumerate() {
        if b < 0.0 {
            x.set(i, true);
        }
    }
    x
}

fn syndrome_matches(graph: &TannerGraph, estimate: &BitVector, syndrome: &BitVector) -> bool {
    (0..graph.num_checks()).all(|c| {
        let parity = graph.check_neighbors(c).iter().fold(false, |acc, &v| acc ^ estimate.get(v));
        parity == syndrome.get(c)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutput {
    pub beliefs: Vec<f64>,
    pub hard_decision: BitVector,
    pub matched: bool,
}

/// Runs `cfg.iterations` flooding iterations from fresh messages.
pub fn bp_run(graph: &TannerGraph, priors: &[f64], syndrome: &BitVector, cfg: &BpConfig) -> BpOutput {
    let mut state = BpState::new(graph, priors);
    run_iterations(graph, &mut state, priors, syndrome, cfg, cfg.iterations);
    let hard = hard_decision(&state.beliefs);
    let matched = syndrome_matches(graph, &hard, syndrome);
    BpOutput {
        beliefs: state.beliefs,
        hard_decision: hard,
        matched,
    }
}

/// Per-round observation emitted by [`Bpgd::decode_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    /// Iterations actually computed this round (less than T once a fixed
    /// point is reached).
    pub iterations_computed: usize,
    pub matched: bool,
    pub max_abs_belief: f64,
    pub erased_zero_beliefs: usize,
    /// `(variable, new prior)` when the round ended with a decimation.
    pub decimated: Option<(usize, f64)>,
    /// True when the decimation left the prior unchanged.
    pub vacuous: bool,
}

/// BPGD decoder bound to one code side. Reuses its buffers across calls.
pub struct Bpgd<'a> {
    code_side: &'a CodeSide,
    cfg: BpConfig,
    state: BpState,
    priors: Vec<f64>,
    undecided: Vec<bool>,
}

impl<'a> Bpgd<'a> {
    pub fn new(code_side: &'a CodeSide, cfg: BpConfig) -> Self {
        let n = code_side.n();
        Self {
            state: BpState::new(code_side.graph(), &vec![0.0; n]),
            code_side,
            cfg,
            priors: vec![0.0; n],
            undecided: vec![true; n],
        }
    }

    pub fn config(&self) -> &BpConfig {
        &self.cfg
    }

    pub fn decode_traced(&mut self, instance: &ErasureInstance, mut trace: impl FnMut(&RoundTrace)) -> DecodeResult {
        let graph = self.code_side.graph();
        let n = graph.num_vars();
        let cfg = self.cfg;
        self.priors = init_priors(&instance.mask, &cfg);
        self.state.reset(graph, &self.priors);
        self.undecided.clear();
        self.undecided.resize(n, true);
        let mut tie_rng = match cfg.tie_break {
            TieBreak::LowestIndex => None,
            TieBreak::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed ^ instance_hash(instance))),
        };

        let mut skip_bp = false;
        let mut estimate = BitVector::zeros(n);
        for round in 1..=n {
            let computed = if skip_bp {
                0
            } else {
                let c = run_iterations(graph, &mut self.state, &self.priors, &instance.syndrome, &cfg, cfg.iterations);
                estimate = hard_decision(&self.state.beliefs);
                c
            };
            if skip_bp {
                self.state.iteration += cfg.iterations;
            }
            let matched = !skip_bp && syndrome_matches(graph, &estimate, &instance.syndrome);
            if matched {
                trace(&self.round_trace(instance, round, computed, true, None, false));
                return DecodeResult {
                    status: DecodeStatus::Converged,
                    estimate,
                    rounds_used: round,
                    bp_iterations_total: round * cfg.iterations,
                };
            }
            let v = self.pick(tie_rng.as_mut());
            let target = if self.state.beliefs[v] >= 0.0 { cfg.llr_max } else { -cfg.llr_max };
            let vacuous = self.priors[v] == target;
            self.undecided[v] = false;
            if !vacuous {
                self.priors[v] = target;
                self.state.prior_changed(v);
            }
            trace(&self.round_trace(instance, round, computed, false, Some((v, target)), vacuous));
            // Unchanged priors at a fixed point leave BP, the hard decision and
            // the failed syndrome test exactly as they are.
            skip_bp = vacuous && self.state.at_fixed_point();
        }
        DecodeResult {
            status: DecodeStatus::NonConvergence,
            estimate,
            rounds_used: n,
            bp_iterations_total: n * cfg.iterations,
        }
    }

    /// Undecimated variable of largest `|belief|`.
    fn pick(&self, rng: Option<&mut ChaCha8Rng>) -> usize {
        let beliefs = &self.state.beliefs;
        let mut best = usize::MAX;
        let mut best_mag = f64::NEG_INFINITY;
        match rng {
            None => {
                for (v, &b) in beliefs.iter().enumerate() {
                    if self.undecided[v] && b.abs() > best_mag {
                        best = v;
                        best_mag = b.abs();
                    }
                }
            }
            Some(rng) => {
                let mut ties = 0u32;
                for (v, &b) in beliefs.iter().enumerate() {
                    if !self.undecided[v] {
                        continue;
                    }
                    let mag = b.abs();
                    if mag > best_mag {
                        best = v;
                        best_mag = mag;
                        ties = 1;
                    } else if mag == best_mag {
                        ties += 1;
                        if rng.gen_range(0..ties) == 0 {
                            best = v;
                        }
                    }
                }
            }
        }
        debug_assert_ne!(best, usize::MAX, "no undecimated variable left");
        best
    }

    fn round_trace(
        &self,
        instance: &ErasureInstance,
        round: usize,
        iterations_computed: usize,
        matched: bool,
        decimated: Option<(usize, f64)>,
        vacuous: bool,
    ) -> RoundTrace {
        let beliefs = &self.state.beliefs;
        RoundTrace {
            round,
            iterations_computed,
            matched,
            max_abs_belief: beliefs.iter().fold(0.0, |m, b| m.max(b.abs())),
            erased_zero_beliefs: instance.mask.ones().filter(|&v| beliefs[v] == 0.0).count(),
            decimated,
            vacuous,
        }
    }

    /// Largest stored message or prior magnitude; never above `llr_max`.
    pub fn max_stored_magnitude(&self) -> f64 {
        self.state
            .v2c
            .iter()
            .chain(&self.state.c2v)
            .chain(&self.priors)
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl ErasureDecoder for Bpgd<'_> {
    fn decode(&mut self, instance: &ErasureInstance) -> DecodeResult {
        self.decode_traced(instance, |_| {})
    }

    fn code_side(&self) -> &CodeSide {
        self.code_side
    }
}

fn instance_hash(instance: &ErasureInstance) -> u64 {
    // FNV-1a over the mask and syndrome words
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &w in instance.mask.words().iter().chain(instance.syndrome.words()) {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Plain BP: a single round of `T` iterations, no decimation.
pub struct PlainBp<'a> {
    code_side: &'a CodeSide,
    cfg: BpConfig,
    state: BpState,
}

impl<'a> PlainBp<'a> {
    pub fn new(code_side: &'a CodeSide, cfg: BpConfig) -> Self {
        Self {
            state: BpState::new(code_side.graph(), &vec![0.0; code_side.n()]),
            code_side,
            cfg,
        }
    }
}

impl ErasureDecoder for PlainBp<'_> {
    fn decode(&mut self, instance: &ErasureInstance) -> DecodeResult {
        let graph = self.code_side.graph();
        let priors = init_priors(&instance.mask, &self.cfg);
        self.state.reset(graph, &priors);
        run_iterations(graph, &mut self.state, &priors, &instance.syndrome, &self.cfg, self.cfg.iterations);
        let estimate = hard_decision(&self.state.beliefs);
        let status = if syndrome_matches(graph, &estimate, &instance.syndrome) {
            DecodeStatus::Converged
        } else {
            DecodeStatus::NonConvergence
        };
        DecodeResult {
            status,
            estimate,
            rounds_used: 1,
            bp_iterations_total: self.cfg.iterations,
        }
    }

    fn code_side(&self) -> &CodeSide {
        self.code_side
    }
}

/// One-shot BPGD decode.
pub fn bpgd_decode(code_side: &CodeSide, instance: &ErasureInstance, cfg: &BpConfig) -> DecodeResult {
    Bpgd::new(code_side, *cfg).decode(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_instance, trial_rng, Side};
    use crate::code::{hgp, CssCode};
    use crate::gf2::BitMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn toy_hgp() -> CodeSide {
        let h = BitMatrix::from_rows(&[[1u8, 1, 0, 1], [0, 1, 1, 1], [1, 0, 1, 0]]);
        CodeSide::new(Arc::new(hgp(&h, &h).unwrap()), Side::X)
    }

    #[test]
    fn channel_llr_values() {
        assert_eq!(channel_llr(0.5, 25.0), 0.0);
        let p = 1.0 / (1.0 + std::f64::consts::E);
        assert!((channel_llr(p, 25.0) - 1.0).abs() < 1e-12);
        assert!((channel_llr(0.1, 25.0) - 2.197_224_577_336_219_4).abs() < 1e-12);
        assert_eq!(channel_llr(0.0, 25.0), 25.0);
        assert_eq!(channel_llr(1.0, 25.0), -25.0);
    }

    #[test]
    fn prior_examples() {
        let cfg = BpConfig::default();
        assert!(init_priors(&BitVector::zeros(4), &cfg).iter().all(|&p| p == 25.0));
        let full = BitVector::from_bits(&[true; 4]);
        assert!(init_priors(&full, &cfg).iter().all(|&p| p == 0.0));
        let adj = BpConfig { c_opt: 0.1, ..cfg };
        assert!((init_priors(&BitVector::zeros(1), &adj)[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(BpConfig::default().validate().is_ok());
        for bad in [
            BpConfig { iterations: 0, ..Default::default() },
            BpConfig { llr_max: 0.0, ..Default::default() },
            BpConfig { llr_min: 25.0, ..Default::default() },
            BpConfig { c_opt: 0.0, ..Default::default() },
            BpConfig { gamma: 1.5, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    fn single_check(weights: &[u8]) -> TannerGraph {
        TannerGraph::from_matrix(&BitMatrix::from_rows(&[weights]))
    }

    #[test]
    fn zero_input_silences_other_edges() {
        let g = single_check(&[1, 1, 1]);
        let mut st = BpState::new(&g, &[0.0, 5.0, -3.0]);
        check_update(&g, &mut st, &BitVector::zeros(1), 25.0);
        assert_eq!(st.c2v[1], 0.0);
        assert_eq!(st.c2v[2], 0.0);
        assert!(st.c2v[0] != 0.0);
    }

    #[test]
    fn syndrome_flips_sign() {
        let g = single_check(&[1, 1, 1]);
        let priors = [1.5, 2.0, -0.7];
        let mut a = BpState::new(&g, &priors);
        let mut b = BpState::new(&g, &priors);
        check_update(&g, &mut a, &BitVector::zeros(1), 25.0);
        check_update(&g, &mut b, &BitVector::from_bits(&[true]), 25.0);
        for e in 0..3 {
            assert_eq!(a.c2v[e], -b.c2v[e]);
        }
    }

    #[test]
    fn degree_two_check_passes_saturated_message() {
        let g = single_check(&[1, 1]);
        let mut st = BpState::new(&g, &[25.0, 0.0]);
        check_update(&g, &mut st, &BitVector::zeros(1), 25.0);
        // oracle: 2 atanh(tanh(12.5)), clamped
        let oracle = (2.0 * (12.5f64).tanh().atanh()).min(25.0);
        assert!((half_tanh(25.0) - 12.5f64.tanh()).abs() < 1e-15);
        assert!((st.c2v[1] - oracle).abs() < 1e-6);
        assert!((st.c2v[1] - 25.0).abs() < 1e-3);
        // a lone edge sees an empty product and saturates
        let g1 = single_check(&[1]);
        let mut st1 = BpState::new(&g1, &[0.0]);
        check_update(&g1, &mut st1, &BitVector::from_bits(&[true]), 25.0);
        assert_eq!(st1.c2v[0], -25.0);
    }

    #[test]
    fn scalar_helpers_match_std() {
        for x in [-30.0, -25.0, -3.2, -1e-3, 0.0, 1e-9, 0.7, 5.0, 25.0] {
            let t = half_tanh(x);
            assert!((t - (x * 0.5).tanh()).abs() <= 1e-15 + 1e-12 * (x * 0.5f64).tanh().abs(), "{x}");
        }
        for p in [-0.999_999, -0.5, -1e-8, 0.0, 0.3, 0.99, 0.999_999_999] {
            let y = two_atanh(p);
            let a: f64 = p.abs();
            let oracle = (2.0 * a / (1.0 - a)).ln_1p().copysign(p);
            assert!((y - oracle).abs() <= 1e-13 * (1.0 + y.abs()), "{p}: {y} vs {oracle}");
        }
        assert_eq!(two_atanh(1.0), f64::INFINITY);
        assert_eq!(two_atanh(-1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn damping_blends_old_and_new() {
        let g = single_check(&[1, 1]);
        let cfg = BpConfig { gamma: 0.9, ..Default::default() };
        let mut st = BpState::new(&g, &[0.0, 0.0]);
        // variable 0 has prior 10 now, no incoming check messages
        var_update(&g, &mut st, &[10.0, 0.0], &cfg);
        assert!((st.v2c[0] - 9.0).abs() < 1e-12);
        let undamped = BpConfig::default();
        let mut st = BpState::new(&g, &[0.0, 0.0]);
        var_update(&g, &mut st, &[10.0, 0.0], &undamped);
        assert_eq!(st.v2c[0], 10.0);
    }

    #[test]
    fn isolated_variable_keeps_its_prior() {
        let g = TannerGraph::from_matrix(&BitMatrix::from_rows(&[[1u8, 1, 0]]));
        let out = bp_run(&g, &[1.0, 2.0, -3.5], &BitVector::zeros(1), &BpConfig::default());
        assert_eq!(out.beliefs[2], -3.5);
    }

    #[test]
    fn bp_without_erasures_is_trivial() {
        let cs = toy_hgp();
        let priors = vec![25.0; cs.n()];
        let s = BitVector::zeros(cs.check_matrix().rows());
        let out = bp_run(cs.graph(), &priors, &s, &BpConfig::default());
        assert!(out.hard_decision.is_zero() && out.matched);
    }

    #[test]
    fn dangling_check_recovers_bit_in_one_iteration() {
        // checks: {0,1}, {1,2}; only bit 1 erased, error on it
        let h = BitMatrix::from_rows(&[[1u8, 1, 0], [0, 1, 1]]);
        let g = TannerGraph::from_matrix(&h);
        let s = BitVector::from_bits(&[true, true]);
        let cfg = BpConfig { iterations: 1, ..Default::default() };
        let out = bp_run(&g, &[25.0, 0.0, 25.0], &s, &cfg);
        assert!(out.beliefs[1] < -40.0);
        assert!(out.matched);
        assert_eq!(out.hard_decision, BitVector::from_bits(&[false, true, false]));
    }

    #[test]
    fn bpgd_trivial_instance() {
        let cs = toy_hgp();
        let inst = sample_instance(&cs, 0.0, &mut trial_rng(0, Side::X, 0));
        let r = bpgd_decode(&cs, &inst, &BpConfig::default());
        assert_eq!(r.status, DecodeStatus::Converged);
        assert!(r.estimate.is_zero());
        assert_eq!(r.rounds_used, 1);
    }

    #[test]
    fn bpgd_on_erased_stabilizer() {
        let cs = toy_hgp();
        let stab = cs.stabilizer_matrix().row(0);
        let inst = ErasureInstance::from_parts(&cs, stab.clone(), BitVector::zeros(cs.n()), 0.1).unwrap();
        let r = bpgd_decode(&cs, &inst, &BpConfig::default());
        assert!(r.converged());
        assert!(r.estimate.is_zero() || r.estimate == stab);
    }

    #[test]
    fn bpgd_results_are_sound_and_bounded() {
        let cs = toy_hgp();
        let cfg = BpConfig::default();
        let mut dec = Bpgd::new(&cs, cfg);
        let mut outside = 0;
        for t in 0..500 {
            let inst = sample_instance(&cs, 0.45, &mut trial_rng(77, Side::X, t));
            let r = dec.decode(&inst);
            if r.converged() {
                assert_eq!(cs.syndrome_of(&r.estimate).unwrap(), inst.syndrome);
                if !r.estimate.is_subset_of(&inst.mask) {
                    outside += 1;
                }
            }
            assert!(r.rounds_used <= cs.n());
            assert!(r.bp_iterations_total <= cs.n() * cfg.iterations);
            assert!(dec.max_stored_magnitude() <= cfg.llr_max);
        }
        // decimation fixes priors, not values, so a wrong decimation can
        // push an unerased bit negative; it stays rare
        assert!(outside < 25, "{outside} estimates left the erasure");
    }

    #[test]
    fn random_tie_break_is_reproducible() {
        let cs = toy_hgp();
        let cfg = BpConfig {
            tie_break: TieBreak::Random { seed: 4 },
            ..Default::default()
        };
        for t in 0..100 {
            let inst = sample_instance(&cs, 0.5, &mut trial_rng(2, Side::X, t));
            assert_eq!(bpgd_decode(&cs, &inst, &cfg), bpgd_decode(&cs, &inst, &cfg));
        }
    }

    #[test]
    fn incremental_matches_full_recompute() {
        // Reference: plain flooding, every message recomputed every iteration.
        fn full(g: &TannerGraph, priors: &[f64], s: &BitVector, cfg: &BpConfig) -> Vec<f64> {
            let mut v2c: Vec<f64> = (0..g.num_edges()).map(|e| priors[g.edge_var(e)]).collect();
            let mut c2v = vec![0.0; g.num_edges()];
            let mut beliefs = priors.to_vec();
            for _ in 0..cfg.iterations {
                for c in 0..g.num_checks() {
                    let sign = if s.get(c) { -1.0 } else { 1.0 };
                    let t: Vec<f64> = g.check_edges(c).map(|e| half_tanh(v2c[e])).collect();
                    let mut prefix = vec![1.0f64; t.len()];
                    for i in 1..t.len() {
                        prefix[i] = prefix[i - 1] * t[i - 1];
                    }
                    let mut suffix = 1.0f64;
                    for (i, e) in g.check_edges(c).enumerate().rev() {
                        c2v[e] = (sign * two_atanh(prefix[i] * suffix)).clamp(-cfg.llr_max, cfg.llr_max);
                        suffix *= t[i];
                    }
                }
                for v in 0..g.num_vars() {
                    let edges = g.var_edges(v);
                    beliefs[v] = edges.iter().fold(priors[v], |acc, &e| acc + c2v[e]);
                    for &e in edges {
                        let cand = beliefs[v] - c2v[e];
                        let blended = if cfg.gamma == 1.0 { cand } else { (1.0 - cfg.gamma) * v2c[e] + cfg.gamma * cand };
                        v2c[e] = blended.clamp(-cfg.llr_max, cfg.llr_max);
                    }
                }
            }
            beliefs
        }
        let cs = toy_hgp();
        for (gamma, c_opt) in [(1.0, 1.0), (0.9, 1.0), (0.8, 0.3)] {
            let cfg = BpConfig { gamma, c_opt, iterations: 20, ..Default::default() };
            for t in 0..50 {
                let inst = sample_instance(&cs, 0.4, &mut trial_rng(5, Side::X, t));
                let priors = init_priors(&inst.mask, &cfg);
                let fast = bp_run(cs.graph(), &priors, &inst.syndrome, &cfg);
                let slow = full(cs.graph(), &priors, &inst.syndrome, &cfg);
                for (a, b) in fast.beliefs.iter().zip(&slow) {
                    assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }
    }

    #[test]
    fn steane_plain_bp_runs() {
        let h = BitMatrix::from_rows(&[
            [1u8, 0, 0, 1, 0, 1, 1],
            [0, 1, 0, 1, 1, 0, 1],
            [0, 0, 1, 0, 1, 1, 1],
        ]);
        let cs = CodeSide::new(Arc::new(CssCode::new("steane", h.clone(), h).unwrap()), Side::X);
        let mut bp = PlainBp::new(&cs, BpConfig::default());
        let inst = sample_instance(&cs, 0.0, &mut trial_rng(0, Side::X, 0));
        assert!(bp.decode(&inst).converged());
    }

    fn random_tree(seed: u64) -> BitMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut vars = 1;
        while vars < 10 {
            let anchor = rng.gen_range(0..vars);
            let fresh = rng.gen_range(1..=3).min(12 - vars);
            let mut row = vec![anchor];
            row.extend(vars..vars + fresh);
            vars += fresh;
            rows.push(row);
        }
        BitMatrix::from_row_supports(vars, &rows).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn tree_beliefs_are_exact_marginals(seed in 0u64..10_000) {
            let h = random_tree(seed);
            let g = TannerGraph::from_matrix(&h);
            let n = h.cols();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let priors: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let s = BitVector::from_bits(&(0..h.rows()).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>());
            let cfg = BpConfig { iterations: 2 * n, ..Default::default() };
            let out = bp_run(&g, &priors, &s, &cfg);
            // oracle: weight every x with H x = s by its prior odds
            let mut mass = vec![[0.0f64; 2]; n];
            for bits in 0u32..1 << n {
                let x = BitVector::from_bits(&(0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>());
                if h.mat_vec(&x).unwrap() != s {
                    continue;
                }
                let w: f64 = (0..n).map(|i| if x.get(i) { -priors[i] / 2.0 } else { priors[i] / 2.0 }).sum::<f64>().exp();
                for i in 0..n {
                    mass[i][x.get(i) as usize] += w;
                }
            }
            for i in 0..n {
                let exact = (mass[i][0] / mass[i][1]).ln();
                proptest::prop_assert!((out.beliefs[i] - exact).abs() < 1e-9, "var {}: {} vs {}", i, out.beliefs[i], exact);
            }
        }
    }
}
