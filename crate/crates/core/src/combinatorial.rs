//! Peeling, pruned peeling, the maximum-likelihood erasure criterion and
//! outcome classification.

use std::collections::{BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{CodeSide, ErasureInstance};
use crate::decode::{DecodeResult, DecodeStatus, ErasureDecoder};
use crate::gf2::{BitMatrix, BitVector, Gf2Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    ExactMatch,
    DegenerateMatch,
    LogicalError,
    DecoderFailure,
}

impl Outcome {
    pub fn is_failure(self) -> bool {
        matches!(self, Outcome::LogicalError | Outcome::DecoderFailure)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::ExactMatch => "exact",
            Outcome::DegenerateMatch => "degenerate",
            Outcome::LogicalError => "logical",
            Outcome::DecoderFailure => "nonconv",
        })
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("estimate does not reproduce the syndrome")]
    SyndromeMismatch,
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Classifies a syndrome-matching estimate against the true error.
pub fn classify(error: &BitVector, estimate: &BitVector, code_side: &CodeSide) -> Result<Outcome, ClassifyError> {
    let residual = error.xor(estimate);
    if !code_side.check_matrix().mat_vec(&residual)?.is_zero() {
        return Err(ClassifyError::SyndromeMismatch);
    }
    Ok(if residual.is_zero() {
        Outcome::ExactMatch
    } else if code_side.stabilizer_space().contains(&residual) {
        Outcome::DegenerateMatch
    } else {
        Outcome::LogicalError
    })
}

/// Maps a decoder result to an outcome; non-convergence is a decoder failure.
pub fn outcome_of(result: &DecodeResult, instance: &ErasureInstance, code_side: &CodeSide) -> Result<Outcome, ClassifyError> {
    match result.status {
        DecodeStatus::NonConvergence => Ok(Outcome::DecoderFailure),
        DecodeStatus::Converged => classify(&instance.error, &result.estimate, code_side),
    }
}

/// Peeling decoder with optional stabilizer pruning of depth `depth`
/// (0 disables the search and gives plain peeling).
pub struct Peeler<'a> {
    code_side: &'a CodeSide,
    depth: usize,
    stabilizers: Vec<BitVector>,
    remaining: Vec<bool>,
    residual: Vec<bool>,
    open: Vec<usize>,
    heap: BinaryHeap<Reverse<usize>>,
}

impl<'a> Peeler<'a> {
    pub fn new(code_side: &'a CodeSide, depth: usize) -> Self {
        let stab = code_side.stabilizer_matrix();
        Self {
            code_side,
            depth,
            stabilizers: (0..stab.rows()).map(|r| stab.row(r)).filter(|r| !r.is_zero()).collect(),
            remaining: Vec::new(),
            residual: Vec::new(),
            open: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn assign(&mut self, v: usize, value: bool, estimate: &mut BitVector) {
        let graph = self.code_side.graph();
        self.remaining[v] = false;
        if value {
            estimate.set(v, true);
        }
        for c in graph.var_neighbors(v) {
            if value {
                self.residual[c] ^= true;
            }
            self.open[c] -= 1;
            if self.open[c] == 1 {
                self.heap.push(Reverse(c));
            }
        }
    }

    /// Peels dangling checks, lowest index first, until none is left.
    fn peel(&mut self, estimate: &mut BitVector) {
        let graph = self.code_side.graph();
        while let Some(Reverse(c)) = self.heap.pop() {
            if self.open[c] != 1 {
                continue;
            }
            let v = graph
                .check_neighbors(c)
                .iter()
                .copied()
                .find(|&v| self.remaining[v])
                .expect("dangling check has an erased neighbour");
            let value = self.residual[c];
            self.assign(v, value, estimate);
        }
    }

    /// Lowest-index variable in the support of the first combination of at
    /// most `depth` stabilizer rows lying inside the residual erasure;
    /// combinations are searched by size, then lexicographically.
    fn find_stabilizer_bit(&self) -> Option<usize> {
        if self.depth == 0 {
            return None;
        }
        let n = self.code_side.n();
        let erased = BitVector::from_bits(&self.remaining);
        let outside = |row: &BitVector| -> Vec<u64> {
            row.words().iter().zip(erased.words()).map(|(r, e)| r & !e).collect()
        };
        let outsides: Vec<Vec<u64>> = self.stabilizers.iter().map(outside).collect();
        // size 1
        if let Some(i) = outsides.iter().position(|o| o.iter().all(|&w| w == 0)) {
            return self.stabilizers[i].ones().next();
        }
        if self.depth == 1 {
            return None;
        }
        let mut by_outside: HashMap<&[u64], Vec<usize>> = HashMap::new();
        for (i, o) in outsides.iter().enumerate() {
            by_outside.entry(o.as_slice()).or_default().push(i);
        }
        for size in 2..=self.depth.min(self.stabilizers.len()) {
            let mut chosen = Vec::with_capacity(size);
            let acc = BitVector::zeros(n);
            if let Some(bit) = self.search(size, 0, &mut chosen, acc, &outside, &by_outside) {
                return Some(bit);
            }
        }
        None
    }

    fn search(
        &self,
        size: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        acc: BitVector,
        outside: &dyn Fn(&BitVector) -> Vec<u64>,
        by_outside: &HashMap<&[u64], Vec<usize>>,
    ) -> Option<usize> {
        if chosen.len() + 1 == size {
            // the last row must cancel everything outside the erasure
            let key = outside(&acc);
            let candidates = by_outside.get(key.as_slice())?;
            for &k in candidates.iter().filter(|&&k| k >= start) {
                let combo = acc.xor(&self.stabilizers[k]);
                if !combo.is_zero() {
                    return combo.ones().next();
                }
            }
            return None;
        }
        for i in start..self.stabilizers.len() {
            chosen.push(i);
            let next = acc.xor(&self.stabilizers[i]);
            let found = self.search(size, i + 1, chosen, next, outside, by_outside);
            chosen.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

impl ErasureDecoder for Peeler<'_> {
    fn decode(&mut self, instance: &ErasureInstance) -> DecodeResult {
        let graph = self.code_side.graph();
        let n = graph.num_vars();
        let mut estimate = BitVector::zeros(n);
        self.remaining.clear();
        self.remaining.extend((0..n).map(|v| instance.mask.get(v)));
        self.residual.clear();
        self.residual.extend((0..graph.num_checks()).map(|c| instance.syndrome.get(c)));
        self.open.clear();
        self.open.extend((0..graph.num_checks()).map(|c| {
            graph.check_neighbors(c).iter().filter(|&&v| self.remaining[v]).count()
        }));
        self.heap.clear();
        self.heap.extend((0..graph.num_checks()).filter(|&c| self.open[c] == 1).map(Reverse));
        let mut rounds = 1;
        loop {
            self.peel(&mut estimate);
            if !self.remaining.iter().any(|&r| r) {
                break;
            }
            // Fixing a bit of the found combination to 0 removes it from
            // the residual erasure, so the same combination is never reused.
            match self.find_stabilizer_bit() {
                Some(v) => {
                    self.assign(v, false, &mut estimate);
                    rounds += 1;
                }
                None => break,
            }
        }
        let done = !self.remaining.iter().any(|&r| r) && !self.residual.iter().any(|&r| r);
        DecodeResult {
            status: if done {
                DecodeStatus::Converged
            } else {
                DecodeStatus::NonConvergence
            },
            estimate,
            rounds_used: rounds,
            bp_iterations_total: 0,
        }
    }

    fn code_side(&self) -> &CodeSide {
        self.code_side
    }
}

pub fn peel_decode(code_side: &CodeSide, instance: &ErasureInstance) -> DecodeResult {
    Peeler::new(code_side, 0).decode(instance)
}

pub fn pruned_peel_decode(code_side: &CodeSide, instance: &ErasureInstance, depth: usize) -> DecodeResult {
    Peeler::new(code_side, depth).decode(instance)
}

/// Maximum-likelihood outcome for an erasure instance.
///
/// The instance is decodable iff no nonzero vector supported on the erasure
/// with zero syndrome lies outside the stabilizer row space. Undecodable
/// instances count as `LogicalError` unless `fair_guess` is set, in which
/// case a particular solution is classified against the true error.
pub fn ml_erasure_outcome(code_side: &CodeSide, instance: &ErasureInstance, fair_guess: bool) -> Result<Outcome, ClassifyError> {
    let (estimate, decodable) = ml_solve(code_side, instance)?;
    if !decodable && !fair_guess {
        return Ok(Outcome::LogicalError);
    }
    classify(&instance.error, &estimate, code_side)
}

/// A solution supported on the erasure and whether it is unique up to
/// stabilizers.
pub fn ml_solve(code_side: &CodeSide, instance: &ErasureInstance) -> Result<(BitVector, bool), ClassifyError> {
    let n = code_side.n();
    let erased: Vec<usize> = instance.mask.ones().collect();
    let restricted: BitMatrix = code_side.check_matrix().select_columns(&erased);
    let embed = |local: &BitVector| {
        let mut v = BitVector::zeros(n);
        for i in local.ones() {
            v.set(erased[i], true);
        }
        v
    };
    let local = restricted.solve(&instance.syndrome)?.ok_or(ClassifyError::SyndromeMismatch)?;
    let stabilizers = code_side.stabilizer_space();
    let mut decodable = true;
    let nullspace = restricted.nullspace_basis();
    for r in 0..nullspace.rows() {
        if !stabilizers.contains(&embed(&nullspace.row(r))) {
            decodable = false;
            break;
        }
    }
    Ok((embed(&local), decodable))
}

/// ML decoding as a decoder: converges iff the instance is decodable.
pub struct MlDecoder<'a> {
    code_side: &'a CodeSide,
    fair_guess: bool,
}

impl<'a> MlDecoder<'a> {
    pub fn new(code_side: &'a CodeSide, fair_guess: bool) -> Self {
        Self { code_side, fair_guess }
    }
}

impl ErasureDecoder for MlDecoder<'_> {
    fn decode(&mut self, instance: &ErasureInstance) -> DecodeResult {
        let (estimate, decodable) = ml_solve(self.code_side, instance).expect("instance belongs to this code side");
        // An undecodable instance still yields a valid guess; the caller
        // decides whether a guess counts.
        DecodeResult {
            status: if decodable || self.fair_guess {
                DecodeStatus::Converged
            } else {
                DecodeStatus::NonConvergence
            },
            estimate,
            rounds_used: 1,
            bp_iterations_total: 0,
        }
    }

    fn code_side(&self) -> &CodeSide {
        self.code_side
    }
}
