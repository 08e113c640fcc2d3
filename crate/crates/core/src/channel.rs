//! Quantum erasure channel sampling for one CSS side.
//!
//! Each qubit is erased independently with probability `p`; an erased qubit
//! suffers a uniformly random Pauli, which for a CSS code means an
//! independent fair coin for the X part and for the Z part. Only the part
//! belonging to the simulated side is sampled.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{CssCode, TannerGraph};
use crate::gf2::{BitMatrix, BitVector, Gf2Error, RowSpace};

/// Which error type is being corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// X errors, detected by `H_Z`; stabilizers are the rows of `H_X`.
    X,
    /// Z errors, detected by `H_X`; stabilizers are the rows of `H_Z`.
    Z,
}

impl Side {
    pub fn check_matrix(self, code: &CssCode) -> &BitMatrix {
        match self {
            Side::X => code.h_z(),
            Side::Z => code.h_x(),
        }
    }

    pub fn stabilizer_matrix(self, code: &CssCode) -> &BitMatrix {
        match self {
            Side::X => code.h_x(),
            Side::Z => code.h_z(),
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            Side::X => 0x58,
            Side::Z => 0x5a,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::X => "x",
            Side::Z => "z",
        })
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Side::X),
            "z" => Ok(Side::Z),
            other => Err(format!("unknown side {other:?} (expected x or z)")),
        }
    }
}

/// Everything a decoder needs about one side of a code, built once and
/// shared read-only between workers.
#[derive(Debug)]
pub struct CodeSide {
    code: Arc<CssCode>,
    side: Side,
    graph: TannerGraph,
    stabilizers: RowSpace,
}

impl CodeSide {
    pub fn new(code: Arc<CssCode>, side: Side) -> Self {
        let graph = TannerGraph::from_matrix(side.check_matrix(&code));
        let stabilizers = RowSpace::new(side.stabilizer_matrix(&code));
        Self {
            code,
            side,
            graph,
            stabilizers,
        }
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn check_matrix(&self) -> &BitMatrix {
        self.side.check_matrix(&self.code)
    }

    pub fn stabilizer_matrix(&self) -> &BitMatrix {
        self.side.stabilizer_matrix(&self.code)
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn stabilizer_space(&self) -> &RowSpace {
        &self.stabilizers
    }

    pub fn syndrome_of(&self, error: &BitVector) -> Result<BitVector, Gf2Error> {
        self.check_matrix().mat_vec(error)
    }
}

/// Syndrome of `error` against the check matrix of `side`.
pub fn syndrome_of(code: &CssCode, side: Side, error: &BitVector) -> Result<BitVector, Gf2Error> {
    side.check_matrix(code).mat_vec(error)
}

/// One sampled channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureInstance {
    pub mask: BitVector,
    pub error: BitVector,
    pub syndrome: BitVector,
    pub erasure_rate: f64,
}

impl ErasureInstance {
    /// Rebuilds an instance from explicit index lists, recomputing the syndrome.
    pub fn from_parts(code_side: &CodeSide, mask: BitVector, error: BitVector, erasure_rate: f64) -> Result<Self, InstanceError> {
        if !error.is_subset_of(&mask) {
            return Err(InstanceError::ErrorOutsideMask);
        }
        let syndrome = code_side.syndrome_of(&error)?;
        Ok(Self {
            mask,
            error,
            syndrome,
            erasure_rate,
        })
    }

    pub fn erased(&self) -> Vec<usize> {
        self.mask.ones().collect()
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("error bits outside the erasure mask")]
    ErrorOutsideMask,
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Samples one instance. Every qubit consumes one uniform draw for the
/// erasure decision and one fair bit for the error value, erased or not, so
/// equal streams give nested erasure sets across rates.
pub fn sample_instance<R: Rng>(code_side: &CodeSide, p: f64, rng: &mut R) -> ErasureInstance {
    assert!((0.0..=1.0).contains(&p), "erasure rate {p} outside [0, 1]");
    let n = code_side.n();
    let mut mask = BitVector::zeros(n);
    let mut error = BitVector::zeros(n);
    for i in 0..n {
        let u: f64 = rng.gen();
        let bit: bool = rng.gen();
        if u < p {
            mask.set(i, true);
            if bit {
                error.set(i, true);
            }
        }
    }
    let syndrome = code_side.syndrome_of(&error).expect("error length equals n");
    ErasureInstance {
        mask,
        error,
        syndrome,
        erasure_rate: p,
    }
}

/// Independent generator for trial `trial` of a run seeded with
/// `master_seed`: ChaCha8 keyed by the seed and side, with the trial index
/// as the 64-bit stream id.
pub fn trial_rng(master_seed: u64, side: Side, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&side.stream_tag().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// One line of an instance dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpRecord {
    pub seed: u64,
    pub trial: u64,
    pub side: Side,
    pub rate: f64,
    pub mask: Vec<usize>,
    pub error: Vec<usize>,
    pub syndrome: Vec<usize>,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl DumpRecord {
    pub fn new(seed: u64, trial: u64, side: Side, instance: &ErasureInstance) -> Self {
        Self {
            seed,
            trial,
            side,
            rate: instance.erasure_rate,
            mask: instance.mask.ones().collect(),
            error: instance.error.ones().collect(),
            syndrome: instance.syndrome.ones().collect(),
        }
    }

    /// `seed=<s> trial=<t> side=<x|z> rate=<p> mask=<i,..> error=<i,..> syndrome=<i,..>`
    pub fn to_line(&self) -> String {
        format!(
            "seed={} trial={} side={} rate={} mask={} error={} syndrome={}",
            self.seed,
            self.trial,
            self.side,
            self.rate,
            join(&self.mask),
            join(&self.error),
            join(&self.syndrome)
        )
    }

    pub fn parse(line_no: usize, line: &str) -> Result<Self, InstanceError> {
        let err = |message: String| InstanceError::Parse { line: line_no, message };
        let mut rec = DumpRecord {
            seed: 0,
            trial: 0,
            side: Side::X,
            rate: 0.0,
            mask: vec![],
            error: vec![],
            syndrome: vec![],
        };
        let indices = |v: &str| -> Result<Vec<usize>, InstanceError> {
            if v.is_empty() {
                return Ok(vec![]);
            }
            v.split(',')
                .map(|t| t.parse().map_err(|_| err(format!("bad index {t:?}"))))
                .collect()
        };
        for field in line.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| err(format!("malformed field {field:?}")))?;
            match key {
                "seed" => rec.seed = value.parse().map_err(|_| err("bad seed".into()))?,
                "trial" => rec.trial = value.parse().map_err(|_| err("bad trial".into()))?,
                "side" => rec.side = value.parse().map_err(err)?,
                "rate" => rec.rate = value.parse().map_err(|_| err("bad rate".into()))?,
                "mask" => rec.mask = indices(value)?,
                "error" => rec.error = indices(value)?,
                "syndrome" => rec.syndrome = indices(value)?,
                other => return Err(err(format!("unknown field {other:?}"))),
            }
        }
        Ok(rec)
    }

    /// Rebuilds the instance and checks the recorded syndrome.
    pub fn instance(&self, code_side: &CodeSide) -> Result<ErasureInstance, InstanceError> {
        let n = code_side.n();
        let mask = BitVector::from_indices(n, &self.mask)?;
        let error = BitVector::from_indices(n, &self.error)?;
        let inst = ErasureInstance::from_parts(code_side, mask, error, self.rate)?;
        let recorded = BitVector::from_indices(inst.syndrome.len(), &self.syndrome)?;
        if recorded != inst.syndrome {
            return Err(InstanceError::Parse {
                line: 0,
                message: "recorded syndrome does not match the error".into(),
            });
        }
        Ok(inst)
    }
}
