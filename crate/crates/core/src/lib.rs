//! Erasure decoding for quantum LDPC (CSS) codes.
//!
//! The crate provides GF(2) linear algebra, CSS code construction
//! (hypergraph and lifted products), an erasure channel, iterative decoders
//! (BP and BP with guided decimation), combinatorial decoders (peeling,
//! pruned peeling, maximum likelihood) and a Monte Carlo sweep harness.

pub mod builtin;
pub mod channel;
pub mod code;
pub mod combinatorial;
pub mod decode;
pub mod gf2;
pub mod harness;
pub mod io;
pub mod iterative;
pub mod params;

pub use channel::{sample_instance, trial_rng, CodeSide, DumpRecord, ErasureInstance, Side};
pub use code::{hgp, lifted_product, CssCode, LiftedBase, TannerGraph};
pub use decode::{DecodeResult, DecodeStatus, ErasureDecoder};
pub use gf2::{BitMatrix, BitVector, RowSpace};
pub use iterative::{bp_run, bpgd_decode, BpConfig, Bpgd, PlainBp, TieBreak};
pub use combinatorial::{classify, ml_erasure_outcome, peel_decode, pruned_peel_decode, MlDecoder, Outcome, Peeler};
pub use harness::{run_sweep, DecoderConfig, DecoderKind, PointStats, SweepSpec};
