//! Types shared by every decoder.

use serde::{Deserialize, Serialize};

use crate::channel::{CodeSide, ErasureInstance};
use crate::gf2::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecodeStatus {
    Converged,
    NonConvergence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub status: DecodeStatus,
    /// Error estimate; meaningful only when `status` is `Converged`.
    pub estimate: BitVector,
    pub rounds_used: usize,
    pub bp_iterations_total: usize,
}

impl DecodeResult {
    pub fn converged(&self) -> bool {
        self.status == DecodeStatus::Converged
    }
}

/// A syndrome decoder for erasures on one side of a CSS code.
///
/// Implementations may keep scratch buffers between calls, which is why
/// decoding takes `&mut self`; each worker owns its own decoder.
pub trait ErasureDecoder {
    fn decode(&mut self, instance: &ErasureInstance) -> DecodeResult;

    fn code_side(&self) -> &CodeSide;
}
