//! Dense bit-packed linear algebra over GF(2).
//!
//! Rows are stored as runs of `u64` words, least significant bit first. Bits
//! past the logical length of a row or vector are always zero.

use std::fmt;

use thiserror::Error;

const WORD_BITS: usize = 64;

/// Upper bound on `rows * cols` for a single matrix.
pub const DEFAULT_MAX_BITS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix of {rows}x{cols} exceeds the {max} bit limit")]
    SizeOverflow { rows: usize, cols: usize, max: usize },
    #[error("circulant exponent {exponent} out of range for lift size {lift}")]
    ExponentOutOfRange { exponent: usize, lift: usize },
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[cfg(test)]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A packed vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of length `len` with ones at `indices`.
    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self, Gf2Error> {
        let mut v = Self::zeros(len);
        for &i in indices {
            if i >= len {
                return Err(Gf2Error::DimensionMismatch {
                    expected: len,
                    found: i + 1,
                });
            }
            v.set(i, true);
        }
        Ok(v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            word_index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "and of vectors with different lengths");
        BitVector {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitVector) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn dot(&self, other: &BitVector) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, "]")
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    word_index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_index * WORD_BITS + bit);
            }
            self.word_index += 1;
            if self.word_index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_index];
        }
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Row-reduced echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub reduced: BitMatrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::try_zeros(rows, cols).expect("matrix too large")
    }

    pub fn try_zeros(rows: usize, cols: usize) -> Result<Self, Gf2Error> {
        match rows.checked_mul(cols) {
            Some(bits) if bits <= DEFAULT_MAX_BITS => {}
            _ => {
                return Err(Gf2Error::SizeOverflow {
                    rows,
                    cols,
                    max: DEFAULT_MAX_BITS,
                })
            }
        }
        let stride = words_for(cols);
        Ok(Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from dense 0/1 rows. All rows must share a length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                if b != 0 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds a matrix from per-row lists of column indices.
    pub fn from_row_supports(cols: usize, supports: &[Vec<usize>]) -> Result<Self, Gf2Error> {
        let mut m = Self::try_zeros(supports.len(), cols)?;
        for (i, support) in supports.iter().enumerate() {
            for &j in support {
                if j >= cols {
                    return Err(Gf2Error::DimensionMismatch {
                        expected: cols,
                        found: j + 1,
                    });
                }
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    pub fn from_row_vectors(cols: usize, rows: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD_BITS];
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    /// Column indices of the ones in row `r`.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        Ones {
            words: self.row_words(r),
            word_index: 0,
            current: self.row_words(r).first().copied().unwrap_or(0),
        }
        .collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.stride);
        head[lo * self.stride..(lo + 1) * self.stride].swap_with_slice(&mut tail[..self.stride]);
    }

    /// `row[dst] ^= row[src]`
    fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        if src < dst {
            let (head, tail) = self.data.split_at_mut(dst * s);
            for (d, x) in tail[..s].iter_mut().zip(&head[src * s..(src + 1) * s]) {
                *d ^= *x;
            }
        } else {
            let (head, tail) = self.data.split_at_mut(src * s);
            for (d, x) in head[dst * s..(dst + 1) * s].iter_mut().zip(&tail[..s]) {
                *d ^= *x;
            }
        }
    }

    pub fn mat_vec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
            if parity & 1 == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_support(r) {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = BitMatrix::try_zeros(self.rows, other.cols)?;
        for r in 0..self.rows {
            for k in self.row_support(r) {
                let src = other.row_words(k);
                for (d, s) in out.data[r * out.stride..(r + 1) * out.stride].iter_mut().zip(src) {
                    *d ^= *s;
                }
            }
        }
        Ok(out)
    }

    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let mut out = BitMatrix::try_zeros(self.rows, self.cols + other.cols)?;
        for r in 0..self.rows {
            for c in self.row_support(r) {
                out.set(r, c, true);
            }
            for c in other.row_support(r) {
                out.set(r, self.cols + c, true);
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut out = BitMatrix::try_zeros(self.rows + other.rows, self.cols)?;
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        Ok(out)
    }

    /// Submatrix keeping only the listed columns, in the listed order.
    pub fn select_columns(&self, columns: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, columns.len());
        for r in 0..self.rows {
            for (j, &c) in columns.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Kronecker product over GF(2).
    pub fn kron(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        let overflow = || Gf2Error::SizeOverflow {
            rows: self.rows.saturating_mul(other.rows),
            cols: self.cols.saturating_mul(other.cols),
            max: DEFAULT_MAX_BITS,
        };
        let rows = self.rows.checked_mul(other.rows).ok_or_else(overflow)?;
        let cols = self.cols.checked_mul(other.cols).ok_or_else(overflow)?;
        let mut out = BitMatrix::try_zeros(rows, cols)?;
        let other_supports: Vec<Vec<usize>> = (0..other.rows).map(|r| other.row_support(r)).collect();
        for i in 0..self.rows {
            for j in self.row_support(i) {
                for (k, support) in other_supports.iter().enumerate() {
                    for &l in support {
                        out.set(i * other.rows + k, j * other.cols + l, true);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Sum of the `lift x lift` cyclic shift matrices `P^e` for every `e` in
    /// `exponents`, where `P[i][(i + 1) % lift] = 1`. Repeated exponents cancel.
    pub fn circulant(exponents: &[usize], lift: usize) -> Result<BitMatrix, Gf2Error> {
        let mut m = BitMatrix::try_zeros(lift, lift)?;
        for &e in exponents {
            if e >= lift {
                return Err(Gf2Error::ExponentOutOfRange { exponent: e, lift });
            }
            for i in 0..lift {
                let c = (i + e) % lift;
                let bit = m.get(i, c);
                m.set(i, c, !bit);
            }
        }
        Ok(m)
    }

    /// Gauss-Jordan elimination, choosing pivots only among the first
    /// `pivot_limit` columns.
    fn eliminate(&mut self, pivot_limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next_row = 0;
        for col in 0..pivot_limit.min(self.cols) {
            if next_row == self.rows {
                break;
            }
            let word = col / WORD_BITS;
            let mask = 1u64 << (col % WORD_BITS);
            let Some(found) = (next_row..self.rows).find(|&r| self.data[r * self.stride + word] & mask != 0) else {
                continue;
            };
            self.swap_rows(found, next_row);
            for r in 0..self.rows {
                if r != next_row && self.data[r * self.stride + word] & mask != 0 {
                    self.xor_row_into(next_row, r);
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        pivots
    }

    pub fn rref(&self) -> Echelon {
        let mut reduced = self.clone();
        let pivots = reduced.eliminate(self.cols);
        Echelon { reduced, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Some `x` with `self * x = b`, free variables set to zero; `None` if
    /// the system is inconsistent.
    pub fn solve(&self, b: &BitVector) -> Result<Option<BitVector>, Gf2Error> {
        if b.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let mut aug = BitMatrix::try_zeros(self.rows, self.cols + 1)?;
        for r in 0..self.rows {
            for c in self.row_support(r) {
                aug.set(r, c, true);
            }
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let pivots = aug.eliminate(self.cols);
        for r in pivots.len()..self.rows {
            if aug.get(r, self.cols) {
                return Ok(None);
            }
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &c) in pivots.iter().enumerate() {
            if aug.get(r, self.cols) {
                x.set(c, true);
            }
        }
        Ok(Some(x))
    }

    /// Basis of `{x : self * x = 0}`, one vector per row.
    pub fn nullspace_basis(&self) -> BitMatrix {
        let ech = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            basis.set(i, f, true);
            for (r, &p) in ech.pivots.iter().enumerate() {
                if ech.reduced.get(r, f) {
                    basis.set(i, p, true);
                }
            }
        }
        basis
    }

    pub fn in_rowspace(&self, v: &BitVector) -> Result<bool, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(RowSpace::new(self).contains(v))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Precomputed echelon basis for repeated row-space membership queries.
#[derive(Debug, Clone)]
pub struct RowSpace {
    echelon: Echelon,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        Self { echelon: m.rref() }
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn cols(&self) -> usize {
        self.echelon.reduced.cols()
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.cols(), "row space membership length mismatch");
        let mut residual = v.words().to_vec();
        let reduced = &self.echelon.reduced;
        for (r, &p) in self.echelon.pivots.iter().enumerate() {
            if (residual[p / WORD_BITS] >> (p % WORD_BITS)) & 1 == 1 {
                for (a, b) in residual.iter_mut().zip(reduced.row_words(r)) {
                    *a ^= *b;
                }
            }
        }
        residual.iter().all(|&w| w == 0)
    }
}
