//! CSS codes built from pairs of binary check matrices, together with the
//! hypergraph-product and lifted-product constructions.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, Gf2Error};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("empty seed matrix ({rows}x{cols})")]
    EmptyInput { rows: usize, cols: usize },
    #[error("lift sizes differ: {0} vs {1}")]
    LiftMismatch(usize, usize),
    #[error("invalid CSS code: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("could not generate a seed matrix after {0} attempts")]
    GenerationFailed(usize),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// One broken CSS invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    ColumnMismatch { hx_cols: usize, hz_cols: usize },
    OddOverlap { x_row: usize, z_row: usize },
    NegativeDimension { n: usize, rank_x: usize, rank_z: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ColumnMismatch { hx_cols, hz_cols } => {
                write!(f, "H_X has {hx_cols} columns but H_Z has {hz_cols}")
            }
            Violation::OddOverlap { x_row, z_row } => {
                write!(f, "H_X row {x_row} and H_Z row {z_row} overlap on an odd number of qubits")
            }
            Violation::NegativeDimension { n, rank_x, rank_z } => {
                write!(f, "rank(H_X) + rank(H_Z) = {} exceeds n = {n}", rank_x + rank_z)
            }
        }
    }
}

/// Lists every broken invariant of the pair `(h_x, h_z)`. Odd overlaps are
/// reported pairwise.
pub fn check_css_pair(h_x: &BitMatrix, h_z: &BitMatrix) -> Vec<Violation> {
    if h_x.cols() != h_z.cols() {
        return vec![Violation::ColumnMismatch {
            hx_cols: h_x.cols(),
            hz_cols: h_z.cols(),
        }];
    }
    let mut out = Vec::new();
    let overlap = h_x.mul(&h_z.transpose()).expect("shapes checked above");
    for x_row in 0..overlap.rows() {
        for z_row in overlap.row_support(x_row) {
            out.push(Violation::OddOverlap { x_row, z_row });
        }
    }
    if out.is_empty() {
        let n = h_x.cols();
        let (rank_x, rank_z) = (h_x.rank(), h_z.rank());
        if rank_x + rank_z > n {
            out.push(Violation::NegativeDimension { n, rank_x, rank_z });
        }
    }
    out
}

/// A validated CSS code. `k` is always computed from the matrices.
#[derive(Clone, PartialEq, Eq)]
pub struct CssCode {
    name: String,
    h_x: BitMatrix,
    h_z: BitMatrix,
    k: usize,
}

impl fmt::Debug for CssCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CssCode({} [[{}, {}]])", self.name, self.n(), self.k)
    }
}

impl CssCode {
    pub fn new(name: impl Into<String>, h_x: BitMatrix, h_z: BitMatrix) -> Result<Self, CodeError> {
        let violations = check_css_pair(&h_x, &h_z);
        if !violations.is_empty() {
            return Err(CodeError::Invalid(violations));
        }
        let k = h_x.cols() - h_x.rank() - h_z.rank();
        Ok(Self {
            name: name.into(),
            h_x,
            h_z,
            k,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n(&self) -> usize {
        self.h_x.cols()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h_x(&self) -> &BitMatrix {
        &self.h_x
    }

    pub fn h_z(&self) -> &BitMatrix {
        &self.h_z
    }

    /// Re-checks every invariant; empty when the code is sound.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = check_css_pair(&self.h_x, &self.h_z);
        if v.is_empty() {
            let k = self.n() - self.h_x.rank() - self.h_z.rank();
            if k != self.k {
                v.push(Violation::NegativeDimension {
                    n: self.n(),
                    rank_x: self.h_x.rank(),
                    rank_z: self.h_z.rank(),
                });
            }
        }
        v
    }
}

/// Hypergraph product of two classical check matrices:
/// `H_X = [H1 ⊗ I_n2 | I_m1 ⊗ H2^T]`, `H_Z = [I_n1 ⊗ H2 | H1^T ⊗ I_m2]`.
pub fn hgp(h1: &BitMatrix, h2: &BitMatrix) -> Result<CssCode, CodeError> {
    for h in [h1, h2] {
        if h.rows() == 0 || h.cols() == 0 || h.is_zero() {
            return Err(CodeError::EmptyInput {
                rows: h.rows(),
                cols: h.cols(),
            });
        }
    }
    let (m1, n1) = (h1.rows(), h1.cols());
    let (m2, n2) = (h2.rows(), h2.cols());
    let h_x = h1
        .kron(&BitMatrix::identity(n2))?
        .hstack(&BitMatrix::identity(m1).kron(&h2.transpose())?)?;
    let h_z = BitMatrix::identity(n1)
        .kron(h2)?
        .hstack(&h1.transpose().kron(&BitMatrix::identity(m2))?)?;
    CssCode::new(format!("hgp-{}", n1 * n2 + m1 * m2), h_x, h_z)
}

/// A matrix over `F2[x]/(x^L - 1)`. Each entry is a set of shift exponents;
/// an empty set is the zero block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedBase {
    rows: usize,
    cols: usize,
    lift: usize,
    entries: Vec<Vec<usize>>,
}

impl LiftedBase {
    pub fn new(rows: usize, cols: usize, lift: usize, entries: Vec<Vec<usize>>) -> Result<Self, CodeError> {
        if entries.len() != rows * cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            }
            .into());
        }
        let mut normalized = Vec::with_capacity(entries.len());
        for mut e in entries {
            if let Some(&bad) = e.iter().find(|&&x| x >= lift) {
                return Err(Gf2Error::ExponentOutOfRange { exponent: bad, lift }.into());
            }
            // x^a + x^a = 0
            e.sort_unstable();
            let mut reduced: Vec<usize> = Vec::with_capacity(e.len());
            for x in e {
                if reduced.last() == Some(&x) {
                    reduced.pop();
                } else {
                    reduced.push(x);
                }
            }
            normalized.push(reduced);
        }
        Ok(Self {
            rows,
            cols,
            lift,
            entries: normalized,
        })
    }

    /// Ring identity matrix of size `n`.
    pub fn identity(n: usize, lift: usize) -> Self {
        let mut entries = vec![Vec::new(); n * n];
        for i in 0..n {
            entries[i * n + i] = vec![0];
        }
        Self {
            rows: n,
            cols: n,
            lift,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    pub fn entry(&self, r: usize, c: usize) -> &[usize] {
        &self.entries[r * self.cols + c]
    }

    /// Conjugate transpose: transpose the grid and map `x^e` to `x^(L-e)`.
    /// Its expansion is the binary transpose of the expansion.
    pub fn conjugate_transpose(&self) -> Self {
        let mut entries = vec![Vec::new(); self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let mut e: Vec<usize> = self.entry(r, c).iter().map(|&x| (self.lift - x) % self.lift).collect();
                e.sort_unstable();
                entries[c * self.rows + r] = e;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            lift: self.lift,
            entries,
        }
    }

    /// Kronecker product over the ring.
    pub fn kron(&self, other: &LiftedBase) -> Result<Self, CodeError> {
        if self.lift != other.lift {
            return Err(CodeError::LiftMismatch(self.lift, other.lift));
        }
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut entries = vec![Vec::new(); rows * cols];
        let l = self.lift;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.entry(i, j);
                if a.is_empty() {
                    continue;
                }
                for k in 0..other.rows {
                    for m in 0..other.cols {
                        let b = other.entry(k, m);
                        if b.is_empty() {
                            continue;
                        }
                        let mut prod = Vec::with_capacity(a.len() * b.len());
                        for &x in a {
                            for &y in b {
                                prod.push((x + y) % l);
                            }
                        }
                        entries[(i * other.rows + k) * cols + j * other.cols + m] = prod;
                    }
                }
            }
        }
        Self::new(rows, cols, l, entries)
    }

    pub fn hstack(&self, other: &LiftedBase) -> Result<Self, CodeError> {
        if self.lift != other.lift {
            return Err(CodeError::LiftMismatch(self.lift, other.lift));
        }
        if self.rows != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            }
            .into());
        }
        let cols = self.cols + other.cols;
        let mut entries = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                entries.push(self.entry(r, c).to_vec());
            }
            for c in 0..other.cols {
                entries.push(other.entry(r, c).to_vec());
            }
        }
        Self::new(self.rows, cols, self.lift, entries)
    }

    /// Replaces every ring entry by its `L x L` circulant block.
    pub fn expand(&self) -> Result<BitMatrix, CodeError> {
        let l = self.lift;
        let mut out = BitMatrix::try_zeros(self.rows * l, self.cols * l)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                for &e in self.entry(r, c) {
                    for i in 0..l {
                        let (row, col) = (r * l + i, c * l + (i + e) % l);
                        let bit = out.get(row, col);
                        out.set(row, col, !bit);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Lifted product of two ring matrices:
/// `H_X = [A ⊗ I_n2 | I_m1 ⊗ B*]`, `H_Z = [I_n1 ⊗ B | A* ⊗ I_m2]`.
pub fn lifted_product(a: &LiftedBase, b: &LiftedBase) -> Result<CssCode, CodeError> {
    if a.lift != b.lift {
        return Err(CodeError::LiftMismatch(a.lift, b.lift));
    }
    let l = a.lift;
    let (m1, n1, m2, n2) = (a.rows, a.cols, b.rows, b.cols);
    let h_x = a
        .kron(&LiftedBase::identity(n2, l))?
        .hstack(&LiftedBase::identity(m1, l).kron(&b.conjugate_transpose())?)?;
    let h_z = LiftedBase::identity(n1, l)
        .kron(b)?
        .hstack(&a.conjugate_transpose().kron(&LiftedBase::identity(m2, l))?)?;
    let n = l * (n1 * n2 + m1 * m2);
    CssCode::new(format!("lp-{n}"), h_x.expand()?, h_z.expand()?)
}

/// Sparse bipartite adjacency of one check matrix. Edges are numbered in
/// check-major order, so the edges of check `c` are
/// `check_edges(c) = check_start[c]..check_start[c + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    num_vars: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    edge_check: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
}

impl TannerGraph {
    pub fn from_matrix(h: &BitMatrix) -> Self {
        let mut check_start = Vec::with_capacity(h.rows() + 1);
        let mut edge_var = Vec::new();
        let mut edge_check = Vec::new();
        check_start.push(0);
        for c in 0..h.rows() {
            for v in h.row_support(c) {
                edge_var.push(v);
                edge_check.push(c);
            }
            check_start.push(edge_var.len());
        }
        let mut degree = vec![0usize; h.cols()];
        for &v in &edge_var {
            degree[v] += 1;
        }
        let mut var_start = Vec::with_capacity(h.cols() + 1);
        var_start.push(0);
        for d in &degree {
            var_start.push(var_start.last().unwrap() + d);
        }
        let mut fill = var_start.clone();
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        Self {
            num_vars: h.cols(),
            check_start,
            edge_var,
            edge_check,
            var_start,
            var_edges,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    #[inline]
    pub fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    #[inline]
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[self.var_start[v]..self.var_start[v + 1]]
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    #[inline]
    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e]
    }

    /// N(c), ascending.
    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.edge_var[self.check_edges(c)]
    }

    /// N(v), ascending.
    pub fn var_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.var_edges(v).iter().map(move |&e| self.edge_check[e])
    }
}

/// Constraints on [`random_regular_seed`] output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedOptions {
    pub full_rank: bool,
    pub avoid_four_cycles: bool,
}

/// Random `(var_degree, check_degree)`-regular check matrix with `checks` rows
/// and `vars` columns and no repeated edges.
pub fn random_regular_seed<R: Rng>(
    vars: usize,
    checks: usize,
    var_degree: usize,
    check_degree: usize,
    options: SeedOptions,
    rng: &mut R,
) -> Result<BitMatrix, CodeError> {
    const MAX_ATTEMPTS: usize = 200_000;
    assert_eq!(vars * var_degree, checks * check_degree, "degree sequences do not balance");
    // Variables are attached one at a time to checks with spare sockets,
    // drawn with weight equal to the spare count, skipping any check that
    // already shares a variable with a check picked for this variable when
    // 4-cycles are excluded. Dead ends restart from scratch.
    let mut spare = vec![0usize; checks];
    let mut shares = vec![false; checks * checks];
    let mut picked: Vec<usize> = Vec::with_capacity(var_degree);
    'attempt: for _ in 0..MAX_ATTEMPTS {
        spare.iter_mut().for_each(|s| *s = check_degree);
        shares.iter_mut().for_each(|s| *s = false);
        let mut h = BitMatrix::zeros(checks, vars);
        for v in 0..vars {
            picked.clear();
            for _ in 0..var_degree {
                let weight = |c: usize| {
                    if picked.contains(&c) || (options.avoid_four_cycles && picked.iter().any(|&p| shares[p * checks + c])) {
                        0
                    } else {
                        spare[c]
                    }
                };
                let total: usize = (0..checks).map(weight).sum();
                if total == 0 {
                    continue 'attempt;
                }
                let mut draw = rng.gen_range(0..total);
                let mut chosen = 0;
                for c in 0..checks {
                    let w = weight(c);
                    if draw < w {
                        chosen = c;
                        break;
                    }
                    draw -= w;
                }
                picked.push(chosen);
            }
            for (i, &a) in picked.iter().enumerate() {
                spare[a] -= 1;
                h.set(a, v, true);
                for &b in &picked[i + 1..] {
                    shares[a * checks + b] = true;
                    shares[b * checks + a] = true;
                }
            }
        }
        debug_assert!(!options.avoid_four_cycles || !has_four_cycle(&h));
        if options.full_rank && h.rank() != checks {
            continue;
        }
        return Ok(h);
    }
    Err(CodeError::GenerationFailed(MAX_ATTEMPTS))
}

fn has_four_cycle(h: &BitMatrix) -> bool {
    for a in 0..h.rows() {
        for b in a + 1..h.rows() {
            let shared: u32 = h
                .row_words(a)
                .iter()
                .zip(h.row_words(b))
                .map(|(x, y)| (x & y).count_ones())
                .sum();
            if shared > 1 {
                return true;
            }
        }
    }
    false
}
