#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use qerasure::{hgp, BitMatrix, BitVector, CodeSide, CssCode, ErasureInstance, Side};
use rand::Rng;

/// Random matrix with each entry set with probability `density`.
pub fn random_sparse<R: Rng>(rows: usize, cols: usize, density: f64, rng: &mut R) -> BitMatrix {
    let supports: Vec<Vec<usize>> = (0..rows)
        .map(|_| (0..cols).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    BitMatrix::from_row_supports(cols, &supports).unwrap()
}

/// Small fixed HGP code, n = 100.
pub fn toy_code() -> Arc<CssCode> {
    let h = BitMatrix::from_row_supports(
        8,
        &[vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![0, 2, 4, 6], vec![1, 3, 5, 7], vec![0, 3, 5, 6], vec![1, 2, 4, 7]],
    )
    .unwrap();
    Arc::new(hgp(&h, &h).unwrap())
}

pub fn toy_hgp() -> CodeSide {
    CodeSide::new(toy_code(), Side::X)
}

/// Random CSS code on `n` qubits: random sparse `H_X`, and `H_Z` rows drawn
/// from the orthogonal complement of the rows of `H_X`.
pub fn random_css<R: Rng>(n: usize, rng: &mut R) -> CssCode {
    loop {
        let mx = rng.gen_range(1..=n / 3);
        let h_x = random_sparse(mx, n, 0.3, rng);
        let complement = h_x.nullspace_basis();
        if complement.rows() == 0 {
            continue;
        }
        let mz = rng.gen_range(1..=complement.rows().min(n / 3).max(1));
        let rows: Vec<BitVector> = (0..mz)
            .map(|_| {
                let mut v = BitVector::zeros(n);
                for r in 0..complement.rows() {
                    if rng.gen_bool(0.5) {
                        v.xor_assign(&complement.row(r));
                    }
                }
                v
            })
            .collect();
        let h_z = BitMatrix::from_row_vectors(n, &rows);
        if let Ok(code) = CssCode::new("random", h_x, h_z) {
            if code.k() > 0 {
                return code;
            }
        }
    }
}

/// Every element of the stabilizer group, by closure over the generators.
pub fn stabilizer_group(cs: &CodeSide) -> HashSet<BitVector> {
    let stab = cs.stabilizer_matrix();
    let mut group: HashSet<BitVector> = HashSet::from([BitVector::zeros(cs.n())]);
    for r in 0..stab.rows() {
        let row = stab.row(r);
        let shifted: Vec<BitVector> = group.iter().map(|g| g.xor(&row)).collect();
        group.extend(shifted);
    }
    group
}

/// Exhaustive ML over the erasure: the syndrome-consistent patterns grouped
/// into stabilizer cosets, with coset posteriors under the uniform erasure
/// prior. Returns the posteriors and the index of the true error's coset.
pub struct Enumeration {
    pub representatives: Vec<BitVector>,
    pub posteriors: Vec<f64>,
    pub true_coset: usize,
    /// Number of syndrome-consistent patterns.
    pub patterns: u64,
}

pub fn enumerate_cosets(cs: &CodeSide, inst: &ErasureInstance, group: &HashSet<BitVector>) -> Enumeration {
    let erased: Vec<usize> = inst.mask.ones().collect();
    let n = cs.n();
    let mut reps: Vec<BitVector> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for m in 0u64..1 << erased.len() {
        let support: Vec<usize> = erased.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &v)| v).collect();
        let x = BitVector::from_indices(n, &support).unwrap();
        if cs.syndrome_of(&x).unwrap() != inst.syndrome {
            continue;
        }
        match reps.iter().position(|r| group.contains(&r.xor(&x))) {
            Some(i) => counts[i] += 1,
            None => {
                reps.push(x);
                counts.push(1);
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let true_coset = reps
        .iter()
        .position(|r| group.contains(&r.xor(&inst.error)))
        .expect("true error is consistent");
    Enumeration {
        posteriors: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        representatives: reps,
        true_coset,
        patterns: total,
    }
}

/// Coset index of `x` in an enumeration, if any.
pub fn coset_of(e: &Enumeration, x: &BitVector, group: &HashSet<BitVector>) -> Option<usize> {
    e.representatives.iter().position(|r| group.contains(&r.xor(x)))
}

/// Random cycle-free Tanner graph with `vars` variables, returned as a check
/// matrix. Every check has at least two neighbours, so no marginal is
/// deterministic.
pub fn random_tree<R: Rng>(vars: usize, rng: &mut R) -> BitMatrix {
    let mut checks: Vec<Vec<usize>> = Vec::new();
    let mut placed = 1;
    while placed < vars {
        if checks.is_empty() || rng.gen_bool(0.4) {
            let v = rng.gen_range(0..placed);
            checks.push(vec![v, placed]);
            placed += 1;
        } else {
            let c = rng.gen_range(0..checks.len());
            checks[c].push(placed);
            placed += 1;
        }
    }
    BitMatrix::from_row_supports(vars, &checks).unwrap()
}

/// Exact posterior LLR of every bit given independent priors `mu` (LLR of
/// the bit being 0) and the constraint `H x = s`.
pub fn brute_force_marginals(h: &BitMatrix, mu: &[f64], syndrome: &BitVector) -> Vec<f64> {
    let n = h.cols();
    let mut zero = vec![0.0f64; n];
    let mut one = vec![0.0f64; n];
    for m in 0u64..1 << n {
        let support: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
        let x = BitVector::from_indices(n, &support).unwrap();
        if h.mat_vec(&x).unwrap() != *syndrome {
            continue;
        }
        let log_w: f64 = (0..n).map(|i| if x.get(i) { -mu[i] / 2.0 } else { mu[i] / 2.0 }).sum();
        let w = log_w.exp();
        for i in 0..n {
            if x.get(i) {
                one[i] += w;
            } else {
                zero[i] += w;
            }
        }
    }
    zero.iter().zip(&one).map(|(z, o)| (z / o).ln()).collect()
}
