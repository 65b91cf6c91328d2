//! Haar-random states and the exact structure of k independent copies of an
//! unknown random state: the k-copy density matrix is block diagonal over
//! multisets (type classes) of basis sequences, each block a rank-one
//! projector onto the uniform superposition of the permutations of one
//! representative sequence, and every block carries the same trace
//! 1/C(d+k−1, k).
//!
//! The sampler has two tiers. Label-only sampling draws a multiset uniformly
//! by unranking a big-integer rank and works for any `d` (polylog(d)
//! arithmetic per draw); vector mode additionally materializes the block
//! superposition and is capped at `DEFAULT_VECTOR_CAP` amplitudes.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{normalize_in_place, DensityMatrix, StateVector};
use crate::rng::{stream_rng, StreamDomain};

/// Largest explicit vector dimension (d^k) the vector-mode operations accept.
pub const DEFAULT_VECTOR_CAP: usize = 4096;

/// Dense `m` serialization is used up to this dimension; above it labels
/// serialize as sparse `(coordinate, multiplicity)` pairs.
const DENSE_SERDE_LIMIT: usize = 64;

// ---------------------------------------------------------------------------
// Haar sampling
// ---------------------------------------------------------------------------

/// One Haar-random unit vector in C^d: 2d independent standard Gaussians,
/// paired into complex entries in coordinate order, then normalized.
pub fn sample_haar_with_rng(d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
    if d == 0 {
        return Err(Error::InvalidState(
            "Haar sampling needs dimension ≥ 1".into(),
        ));
    }
    let mut v = Vec::with_capacity(d);
    for _ in 0..d {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        v.push(Complex64::new(re, im));
    }
    normalize_in_place(&mut v)?;
    Ok(v)
}

/// Haar draw number `index` of the stream addressed by `seed`.
pub fn sample_haar_indexed(d: usize, seed: u64, index: u64) -> Result<Vec<Complex64>> {
    let mut rng = stream_rng(seed, StreamDomain::HaarState, index);
    sample_haar_with_rng(d, &mut rng)
}

/// Haar-random unit vector in C^d, deterministic given the seed.
pub fn sample_haar(d: usize, seed: u64) -> Result<Vec<Complex64>> {
    sample_haar_indexed(d, seed, 0)
}

/// Haar-random pure state on a qubit register.
pub fn sample_haar_state(num_qubits: usize, seed: u64, index: u64) -> StateVector {
    let amps = sample_haar_indexed(1 << num_qubits, seed, index).expect("dim ≥ 1");
    StateVector::new(amps).expect("normalized by construction")
}

/// Haar-random d×d unitary (row-major): QR of a complex Gaussian matrix with
/// the R diagonal phases folded into Q.
pub fn sample_haar_unitary(d: usize, seed: u64) -> Result<Vec<Complex64>> {
    if d == 0 {
        return Err(Error::InvalidState(
            "Haar unitary needs dimension ≥ 1".into(),
        ));
    }
    let mut rng = stream_rng(seed, StreamDomain::HaarUnitary, 0);
    let gaussian = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        Complex64::new(re, im)
    });
    let qr = gaussian.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            let phase = r[(j, j)] / r[(j, j)].norm();
            u[i * d + j] = q[(i, j)] * phase;
        }
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Multiset labels
// ---------------------------------------------------------------------------

/// The type class of a length-k sequence over {1, …, d}: its coordinate
/// multiplicities. Stored sparsely so labels stay cheap when d is huge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LabelWire", into = "LabelWire")]
pub struct MultisetLabel {
    d: usize,
    k: usize,
    /// (coordinate in 1..=d, multiplicity ≥ 1), ascending by coordinate.
    counts: Vec<(usize, usize)>,
}

impl MultisetLabel {
    /// Builds a label from dense multiplicities m_1..m_d.
    pub fn from_multiplicities(d: usize, multiplicities: &[usize]) -> Result<Self> {
        if multiplicities.len() != d {
            return Err(Error::InvalidLabel(format!(
                "expected {d} multiplicities, got {}",
                multiplicities.len()
            )));
        }
        let counts: Vec<(usize, usize)> = multiplicities
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(j, &m)| (j + 1, m))
            .collect();
        Self::from_pairs(d, counts)
    }

    /// Builds a label from sparse (coordinate, multiplicity) pairs.
    pub fn from_pairs(d: usize, mut counts: Vec<(usize, usize)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidLabel(
                "ambient dimension must be positive".into(),
            ));
        }
        counts.sort_unstable();
        let mut last = 0usize;
        let mut k = 0usize;
        for &(coord, mult) in &counts {
            if coord == 0 || coord > d {
                return Err(Error::InvalidLabel(format!(
                    "coordinate {coord} outside 1..={d}"
                )));
            }
            if coord == last {
                return Err(Error::InvalidLabel(format!("repeated coordinate {coord}")));
            }
            if mult == 0 {
                return Err(Error::InvalidLabel(format!("zero multiplicity at {coord}")));
            }
            last = coord;
            k += mult;
        }
        if k == 0 {
            return Err(Error::InvalidLabel("k must be positive".into()));
        }
        Ok(MultisetLabel { d, k, counts })
    }

    /// Builds a label from any length-k sequence of coordinates in 1..=d.
    pub fn from_sequence(d: usize, sequence: &[usize]) -> Result<Self> {
        let mut sorted = sequence.to_vec();
        sorted.sort_unstable();
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for &v in &sorted {
            match counts.last_mut() {
                Some((coord, mult)) if *coord == v => *mult += 1,
                _ => counts.push((v, 1)),
            }
        }
        Self::from_pairs(d, counts)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sparse (coordinate, multiplicity) view, ascending by coordinate.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.counts
    }

    /// Dense multiplicities m_1..m_d. Allocates d entries.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0usize; self.d];
        for &(coord, mult) in &self.counts {
            m[coord - 1] = mult;
        }
        m
    }

    /// The sorted representative sequence s (length k, nondecreasing).
    pub fn representative_sequence(&self) -> Vec<usize> {
        let mut seq = Vec::with_capacity(self.k);
        for &(coord, mult) in &self.counts {
            seq.extend(std::iter::repeat_n(coord, mult));
        }
        seq
    }

    /// N_s = k! / ∏_j m_j!: the number of distinct permutations of the
    /// representative sequence.
    pub fn distinct_permutations(&self) -> BigUint {
        let mut n = factorial(self.k);
        for &(_, mult) in &self.counts {
            n /= factorial(mult);
        }
        n
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LabelBody {
    Dense { m: Vec<usize> },
    Sparse { pairs: Vec<(usize, usize)> },
}

#[derive(Serialize, Deserialize)]
struct LabelWire {
    d: usize,
    k: usize,
    #[serde(flatten)]
    body: LabelBody,
}

impl TryFrom<LabelWire> for MultisetLabel {
    type Error = Error;

    fn try_from(w: LabelWire) -> Result<Self> {
        let label = match w.body {
            LabelBody::Dense { m } => MultisetLabel::from_multiplicities(w.d, &m)?,
            LabelBody::Sparse { pairs } => MultisetLabel::from_pairs(w.d, pairs)?,
        };
        if label.k != w.k {
            return Err(Error::InvalidLabel(format!(
                "declared k={} but multiplicities sum to {}",
                w.k, label.k
            )));
        }
        Ok(label)
    }
}

impl From<MultisetLabel> for LabelWire {
    fn from(label: MultisetLabel) -> Self {
        let body = if label.d <= DENSE_SERDE_LIMIT {
            LabelBody::Dense {
                m: label.multiplicities(),
            }
        } else {
            LabelBody::Sparse {
                pairs: label.counts.clone(),
            }
        };
        LabelWire {
            d: label.d,
            k: label.k,
            body,
        }
    }
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

fn factorial(n: usize) -> BigUint {
    let mut out = BigUint::one();
    for i in 2..=n {
        out *= BigUint::from(i);
    }
    out
}

fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut out = BigUint::one();
    for i in 1..=r {
        out *= BigUint::from(n - r + i);
        out /= BigUint::from(i);
    }
    out
}

/// Number of multisets of size k over d coordinates: C(d+k−1, k).
pub fn multiset_count(d: usize, k: usize) -> BigUint {
    binomial(d + k - 1, k)
}

/// All labels at (d, k) in lexicographic order of their sorted
/// representative sequences (the unranking order).
pub fn enumerate_labels(d: usize, k: usize) -> Vec<MultisetLabel> {
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(k);
    fn rec(d: usize, k: usize, lo: usize, seq: &mut Vec<usize>, out: &mut Vec<MultisetLabel>) {
        if seq.len() == k {
            out.push(MultisetLabel::from_sequence(d, seq).expect("valid by construction"));
            return;
        }
        for v in lo..=d {
            seq.push(v);
            rec(d, k, v, seq, out);
            seq.pop();
        }
    }
    rec(d, k, 1, &mut seq, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Sphere moments and block traces
// ---------------------------------------------------------------------------

/// E[∏_j |ψ_j|^{2 m_j}] for Haar ψ on C^d as an exact rational:
/// (∏_j m_j!) / ∏_{i=0}^{k−1} (d+i), i.e. (∏ m_j!)(d−1)!/(k+d−1)! without
/// ever forming the large factorials.
pub fn moment_even_powers_exact(label: &MultisetLabel) -> BigRational {
    let mut num = BigUint::one();
    for &(_, mult) in label.pairs() {
        num *= factorial(mult);
    }
    let mut den = BigUint::one();
    for i in 0..label.k() {
        den *= BigUint::from(label.d() + i);
    }
    BigRational::new(num.into(), den.into())
}

/// Float view of `moment_even_powers_exact`. The closed form is validated
/// against a Monte Carlo sphere integral in this crate's tests.
pub fn moment_even_powers(label: &MultisetLabel) -> f64 {
    moment_even_powers_exact(label)
        .to_f64()
        .expect("moment fits in f64")
}

/// Trace of the block labeled by `label`, i.e. the probability of drawing
/// its multiset: N_s · E[∏ |ψ_j|^{2 m_j}].
pub fn block_probability_exact(label: &MultisetLabel) -> BigRational {
    let perms = BigRational::from_integer(label.distinct_permutations().into());
    perms * moment_even_powers_exact(label)
}

pub fn block_probability(label: &MultisetLabel) -> f64 {
    block_probability_exact(label)
        .to_f64()
        .expect("probability fits in f64")
}

// ---------------------------------------------------------------------------
// Block states
// ---------------------------------------------------------------------------

/// The uniform positive superposition over all distinct permutations of a
/// label's representative sequence, in the d^k-dimensional sequence basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    label: MultisetLabel,
    amplitudes: Vec<Complex64>,
}

impl BlockState {
    pub fn label(&self) -> &MultisetLabel {
        &self.label
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// Linear index of a sequence (s_1..s_k, values 1..=d); the first position
/// is the most significant base-d digit.
fn sequence_index(d: usize, seq: &[usize]) -> usize {
    seq.iter().fold(0, |acc, &s| acc * d + (s - 1))
}

/// Lexicographic next permutation; `false` once the sequence is the last
/// (descending) arrangement. Duplicates are handled, so starting from the
/// sorted sequence visits each distinct permutation exactly once.
fn next_permutation(seq: &mut [usize]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

fn checked_power_dim(d: usize, k: usize, cap: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..k {
        dim = dim.saturating_mul(d);
        if dim > cap {
            return Err(Error::VectorCapExceeded { dim, cap });
        }
    }
    Ok(dim)
}

/// Materializes the block superposition for `label`; amplitude 1/√N_s on
/// each distinct permutation of the representative sequence.
pub fn block_state(label: &MultisetLabel) -> Result<BlockState> {
    block_state_with_cap(label, DEFAULT_VECTOR_CAP)
}

pub fn block_state_with_cap(label: &MultisetLabel, cap: usize) -> Result<BlockState> {
    let d = label.d();
    let dim = checked_power_dim(d, label.k(), cap)?;
    let perms = label
        .distinct_permutations()
        .to_usize()
        .ok_or_else(|| Error::InvalidLabel("permutation count overflows usize".into()))?;
    let amp = Complex64::new(1.0 / (perms as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::ZERO; dim];
    let mut seq = label.representative_sequence();
    let mut visited = 0usize;
    loop {
        amplitudes[sequence_index(d, &seq)] = amp;
        visited += 1;
        if !next_permutation(&mut seq) {
            break;
        }
    }
    debug_assert_eq!(visited, perms);
    Ok(BlockState {
        label: label.clone(),
        amplitudes,
    })
}

// ---------------------------------------------------------------------------
// Exact k-copy density matrix, two independent constructions
// ---------------------------------------------------------------------------

/// The exact density matrix of k copies of a Haar-random d-dimensional
/// state, assembled block by block: Σ over labels of
/// blockProbability·|b⟩⟨b|.
pub fn k_copy_density_exact(d: usize, k: usize) -> Result<DensityMatrix> {
    k_copy_density_exact_with_cap(d, k, DEFAULT_VECTOR_CAP)
}

pub fn k_copy_density_exact_with_cap(d: usize, k: usize, cap: usize) -> Result<DensityMatrix> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidLabel("d and k must be positive".into()));
    }
    let dim = checked_power_dim(d, k, cap)?;
    let mut entries = vec![Complex64::ZERO; dim * dim];
    for label in enumerate_labels(d, k) {
        let p = block_probability(&label);
        let block = block_state_with_cap(&label, cap)?;
        let support: Vec<(usize, Complex64)> = block
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        for &(i, ai) in &support {
            for &(j, aj) in &support {
                entries[i * dim + j] += p * ai * aj.conj();
            }
        }
    }
    DensityMatrix::new(dim, entries)
}

/// The same matrix built the other way: the symmetric-subspace projector
/// (average of all copy-permutation operators) divided by its dimension
/// C(d+k−1, k). Kept independent of the block construction so the two can
/// cross-check each other.
pub fn symmetric_projector_density(d: usize, k: usize) -> Result<DensityMatrix> {
    symmetric_projector_density_with_cap(d, k, DEFAULT_VECTOR_CAP)
}

pub fn symmetric_projector_density_with_cap(
    d: usize,
    k: usize,
    cap: usize,
) -> Result<DensityMatrix> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidLabel("d and k must be positive".into()));
    }
    let dim = checked_power_dim(d, k, cap)?;
    let sym_dim = multiset_count(d, k)
        .to_f64()
        .expect("symmetric dimension fits in f64");
    let perms = position_permutations(k);
    let weight = 1.0 / (perms.len() as f64 * sym_dim);
    let mut entries = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        let digits = index_to_sequence(d, k, i);
        for perm in &perms {
            let permuted: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
            let j = sequence_index(d, &permuted);
            entries[j * dim + i] += Complex64::new(weight, 0.0);
        }
    }
    DensityMatrix::new(dim, entries)
}

/// Sequence (values 1..=d) for a linear index, most significant digit first.
pub fn index_to_sequence(d: usize, k: usize, index: usize) -> Vec<usize> {
    let mut digits = vec![0usize; k];
    let mut rest = index;
    for slot in digits.iter_mut().rev() {
        *slot = rest % d + 1;
        rest /= d;
    }
    digits
}

/// All k! permutations of 0..k as index maps.
pub fn position_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut base: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        out.push(base.clone());
        if !next_permutation(&mut base) {
            break;
        }
    }
    out
}

/// The copy-permutation operator on (C^d)^{⊗k} for one position map,
/// row-major: maps |s_1..s_k⟩ to the permuted sequence state.
pub fn permutation_operator(d: usize, perm: &[usize]) -> Vec<Complex64> {
    let k = perm.len();
    let dim = d.pow(k as u32);
    let mut entries = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        let digits = index_to_sequence(d, k, i);
        let permuted: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
        let j = sequence_index(d, &permuted);
        entries[j * dim + i] = Complex64::ONE;
    }
    entries
}

// ---------------------------------------------------------------------------
// The effective sampler
// ---------------------------------------------------------------------------

/// Draws `bound`-bounded uniform big integers by rejection on the top bit
/// block: fills ⌈bits/32⌉ little-endian 32-bit digits from the stream, masks
/// the top digit to the bound's bit length, and retries until below bound.
fn uniform_biguint_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "bound must be positive");
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let top_mask: u32 = if top_bits == 32 {
        u32::MAX
    } else {
        (1u32 << top_bits) - 1
    };
    loop {
        let mut digits = vec![0u32; words];
        for d in digits.iter_mut() {
            *d = rng.random();
        }
        *digits.last_mut().expect("at least one word") &= top_mask;
        let candidate = BigUint::from_slice(&digits);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// The label with the given lexicographic rank among all C(d+k−1, k)
/// multisets: position by position, binary-search the smallest coordinate
/// whose stars-and-bars prefix count exceeds the remaining rank.
pub fn unrank_multiset(d: usize, k: usize, rank: &BigUint) -> Result<MultisetLabel> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidLabel("d and k must be positive".into()));
    }
    let total = multiset_count(d, k);
    if rank >= &total {
        return Err(Error::InvalidLabel(format!(
            "rank {rank} out of range {total}"
        )));
    }
    let mut remaining = rank.clone();
    let mut sequence = Vec::with_capacity(k);
    let mut lo = 1usize;
    for pos in 0..k {
        let rem = k - pos - 1;
        // Sequences with this position's value in [lo, v]:
        //   C(d−lo+rem+1, rem+1) − C(d−v+rem, rem+1).
        let all = binomial(d - lo + rem + 1, rem + 1);
        let cum = |v: usize| -> BigUint { &all - binomial(d - v + rem, rem + 1) };
        let mut lo_v = lo;
        let mut hi_v = d;
        while lo_v < hi_v {
            let mid = lo_v + (hi_v - lo_v) / 2;
            if cum(mid) > remaining {
                hi_v = mid;
            } else {
                lo_v = mid + 1;
            }
        }
        let v = lo_v;
        if v > lo {
            remaining -= cum(v - 1);
        }
        sequence.push(v);
        lo = v;
    }
    debug_assert!(remaining.is_zero() || !sequence.is_empty());
    MultisetLabel::from_sequence(d, &sequence)
}

/// Uniform multiset draw number `index` of the stream addressed by `seed`.
pub fn sample_multiset_uniform_indexed(
    d: usize,
    k: usize,
    seed: u64,
    index: u64,
) -> Result<MultisetLabel> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidLabel("d and k must be positive".into()));
    }
    let mut rng = stream_rng(seed, StreamDomain::MultisetRank, index);
    let rank = uniform_biguint_below(&mut rng, &multiset_count(d, k));
    unrank_multiset(d, k, &rank)
}

/// A multiset label drawn uniformly among all C(d+k−1, k) possibilities.
/// Only the label is materialized, so d may be far beyond the vector cap.
pub fn sample_multiset_uniform(d: usize, k: usize, seed: u64) -> Result<MultisetLabel> {
    sample_multiset_uniform_indexed(d, k, seed, 0)
}

/// One draw of the k-copy source: a uniform label, materialized as its
/// block superposition. The expectation over seeds is exactly
/// `k_copy_density_exact(d, k)`.
pub fn sample_k_copy_source(d: usize, k: usize, seed: u64) -> Result<BlockState> {
    sample_k_copy_source_indexed(d, k, seed, 0)
}

pub fn sample_k_copy_source_indexed(
    d: usize,
    k: usize,
    seed: u64,
    index: u64,
) -> Result<BlockState> {
    let label = sample_multiset_uniform_indexed(d, k, seed, index)?;
    block_state(&label)
}
