//! State vectors, density matrices, and the two distances used throughout.
//!
//! Conventions: classical basis labels are bit strings read with qubit 0 as
//! the most significant bit, so amplitude index `i` of an `n`-qubit state is
//! the basis state whose qubit-`q` value is bit `n－1－q` of `i`. The default
//! distance everywhere is the phase-minimized Euclidean norm, which makes √2
//! the exact distance between orthogonal states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entrywise tolerance for norm, Hermiticity, trace, and eigenvalue checks.
pub const INVARIANT_TOL: f64 = 1e-9;

/// Maximum phase-minimized distance between unit vectors.
pub const MAX_PHASE_DISTANCE: f64 = std::f64::consts::SQRT_2;

// ---------------------------------------------------------------------------
// Raw-slice kernels, shared with modules that work in free (non-2^n)
// dimension such as `random_source` and `state_net`.
// ---------------------------------------------------------------------------

/// ⟨u|v⟩ with conjugation on `u`. Lengths must already agree.
pub fn slice_inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm of an amplitude slice.
pub fn slice_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// min over φ of ‖u − e^{iφ} v‖ = √(2 − 2|⟨u|v⟩|) for unit vectors.
pub fn slice_phase_min_distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    let overlap = slice_inner(u, v).norm();
    (2.0 - 2.0 * overlap).max(0.0).sqrt()
}

/// Scale a slice to unit norm in place. Errors on (numerically) zero input.
pub fn normalize_in_place(v: &mut [Complex64]) -> Result<()> {
    let norm = slice_norm(v);
    if norm < 1e-300 {
        return Err(Error::InvalidState("cannot normalize zero vector".into()));
    }
    let inv = 1.0 / norm;
    for a in v.iter_mut() {
        *a *= inv;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

/// A pure state on `n` qubits: 2^n complex amplitudes with unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateVectorWire", into = "StateVectorWire")]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes after checking the two type invariants: the length is
    /// a power of two and the norm is 1 within `INVARIANT_TOL`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() || !amplitudes.len().is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "amplitude count {} is not a power of two",
                amplitudes.len()
            )));
        }
        let norm = slice_norm(&amplitudes);
        if (norm - 1.0).abs() > INVARIANT_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Internal constructor for amplitudes already known to satisfy the
    /// invariants (gate application, measurement renormalization).
    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        debug_assert!(amplitudes.len().is_power_of_two());
        debug_assert!((slice_norm(&amplitudes) - 1.0).abs() < 1e-6);
        Self { amplitudes }
    }

    /// |0…0⟩ on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0).expect("index 0 always in range")
    }

    /// The classical basis state with the given amplitude index.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::QubitOutOfRange { index, limit: dim });
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        Ok(Self { amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        slice_norm(&self.amplitudes)
    }

    /// ⟨self|other⟩, conjugating the amplitudes of `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(slice_inner(&self.amplitudes, &other.amplitudes))
    }

    /// min over φ of ‖self − e^{iφ}·other‖; 0 for phase-equivalent states,
    /// √2 for orthogonal ones.
    pub fn phase_min_distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(slice_phase_min_distance(
            &self.amplitudes,
            &other.amplitudes,
        ))
    }

    /// Plain Euclidean distance ‖self − other‖, global phase included.
    ///
    /// The rest of the crate quotients phase out via `phase_min_distance`;
    /// this is the raw alternative for callers that treat phase as physical.
    pub fn euclidean_distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        let sum: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(sum.sqrt())
    }

    /// Total variation distance between the classical measurement
    /// distributions of the two states.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        let sum: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
            .sum();
        Ok(0.5 * sum)
    }

    /// Kronecker product; `self` supplies the high-order qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    /// The rank-one projector |ψ⟩⟨ψ|.
    pub fn projector(&self) -> DensityMatrix {
        let d = self.dim();
        let mut entries = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix { dim: d, entries }
    }

    /// Probability of observing classical outcome `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct StateVectorWire {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<StateVectorWire> for StateVector {
    type Error = Error;

    fn try_from(w: StateVectorWire) -> Result<Self> {
        let dim = 1usize << w.n;
        if w.re.len() != dim || w.im.len() != dim {
            return Err(Error::InvalidState(format!(
                "expected {dim} amplitudes for n={}, got re={}, im={}",
                w.n,
                w.re.len(),
                w.im.len()
            )));
        }
        let amplitudes =
            w.re.iter()
                .zip(&w.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect();
        StateVector::new(amplitudes)
    }
}

impl From<StateVector> for StateVectorWire {
    fn from(s: StateVector) -> Self {
        let n = s.num_qubits();
        let (re, im) = s.amplitudes.iter().map(|a| (a.re, a.im)).unzip();
        StateVectorWire { n, re, im }
    }
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

/// A mixed state: Hermitian, positive semidefinite, trace-1 matrix.
///
/// The dimension is free (not restricted to powers of two) so the k-copy
/// construction can live in d^k dimensions; only `partial_trace` requires a
/// qubit register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixWire", into = "DensityMatrixWire")]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>, // row-major dim×dim
}

impl DensityMatrix {
    /// Validates all three invariants: Hermiticity and unit trace entrywise
    /// within `INVARIANT_TOL`, and eigenvalues ≥ −`INVARIANT_TOL` via a
    /// Hermitian eigensolve.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDensity("dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidDensity(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                if (a - b.conj()).norm() > INVARIANT_TOL {
                    return Err(Error::InvalidDensity(format!(
                        "not Hermitian at ({i},{j}): {a} vs conj {b}"
                    )));
                }
            }
        }
        let trace: Complex64 = (0..dim).map(|i| entries[i * dim + i]).sum();
        if (trace - Complex64::ONE).norm() > INVARIANT_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace {trace} differs from 1"
            )));
        }
        let matrix = Self { dim, entries };
        let min = matrix
            .eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -INVARIANT_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min}")));
        }
        Ok(matrix)
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mut entries = vec![Complex64::ZERO; dim * dim];
        let p = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            entries[i * dim + i] = p;
        }
        Self { dim, entries }
    }

    /// Uniform mixture (1/N)·Σ |ψ_i⟩⟨ψ_i| of an ensemble of pure states.
    pub fn from_samples(samples: &[StateVector]) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyEnsemble)?;
        let dim = first.dim();
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for sample in samples {
            if sample.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: sample.dim(),
                });
            }
            let amps = sample.amplitudes();
            for i in 0..dim {
                let ai = amps[i];
                for j in 0..dim {
                    entries[i * dim + j] += ai * amps[j].conj();
                }
            }
        }
        let weight = 1.0 / samples.len() as f64;
        for e in entries.iter_mut() {
            *e *= weight;
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Eigenvalues of the matrix, treated as Hermitian (real spectrum).
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dim, &self.entries)
    }

    /// Largest entrywise absolute difference against another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Number of qubits, when the dimension is a power of two.
    pub fn num_qubits(&self) -> Result<usize> {
        if !self.dim.is_power_of_two() {
            return Err(Error::InvalidDensity(format!(
                "dimension {} is not a qubit register",
                self.dim
            )));
        }
        Ok(self.dim.trailing_zeros() as usize)
    }

    /// Reduced density matrix on `keep` (ascending qubit order in the
    /// result). Duplicates in `keep` are ignored; trace is preserved.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.num_qubits()?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
            return Err(Error::QubitOutOfRange {
                index: bad,
                limit: n,
            });
        }
        if kept.is_empty() {
            return Err(Error::InvalidDensity("must keep at least one qubit".into()));
        }
        let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
        let kd = 1usize << kept.len();
        let td = 1usize << traced.len();

        // Qubit q occupies bit n-1-q of a full index.
        let compose = |kept_bits: usize, traced_bits: usize| -> usize {
            let mut index = 0usize;
            for (pos, &q) in kept.iter().enumerate() {
                let bit = (kept_bits >> (kept.len() - 1 - pos)) & 1;
                index |= bit << (n - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                let bit = (traced_bits >> (traced.len() - 1 - pos)) & 1;
                index |= bit << (n - 1 - q);
            }
            index
        };

        let mut entries = vec![Complex64::ZERO; kd * kd];
        for a in 0..kd {
            for b in 0..kd {
                let mut sum = Complex64::ZERO;
                for t in 0..td {
                    sum += self.get(compose(a, t), compose(b, t));
                }
                entries[a * kd + b] = sum;
            }
        }
        Self::new(kd, entries)
    }
}

/// Real spectrum of a Hermitian matrix given in row-major order.
pub fn hermitian_eigenvalues(dim: usize, entries: &[Complex64]) -> Vec<f64> {
    if dim == 1 {
        return vec![entries[0].re];
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| entries[i * dim + j]);
    m.symmetric_eigen().eigenvalues.iter().copied().collect()
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixWire {
    d: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<DensityMatrixWire> for DensityMatrix {
    type Error = Error;

    fn try_from(w: DensityMatrixWire) -> Result<Self> {
        let d = w.d;
        if w.re.len() != d || w.im.len() != d {
            return Err(Error::InvalidDensity("row count differs from d".into()));
        }
        let mut entries = Vec::with_capacity(d * d);
        for (re_row, im_row) in w.re.iter().zip(&w.im) {
            if re_row.len() != d || im_row.len() != d {
                return Err(Error::InvalidDensity("column count differs from d".into()));
            }
            for (&re, &im) in re_row.iter().zip(im_row) {
                entries.push(Complex64::new(re, im));
            }
        }
        DensityMatrix::new(d, entries)
    }
}

impl From<DensityMatrix> for DensityMatrixWire {
    fn from(m: DensityMatrix) -> Self {
        let d = m.dim;
        let mut re = Vec::with_capacity(d);
        let mut im = Vec::with_capacity(d);
        for i in 0..d {
            re.push((0..d).map(|j| m.get(i, j).re).collect());
            im.push((0..d).map(|j| m.get(i, j).im).collect());
        }
        DensityMatrixWire { d, re, im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> StateVector {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![c(a, 0.0), c(a, 0.0)]).unwrap()
    }

    fn bell() -> StateVector {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(a, 0.0)]).unwrap()
    }

    #[test]
    fn inner_product_basis_cases() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(zero.inner_product(&zero).unwrap(), Complex64::ONE);
        assert_eq!(zero.inner_product(&one).unwrap(), Complex64::ZERO);
        let ip = plus().inner_product(&zero).unwrap();
        assert!((ip - c(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inner_product_conjugates_first_argument() {
        let u = StateVector::new(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let v = StateVector::basis(1, 0).unwrap();
        assert!((u.inner_product(&v).unwrap() - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let u = StateVector::basis(1, 0).unwrap();
        let v = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            u.inner_product(&v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn phase_min_distance_quotients_global_phase() {
        let zero = StateVector::basis(1, 0).unwrap();
        for phi in [0.0, 0.7, 2.1, -1.3] {
            let rotated =
                StateVector::new(vec![Complex64::from_polar(1.0, phi), Complex64::ZERO]).unwrap();
            assert!(zero.phase_min_distance(&rotated).unwrap() < 1e-12);
        }
    }

    #[test]
    fn phase_min_distance_orthogonal_is_sqrt2() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let d = zero.phase_min_distance(&one).unwrap();
        assert!((d - MAX_PHASE_DISTANCE).abs() < 1e-12);
    }

    // Oracle: minimize ‖u − e^{iφ}v‖ over a fine φ grid with local
    // refinement, independently of the closed form.
    fn grid_min_distance(u: &StateVector, v: &StateVector) -> f64 {
        let dist_at = |phi: f64| -> f64 {
            u.amplitudes()
                .iter()
                .zip(v.amplitudes())
                .map(|(a, b)| (a - b * Complex64::from_polar(1.0, phi)).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let tau = std::f64::consts::TAU;
        let coarse = 4096;
        let mut best_phi = 0.0;
        let mut best = f64::INFINITY;
        for k in 0..coarse {
            let phi = k as f64 / coarse as f64 * tau;
            let d = dist_at(phi);
            if d < best {
                best = d;
                best_phi = phi;
            }
        }
        let window = tau / coarse as f64;
        for k in 0..coarse {
            let phi = best_phi - window + 2.0 * window * k as f64 / coarse as f64;
            best = best.min(dist_at(phi));
        }
        best
    }

    #[test]
    fn phase_min_distance_zero_vs_plus() {
        let zero = StateVector::basis(1, 0).unwrap();
        let d = zero.phase_min_distance(&plus()).unwrap();
        // Frozen from √(2 − √2), confirmed by the grid oracle below.
        assert!((d - 0.7653668647301795).abs() < 1e-12);
        assert!((d - grid_min_distance(&zero, &plus())).abs() < 1e-9);
    }

    #[test]
    fn grid_oracle_agrees_on_orthogonal_pair() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert!((grid_min_distance(&zero, &one) - MAX_PHASE_DISTANCE).abs() < 1e-9);
    }

    #[test]
    fn euclidean_distance_sees_global_phase() {
        let zero = StateVector::basis(1, 0).unwrap();
        let negated = StateVector::new(vec![c(-1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((zero.euclidean_distance(&negated).unwrap() - 2.0).abs() < 1e-12);
        assert!(zero.phase_min_distance(&negated).unwrap() < 1e-12);
    }

    #[test]
    fn tv_distance_cases() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(zero.tv_distance(&zero).unwrap(), 0.0);
        assert_eq!(zero.tv_distance(&one).unwrap(), 1.0);
        assert!((zero.tv_distance(&plus()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tensor_basis_and_superposition() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let zo = zero.tensor(&one);
        assert_eq!(zo, StateVector::basis(2, 1).unwrap());

        let po = plus().tensor(&zero);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!((po.amplitudes()[0] - c(a, 0.0)).norm() < 1e-12);
        assert!((po.amplitudes()[2] - c(a, 0.0)).norm() < 1e-12);
        assert!(po.amplitudes()[1].norm() < 1e-12);
        assert!(po.amplitudes()[3].norm() < 1e-12);
        assert!((po.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let rho = bell().projector();
        let reduced = rho.partial_trace(&[0]).unwrap();
        assert!(
            reduced
                .max_abs_diff(&DensityMatrix::maximally_mixed(2))
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = StateVector::basis(2, 1).unwrap().projector(); // |01⟩
        let reduced = rho.partial_trace(&[0]).unwrap();
        let expected = StateVector::basis(1, 0).unwrap().projector();
        assert!(reduced.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_keep_all_is_identity_map() {
        let rho = bell().projector();
        let kept = rho.partial_trace(&[0, 1]).unwrap();
        assert!(kept.max_abs_diff(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = bell().projector();
        assert!(matches!(
            rho.partial_trace(&[2]),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn from_samples_degenerate_and_two_point() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let rho = DensityMatrix::from_samples(&vec![zero.clone(); 17]).unwrap();
        assert!(rho.max_abs_diff(&zero.projector()).unwrap() < 1e-15);

        let mixed = DensityMatrix::from_samples(&[zero, one]).unwrap();
        assert!(
            mixed
                .max_abs_diff(&DensityMatrix::maximally_mixed(2))
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn from_samples_error_paths() {
        assert!(matches!(
            DensityMatrix::from_samples(&[]),
            Err(Error::EmptyEnsemble)
        ));
        let u = StateVector::basis(1, 0).unwrap();
        let v = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            DensityMatrix::from_samples(&[u, v]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_invariant_violations_rejected() {
        // Non-Hermitian.
        let err = DensityMatrix::new(2, vec![c(0.5, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(0.5, 0.0)]);
        assert!(matches!(err, Err(Error::InvalidDensity(_))));
        // Wrong trace.
        let err = DensityMatrix::new(2, vec![c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.9, 0.0)]);
        assert!(matches!(err, Err(Error::InvalidDensity(_))));
        // Indefinite.
        let err = DensityMatrix::new(2, vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(err, Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn state_json_shape() {
        let s = plus();
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["n"], 1);
        assert_eq!(json["re"].as_array().unwrap().len(), 2);
        assert_eq!(json["im"].as_array().unwrap().len(), 2);
        let back: StateVector = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn density_json_shape() {
        let rho = bell().projector();
        let json = serde_json::to_value(&rho).unwrap();
        assert_eq!(json["d"], 4);
        assert_eq!(json["re"].as_array().unwrap().len(), 4);
        let back: DensityMatrix = serde_json::from_value(json).unwrap();
        assert!(back.max_abs_diff(&rho).unwrap() < 1e-15);
    }

    #[test]
    fn state_deserialization_rejects_bad_norm() {
        let json = serde_json::json!({"n": 1, "re": [1.0, 1.0], "im": [0.0, 0.0]});
        assert!(serde_json::from_value::<StateVector>(json).is_err());
    }
}
