//! Finite candidate covers of the unit sphere of C^d and Monte Carlo
//! measurement of how much of the sphere they reach: the coverage fraction
//! at radius ε and a sampled lower bound on the covering radius.
//!
//! Nearest-point queries use the phase-minimized distance, so ε = √2 covers
//! everything by construction. Coverage trials are embarrassingly parallel;
//! per-trial generators are derived by counter, so the reduction is
//! deterministic for a given seed regardless of scheduling.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{slice_inner, slice_phase_min_distance, StateVector};
use crate::random_source::sample_haar_with_rng;
use crate::rng::{stream_rng, StreamDomain};

/// How a net was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NetMeta {
    /// Haar points from the given seed; point `i` is draw `i` of the stream,
    /// so growing `size` with the same seed extends the net.
    Random { seed: u64, size: usize },
    /// Caller-supplied points.
    Explicit,
}

/// A finite set of unit vectors in C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    d: usize,
    points: Vec<Vec<Complex64>>,
    meta: NetMeta,
}

impl Net {
    /// `size` independent Haar points; deterministic given the seed, and a
    /// prefix of any larger net built from the same seed.
    pub fn random(d: usize, size: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidState("net dimension must be positive".into()));
        }
        if size == 0 {
            return Err(Error::InvalidState("net needs at least one point".into()));
        }
        let points = (0..size)
            .map(|i| {
                let mut rng = stream_rng(seed, StreamDomain::NetPoint, i as u64);
                sample_haar_with_rng(d, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Net {
            d,
            points,
            meta: NetMeta::Random { seed, size },
        })
    }

    /// Wraps caller-supplied unit vectors (norm checked within 1e-9).
    pub fn from_points(d: usize, points: Vec<Vec<Complex64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidState("net needs at least one point".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: p.len(),
                });
            }
            let norm: f64 = p.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidState(format!("point {i} has norm {norm}")));
            }
        }
        Ok(Net {
            d,
            points,
            meta: NetMeta::Explicit,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn meta(&self) -> NetMeta {
        self.meta
    }

    /// Phase-minimized distance from `probe` to the nearest net point
    /// (exhaustive scan; desk-scale nets don't warrant an index).
    pub fn nearest_distance(&self, probe: &[Complex64]) -> f64 {
        self.points
            .iter()
            .map(|p| slice_phase_min_distance(p, probe))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether some net point lies within `eps`; scans with the equivalent
    /// overlap threshold |⟨p|probe⟩| ≥ 1 − ε²/2 and short-circuits.
    pub fn covers(&self, probe: &[Complex64], eps: f64) -> bool {
        let threshold = 1.0 - eps * eps / 2.0;
        self.points
            .iter()
            .any(|p| slice_inner(p, probe).norm() >= threshold)
    }

    /// Fraction of Haar-random test states within `eps` of the net.
    pub fn coverage_fraction(&self, eps: f64, trials: usize, seed: u64) -> Result<f64> {
        if eps < 0.0 {
            return Err(Error::InvalidConfig("eps must be nonnegative".into()));
        }
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        let hits: usize = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(seed, StreamDomain::CoverageTrial, t as u64);
                let probe = sample_haar_with_rng(self.d, &mut rng).expect("d ≥ 1");
                usize::from(self.covers(&probe, eps))
            })
            .sum();
        Ok(hits as f64 / trials as f64)
    }

    /// Max over sampled test states of the nearest-point distance: a Monte
    /// Carlo lower bound on the true covering radius.
    pub fn covering_radius_estimate(&self, trials: usize, seed: u64) -> Result<f64> {
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        let radius = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(seed, StreamDomain::RadiusTrial, t as u64);
                let probe = sample_haar_with_rng(self.d, &mut rng).expect("d ≥ 1");
                self.nearest_distance(&probe)
            })
            .reduce(|| 0.0, f64::max);
        Ok(radius)
    }

    /// Net points as a JSON list of state objects. Requires a power-of-two
    /// dimension (the state wire format carries a qubit count).
    pub fn to_state_list(&self) -> Result<Vec<StateVector>> {
        if !self.d.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "dimension {} is not a qubit register",
                self.d
            )));
        }
        self.points
            .iter()
            .map(|p| StateVector::new(p.clone()))
            .collect()
    }
}

/// One row of a coverage report (the CSV schema used by the CLI).
#[derive(Debug, Clone, Serialize)]
pub struct CoverageRow {
    pub d: usize,
    pub m: usize,
    pub eps: f64,
    pub trials: usize,
    pub fraction: f64,
    pub radius_estimate: f64,
    pub seed: u64,
}
