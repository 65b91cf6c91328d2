//! Decision procedures for ∃y R(x, y) where R is a probabilistic relation
//! computed by a program on registers x and y with one output bit, and the
//! witness y ranges over quantum states.
//!
//! Three searches share the thresholds (accept when R(x, y) holds with
//! probability above `accept_threshold`, reject when every witness stays
//! below `reject_threshold`, and report `Gap` in the unconstrained band):
//! an exhaustive scan over a dense witness set (all classical basis states
//! of the y register followed by a seeded Haar net, so the classical
//! baseline is a strict subset of the quantum search), the classical-only
//! baseline, and a random-witness sampler.

use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::qram::{
    enumerate_branches_from, run_sampled_with_rng, BranchFlag, Instruction, Program, SimConfig,
};
use crate::rng::{stream_rng, StreamDomain};
use crate::state_net::Net;
use crate::stats::wilson_interval;

// ---------------------------------------------------------------------------
// Relations
// ---------------------------------------------------------------------------

/// A program on x, y, and ancilla qubits that measures one designated
/// classical bit; the probability of that bit being 1 defines R(x, y).
#[derive(Debug, Clone)]
pub struct RelationCircuit {
    program: Program,
    x_qubits: Range<usize>,
    y_qubits: Range<usize>,
    output_bit: usize,
}

impl RelationCircuit {
    pub fn new(
        program: Program,
        x_qubits: Range<usize>,
        y_qubits: Range<usize>,
        output_bit: usize,
    ) -> Result<Self> {
        let n = program.num_qubits();
        if x_qubits.end > n || y_qubits.end > n || x_qubits.start > x_qubits.end {
            return Err(Error::InvalidRelation(
                "x range outside the register".into(),
            ));
        }
        if y_qubits.is_empty() || y_qubits.start > y_qubits.end {
            return Err(Error::InvalidRelation("y register must be nonempty".into()));
        }
        let overlap = x_qubits.start < y_qubits.end && y_qubits.start < x_qubits.end;
        if overlap {
            return Err(Error::InvalidRelation("x and y ranges overlap".into()));
        }
        if output_bit >= program.num_cbits() {
            return Err(Error::ClassicalBitOutOfRange {
                index: output_bit,
                limit: program.num_cbits(),
            });
        }
        let writes = program
            .instructions()
            .iter()
            .filter(|i| matches!(i, Instruction::Measure { cbit, .. } if *cbit == output_bit))
            .count();
        if writes != 1 {
            return Err(Error::InvalidRelation(format!(
                "output bit c{output_bit} must be measured exactly once, found {writes} writes"
            )));
        }
        Ok(RelationCircuit {
            program,
            x_qubits,
            y_qubits,
            output_bit,
        })
    }

    /// Loads the text form: a header `xreg a..b ; yreg c..d ; out cK`
    /// (half-open ranges) followed by program lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, &str)> = None;
        let mut body = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if header.is_none() {
                if stripped.is_empty() {
                    continue;
                }
                header = Some((idx + 1, raw));
            } else {
                body.push_str(raw);
                body.push('\n');
            }
        }
        let (line, header) = header.ok_or_else(|| Error::Parse {
            line: 0,
            message: "missing relation header".into(),
        })?;
        let header = header
            .split('#')
            .next()
            .unwrap_or("")
            .trim()
            .to_ascii_lowercase();
        let err = |message: String| Error::Parse { line, message };

        let mut x_qubits = None;
        let mut y_qubits = None;
        let mut output_bit = None;
        for part in header.split(';') {
            let tokens: Vec<&str> = part.split_whitespace().collect();
            match tokens.as_slice() {
                ["xreg", range] => x_qubits = Some(parse_range(range).map_err(&err)?),
                ["yreg", range] => y_qubits = Some(parse_range(range).map_err(&err)?),
                ["out", cbit] => {
                    let idx = cbit
                        .strip_prefix('c')
                        .and_then(|rest| rest.parse::<usize>().ok())
                        .ok_or_else(|| err(format!("expected `out cK`, got `{cbit}`")))?;
                    output_bit = Some(idx);
                }
                [] => {}
                other => {
                    return Err(err(format!(
                        "unrecognized header clause `{}`",
                        other.join(" ")
                    )))
                }
            }
        }
        let x_qubits = x_qubits.ok_or_else(|| err("header missing `xreg a..b`".into()))?;
        let y_qubits = y_qubits.ok_or_else(|| err("header missing `yreg a..b`".into()))?;
        let output_bit = output_bit.ok_or_else(|| err("header missing `out cK`".into()))?;
        let program = Program::parse(&body)?;
        Self::new(program, x_qubits, y_qubits, output_bit)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn x_width(&self) -> usize {
        self.x_qubits.len()
    }

    pub fn y_width(&self) -> usize {
        self.y_qubits.len()
    }

    pub fn output_bit(&self) -> usize {
        self.output_bit
    }

    /// Joint initial state x ⊗ y ⊗ |0…0⟩ laid out on the declared ranges.
    fn embed_inputs(&self, x: &StateVector, y: &StateVector) -> Result<StateVector> {
        if x.num_qubits() != self.x_width() {
            return Err(Error::DimensionMismatch {
                left: x.num_qubits(),
                right: self.x_width(),
            });
        }
        if y.num_qubits() != self.y_width() {
            return Err(Error::DimensionMismatch {
                left: y.num_qubits(),
                right: self.y_width(),
            });
        }
        let n = self.program.num_qubits();
        let dim = 1usize << n;
        let mut amps = vec![Complex64::ZERO; dim];
        for (i, amp) in amps.iter_mut().enumerate() {
            let bit = |q: usize| (i >> (n - 1 - q)) & 1;
            let ancilla_excited = (0..n)
                .any(|q| !self.x_qubits.contains(&q) && !self.y_qubits.contains(&q) && bit(q) == 1);
            if ancilla_excited {
                continue;
            }
            let xi = self
                .x_qubits
                .clone()
                .fold(0usize, |acc, q| (acc << 1) | bit(q));
            let yi = self
                .y_qubits
                .clone()
                .fold(0usize, |acc, q| (acc << 1) | bit(q));
            *amp = x.amplitudes()[xi] * y.amplitudes()[yi];
        }
        StateVector::new(amps)
    }
}

fn parse_range(token: &str) -> std::result::Result<Range<usize>, String> {
    let (a, b) = token
        .split_once("..")
        .ok_or_else(|| format!("expected half-open range `a..b`, got `{token}`"))?;
    let start = a.parse().map_err(|_| format!("bad range start `{a}`"))?;
    let end = b.parse().map_err(|_| format!("bad range end `{b}`"))?;
    if start > end {
        return Err(format!("range `{token}` is reversed"));
    }
    Ok(start..end)
}

// ---------------------------------------------------------------------------
// Configuration and verdicts
// ---------------------------------------------------------------------------

/// How each witness's acceptance probability is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Exact branch enumeration.
    Exact,
    /// Bernoulli trials compared against the thresholds through a Wilson
    /// score interval at 99% confidence.
    Sampled { trials: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct QndConfig {
    pub accept_threshold: f64,
    pub reject_threshold: f64,
    pub net_size: usize,
    pub eval: EvalMode,
    pub seed: u64,
    #[serde(skip)]
    pub sim: SimConfig,
}

impl Default for QndConfig {
    fn default() -> Self {
        QndConfig {
            accept_threshold: 0.75,
            reject_threshold: 0.25,
            net_size: 64,
            eval: EvalMode::Exact,
            seed: 0,
            sim: SimConfig::default(),
        }
    }
}

impl QndConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.accept_threshold)
            || !(0.0..=1.0).contains(&self.reject_threshold)
            || self.reject_threshold >= self.accept_threshold
        {
            return Err(Error::InvalidConfig(format!(
                "thresholds must satisfy 0 ≤ reject < accept ≤ 1, got ({}, {})",
                self.reject_threshold, self.accept_threshold
            )));
        }
        if let EvalMode::Sampled { trials } = self.eval {
            if trials == 0 {
                return Err(Error::InvalidConfig(
                    "sampled mode needs at least one trial".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
    Gap,
}

/// The witness behind a verdict: a classical basis string or a quantum state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Classical(String),
    Quantum(StateVector),
}

#[derive(Debug, Clone, Serialize)]
pub struct QndVerdict {
    pub decision: Decision,
    #[serde(rename = "witness")]
    pub best_witness: Option<WitnessKind>,
    pub best_probability: f64,
    pub witnesses_tried: usize,
    pub config: QndConfig,
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Exact probability that the output bit reads 1 on input (x, y): the summed
/// probability of ordinary (non-postselection-rejected) branches whose
/// record sets the bit. Branches removed by postselection keep probability
/// mass out of the total, so relations may use postselection as a filter.
pub fn eval_relation_exact(rel: &RelationCircuit, x: &StateVector, y: &StateVector) -> Result<f64> {
    eval_relation_exact_with(rel, x, y, &SimConfig::default())
}

pub fn eval_relation_exact_with(
    rel: &RelationCircuit,
    x: &StateVector,
    y: &StateVector,
    sim: &SimConfig,
) -> Result<f64> {
    let initial = rel.embed_inputs(x, y)?;
    let tree = enumerate_branches_from(rel.program(), &initial, sim)?;
    let mut p = 0.0;
    for leaf in tree.leaves() {
        match leaf.flag {
            BranchFlag::Rejected | BranchFlag::Pruned => continue,
            BranchFlag::Normal => match leaf.record.get(rel.output_bit) {
                Some(true) => p += leaf.probability,
                Some(false) => {}
                None => {
                    return Err(Error::InvalidRelation(format!(
                        "a branch finished without measuring output bit c{}",
                        rel.output_bit
                    )))
                }
            },
        }
    }
    Ok(p)
}

/// What one witness evaluation established.
#[derive(Debug, Clone, Copy)]
enum WitnessCall {
    /// Conclusively above the accept threshold.
    Accepting(f64),
    /// Conclusively below the reject threshold.
    BelowReject(f64),
    /// Neither (the unconstrained band, or an interval straddling a bound).
    Middle(f64),
}

impl WitnessCall {
    fn probability(self) -> f64 {
        match self {
            WitnessCall::Accepting(p) | WitnessCall::BelowReject(p) | WitnessCall::Middle(p) => p,
        }
    }
}

fn evaluate_witness(
    rel: &RelationCircuit,
    x: &StateVector,
    y: &StateVector,
    cfg: &QndConfig,
    witness_index: u64,
) -> Result<WitnessCall> {
    match cfg.eval {
        EvalMode::Exact => {
            let p = eval_relation_exact_with(rel, x, y, &cfg.sim)?;
            Ok(if p > cfg.accept_threshold {
                WitnessCall::Accepting(p)
            } else if p < cfg.reject_threshold {
                WitnessCall::BelowReject(p)
            } else {
                WitnessCall::Middle(p)
            })
        }
        EvalMode::Sampled { trials } => {
            let initial = rel.embed_inputs(x, y)?;
            // Re-prepare the joint input for every trial; a single attempt
            // per trial so a failed postselection counts as output 0, the
            // same event the exact mode excludes from the accepted mass.
            let single_shot = SimConfig {
                postselect_retries: 0,
                ..cfg.sim.clone()
            };
            let mut successes = 0u64;
            for t in 0..trials {
                let counter = witness_index * trials as u64 + t as u64;
                let mut rng = stream_rng(cfg.seed, StreamDomain::WitnessTrial, counter);
                match run_sampled_with_rng(rel.program(), &initial, &mut rng, &single_shot) {
                    Ok(outcome) => {
                        if outcome.record.get(rel.output_bit) == Some(true) {
                            successes += 1;
                        }
                    }
                    Err(Error::PostselectionExhausted { .. }) => {}
                    Err(other) => return Err(other),
                }
            }
            let p_hat = successes as f64 / trials as f64;
            let (lo, hi) = wilson_interval(successes, trials as u64, 0.99);
            Ok(if lo > cfg.accept_threshold {
                WitnessCall::Accepting(p_hat)
            } else if hi < cfg.reject_threshold {
                WitnessCall::BelowReject(p_hat)
            } else {
                WitnessCall::Middle(p_hat)
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

struct Scan {
    best_probability: f64,
    best_witness: Option<WitnessKind>,
    tried: usize,
    all_below_reject: bool,
    accepted: bool,
}

impl Scan {
    fn new() -> Self {
        Scan {
            best_probability: f64::NEG_INFINITY,
            best_witness: None,
            tried: 0,
            all_below_reject: true,
            accepted: false,
        }
    }

    /// Returns true when the scan can stop (first accepting witness).
    fn record(&mut self, call: WitnessCall, witness: WitnessKind) -> bool {
        self.tried += 1;
        let p = call.probability();
        if p > self.best_probability {
            self.best_probability = p;
            self.best_witness = Some(witness);
        }
        match call {
            WitnessCall::Accepting(_) => {
                self.accepted = true;
                self.all_below_reject = false;
                true
            }
            WitnessCall::Middle(_) => {
                self.all_below_reject = false;
                false
            }
            WitnessCall::BelowReject(_) => false,
        }
    }

    fn verdict(self, cfg: &QndConfig) -> QndVerdict {
        let decision = if self.accepted {
            Decision::Accept
        } else if self.all_below_reject {
            Decision::Reject
        } else {
            Decision::Gap
        };
        QndVerdict {
            decision,
            best_witness: self.best_witness,
            best_probability: if self.tried == 0 {
                0.0
            } else {
                self.best_probability
            },
            witnesses_tried: self.tried,
            config: cfg.clone(),
        }
    }
}

fn basis_label(index: usize, width: usize) -> String {
    if width == 0 {
        return String::new();
    }
    format!("{index:0width$b}")
}

/// Exhaustive dense-set search: every classical basis state of the y
/// register, then `net_size` Haar witnesses from the seed. Accepts on the
/// first witness conclusively above the accept threshold, rejects when all
/// stay conclusively below the reject threshold, and otherwise reports the
/// unconstrained band explicitly as `Gap`.
pub fn solve_total_qnd(
    rel: &RelationCircuit,
    x: &StateVector,
    cfg: &QndConfig,
) -> Result<QndVerdict> {
    cfg.validate()?;
    let width = rel.y_width();
    let mut scan = Scan::new();
    let mut witness_index = 0u64;
    for basis in 0..(1usize << width) {
        let y = StateVector::basis(width, basis)?;
        let call = evaluate_witness(rel, x, &y, cfg, witness_index)?;
        witness_index += 1;
        if scan.record(call, WitnessKind::Classical(basis_label(basis, width))) {
            return Ok(scan.verdict(cfg));
        }
    }
    let net = Net::random(1 << width, cfg.net_size, cfg.seed)?;
    for point in net.points() {
        let y = StateVector::new(point.clone())?;
        let call = evaluate_witness(rel, x, &y, cfg, witness_index)?;
        witness_index += 1;
        if scan.record(call, WitnessKind::Quantum(y)) {
            return Ok(scan.verdict(cfg));
        }
    }
    Ok(scan.verdict(cfg))
}

/// The classical baseline: y ranges over exactly the 2^`max_y_bits` basis
/// states of the y register.
pub fn solve_classical_nd(
    rel: &RelationCircuit,
    x: &StateVector,
    max_y_bits: usize,
    cfg: &QndConfig,
) -> Result<QndVerdict> {
    cfg.validate()?;
    if max_y_bits != rel.y_width() {
        return Err(Error::InvalidConfig(format!(
            "max_y_bits {} must equal the y register width {}",
            max_y_bits,
            rel.y_width()
        )));
    }
    let mut scan = Scan::new();
    for basis in 0..(1usize << max_y_bits) {
        let y = StateVector::basis(max_y_bits, basis)?;
        let call = evaluate_witness(rel, x, &y, cfg, basis as u64)?;
        if scan.record(call, WitnessKind::Classical(basis_label(basis, max_y_bits))) {
            break;
        }
    }
    Ok(scan.verdict(cfg))
}

/// Generate-and-try: `samples` Haar witnesses, accepting on the first that
/// clears the accept threshold.
pub fn random_witness_search(
    rel: &RelationCircuit,
    x: &StateVector,
    samples: usize,
    cfg: &QndConfig,
) -> Result<QndVerdict> {
    cfg.validate()?;
    if samples == 0 {
        return Err(Error::InvalidConfig(
            "need at least one witness sample".into(),
        ));
    }
    let width = rel.y_width();
    let mut scan = Scan::new();
    for sample in 0..samples {
        let mut rng = stream_rng(cfg.seed, StreamDomain::HaarState, sample as u64);
        let amps = crate::random_source::sample_haar_with_rng(1 << width, &mut rng)?;
        let y = StateVector::new(amps)?;
        let call = evaluate_witness(rel, x, &y, cfg, sample as u64)?;
        if scan.record(call, WitnessKind::Quantum(y)) {
            break;
        }
    }
    Ok(scan.verdict(cfg))
}
