//! State-preparation complexity by exhaustive search: the minimal number of
//! instructions mapping |0…0⟩ within ε of a target, with gates only
//! (deterministic) or with measurements allowed (nondeterministic), in which
//! case a preparation counts as soon as one outcome branch reaches the
//! target and its cost in bits is −log2 of that branch's probability.
//!
//! The search is iterative deepening over instruction sequences with a
//! transposition table keyed by phase-canonicalized, grid-rounded states. A
//! revisit is pruned only when it is no shorter and no likelier than the
//! stored visit, which preserves both minimality and the best branch
//! probability at minimal length. Reported witnesses are deterministic:
//! first hit in canonical action order, i.e. the lexicographically smallest
//! among optimal programs.

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{slice_phase_min_distance, StateVector};
use crate::qram::{
    apply_gate_in_place, collapse_in_place, prob_of_one, ClassicalRecord, Gate, GateKind,
    Instruction, Program,
};

// ---------------------------------------------------------------------------
// Gate sets
// ---------------------------------------------------------------------------

/// One gate of a search alphabet: name, arity, and unitary matrix
/// (2×2 or 4×4 row-major).
#[derive(Debug, Clone, Serialize)]
pub struct GateSetEntry {
    pub kind: GateKind,
    pub name: String,
    pub arity: usize,
    #[serde(skip)]
    pub matrix: Vec<Complex64>,
}

/// The instruction alphabet for complexity search.
#[derive(Debug, Clone, Serialize)]
pub struct GateSet {
    entries: Vec<GateSetEntry>,
    allow_ancilla: bool,
    max_qubits: usize,
}

const UNITARITY_TOL: f64 = 1e-9;

fn kind_matrix(kind: GateKind) -> Vec<Complex64> {
    match kind.single_qubit_matrix() {
        Some(m) => m.to_vec(),
        None => {
            // CNOT in (control, target) ordering.
            let mut m = vec![Complex64::ZERO; 16];
            m[0] = Complex64::ONE;
            m[5] = Complex64::ONE;
            m[11] = Complex64::ONE;
            m[14] = Complex64::ONE;
            m
        }
    }
}

fn check_unitary(matrix: &[Complex64], dim: usize) -> Result<()> {
    for i in 0..dim {
        for j in 0..dim {
            let dot: Complex64 = (0..dim)
                .map(|r| matrix[r * dim + i].conj() * matrix[r * dim + j])
                .sum();
            let want = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            if (dot - want).norm() > UNITARITY_TOL {
                return Err(Error::InvalidConfig(format!(
                    "gate matrix is not unitary at column pair ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

impl GateSet {
    /// Builds a search alphabet from gate kinds, validating each matrix.
    pub fn from_kinds(kinds: &[GateKind], max_qubits: usize) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::InvalidConfig("gate set cannot be empty".into()));
        }
        let mut entries = Vec::with_capacity(kinds.len());
        for &kind in kinds {
            let matrix = kind_matrix(kind);
            let dim = if kind.arity() == 1 { 2 } else { 4 };
            check_unitary(&matrix, dim)?;
            entries.push(GateSetEntry {
                kind,
                name: kind.name().to_string(),
                arity: kind.arity(),
                matrix,
            });
        }
        Ok(GateSet {
            entries,
            allow_ancilla: false,
            max_qubits,
        })
    }

    /// The full nine-gate alphabet.
    pub fn standard(max_qubits: usize) -> Self {
        Self::from_kinds(&GateKind::ALL, max_qubits).expect("builtin gates are unitary")
    }

    /// The minimal universal alphabet {H, T, CNOT}.
    pub fn htc(max_qubits: usize) -> Self {
        Self::from_kinds(&[GateKind::H, GateKind::T, GateKind::Cnot], max_qubits)
            .expect("builtin gates are unitary")
    }

    /// Permits up to two ancilla qubits that must return to |0⟩.
    pub fn with_ancilla(mut self) -> Self {
        self.allow_ancilla = true;
        self
    }

    pub fn entries(&self) -> &[GateSetEntry] {
        &self.entries
    }

    pub fn allow_ancilla(&self) -> bool {
        self.allow_ancilla
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub wall_time_ms: f64,
}

/// Outcome of the complexity searches for one target.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityReport {
    pub target: StateVector,
    pub eps: f64,
    /// Minimal gate count reaching the target, or `None` within `max_len`.
    pub deterministic_length: Option<usize>,
    pub deterministic_witness: Option<Program>,
    /// Minimal instruction count (gates + measurements) with some branch
    /// reaching the target.
    pub nondet_length: Option<usize>,
    pub nondet_witness: Option<Program>,
    /// Measurement outcomes selecting the accepting branch of the witness.
    pub nondet_record: Option<ClassicalRecord>,
    /// −log2 of the accepting branch probability, maximized over branches at
    /// minimal length.
    pub nondet_cost_bits: Option<f64>,
    /// Text-serialized size of the best witness, in bytes.
    pub witness_bytes: Option<usize>,
    pub stats: SearchStats,
}

impl ComplexityReport {
    fn empty(target: StateVector, eps: f64) -> Self {
        ComplexityReport {
            target,
            eps,
            deterministic_length: None,
            deterministic_witness: None,
            nondet_length: None,
            nondet_witness: None,
            nondet_record: None,
            nondet_cost_bits: None,
            witness_bytes: None,
            stats: SearchStats::default(),
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical state keys
// ---------------------------------------------------------------------------

const GRID: f64 = 1e-6;
const PHASE_REF_TOL: f64 = 1e-9;
const PROB_TIE_TOL: f64 = 1e-12;
const BRANCH_MASS_FLOOR: f64 = 1e-12;

/// Transposition key: global phase fixed by making the first nonzero
/// amplitude real positive, then every component rounded to a 1e-6 grid.
pub fn canonical_state_key(amps: &[Complex64]) -> Vec<(i64, i64)> {
    let phase = amps
        .iter()
        .find(|a| a.norm() > PHASE_REF_TOL)
        .map(|a| a.conj() / a.norm())
        .unwrap_or(Complex64::ONE);
    amps.iter()
        .map(|a| {
            let r = a * phase;
            ((r.re / GRID).round() as i64, (r.im / GRID).round() as i64)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Search actions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Action {
    Gate(Gate),
    Measure { qubit: usize },
}

/// Canonical action order: gate-set order with ascending qubit placements,
/// then measurements by qubit. Witness lexicographic order follows this.
fn action_alphabet(gs: &GateSet, num_qubits: usize, with_measure: bool) -> Vec<Action> {
    let mut actions = Vec::new();
    for entry in gs.entries() {
        if entry.arity == 1 {
            for q in 0..num_qubits {
                actions.push(Action::Gate(Gate::single(entry.kind, q)));
            }
        } else {
            for q0 in 0..num_qubits {
                for q1 in 0..num_qubits {
                    if q0 != q1 {
                        actions.push(Action::Gate(Gate {
                            kind: entry.kind,
                            q0,
                            q1: Some(q1),
                        }));
                    }
                }
            }
        }
    }
    if with_measure {
        for q in 0..num_qubits {
            actions.push(Action::Measure { qubit: q });
        }
    }
    actions
}

struct Hit {
    length: usize,
    prob: f64,
    witness: Vec<usize>,
    outcomes: Vec<bool>,
}

struct Searcher<'a> {
    target: &'a [Complex64],
    eps: f64,
    num_qubits: usize,
    alphabet: Vec<Action>,
    max_meas: usize,
    table: HashMap<Vec<(i64, i64)>, (usize, f64)>,
    best: Option<Hit>,
    nodes: u64,
}

impl<'a> Searcher<'a> {
    fn run(&mut self, max_len: usize) -> Option<Hit> {
        let initial = {
            let mut amps = vec![Complex64::ZERO; 1 << self.num_qubits];
            amps[0] = Complex64::ONE;
            amps
        };
        for limit in 0..=max_len {
            self.table.clear();
            self.best = None;
            self.table.insert(canonical_state_key(&initial), (0, 1.0));
            self.dfs(&initial, 1.0, 0, 0, limit, &mut Vec::new(), &mut Vec::new());
            if self.best.is_some() {
                return self.best.take();
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        amps: &[Complex64],
        prob: f64,
        depth: usize,
        meas_used: usize,
        limit: usize,
        witness: &mut Vec<usize>,
        outcomes: &mut Vec<bool>,
    ) {
        self.nodes += 1;
        if slice_phase_min_distance(self.target, amps) <= self.eps {
            let better = match &self.best {
                None => true,
                Some(hit) => {
                    depth < hit.length || (depth == hit.length && prob > hit.prob + PROB_TIE_TOL)
                }
            };
            if better {
                self.best = Some(Hit {
                    length: depth,
                    prob,
                    witness: witness.clone(),
                    outcomes: outcomes.clone(),
                });
            }
            // A hit never extends: longer programs cannot improve on it.
            return;
        }
        if depth == limit {
            return;
        }
        for action_idx in 0..self.alphabet.len() {
            match self.alphabet[action_idx] {
                Action::Gate(gate) => {
                    let mut child = amps.to_vec();
                    apply_gate_in_place(&mut child, self.num_qubits, &gate);
                    witness.push(action_idx);
                    self.visit(&child, prob, depth + 1, meas_used, limit, witness, outcomes);
                    witness.pop();
                }
                Action::Measure { qubit } => {
                    if meas_used == self.max_meas {
                        continue;
                    }
                    let p1 = prob_of_one(amps, self.num_qubits, qubit);
                    for outcome in [false, true] {
                        let mass = if outcome { p1 } else { 1.0 - p1 };
                        if mass < BRANCH_MASS_FLOOR {
                            continue;
                        }
                        let mut child = amps.to_vec();
                        let exact = collapse_in_place(&mut child, self.num_qubits, qubit, outcome);
                        if exact < BRANCH_MASS_FLOOR {
                            continue;
                        }
                        witness.push(action_idx);
                        outcomes.push(outcome);
                        self.visit(
                            &child,
                            prob * exact,
                            depth + 1,
                            meas_used + 1,
                            limit,
                            witness,
                            outcomes,
                        );
                        outcomes.pop();
                        witness.pop();
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &mut self,
        amps: &[Complex64],
        prob: f64,
        depth: usize,
        meas_used: usize,
        limit: usize,
        witness: &mut Vec<usize>,
        outcomes: &mut Vec<bool>,
    ) {
        let key = canonical_state_key(amps);
        let expand = match self.table.get(&key) {
            // Re-expand only when strictly shorter, or likelier at the same
            // depth; anything else is dominated by the stored visit.
            Some(&(seen_depth, seen_prob)) => {
                depth < seen_depth || (depth == seen_depth && prob > seen_prob + PROB_TIE_TOL)
            }
            None => true,
        };
        if expand {
            self.table.insert(key, (depth, prob));
            self.dfs(amps, prob, depth, meas_used, limit, witness, outcomes);
        }
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

fn lift_target(target: &StateVector, ancillas: usize) -> Vec<Complex64> {
    let mut lifted = vec![Complex64::ZERO; target.dim() << ancillas];
    for (i, &a) in target.amplitudes().iter().enumerate() {
        lifted[i << ancillas] = a;
    }
    lifted
}

fn witness_program(
    alphabet: &[Action],
    num_qubits: usize,
    witness: &[usize],
) -> Result<(Program, ClassicalRecord)> {
    let num_cbits = witness
        .iter()
        .filter(|&&a| matches!(alphabet[a], Action::Measure { .. }))
        .count();
    let mut instructions = Vec::with_capacity(witness.len());
    let mut next_cbit = 0usize;
    for &a in witness {
        match alphabet[a] {
            Action::Gate(gate) => instructions.push(Instruction::Gate(gate)),
            Action::Measure { qubit } => {
                instructions.push(Instruction::Measure {
                    qubit,
                    cbit: next_cbit,
                });
                next_cbit += 1;
            }
        }
    }
    let program = Program::new(num_qubits, num_cbits, instructions)?;
    Ok((program, ClassicalRecord::unset(num_cbits)))
}

/// Best witness found by a search: length, program, accepting measurement
/// record, and branch probability.
type FoundWitness = (usize, Program, ClassicalRecord, f64);

fn run_search(
    target: &StateVector,
    gs: &GateSet,
    eps: f64,
    max_len: usize,
    max_meas: usize,
) -> Result<(Option<FoundWitness>, SearchStats)> {
    if eps <= 0.0 {
        return Err(Error::InvalidConfig("eps must be positive".into()));
    }
    if target.num_qubits() > gs.max_qubits() {
        return Err(Error::QubitCapExceeded {
            qubits: target.num_qubits(),
            cap: gs.max_qubits(),
        });
    }
    let started = Instant::now();
    let mut nodes = 0u64;
    let max_ancillas = if gs.allow_ancilla() {
        2.min(gs.max_qubits().saturating_sub(target.num_qubits()))
    } else {
        0
    };
    let mut best: Option<FoundWitness> = None;
    for ancillas in 0..=max_ancillas {
        let num_qubits = target.num_qubits() + ancillas;
        let lifted = lift_target(target, ancillas);
        let alphabet = action_alphabet(gs, num_qubits, max_meas > 0);
        let mut searcher = Searcher {
            target: &lifted,
            eps,
            num_qubits,
            alphabet,
            max_meas,
            table: HashMap::new(),
            best: None,
            nodes: 0,
        };
        let limit = match &best {
            // Deeper ancilla registers only matter if strictly shorter.
            Some((len, ..)) => len.saturating_sub(1),
            None => max_len,
        };
        let hit = searcher.run(limit);
        nodes += searcher.nodes;
        if let Some(hit) = hit {
            let (program, mut record) =
                witness_program(&searcher.alphabet, num_qubits, &hit.witness)?;
            for (i, &outcome) in hit.outcomes.iter().enumerate() {
                record.set(i, outcome);
            }
            if best.as_ref().is_none_or(|(len, ..)| hit.length < *len) {
                best = Some((hit.length, program, record, hit.prob));
            }
        }
    }
    let stats = SearchStats {
        nodes_expanded: nodes,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((best, stats))
}

/// Minimal gate count preparing `target` from |0…0⟩ within `eps`
/// (phase-minimized), searched up to `max_len`.
pub fn deterministic_complexity(
    target: &StateVector,
    gs: &GateSet,
    eps: f64,
    max_len: usize,
) -> Result<ComplexityReport> {
    let (found, stats) = run_search(target, gs, eps, max_len, 0)?;
    let mut report = ComplexityReport::empty(target.clone(), eps);
    report.stats = stats;
    if let Some((length, program, _, _)) = found {
        report.deterministic_length = Some(length);
        report.witness_bytes = Some(program.text_len());
        report.deterministic_witness = Some(program);
    }
    Ok(report)
}

/// Minimal instruction count (gates + measurements, at most `max_meas` of
/// the latter) such that some outcome branch lands within `eps` of `target`,
/// with the branch cost in bits.
pub fn nondeterministic_complexity(
    target: &StateVector,
    gs: &GateSet,
    eps: f64,
    max_len: usize,
    max_meas: usize,
) -> Result<ComplexityReport> {
    let (found, stats) = run_search(target, gs, eps, max_len, max_meas)?;
    let mut report = ComplexityReport::empty(target.clone(), eps);
    report.stats = stats;
    if let Some((length, program, record, prob)) = found {
        report.nondet_length = Some(length);
        report.nondet_cost_bits = Some((-prob.log2()).max(0.0));
        report.witness_bytes = Some(program.text_len());
        report.nondet_witness = Some(program);
        report.nondet_record = Some(record);
    }
    Ok(report)
}

/// Both searches on one target, merged into a single report.
pub fn full_complexity_report(
    target: &StateVector,
    gs: &GateSet,
    eps: f64,
    max_len: usize,
    max_meas: usize,
) -> Result<ComplexityReport> {
    let det = deterministic_complexity(target, gs, eps, max_len)?;
    let nondet = nondeterministic_complexity(target, gs, eps, max_len, max_meas)?;
    let mut report = ComplexityReport::empty(target.clone(), eps);
    report.deterministic_length = det.deterministic_length;
    report.deterministic_witness = det.deterministic_witness;
    report.witness_bytes = det.witness_bytes.or(nondet.witness_bytes);
    report.nondet_length = nondet.nondet_length;
    report.nondet_witness = nondet.nondet_witness;
    report.nondet_record = nondet.nondet_record;
    report.nondet_cost_bits = nondet.nondet_cost_bits;
    report.stats = SearchStats {
        nodes_expanded: det.stats.nodes_expanded + nondet.stats.nodes_expanded,
        wall_time_ms: det.stats.wall_time_ms + nondet.stats.wall_time_ms,
    };
    Ok(report)
}
