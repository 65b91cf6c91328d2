//! Interpreter for programs on a classical machine with quantum registers:
//! a discrete gate set on up to `qubit_cap` qubits, single-qubit measurement
//! in the classical basis, classically controlled gates, and postselection.
//!
//! Two execution modes share one engine: `run_sampled` draws each
//! measurement from the Born distribution with a seeded generator, and
//! `enumerate_branches` expands every outcome into an exact tree of
//! probabilities and post-measurement states.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::rng::{stream_rng, StreamDomain};

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

/// The discrete gate alphabet. Universal for the searches in this crate
/// once combined with measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Cnot,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Cnot,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Cnot => "cnot",
        }
    }

    /// Row-major 2×2 matrix for single-qubit kinds, `None` for CNOT.
    pub fn single_qubit_matrix(self) -> Option<[Complex64; 4]> {
        use std::f64::consts::FRAC_1_SQRT_2;
        let c = Complex64::new;
        let h = FRAC_1_SQRT_2;
        let t = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match self {
            GateKind::H => Some([c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
            GateKind::X => Some([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            GateKind::Y => Some([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
            GateKind::Z => Some([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
            GateKind::S => Some([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
            GateKind::Sdg => Some([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]),
            GateKind::T => Some([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), t]),
            GateKind::Tdg => Some([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), t.conj()]),
            GateKind::Cnot => None,
        }
    }
}

impl FromStr for GateKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "h" => Ok(GateKind::H),
            "x" => Ok(GateKind::X),
            "y" => Ok(GateKind::Y),
            "z" => Ok(GateKind::Z),
            "s" => Ok(GateKind::S),
            "sdg" => Ok(GateKind::Sdg),
            "t" => Ok(GateKind::T),
            "tdg" => Ok(GateKind::Tdg),
            "cnot" => Ok(GateKind::Cnot),
            _ => Err(()),
        }
    }
}

/// A gate applied to concrete qubit indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub q0: usize,
    pub q1: Option<usize>,
}

impl Gate {
    pub fn single(kind: GateKind, q0: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Gate { kind, q0, q1: None }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            q0: control,
            q1: Some(target),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q1 {
            Some(q1) => write!(f, "{} {} {}", self.kind.name(), self.q0, q1),
            None => write!(f, "{} {}", self.kind.name(), self.q0),
        }
    }
}

// ---------------------------------------------------------------------------
// Instructions and programs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    Gate(Gate),
    Measure {
        qubit: usize,
        cbit: usize,
    },
    CondGate {
        cbit: usize,
        value: bool,
        gate: Gate,
    },
    Postselect {
        cbit: usize,
        value: bool,
    },
    Halt,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Gate(g) => write!(f, "{g}"),
            Instruction::Measure { qubit, cbit } => write!(f, "measure {qubit} -> c{cbit}"),
            Instruction::CondGate { cbit, value, gate } => {
                write!(f, "cif c{}={} {}", cbit, u8::from(*value), gate)
            }
            Instruction::Postselect { cbit, value } => {
                write!(f, "postselect c{}={}", cbit, u8::from(*value))
            }
            Instruction::Halt => write!(f, "halt"),
        }
    }
}

/// Simulation limits and knobs shared by both execution modes.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Largest register exact simulation accepts.
    pub qubit_cap: usize,
    /// Largest number of measurement instructions `enumerate_branches` accepts.
    pub branch_cap: usize,
    /// Sampled-mode restarts after a postselection mismatch.
    pub postselect_retries: usize,
    /// Absolute branch probability below which enumeration stops expanding.
    pub prune_threshold: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            qubit_cap: 12,
            branch_cap: 16,
            postselect_retries: 1000,
            prune_threshold: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    num_qubits: usize,
    num_cbits: usize,
    instructions: Vec<Instruction>,
}

// Programs serialize as their text form; that string is also the measure of
// serialized program size.
impl Serialize for Program {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_program(&text).map_err(serde::de::Error::custom)
    }
}

impl Program {
    pub fn new(
        num_qubits: usize,
        num_cbits: usize,
        instructions: Vec<Instruction>,
    ) -> Result<Self> {
        Self::with_config(num_qubits, num_cbits, instructions, &SimConfig::default())
    }

    pub fn with_config(
        num_qubits: usize,
        num_cbits: usize,
        instructions: Vec<Instruction>,
        config: &SimConfig,
    ) -> Result<Self> {
        if num_qubits > config.qubit_cap {
            return Err(Error::QubitCapExceeded {
                qubits: num_qubits,
                cap: config.qubit_cap,
            });
        }
        let check_gate = |g: &Gate| -> Result<()> {
            let arity = g.kind.arity();
            match (arity, g.q1) {
                (1, None) | (2, Some(_)) => {}
                _ => {
                    return Err(Error::InvalidState(format!(
                        "gate {} expects arity {arity}",
                        g.kind.name()
                    )))
                }
            }
            let check = |q: usize| -> Result<()> {
                if q >= num_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: q,
                        limit: num_qubits,
                    });
                }
                Ok(())
            };
            check(g.q0)?;
            if let Some(q1) = g.q1 {
                check(q1)?;
                if q1 == g.q0 {
                    return Err(Error::InvalidState(format!(
                        "two-qubit gate with repeated index {q1}"
                    )));
                }
            }
            Ok(())
        };
        let check_cbit = |c: usize| -> Result<()> {
            if c >= num_cbits {
                return Err(Error::ClassicalBitOutOfRange {
                    index: c,
                    limit: num_cbits,
                });
            }
            Ok(())
        };
        for instr in &instructions {
            match instr {
                Instruction::Gate(g) => check_gate(g)?,
                Instruction::CondGate { cbit, gate, .. } => {
                    check_cbit(*cbit)?;
                    check_gate(gate)?;
                }
                Instruction::Measure { qubit, cbit } => {
                    if *qubit >= num_qubits {
                        return Err(Error::QubitOutOfRange {
                            index: *qubit,
                            limit: num_qubits,
                        });
                    }
                    check_cbit(*cbit)?;
                }
                Instruction::Postselect { cbit, .. } => check_cbit(*cbit)?,
                Instruction::Halt => {}
            }
        }
        Ok(Program {
            num_qubits,
            num_cbits,
            instructions,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_cbits(&self) -> usize {
        self.num_cbits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Number of measurement instructions (each executes at most once).
    pub fn measurement_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Measure { .. }))
            .count()
    }

    /// Parses the line-based text format; see the module grammar.
    pub fn parse(text: &str) -> Result<Self> {
        parse_program(text)
    }

    /// Serialized size in bytes of the text form.
    pub fn text_len(&self) -> usize {
        self.to_string().len()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.num_qubits)?;
        writeln!(f, "cbits {}", self.num_cbits)?;
        for instr in &self.instructions {
            writeln!(f, "{instr}")?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_program(s)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Grammar, one instruction per line, case-insensitive, `#` comments:
///
/// ```text
/// qubits N
/// cbits M                 # optional; inferred from the largest cK used
/// <gate> q [q2]           # h x y z s sdg t tdg cnot
/// measure q -> cK
/// cif cK=V <gate> q [q2]
/// postselect cK=V
/// halt
/// ```
pub fn parse_program(text: &str) -> Result<Program> {
    let mut num_qubits: Option<usize> = None;
    let mut num_cbits: Option<usize> = None;
    let mut max_cbit: Option<usize> = None;
    let mut instructions = Vec::new();

    let err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw
            .split('#')
            .next()
            .unwrap_or("")
            .trim()
            .to_ascii_lowercase();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_index = |tok: &str, what: &str| -> Result<usize> {
            tok.parse::<usize>()
                .map_err(|_| err(line_no, &format!("expected {what} index, got `{tok}`")))
        };
        let parse_cbit_ref = |tok: &str| -> Result<usize> {
            tok.strip_prefix('c')
                .and_then(|rest| rest.parse::<usize>().ok())
                .ok_or_else(|| {
                    err(
                        line_no,
                        &format!("expected classical bit `cK`, got `{tok}`"),
                    )
                })
        };
        let parse_cond = |tok: &str| -> Result<(usize, bool)> {
            let (lhs, rhs) = tok
                .split_once('=')
                .ok_or_else(|| err(line_no, &format!("expected `cK=V`, got `{tok}`")))?;
            let cbit = parse_cbit_ref(lhs)?;
            let value = match rhs {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(err(
                        line_no,
                        &format!("condition value must be 0 or 1, got `{rhs}`"),
                    ))
                }
            };
            Ok((cbit, value))
        };
        let parse_gate = |tokens: &[&str]| -> Result<Gate> {
            let kind = GateKind::from_str(tokens[0])
                .map_err(|_| err(line_no, &format!("unknown gate `{}`", tokens[0])))?;
            let want = kind.arity() + 1;
            if tokens.len() != want {
                return Err(err(
                    line_no,
                    &format!(
                        "gate `{}` takes {} qubit index(es)",
                        kind.name(),
                        kind.arity()
                    ),
                ));
            }
            let q0 = parse_index(tokens[1], "qubit")?;
            let q1 = if kind.arity() == 2 {
                Some(parse_index(tokens[2], "qubit")?)
            } else {
                None
            };
            Ok(Gate { kind, q0, q1 })
        };

        match tokens[0] {
            "qubits" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "usage: qubits N"));
                }
                num_qubits = Some(parse_index(tokens[1], "qubit count")?);
            }
            "cbits" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "usage: cbits M"));
                }
                num_cbits = Some(parse_index(tokens[1], "classical bit count")?);
            }
            "measure" => {
                if tokens.len() != 4 || tokens[2] != "->" {
                    return Err(err(line_no, "usage: measure q -> cK"));
                }
                let qubit = parse_index(tokens[1], "qubit")?;
                let cbit = parse_cbit_ref(tokens[3])?;
                max_cbit = Some(max_cbit.map_or(cbit, |m: usize| m.max(cbit)));
                instructions.push(Instruction::Measure { qubit, cbit });
            }
            "cif" => {
                if tokens.len() < 3 {
                    return Err(err(line_no, "usage: cif cK=V <gate> q [q2]"));
                }
                let (cbit, value) = parse_cond(tokens[1])?;
                max_cbit = Some(max_cbit.map_or(cbit, |m: usize| m.max(cbit)));
                let gate = parse_gate(&tokens[2..])?;
                instructions.push(Instruction::CondGate { cbit, value, gate });
            }
            "postselect" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "usage: postselect cK=V"));
                }
                let (cbit, value) = parse_cond(tokens[1])?;
                max_cbit = Some(max_cbit.map_or(cbit, |m: usize| m.max(cbit)));
                instructions.push(Instruction::Postselect { cbit, value });
            }
            "halt" => {
                if tokens.len() != 1 {
                    return Err(err(line_no, "usage: halt"));
                }
                instructions.push(Instruction::Halt);
            }
            _ => {
                instructions.push(Instruction::Gate(parse_gate(&tokens)?));
            }
        }
    }

    let num_qubits = num_qubits.ok_or_else(|| err(0, "missing `qubits N` directive"))?;
    let num_cbits = num_cbits.unwrap_or_else(|| max_cbit.map_or(0, |m| m + 1));
    Program::new(num_qubits, num_cbits, instructions)
}

// ---------------------------------------------------------------------------
// Classical record
// ---------------------------------------------------------------------------

/// Values of the classical bits; `None` marks a bit no measurement has
/// written yet. Displays as a string of `0`/`1`/`-`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassicalRecord {
    bits: Vec<Option<bool>>,
}

impl ClassicalRecord {
    pub fn unset(num_cbits: usize) -> Self {
        ClassicalRecord {
            bits: vec![None; num_cbits],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, cbit: usize) -> Option<bool> {
        self.bits.get(cbit).copied().flatten()
    }

    pub fn set(&mut self, cbit: usize, value: bool) {
        self.bits[cbit] = Some(value);
    }

    pub fn bits(&self) -> &[Option<bool>] {
        &self.bits
    }
}

impl fmt::Display for ClassicalRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in &self.bits {
            let ch = match bit {
                Some(false) => '0',
                Some(true) => '1',
                None => '-',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for ClassicalRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            bits.push(match ch {
                '0' => Some(false),
                '1' => Some(true),
                '-' => None,
                _ => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("invalid record character `{ch}`"),
                    })
                }
            });
        }
        Ok(ClassicalRecord { bits })
    }
}

impl Serialize for ClassicalRecord {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClassicalRecord {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// State-vector kernel
// ---------------------------------------------------------------------------

// Qubit q of an n-qubit index occupies bit n-1-q (qubit 0 most significant).
fn bit_mask(num_qubits: usize, qubit: usize) -> usize {
    1usize << (num_qubits - 1 - qubit)
}

/// Applies `gate` to raw amplitudes of an `num_qubits` register in place.
pub fn apply_gate_in_place(amps: &mut [Complex64], num_qubits: usize, gate: &Gate) {
    match gate.kind {
        GateKind::Cnot => {
            let control = bit_mask(num_qubits, gate.q0);
            let target = bit_mask(num_qubits, gate.q1.expect("cnot has target"));
            for i in 0..amps.len() {
                if i & control != 0 && i & target == 0 {
                    amps.swap(i, i | target);
                }
            }
        }
        kind => {
            let m = kind.single_qubit_matrix().expect("single-qubit kind");
            let mask = bit_mask(num_qubits, gate.q0);
            for i in 0..amps.len() {
                if i & mask == 0 {
                    let j = i | mask;
                    let a = amps[i];
                    let b = amps[j];
                    amps[i] = m[0] * a + m[1] * b;
                    amps[j] = m[2] * a + m[3] * b;
                }
            }
        }
    }
}

/// Probability that measuring `qubit` yields 1.
pub fn prob_of_one(amps: &[Complex64], num_qubits: usize, qubit: usize) -> f64 {
    let mask = bit_mask(num_qubits, qubit);
    amps.iter()
        .enumerate()
        .filter(|(i, _)| i & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Zeroes the amplitudes inconsistent with `outcome` and renormalizes.
/// Returns the pre-normalization squared mass of the branch.
pub fn collapse_in_place(
    amps: &mut [Complex64],
    num_qubits: usize,
    qubit: usize,
    outcome: bool,
) -> f64 {
    let mask = bit_mask(num_qubits, qubit);
    let mut mass = 0.0;
    for (i, a) in amps.iter_mut().enumerate() {
        if ((i & mask) != 0) == outcome {
            mass += a.norm_sqr();
        } else {
            *a = Complex64::ZERO;
        }
    }
    if mass > 0.0 {
        let inv = 1.0 / mass.sqrt();
        for a in amps.iter_mut() {
            *a *= inv;
        }
    }
    mass
}

// ---------------------------------------------------------------------------
// Sampled execution
// ---------------------------------------------------------------------------

/// Final classical record and quantum state of one sampled run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub record: ClassicalRecord,
    pub state: StateVector,
}

/// Runs a program once from |0…0⟩, sampling measurements from the Born
/// distribution. Deterministic given the seed.
pub fn run_sampled(program: &Program, seed: u64, config: &SimConfig) -> Result<RunOutcome> {
    run_sampled_from(
        program,
        &StateVector::zero(program.num_qubits),
        seed,
        config,
    )
}

/// As `run_sampled`, but from a caller-supplied initial state.
pub fn run_sampled_from(
    program: &Program,
    initial: &StateVector,
    seed: u64,
    config: &SimConfig,
) -> Result<RunOutcome> {
    check_caps(program, initial, config)?;
    let mut rng = stream_rng(seed, StreamDomain::ProgramRun, 0);
    run_sampled_with_rng(program, initial, &mut rng, config)
}

/// Sampled execution drawing from a caller-owned generator (used when many
/// runs share one derived stream).
pub fn run_sampled_with_rng(
    program: &Program,
    initial: &StateVector,
    rng: &mut ChaCha8Rng,
    config: &SimConfig,
) -> Result<RunOutcome> {
    check_caps(program, initial, config)?;
    let n = program.num_qubits;
    'attempt: for _ in 0..=config.postselect_retries {
        let mut amps = initial.amplitudes().to_vec();
        let mut record = ClassicalRecord::unset(program.num_cbits);
        for instr in &program.instructions {
            match instr {
                Instruction::Gate(g) => apply_gate_in_place(&mut amps, n, g),
                Instruction::CondGate { cbit, value, gate } => {
                    let bit = record.get(*cbit).ok_or(Error::UnsetClassicalBit(*cbit))?;
                    if bit == *value {
                        apply_gate_in_place(&mut amps, n, gate);
                    }
                }
                Instruction::Measure { qubit, cbit } => {
                    let p1 = prob_of_one(&amps, n, *qubit);
                    let outcome = rng.random::<f64>() < p1;
                    collapse_in_place(&mut amps, n, *qubit, outcome);
                    record.set(*cbit, outcome);
                }
                Instruction::Postselect { cbit, value } => {
                    let bit = record.get(*cbit).ok_or(Error::UnsetClassicalBit(*cbit))?;
                    if bit != *value {
                        continue 'attempt;
                    }
                }
                Instruction::Halt => break,
            }
        }
        return Ok(RunOutcome {
            record,
            state: StateVector::from_raw(amps),
        });
    }
    Err(Error::PostselectionExhausted {
        retries: config.postselect_retries,
    })
}

fn check_caps(program: &Program, initial: &StateVector, config: &SimConfig) -> Result<()> {
    if program.num_qubits > config.qubit_cap {
        return Err(Error::QubitCapExceeded {
            qubits: program.num_qubits,
            cap: config.qubit_cap,
        });
    }
    if initial.num_qubits() != program.num_qubits {
        return Err(Error::DimensionMismatch {
            left: initial.num_qubits(),
            right: program.num_qubits,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Exact branch enumeration
// ---------------------------------------------------------------------------

/// How a branch of the outcome tree terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchFlag {
    /// Interior node or an ordinary completed leaf.
    Normal,
    /// Leaf cut by a failed postselection; keeps its probability mass.
    Rejected,
    /// Leaf below the pruning threshold; not expanded further.
    Pruned,
}

/// One node of the exact outcome tree. A node covers execution from its
/// creation (program start, or a measurement outcome) up to the next
/// measurement; `state` is the state at the end of that stretch and
/// `children` are keyed by the outcome of the measurement that ends it.
#[derive(Debug, Clone)]
pub struct OutcomeNode {
    pub record: ClassicalRecord,
    pub probability: f64,
    pub state: StateVector,
    pub children: Vec<(bool, OutcomeNode)>,
    pub flag: BranchFlag,
}

impl OutcomeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Exact tree of all measurement outcomes of a program.
#[derive(Debug, Clone)]
pub struct OutcomeTree {
    pub root: OutcomeNode,
}

impl OutcomeTree {
    /// All leaves in deterministic (outcome 0 before 1) order.
    pub fn leaves(&self) -> Vec<&OutcomeNode> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a OutcomeNode, out: &mut Vec<&'a OutcomeNode>) {
            if node.is_leaf() {
                out.push(node);
            } else {
                for (_, child) in &node.children {
                    walk(child, out);
                }
            }
        }
        walk(&self.root, &mut out);
        out
    }

    /// Sum of all leaf probabilities (should be 1 up to pruning).
    pub fn total_leaf_probability(&self) -> f64 {
        self.leaves().iter().map(|l| l.probability).sum()
    }

    /// Probability mass on ordinary (non-rejected, non-pruned) leaves
    /// matching `accept`.
    pub fn accepted_probability<F>(&self, mut accept: F) -> f64
    where
        F: FnMut(&OutcomeNode) -> bool,
    {
        self.leaves()
            .iter()
            .filter(|l| l.flag == BranchFlag::Normal && accept(l))
            .map(|l| l.probability)
            .sum()
    }

    /// JSON rendering with nested `{record, prob, children}` nodes; state
    /// payloads are included only when `with_states` is set.
    pub fn to_json(&self, with_states: bool) -> serde_json::Value {
        fn node_json(node: &OutcomeNode, with_states: bool) -> serde_json::Value {
            let mut children = serde_json::Map::new();
            for (outcome, child) in &node.children {
                children.insert(
                    if *outcome { "1" } else { "0" }.to_string(),
                    node_json(child, with_states),
                );
            }
            let mut map = serde_json::Map::new();
            map.insert("record".into(), serde_json::json!(node.record.to_string()));
            map.insert("prob".into(), serde_json::json!(node.probability));
            if node.flag != BranchFlag::Normal {
                map.insert(
                    "flag".into(),
                    serde_json::json!(match node.flag {
                        BranchFlag::Rejected => "rejected",
                        BranchFlag::Pruned => "pruned",
                        BranchFlag::Normal => unreachable!(),
                    }),
                );
            }
            if with_states {
                map.insert(
                    "state".into(),
                    serde_json::to_value(&node.state).expect("state serializes"),
                );
            }
            if !children.is_empty() {
                map.insert("children".into(), serde_json::Value::Object(children));
            }
            serde_json::Value::Object(map)
        }
        node_json(&self.root, with_states)
    }
}

/// Expands every measurement outcome of `program` from |0…0⟩.
pub fn enumerate_branches(program: &Program, config: &SimConfig) -> Result<OutcomeTree> {
    enumerate_branches_from(program, &StateVector::zero(program.num_qubits), config)
}

/// As `enumerate_branches`, from a caller-supplied initial state.
pub fn enumerate_branches_from(
    program: &Program,
    initial: &StateVector,
    config: &SimConfig,
) -> Result<OutcomeTree> {
    check_caps(program, initial, config)?;
    let measurements = program.measurement_count();
    if measurements > config.branch_cap {
        return Err(Error::BranchCapExceeded {
            measurements,
            cap: config.branch_cap,
        });
    }
    let root = expand(
        program,
        config,
        initial.amplitudes().to_vec(),
        ClassicalRecord::unset(program.num_cbits),
        1.0,
        0,
    )?;
    Ok(OutcomeTree { root })
}

fn expand(
    program: &Program,
    config: &SimConfig,
    mut amps: Vec<Complex64>,
    record: ClassicalRecord,
    probability: f64,
    mut pc: usize,
) -> Result<OutcomeNode> {
    let n = program.num_qubits;
    while pc < program.instructions.len() {
        match &program.instructions[pc] {
            Instruction::Gate(g) => apply_gate_in_place(&mut amps, n, g),
            Instruction::CondGate { cbit, value, gate } => {
                let bit = record.get(*cbit).ok_or(Error::UnsetClassicalBit(*cbit))?;
                if bit == *value {
                    apply_gate_in_place(&mut amps, n, gate);
                }
            }
            Instruction::Measure { qubit, cbit } => {
                let state = StateVector::from_raw(amps.clone());
                let mut children = Vec::new();
                for outcome in [false, true] {
                    let mut child_amps = amps.clone();
                    let mass = collapse_in_place(&mut child_amps, n, *qubit, outcome);
                    if mass == 0.0 {
                        continue;
                    }
                    let child_prob = probability * mass;
                    let mut child_record = record.clone();
                    child_record.set(*cbit, outcome);
                    if child_prob < config.prune_threshold {
                        children.push((
                            outcome,
                            OutcomeNode {
                                record: child_record,
                                probability: child_prob,
                                state: StateVector::from_raw(child_amps),
                                children: Vec::new(),
                                flag: BranchFlag::Pruned,
                            },
                        ));
                        continue;
                    }
                    let child = expand(
                        program,
                        config,
                        child_amps,
                        child_record,
                        child_prob,
                        pc + 1,
                    )?;
                    children.push((outcome, child));
                }
                return Ok(OutcomeNode {
                    record,
                    probability,
                    state,
                    children,
                    flag: BranchFlag::Normal,
                });
            }
            Instruction::Postselect { cbit, value } => {
                let bit = record.get(*cbit).ok_or(Error::UnsetClassicalBit(*cbit))?;
                if bit != *value {
                    return Ok(OutcomeNode {
                        record,
                        probability,
                        state: StateVector::from_raw(amps),
                        children: Vec::new(),
                        flag: BranchFlag::Rejected,
                    });
                }
            }
            Instruction::Halt => break,
        }
        pc += 1;
    }
    Ok(OutcomeNode {
        record,
        probability,
        state: StateVector::from_raw(amps),
        children: Vec::new(),
        flag: BranchFlag::Normal,
    })
}

/// Degree of nondeterminism of reaching an accepted leaf: −log2 of the
/// probability mass on ordinary leaves satisfying `accept`; +∞ when no such
/// leaf exists.
pub fn nondet_cost<F>(tree: &OutcomeTree, accept: F) -> f64
where
    F: FnMut(&OutcomeNode) -> bool,
{
    let p = tree.accepted_probability(accept);
    if p <= 0.0 {
        f64::INFINITY
    } else {
        // Accumulated masses can exceed 1 by an ulp; cost is never negative.
        (-p.log2()).max(0.0)
    }
}
