//! Experiment specs: validation, dispatch to the core modules, and report
//! assembly. Every experiment is a pure function of (spec, seed).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Value};

use qndlab_core::complexity::{full_complexity_report, GateSet};
use qndlab_core::hilbert::{DensityMatrix, StateVector};
use qndlab_core::qnd::{
    random_witness_search, solve_classical_nd, solve_total_qnd, EvalMode, QndConfig,
    RelationCircuit,
};
use qndlab_core::qram::GateKind;
use qndlab_core::random_source::{
    k_copy_density_exact, sample_haar_with_rng, sample_k_copy_source_indexed,
    sample_multiset_uniform_indexed, symmetric_projector_density, DEFAULT_VECTOR_CAP,
};
use qndlab_core::rng::{stream_rng, StreamDomain};
use qndlab_core::state_net::Net;

use crate::report::{CsvTable, ReportDoc};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    HaarMixed,
    KcopyExact,
    KcopySample,
    NetCoverage,
    Complexity,
    Qnd,
}

impl ExperimentKind {
    pub const ALL_NAMES: &'static str =
        "haar-mixed, kcopy-exact, kcopy-sample, net-coverage, complexity, qnd";

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::HaarMixed => "haar-mixed",
            ExperimentKind::KcopyExact => "kcopy-exact",
            ExperimentKind::KcopySample => "kcopy-sample",
            ExperimentKind::NetCoverage => "net-coverage",
            ExperimentKind::Complexity => "complexity",
            ExperimentKind::Qnd => "qnd",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "haar-mixed" => Ok(ExperimentKind::HaarMixed),
            "kcopy-exact" => Ok(ExperimentKind::KcopyExact),
            "kcopy-sample" => Ok(ExperimentKind::KcopySample),
            "net-coverage" => Ok(ExperimentKind::NetCoverage),
            "complexity" => Ok(ExperimentKind::Complexity),
            "qnd" => Ok(ExperimentKind::Qnd),
            other => Err(CliError::Validation(format!(
                "unknown kind `{other}`; expected one of: {}",
                Self::ALL_NAMES
            ))),
        }
    }
}

/// A validated experiment request.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Typed parameter access (field-level validation messages)
// ---------------------------------------------------------------------------

struct Params<'a> {
    kind: ExperimentKind,
    map: &'a BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    fn missing(&self, key: &str) -> CliError {
        CliError::Validation(format!(
            "missing required parameter `{key}` for kind {}",
            self.kind.name()
        ))
    }

    fn bad(&self, key: &str, value: &str, want: &str) -> CliError {
        CliError::Validation(format!(
            "parameter `{key}`: cannot parse `{value}` as {want}"
        ))
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(String::as_str)
    }

    fn req_usize(&self, key: &str) -> Result<usize, CliError> {
        let raw = self.raw(key).ok_or_else(|| self.missing(key))?;
        raw.parse().map_err(|_| self.bad(key, raw, "an integer"))
    }

    fn opt_usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.raw(key) {
            Some(raw) => raw.parse().map_err(|_| self.bad(key, raw, "an integer")),
            None => Ok(default),
        }
    }

    fn opt_f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            Some(raw) => raw.parse().map_err(|_| self.bad(key, raw, "a number")),
            None => Ok(default),
        }
    }

    fn req_list_f64(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.raw(key).ok_or_else(|| self.missing(key))?;
        raw.split(',')
            .map(|tok| {
                tok.trim()
                    .parse()
                    .map_err(|_| self.bad(key, tok, "a number"))
            })
            .collect()
    }

    fn req_list_usize(&self, key: &str) -> Result<Vec<usize>, CliError> {
        let raw = self.raw(key).ok_or_else(|| self.missing(key))?;
        raw.split(',')
            .map(|tok| {
                tok.trim()
                    .parse()
                    .map_err(|_| self.bad(key, tok, "an integer"))
            })
            .collect()
    }

    fn req_path(&self, key: &str) -> Result<PathBuf, CliError> {
        Ok(PathBuf::from(
            self.raw(key).ok_or_else(|| self.missing(key))?,
        ))
    }

    fn opt_str(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }
}

fn runtime(e: qndlab_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_state(path: &PathBuf) -> Result<StateVector, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read state file {path:?}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("state file {path:?} is invalid: {e}")))
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Validates the spec, runs the owning module, and assembles the report.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ReportDoc, CliError> {
    let params = Params {
        kind: spec.kind,
        map: &spec.params,
    };
    let started = Instant::now();
    let mut doc = match spec.kind {
        ExperimentKind::HaarMixed => haar_mixed(spec, &params)?,
        ExperimentKind::KcopyExact => kcopy_exact(spec, &params)?,
        ExperimentKind::KcopySample => kcopy_sample(spec, &params)?,
        ExperimentKind::NetCoverage => net_coverage(spec, &params)?,
        ExperimentKind::Complexity => complexity(spec, &params)?,
        ExperimentKind::Qnd => qnd(spec, &params)?,
    };
    doc.timing_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(doc)
}

fn haar_mixed(spec: &ExperimentSpec, params: &Params) -> Result<ReportDoc, CliError> {
    let n = params.req_usize("n")?;
    let samples = params.req_usize("samples")?;
    let shots = params.opt_usize("shots", 0)?;
    if n == 0 || n > 12 {
        return Err(CliError::Validation(format!(
            "parameter `n`: {n} outside 1..=12"
        )));
    }
    if samples == 0 {
        return Err(CliError::Validation(
            "parameter `samples`: must be positive".into(),
        ));
    }
    let dim = 1usize << n;

    // Ensemble average against I/d.
    let mut entries = vec![Complex64::ZERO; dim * dim];
    for i in 0..samples {
        let mut rng = stream_rng(spec.seed, StreamDomain::HaarState, i as u64);
        let psi = sample_haar_with_rng(dim, &mut rng).map_err(runtime)?;
        for (r, a) in psi.iter().enumerate() {
            for (c, b) in psi.iter().enumerate() {
                entries[r * dim + c] += a * b.conj();
            }
        }
    }
    let weight = 1.0 / samples as f64;
    for e in entries.iter_mut() {
        *e *= weight;
    }
    let rho = DensityMatrix::new(dim, entries).map_err(runtime)?;
    let max_dev = rho
        .max_abs_diff(&DensityMatrix::maximally_mixed(dim))
        .map_err(runtime)?;

    // Optional measurement statistics: each shot draws a fresh random state
    // and one classical outcome from its Born distribution.
    let mut result = json!({
        "n": n,
        "dim": dim,
        "samples": samples,
        "max_abs_deviation_from_maximally_mixed": max_dev,
    });
    if shots > 0 {
        let mut counts = vec![0u64; dim];
        for s in 0..shots {
            let mut rng = stream_rng(spec.seed, StreamDomain::HaarState, (samples + s) as u64);
            let psi = sample_haar_with_rng(dim, &mut rng).map_err(runtime)?;
            let u: f64 = rand::Rng::random(&mut rng);
            let mut acc = 0.0;
            let mut outcome = dim - 1;
            for (b, a) in psi.iter().enumerate() {
                acc += a.norm_sqr();
                if u < acc {
                    outcome = b;
                    break;
                }
            }
            counts[outcome] += 1;
        }
        let uniform = 1.0 / dim as f64;
        let tv: f64 = counts
            .iter()
            .map(|&c| (c as f64 / shots as f64 - uniform).abs())
            .sum::<f64>()
            / 2.0;
        result["shots"] = json!(shots);
        result["tv_to_uniform"] = json!(tv);
        result["counts"] = json!(counts);
    }
    Ok(ReportDoc::new(
        spec.kind.name(),
        spec.seed,
        params_json(spec),
        result,
    ))
}

fn kcopy_exact(spec: &ExperimentSpec, params: &Params) -> Result<ReportDoc, CliError> {
    let d = params.req_usize("d")?;
    let k = params.req_usize("k")?;
    validate_vector_dims(d, k)?;
    let rho = k_copy_density_exact(d, k).map_err(runtime)?;
    let projector = symmetric_projector_density(d, k).map_err(runtime)?;
    let agreement = rho.max_abs_diff(&projector).map_err(runtime)?;
    let trace_error = (rho.trace() - Complex64::ONE).norm();
    let result = json!({
        "d": d,
        "k": k,
        "dim": rho.dim(),
        "matrix": serde_json::to_value(&rho).expect("density serializes"),
        "projector_route_max_diff": agreement,
        "trace_error": trace_error,
    });
    Ok(ReportDoc::new(
        spec.kind.name(),
        spec.seed,
        params_json(spec),
        result,
    ))
}

fn kcopy_sample(spec: &ExperimentSpec, params: &Params) -> Result<ReportDoc, CliError> {
    let d = params.req_usize("d")?;
    let k = params.req_usize("k")?;
    let samples = params.req_usize("samples")?;
    if samples == 0 {
        return Err(CliError::Validation(
            "parameter `samples`: must be positive".into(),
        ));
    }
    let mode = params.opt_str("mode", "vector");
    let result = match mode.as_str() {
        "vector" => {
            validate_vector_dims(d, k)?;
            let exact = k_copy_density_exact(d, k).map_err(runtime)?;
            let dim = exact.dim();
            let mut entries = vec![Complex64::ZERO; dim * dim];
            for i in 0..samples {
                let block =
                    sample_k_copy_source_indexed(d, k, spec.seed, i as u64).map_err(runtime)?;
                let support: Vec<(usize, Complex64)> = block
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm_sqr() > 0.0)
                    .map(|(idx, &a)| (idx, a))
                    .collect();
                for &(r, ar) in &support {
                    for &(c, ac) in &support {
                        entries[r * dim + c] += ar * ac.conj();
                    }
                }
            }
            let weight = 1.0 / samples as f64;
            for e in entries.iter_mut() {
                *e *= weight;
            }
            let average = DensityMatrix::new(dim, entries).map_err(runtime)?;
            let dev = average.max_abs_diff(&exact).map_err(runtime)?;
            json!({
                "d": d,
                "k": k,
                "mode": "vector",
                "samples": samples,
                "max_abs_deviation_from_exact": dev,
            })
        }
        "labels" => {
            let mut distinct = std::collections::BTreeSet::new();
            let mut first_labels = Vec::new();
            for i in 0..samples {
                let label =
                    sample_multiset_uniform_indexed(d, k, spec.seed, i as u64).map_err(runtime)?;
                if first_labels.len() < 5 {
                    first_labels.push(serde_json::to_value(&label).expect("label serializes"));
                }
                distinct.insert(format!("{:?}", label.pairs()));
            }
            json!({
                "d": d,
                "k": k,
                "mode": "labels",
                "samples": samples,
                "distinct_labels_observed": distinct.len(),
                "first_labels": first_labels,
            })
        }
        other => {
            return Err(CliError::Validation(format!(
                "parameter `mode`: `{other}` is not `vector` or `labels`"
            )))
        }
    };
    Ok(ReportDoc::new(
        spec.kind.name(),
        spec.seed,
        params_json(spec),
        result,
    ))
}

fn validate_vector_dims(d: usize, k: usize) -> Result<(), CliError> {
    if d == 0 || k == 0 {
        return Err(CliError::Validation(
            "parameters `d` and `k` must be positive".into(),
        ));
    }
    let mut dim = 1usize;
    for _ in 0..k {
        dim = dim.saturating_mul(d);
        if dim > DEFAULT_VECTOR_CAP {
            return Err(CliError::Validation(format!(
                "d^k exceeds the vector cap {DEFAULT_VECTOR_CAP}; use mode=labels"
            )));
        }
    }
    Ok(())
}

fn net_coverage(spec: &ExperimentSpec, params: &Params) -> Result<ReportDoc, CliError> {
    let d = params.req_usize("d")?;
    let sizes = params.req_list_usize("net-size")?;
    let eps_list = params.req_list_f64("eps")?;
    let trials = params.opt_usize("trials", 10_000)?;
    if d == 0 {
        return Err(CliError::Validation(
            "parameter `d`: must be positive".into(),
        ));
    }
    if trials == 0 {
        return Err(CliError::Validation(
            "parameter `trials`: must be positive".into(),
        ));
    }
    for &eps in &eps_list {
        if eps < 0.0 {
            return Err(CliError::Validation(format!(
                "parameter `eps`: {eps} is negative"
            )));
        }
    }

    let mut rows_json = Vec::new();
    let mut rows_csv = Vec::new();
    for &m in &sizes {
        let net = Net::random(d, m, spec.seed).map_err(runtime)?;
        let radius = net
            .covering_radius_estimate(trials, spec.seed)
            .map_err(runtime)?;
        for &eps in &eps_list {
            let fraction = net
                .coverage_fraction(eps, trials, spec.seed)
                .map_err(runtime)?;
            rows_json.push(json!({
                "d": d,
                "M": m,
                "eps": eps,
                "trials": trials,
                "fraction": fraction,
                "radius_estimate": radius,
                "seed": spec.seed,
            }));
            rows_csv.push(vec![
                d.to_string(),
                m.to_string(),
                eps.to_string(),
                trials.to_string(),
                fraction.to_string(),
                radius.to_string(),
                spec.seed.to_string(),
            ]);
        }
    }
    let result = json!({ "rows": rows_json });
    let table = CsvTable {
        header: [
            "d",
            "M",
            "eps",
            "trials",
            "fraction",
            "radius_estimate",
            "seed",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows: rows_csv,
    };
    Ok(ReportDoc::new(spec.kind.name(), spec.seed, params_json(spec), result).with_table(table))
}

fn parse_gates(raw: &str) -> Result<Vec<GateKind>, CliError> {
    raw.split(',')
        .map(|tok| {
            let tok = tok.trim().to_ascii_lowercase();
            GateKind::from_str(&tok).map_err(|_| {
                CliError::Validation(format!("parameter `gates`: unknown gate `{tok}`"))
            })
        })
        .collect()
}

fn complexity(spec: &ExperimentSpec, params: &Params) -> Result<ReportDoc, CliError> {
    let target_path = params.req_path("target")?;
    let target = load_state(&target_path)?;
    let eps = params.opt_f64("eps", 1e-3)?;
    let max_len = params.opt_usize("max-len", 6)?;
    let max_meas = params.opt_usize("max-meas", 2)?;
    let kinds = parse_gates(&params.opt_str("gates", "h,t,cnot"))?;
    if eps <= 0.0 {
        return Err(CliError::Validation(
            "parameter `eps`: must be positive".into(),
        ));
    }
    let gs = GateSet::from_kinds(&kinds, target.num_qubits()).map_err(runtime)?;
    let report = full_complexity_report(&target, &gs, eps, max_len, max_meas).map_err(runtime)?;
    let mut result = serde_json::to_value(&report).expect("report serializes");
    // Wall time lives in the volatile top-level field, not the body.
    if let Some(stats) = result.get_mut("stats").and_then(Value::as_object_mut) {
        stats.remove("wall_time_ms");
    }
    Ok(ReportDoc::new(
        spec.kind.name(),
        spec.seed,
        params_json(spec),
        result,
    ))
}

fn qnd(spec: &ExperimentSpec, params: &Params) -> Result<ReportDoc, CliError> {
    let program_path = params.req_path("program")?;
    let text = std::fs::read_to_string(&program_path).map_err(|e| {
        CliError::Validation(format!("cannot read relation file {program_path:?}: {e}"))
    })?;
    let rel = RelationCircuit::parse(&text)
        .map_err(|e| CliError::Validation(format!("relation file {program_path:?}: {e}")))?;

    let eval = match params.raw("trials") {
        Some(raw) => {
            let trials = raw
                .parse()
                .map_err(|_| params.bad("trials", raw, "an integer"))?;
            EvalMode::Sampled { trials }
        }
        None => EvalMode::Exact,
    };
    let cfg = QndConfig {
        accept_threshold: params.opt_f64("accept-threshold", 0.75)?,
        reject_threshold: params.opt_f64("reject-threshold", 0.25)?,
        net_size: params.opt_usize("net-size", 64)?,
        eval,
        seed: spec.seed,
        sim: Default::default(),
    };

    let x = match params.raw("x-basis") {
        Some(bits) => {
            if bits.len() != rel.x_width() {
                return Err(CliError::Validation(format!(
                    "parameter `x-basis`: `{bits}` has {} bits, x register has {}",
                    bits.len(),
                    rel.x_width()
                )));
            }
            let index = usize::from_str_radix(bits, 2)
                .map_err(|_| params.bad("x-basis", bits, "a bit string"))?;
            StateVector::basis(rel.x_width(), index).map_err(runtime)?
        }
        None => StateVector::zero(rel.x_width()),
    };

    let mode = params.opt_str("mode", "total");
    let verdict = match mode.as_str() {
        "total" => solve_total_qnd(&rel, &x, &cfg).map_err(runtime)?,
        "classical" => solve_classical_nd(&rel, &x, rel.y_width(), &cfg).map_err(runtime)?,
        "random" => {
            let samples = params.opt_usize("samples", 16)?;
            random_witness_search(&rel, &x, samples, &cfg).map_err(runtime)?
        }
        other => {
            return Err(CliError::Validation(format!(
                "parameter `mode`: `{other}` is not `total`, `classical`, or `random`"
            )))
        }
    };
    let result = serde_json::to_value(&verdict).expect("verdict serializes");
    Ok(ReportDoc::new(
        spec.kind.name(),
        spec.seed,
        params_json(spec),
        result,
    ))
}

fn params_json(spec: &ExperimentSpec) -> Value {
    serde_json::to_value(&spec.params).expect("params serialize")
}
