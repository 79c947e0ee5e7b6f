//! Command handlers, generic over the scalar backend.

use std::collections::BTreeMap;
use std::path::Path;

use modectx::fock::{expand_in_context, norm_squared, product_state_from_ids, FockState};
use modectx::hardy::{hardy_search, HardyChain, Justification};
use modectx::modespace::{canonical_18, from_json, to_json, ModeHypergraph};
use modectx::scalar::Scalar;
use modectx::sic::sic_report;
use modectx::solver::{solve_parallel, SolveMode, Statistics};
use serde::Serialize;

use crate::out::{emit, ScalarRepr};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: malformed files, unknown ids, domain violations. Exit 2.
    Domain(String),
    /// Unexpected internal failure. Exit 1.
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

pub fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

/// Loads `canonical` or a mode-set JSON file.
pub fn load_modeset<S: Scalar>(spec: &str) -> Result<ModeHypergraph<S>, CliError> {
    if spec == "canonical" {
        return Ok(canonical_18());
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Domain(format!("modeset file `{spec}`: {e}")))?;
    from_json(&text).map_err(domain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StatsArg {
    Fermion,
    Boson,
}

impl From<StatsArg> for Statistics {
    fn from(s: StatsArg) -> Statistics {
        match s {
            StatsArg::Fermion => Statistics::Fermion,
            StatsArg::Boson => Statistics::Boson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Decide,
    Enumerate,
    Count,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> SolveMode {
        match m {
            ModeArg::Decide => SolveMode::Decide,
            ModeArg::Enumerate => SolveMode::EnumerateAll,
            ModeArg::Count => SolveMode::Count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StateKind {
    FermionPair,
    BosonPair,
    BosonN,
}

/// A state specification like `fermion-pair:v67,v69` or `boson-n:v16,3`.
pub struct StateSpec {
    pub kind: StateKind,
    pub modes: Vec<String>,
    pub n: u32,
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let (kind_str, rest) = text
            .split_once(':')
            .ok_or_else(|| CliError::Domain(format!("state `{text}`: expected kind:args")))?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        match kind_str {
            "fermion-pair" | "boson-pair" => {
                if parts.len() != 2 {
                    return Err(CliError::Domain(format!(
                        "state `{text}`: a pair needs exactly two mode ids"
                    )));
                }
                Ok(StateSpec {
                    kind: if kind_str == "fermion-pair" {
                        StateKind::FermionPair
                    } else {
                        StateKind::BosonPair
                    },
                    modes: parts.iter().map(|s| s.to_string()).collect(),
                    n: 2,
                })
            }
            "boson-n" => {
                if parts.len() != 2 {
                    return Err(CliError::Domain(format!(
                        "state `{text}`: boson-n needs mode,N"
                    )));
                }
                let n: u32 = parts[1]
                    .parse()
                    .map_err(|_| CliError::Domain(format!("state `{text}`: bad particle count")))?;
                if n == 0 {
                    return Err(CliError::Domain("particle count must be positive".into()));
                }
                Ok(StateSpec {
                    kind: StateKind::BosonN,
                    modes: vec![parts[0].to_string()],
                    n,
                })
            }
            other => Err(CliError::Domain(format!("unknown state kind `{other}`"))),
        }
    }

    pub fn build<S: Scalar>(&self, h: &ModeHypergraph<S>) -> Result<FockState<S>, CliError> {
        let ids: Vec<&str> = match self.kind {
            StateKind::FermionPair | StateKind::BosonPair => {
                self.modes.iter().map(String::as_str).collect()
            }
            StateKind::BosonN => vec![self.modes[0].as_str(); self.n as usize],
        };
        let stats = match self.kind {
            StateKind::FermionPair => Statistics::Fermion,
            _ => Statistics::Boson,
        };
        product_state_from_ids(h, &ids, stats).map_err(domain)
    }

    pub fn describe(&self) -> String {
        match self.kind {
            StateKind::FermionPair => format!("fermion-pair:{}", self.modes.join(",")),
            StateKind::BosonPair => format!("boson-pair:{}", self.modes.join(",")),
            StateKind::BosonN => format!("boson-n:{},{}", self.modes[0], self.n),
        }
    }
}

// --------------------------------------------------------------------------
// modeset
// --------------------------------------------------------------------------

#[derive(Serialize)]
struct ValidateReport {
    modeset: String,
    valid: bool,
    dim: usize,
    modes: usize,
    contexts: usize,
    incidences: usize,
    problems: Vec<String>,
}

pub fn cmd_modeset_validate<S: Scalar>(
    modeset: &str,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let h: ModeHypergraph<S> = load_modeset(modeset)?;
    let report = h.validate();
    let dto = ValidateReport {
        modeset: modeset.to_string(),
        valid: report.is_valid(),
        dim: report.dim,
        modes: report.modes,
        contexts: report.contexts,
        incidences: report.incidences,
        problems: report.problems.clone(),
    };
    emit(&dto, out).map_err(CliError::Internal)?;
    Ok(report.is_valid())
}

pub fn cmd_modeset_dump_canonical<S: Scalar>(out: Option<&Path>) -> Result<(), CliError> {
    let h: ModeHypergraph<S> = canonical_18();
    let json = to_json(&h);
    match out {
        Some(path) => {
            std::fs::write(path, json + "\n").map_err(|e| CliError::Internal(e.to_string()))
        }
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout(), "{json}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(|e| CliError::Internal(e.to_string())),
            }
        }
    }
}

// --------------------------------------------------------------------------
// solve
// --------------------------------------------------------------------------

#[derive(Serialize)]
struct CertificateDto {
    contexts: usize,
    particles: u32,
    statement: String,
}

#[derive(Serialize)]
struct SolveReport {
    modeset: String,
    dim: usize,
    particles: u32,
    statistics: String,
    mode: String,
    feasible: bool,
    certificate: Option<CertificateDto>,
    solutions: Option<Vec<BTreeMap<String, u32>>>,
    count: Option<String>,
}

pub fn cmd_solve<S: Scalar>(
    modeset: &str,
    particles: u32,
    stats: StatsArg,
    mode: ModeArg,
    jobs: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let h: ModeHypergraph<S> = load_modeset(modeset)?;
    let result = solve_parallel(&h, particles, stats.into(), mode.into(), jobs).map_err(domain)?;
    let report = SolveReport {
        modeset: modeset.to_string(),
        dim: h.dim,
        particles,
        statistics: format!("{:?}", Statistics::from(stats)).to_lowercase(),
        mode: format!("{mode:?}").to_lowercase(),
        feasible: result.feasible,
        certificate: result.certificate.map(|c| CertificateDto {
            contexts: c.contexts,
            particles: c.n_particles,
            statement: c.statement,
        }),
        solutions: result
            .solutions
            .map(|sols| sols.into_iter().map(|a| a.values).collect()),
        count: result.count.map(|c| c.to_string()),
    };
    emit(&report, out).map_err(CliError::Internal)
}

// --------------------------------------------------------------------------
// state / expand
// --------------------------------------------------------------------------

#[derive(Serialize)]
struct TermDto {
    coefficient: ScalarRepr,
    factors: Vec<String>,
}

#[derive(Serialize)]
struct StateReport {
    state: String,
    statistics: String,
    particles: u32,
    norm_squared: ScalarRepr,
    terms: Vec<TermDto>,
}

pub fn cmd_state<S: Scalar>(
    spec: &StateSpec,
    modeset: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let h: ModeHypergraph<S> = load_modeset(modeset)?;
    let state = spec.build(&h)?;
    let norm2 = norm_squared(&state).map_err(domain)?;
    let report = StateReport {
        state: spec.describe(),
        statistics: format!("{:?}", state.statistics).to_lowercase(),
        particles: state.n_particles,
        norm_squared: ScalarRepr::of(&norm2),
        terms: state
            .terms
            .iter()
            .map(|t| TermDto {
                coefficient: ScalarRepr::of(&t.coefficient),
                factors: t.factors.iter().map(|f| f.id.clone()).collect(),
            })
            .collect(),
    };
    emit(&report, out).map_err(CliError::Internal)
}

#[derive(Serialize)]
struct PatternDto {
    counts: BTreeMap<String, u32>,
    amplitude: ScalarRepr,
    probability: ScalarRepr,
}

#[derive(Serialize)]
struct ExpandReport {
    state: String,
    context: String,
    patterns: Vec<PatternDto>,
}

pub fn cmd_expand<S: Scalar>(
    spec: &StateSpec,
    context: &str,
    modeset: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let h: ModeHypergraph<S> = load_modeset(modeset)?;
    let state = spec.build(&h)?;
    let ctx = h.context(context).map_err(domain)?;
    let mode_ids: Vec<String> = ctx.modes.iter().map(|&m| h.modes[m].id.clone()).collect();
    let expansion = expand_in_context(&state, context, &h).map_err(domain)?;
    let patterns = expansion
        .into_iter()
        .map(|(p, a)| PatternDto {
            counts: mode_ids
                .iter()
                .cloned()
                .zip(p.counts.iter().copied())
                .collect(),
            probability: ScalarRepr::of(&a.mul(&a)),
            amplitude: ScalarRepr::of(&a),
        })
        .collect();
    let report = ExpandReport {
        state: spec.describe(),
        context: context.to_string(),
        patterns,
    };
    emit(&report, out).map_err(CliError::Internal)
}

// --------------------------------------------------------------------------
// hardy
// --------------------------------------------------------------------------

#[derive(Serialize)]
struct TriggerDto {
    context: String,
    pattern: BTreeMap<String, u32>,
    probability: ScalarRepr,
}

#[derive(Serialize)]
struct StepDto {
    context: String,
    assigned: BTreeMap<String, u32>,
    justification: Justification,
}

#[derive(Serialize)]
struct ChainDto {
    trigger: TriggerDto,
    steps: Vec<StepDto>,
    contradictions: Vec<String>,
    assignment: BTreeMap<String, u32>,
}

#[derive(Serialize)]
struct HardyReport {
    state: String,
    modeset: String,
    chains: Vec<ChainDto>,
}

fn chain_dto<S: Scalar>(chain: &HardyChain<S>) -> ChainDto {
    ChainDto {
        trigger: TriggerDto {
            context: chain.trigger.context_id.clone(),
            pattern: chain.trigger.pattern.clone(),
            probability: ScalarRepr::of(&chain.trigger.probability),
        },
        steps: chain
            .steps
            .iter()
            .map(|s| StepDto {
                context: s.context_id.clone(),
                assigned: s.assigned.clone(),
                justification: s.justification,
            })
            .collect(),
        contradictions: chain.contradictions.clone(),
        assignment: chain.assignment.values.clone(),
    }
}

pub fn cmd_hardy<S: Scalar>(
    spec: &StateSpec,
    modeset: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let h: ModeHypergraph<S> = load_modeset(modeset)?;
    let state = spec.build(&h)?;
    let chains = hardy_search(&state, &h).map_err(domain)?;
    let report = HardyReport {
        state: spec.describe(),
        modeset: modeset.to_string(),
        chains: chains.iter().map(chain_dto).collect(),
    };
    emit(&report, out).map_err(CliError::Internal)
}

// --------------------------------------------------------------------------
// sic
// --------------------------------------------------------------------------

#[derive(Serialize)]
struct SicDto {
    modeset: String,
    particles: u32,
    statistics: String,
    lambda: Option<ScalarRepr>,
    nc_bound: Option<u64>,
    quantum_value: Option<ScalarRepr>,
    violated: Option<bool>,
    assignments_exist: bool,
}

pub fn cmd_sic<S: Scalar>(
    modeset: &str,
    particles: u32,
    stats: StatsArg,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let h: ModeHypergraph<S> = load_modeset(modeset)?;
    let report = sic_report(&h, particles, stats.into()).map_err(domain)?;
    let dto = SicDto {
        modeset: modeset.to_string(),
        particles,
        statistics: format!("{:?}", Statistics::from(stats)).to_lowercase(),
        lambda: report.lambda.as_ref().map(ScalarRepr::of),
        nc_bound: report.nc_bound,
        quantum_value: report.quantum_value.as_ref().map(ScalarRepr::of),
        violated: report.violated,
        assignments_exist: report.assignments_exist,
    };
    emit(&dto, out).map_err(CliError::Internal)
}
