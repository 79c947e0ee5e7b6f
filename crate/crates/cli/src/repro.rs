//! The `reproduce-paper` command: runs every built-in analysis claim on the
//! exact backend and emits a pass/fail report with stable claim ids.

use modectx::fock::{amplitude, product_state_from_ids, transform_state, OccupationPattern};
use modectx::hardy::{propagate, support_table, Propagation};
use modectx::modespace::canonical_18;
use modectx::scalar::Radical;
use modectx::sic::{projector_sum, sic_report};
use modectx::solver::{hole_dual, is_valid_assignment, solve, SolveMode, Statistics};
use modectx::{Matrix, ModeHypergraph};
use serde::Serialize;

use crate::commands::CliError;
use crate::out::emit;

#[derive(Serialize)]
pub struct Claim {
    pub id: String,
    pub description: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct ReproReport {
    pub claims: Vec<Claim>,
    pub overall: bool,
}

struct Recorder {
    claims: Vec<Claim>,
}

impl Recorder {
    fn claim(&mut self, id: &str, description: &str, expected: &str, computed: String) {
        let pass = expected == computed;
        self.claims.push(Claim {
            id: id.to_string(),
            description: description.to_string(),
            expected: expected.to_string(),
            computed,
            pass,
        });
    }
}

fn pattern(ctx: &str, counts: &[u32]) -> OccupationPattern {
    OccupationPattern {
        context_id: ctx.to_string(),
        counts: counts.to_vec(),
    }
}

fn chain_summary(
    h: &ModeHypergraph<Radical>,
    state: &modectx::FockState<Radical>,
    trigger_ctx: &str,
    trigger_counts: &[u32],
) -> Result<String, CliError> {
    let table = support_table(state, h).map_err(crate::commands::domain)?;
    let trig = pattern(trigger_ctx, trigger_counts);
    match propagate(
        &table,
        trigger_ctx,
        &trig,
        h,
        state.n_particles,
        state.statistics,
    )
    .map_err(crate::commands::domain)?
    {
        Propagation::Contradiction(chain) => Ok(format!(
            "contradiction at {} with trigger probability {}",
            chain.contradictions.join(","),
            chain.trigger.probability.literal()
        )),
        Propagation::Fixpoint(_) => Ok("no contradiction".to_string()),
    }
}

pub fn cmd_reproduce_paper(out: Option<&std::path::Path>) -> Result<bool, CliError> {
    let h: ModeHypergraph<Radical> = canonical_18();
    let mut rec = Recorder { claims: Vec::new() };

    // structural validity
    let v = h.validate();
    rec.claim(
        "canonical-valid",
        "the 18-mode set passes all structural checks",
        "valid, 18 modes / 9 contexts / 36 incidences",
        if v.is_valid() {
            format!(
                "valid, {} modes / {} contexts / {} incidences",
                v.modes, v.contexts, v.incidences
            )
        } else {
            format!("invalid: {:?}", v.problems)
        },
    );

    // fermion classification over all particle numbers
    for (n, expected) in [
        (0u32, "one solution"),
        (1, "infeasible with parity certificate"),
        (2, "feasible"),
        (3, "infeasible with parity certificate"),
        (4, "one solution"),
    ] {
        let r = solve(&h, n, Statistics::Fermion, SolveMode::EnumerateAll)
            .map_err(crate::commands::domain)?;
        let computed = if !r.feasible && r.certificate.is_some() {
            "infeasible with parity certificate".to_string()
        } else if !r.feasible {
            "infeasible".to_string()
        } else {
            let sols = r.solutions.as_ref().unwrap();
            if sols.len() == 1 {
                "one solution".to_string()
            } else {
                "feasible".to_string()
            }
        };
        rec.claim(
            &format!("fermion-n{n}"),
            &format!("non-contextual assignability for {n} fermions"),
            expected,
            computed,
        );
    }

    // boson classification for small particle numbers
    for (n, expected) in [
        (0u32, "one solution"),
        (1, "infeasible with parity certificate"),
        (2, "feasible"),
    ] {
        let r = solve(&h, n, Statistics::Boson, SolveMode::EnumerateAll)
            .map_err(crate::commands::domain)?;
        let computed = if !r.feasible && r.certificate.is_some() {
            "infeasible with parity certificate".to_string()
        } else if !r.feasible {
            "infeasible".to_string()
        } else {
            let sols = r.solutions.as_ref().unwrap();
            if sols.len() == 1 {
                "one solution".to_string()
            } else {
                "feasible".to_string()
            }
        };
        rec.claim(
            &format!("boson-n{n}"),
            &format!("non-contextual assignability for {n} bosons"),
            expected,
            computed,
        );
    }

    // two-fermion assignments: totals, hole duality, and validity for bosons
    let fermi = solve(&h, 2, Statistics::Fermion, SolveMode::EnumerateAll)
        .map_err(crate::commands::domain)?
        .solutions
        .unwrap();
    rec.claim(
        "fermion-n2-totals",
        "every two-fermion assignment places 9 particles and 9 holes",
        "all totals 9",
        if fermi.iter().all(|a| a.total() == 9) {
            "all totals 9".to_string()
        } else {
            "total differs from 9".to_string()
        },
    );
    let duals_ok = fermi.iter().all(|a| {
        hole_dual(a, &h)
            .map(|d| fermi.iter().any(|x| x.values == d.values))
            .unwrap_or(false)
    });
    rec.claim(
        "fermion-n2-hole-duality",
        "the particle-hole dual of every two-fermion assignment is again an assignment",
        "closed under duality",
        if duals_ok {
            "closed under duality"
        } else {
            "not closed"
        }
        .to_string(),
    );
    let describe_bosons = fermi
        .iter()
        .all(|a| is_valid_assignment(a, &h, Statistics::Boson));
    rec.claim(
        "fermion-assignments-describe-bosons",
        "two-fermion assignments are also valid two-boson assignments",
        "contained",
        if describe_bosons {
            "contained"
        } else {
            "not contained"
        }
        .to_string(),
    );

    // the simple state-independent inequality
    let (_, lambda) = projector_sum(&h).map_err(crate::commands::domain)?;
    rec.claim(
        "sic-lambda",
        "the projector sum is proportional to the identity",
        "9/2",
        lambda.map(|l| l.literal()).unwrap_or_else(|| "none".into()),
    );
    for stats in [Statistics::Fermion, Statistics::Boson] {
        let label = format!("{stats:?}").to_lowercase();
        let report = sic_report(&h, 2, stats).map_err(crate::commands::domain)?;
        rec.claim(
            &format!("sic-{label}-n2"),
            &format!("two-{label} inequality: bound 9, quantum value 9, not violated"),
            "bound 9, value 9, violated false",
            format!(
                "bound {}, value {}, violated {}",
                report
                    .nc_bound
                    .map(|b| b.to_string())
                    .unwrap_or_else(|| "none".into()),
                report
                    .quantum_value
                    .map(|q| q.literal())
                    .unwrap_or_else(|| "none".into()),
                report
                    .violated
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "none".into()),
            ),
        );
    }

    // state-dependent chains
    let fermion_pair = product_state_from_ids(&h, &["v67", "v69"], Statistics::Fermion)
        .map_err(crate::commands::domain)?;
    let a = amplitude(&fermion_pair, &pattern("C3", &[0, 1, 1, 0]), &h)
        .map_err(crate::commands::domain)?;
    rec.claim(
        "fermion-trigger-probability",
        "probability of finding the fermion pair in v37 and v39 when measuring context 3",
        "1/16",
        a.mul(&a).literal(),
    );
    rec.claim(
        "fermion-hardy-chain",
        "fermion-pair trigger propagates to contradictions at C2 and C4",
        "contradiction at C2,C4 with trigger probability 1/16",
        chain_summary(&h, &fermion_pair, "C3", &[0, 1, 1, 0])?,
    );

    for n in 2..=4u32 {
        let state = product_state_from_ids(&h, &vec!["v16"; n as usize], Statistics::Boson)
            .map_err(crate::commands::domain)?;
        let mut counts = vec![0u32; 4];
        counts[0] = n;
        let a = amplitude(&state, &pattern("C4", &counts), &h).map_err(crate::commands::domain)?;
        let denom = 4i64.pow(n);
        rec.claim(
            &format!("boson-n{n}-trigger-probability"),
            &format!("probability of all {n} bosons in v45 when measuring context 4"),
            &format!("1/{denom}"),
            a.mul(&a).literal(),
        );
        rec.claim(
            &format!("boson-n{n}-hardy-chain"),
            &format!("{n}-boson trigger propagates to a contradiction at C9"),
            &format!("contradiction at C9 with trigger probability 1/{denom}"),
            chain_summary(&h, &state, "C4", &counts)?,
        );
    }

    // unitary covariance spot check
    let u: Matrix<Radical> = Matrix::random_orthogonal(4, 2024);
    let th = h.apply_transform(&u).map_err(crate::commands::domain)?;
    let ts = transform_state(&fermion_pair, &u).map_err(crate::commands::domain)?;
    rec.claim(
        "unitary-covariance",
        "an exact orthogonal transform of state and modes preserves the chain",
        "contradiction at C2,C4 with trigger probability 1/16",
        chain_summary(&th, &ts, "C3", &[0, 1, 1, 0])?,
    );

    let overall = rec.claims.iter().all(|c| c.pass);
    let report = ReproReport {
        claims: rec.claims,
        overall,
    };
    emit(&report, out).map_err(CliError::Internal)?;
    Ok(overall)
}
