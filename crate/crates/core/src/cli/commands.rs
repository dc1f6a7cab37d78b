use rand::Rng;
use serde_json::{json, Value};

use crate::ando::{ando_tuple, verify_delta_isometries, verify_halmos};
use crate::chartriple::{
    characteristic_triple, check_admissible, coincide, delta_grid, theta_truncation, von_neumann_sample, CharTriple, Verdict,
};
use crate::error::Result;
use crate::fundamental::{adjoint_fundamental_ops, cross_identities, fundamental_ops, FundamentalOps};
use crate::hardy::{bcl_induced_pair, check_bcl_necessary, schaffer_lift, symbol_commutator, BclTuple};
use crate::lifts::{douglas_model, functional_model, noncommutative_lift, pcc_lift, pcc_uniqueness_check};
use crate::numkit::{spectral_norm, ComplexMatrix};
use crate::report::{Check, Observation};
use crate::tuples::generate::{generate, random_projection, random_unitary, rng_from_seed};
use crate::tuples::{canonical_decomposition, ContractionTuple, GeneratorKind};

use super::file::{encode, parse_tuple_file, LoadedTuple, TupleFile};
use super::{CliError, Command, LiftKind, Outcome};

/// Parsed inputs of a command.
pub struct Prepared {
    pub inputs: Vec<LoadedTuple>,
    pub file_seed: Option<u64>,
}

pub fn prepare(command: &Command) -> std::result::Result<Prepared, CliError> {
    let paths: Vec<&String> = match command {
        Command::Validate { file }
        | Command::Decompose { file }
        | Command::Fundamental { file }
        | Command::Ando { file }
        | Command::Lift { file, .. }
        | Command::Theta { file, .. }
        | Command::Triple { file }
        | Command::CheckAdmissible { file, .. }
        | Command::VnSample { file, .. } => vec![file],
        Command::Equiv { first, second } => vec![first, second],
        Command::Gen { .. } | Command::Selftest { .. } => Vec::new(),
    };
    let inputs = paths.into_iter().map(|p| parse_tuple_file(p)).collect::<std::result::Result<Vec<_>, _>>()?;
    let file_seed = inputs.first().and_then(|l| l.seed);
    Ok(Prepared { inputs, file_seed })
}

pub fn generate_file(kind: GeneratorKind, dim: usize, d: usize, seed: u64) -> Result<String> {
    let tuple = generate(kind, dim, d, seed, Default::default())?;
    Ok(serde_json::to_string_pretty(&TupleFile::from_tuple(&tuple, Some(seed))).expect("tuple files serialize") + "\n")
}

pub fn execute(command: &Command, prepared: &Prepared, seed: u64) -> Result<Outcome> {
    let tuple = || &prepared.inputs[0].tuple;
    match command {
        Command::Validate { .. } => Ok(validate_outcome(tuple())),
        Command::Decompose { .. } => decompose(tuple()),
        Command::Fundamental { .. } => fundamental(tuple()),
        Command::Ando { .. } => ando(tuple()),
        Command::Lift { kind, degree, .. } => lift(tuple(), *kind, *degree),
        Command::Theta { grid, .. } => theta(tuple(), *grid, seed),
        Command::Triple { .. } => triple(tuple(), seed),
        Command::Equiv { .. } => equiv(&prepared.inputs[0].tuple, &prepared.inputs[1].tuple, seed),
        Command::CheckAdmissible { perturb, .. } => admissible(tuple(), *perturb, seed),
        Command::VnSample { trials, max_degree, .. } => {
            let report = von_neumann_sample(tuple(), *trials, *max_degree, seed);
            Ok(Outcome { checks: report.checks, observations: report.observations, ..Default::default() })
        }
        Command::Selftest { instances } => Ok(selftest_report(*instances, seed)),
        Command::Gen { .. } => unreachable!("gen writes a tuple file instead of a report"),
    }
}

fn encode_all(ops: &[ComplexMatrix]) -> Value {
    json!(ops.iter().map(encode).collect::<Vec<_>>())
}

fn validate_outcome(t: &ContractionTuple) -> Outcome {
    let observations = vec![
        Observation::new("dimension", t.dim() as f64),
        Observation::new("operators", t.d() as f64),
        Observation::new("largest norm", t.scale()),
    ];
    Outcome { checks: vec![Check::flag("tuple is a commuting contraction tuple", true)], observations, ..Default::default() }
}

fn decompose(t: &ContractionTuple) -> Result<Outcome> {
    let dec = canonical_decomposition(t)?;
    let observations = vec![
        Observation::new("unitary part dimension", dec.unitary_basis.rank() as f64),
        Observation::new("c.n.u. part dimension", dec.cnu_basis.rank() as f64),
        Observation::new("eigenvalues near the unit circle", dec.near_boundary.len() as f64),
    ];
    let data = json!({
        "change_of_basis": encode(&dec.change_of_basis),
        "unitary_part": encode_all(dec.unitary_part.ops()),
        "cnu_part": encode_all(dec.cnu_part.ops()),
    });
    Ok(Outcome { checks: dec.checks(t.tol()), observations, data, degree: None })
}

fn pairs_json(ops: &FundamentalOps) -> Value {
    json!(ops.pairs.iter().map(|p| json!({"first": encode(&p.first), "second": encode(&p.second)})).collect::<Vec<_>>())
}

fn fundamental(t: &ContractionTuple) -> Result<Outcome> {
    let f = fundamental_ops(t)?;
    let g = adjoint_fundamental_ops(t)?;
    let mut checks = f.checks.clone();
    checks.extend(g.checks.iter().map(|c| Check { name: format!("adjoint: {}", c.name), ..c.clone() }));
    checks.extend(cross_identities(t, &f, &g));
    let observations = vec![
        Observation::new("defect rank", f.rank() as f64),
        Observation::new("adjoint defect rank", g.rank() as f64),
    ];
    let data = json!({"fundamental": pairs_json(&f), "adjoint_fundamental": pairs_json(&g)});
    Ok(Outcome { checks, observations, data, degree: None })
}

fn ando(t: &ContractionTuple) -> Result<Outcome> {
    let a = ando_tuple(t)?;
    let f = fundamental_ops(t)?;
    let mut checks = a.checks.clone();
    checks.extend(verify_halmos(t, &a, &f));
    checks.extend(verify_delta_isometries(t, &a)?);
    let data = json!({
        "lambda": encode_all(&a.lambda),
        "unitaries": encode_all(&a.unitaries),
        "tau": encode_all(&a.tau),
    });
    Ok(Outcome { checks, observations: vec![Observation::new("dilation space dimension", a.dim() as f64)], data, degree: None })
}

/// `(P_j, U_j, W_j)` of the noncommutative lift, conjugated by `τ_j`.
fn lift_bcl_data(t: &ContractionTuple) -> Result<(BclTuple, Vec<Observation>)> {
    let lift = noncommutative_lift(t)?;
    let ando = &lift.ando_star;
    let mut projections = Vec::new();
    let mut unitaries = Vec::new();
    for j in 0..t.d() {
        let tau = &ando.tau[j];
        projections.push(tau * ando.projection(j) * tau.adjoint());
        unitaries.push(tau * &ando.unitaries[j] * tau.adjoint());
    }
    let bcl = BclTuple::new(projections, unitaries, lift.douglas.w_partial.clone(), t.tol())?;
    Ok((bcl, lift.commutators))
}

fn lift(t: &ContractionTuple, kind: LiftKind, degree: usize) -> Result<Outcome> {
    match kind {
        LiftKind::Schaffer => {
            let product = t.product();
            let s = schaffer_lift(&product, degree, t.tol())?;
            let observations = vec![Observation::new("defect rank", s.defect_rank as f64)];
            Ok(Outcome { checks: s.checks(&product), observations, data: json!({"matrix": encode(&s.matrix)}), degree: Some(degree) })
        }
        LiftKind::Douglas => {
            let m = douglas_model(t)?;
            let observations = vec![
                Observation::new("truncation tail", m.tail_bound),
                Observation::new("defect rank of T*", m.defect_rank() as f64),
                Observation::new("unitary part dimension", m.unitary_dim() as f64),
            ];
            let data = json!({"w_partial": encode_all(&m.w_partial), "w_product": encode(&m.w_product)});
            Ok(Outcome { checks: m.checks.clone(), observations, data, degree: Some(m.degree) })
        }
        LiftKind::Bcl => {
            let (bcl, mut observations) = lift_bcl_data(t)?;
            let model = bcl.model(8);
            for c in check_bcl_necessary(&bcl, t.tol()) {
                observations.push(Observation::new(format!("necessary condition residual: {}", c.name), c.residual));
            }
            for i in 0..model.len() {
                for j in i + 1..model.len() {
                    observations.push(Observation::new(format!("model commutator {} {}", i + 1, j + 1), symbol_commutator(&model[i], &model[j])));
                }
            }
            let data = json!({"projections": encode_all(&bcl.projections), "unitaries": encode_all(&bcl.unitaries)});
            Ok(Outcome { checks: vec![Check::flag("BCL data are projections and unitaries", true)], observations, data, degree: None })
        }
        LiftKind::Noncom => {
            let l = noncommutative_lift(t)?;
            Ok(Outcome { checks: l.checks.clone(), observations: l.commutators.clone(), data: Value::Null, degree: Some(l.douglas.degree) })
        }
        LiftKind::Pcc => {
            let l = pcc_lift(t)?;
            let mut checks = l.checks.clone();
            checks.extend(pcc_uniqueness_check(t, &l)?);
            let observations = vec![
                Observation::new("Krylov degree", l.krylov_degree as f64),
                Observation::new("truncation tail", l.douglas.tail_bound),
            ];
            let data = json!({
                "constant": encode_all(&l.contractions.iter().map(|s| s.constant.clone()).collect::<Vec<_>>()),
                "linear": encode_all(&l.contractions.iter().map(|s| s.linear.clone()).collect::<Vec<_>>()),
            });
            Ok(Outcome { checks, observations, data, degree: Some(l.douglas.degree) })
        }
        LiftKind::Model => {
            let m = functional_model(t)?;
            let data = json!({"model": encode_all(m.model.ops()), "certificate": encode(&m.certificate)});
            Ok(Outcome { checks: m.checks.clone(), observations: Vec::new(), data, degree: Some(m.degree) })
        }
    }
}

fn theta(t: &ContractionTuple, grid: usize, seed: u64) -> Result<Outcome> {
    let triple = characteristic_triple(t)?;
    let sampler = &triple.theta;
    let delta = delta_grid(sampler, grid)?;
    let mut checks = sampler.checks(seed)?;
    checks.push(Check::new("boundary defect vanishes", delta.max(), 1e-8));
    let table: Vec<Value> = delta
        .points
        .iter()
        .zip(&delta.values)
        .map(|(z, v)| json!([[z.re, z.im], v]))
        .collect();
    let order = triple.comparison_order();
    let taylor: Vec<ComplexMatrix> = (0..=order).map(|n| sampler.coefficient(n)).collect();
    let observations = vec![
        Observation::new("largest raw boundary defect", delta.max_raw()),
        Observation::new("stored Taylor coefficients", sampler.taylor.len() as f64),
    ];
    Ok(Outcome { checks, observations, data: json!({"delta": table, "taylor": encode_all(&taylor)}), degree: None })
}

fn triple_checks(triple: &CharTriple, seed: u64) -> Result<Vec<Check>> {
    let mut checks = triple.theta.checks(seed)?;
    checks.push(Check::new("boundary defect vanishes", delta_grid(&triple.theta, 64)?.max(), 1e-8));
    let w = &triple.unitary_tuple;
    for i in 0..w.len() {
        checks.push(Check::new(format!("W_{} unitary", i + 1), crate::numkit::unitarity_residual(&w[i]), 1e-8));
        for j in i + 1..w.len() {
            checks.push(Check::new(format!("W_{} W_{} commute", i + 1, j + 1), spectral_norm(&(&w[i] * &w[j] - &w[j] * &w[i])), 1e-8));
        }
    }
    Ok(checks)
}

fn triple(t: &ContractionTuple, seed: u64) -> Result<Outcome> {
    let triple = characteristic_triple(t)?;
    let checks = triple_checks(&triple, seed)?;
    let taylor: Vec<ComplexMatrix> = (0..=triple.comparison_order()).map(|n| triple.theta.coefficient(n)).collect();
    let data = json!({
        "g": triple.g.iter().map(|(a, b)| json!({"first": encode(a), "second": encode(b)})).collect::<Vec<_>>(),
        "unitary_tuple": encode_all(&triple.unitary_tuple),
        "taylor": encode_all(&taylor),
    });
    let observations = vec![
        Observation::new("c.n.u. dimension", triple.cnu_dim as f64),
        Observation::new("unitary dimension", triple.unitary_dim() as f64),
    ];
    Ok(Outcome { checks, observations, data, degree: None })
}

fn equiv(a: &ContractionTuple, b: &ContractionTuple, seed: u64) -> Result<Outcome> {
    let ta = characteristic_triple(a)?;
    let tb = characteristic_triple(b)?;
    let result = coincide(&ta, &tb, seed)?;
    let verdict = match &result.verdict {
        Verdict::Coincide => "coincide".to_string(),
        Verdict::Refuted(reason) => format!("refuted: {reason}"),
        Verdict::Inconclusive => "inconclusive".to_string(),
    };
    let check = match result.verdict {
        Verdict::Coincide => Check::new("coincidence certificate residual", result.residual, crate::chartriple::COINCIDENCE_TOL),
        _ => Check::flag("characteristic triples coincide", false),
    };
    let certificate = result.certificate.as_ref().map(|c| {
        json!({"u": encode(&c.u), "u_star": encode(&c.u_star), "unitary_map": encode(&c.unitary_map)})
    });
    let data = json!({"verdict": verdict, "certificate": certificate});
    Ok(Outcome { checks: vec![check], observations: vec![Observation::new("search residual", result.residual)], data, degree: None })
}

fn admissible(t: &ContractionTuple, perturb: Option<f64>, seed: u64) -> Result<Outcome> {
    let triple = characteristic_triple(t)?;
    let mut g = triple.g.clone();
    if let Some(size) = perturb {
        let mut rng = rng_from_seed(seed);
        for (first, _) in g.iter_mut() {
            let n = first.nrows();
            let noise = crate::tuples::generate::complex_gaussian(n, n, &mut rng);
            let norm = spectral_norm(&noise);
            if norm > 0.0 {
                *first += noise * crate::numkit::c(size / norm, 0.0);
            }
        }
    }
    let degree = theta_truncation(&triple.theta, 1e-10);
    let report = check_admissible(&g, &triple.theta, degree, t.tol())?;
    let mut observations = report.observations.clone();
    observations.push(Observation::new("unitary part dimension", triple.unitary_dim() as f64));
    let data = json!({"model": encode_all(&report.model)});
    Ok(Outcome { checks: report.checks, observations, data, degree: Some(report.degree) })
}

/// Worst check of a suite (by residual over tolerance), carrying the suite's
/// overall verdict.
fn summarize(label: &str, checks: Result<Vec<Check>>) -> Check {
    let checks = match checks {
        Ok(c) => c,
        Err(e) => return Check::flag(format!("{label}: {e}"), false),
    };
    let ratio = |c: &Check| {
        if c.pass {
            if c.tolerance > 0.0 { c.residual / c.tolerance } else { 0.0 }
        } else {
            f64::INFINITY
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    match checks.iter().max_by(|a, b| ratio(a).total_cmp(&ratio(b))) {
        Some(worst) => Check { name: format!("{label}: {}", worst.name), residual: worst.residual, tolerance: worst.tolerance, pass },
        None => Check::flag(format!("{label}: no checks"), true),
    }
}

fn instance_suites(t: &ContractionTuple, seed: u64) -> Vec<(&'static str, Result<Vec<Check>>)> {
    let fundamental = (|| {
        let f = fundamental_ops(t)?;
        let g = adjoint_fundamental_ops(t)?;
        let mut checks = f.checks.clone();
        checks.extend(g.checks.clone());
        checks.extend(cross_identities(t, &f, &g));
        let a = ando_tuple(t)?;
        checks.extend(a.checks.clone());
        checks.extend(verify_halmos(t, &a, &f));
        checks.extend(verify_delta_isometries(t, &a)?);
        Ok(checks)
    })();
    let decomposition = canonical_decomposition(t).map(|d| d.checks(t.tol()));
    let lifts = (|| {
        let l = pcc_lift(t)?;
        let mut checks = l.checks.clone();
        checks.extend(pcc_uniqueness_check(t, &l)?);
        checks.extend(noncommutative_lift(t)?.checks);
        Ok(checks)
    })();
    let triple = (|| {
        let a = characteristic_triple(t)?;
        let mut checks = triple_checks(&a, seed)?;
        let mut rng = rng_from_seed(seed ^ 0x5eed);
        let b = characteristic_triple(&t.conjugate(&random_unitary(t.dim(), &mut rng)))?;
        let result = coincide(&a, &b, seed)?;
        checks.push(Check::new("coincides with a unitary conjugate", result.residual, crate::chartriple::COINCIDENCE_TOL));
        Ok(checks)
    })();
    let mut suites = vec![
        ("fundamental and Andô", fundamental),
        ("canonical decomposition", decomposition),
        ("lifts", lifts),
        ("characteristic triple", triple),
    ];
    if t.d() <= 2 {
        suites.push(("von Neumann", Ok(von_neumann_sample(t, 10, 2, seed).checks)));
    }
    suites
}

/// Runs every suite on `instances` seeded tuples plus BCL pairs.
pub fn selftest_report(instances: usize, seed: u64) -> Outcome {
    let mut checks = Vec::new();
    for i in 0..instances {
        let s = seed.wrapping_add(i as u64);
        let kind = GeneratorKind::ALL[i % GeneratorKind::ALL.len()];
        let d = 2 + i % 3;
        let dim = 1 + (i / 3) % 4;
        let label = format!("seed {s} ({kind}, dim {dim}, d {d})");
        match generate(kind, dim, d, s, Default::default()) {
            Ok(t) => {
                for (suite, result) in instance_suites(&t, s) {
                    checks.push(summarize(&format!("{label} {suite}"), result));
                }
            }
            Err(e) => checks.push(Check::flag(format!("{label}: {e}"), false)),
        }
        let mut rng = rng_from_seed(s ^ 0xbc1);
        let f = 1 + i % 4;
        let u = random_unitary(f, &mut rng);
        let p = random_projection(f, rng.random_range(0..=f), &mut rng);
        let bcl = (|| {
            let pair = bcl_induced_pair(&u, &p, &Default::default())?;
            let model = pair.model(4);
            let mut c = check_bcl_necessary(&pair, &Default::default());
            c.push(Check::new("induced pair commutes", symbol_commutator(&model[0], &model[1]), 1e-12));
            Ok(c)
        })();
        checks.push(summarize(&format!("seed {s} BCL pair on C^{f}"), bcl));
    }
    let observations = vec![Observation::new("instances", instances as f64)];
    Outcome { checks, observations, data: Value::Null, degree: None }
}
