//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::Command;
use std::time::{Duration, Instant};

use omt::ando::{ando_tuple, verify_delta_isometries, verify_halmos};
use omt::chartriple::{
    certificate_residual, characteristic_triple, check_admissible, coincide, delta_grid, theta_truncation, von_neumann_sample,
    Verdict, COINCIDENCE_TOL,
};
use omt::fundamental::{adjoint_fundamental_ops, cross_identities, fundamental_ops, uniqueness_probe};
use omt::hardy::{bcl_induced_pair, check_bcl_necessary, symbol_commutator, BclTuple};
use omt::lifts::{douglas_model, functional_model, noncommutative_lift, pcc_lift, pcc_uniqueness_check};
use omt::numkit::{c, identity, spectral_norm, ComplexMatrix};
use omt::report::Check;
use omt::tuples::generate::{complex_gaussian, generate, random_projection, random_unitary, rng_from_seed};
use omt::tuples::{block_diagonal, canonical_decomposition};
use omt::{ContractionTuple, GeneratorKind, TolerancePolicy};
use rand::Rng;

type Outcome = Result<String, String>;

/// The seeded instance family: every generator kind, `d ∈ {2,3,4}`,
/// `dim ∈ {1,…,6}`.
fn instance(seed: u64) -> ContractionTuple {
    let kind = GeneratorKind::ALL[(seed % 5) as usize];
    let d = 2 + (seed % 3) as usize;
    let dim = 1 + ((seed / 3) % 6) as usize;
    generate(kind, dim, d, seed, TolerancePolicy::default()).expect("generator produces valid tuples")
}

fn instances(count: u64) -> impl Iterator<Item = (u64, ContractionTuple)> {
    (0..count).map(|s| (s, instance(s)))
}

fn first_failure(seed: u64, checks: &[Check]) -> std::result::Result<(), String> {
    match checks.iter().find(|c| !c.pass) {
        Some(c) => Err(format!("seed {seed}: {} residual {:.3e} > {:.3e}", c.name, c.residual, c.tolerance)),
        None => Ok(()),
    }
}

fn worst_residual(checks: &[Check]) -> f64 {
    checks.iter().filter(|c| c.tolerance < 1.0).map(|c| c.residual).fold(0.0, f64::max)
}

fn within(elapsed: Duration, limit: u64) -> std::result::Result<(), String> {
    if elapsed.as_secs_f64() < limit as f64 {
        Ok(())
    } else {
        Err(format!("runtime {:.1}s exceeds {limit}s", elapsed.as_secs_f64()))
    }
}

fn fundamental_suite() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut radius: f64 = 0.0;
    for (s, t) in instances(200) {
        let f = fundamental_ops(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let g = adjoint_fundamental_ops(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let mut checks = f.checks.clone();
        checks.extend(g.checks.iter().cloned());
        checks.extend(cross_identities(&t, &f, &g));
        first_failure(s, &checks)?;
        worst = worst.max(worst_residual(&checks));
        radius = f.pencil_radius.iter().chain(&g.pencil_radius).copied().fold(radius, f64::max);
    }
    within(start.elapsed(), 60)?;
    Ok(format!("worst residual {worst:.2e}, largest pencil radius {radius:.6}, {:.1}s", start.elapsed().as_secs_f64()))
}

fn uniqueness_suite() -> Outcome {
    let mut smallest = f64::INFINITY;
    let mut probed = 0;
    for (s, t) in instances(200) {
        let f = fundamental_ops(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let rank = f.rank();
        if rank == 0 {
            continue;
        }
        let mut rng = rng_from_seed(7000 + s);
        for j in 0..t.d() {
            let noise = complex_gaussian(rank, rank, &mut rng);
            let perturbation = &noise * c(1e-3 / spectral_norm(&noise), 0.0);
            let residual = uniqueness_probe(&t, &f, j, &perturbation, false);
            smallest = smallest.min(residual);
            probed += 1;
            if residual <= 1e-4 {
                return Err(format!("seed {s}, j={}: perturbed residual {residual:.3e}", j + 1));
            }
        }
    }
    Ok(format!("{probed} probes, smallest residual {smallest:.2e}"))
}

fn ando_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for (s, t) in instances(200) {
        let f = fundamental_ops(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let a = ando_tuple(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let mut checks = a.checks.clone();
        checks.extend(verify_halmos(&t, &a, &f));
        checks.extend(verify_delta_isometries(&t, &a).map_err(|e| format!("seed {s}: {e}"))?);
        first_failure(s, &checks)?;
        worst = worst.max(worst_residual(&checks));
    }
    Ok(format!("worst residual {worst:.2e}, no enlargement"))
}

fn douglas_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    let mut degree = 0;
    for (s, t) in instances(100) {
        let lift = noncommutative_lift(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let model = douglas_model(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let mut checks = model.checks.clone();
        checks.extend(lift.checks.iter().cloned());
        first_failure(s, &checks)?;
        if model.tail_tolerance() > 1e-8 {
            return Err(format!("seed {s}: tail tolerance {:.3e}", model.tail_tolerance()));
        }
        worst = worst.max(worst_residual(&checks));
        agreement = agreement.max(model.decomposition.method_agreement);
        degree = degree.max(model.degree);
    }
    Ok(format!("worst residual {worst:.2e}, method agreement {agreement:.2e}, largest N {degree}"))
}

fn pcc_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for (s, t) in instances(100) {
        let lift = pcc_lift(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let mut checks = lift.checks.clone();
        checks.extend(pcc_uniqueness_check(&t, &lift).map_err(|e| format!("seed {s}: {e}"))?);
        first_failure(s, &checks)?;
        worst = worst.max(worst_residual(&checks));
    }
    Ok(format!("worst residual {worst:.2e}"))
}

fn decomposition_suite() -> Outcome {
    let mut mixed = 0;
    let mut radius: f64 = 0.0;
    for (s, t) in instances(200) {
        let dec = canonical_decomposition(&t).map_err(|e| format!("seed {s}: {e}"))?;
        first_failure(s, &dec.checks(t.tol()))?;
        if dec.unitary_basis.rank() > 0 && dec.cnu_basis.rank() > 0 {
            mixed += 1;
        }
        radius = radius.max(dec.cnu_spectral_radius);
    }
    if mixed == 0 {
        return Err("no instance had both parts".into());
    }
    Ok(format!("{mixed} instances with both parts, largest c.n.u. spectral radius {radius:.6}"))
}

/// A c.n.u. tuple next to diagonal unitaries with the given joint phases.
fn with_unitary_part(seed: u64, phases: &[(f64, f64)]) -> ContractionTuple {
    let pure = generate(GeneratorKind::UpperTriangularCommuting, 2, 2, seed, TolerancePolicy::default()).unwrap();
    let diag = |pick: fn(&(f64, f64)) -> f64| {
        ComplexMatrix::from_diagonal(&phases.iter().map(|p| omt::numkit::C64::from_polar(1.0, pick(p))).collect::<Vec<_>>().into())
    };
    let unitary = ContractionTuple::new(vec![diag(|p| p.0), diag(|p| p.1)], TolerancePolicy::default()).unwrap();
    block_diagonal(&unitary, &pure)
}

fn invariant_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for (s, t) in instances(50) {
        let mut rng = rng_from_seed(1000 + s);
        let conjugate = t.conjugate(&random_unitary(t.dim(), &mut rng));
        let a = characteristic_triple(&t).map_err(|e| format!("seed {s}: {e}"))?;
        let b = characteristic_triple(&conjugate).map_err(|e| format!("seed {s}: {e}"))?;
        let result = coincide(&a, &b, s).map_err(|e| format!("seed {s}: {e}"))?;
        if result.verdict != Verdict::Coincide || result.residual > COINCIDENCE_TOL {
            return Err(format!("seed {s}: {:?} with residual {:.3e}", result.verdict, result.residual));
        }
        let cert = result.certificate.as_ref().ok_or(format!("seed {s}: no certificate"))?;
        let verified = certificate_residual(&a, &b, cert);
        if verified > COINCIDENCE_TOL {
            return Err(format!("seed {s}: certificate residual {verified:.3e}"));
        }
        worst = worst.max(verified);
    }
    let mut refuted = 0;
    for s in 0..20u64 {
        let mut rng = rng_from_seed(9000 + s);
        let mut phase = || rng.random_range(0.0..std::f64::consts::TAU);
        let first = [(phase(), phase()), (phase(), phase())];
        let mut second = first;
        second[1].1 += 0.5 + phase() / 4.0;
        let a = characteristic_triple(&with_unitary_part(s, &first)).map_err(|e| e.to_string())?;
        let b = characteristic_triple(&with_unitary_part(s, &second)).map_err(|e| e.to_string())?;
        match coincide(&a, &b, s).map_err(|e| e.to_string())?.verdict {
            Verdict::Refuted(_) => refuted += 1,
            other => return Err(format!("refutation pair {s}: {other:?}")),
        }
    }
    Ok(format!("50 conjugate pairs coincide (worst certificate {worst:.2e}), {refuted}/20 spectral mismatches refuted"))
}

fn round_trip_suite() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut seed = 0u64;
    while done < 30 {
        seed += 1;
        let t = instance(seed);
        if t.dim() > 5 || t.d() > 3 || !canonical_decomposition(&t).map_err(|e| e.to_string())?.is_pure_cnu() {
            continue;
        }
        done += 1;
        let model = functional_model(&t).map_err(|e| format!("seed {seed}: {e}"))?;
        first_failure(seed, &model.checks)?;
        let a = characteristic_triple(&t).map_err(|e| format!("seed {seed}: {e}"))?;
        let b = characteristic_triple(&model.model).map_err(|e| format!("seed {seed}: {e}"))?;
        let result = coincide(&a, &b, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        if result.verdict != Verdict::Coincide || result.residual > COINCIDENCE_TOL {
            return Err(format!("seed {seed}: {:?} with residual {:.3e}", result.verdict, result.residual));
        }
        let admissible = check_admissible(&a.g, &a.theta, theta_truncation(&a.theta, 1e-10), t.tol())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        first_failure(seed, &admissible.checks)?;
        worst = worst.max(result.residual);
    }
    within(start.elapsed(), 120)?;
    Ok(format!("worst residual {worst:.2e}, {:.1}s", start.elapsed().as_secs_f64()))
}

fn bcl_suite() -> Outcome {
    let tol = TolerancePolicy::default();
    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let mut rng = rng_from_seed(5000 + s);
        let f = 1 + (s % 5) as usize;
        let u = random_unitary(f, &mut rng);
        let p = random_projection(f, rng.random_range(0..=f), &mut rng);
        let pair = bcl_induced_pair(&u, &p, &tol).map_err(|e| e.to_string())?;
        let model = pair.model(4);
        let commutator = symbol_commutator(&model[0], &model[1]);
        if commutator > 1e-12 {
            return Err(format!("pair {s}: symbol commutator {commutator:.3e}"));
        }
        first_failure(s, &check_bcl_necessary(&pair, &tol))?;
        worst = worst.max(commutator);
    }
    let mut caught = 0;
    for s in 0..20u64 {
        let mut rng = rng_from_seed(6000 + s);
        let f = 2 + (s % 4) as usize;
        let u = random_unitary(f, &mut rng);
        let p = random_projection(f, 1 + rng.random_range(0..f - 1), &mut rng);
        let broken = BclTuple::new(vec![p.clone(), identity(f) - &p], vec![u.clone(), u.adjoint()], vec![ComplexMatrix::zeros(0, 0); 2], &tol)
            .map_err(|e| e.to_string())?;
        if check_bcl_necessary(&broken, &tol).iter().any(|c| !c.pass) {
            caught += 1;
        } else {
            return Err(format!("broken pair {s} passes the necessary conditions"));
        }
    }
    Ok(format!("worst commutator {worst:.2e}, {caught}/20 broken pairs rejected"))
}

fn inner_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut raw: f64 = 0.0;
    let mut count = 0;
    for (s, t) in instances(200) {
        let triple = characteristic_triple(&t).map_err(|e| format!("seed {s}: {e}"))?;
        if triple.cnu_dim == 0 {
            continue;
        }
        count += 1;
        let grid = delta_grid(&triple.theta, 64).map_err(|e| format!("seed {s}: {e}"))?;
        let delta = grid.max();
        raw = raw.max(grid.max_raw());
        if delta > 1e-8 {
            return Err(format!("seed {s}: boundary defect {delta:.3e}"));
        }
        worst = worst.max(delta);
    }
    Ok(format!("{count} c.n.u. parts, worst boundary defect {worst:.2e} (before the rounding bound {raw:.2e})"))
}

fn von_neumann_suite() -> Outcome {
    let mut violations = 0;
    for s in 0..50u64 {
        let kind = GeneratorKind::ALL[(s % 5) as usize];
        let t = generate(kind, 4, 2, s, TolerancePolicy::default()).map_err(|e| e.to_string())?;
        violations += von_neumann_sample(&t, 100, 3, s).violations;
    }
    if violations > 0 {
        return Err(format!("{violations} violations for d ≤ 2"));
    }
    let reported: usize = (0..10u64)
        .map(|s| {
            let t = generate(GeneratorKind::ALL[(s % 5) as usize], 3, 3, s, TolerancePolicy::default()).unwrap();
            von_neumann_sample(&t, 20, 2, s).violations
        })
        .sum();
    Ok(format!("0 violations for d ≤ 2 over 5000 polynomials; d = 3 reported: {reported} grid exceedances"))
}

fn determinism_suite() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_omt"))
            .args(["--quiet", "--seed", "11", "selftest", "--instances", "10"])
            .output()
            .map_err(|e| e.to_string())
    };
    let first = run()?;
    let second = run()?;
    if !first.status.success() {
        return Err(format!("selftest exited with {}", first.status));
    }
    if first.stdout != second.stdout {
        return Err("reports differ".into());
    }
    Ok(format!("{} identical bytes", first.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("fundamental operators", fundamental_suite),
        ("uniqueness probe", uniqueness_suite),
        ("Andô and Halmos dilations", ando_suite),
        ("Douglas lift", douglas_suite),
        ("pseudo-commutative lift", pcc_suite),
        ("canonical decomposition", decomposition_suite),
        ("complete unitary invariant", invariant_suite),
        ("functional model round trip", round_trip_suite),
        ("BCL pairs", bcl_suite),
        ("inner characteristic function", inner_suite),
        ("von Neumann inequality", von_neumann_suite),
        ("selftest determinism", determinism_suite),
    ];
    let mut failed = 0;
    for (k, (name, suite)) in criteria.iter().enumerate() {
        match suite() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
