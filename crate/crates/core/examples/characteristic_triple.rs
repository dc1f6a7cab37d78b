//! Characteristic triples as a unitary invariant: a conjugated copy
//! coincides, a change in the unitary part is refuted.

use omt::chartriple::{characteristic_triple, coincide, delta_grid, Verdict};
use omt::tuples::generate::{generate, random_unitary, rng_from_seed};
use omt::{GeneratorKind, TolerancePolicy};

fn main() -> omt::Result<()> {
    let tol = TolerancePolicy::default();
    let tuple = generate(GeneratorKind::MixedUnitaryPlusPure, 4, 2, 21, tol)?;
    let triple = characteristic_triple(&tuple)?;
    println!("c.n.u. dimension {}, unitary dimension {}", triple.cnu_dim, triple.unitary_dim());
    println!("Θ(0) = {:.4}", triple.theta.coefficient(0));
    println!("largest boundary defect on 64 points: {:.2e}", delta_grid(&triple.theta, 64)?.max_raw());

    let mut rng = rng_from_seed(1);
    let conjugate = tuple.conjugate(&random_unitary(tuple.dim(), &mut rng));
    let result = coincide(&triple, &characteristic_triple(&conjugate)?, 0)?;
    println!("conjugate: {:?}, residual {:.2e}", result.verdict, result.residual);

    let other = generate(GeneratorKind::MixedUnitaryPlusPure, 4, 2, 22, tol)?;
    match coincide(&triple, &characteristic_triple(&other)?, 0)?.verdict {
        Verdict::Refuted(reason) => println!("unrelated tuple refuted: {reason}"),
        verdict => println!("unrelated tuple: {verdict:?}"),
    }
    Ok(())
}
