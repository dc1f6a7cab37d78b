//! Sampling the von Neumann inequality with random polynomials.

use omt::chartriple::{von_neumann_check, von_neumann_sample, Polynomial};
use omt::tuples::generate::{generate, rng_from_seed};
use omt::{GeneratorKind, TolerancePolicy};

fn main() -> omt::Result<()> {
    let tol = TolerancePolicy::default();
    let pair = generate(GeneratorKind::CompressedCommutingUnitaries, 4, 2, 9, tol)?;
    let mut rng = rng_from_seed(0);
    for _ in 0..5 {
        let p = Polynomial::random(2, 3, &mut rng);
        let (norm, grid, slack) = von_neumann_check(&pair, &p, 64);
        println!("‖p(T)‖ = {norm:.5}  max on torus grid = {grid:.5}  slack = {slack:.2e}");
    }
    let report = von_neumann_sample(&pair, 100, 3, 1);
    println!("pair: {} violations in 100 polynomials", report.violations);

    let triple = generate(GeneratorKind::Diag, 3, 3, 9, tol)?;
    let report = von_neumann_sample(&triple, 100, 2, 1);
    for o in &report.observations {
        println!("three operators, {}: {:.4}", o.name, o.value);
    }
    Ok(())
}
