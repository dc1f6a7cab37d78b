//! Fundamental operators of a commuting pair and of its adjoint.

use omt::fundamental::{adjoint_fundamental_ops, cross_identities, fundamental_ops};
use omt::tuples::generate::generate;
use omt::{GeneratorKind, TolerancePolicy};

fn main() -> omt::Result<()> {
    let tuple = generate(GeneratorKind::CompressedCommutingUnitaries, 3, 2, 7, TolerancePolicy::default())?;
    let f = fundamental_ops(&tuple)?;
    let g = adjoint_fundamental_ops(&tuple)?;
    println!("defect ranks: {} and {}", f.rank(), g.rank());
    for (j, pair) in f.pairs.iter().enumerate() {
        println!("F_{}1 = {:.4}F_{}2 = {:.4}", j + 1, pair.first, j + 1, pair.second);
        println!("pencil numerical radius {:.6}", f.pencil_radius[j]);
    }
    for check in f.checks.iter().chain(&g.checks).chain(&cross_identities(&tuple, &f, &g)) {
        println!("{:<40} {:.2e}", check.name, check.residual);
    }
    Ok(())
}
