//! Splitting a tuple into its unitary and completely non-unitary parts.

use omt::tuples::canonical_decomposition;
use omt::tuples::generate::generate;
use omt::{GeneratorKind, TolerancePolicy};

fn main() -> omt::Result<()> {
    let tuple = generate(GeneratorKind::MixedUnitaryPlusPure, 5, 2, 3, TolerancePolicy::default())?;
    let dec = canonical_decomposition(&tuple)?;
    println!("unitary part: dimension {}", dec.unitary_basis.rank());
    println!("c.n.u. part: dimension {}, spectral radius {:.4}", dec.cnu_basis.rank(), dec.cnu_spectral_radius);
    for c in dec.checks(tuple.tol()) {
        println!("{:<48} {:.2e} (≤ {:.0e})", c.name, c.residual, c.tolerance);
    }
    Ok(())
}
