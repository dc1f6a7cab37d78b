//! Andô tuple and the Halmos dilations it produces.

use omt::ando::{ando_tuple, verify_delta_isometries, verify_halmos};
use omt::fundamental::fundamental_ops;
use omt::tuples::generate::generate;
use omt::{GeneratorKind, TolerancePolicy};

fn main() -> omt::Result<()> {
    let tuple = generate(GeneratorKind::UpperTriangularCommuting, 3, 3, 2, TolerancePolicy::default())?;
    let ando = ando_tuple(&tuple)?;
    let f = fundamental_ops(&tuple)?;
    println!("dilation space dimension {}", ando.dim());
    let mut checks = ando.checks.clone();
    checks.extend(verify_halmos(&tuple, &ando, &f));
    checks.extend(verify_delta_isometries(&tuple, &ando)?);
    for c in &checks {
        println!("{} {:<36} {:.2e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.residual);
    }
    Ok(())
}
