//! Douglas model, noncommutative isometric lift and the pseudo-commutative
//! contractive lift, each with its verification report.

use omt::lifts::{douglas_model, noncommutative_lift, pcc_lift, pcc_uniqueness_check};
use omt::report::Check;
use omt::tuples::generate::generate;
use omt::{GeneratorKind, TolerancePolicy};

fn show(title: &str, checks: &[Check]) {
    println!("{title}");
    for c in checks {
        println!("  {} {:<44} {:.2e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.residual);
    }
}

fn main() -> omt::Result<()> {
    let tuple = generate(GeneratorKind::MixedUnitaryPlusPure, 4, 2, 11, TolerancePolicy::default())?;
    let model = douglas_model(&tuple)?;
    println!("truncation degree {} with tail {:.1e}", model.degree, model.tail_bound);
    show("Douglas model", &model.checks);
    show("noncommutative lift", &noncommutative_lift(&tuple)?.checks);
    let lift = pcc_lift(&tuple)?;
    show("pseudo-commutative lift", &lift.checks);
    show("second construction", &pcc_uniqueness_check(&tuple, &lift)?);
    Ok(())
}
