//! Functional model of a pure tuple and the unitary that identifies it with
//! the original operators.

use omt::lifts::functional_model;
use omt::numkit::spectral_norm;
use omt::tuples::generate::generate;
use omt::{GeneratorKind, TolerancePolicy};

fn main() -> omt::Result<()> {
    let tuple = generate(GeneratorKind::UpperTriangularCommuting, 3, 2, 5, TolerancePolicy::default())?;
    let fm = functional_model(&tuple)?;
    println!("model built at truncation degree {}", fm.degree);
    for (j, (model, original)) in fm.model.ops().iter().zip(tuple.ops()).enumerate() {
        let pulled_back = fm.certificate.adjoint() * model * &fm.certificate;
        println!("T_{}: distance after identification {:.2e}", j + 1, spectral_norm(&(pulled_back - original)));
    }
    for c in &fm.checks {
        println!("{:<40} {:.2e}", c.name, c.residual);
    }
    Ok(())
}
