//! Commuting isometric pairs built from a unitary and a projection.

use omt::hardy::{bcl_induced_pair, check_bcl_necessary, symbol_commutator, BclTuple};
use omt::numkit::{identity, ComplexMatrix};
use omt::tuples::generate::{random_projection, random_unitary, rng_from_seed};
use omt::TolerancePolicy;

fn main() -> omt::Result<()> {
    let tol = TolerancePolicy::default();
    let mut rng = rng_from_seed(4);
    let u = random_unitary(3, &mut rng);
    let p = random_projection(3, 1, &mut rng);

    let pair = bcl_induced_pair(&u, &p, &tol)?;
    let model = pair.model(6);
    println!("induced pair: symbol commutator {:.2e}", symbol_commutator(&model[0], &model[1]));
    for c in check_bcl_necessary(&pair, &tol) {
        println!("  {:<52} {:.2e}", c.name, c.residual);
    }

    let naive = BclTuple::new(vec![p.clone(), identity(3) - &p], vec![u.clone(), u.adjoint()], vec![ComplexMatrix::zeros(0, 0); 2], &tol)?;
    let model = naive.model(6);
    println!("complementary projections: symbol commutator {:.2e}", symbol_commutator(&model[0], &model[1]));
    for c in check_bcl_necessary(&naive, &tol).into_iter().filter(|c| !c.pass) {
        println!("  violated: {} ({:.2e})", c.name, c.residual);
    }
    Ok(())
}
