//! Seeded random generators for commuting contraction tuples.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{block_diagonal, ContractionTuple};
use crate::error::{Error, Result};
use crate::numkit::{identity, spectral_norm, ComplexMatrix, TolerancePolicy, C64};

/// Families of random commuting contraction tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    /// Diagonal operators; entries are unimodular with probability 1/5,
    /// otherwise of modulus at most 0.9.
    Diag,
    /// Polynomials in one random upper-triangular contraction.
    UpperTriangularCommuting,
    /// A diagonal tuple conjugated by one random unitary.
    JointUnitaryConjugatedDiag,
    /// Polynomials in the compression of a random unitary on `ℂ^{2n}` to
    /// `ℂ^n` (non-normal in general).
    CompressedCommutingUnitaries,
    /// Block diagonal: commuting unitaries on the first half, a strict
    /// upper-triangular tuple on the rest.
    MixedUnitaryPlusPure,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::Diag,
        GeneratorKind::UpperTriangularCommuting,
        GeneratorKind::JointUnitaryConjugatedDiag,
        GeneratorKind::CompressedCommutingUnitaries,
        GeneratorKind::MixedUnitaryPlusPure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Diag => "diag",
            GeneratorKind::UpperTriangularCommuting => "upper-triangular-commuting",
            GeneratorKind::JointUnitaryConjugatedDiag => "joint-unitary-conjugated-diag",
            GeneratorKind::CompressedCommutingUnitaries => "compressed-commuting-unitaries",
            GeneratorKind::MixedUnitaryPlusPure => "mixed-unitary-plus-pure",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnsupportedKind(s.to_string()))
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let qr = complex_gaussian(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Orthogonal projection of the given rank onto a Haar-random subspace.
pub fn random_projection<R: Rng>(n: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let u = random_unitary(n, rng);
    let v = u.columns(0, rank.min(n)).into_owned();
    &v * v.adjoint()
}

fn random_phase<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

fn diag_entry<R: Rng>(rng: &mut R) -> C64 {
    if rng.random_bool(0.2) {
        random_phase(rng)
    } else {
        random_phase(rng) * rng.random_range(0.0..0.9)
    }
}

fn diag_tuple<R: Rng>(dim: usize, d: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    (0..d)
        .map(|_| {
            let entries: Vec<C64> = (0..dim).map(|_| diag_entry(rng)).collect();
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(entries))
        })
        .collect()
}

/// `p_j(A)` for random polynomials of degree 1..=3 with `Σ|c_k| ≤ 0.9`.
fn polynomial_tuple<R: Rng>(base: &ComplexMatrix, d: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let n = base.nrows();
    (0..d)
        .map(|_| {
            let degree = rng.random_range(1..=3);
            let coeffs: Vec<C64> = (0..=degree).map(|_| complex_gaussian(1, 1, rng)[(0, 0)]).collect();
            let total: f64 = coeffs.iter().map(|z| z.norm()).sum();
            let budget = rng.random_range(0.5..0.9);
            let mut acc = ComplexMatrix::zeros(n, n);
            let mut power = identity(n);
            for c in &coeffs {
                acc += &power * (*c * (budget / total));
                power = &power * base;
            }
            acc
        })
        .collect()
}

fn upper_triangular_contraction<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut a = complex_gaussian(n, n, rng);
    for r in 0..n {
        for c in 0..r {
            a[(r, c)] = C64::new(0.0, 0.0);
        }
    }
    let norm = spectral_norm(&a);
    if norm > 0.0 {
        a /= C64::from(norm);
    }
    a
}

fn compressed_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let u = random_unitary(2 * n, rng);
    u.view((0, 0), (n, n)).into_owned()
}

fn commuting_unitaries<R: Rng>(n: usize, d: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let v = random_unitary(n, rng);
    (0..d)
        .map(|_| {
            let entries: Vec<C64> = (0..n).map(|_| random_phase(rng)).collect();
            &v * ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(entries)) * v.adjoint()
        })
        .collect()
}

/// Generates a tuple of the requested kind from a seed.
pub fn generate(kind: GeneratorKind, dim: usize, d: usize, seed: u64, tol: TolerancePolicy) -> Result<ContractionTuple> {
    let mut rng = rng_from_seed(seed);
    generate_with(kind, dim, d, &mut rng, tol)
}

pub fn generate_with<R: Rng>(
    kind: GeneratorKind,
    dim: usize,
    d: usize,
    rng: &mut R,
    tol: TolerancePolicy,
) -> Result<ContractionTuple> {
    if d < 2 {
        return Err(Error::TooFewOperators(d));
    }
    let ops = match kind {
        GeneratorKind::Diag => diag_tuple(dim, d, rng),
        GeneratorKind::UpperTriangularCommuting => {
            let a = upper_triangular_contraction(dim, rng);
            polynomial_tuple(&a, d, rng)
        }
        GeneratorKind::JointUnitaryConjugatedDiag => {
            let v = random_unitary(dim, rng);
            diag_tuple(dim, d, rng).into_iter().map(|t| &v * t * v.adjoint()).collect()
        }
        GeneratorKind::CompressedCommutingUnitaries => {
            let a = compressed_unitary(dim, rng);
            polynomial_tuple(&a, d, rng)
        }
        GeneratorKind::MixedUnitaryPlusPure => {
            let u_dim = (dim / 2).max(1).min(dim);
            let c_dim = dim - u_dim;
            let unitary = ContractionTuple::from_trusted(commuting_unitaries(u_dim, d, rng), u_dim, tol);
            let a = upper_triangular_contraction(c_dim, rng);
            let pure = ContractionTuple::from_trusted(polynomial_tuple(&a, d, rng), c_dim, tol);
            block_diagonal(&unitary, &pure).ops().to_vec()
        }
    };
    super::validate(ops, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuples::canonical_decomposition;

    #[test]
    fn kinds_round_trip_through_names() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
        }
        assert!("bogus".parse::<GeneratorKind>().is_err());
    }

    #[test]
    fn same_seed_same_tuple() {
        for k in GeneratorKind::ALL {
            let a = generate(k, 4, 3, 7, TolerancePolicy::default()).unwrap();
            let b = generate(k, 4, 3, 7, TolerancePolicy::default()).unwrap();
            assert_eq!(a.ops(), b.ops());
        }
    }

    #[test]
    fn mixed_has_both_parts() {
        let t = generate(GeneratorKind::MixedUnitaryPlusPure, 4, 2, 1, TolerancePolicy::default()).unwrap();
        let dec = canonical_decomposition(&t).unwrap();
        assert_eq!(dec.unitary_basis.rank(), 2);
        assert_eq!(dec.cnu_basis.rank(), 2);
    }

    #[test]
    fn compressed_kind_is_not_normal() {
        let t = generate(GeneratorKind::CompressedCommutingUnitaries, 4, 2, 3, TolerancePolicy::default()).unwrap();
        let a = t.op(0);
        assert!(spectral_norm(&(a * a.adjoint() - a.adjoint() * a)) > 1e-3);
    }
}
