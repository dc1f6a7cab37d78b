//! Commuting contraction tuples: validation, products, defects and the
//! splitting into unitary and completely non-unitary parts.

pub mod generate;

use crate::error::{Error, Result, Violation};
use crate::numkit::{
    direct_sum, ensure_finite, ensure_square, hermitian_eigen, identity, orth_complement, psd_sqrt_scaled,
    range_basis, spectral_norm, unitarity_residual, ComplexMatrix, SubspaceBasis, TolerancePolicy, C64,
};

pub use generate::{generate, GeneratorKind};

/// A validated `d`-tuple (`d ≥ 2`) of commuting contractions on `ℂ^n`.
#[derive(Debug, Clone)]
pub struct ContractionTuple {
    ops: Vec<ComplexMatrix>,
    dim: usize,
    tol: TolerancePolicy,
}

/// Checks squareness, equal dimensions, contractivity and pairwise
/// commutation, collecting every violation.
pub fn validate(ops: Vec<ComplexMatrix>, tol: TolerancePolicy) -> Result<ContractionTuple> {
    tol.check()?;
    if ops.len() < 2 {
        return Err(Error::TooFewOperators(ops.len()));
    }
    let dim = ops[0].nrows();
    for op in &ops {
        ensure_square(op, "tuple operator")?;
        ensure_finite(op, "tuple operator")?;
        if op.nrows() != dim {
            return Err(Error::DimensionMismatch { context: "tuple operator", expected: dim, found: op.nrows() });
        }
    }
    let mut violations = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let norm = spectral_norm(op);
        if norm > 1.0 + tol.residual_tol {
            violations.push(Violation::NotContraction { index: i + 1, norm });
        }
    }
    let commute_tol = tol.residual_tol * (dim.max(1) as f64);
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let norm = spectral_norm(&(&ops[i] * &ops[j] - &ops[j] * &ops[i]));
            if norm > commute_tol {
                violations.push(Violation::NotCommuting { i: i + 1, j: j + 1, norm });
            }
        }
    }
    if violations.is_empty() {
        Ok(ContractionTuple { ops, dim, tol })
    } else {
        Err(Error::InvalidTuple(violations))
    }
}

impl ContractionTuple {
    pub fn new(ops: Vec<ComplexMatrix>, tol: TolerancePolicy) -> Result<Self> {
        validate(ops, tol)
    }

    /// Builds a tuple from blocks already known to be valid (restrictions to
    /// reducing subspaces, adjoints, unitary conjugates).
    pub(crate) fn from_trusted(ops: Vec<ComplexMatrix>, dim: usize, tol: TolerancePolicy) -> Self {
        Self { ops, dim, tol }
    }

    pub fn d(&self) -> usize {
        self.ops.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn op(&self, j: usize) -> &ComplexMatrix {
        &self.ops[j]
    }

    pub fn tol(&self) -> &TolerancePolicy {
        &self.tol
    }

    pub fn with_tol(mut self, tol: TolerancePolicy) -> Self {
        self.tol = tol;
        self
    }

    /// `max_j ‖T_j‖`.
    pub fn scale(&self) -> f64 {
        self.ops.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// The tuple of adjoints `(T_1*, …, T_d*)`.
    pub fn adjoint(&self) -> ContractionTuple {
        Self::from_trusted(self.ops.iter().map(|t| t.adjoint()).collect(), self.dim, self.tol)
    }

    /// `U T_j U*` for a unitary `U`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> ContractionTuple {
        let ua = u.adjoint();
        Self::from_trusted(self.ops.iter().map(|t| u * t * &ua).collect(), u.nrows(), self.tol)
    }

    /// `T = T_1 ⋯ T_d`.
    pub fn product(&self) -> ComplexMatrix {
        self.ops.iter().fold(identity(self.dim), |acc, t| acc * t)
    }

    /// `T_(j)`, the product with the factor `j` (0-based) left out.
    pub fn partial_product(&self, j: usize) -> ComplexMatrix {
        self.ops
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .fold(identity(self.dim), |acc, (_, t)| acc * t)
    }

    /// Product over an arbitrary index set.
    pub fn subset_product(&self, subset: &[usize]) -> ComplexMatrix {
        subset.iter().fold(identity(self.dim), |acc, &k| acc * &self.ops[k])
    }

    /// Difference between the product taken forwards and backwards; zero for
    /// commuting tuples.
    pub fn product_order_residual(&self) -> f64 {
        let backwards = self.ops.iter().rev().fold(identity(self.dim), |acc, t| acc * t);
        spectral_norm(&(self.product() - backwards))
    }
}

/// A defect operator `(I − A*A)^{1/2}` together with an orthonormal basis of
/// its range.
#[derive(Debug, Clone)]
pub struct DefectData {
    pub op: ComplexMatrix,
    pub basis: SubspaceBasis,
}

impl DefectData {
    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// The defect operator written in its own range basis (invertible).
    pub fn compressed(&self) -> ComplexMatrix {
        self.basis.compress(&self.op)
    }

    /// `B* D`, the defect operator as a map into range coordinates.
    pub fn coords_op(&self) -> ComplexMatrix {
        self.basis.matrix().adjoint() * &self.op
    }
}

/// Defect operator of a contraction.
pub fn defect(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<DefectData> {
    let n = a.ncols();
    let gram = identity(n) - a.adjoint() * a;
    let op = psd_sqrt_scaled(&gram, 1.0, tol)?;
    let basis = range_basis(&op, tol);
    Ok(DefectData { op, basis })
}

/// Output of the canonical decomposition `ℋ = ℋ_u ⊕ ℋ_c`.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// Orthogonal projection onto `ℋ_u` computed from unimodular eigenvectors.
    pub projection_unitary: ComplexMatrix,
    /// The same projection computed from the limit of `T^n T*^n`.
    pub projection_q_method: ComplexMatrix,
    /// `‖P_eig − P_Q‖`.
    pub method_agreement: f64,
    pub unitary_basis: SubspaceBasis,
    pub cnu_basis: SubspaceBasis,
    pub unitary_part: ContractionTuple,
    pub cnu_part: ContractionTuple,
    /// `[B_u | B_c]`.
    pub change_of_basis: ComplexMatrix,
    /// Largest off-diagonal block norm over all `T_j`.
    pub leakage: f64,
    /// Largest `‖T_j|ℋ_u‖` unitarity residual.
    pub unitarity: f64,
    /// Spectral radius of the product on `ℋ_c`.
    pub cnu_spectral_radius: f64,
    /// Eigenvalues with `1 − rank_rel_tol < |λ| < 1` classified as unitary.
    pub near_boundary: Vec<C64>,
}

impl DecompositionResult {
    pub fn is_pure_cnu(&self) -> bool {
        self.unitary_basis.rank() == 0
    }

    /// Block leakage, unitarity on `ℋ_u`, strict spectral radius on `ℋ_c`,
    /// and agreement of the two projection methods.
    pub fn checks(&self, tol: &TolerancePolicy) -> Vec<crate::report::Check> {
        use crate::report::Check;
        vec![
            Check::new("block leakage", self.leakage, tol.residual_tol),
            Check::new("unitarity of each factor on the unitary part", self.unitarity, tol.residual_tol),
            Check::new("spectral radius on the c.n.u. part", self.cnu_spectral_radius, 1.0 - tol.rank_rel_tol),
            Check::new("projection methods agree", self.method_agreement, tol.residual_tol),
        ]
    }
}

fn cluster_eigenvalues(values: &[C64], radius: f64) -> Vec<C64> {
    let mut centers: Vec<(C64, usize)> = Vec::new();
    for &v in values {
        match centers.iter_mut().find(|(c, _)| (*c - v).norm() < radius) {
            Some((c, k)) => {
                *c = (*c * (*k as f64) + v) / ((*k + 1) as f64);
                *k += 1;
            }
            None => centers.push((v, 1)),
        }
    }
    centers.into_iter().map(|(c, _)| c).collect()
}

/// Projection onto `ℋ_u` from eigenvectors of unimodular eigenvalues of the
/// product.
fn unitary_subspace_eigen(t: &ComplexMatrix, tol: &TolerancePolicy) -> Result<(SubspaceBasis, Vec<C64>)> {
    let n = t.nrows();
    let eigs = crate::numkit::eigenvalues(t)?;
    let unimodular: Vec<C64> = eigs.iter().copied().filter(|z| z.norm() >= 1.0 - tol.rank_rel_tol).collect();
    let near_boundary =
        unimodular.iter().copied().filter(|z| 1.0 - z.norm() > 64.0 * f64::EPSILON).filter(|z| z.norm() < 1.0).collect();
    if unimodular.is_empty() {
        return Ok((SubspaceBasis::empty(n), near_boundary));
    }
    let threshold = 1e-7 * spectral_norm(t).max(1.0);
    let mut cols = Vec::new();
    for center in cluster_eigenvalues(&unimodular, 1e-6) {
        let shifted = t - identity(n) * center;
        let ns = crate::numkit::null_space(&shifted, threshold);
        cols.extend(ns.column_iter().map(|c| c.into_owned()));
    }
    if cols.is_empty() {
        return Ok((SubspaceBasis::empty(n), near_boundary));
    }
    let stacked = ComplexMatrix::from_columns(&cols);
    Ok((range_basis(&stacked, tol), near_boundary))
}

/// `Q² = lim T^n T*^n` by fixed-point iteration `A ← T A T*` from `A = I`.
pub fn q_limit(t: &ComplexMatrix, tol: &TolerancePolicy) -> ComplexMatrix {
    let n = t.nrows();
    let cap = (10.0 * n.max(1) as f64 * (1.0 / tol.residual_tol).ln()).ceil() as usize + 64;
    let ta = t.adjoint();
    let mut a = identity(n);
    for _ in 0..cap {
        let next = t * &a * &ta;
        let step = spectral_norm(&(&next - &a));
        a = next;
        if step < tol.residual_tol * 1e-3 {
            break;
        }
    }
    a
}

/// Projection onto `ℋ_u` from the spectral projection of `Q²` above 1/2.
fn unitary_projection_q_method(t: &ComplexMatrix, tol: &TolerancePolicy) -> ComplexMatrix {
    let n = t.nrows();
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let q2 = q_limit(t, tol);
    let (values, vectors) = hermitian_eigen(&q2);
    let k = values.iter().filter(|&&v| v > 0.5).count();
    let v = vectors.columns(0, k).into_owned();
    &v * v.adjoint()
}

/// Splits `ℋ` into the maximal subspace reducing every `T_j` on which the
/// product is unitary and its orthogonal complement.
pub fn canonical_decomposition(tuple: &ContractionTuple) -> Result<DecompositionResult> {
    let tol = *tuple.tol();
    let n = tuple.dim();
    let t = tuple.product();
    let (unitary_basis, near_boundary) = unitary_subspace_eigen(&t, &tol)?;
    let cnu_basis = orth_complement(&unitary_basis);
    let projection_unitary = unitary_basis.projector();
    let projection_q_method = unitary_projection_q_method(&t, &tol);
    let method_agreement = spectral_norm(&(&projection_unitary - &projection_q_method));

    let bu = unitary_basis.matrix();
    let bc = cnu_basis.matrix();
    let mut leakage: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    let mut u_ops = Vec::with_capacity(tuple.d());
    let mut c_ops = Vec::with_capacity(tuple.d());
    for op in tuple.ops() {
        leakage = leakage.max(spectral_norm(&(bc.adjoint() * op * bu))).max(spectral_norm(&(bu.adjoint() * op * bc)));
        let tu = unitary_basis.compress(op);
        unitarity = unitarity.max(unitarity_residual(&tu));
        u_ops.push(tu);
        c_ops.push(cnu_basis.compress(op));
    }
    let leak_tol = tol.residual_tol * n.max(1) as f64;
    if leakage > leak_tol {
        return Err(Error::BlockLeakage { block: 1, norm: leakage });
    }
    let cnu_product = c_ops.iter().fold(identity(cnu_basis.rank()), |acc, t| acc * t);
    let cnu_spectral_radius = crate::numkit::spectral_radius(&cnu_product)?;
    let mut change_of_basis = ComplexMatrix::zeros(n, n);
    change_of_basis.columns_mut(0, bu.ncols()).copy_from(bu);
    change_of_basis.columns_mut(bu.ncols(), bc.ncols()).copy_from(bc);
    Ok(DecompositionResult {
        projection_unitary,
        projection_q_method,
        method_agreement,
        unitary_part: ContractionTuple::from_trusted(u_ops, unitary_basis.rank(), tol),
        cnu_part: ContractionTuple::from_trusted(c_ops, cnu_basis.rank(), tol),
        unitary_basis,
        cnu_basis,
        change_of_basis,
        leakage,
        unitarity,
        cnu_spectral_radius,
        near_boundary,
    })
}

/// Reassembles a tuple from its two parts in block-diagonal form.
pub fn block_diagonal(a: &ContractionTuple, b: &ContractionTuple) -> ContractionTuple {
    let ops = a.ops().iter().zip(b.ops()).map(|(x, y)| direct_sum(x, y)).collect();
    ContractionTuple::from_trusted(ops, a.dim() + b.dim(), *a.tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, zeros};

    fn diag(entries: &[C64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
    }

    #[test]
    fn rejects_non_commuting_pair() {
        let mut a = zeros(2, 2);
        a[(0, 1)] = c(1.0, 0.0);
        let b = diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        match validate(vec![a, b], TolerancePolicy::default()) {
            Err(Error::InvalidTuple(v)) => {
                assert!(matches!(v[0], Violation::NotCommuting { i: 1, j: 2, .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scalar_defect() {
        let a = ComplexMatrix::from_element(1, 1, c(0.5, 0.0));
        let d = defect(&a, &TolerancePolicy::default()).unwrap();
        assert!((d.op[(0, 0)].re - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.rank(), 1);
    }

    #[test]
    fn unitary_diagonal_is_fully_unitary() {
        let u = diag(&[c(0.0, 1.0), c(-1.0, 0.0)]);
        let t = validate(vec![u.clone(), u.adjoint()], TolerancePolicy::default()).unwrap();
        let dec = canonical_decomposition(&t).unwrap();
        assert_eq!(dec.unitary_basis.rank(), 2);
        assert_eq!(dec.cnu_basis.rank(), 0);
        assert_eq!(defect(&t.product(), t.tol()).unwrap().rank(), 0);
    }

    #[test]
    fn mixed_diagonal_splits() {
        let t1 = diag(&[c(0.0, 1.0), c(0.5, 0.0)]);
        let t2 = diag(&[c(1.0, 0.0), c(0.5, 0.0)]);
        let t = validate(vec![t1, t2], TolerancePolicy::default()).unwrap();
        let dec = canonical_decomposition(&t).unwrap();
        assert_eq!(dec.unitary_basis.rank(), 1);
        assert!(dec.method_agreement < 1e-8);
        assert!((dec.cnu_spectral_radius - 0.25).abs() < 1e-12);
    }
}
