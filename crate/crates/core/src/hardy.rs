//! Truncated vector-valued Hardy space `H²(ℱ)` and multiplication operators
//! by linear pencils `A + zB`, optionally joined with a unitary summand.
//!
//! Coordinates on `ℱ^{N+1} ⊕ ℰ` list the coefficient blocks by ascending
//! degree, followed by the `ℰ` summand. Commutativity is always decided on
//! symbols: truncation breaks it in the top degree.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::numkit::{identity, isometry_residual, spectral_norm, unitarity_residual, zeros, ComplexMatrix, TolerancePolicy};
use crate::report::Check;
use crate::tuples::defect;

/// `M_{A+zB} ⊕ W` on `ℱ^{N+1} ⊕ ℰ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyOp {
    pub constant: ComplexMatrix,
    pub linear: ComplexMatrix,
    pub unitary: ComplexMatrix,
    pub degree: usize,
}

/// Builds the structured operator `M_{A+zB} ⊕ W` truncated to degree `degree`.
pub fn pencil_op(a: ComplexMatrix, b: ComplexMatrix, w: Option<ComplexMatrix>, degree: usize) -> Result<HardyOp> {
    let f = a.nrows();
    if a.ncols() != f || b.nrows() != f || b.ncols() != f {
        return Err(Error::DimensionMismatch { context: "pencil coefficients", expected: f, found: b.nrows() });
    }
    let w = w.unwrap_or_else(|| zeros(0, 0));
    if w.nrows() != w.ncols() {
        return Err(Error::NotSquare { context: "pencil unitary summand", rows: w.nrows(), cols: w.ncols() });
    }
    Ok(HardyOp { constant: a, linear: b, unitary: w, degree })
}

impl HardyOp {
    pub fn coeff_dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn extra_dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// Total dimension `(N+1)·dim ℱ + dim ℰ`.
    pub fn dim(&self) -> usize {
        (self.degree + 1) * self.coeff_dim() + self.extra_dim()
    }

    /// Same symbol at another truncation degree.
    pub fn with_degree(&self, degree: usize) -> HardyOp {
        HardyOp { degree, ..self.clone() }
    }

    /// Dense matrix: `A` on the block diagonal, `B` on the block subdiagonal,
    /// `W` in the last block.
    pub fn materialize(&self) -> ComplexMatrix {
        let f = self.coeff_dim();
        let mut m = zeros(self.dim(), self.dim());
        for n in 0..=self.degree {
            m.view_mut((n * f, n * f), (f, f)).copy_from(&self.constant);
            if n > 0 {
                m.view_mut((n * f, (n - 1) * f), (f, f)).copy_from(&self.linear);
            }
        }
        let off = (self.degree + 1) * f;
        m.view_mut((off, off), (self.extra_dim(), self.extra_dim())).copy_from(&self.unitary);
        m
    }

    /// Dense compression of the adjoint: `A*` on the block diagonal, `B*` on
    /// the block superdiagonal (degree lowering), `W*` in the last block.
    pub fn materialize_adjoint(&self) -> ComplexMatrix {
        let f = self.coeff_dim();
        let mut m = zeros(self.dim(), self.dim());
        let (a, b) = (self.constant.adjoint(), self.linear.adjoint());
        for n in 0..=self.degree {
            m.view_mut((n * f, n * f), (f, f)).copy_from(&a);
            if n < self.degree {
                m.view_mut((n * f, (n + 1) * f), (f, f)).copy_from(&b);
            }
        }
        let off = (self.degree + 1) * f;
        m.view_mut((off, off), (self.extra_dim(), self.extra_dim())).copy_from(&self.unitary.adjoint());
        m
    }

    /// `(M ⊕ W) x` for the columns of `x`, without materializing.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let f = self.coeff_dim();
        let k = x.ncols();
        let mut out = zeros(self.dim(), k);
        for n in 0..=self.degree {
            let mut block = &self.constant * x.rows(n * f, f);
            if n > 0 {
                block += &self.linear * x.rows((n - 1) * f, f);
            }
            out.rows_mut(n * f, f).copy_from(&block);
        }
        let off = (self.degree + 1) * f;
        out.rows_mut(off, self.extra_dim()).copy_from(&(&self.unitary * x.rows(off, self.extra_dim())));
        out
    }

    /// Compressed adjoint `P_N (M ⊕ W)* x`, without materializing.
    pub fn apply_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let f = self.coeff_dim();
        let k = x.ncols();
        let (a, b) = (self.constant.adjoint(), self.linear.adjoint());
        let mut out = zeros(self.dim(), k);
        for n in 0..=self.degree {
            let mut block = &a * x.rows(n * f, f);
            if n < self.degree {
                block += &b * x.rows((n + 1) * f, f);
            }
            out.rows_mut(n * f, f).copy_from(&block);
        }
        let off = (self.degree + 1) * f;
        out.rows_mut(off, self.extra_dim()).copy_from(&(self.unitary.adjoint() * x.rows(off, self.extra_dim())));
        out
    }

    /// Pencil symbol sampled at a point.
    pub fn symbol_at(&self, z: crate::numkit::C64) -> ComplexMatrix {
        &self.constant + &self.linear * z
    }

    /// `‖M_{A+zB}‖ = sup_{|ζ|=1} ‖A + ζB‖`, estimated on a circle grid.
    pub fn symbol_sup_norm(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|k| spectral_norm(&self.symbol_at(crate::numkit::C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / grid as f64))))
            .fold(0.0, f64::max)
    }
}

/// Exact commutator norm of two pencil operators, computed on symbols:
/// `‖[A₁,A₂]‖ + ‖[A₁,B₂] + [B₁,A₂]‖ + ‖[B₁,B₂]‖ + ‖[W₁,W₂]‖`.
pub fn symbol_commutator(first: &HardyOp, second: &HardyOp) -> f64 {
    let c = |x: &ComplexMatrix, y: &ComplexMatrix| x * y - y * x;
    let (a1, b1, a2, b2) = (&first.constant, &first.linear, &second.constant, &second.linear);
    spectral_norm(&c(a1, a2))
        + spectral_norm(&(c(a1, b2) + c(b1, a2)))
        + spectral_norm(&c(b1, b2))
        + spectral_norm(&c(&first.unitary, &second.unitary))
}

/// Symbol of `S* V` for `V = M_{zB_V} ⊕ W_V`: since `(A* + ζ̄B*)ζB_V` is
/// analytic, `S*V = M_{B*B_V + z A*B_V} ⊕ W*W_V` exactly.
pub fn adjoint_times_shift_like(s: &HardyOp, v: &HardyOp) -> Result<HardyOp> {
    if spectral_norm(&v.constant) > 0.0 {
        return Err(Error::DimensionMismatch { context: "shift-like pencil must have zero constant term", expected: 0, found: 1 });
    }
    pencil_op(
        s.linear.adjoint() * &v.linear,
        s.constant.adjoint() * &v.linear,
        Some(s.unitary.adjoint() * &v.unitary),
        s.degree,
    )
}

/// Largest coefficient-wise difference of two symbols (including `W`).
pub fn symbol_distance(first: &HardyOp, second: &HardyOp) -> f64 {
    spectral_norm(&(&first.constant - &second.constant))
        .max(spectral_norm(&(&first.linear - &second.linear)))
        .max(spectral_norm(&(&first.unitary - &second.unitary)))
}

/// `(ℱ, ℰ, P_j, U_j, W_j)`: projections and unitaries on `ℱ`, commuting
/// unitaries on `ℰ`.
#[derive(Debug, Clone)]
pub struct BclTuple {
    pub projections: Vec<ComplexMatrix>,
    pub unitaries: Vec<ComplexMatrix>,
    pub extra: Vec<ComplexMatrix>,
}

impl BclTuple {
    pub fn new(
        projections: Vec<ComplexMatrix>,
        unitaries: Vec<ComplexMatrix>,
        extra: Vec<ComplexMatrix>,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        let d = projections.len();
        if unitaries.len() != d || extra.len() != d {
            return Err(Error::InvalidBcl(format!("{d} projections, {} unitaries, {} extra", unitaries.len(), extra.len())));
        }
        let t = tol.residual_tol;
        for (j, p) in projections.iter().enumerate() {
            if spectral_norm(&(p * p - p)) > t || spectral_norm(&(p - p.adjoint())) > t {
                return Err(Error::InvalidBcl(format!("P{} is not an orthogonal projection", j + 1)));
            }
        }
        for (j, u) in unitaries.iter().enumerate() {
            if unitarity_residual(u) > t {
                return Err(Error::InvalidBcl(format!("U{} is not unitary", j + 1)));
            }
        }
        for (j, w) in extra.iter().enumerate() {
            if unitarity_residual(w) > t {
                return Err(Error::InvalidBcl(format!("W{} is not unitary", j + 1)));
            }
        }
        for (i, j) in (0..d).tuple_combinations() {
            if spectral_norm(&(&extra[i] * &extra[j] - &extra[j] * &extra[i])) > t {
                return Err(Error::InvalidBcl(format!("W{} and W{} do not commute", i + 1, j + 1)));
            }
        }
        Ok(Self { projections, unitaries, extra })
    }

    pub fn d(&self) -> usize {
        self.projections.len()
    }

    pub fn coeff_dim(&self) -> usize {
        self.projections.first().map_or(0, |p| p.nrows())
    }

    /// The model isometries `M_{U_j P_j^⊥ + z U_j P_j} ⊕ W_j`.
    pub fn model(&self, degree: usize) -> Vec<HardyOp> {
        let f = self.coeff_dim();
        (0..self.d())
            .map(|j| {
                let u = &self.unitaries[j];
                let p = &self.projections[j];
                let perp = identity(f) - p;
                HardyOp { constant: u * perp, linear: u * p, unitary: self.extra[j].clone(), degree }
            })
            .collect()
    }
}

/// The pair `(U, P), (U*, I − U P U*)`, whose model isometries commute.
pub fn bcl_induced_pair(u: &ComplexMatrix, p: &ComplexMatrix, tol: &TolerancePolicy) -> Result<BclTuple> {
    let f = u.nrows();
    let p2 = identity(f) - u * p * u.adjoint();
    BclTuple::new(vec![p.clone(), p2], vec![u.clone(), u.adjoint()], vec![zeros(0, 0), zeros(0, 0)], tol)
}

/// Residuals of the necessary conditions for the model isometries to
/// commute: `U_1⋯U_d = I`, `[U_i, U_j] = 0`, and for every ordering
/// `(j_1, …, j_d)` the conjugated projections
/// `Σ_k (U_{j_1}⋯U_{j_{k}})* P_{j_{k+1}} (U_{j_1}⋯U_{j_{k}})` sum to `I`.
pub fn check_bcl_necessary(b: &BclTuple, tol: &TolerancePolicy) -> Vec<Check> {
    let f = b.coeff_dim();
    let d = b.d();
    let t = tol.residual_tol;
    let mut checks = Vec::new();
    let product = b.unitaries.iter().fold(identity(f), |acc, u| acc * u);
    checks.push(Check::new("product of unitaries is I", spectral_norm(&(product - identity(f))), t));
    for (i, j) in (0..d).tuple_combinations() {
        let r = spectral_norm(&(&b.unitaries[i] * &b.unitaries[j] - &b.unitaries[j] * &b.unitaries[i]));
        checks.push(Check::new(format!("U{} U{} commute", i + 1, j + 1), r, t));
    }
    for perm in (0..d).permutations(d) {
        let mut acc = zeros(f, f);
        let mut prefix = identity(f);
        for &j in &perm {
            acc += prefix.adjoint() * &b.projections[j] * &prefix;
            prefix = &prefix * &b.unitaries[j];
        }
        let name: Vec<String> = perm.iter().map(|j| (j + 1).to_string()).collect();
        checks.push(Check::new(
            format!("projection sum, order ({})", name.join(",")),
            spectral_norm(&(acc - identity(f))),
            t,
        ));
    }
    checks
}

/// Schäffer isometric lift `[[A, 0], [e₀* D_A, M_z]]` of a contraction on
/// `ℋ ⊕ 𝒟_A^{N+1}`.
#[derive(Debug, Clone)]
pub struct SchafferLift {
    /// `ℋ → ℋ ⊕ 𝒟_A^{N+1}`, `h ↦ h ⊕ 0`.
    pub embedding: ComplexMatrix,
    pub matrix: ComplexMatrix,
    pub defect_rank: usize,
    pub degree: usize,
}

impl SchafferLift {
    /// Coordinates of the top-degree block, where truncation breaks isometry.
    pub fn top_degree_range(&self) -> std::ops::Range<usize> {
        let n = self.embedding.ncols();
        let start = n + self.degree * self.defect_rank;
        start..start + self.defect_rank
    }

    /// `‖(V*V − I)x‖` over `x` with vanishing top-degree component, and the
    /// lift residual `‖V* E − E A*‖`.
    pub fn checks(&self, a: &ComplexMatrix) -> Vec<Check> {
        let total = self.matrix.nrows();
        let top = self.top_degree_range();
        let keep: Vec<usize> = (0..total).filter(|i| !top.contains(i)).collect();
        let select = ComplexMatrix::from_fn(total, keep.len(), |r, c| if keep[c] == r { 1.0.into() } else { 0.0.into() });
        let v = &self.matrix;
        let iso = isometry_residual(&(v * &select));
        let lift = spectral_norm(&(v.adjoint() * &self.embedding - &self.embedding * a.adjoint()));
        vec![Check::new("isometry below top degree", iso, 1e-12), Check::new("lift of A*", lift, 1e-12)]
    }
}

pub fn schaffer_lift(a: &ComplexMatrix, degree: usize, tol: &TolerancePolicy) -> Result<SchafferLift> {
    let n = a.nrows();
    let defect = defect(a, tol)?;
    let r = defect.rank();
    let total = n + (degree + 1) * r;
    let mut m = zeros(total, total);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((n, 0), (r, n)).copy_from(&defect.coords_op());
    for k in 1..=degree {
        m.view_mut((n + k * r, n + (k - 1) * r), (r, r)).copy_from(&identity(r));
    }
    let mut embedding = zeros(total, n);
    embedding.view_mut((0, 0), (n, n)).copy_from(&identity(n));
    Ok(SchafferLift { embedding, matrix: m, defect_rank: r, degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::c;
    use crate::tuples::generate::{random_projection, random_unitary, rng_from_seed};

    #[test]
    fn shift_and_identity_symbols() {
        let s = pencil_op(zeros(1, 1), identity(1), None, 2).unwrap();
        let m = s.materialize();
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert_eq!(m[(2, 1)], c(1.0, 0.0));
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
        let i = pencil_op(identity(2), zeros(2, 2), None, 3).unwrap();
        assert_eq!(i.materialize(), identity(8));
    }

    #[test]
    fn adjoint_structure_matches_materialized_adjoint() {
        let mut rng = rng_from_seed(3);
        let a = random_unitary(3, &mut rng);
        let b = random_unitary(3, &mut rng);
        let w = random_unitary(2, &mut rng);
        let op = pencil_op(a, b, Some(w), 4).unwrap();
        assert!(spectral_norm(&(op.materialize().adjoint() - op.materialize_adjoint())) < 1e-12);
        let x = crate::tuples::generate::complex_gaussian(op.dim(), 2, &mut rng);
        assert!(spectral_norm(&(op.apply(&x) - op.materialize() * &x)) < 1e-12);
        assert!(spectral_norm(&(op.apply_adjoint(&x) - op.materialize_adjoint() * &x)) < 1e-12);
    }

    #[test]
    fn induced_pair_commutes_and_passes_conditions() {
        let tol = TolerancePolicy::default();
        let mut rng = rng_from_seed(11);
        for n in 2..6 {
            let u = random_unitary(n, &mut rng);
            let p = random_projection(n, n / 2, &mut rng);
            let pair = bcl_induced_pair(&u, &p, &tol).unwrap();
            let model = pair.model(3);
            assert!(symbol_commutator(&model[0], &model[1]) < 1e-12);
            assert!(check_bcl_necessary(&pair, &tol).iter().all(|c| c.pass));
        }
    }

    #[test]
    fn complementary_projection_pair_does_not_commute() {
        // U₂ = U₁*, P₂ = I − P₁ with the unitary on the left of the pencil.
        let tol = TolerancePolicy::default();
        let mut rng = rng_from_seed(12);
        let u = random_unitary(3, &mut rng);
        let p = random_projection(3, 1, &mut rng);
        let b = BclTuple::new(vec![p.clone(), identity(3) - &p], vec![u.clone(), u.adjoint()], vec![zeros(0, 0); 2], &tol).unwrap();
        let model = b.model(2);
        assert!(symbol_commutator(&model[0], &model[1]) > 1e-3);
    }

    #[test]
    fn schaffer_lift_of_half() {
        let a = ComplexMatrix::from_element(1, 1, c(0.5, 0.0));
        let lift = schaffer_lift(&a, 5, &TolerancePolicy::default()).unwrap();
        assert!(lift.checks(&a).iter().all(|c| c.pass));
        let u = ComplexMatrix::from_element(1, 1, c(0.0, 1.0));
        let lift = schaffer_lift(&u, 5, &TolerancePolicy::default()).unwrap();
        assert_eq!(lift.defect_rank, 0);
        assert_eq!(lift.matrix.nrows(), 1);
    }
}
