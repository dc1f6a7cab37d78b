//! Isometric and pseudo-commutative lifts built on the Douglas model.
//!
//! Lift spaces are `𝒟_{T*}^{N+1} ⊕ ℛ_D`, the Hardy part written in the range
//! basis of `D_{T*}` and `ℛ_D = ℋ_u` in the basis of the canonical
//! decomposition. At finite dimension `Q` is the projection onto `ℋ_u`, so
//! `W_{∂j}` is simply the restriction of `T_j` to `ℋ_u`.

use crate::ando::{ando_tuple, AndoTuple};
use crate::error::{Error, Result};
use crate::fundamental::{adjoint_fundamental_ops, FundamentalOps};
use crate::hardy::{adjoint_times_shift_like, pencil_op, symbol_commutator, symbol_distance, HardyOp};
use crate::numkit::{
    dominant_singular, identity, isometry_residual, matrix_power, range_basis, spectral_norm, spectral_radius,
    unitarity_residual, zeros, ComplexMatrix, SubspaceBasis,
};
use crate::report::{Check, Observation};
use crate::tuples::{canonical_decomposition, defect, ContractionTuple, DecompositionResult, DefectData};

/// Slack for rounding on top of the truncation tail.
const ROUNDING_SLACK: f64 = 1e-11;

/// Largest Krylov degree used by the minimality check.
const KRYLOV_DEGREE_CAP: usize = 12;

/// Smallest `N` with `‖T_c^{N+1}‖ ≤ target`, starting from the geometric
/// estimate and growing until the actual tail is small enough.
pub fn adaptive_degree(cnu_product: &ComplexMatrix, target: f64, cap: usize) -> Result<(usize, f64)> {
    const FLOOR: usize = 8;
    if cnu_product.nrows() == 0 {
        return Ok((FLOOR, 0.0));
    }
    let rho = spectral_radius(cnu_product)?;
    let estimate = if rho <= f64::EPSILON { FLOOR } else { ((target.ln() / rho.ln()).ceil() - 1.0).max(0.0) as usize };
    let mut degree = estimate.clamp(FLOOR, cap.max(FLOOR));
    loop {
        let tail = spectral_norm(&matrix_power(cnu_product, degree + 1));
        if tail <= target {
            return Ok((degree, tail));
        }
        if degree >= cap {
            return Err(Error::TailBoundExceeded { tail, cap });
        }
        degree = (degree + (degree / 4).max(4)).min(cap);
    }
}

/// Douglas minimal isometric lift of the product together with the
/// canonical commutative unitary tuple on `ℛ_D`.
#[derive(Debug, Clone)]
pub struct DouglasModel {
    pub decomposition: DecompositionResult,
    /// `D_{T*}` with its range basis (Hardy coefficient coordinates).
    pub defect_star: DefectData,
    /// `Q = P_{ℋ_u}`.
    pub q: ComplexMatrix,
    pub w_product: ComplexMatrix,
    pub w_partial: Vec<ComplexMatrix>,
    pub degree: usize,
    /// `‖T_c^{N+1}‖`, the norm of the truncated part of `Π_D`.
    pub tail_bound: f64,
    /// `Π_D : ℋ → 𝒟_{T*}^{N+1} ⊕ ℛ_D`.
    pub embedding: ComplexMatrix,
    pub checks: Vec<Check>,
}

impl DouglasModel {
    pub fn defect_rank(&self) -> usize {
        self.defect_star.rank()
    }

    pub fn unitary_dim(&self) -> usize {
        self.w_product.nrows()
    }

    /// `W_(∂j)`, the product of the `W_{∂k}` with `k ≠ j`.
    pub fn w_partial_product(&self, j: usize) -> ComplexMatrix {
        self.w_partial
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .fold(identity(self.unitary_dim()), |acc, (_, w)| acc * w)
    }

    /// `V_D = M_z ⊕ W_D`.
    pub fn isometry(&self) -> HardyOp {
        let r = self.defect_rank();
        HardyOp { constant: zeros(r, r), linear: identity(r), unitary: self.w_product.clone(), degree: self.degree }
    }

    /// Tolerance for identities that hold up to the truncation tail.
    pub fn tail_tolerance(&self) -> f64 {
        self.tail_bound + ROUNDING_SLACK
    }
}

/// `⊕_n map·B*D_{T*}T*^n h ⊕ B_u* h` for `n ≤ N`.
fn observability(tuple: &ContractionTuple, defect_star: &DefectData, map: &ComplexMatrix, unitary_basis: &SubspaceBasis, degree: usize) -> ComplexMatrix {
    let n = tuple.dim();
    let t_star = tuple.product().adjoint();
    let head = map * defect_star.coords_op();
    let f = head.nrows();
    let u = unitary_basis.rank();
    let mut out = zeros((degree + 1) * f + u, n);
    let mut power = identity(n);
    for k in 0..=degree {
        out.view_mut((k * f, 0), (f, n)).copy_from(&(&head * &power));
        power = &t_star * power;
    }
    out.view_mut(((degree + 1) * f, 0), (u, n)).copy_from(&unitary_basis.matrix().adjoint());
    out
}

/// Builds the Douglas model with adaptive truncation and verifies it.
pub fn douglas_model(tuple: &ContractionTuple) -> Result<DouglasModel> {
    let tol = *tuple.tol();
    let decomposition = canonical_decomposition(tuple)?;
    let adjoint = tuple.adjoint();
    let defect_star = defect(&adjoint.product(), &tol)?;
    let cnu_product = decomposition.cnu_part.product();
    let (degree, tail_bound) = adaptive_degree(&cnu_product, 0.5 * tol.residual_tol, tol.max_truncation)?;

    let w_partial: Vec<ComplexMatrix> = decomposition.unitary_part.ops().to_vec();
    let u = decomposition.unitary_basis.rank();
    let w_product = w_partial.iter().fold(identity(u), |acc, w| acc * w);
    let q = decomposition.projection_unitary.clone();
    let r = defect_star.rank();
    let embedding = observability(tuple, &defect_star, &identity(r), &decomposition.unitary_basis, degree);

    let model = DouglasModel {
        decomposition,
        defect_star,
        q,
        w_product,
        w_partial,
        degree,
        tail_bound,
        embedding,
        checks: Vec::new(),
    };
    let checks = douglas_checks(tuple, &model);
    Ok(DouglasModel { checks, ..model })
}

fn douglas_checks(tuple: &ContractionTuple, model: &DouglasModel) -> Vec<Check> {
    let tol = tuple.tol();
    let tail_tol = model.tail_tolerance();
    let mut checks = Vec::new();
    let t = tuple.product();
    let bu = model.decomposition.unitary_basis.matrix();
    checks.push(Check::new("truncation tail", model.tail_bound, tol.residual_tol));
    checks.push(Check::new("unitary projection, eigenvector vs limit method", model.decomposition.method_agreement, tol.residual_tol));
    let q_limit_gap = spectral_norm(&(crate::tuples::q_limit(&t, tol) - &model.q));
    checks.push(Check::new("Q squared is the limit of T^n T*^n", q_limit_gap, tol.residual_tol));
    for (j, w) in model.w_partial.iter().enumerate() {
        let label = j + 1;
        checks.push(Check::new(format!("W_partial {label} unitary"), unitarity_residual(w), tol.residual_tol));
        let x = spectral_norm(&(bu.adjoint() * tuple.op(j).adjoint() - w.adjoint() * bu.adjoint()));
        checks.push(Check::new(format!("X*Q = QT* for T_{label}"), x, tol.residual_tol));
        for (k, other) in model.w_partial.iter().enumerate().skip(j + 1) {
            let c = spectral_norm(&(w * other - other * w));
            checks.push(Check::new(format!("W_partial {label},{} commute", k + 1), c, tol.residual_tol));
        }
    }
    let v = model.isometry();
    let pi = &model.embedding;
    let intertwining = spectral_norm(&(pi * t.adjoint() - v.apply_adjoint(pi)));
    checks.push(Check::new("Douglas intertwining", intertwining, tail_tol));
    let tail_sq = model.tail_bound * model.tail_bound;
    checks.push(Check::new("embedding is isometric up to the tail", isometry_residual(pi), tail_sq + tol.residual_tol));
    checks
}

/// The noncommutative isometric lift assembled from the Andô tuple of `T*`.
#[derive(Debug, Clone)]
pub struct LiftBundle {
    pub douglas: DouglasModel,
    pub ando_star: AndoTuple,
    /// `Π_{1*}`.
    pub embedding: ComplexMatrix,
    /// `V_j`, lifting `T_j`.
    pub isometries: Vec<HardyOp>,
    /// Companion pencils lifting `T_(j)`.
    pub companions: Vec<HardyOp>,
    /// Symbol commutator norms of `(V_i, V_j)`, `i < j`.
    pub commutators: Vec<Observation>,
    pub checks: Vec<Check>,
}

/// `(U P^⊥, U P)` and `(P U*, P^⊥ U*)` conjugated by `τ`.
fn conjugated_pencils(ando: &AndoTuple, j: usize) -> [(ComplexMatrix, ComplexMatrix); 2] {
    let f = ando.dim();
    let p = ando.projection(j);
    let perp = identity(f) - &p;
    let u = &ando.unitaries[j];
    let tau = &ando.tau[j];
    let conj = |m: ComplexMatrix| tau * m * tau.adjoint();
    [
        (conj(u * &perp), conj(u * &p)),
        (conj(&p * u.adjoint()), conj(&perp * u.adjoint())),
    ]
}

/// Builds the isometric lift `V_j = M_{τ(U P^⊥ + zUP)τ*} ⊕ W_{∂j}` of
/// `(T_1, …, T_d)` and verifies both intertwinings with `Π_{1*}`.
pub fn noncommutative_lift(tuple: &ContractionTuple) -> Result<LiftBundle> {
    let douglas = douglas_model(tuple)?;
    let ando_star = ando_tuple(&tuple.adjoint())?;
    let degree = douglas.degree;
    let tail_tol = douglas.tail_tolerance();
    let embedding = observability(
        tuple,
        &douglas.defect_star,
        &ando_star.lambda[0],
        &douglas.decomposition.unitary_basis,
        degree,
    );
    let mut isometries = Vec::new();
    let mut companions = Vec::new();
    let mut checks = Vec::new();
    for j in 0..tuple.d() {
        let [(a, b), (ca, cb)] = conjugated_pencils(&ando_star, j);
        let v = pencil_op(a, b, Some(douglas.w_partial[j].clone()), degree)?;
        let companion = pencil_op(ca, cb, Some(douglas.w_partial_product(j)), degree)?;
        let label = j + 1;
        let r1 = spectral_norm(&(&embedding * tuple.op(j).adjoint() - v.apply_adjoint(&embedding)));
        let r2 = spectral_norm(&(&embedding * tuple.partial_product(j).adjoint() - companion.apply_adjoint(&embedding)));
        checks.push(Check::new(format!("lift intertwines T_{label}*"), r1, tail_tol));
        checks.push(Check::new(format!("lift intertwines T_({label})*"), r2, tail_tol));
        checks.push(Check::new(format!("V_{label} symbol is isometric"), symbol_isometry_residual(&v), 1e-10));
        isometries.push(v);
        companions.push(companion);
    }
    checks.push(Check::new("lift embedding isometric up to the tail", isometry_residual(&embedding), douglas.tail_bound.powi(2) + tuple.tol().residual_tol));
    let mut commutators = Vec::new();
    for i in 0..tuple.d() {
        for j in i + 1..tuple.d() {
            commutators.push(Observation::new(
                format!("symbol commutator V_{} V_{}", i + 1, j + 1),
                symbol_commutator(&isometries[i], &isometries[j]),
            ));
        }
    }
    checks.extend(ando_star.checks.iter().cloned());
    Ok(LiftBundle { douglas, ando_star, embedding, isometries, companions, commutators, checks })
}

/// `‖(A+zB)*(A+zB) − I‖` coefficient-wise, plus unitarity of `W`.
fn symbol_isometry_residual(op: &HardyOp) -> f64 {
    let (a, b) = (&op.constant, &op.linear);
    let f = a.nrows();
    spectral_norm(&(a.adjoint() * a + b.adjoint() * b - identity(f)))
        .max(spectral_norm(&(a.adjoint() * b)))
        .max(unitarity_residual(&op.unitary))
}

/// The pseudo-commutative contractive lift on the Douglas model.
#[derive(Debug, Clone)]
pub struct PccLift {
    pub douglas: DouglasModel,
    pub adjoint_ops: FundamentalOps,
    /// `S_j = M_{G_{j1}* + zG_{j2}} ⊕ W_{∂j}`.
    pub contractions: Vec<HardyOp>,
    /// `S_j' = M_{G_{j2}* + zG_{j1}} ⊕ W_(∂j)`.
    pub companions: Vec<HardyOp>,
    pub isometry: HardyOp,
    pub krylov_degree: usize,
    /// Dimension of the truncated lift space not reached by the Krylov span.
    pub minimality_gap: usize,
    pub checks: Vec<Check>,
}

fn pcc_pencils(douglas: &DouglasModel, pairs: &[(ComplexMatrix, ComplexMatrix)]) -> Result<(Vec<HardyOp>, Vec<HardyOp>)> {
    let mut contractions = Vec::new();
    let mut companions = Vec::new();
    for (j, (g1, g2)) in pairs.iter().enumerate() {
        contractions.push(pencil_op(g1.adjoint(), g2.clone(), Some(douglas.w_partial[j].clone()), douglas.degree)?);
        companions.push(pencil_op(g2.adjoint(), g1.clone(), Some(douglas.w_partial_product(j)), douglas.degree)?);
    }
    Ok((contractions, companions))
}

/// Rank deficiency of `span{V_D^k Π_D h : k ≤ K}` inside the first `K+1`
/// degrees plus `ℛ_D`.
fn krylov_gap(douglas: &DouglasModel, krylov_degree: usize, rel_tol: f64) -> usize {
    let r = douglas.defect_rank();
    let u = douglas.unitary_dim();
    let hardy_rows = (krylov_degree + 1) * r;
    let target = hardy_rows + u;
    if target == 0 {
        return 0;
    }
    let v = douglas.isometry();
    let mut block = douglas.embedding.clone();
    let hardy_total = (douglas.degree + 1) * r;
    let mut columns = Vec::new();
    for _ in 0..=krylov_degree {
        let mut kept = zeros(target, block.ncols());
        kept.rows_mut(0, hardy_rows).copy_from(&block.rows(0, hardy_rows));
        kept.rows_mut(hardy_rows, u).copy_from(&block.rows(hardy_total, u));
        columns.extend(kept.column_iter().map(|c| c.into_owned()));
        block = v.apply(&block);
    }
    let span = ComplexMatrix::from_columns(&columns);
    let rank = dominant_singular(&span, rel_tol).values.len();
    target.saturating_sub(rank)
}

/// Builds the pcc lift and verifies minimality, the symbol identities and
/// both intertwinings.
pub fn pcc_lift(tuple: &ContractionTuple) -> Result<PccLift> {
    let douglas = douglas_model(tuple)?;
    let adjoint_ops = adjoint_fundamental_ops(tuple)?;
    let pairs: Vec<_> = adjoint_ops.pairs.iter().map(|p| (p.first.clone(), p.second.clone())).collect();
    let (contractions, companions) = pcc_pencils(&douglas, &pairs)?;
    let isometry = douglas.isometry();
    let tail_tol = douglas.tail_tolerance();
    let pi = &douglas.embedding;
    let mut checks = douglas.checks.clone();
    for j in 0..tuple.d() {
        let label = j + 1;
        let product = adjoint_times_shift_like(&contractions[j], &isometry)?;
        checks.push(Check::new(format!("S'_{label} = S_{label}* V on symbols"), symbol_distance(&product, &companions[j]), 1e-12));
        checks.push(Check::new(format!("S_{label} commutes with V"), symbol_commutator(&contractions[j], &isometry), 1e-12));
        checks.push(Check::new(format!("S'_{label} commutes with V"), symbol_commutator(&companions[j], &isometry), 1e-12));
        let r1 = spectral_norm(&(contractions[j].apply_adjoint(pi) - pi * tuple.op(j).adjoint()));
        let r2 = spectral_norm(&(companions[j].apply_adjoint(pi) - pi * tuple.partial_product(j).adjoint()));
        checks.push(Check::new(format!("S_{label}* intertwines T_{label}*"), r1, tail_tol));
        checks.push(Check::new(format!("S'_{label}* intertwines T_({label})*"), r2, tail_tol));
    }
    let krylov_degree = douglas.degree.min(KRYLOV_DEGREE_CAP);
    let minimality_gap = krylov_gap(&douglas, krylov_degree, tuple.tol().rank_rel_tol);
    checks.push(Check::new("Krylov minimality gap", minimality_gap as f64, 0.0));
    if minimality_gap > 0 {
        return Err(Error::MinimalityFailure { gap: minimality_gap });
    }
    Ok(PccLift { douglas, adjoint_ops, contractions, companions, isometry, krylov_degree, minimality_gap, checks })
}

/// Builds the pencils of the pcc lift a second time from the joint Halmos
/// dilation of the Andô tuple of `T*` and compares them with `lift`.
pub fn pcc_uniqueness_check(tuple: &ContractionTuple, lift: &PccLift) -> Result<Vec<Check>> {
    let ando_star = ando_tuple(&tuple.adjoint())?;
    let pairs: Vec<_> = (0..tuple.d()).map(|j| ando_star.joint_halmos_pair(j)).collect();
    let (contractions, companions) = pcc_pencils(&lift.douglas, &pairs)?;
    let tol = tuple.tol().residual_tol;
    let mut checks = Vec::new();
    for j in 0..tuple.d() {
        let label = j + 1;
        checks.push(Check::new(format!("S_{label} agrees across constructions"), symbol_distance(&contractions[j], &lift.contractions[j]), tol));
        checks.push(Check::new(format!("S'_{label} agrees across constructions"), symbol_distance(&companions[j], &lift.companions[j]), tol));
    }
    Ok(checks)
}

/// Model tuple on `ran Π_D` together with the identification of `ℋ`.
#[derive(Debug, Clone)]
pub struct FunctionalModel {
    pub model: ContractionTuple,
    /// Orthonormal basis of `ran Π_D` inside the truncated lift space.
    pub model_basis: ComplexMatrix,
    /// `C = Y* Π_D`, unitary up to the tail, with `C T_j C* ≈ model_j`.
    pub certificate: ComplexMatrix,
    pub degree: usize,
    pub checks: Vec<Check>,
}

/// Compresses the pcc lift of a tuple with c.n.u. product to `ran Π_D`.
pub fn functional_model(tuple: &ContractionTuple) -> Result<FunctionalModel> {
    let lift = pcc_lift(tuple)?;
    let u = lift.douglas.unitary_dim();
    if u > 0 {
        return Err(Error::NotCompletelyNonUnitary(u));
    }
    let tol = *tuple.tol();
    let pi = &lift.douglas.embedding;
    let basis = range_basis(pi, &tol);
    let y = basis.matrix().clone();
    let certificate = y.adjoint() * pi;
    let ops: Vec<ComplexMatrix> = lift.contractions.iter().map(|s| y.adjoint() * s.apply(&y)).collect();
    let mut checks = lift.checks.clone();
    let tail_tol = lift.douglas.tail_tolerance();
    checks.push(Check::new("model space has the dimension of H", (basis.rank() as f64 - tuple.dim() as f64).abs(), 0.0));
    checks.push(Check::new("certificate unitary", unitarity_residual(&certificate), tail_tol + tol.residual_tol));
    for (j, m) in ops.iter().enumerate() {
        let r = spectral_norm(&(m - &certificate * tuple.op(j) * certificate.adjoint()));
        checks.push(Check::new(format!("model operator {} matches T_{}", j + 1, j + 1), r, 10.0 * tail_tol + tol.residual_tol));
    }
    if let Some(bad) = checks.iter().find(|c| !c.pass) {
        return Err(Error::ResidualExceeded { equation: bad.name.clone(), norm: bad.residual });
    }
    let model = ContractionTuple::new(ops, tol)?;
    Ok(FunctionalModel { model, model_basis: y, certificate, degree: lift.douglas.degree, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::c;
    use crate::numkit::TolerancePolicy;
    use crate::tuples::validate;

    fn scalar_pair(a: f64, b: f64) -> ContractionTuple {
        let m = |x: f64| ComplexMatrix::from_element(1, 1, c(x, 0.0));
        validate(vec![m(a), m(b)], TolerancePolicy::default()).unwrap()
    }

    #[test]
    fn unitary_tuple_has_trivial_hardy_part() {
        let m = |x: f64| ComplexMatrix::from_element(1, 1, c(x.cos(), x.sin()));
        let t = validate(vec![m(0.3), m(1.1)], TolerancePolicy::default()).unwrap();
        let lift = pcc_lift(&t).unwrap();
        assert_eq!(lift.douglas.defect_rank(), 0);
        assert!(lift.checks.iter().all(|c| c.pass));
        assert!((lift.contractions[0].unitary[(0, 0)] - c(0.3f64.cos(), 0.3f64.sin())).norm() < 1e-12);
    }

    #[test]
    fn scalar_halves_pencils_are_two_fifths() {
        let lift = pcc_lift(&scalar_pair(0.5, 0.5)).unwrap();
        let s = &lift.contractions[0];
        assert!((s.constant[(0, 0)].norm() - 0.4).abs() < 1e-12);
        assert!((s.linear[(0, 0)].norm() - 0.4).abs() < 1e-12);
        assert!(lift.checks.iter().all(|c| c.pass), "{:?}", lift.checks);
        let dual = pcc_uniqueness_check(&scalar_pair(0.5, 0.5), &lift).unwrap();
        assert!(dual.iter().all(|c| c.residual < 1e-12));
    }

    #[test]
    fn zero_pair_noncommutative_lift_is_exact() {
        let lift = noncommutative_lift(&scalar_pair(0.0, 0.0)).unwrap();
        assert!(lift.checks.iter().all(|c| c.pass), "{:?}", lift.checks);
        assert_eq!(lift.isometries[0].coeff_dim(), 2);
    }

    #[test]
    fn scalar_functional_model_recovers_the_pair() {
        let t = scalar_pair(0.5, 0.5);
        let fm = functional_model(&t).unwrap();
        assert!((fm.model.op(0)[(0, 0)] - c(0.5, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn adaptive_degree_tracks_decay() {
        let t = ComplexMatrix::from_element(1, 1, c(0.5, 0.0));
        let (n, tail) = adaptive_degree(&t, 1e-8, 200).unwrap();
        assert!(tail <= 1e-8);
        assert!(0.5f64.powi(n as i32) > 1e-8);
        let slow = ComplexMatrix::from_element(1, 1, c(0.999, 0.0));
        assert!(matches!(adaptive_degree(&slow, 1e-8, 200), Err(Error::TailBoundExceeded { .. })));
    }
}
