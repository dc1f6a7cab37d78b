//! Dense complex linear-algebra kernel shared by every other module.
//!
//! All operators are `DMatrix<Complex64>`. Empty (0×0) matrices are accepted
//! everywhere and behave as operators on the zero space.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Shorthand constructor for a complex scalar.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Numerical thresholds applied uniformly across the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TolerancePolicy {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel_tol: f64,
    /// Acceptance threshold for identity residuals.
    pub residual_tol: f64,
    /// Sample count for circle grids (numerical radius, pencil checks).
    pub grid_points: usize,
    /// Largest Hardy-space truncation degree the adaptive search may use.
    pub max_truncation: usize,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rank_rel_tol: 1e-10, residual_tol: 1e-8, grid_points: 360, max_truncation: 200 }
    }
}

impl TolerancePolicy {
    pub fn check(&self) -> Result<()> {
        let ok = self.rank_rel_tol > 0.0
            && self.residual_tol > 0.0
            && self.rank_rel_tol.is_finite()
            && self.residual_tol.is_finite()
            && self.grid_points >= 8
            && self.max_truncation >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidTolerance(format!("{self:?}")))
        }
    }
}

/// Orthonormal basis of a subspace, stored as the columns of an
/// `ambient_dim × rank` isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: ComplexMatrix,
}

impl SubspaceBasis {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(basis: ComplexMatrix) -> Self {
        Self { basis }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self { basis: ComplexMatrix::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { basis: ComplexMatrix::identity(ambient_dim, ambient_dim) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Orthogonal projection onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Coordinates of ambient vectors (columns of `x`) in this basis.
    pub fn coords(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * x
    }

    /// Compresses an ambient operator to the subspace.
    pub fn compress(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * a * &self.basis
    }

    /// `‖B*B − I‖`.
    pub fn orthonormality_residual(&self) -> f64 {
        isometry_residual(&self.basis)
    }
}

pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.nrows() == 1 || a.ncols() == 1 {
        return a.norm();
    }
    let gram = if a.nrows() <= a.ncols() { a * a.adjoint() } else { a.adjoint() * a };
    lambda_max_hermitian(&gram).max(0.0).sqrt()
}

/// Singular values in descending order (`min(m, n)` of them).
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let p = a.nrows().min(a.ncols());
    let (values, _) = hermitian_eigen(&augmented(a));
    values.into_iter().take(p).map(|s| s.max(0.0)).collect()
}

/// `[[0, A], [A*, 0]]`, whose eigenvalues are `±σ_i` (plus zeros).
fn augmented(a: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = a.shape();
    let mut h = ComplexMatrix::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.adjoint());
    h
}

/// Singular triplets `(σ_i, u_i, v_i)` with `σ_i > rel_tol·σ_max`, from the
/// Hermitian eigenproblem of the augmented matrix. Singular values are
/// accurate to `O(ε‖A‖)` in absolute terms.
pub struct Singular {
    pub values: Vec<f64>,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

pub fn dominant_singular(a: &ComplexMatrix, rel_tol: f64) -> Singular {
    let (m, n) = a.shape();
    if a.is_empty() {
        return Singular { values: Vec::new(), left: ComplexMatrix::zeros(m, 0), right: ComplexMatrix::zeros(n, 0) };
    }
    let (values, vectors) = hermitian_eigen(&augmented(a));
    let smax = values[0].max(0.0);
    let floor = (rel_tol * smax).max(4.0 * (m + n) as f64 * f64::EPSILON * smax);
    let k = values.iter().take(m.min(n)).filter(|&&s| s > floor && s > 0.0).count();
    let scale = C64::from(std::f64::consts::SQRT_2);
    let left = orthonormalize(&(vectors.view((0, 0), (m, k)) * scale));
    let right = orthonormalize(&(vectors.view((m, 0), (n, k)) * scale));
    Singular { values: values[..k].to_vec(), left, right }
}

/// Löwdin orthonormalization `X (X*X)^{-1/2}` of nearly orthonormal columns.
fn orthonormalize(x: &ComplexMatrix) -> ComplexMatrix {
    let k = x.ncols();
    if k == 0 {
        return x.clone();
    }
    let (values, vectors) = hermitian_eigen(&(x.adjoint() * x));
    let scaled = ComplexMatrix::from_fn(k, k, |r, c| vectors[(r, c)] / values[c].max(f64::MIN_POSITIVE).sqrt());
    x * (&scaled * vectors.adjoint())
}

/// Orthonormal basis of `{x : ‖Ax‖ ≤ threshold‖x‖}` from the eigenvectors of
/// `A*A`.
pub fn null_space(a: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    let n = a.ncols();
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let (values, vectors) = hermitian_eigen(&(a.adjoint() * a));
    let cut = threshold * threshold;
    let keep: Vec<usize> = (0..n).filter(|&k| values[k] <= cut).collect();
    ComplexMatrix::from_fn(n, keep.len(), |r, c| vectors[(r, keep[c])])
}

pub fn ensure_finite(a: &ComplexMatrix, context: &'static str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

pub fn ensure_square(a: &ComplexMatrix, context: &'static str) -> Result<()> {
    if a.nrows() == a.ncols() {
        Ok(())
    } else {
        Err(Error::NotSquare { context, rows: a.nrows(), cols: a.ncols() })
    }
}

/// `‖A*A − I‖`.
pub fn isometry_residual(a: &ComplexMatrix) -> f64 {
    let n = a.ncols();
    spectral_norm(&(a.adjoint() * a - ComplexMatrix::identity(n, n)))
}

/// `max(‖A*A − I‖, ‖AA* − I‖)`.
pub fn unitarity_residual(a: &ComplexMatrix) -> f64 {
    let m = a.nrows();
    isometry_residual(a).max(spectral_norm(&(a * a.adjoint() - ComplexMatrix::identity(m, m))))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    spectral_norm(&commutator(a, b))
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Makes the first non-negligible entry of every column real and positive.
fn normalize_column_phases(m: &mut ComplexMatrix) {
    for mut col in m.column_iter_mut() {
        let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        if let Some(lead) = col.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
            let phase = lead.conj() / lead.norm();
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues descending,
/// eigenvector phases normalized.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    normalize_column_phases(&mut vectors);
    (values, vectors)
}

/// Largest eigenvalue of the Hermitian part of `a`.
pub fn lambda_max_hermitian(a: &ComplexMatrix) -> f64 {
    match a.nrows() {
        0 => 0.0,
        1 => a[(0, 0)].re,
        2 => {
            let p = a[(0, 0)].re;
            let q = a[(1, 1)].re;
            let off = (a[(0, 1)] + a[(1, 0)].conj()) * 0.5;
            0.5 * (p + q) + (0.25 * (p - q) * (p - q) + off.norm_sqr()).sqrt()
        }
        _ => hermitian_part(a).symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn check_hermitian(a: &ComplexMatrix, scale: f64, tol: &TolerancePolicy) -> Result<()> {
    ensure_square(a, "hermitian input")?;
    ensure_finite(a, "hermitian input")?;
    let residual = spectral_norm(&(a - a.adjoint()));
    if residual > tol.residual_tol * scale.max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Square root of a positive semidefinite matrix whose tolerances are
/// measured against `scale`.
///
/// Eigenvalues below the roundoff floor `1e3·n·ε·scale` are set to zero, so
/// exactly singular inputs produce exactly singular roots. Eigenvalues below
/// `−rank_rel_tol·scale` are rejected.
pub fn psd_sqrt_scaled(a: &ComplexMatrix, scale: f64, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    check_hermitian(a, scale, tol)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let (values, vectors) = hermitian_eigen(a);
    let floor = 1e3 * n as f64 * f64::EPSILON * scale;
    let mut roots = Vec::with_capacity(n);
    for &lambda in &values {
        if lambda < -tol.rank_rel_tol * scale {
            return Err(Error::IndefiniteMatrix { eigenvalue: lambda });
        }
        roots.push(if lambda <= floor { 0.0 } else { lambda.sqrt() });
    }
    let scaled = ComplexMatrix::from_fn(n, n, |r, k| vectors[(r, k)] * roots[k]);
    let root = &scaled * vectors.adjoint();
    let root = hermitian_part(&root);
    ensure_finite(&root, "psd square root")?;
    Ok(root)
}

/// Positive square root of a Hermitian positive semidefinite matrix, with
/// tolerances relative to `‖A‖`.
pub fn hermitian_sqrt(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let scale = spectral_norm(a);
    if scale == 0.0 {
        ensure_square(a, "hermitian input")?;
        return Ok(ComplexMatrix::zeros(a.nrows(), a.ncols()));
    }
    psd_sqrt_scaled(a, scale, tol)
}

/// Orthonormal basis for the column space, from the SVD with relative cutoff
/// `rank_rel_tol·σ_max`. Column phases are normalized so the first
/// non-negligible component is real and positive.
pub fn range_basis(a: &ComplexMatrix, tol: &TolerancePolicy) -> SubspaceBasis {
    let m = a.nrows();
    if a.is_empty() {
        return SubspaceBasis::empty(m);
    }
    let mut basis = dominant_singular(a, tol.rank_rel_tol).left;
    normalize_column_phases(&mut basis);
    SubspaceBasis::from_orthonormal(basis)
}

/// Orthonormal basis for the orthogonal complement of an orthonormal basis.
pub fn orth_complement(b: &SubspaceBasis) -> SubspaceBasis {
    let n = b.ambient_dim();
    let want = n - b.rank();
    if want == 0 {
        return SubspaceBasis::empty(n);
    }
    if b.rank() == 0 {
        return SubspaceBasis::full(n);
    }
    let p = ComplexMatrix::identity(n, n) - b.projector();
    let (_, vectors) = hermitian_eigen(&p);
    let basis = vectors.columns(0, want).into_owned();
    SubspaceBasis::from_orthonormal(basis)
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    ensure_square(a, "eigenvalue input")?;
    ensure_finite(a, "eigenvalue input")?;
    let n = a.nrows();
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![a[(0, 0)]]),
        _ => {
            let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-15, 10_000)
                .ok_or(Error::NoConvergence("complex Schur decomposition"))?;
            let (_, t) = schur.unpack();
            Ok((0..n).map(|i| t[(i, i)]).collect())
        }
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `max_θ λ_max(Re(e^{iθ}A))` from a uniform grid refined by golden-section
/// search around the best sample.
pub fn numerical_radius(a: &ComplexMatrix, grid_points: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return a[(0, 0)].norm();
    }
    let adj = a.adjoint();
    let eval = |theta: f64| {
        let w = C64::from_polar(1.0, theta);
        let h = (a * w + &adj * w.conj()).scale(0.5);
        lambda_max_hermitian(&h)
    };
    let g = grid_points.max(8);
    let step = std::f64::consts::TAU / g as f64;
    let (mut best_k, mut best) = (0, f64::NEG_INFINITY);
    for k in 0..g {
        let v = eval(k as f64 * step);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((best_k as f64 - 1.0) * step, (best_k as f64 + 1.0) * step);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        }
    }
    best.max(f1).max(f2)
}

/// Pseudo-inverse with relative singular-value cutoff.
pub fn pinv(a: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    let (m, n) = a.shape();
    let sv = dominant_singular(a, rel_tol);
    let mut out = ComplexMatrix::zeros(n, m);
    for (k, &s) in sv.values.iter().enumerate() {
        out += sv.right.column(k) * sv.left.column(k).adjoint() * C64::from(1.0 / s);
    }
    out
}

/// Inverse of a Hermitian positive definite matrix through its eigenvalues.
fn hermitian_pd_inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(a);
    let scaled = ComplexMatrix::from_fn(n, n, |r, k| vectors[(r, k)] / values[k]);
    hermitian_part(&(&scaled * vectors.adjoint()))
}

/// Solves `D X D = L` for `X` supported on the range of `D`, returned in the
/// coordinates of the basis `basis` of `ran D`.
///
/// `D` must be Hermitian and invertible on `ran D`. A residual check on
/// `‖D·(B X B*)·D − L‖` guards against inconsistent right-hand sides.
pub fn pinv_solve_on_subspace(
    rhs: &ComplexMatrix,
    d: &ComplexMatrix,
    basis: &SubspaceBasis,
    tol: &TolerancePolicy,
) -> Result<ComplexMatrix> {
    let r = basis.rank();
    if r == 0 {
        let residual = spectral_norm(rhs);
        if residual > tol.residual_tol * spectral_norm(d).max(1.0) {
            return Err(Error::InconsistentSystem { residual });
        }
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let b = basis.matrix();
    let dc = basis.compress(d);
    let dc_inv = hermitian_pd_inverse(&dc);
    let x = &dc_inv * (b.adjoint() * rhs * b) * &dc_inv;
    let residual = spectral_norm(&(d * b * &x * b.adjoint() * d - rhs));
    if residual > tol.residual_tol * spectral_norm(rhs).max(1.0) {
        return Err(Error::InconsistentSystem { residual });
    }
    ensure_finite(&x, "subspace solve")?;
    Ok(x)
}

/// Unitary on the ambient space that maps `dom·ξ` to `img·action·ξ` and
/// sends the complement of `dom` onto the complement of `img` by pairing the
/// canonical complement bases.
pub fn complete_to_unitary(
    dom: &SubspaceBasis,
    img: &SubspaceBasis,
    action: &ComplexMatrix,
    tol: &TolerancePolicy,
) -> Result<ComplexMatrix> {
    let n = dom.ambient_dim();
    if img.ambient_dim() != n || dom.rank() != img.rank() {
        return Err(Error::DimensionMismatch {
            context: "unitary completion",
            expected: dom.rank(),
            found: img.rank(),
        });
    }
    let k = dom.rank();
    if action.nrows() != k || action.ncols() != k {
        return Err(Error::DimensionMismatch { context: "unitary completion action", expected: k, found: action.nrows() });
    }
    let residual = unitarity_residual(action);
    if k > 0 && residual > tol.residual_tol {
        return Err(Error::NotIsometric { context: "unitary completion action", residual });
    }
    let cd = orth_complement(dom);
    let ci = orth_complement(img);
    let u = img.matrix() * action * dom.matrix().adjoint() + ci.matrix() * cd.matrix().adjoint();
    let residual = unitarity_residual(&u);
    if residual > tol.residual_tol {
        return Err(Error::NotIsometric { context: "unitary completion", residual });
    }
    Ok(u)
}

/// Nearest unitary in Frobenius norm (polar factor) of a square matrix.
pub fn polar_unitary(a: &ComplexMatrix) -> ComplexMatrix {
    if a.is_empty() {
        return a.clone();
    }
    let (values, vectors) = hermitian_eigen(&(a.adjoint() * a));
    let smax = values[0].max(0.0).sqrt();
    let k = values.iter().filter(|&&l| l.max(0.0).sqrt() > 1e-8 * smax && l > 0.0).count();
    let right = vectors.columns(0, k).into_owned();
    let mut left = a * &right;
    for c in 0..k {
        let s = values[c].sqrt();
        left.column_mut(c).iter_mut().for_each(|z| *z /= s);
    }
    let left = SubspaceBasis::from_orthonormal(orthonormalize(&left));
    let right = SubspaceBasis::from_orthonormal(right);
    let cl = orth_complement(&left);
    let cr = orth_complement(&right);
    left.matrix() * right.matrix().adjoint() + cl.matrix() * cr.matrix().adjoint()
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = ComplexMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-major vectorization.
pub fn vectorize(a: &ComplexMatrix) -> Vec<C64> {
    a.iter().copied().collect()
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Matrix power by repeated squaring.
pub fn matrix_power(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut result = identity(a.nrows());
    let mut base = a.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn sqrt_of_known_matrix() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let s = hermitian_sqrt(&a, &tol()).unwrap();
        let p = (3f64.sqrt() + 1.0) / 2.0;
        let q = (3f64.sqrt() - 1.0) / 2.0;
        let expected = ComplexMatrix::from_row_slice(2, 2, &[c(p, 0.0), c(q, 0.0), c(q, 0.0), c(p, 0.0)]);
        assert!(spectral_norm(&(s - expected)) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_indefinite_and_non_hermitian() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(hermitian_sqrt(&a, &tol()), Err(Error::IndefiniteMatrix { .. })));
        let b = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(hermitian_sqrt(&b, &tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn range_basis_of_rank_one() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let b = range_basis(&a, &tol());
        assert_eq!(b.rank(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.matrix()[(0, 0)] - c(h, 0.0)).norm() < 1e-14);
        assert!((b.matrix()[(1, 0)] - c(h, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn numerical_radius_of_jordan_block() {
        let mut j = zeros(2, 2);
        j[(0, 1)] = c(1.0, 0.0);
        assert!((numerical_radius(&j, 360) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn subspace_solve_scalar() {
        let d = ComplexMatrix::from_element(1, 1, c(15f64.sqrt() / 4.0, 0.0));
        let l = ComplexMatrix::from_element(1, 1, c(3.0 / 8.0, 0.0));
        let x = pinv_solve_on_subspace(&l, &d, &SubspaceBasis::full(1), &tol()).unwrap();
        assert!((x[(0, 0)] - c(0.4, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn empty_inputs_are_harmless() {
        let e = zeros(0, 0);
        assert_eq!(spectral_norm(&e), 0.0);
        assert_eq!(spectral_radius(&e).unwrap(), 0.0);
        assert_eq!(numerical_radius(&e, 360), 0.0);
        assert_eq!(hermitian_sqrt(&e, &tol()).unwrap().nrows(), 0);
        assert_eq!(range_basis(&e, &tol()).rank(), 0);
    }

    #[test]
    fn completion_maps_subspace_as_requested() {
        let dom = SubspaceBasis::from_orthonormal(ComplexMatrix::from_column_slice(3, 1, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        let img = SubspaceBasis::from_orthonormal(ComplexMatrix::from_column_slice(3, 1, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]));
        let u = complete_to_unitary(&dom, &img, &identity(1), &tol()).unwrap();
        assert!(unitarity_residual(&u) < 1e-14);
        assert!(spectral_norm(&(&u * dom.matrix() - img.matrix())) < 1e-14);
    }
}
