//! Characteristic functions, characteristic triples, coincidence of triples,
//! admissibility, and a sampler for the von Neumann inequality.

use nalgebra::linalg::Schur;
use rand::Rng;

use crate::error::{Error, Result, Violation};
use crate::fundamental::fundamental_ops;
use crate::hardy::{pencil_op, HardyOp};
use crate::numkit::{
    c, hermitian_eigen, identity, kron, null_space, polar_unitary, range_basis, spectral_norm,
    unitarity_residual, zeros, ComplexMatrix, TolerancePolicy, C64,
};
use crate::report::{Check, Observation};
use crate::tuples::generate::{complex_gaussian, rng_from_seed};
use crate::tuples::{canonical_decomposition, defect, ContractionTuple, DefectData};

/// Taylor coefficients below this norm end the expansion.
const TAYLOR_FLOOR: f64 = 1e-14;
const TAYLOR_CAP: usize = 4000;
/// Residual accepted as a coincidence certificate.
pub const COINCIDENCE_TOL: f64 = 1e-6;
const PROCRUSTES_ITERATIONS: usize = 50;
const PROCRUSTES_RESTARTS: u64 = 8;
/// Joint eigenvalues closer than this are matched.
const SPECTRUM_MATCH_TOL: f64 = 1e-6;

/// `(I − zT*)^{-1}` with its condition number.
fn resolvent(t: &ComplexMatrix, z: C64, tol: &TolerancePolicy) -> Result<(ComplexMatrix, f64)> {
    let n = t.nrows();
    let a = identity(n) - t.adjoint() * z;
    if n == 0 {
        return Ok((a, 1.0));
    }
    let inverse = a.clone().try_inverse().ok_or(Error::NearSingularResolvent { condition: f64::INFINITY })?;
    let condition = spectral_norm(&a) * spectral_norm(&inverse);
    if !condition.is_finite() || condition > 1.0 / tol.rank_rel_tol {
        return Err(Error::NearSingularResolvent { condition });
    }
    Ok((inverse, condition))
}

/// `Θ(z)` in defect coordinates, for `|z| ≤ 1`.
fn theta_at(t: &ComplexMatrix, dom: &DefectData, cod: &DefectData, z: C64, tol: &TolerancePolicy) -> Result<(ComplexMatrix, f64)> {
    let (inverse, condition) = resolvent(t, z, tol)?;
    let full = &cod.op * inverse * &dom.op * z - t;
    Ok((cod.basis.matrix().adjoint() * full * dom.basis.matrix(), condition))
}

fn ensure_contraction(t: &ComplexMatrix, tol: &TolerancePolicy) -> Result<()> {
    crate::numkit::ensure_square(t, "characteristic function")?;
    crate::numkit::ensure_finite(t, "characteristic function")?;
    let norm = spectral_norm(t);
    if norm > 1.0 + tol.residual_tol {
        return Err(Error::InvalidTuple(vec![Violation::NotContraction { index: 1, norm }]));
    }
    Ok(())
}

/// `Θ_T(z) = (−T + z D_{T*}(I − zT*)^{-1} D_T)|𝒟_T` as a matrix from
/// `𝒟_T` coordinates to `𝒟_{T*}` coordinates.
pub fn theta_eval(t: &ComplexMatrix, z: C64, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    ensure_contraction(t, tol)?;
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDisk(z.norm()));
    }
    let dom = defect(t, tol)?;
    let cod = defect(&t.adjoint(), tol)?;
    Ok(theta_at(t, &dom, &cod, z, tol)?.0)
}

/// Characteristic function of a contraction with its Taylor coefficients.
#[derive(Debug, Clone)]
pub struct ThetaSampler {
    pub contraction: ComplexMatrix,
    pub domain: DefectData,
    pub codomain: DefectData,
    /// `Θ_0 = −T`, `Θ_n = D_{T*} T*^{n−1} D_T` (compressed).
    pub taylor: Vec<ComplexMatrix>,
    tol: TolerancePolicy,
}

impl ThetaSampler {
    pub fn new(t: &ComplexMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let codomain = defect(&t.adjoint(), tol)?;
        Self::with_codomain(t, codomain, tol)
    }

    /// Uses a precomputed `D_{T*}`, so that codomain coordinates agree with
    /// other objects built on the same defect space.
    pub fn with_codomain(t: &ComplexMatrix, codomain: DefectData, tol: &TolerancePolicy) -> Result<Self> {
        ensure_contraction(t, tol)?;
        let domain = defect(t, tol)?;
        let n = t.nrows();
        let head = codomain.coords_op();
        let tail = &domain.op * domain.basis.matrix();
        let t_star = t.adjoint();
        let mut taylor = vec![-(codomain.basis.matrix().adjoint() * t * domain.basis.matrix())];
        let mut middle = tail;
        let min_order = 2 * n + 2;
        while taylor.len() < TAYLOR_CAP {
            let coefficient = &head * &middle;
            let small = spectral_norm(&coefficient) < TAYLOR_FLOOR;
            taylor.push(coefficient);
            if small && taylor.len() > min_order {
                break;
            }
            middle = &t_star * middle;
        }
        Ok(Self { contraction: t.clone(), domain, codomain, taylor, tol: *tol })
    }

    pub fn dom_dim(&self) -> usize {
        self.domain.rank()
    }

    pub fn cod_dim(&self) -> usize {
        self.codomain.rank()
    }

    /// `Θ_n`, zero beyond the stored expansion.
    pub fn coefficient(&self, n: usize) -> ComplexMatrix {
        self.taylor.get(n).cloned().unwrap_or_else(|| zeros(self.cod_dim(), self.dom_dim()))
    }

    pub fn eval(&self, z: C64) -> Result<ComplexMatrix> {
        if z.norm() >= 1.0 {
            return Err(Error::OutsideDisk(z.norm()));
        }
        Ok(theta_at(&self.contraction, &self.domain, &self.codomain, z, &self.tol)?.0)
    }

    pub fn eval_taylor(&self, z: C64) -> ComplexMatrix {
        self.taylor.iter().rev().fold(zeros(self.cod_dim(), self.dom_dim()), |acc, coefficient| acc * z + coefficient)
    }

    /// `Σ_{n>N} ‖Θ_n‖`, bounding the truncation error of `M_Θ` at degree `N`.
    pub fn tail_sum(&self, degree: usize) -> f64 {
        self.taylor.iter().skip(degree + 1).map(spectral_norm).sum()
    }

    /// `1 − ‖Θ(0)‖`; zero when `Θ(0)` is isometric on some unit vector.
    pub fn purely_contractive_gap(&self) -> f64 {
        1.0 - spectral_norm(&self.coefficient(0))
    }

    /// Taylor data against the closed form at random interior points, and
    /// contractivity at those points.
    pub fn checks(&self, seed: u64) -> Result<Vec<Check>> {
        let mut rng = rng_from_seed(seed);
        let mut agreement: f64 = 0.0;
        let mut norm: f64 = 0.0;
        for _ in 0..16 {
            let radius = (1.0 - 1e-3) * rng.random::<f64>().sqrt();
            let z = C64::from_polar(radius, rng.random_range(0.0..std::f64::consts::TAU));
            let direct = self.eval(z)?;
            agreement = agreement.max(spectral_norm(&(&direct - self.eval_taylor(z))));
            norm = norm.max(spectral_norm(&direct));
        }
        Ok(vec![
            Check::new("Taylor expansion matches closed form", agreement, 1e-8),
            Check::new("characteristic function contractive", norm, 1.0 + self.tol.residual_tol),
        ])
    }
}

/// `‖Δ(ζ_k)‖` at the roots of unity of order `grid_points`.
#[derive(Debug, Clone)]
pub struct DeltaGrid {
    pub points: Vec<C64>,
    /// Norm after removing the rounding-error bound of `I − Θ*Θ`.
    pub values: Vec<f64>,
    /// Square root of the largest raw eigenvalue of `I − Θ*Θ`.
    pub raw: Vec<f64>,
}

impl DeltaGrid {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_raw(&self) -> f64 {
        self.raw.iter().copied().fold(0.0, f64::max)
    }
}

pub fn delta_grid(theta: &ThetaSampler, grid_points: usize) -> Result<DeltaGrid> {
    let r = theta.dom_dim();
    let mut points = Vec::with_capacity(grid_points);
    let mut values = Vec::with_capacity(grid_points);
    let mut raw = Vec::with_capacity(grid_points);
    for k in 0..grid_points {
        let zeta = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / grid_points as f64);
        let (value, condition) = theta_at(&theta.contraction, &theta.domain, &theta.codomain, zeta, &theta.tol)?;
        let gram = identity(r) - value.adjoint() * &value;
        let top = if r == 0 { 0.0 } else { hermitian_eigen(&gram).0[0] };
        let size = theta.contraction.nrows().max(1) as f64;
        let rounding = 16.0 * size * f64::EPSILON * (1.0 + spectral_norm(&value).powi(2)) * condition;
        points.push(zeta);
        values.push((top - rounding).max(0.0).sqrt());
        raw.push(top.max(0.0).sqrt());
    }
    Ok(DeltaGrid { points, values, raw })
}

/// `(𝔾♯, 𝕎♯, Θ_T)`: the fundamental operators of `T*` on `𝒟_{T*}`, the
/// canonical unitary tuple on `ℋ_u`, and the characteristic function of the
/// c.n.u. part.
#[derive(Debug, Clone)]
pub struct CharTriple {
    pub g: Vec<(ComplexMatrix, ComplexMatrix)>,
    pub unitary_tuple: Vec<ComplexMatrix>,
    pub theta: ThetaSampler,
    pub cnu_dim: usize,
}

impl CharTriple {
    pub fn d(&self) -> usize {
        self.g.len()
    }

    pub fn unitary_dim(&self) -> usize {
        self.unitary_tuple.first().map_or(0, |w| w.nrows())
    }

    /// Taylor order used when comparing triples.
    pub fn comparison_order(&self) -> usize {
        2 * self.cnu_dim
    }
}

pub fn characteristic_triple(tuple: &ContractionTuple) -> Result<CharTriple> {
    let decomposition = canonical_decomposition(tuple)?;
    let cnu = &decomposition.cnu_part;
    let adjoint_ops = fundamental_ops(&cnu.adjoint())?;
    let theta = ThetaSampler::with_codomain(&cnu.product(), adjoint_ops.defect.clone(), tuple.tol())?;
    let g = adjoint_ops.pairs.into_iter().map(|p| (p.first, p.second)).collect();
    Ok(CharTriple { g, unitary_tuple: decomposition.unitary_part.ops().to_vec(), theta, cnu_dim: cnu.dim() })
}

/// Outcome of a coincidence search.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Coincide,
    /// A sound refutation: an invariant differs.
    Refuted(String),
    /// No certificate found; nothing is claimed.
    Inconclusive,
}

/// `u : 𝒟_T → 𝒟_{T'}`, `u_* : 𝒟_{T*} → 𝒟_{T'*}` and the unitary matching
/// the unitary parts.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub u: ComplexMatrix,
    pub u_star: ComplexMatrix,
    pub unitary_map: ComplexMatrix,
}

impl Certificate {
    /// Certificate for the swapped pair of triples.
    pub fn inverse(&self) -> Certificate {
        Certificate { u: self.u.adjoint(), u_star: self.u_star.adjoint(), unitary_map: self.unitary_map.adjoint() }
    }
}

#[derive(Debug, Clone)]
pub struct Coincidence {
    pub verdict: Verdict,
    pub residual: f64,
    pub certificate: Option<Certificate>,
}

/// Joint eigenvalues of commuting normal matrices with a common unitary
/// eigenbasis, from the Schur form of a generic linear combination.
pub fn joint_spectrum(ops: &[ComplexMatrix]) -> Result<(Vec<Vec<C64>>, ComplexMatrix)> {
    let n = ops.first().map_or(0, |w| w.nrows());
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    for attempt in 0..4 {
        let shift = attempt as f64 * 0.37;
        let combination = ops.iter().enumerate().fold(zeros(n, n), |acc, (j, w)| {
            let weight = C64::from_polar(1.0 + 0.618 * j as f64 + shift, 0.9 + 1.3 * j as f64 + shift);
            acc + w * weight
        });
        let schur = Schur::try_new(combination, 1e-15, 10_000).ok_or(Error::NoConvergence("joint diagonalization"))?;
        let (q, _) = schur.unpack();
        let mut offdiagonal: f64 = 0.0;
        let diagonals: Vec<ComplexMatrix> = ops
            .iter()
            .map(|w| {
                let mut m = q.adjoint() * w * &q;
                let diag = ComplexMatrix::from_diagonal(&m.diagonal());
                m -= &diag;
                offdiagonal = offdiagonal.max(spectral_norm(&m));
                diag
            })
            .collect();
        if offdiagonal <= 1e-8 {
            let tuples = (0..n).map(|k| diagonals.iter().map(|dg| dg[(k, k)]).collect()).collect();
            return Ok((tuples, q));
        }
    }
    Err(Error::NoConvergence("joint diagonalization"))
}

/// Greedy matching of joint eigenvalue tuples, returning `perm` with
/// `a[k] ≈ b[perm[k]]`.
fn match_spectra(a: &[Vec<C64>], b: &[Vec<C64>]) -> Option<Vec<usize>> {
    let distance = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    let mut used = vec![false; b.len()];
    let mut perm = Vec::with_capacity(a.len());
    for x in a {
        let best = (0..b.len())
            .filter(|&l| !used[l])
            .map(|l| (l, distance(x, &b[l])))
            .min_by(|p, q| p.1.total_cmp(&q.1))?;
        if best.1 > SPECTRUM_MATCH_TOL {
            return None;
        }
        used[best.0] = true;
        perm.push(best.0);
    }
    Some(perm)
}

/// A unitary `X` with `X W_j X* = W'_j`, or the reason none exists.
fn unitary_part_map(a: &CharTriple, b: &CharTriple) -> Result<std::result::Result<ComplexMatrix, String>> {
    if a.unitary_dim() != b.unitary_dim() {
        return Ok(Err(format!("unitary parts have dimensions {} and {}", a.unitary_dim(), b.unitary_dim())));
    }
    let (spec_a, qa) = joint_spectrum(&a.unitary_tuple)?;
    let (spec_b, qb) = joint_spectrum(&b.unitary_tuple)?;
    let Some(perm) = match_spectra(&spec_a, &spec_b) else {
        return Ok(Err("joint spectra of the unitary parts differ".into()));
    };
    let n = a.unitary_dim();
    let mut x = zeros(n, n);
    for (k, &l) in perm.iter().enumerate() {
        x += qb.column(l) * qa.column(k).adjoint();
    }
    Ok(Ok(x))
}

/// Largest defect of `(u, u_*, X)` as an intertwiner of `a` and `b`.
pub fn certificate_residual(a: &CharTriple, b: &CharTriple, cert: &Certificate) -> f64 {
    let order = a.comparison_order().max(b.comparison_order());
    let mut worst: f64 = 0.0;
    for n in 0..=order {
        let lhs = &cert.u_star * a.theta.coefficient(n);
        let rhs = b.theta.coefficient(n) * &cert.u;
        worst = worst.max(spectral_norm(&(lhs - rhs)));
    }
    for ((g1, g2), (h1, h2)) in a.g.iter().zip(&b.g) {
        worst = worst.max(spectral_norm(&(&cert.u_star * g1 - h1 * &cert.u_star)));
        worst = worst.max(spectral_norm(&(&cert.u_star * g2 - h2 * &cert.u_star)));
    }
    for (w, w2) in a.unitary_tuple.iter().zip(&b.unitary_tuple) {
        worst = worst.max(spectral_norm(&(&cert.unitary_map * w * cert.unitary_map.adjoint() - w2)));
    }
    worst
        .max(unitarity_residual(&cert.u))
        .max(unitarity_residual(&cert.u_star))
        .max(unitarity_residual(&cert.unitary_map))
}

/// Linear constraints on `(vec u, vec u_*)`.
fn intertwining_system(a: &CharTriple, b: &CharTriple) -> ComplexMatrix {
    let r = a.theta.dom_dim();
    let s = a.theta.cod_dim();
    let order = a.comparison_order().max(b.comparison_order());
    let mut blocks: Vec<ComplexMatrix> = Vec::new();
    for n in 0..=order {
        let mut row = zeros(s * r, r * r + s * s);
        row.view_mut((0, 0), (s * r, r * r)).copy_from(&(-kron(&identity(r), &b.theta.coefficient(n))));
        row.view_mut((0, r * r), (s * r, s * s)).copy_from(&kron(&a.theta.coefficient(n).transpose(), &identity(s)));
        blocks.push(row);
    }
    for ((g1, g2), (h1, h2)) in a.g.iter().zip(&b.g) {
        for (g, h) in [(g1, h1), (g2, h2)] {
            let mut row = zeros(s * s, r * r + s * s);
            row.view_mut((0, r * r), (s * s, s * s)).copy_from(&(kron(&g.transpose(), &identity(s)) - kron(&identity(s), h)));
            blocks.push(row);
        }
    }
    let rows: usize = blocks.iter().map(|m| m.nrows()).sum();
    let mut system = zeros(rows, r * r + s * s);
    let mut offset = 0;
    for block in blocks {
        system.view_mut((offset, 0), (block.nrows(), block.ncols())).copy_from(&block);
        offset += block.nrows();
    }
    system
}

fn split_unknowns(x: &ComplexMatrix, r: usize, s: usize) -> (ComplexMatrix, ComplexMatrix) {
    let u = ComplexMatrix::from_column_slice(r, r, &x.as_slice()[..r * r]);
    let u_star = ComplexMatrix::from_column_slice(s, s, &x.as_slice()[r * r..]);
    (u, u_star)
}

fn join_unknowns(u: &ComplexMatrix, u_star: &ComplexMatrix) -> ComplexMatrix {
    let mut data: Vec<C64> = u.as_slice().to_vec();
    data.extend_from_slice(u_star.as_slice());
    ComplexMatrix::from_column_slice(data.len(), 1, &data)
}

/// Alternates between the solution space of the linear constraints and the
/// unitary pairs, from seeded random starts.
fn search_defect_unitaries(a: &CharTriple, b: &CharTriple, unitary_map: &ComplexMatrix, seed: u64) -> (Certificate, f64) {
    let r = a.theta.dom_dim();
    let s = a.theta.cod_dim();
    let candidate = |u: ComplexMatrix, u_star: ComplexMatrix| Certificate { u, u_star, unitary_map: unitary_map.clone() };
    let start = candidate(identity(r), identity(s));
    let mut best_residual = certificate_residual(a, b, &start);
    let mut best = start;
    if best_residual <= 1e-12 || r * r + s * s == 0 {
        return (best, best_residual);
    }
    let system = intertwining_system(a, b);
    let basis = null_space(&system, 1e-7 * spectral_norm(&system).max(1.0));
    if basis.ncols() == 0 {
        return (best, best_residual);
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..PROCRUSTES_RESTARTS {
        let mut x = &basis * complex_gaussian(basis.ncols(), 1, &mut rng);
        for _ in 0..PROCRUSTES_ITERATIONS {
            let (u, u_star) = split_unknowns(&x, r, s);
            let projected = candidate(polar_unitary(&u), polar_unitary(&u_star));
            let residual = certificate_residual(a, b, &projected);
            if residual < best_residual {
                best_residual = residual;
                best = projected.clone();
            }
            if residual <= 1e-12 {
                break;
            }
            let y = join_unknowns(&projected.u, &projected.u_star);
            x = &basis * (basis.adjoint() * y);
        }
        if best_residual <= 1e-12 {
            break;
        }
    }
    (best, best_residual)
}

/// Decides whether two characteristic triples coincide, with a certificate.
pub fn coincide(a: &CharTriple, b: &CharTriple, seed: u64) -> Result<Coincidence> {
    let refute = |reason: String| Ok(Coincidence { verdict: Verdict::Refuted(reason), residual: f64::INFINITY, certificate: None });
    if a.d() != b.d() {
        return refute(format!("tuples have {} and {} operators", a.d(), b.d()));
    }
    let unitary_map = match unitary_part_map(a, b)? {
        Ok(x) => x,
        Err(reason) => return refute(reason),
    };
    if a.theta.dom_dim() != b.theta.dom_dim() || a.theta.cod_dim() != b.theta.cod_dim() {
        return refute(format!(
            "defect spaces have dimensions ({}, {}) and ({}, {})",
            a.theta.dom_dim(),
            a.theta.cod_dim(),
            b.theta.dom_dim(),
            b.theta.cod_dim()
        ));
    }
    let (certificate, residual) = search_defect_unitaries(a, b, &unitary_map, seed);
    let verdict = if residual <= COINCIDENCE_TOL { Verdict::Coincide } else { Verdict::Inconclusive };
    Ok(Coincidence { verdict, residual, certificate: Some(certificate) })
}

/// Admissibility report and the functional-model tuple on `ℋ(Θ)`.
#[derive(Debug, Clone)]
pub struct Admissible {
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub degree: usize,
    /// Orthonormal basis of `ℋ(Θ) = H²(𝒟_*) ⊖ ΘH²(𝒟)`, truncated at degree `N`.
    pub model_basis: ComplexMatrix,
    pub model: Vec<ComplexMatrix>,
}

/// Smallest degree with `Σ_{n>N} ‖Θ_n‖ ≤ target`, at least 8.
pub fn theta_truncation(theta: &ThetaSampler, target: f64) -> usize {
    (8..theta.taylor.len()).find(|&n| theta.tail_sum(n) <= target).unwrap_or(theta.taylor.len()).max(8)
}

/// `ℋ(Θ)` spanned by the backward shifts `S*^k Θx`, `1 ≤ k ≤ dim + 1`.
fn model_space(theta: &ThetaSampler, degree: usize, tol: &TolerancePolicy) -> ComplexMatrix {
    let r = theta.dom_dim();
    let s = theta.cod_dim();
    let shifts = theta.contraction.nrows() + 1;
    let mut generators = zeros((degree + 1) * s, shifts * r);
    for k in 1..=shifts {
        for n in 0..=degree {
            generators.view_mut((n * s, (k - 1) * r), (s, r)).copy_from(&theta.coefficient(k + n));
        }
    }
    range_basis(&generators, tol).matrix().clone()
}

/// Checks the admissibility conditions for `(𝔾, Θ)` with trivial `𝕎`
/// (`Θ` inner) and assembles the functional-model tuple.
pub fn check_admissible(g: &[(ComplexMatrix, ComplexMatrix)], theta: &ThetaSampler, degree: usize, tol: &TolerancePolicy) -> Result<Admissible> {
    let gap = theta.purely_contractive_gap();
    if theta.dom_dim() > 0 && gap <= tol.rank_rel_tol {
        return Err(Error::NotPurelyContractive { gap });
    }
    let s = theta.cod_dim();
    let mut checks = Vec::new();
    let mut observations = Vec::new();
    let delta = delta_grid(theta, 64)?;
    checks.push(Check::new("characteristic function inner", delta.max(), 1e-8));
    observations.push(Observation::new("raw boundary defect", delta.max_raw()));

    let tail = theta.tail_sum(degree);
    let tail_tol = tol.residual_tol + 10.0 * tail;
    observations.push(Observation::new("Taylor tail beyond truncation", tail));
    let pencils: Vec<HardyOp> =
        g.iter().map(|(g1, g2)| pencil_op(g1.adjoint(), g2.clone(), None, degree)).collect::<Result<_>>()?;
    for (j, op) in pencils.iter().enumerate() {
        let norm = spectral_norm(&op.materialize()).max(op.symbol_sup_norm(tol.grid_points));
        checks.push(Check::new(format!("condition 1: pencil {} contractive", j + 1), norm, 1.0 + tol.residual_tol));
    }

    let y = model_space(theta, degree, tol);
    observations.push(Observation::new("model space dimension", y.ncols() as f64));
    checks.push(Check::new("model space dimension equals dim H", (y.ncols() as f64 - theta.contraction.nrows() as f64).abs(), 0.0));
    let complement = identity((degree + 1) * s) - &y * y.adjoint();
    let model: Vec<ComplexMatrix> = pencils.iter().map(|op| y.adjoint() * op.apply(&y)).collect();
    for (j, op) in pencils.iter().enumerate() {
        let leak = spectral_norm(&(&complement * op.apply_adjoint(&y)));
        checks.push(Check::new(format!("condition 3: range of Θ invariant under pencil {}", j + 1), leak, tail_tol));
    }
    for i in 0..model.len() {
        for j in i + 1..model.len() {
            let comm = spectral_norm(&(&model[i] * &model[j] - &model[j] * &model[i]));
            checks.push(Check::new(format!("condition 4: model operators {} and {} commute", i + 1, j + 1), comm, tail_tol));
        }
    }
    let product = model.iter().fold(identity(y.ncols()), |acc, m| acc * m);
    let shift = pencil_op(zeros(s, s), identity(s), None, degree)?;
    let compressed_shift = y.adjoint() * shift.apply(&y);
    checks.push(Check::new("condition 4: product is the compressed shift", spectral_norm(&(product - compressed_shift)), tail_tol));
    Ok(Admissible { checks, observations, degree, model_basis: y, model })
}

/// Polynomial in `d` variables with degree at most `degree` in each; the
/// coefficient of `z^α` sits at `Σ_k α_k (degree+1)^k`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    pub vars: usize,
    pub degree: usize,
    pub coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn random<R: Rng>(vars: usize, degree: usize, rng: &mut R) -> Self {
        let len = (degree + 1).pow(vars as u32);
        let coeffs = complex_gaussian(len, 1, rng).as_slice().to_vec();
        Self { vars, degree, coeffs }
    }

    pub fn constant(vars: usize, value: C64) -> Self {
        Self { vars, degree: 0, coeffs: vec![value] }
    }

    /// The coordinate function `z_j`.
    pub fn coordinate(vars: usize, j: usize) -> Self {
        let mut coeffs = vec![c(0.0, 0.0); 2usize.pow(vars as u32)];
        coeffs[1 << j] = c(1.0, 0.0);
        Self { vars, degree: 1, coeffs }
    }

    fn exponents(&self, index: usize) -> Vec<usize> {
        let base = self.degree + 1;
        (0..self.vars).map(|k| (index / base.pow(k as u32)) % base).collect()
    }

    pub fn eval_matrices(&self, ops: &[ComplexMatrix]) -> ComplexMatrix {
        let n = ops.first().map_or(0, |t| t.nrows());
        let powers: Vec<Vec<ComplexMatrix>> = ops
            .iter()
            .map(|t| {
                let mut list = vec![identity(n)];
                for _ in 0..self.degree {
                    let next = list.last().unwrap() * t;
                    list.push(next);
                }
                list
            })
            .collect();
        self.coeffs.iter().enumerate().fold(zeros(n, n), |acc, (index, coefficient)| {
            let term = self.exponents(index).iter().enumerate().fold(identity(n), |m, (k, &a)| m * &powers[k][a]);
            acc + term * *coefficient
        })
    }

    /// Maximum modulus over the product grid of `points` roots of unity per
    /// axis, evaluated one variable at a time.
    pub fn grid_max(&self, points: usize) -> f64 {
        let grid: Vec<C64> = (0..points).map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / points as f64)).collect();
        fn reduce(coeffs: &[C64], vars: usize, base: usize, grid: &[C64]) -> f64 {
            if vars == 0 {
                return coeffs[0].norm();
            }
            let stride = base.pow(vars as u32 - 1);
            let mut best: f64 = 0.0;
            let mut partial = vec![c(0.0, 0.0); stride];
            for zeta in grid {
                for (i, slot) in partial.iter_mut().enumerate() {
                    *slot = (0..base).rev().fold(c(0.0, 0.0), |acc, a| acc * zeta + coeffs[i + a * stride]);
                }
                best = best.max(reduce(&partial, vars - 1, base, grid));
            }
            best
        }
        reduce(&self.coeffs, self.vars, self.degree + 1, &grid)
    }

    /// Bound on `sup_{𝕋^d}|p| − grid max`: `Σ_k (π/points) Σ_α |c_α| α_k`.
    pub fn grid_slack(&self, points: usize) -> f64 {
        let step = std::f64::consts::PI / points as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(index, coefficient)| coefficient.norm() * self.exponents(index).iter().sum::<usize>() as f64 * step)
            .sum()
    }
}

/// `(‖p(T)‖, grid max, slack)`.
pub fn von_neumann_check(tuple: &ContractionTuple, p: &Polynomial, points: usize) -> (f64, f64, f64) {
    (spectral_norm(&p.eval_matrices(tuple.ops())), p.grid_max(points), p.grid_slack(points))
}

/// Grid points per axis used by the sampler.
pub const VN_GRID: usize = 64;

#[derive(Debug, Clone)]
pub struct VonNeumannReport {
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub violations: usize,
}

/// Samples random polynomials and compares `‖p(T)‖` with `sup_{𝕋^d}|p|`.
/// The inequality is asserted only for `d ≤ 2`.
pub fn von_neumann_sample(tuple: &ContractionTuple, trials: usize, max_degree: usize, seed: u64) -> VonNeumannReport {
    let mut rng = rng_from_seed(seed);
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..trials {
        let p = Polynomial::random(tuple.d(), max_degree, &mut rng);
        let (norm, grid, slack) = von_neumann_check(tuple, &p, VN_GRID);
        let bound = grid + slack + 1e-10 * p.coeffs.iter().map(|z| z.norm()).sum::<f64>();
        if norm > bound {
            violations += 1;
        }
        worst_ratio = worst_ratio.max(norm / grid.max(f64::MIN_POSITIVE));
    }
    let mut checks = Vec::new();
    let observations = vec![
        Observation::new("violations", violations as f64),
        Observation::new("largest ratio of operator norm to grid maximum", worst_ratio),
    ];
    if tuple.d() <= 2 {
        checks.push(Check::new("von Neumann inequality violations", violations as f64, 0.0));
    }
    VonNeumannReport { checks, observations, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuples::validate;

    fn scalar(x: C64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, x)
    }

    #[test]
    fn zero_scalar_gives_identity_function() {
        let tol = TolerancePolicy::default();
        let v = theta_eval(&scalar(c(0.0, 0.0)), c(0.3, 0.0), &tol).unwrap();
        assert!((v[(0, 0)] - c(0.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn half_is_a_mobius_map() {
        let tol = TolerancePolicy::default();
        let t = scalar(c(0.5, 0.0));
        let v = theta_eval(&t, c(0.0, 0.0), &tol).unwrap();
        assert!((v[(0, 0)] + c(0.5, 0.0)).norm() < 1e-15);
        let z = c(0.2, -0.4);
        let mobius = (z - 0.5) / (c(1.0, 0.0) - z * 0.5);
        let v = theta_eval(&t, z, &tol).unwrap();
        assert!((v[(0, 0)].norm() - mobius.norm()).abs() < 1e-14);
        let sampler = ThetaSampler::new(&t, &tol).unwrap();
        assert!(delta_grid(&sampler, 64).unwrap().max() <= 1e-10);
        assert!(sampler.checks(1).unwrap().iter().all(|c| c.pass));
    }

    #[test]
    fn unitary_has_empty_characteristic_function() {
        let tol = TolerancePolicy::default();
        let v = theta_eval(&scalar(c(0.0, 1.0)), c(0.5, 0.0), &tol).unwrap();
        assert_eq!(v.shape(), (0, 0));
        assert!(matches!(theta_eval(&scalar(c(0.0, 0.0)), c(1.0, 0.0), &tol), Err(Error::OutsideDisk(_))));
    }

    #[test]
    fn joint_spectra_distinguish_sign() {
        let tol = TolerancePolicy::default();
        let a = validate(vec![scalar(c(1.0, 0.0)), scalar(c(1.0, 0.0))], tol).unwrap();
        let b = validate(vec![scalar(c(1.0, 0.0)), scalar(c(-1.0, 0.0))], tol).unwrap();
        let ta = characteristic_triple(&a).unwrap();
        let tb = characteristic_triple(&b).unwrap();
        assert!(matches!(coincide(&ta, &tb, 0).unwrap().verdict, Verdict::Refuted(_)));
        let same = coincide(&ta, &ta, 0).unwrap();
        assert_eq!(same.verdict, Verdict::Coincide);
        assert_eq!(same.residual, 0.0);
    }

    #[test]
    fn coordinate_and_constant_polynomials() {
        let tol = TolerancePolicy::default();
        let t = validate(vec![scalar(c(0.3, 0.4)), scalar(c(0.5, 0.0))], tol).unwrap();
        let (norm, grid, _) = von_neumann_check(&t, &Polynomial::coordinate(2, 0), VN_GRID);
        assert!((norm - 0.5).abs() < 1e-15 && (grid - 1.0).abs() < 1e-15);
        let (norm, grid, slack) = von_neumann_check(&t, &Polynomial::constant(2, c(0.0, 2.0)), VN_GRID);
        assert!((norm - 2.0).abs() < 1e-15 && (grid - 2.0).abs() < 1e-15 && slack == 0.0);
    }

    #[test]
    fn zero_pencils_with_shift_symbol_are_admissible() {
        let tol = TolerancePolicy::default();
        let theta = ThetaSampler::new(&scalar(c(0.0, 0.0)), &tol).unwrap();
        let g = vec![(zeros(1, 1), zeros(1, 1)), (zeros(1, 1), zeros(1, 1))];
        let report = check_admissible(&g, &theta, 8, &tol).unwrap();
        assert!(report.checks.iter().all(|c| c.pass), "{:?}", report.checks);
        assert_eq!(report.model_basis.ncols(), 1);
    }
}
