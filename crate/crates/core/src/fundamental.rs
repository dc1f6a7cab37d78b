//! Fundamental operator pairs of a commuting contraction tuple.
//!
//! For each `j` the pair `(F_{j1}, F_{j2})` acts on the defect space `𝒟_T` of
//! the product `T` and solves
//!
//! ```text
//! D_T F_{j1} D_T = T_j − T_(j)* T,     D_T F_{j2} D_T = T_(j) − T_j* T.
//! ```
//!
//! Operators on `𝒟_T` are stored in the orthonormal basis of `ran D_T`
//! held by [`DefectData`].

use crate::error::{Error, Result};
use crate::numkit::{pinv_solve_on_subspace, spectral_norm, ComplexMatrix, TolerancePolicy, C64};
use crate::report::Check;
use crate::tuples::{defect, ContractionTuple, DefectData};

/// Slack allowed above 1 for pencil numerical radii.
pub const PENCIL_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalPair {
    pub first: ComplexMatrix,
    pub second: ComplexMatrix,
}

/// Fundamental operators of a tuple, in defect-space coordinates.
#[derive(Debug, Clone)]
pub struct FundamentalOps {
    pub defect: DefectData,
    pub pairs: Vec<FundamentalPair>,
    /// `max_w ν(F_{j1} + w F_{j2})` over the circle grid, per `j`.
    pub pencil_radius: Vec<f64>,
    pub checks: Vec<Check>,
}

/// Fundamental operators of the adjoint tuple, acting on `𝒟_{T*}`.
pub type AdjointFundamentalOps = FundamentalOps;

impl FundamentalOps {
    pub fn rank(&self) -> usize {
        self.defect.rank()
    }

    /// `(F_{j1}, F_{j2})` as operators on the ambient space, zero off `𝒟_T`.
    pub fn ambient(&self, j: usize) -> (ComplexMatrix, ComplexMatrix) {
        let b = self.defect.basis.matrix();
        let p = &self.pairs[j];
        (b * &p.first * b.adjoint(), b * &p.second * b.adjoint())
    }
}

/// Residual tolerance used for the defining identities: scaled by the size of
/// the input.
pub fn identity_tolerance(tuple: &ContractionTuple) -> f64 {
    tuple.tol().residual_tol * (1.0 + tuple.scale())
}

/// Residuals of `D_T T_j = F_1 D_T + F_2* D_T T` and
/// `D_T T_(j) = F_2 D_T + F_1* D_T T`, written in coordinates of `𝒟_T`.
pub fn second_system_residuals(
    tuple: &ContractionTuple,
    defect: &DefectData,
    j: usize,
    first: &ComplexMatrix,
    second: &ComplexMatrix,
) -> (f64, f64) {
    let bd = defect.coords_op();
    let t = tuple.product();
    let bdt = &bd * &t;
    let tj = tuple.op(j);
    let tpj = tuple.partial_product(j);
    let r1 = spectral_norm(&(&bd * tj - first * &bd - second.adjoint() * &bdt));
    let r2 = spectral_norm(&(&bd * &tpj - second * &bd - first.adjoint() * &bdt));
    (r1, r2)
}

/// Residuals of the two fundamental equations for a candidate pair.
pub fn fundamental_equation_residuals(
    tuple: &ContractionTuple,
    defect: &DefectData,
    j: usize,
    first: &ComplexMatrix,
    second: &ComplexMatrix,
) -> (f64, f64) {
    let b = defect.basis.matrix();
    let d = &defect.op;
    let t = tuple.product();
    let tj = tuple.op(j);
    let tpj = tuple.partial_product(j);
    let l1 = tj - tpj.adjoint() * &t;
    let l2 = &tpj - tj.adjoint() * &t;
    let r1 = spectral_norm(&(d * b * first * b.adjoint() * d - l1));
    let r2 = spectral_norm(&(d * b * second * b.adjoint() * d - l2));
    (r1, r2)
}

/// `sup_{|w|=1} ν(F_1 + wF_2)`, which bounds the values on any circle grid.
///
/// With `w = e^{i(β−α)}` this is the maximum over the torus of
/// `λ_max(Re(e^{iα}F_1) + Re(e^{iβ}F_2))`. The torus is sampled on a
/// `grid × grid` lattice (capped at 64) and every lattice local maximum whose
/// Lipschitz bound can beat the best sample is refined by alternating
/// golden-section searches.
pub fn pencil_radius(first: &ComplexMatrix, second: &ComplexMatrix, grid: usize) -> f64 {
    if first.is_empty() {
        return 0.0;
    }
    let g = grid.clamp(8, 64);
    let re = |x: &ComplexMatrix| (x + x.adjoint()).scale(0.5);
    let im = |x: &ComplexMatrix| (x - x.adjoint()) * C64::new(0.0, -0.5);
    let (r1, i1, r2, i2) = (re(first), im(first), re(second), im(second));
    // Re(e^{iα}X) = cos α Re X − sin α Im X
    let eval = |alpha: f64, beta: f64| {
        let (s1, c1) = alpha.sin_cos();
        let (s2, c2) = beta.sin_cos();
        let h = &r1 * C64::from(c1) - &i1 * C64::from(s1) + &r2 * C64::from(c2) - &i2 * C64::from(s2);
        crate::numkit::lambda_max_hermitian(&h)
    };
    let step = std::f64::consts::TAU / g as f64;
    let margin = (spectral_norm(first) + spectral_norm(second)) * step * std::f64::consts::FRAC_1_SQRT_2;
    let table: Vec<f64> = (0..g * g).map(|k| eval((k / g) as f64 * step, (k % g) as f64 * step)).collect();
    let at = |a: usize, b: usize| table[(a % g) * g + (b % g)];
    let mut best = table.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for a in 0..g {
        for b in 0..g {
            let v = at(a, b);
            let is_peak = (0..3).all(|da| (0..3).all(|db| at(a + g + da - 1, b + g + db - 1) <= v));
            if is_peak && v + margin > best {
                candidates.push((a, b));
            }
        }
    }
    candidates.sort_by(|x, y| at(y.0, y.1).total_cmp(&at(x.0, x.1)));
    for (a, b) in candidates {
        if at(a, b) + margin <= best {
            break;
        }
        let (mut alpha, mut beta) = (a as f64 * step, b as f64 * step);
        let mut value = at(a, b);
        for _ in 0..6 {
            let (x, fx) = golden_argmax(|t| eval(t, beta), alpha - step, alpha + step);
            if fx > value {
                alpha = x;
                value = fx;
            }
            let (y, fy) = golden_argmax(|t| eval(alpha, t), beta - step, beta + step);
            let gain = fy - value;
            if fy > value {
                beta = y;
                value = fy;
            }
            if gain < 1e-13 {
                break;
            }
        }
        best = best.max(value);
    }
    best
}

fn golden_argmax(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-9 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 { (x1, f1) } else { (x2, f2) }
}

/// Computes and verifies the fundamental operators of `tuple`.
pub fn fundamental_ops(tuple: &ContractionTuple) -> Result<FundamentalOps> {
    let tol = *tuple.tol();
    let defect = defect(&tuple.product(), &tol)?;
    let t = tuple.product();
    let identity_tol = identity_tolerance(tuple);
    let mut pairs = Vec::with_capacity(tuple.d());
    let mut radii = Vec::with_capacity(tuple.d());
    let mut checks = Vec::new();
    for j in 0..tuple.d() {
        let tj = tuple.op(j);
        let tpj = tuple.partial_product(j);
        let l1 = tj - tpj.adjoint() * &t;
        let l2 = &tpj - tj.adjoint() * &t;
        let first = pinv_solve_on_subspace(&l1, &defect.op, &defect.basis, &tol)?;
        let second = pinv_solve_on_subspace(&l2, &defect.op, &defect.basis, &tol)?;

        let (e1, e2) = fundamental_equation_residuals(tuple, &defect, j, &first, &second);
        let (s1, s2) = second_system_residuals(tuple, &defect, j, &first, &second);
        let label = j + 1;
        checks.push(Check::new(format!("fundamental equation 1, j={label}"), e1, identity_tol));
        checks.push(Check::new(format!("fundamental equation 2, j={label}"), e2, identity_tol));
        checks.push(Check::new(format!("second system 1, j={label}"), s1, identity_tol));
        checks.push(Check::new(format!("second system 2, j={label}"), s2, identity_tol));
        for (name, r) in [("fundamental equation 1", e1), ("fundamental equation 2", e2), ("second system 1", s1), ("second system 2", s2)] {
            if r > identity_tol {
                return Err(Error::ResidualExceeded { equation: format!("{name}, j={label}"), norm: r });
            }
        }

        let nu = pencil_radius(&first, &second, tol.grid_points);
        checks.push(Check::new(format!("pencil numerical radius, j={label}"), nu, 1.0 + PENCIL_SLACK));
        if nu > 1.0 + PENCIL_SLACK {
            return Err(Error::NumericalRadiusExceeded(nu));
        }
        radii.push(nu);
        pairs.push(FundamentalPair { first, second });
    }
    Ok(FundamentalOps { defect, pairs, pencil_radius: radii, checks })
}

/// Fundamental operators of `(T_1*, …, T_d*)`, acting on `𝒟_{T*}`.
pub fn adjoint_fundamental_ops(tuple: &ContractionTuple) -> Result<AdjointFundamentalOps> {
    fundamental_ops(&tuple.adjoint())
}

/// Perturbs one operator of pair `j` by `perturbation` and reports the
/// worst second-system residual. Any nonzero perturbation of the first
/// operator must be detected when `D_T ≠ 0`.
pub fn uniqueness_probe(
    tuple: &ContractionTuple,
    ops: &FundamentalOps,
    j: usize,
    perturbation: &ComplexMatrix,
    perturb_second: bool,
) -> f64 {
    let pair = &ops.pairs[j];
    let (first, second) = if perturb_second {
        (pair.first.clone(), &pair.second + perturbation)
    } else {
        (&pair.first + perturbation, pair.second.clone())
    };
    let (r1, r2) = second_system_residuals(tuple, &ops.defect, j, &first, &second);
    r1.max(r2)
}

/// Identities linking the fundamental operators of `T` and `T*`:
///
/// ```text
/// D_T F_{j1} = (T_j D_T − D_{T*} G_{j2} T)|_{𝒟_T}
/// D_T F_{j2} = (T_(j) D_T − D_{T*} G_{j1} T)|_{𝒟_T}
/// (F_{j1}* D_T D_{T*} − F_{j2} T*)|_{𝒟_{T*}} = (D_T D_{T*} G_{j1} − T* G_{j2}*)|_{𝒟_{T*}}
/// ```
pub fn cross_identities(tuple: &ContractionTuple, f: &FundamentalOps, g: &AdjointFundamentalOps) -> Vec<Check> {
    let tol = identity_tolerance(tuple);
    let t = tuple.product();
    let b = f.defect.basis.matrix();
    let bs = g.defect.basis.matrix();
    let d = &f.defect.op;
    let ds = &g.defect.op;
    let mut checks = Vec::new();
    for j in 0..tuple.d() {
        let (fa1, fa2) = f.ambient(j);
        let (ga1, ga2) = g.ambient(j);
        let tj = tuple.op(j);
        let tpj = tuple.partial_product(j);
        let lhs1 = d * &fa1 * b;
        let rhs1 = (tj * d - ds * &ga2 * &t) * b;
        let lhs2 = d * &fa2 * b;
        let rhs2 = (&tpj * d - ds * &ga1 * &t) * b;
        let lhs3 = (fa1.adjoint() * d * ds - &fa2 * t.adjoint()) * bs;
        let rhs3 = (d * ds * &ga1 - t.adjoint() * ga2.adjoint()) * bs;
        let label = j + 1;
        checks.push(Check::new(format!("defect-adjoint link 1, j={label}"), spectral_norm(&(lhs1 - rhs1)), tol));
        checks.push(Check::new(format!("defect-adjoint link 2, j={label}"), spectral_norm(&(lhs2 - rhs2)), tol));
        checks.push(Check::new(format!("defect-adjoint link 3, j={label}"), spectral_norm(&(lhs3 - rhs3)), tol));
    }
    checks
}

/// Fundamental operator of a pair `(S, P)` with `P` a contraction and `S`
/// commuting with `P`: the solution of `S − S* P = D_P X D_P`.
pub fn gamma_fundamental_op(s: &ComplexMatrix, p: &ComplexMatrix, tol: &TolerancePolicy) -> Result<(DefectData, ComplexMatrix)> {
    let defect = defect(p, tol)?;
    let rhs = s - s.adjoint() * p;
    let x = pinv_solve_on_subspace(&rhs, &defect.op, &defect.basis, tol)?;
    Ok((defect, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::c;
    use crate::tuples::validate;

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, c(x, 0.0))
    }

    #[test]
    fn scalar_pair_matches_closed_form() {
        let t = validate(vec![scalar(0.5), scalar(0.5)], TolerancePolicy::default()).unwrap();
        let ops = fundamental_ops(&t).unwrap();
        assert_eq!(ops.rank(), 1);
        for pair in &ops.pairs {
            assert!((pair.first[(0, 0)] - c(0.4, 0.0)).norm() < 1e-14);
            assert!((pair.second[(0, 0)] - c(0.4, 0.0)).norm() < 1e-14);
        }
        assert!((ops.pencil_radius[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn zero_defect_gives_vacuous_pairs() {
        let u = ComplexMatrix::from_element(1, 1, c(0.0, 1.0));
        let t = validate(vec![u.clone(), u.adjoint()], TolerancePolicy::default()).unwrap();
        let ops = fundamental_ops(&t).unwrap();
        assert_eq!(ops.rank(), 0);
        assert!(ops.pairs.iter().all(|p| p.first.is_empty()));
    }

    #[test]
    fn fast_pencil_radius_matches_direct_scan() {
        use crate::numkit::numerical_radius;
        use crate::tuples::generate::{complex_gaussian, rng_from_seed};
        let mut rng = rng_from_seed(5);
        for n in 1..5 {
            let a = complex_gaussian(n, n, &mut rng) * C64::from(0.3);
            let b = complex_gaussian(n, n, &mut rng) * C64::from(0.3);
            let direct = (0..360)
                .map(|k| numerical_radius(&(&a + &b * C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 360.0)), 360))
                .fold(0.0, f64::max);
            let fast = pencil_radius(&a, &b, 360);
            assert!(fast >= direct - 1e-9 && fast <= direct + 1e-3, "{direct} {fast}");
        }
    }

    #[test]
    fn gamma_scalar() {
        let p = scalar(0.5);
        let s = scalar(0.3);
        let (defect, x) = gamma_fundamental_op(&s, &p, &TolerancePolicy::default()).unwrap();
        let expected = (0.3 - 0.15) / 0.75;
        assert_eq!(defect.rank(), 1);
        assert!((x[(0, 0)].re - expected).abs() < 1e-14);
    }
}
