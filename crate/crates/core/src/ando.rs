//! Andô tuples and the joint Halmos dilation of the fundamental operators.
//!
//! The dilation space is `ℱ = 𝒟_{T_1} ⊕ ⋯ ⊕ 𝒟_{T_d}`, each summand written
//! in the range basis of its defect operator. In finite dimensions the
//! unitary completions never need an extra summand.

use crate::error::{Error, Result};
use crate::fundamental::{identity_tolerance, FundamentalOps};
use crate::numkit::{
    complete_to_unitary, identity, isometry_residual, range_basis, spectral_norm, unitarity_residual, zeros,
    ComplexMatrix, SubspaceBasis,
};
use crate::report::Check;
use crate::tuples::{defect, ContractionTuple, DefectData};

/// `(ℱ, Λ_j, P_j, U_j)` together with the intertwiners `τ_j`.
#[derive(Debug, Clone)]
pub struct AndoTuple {
    /// Defect data of each `T_k`, giving the summands of `ℱ`.
    pub summands: Vec<DefectData>,
    /// Start of each summand in `ℱ` coordinates.
    pub offsets: Vec<usize>,
    /// Defect data of the product, whose range is the domain of `Λ_j`.
    pub product_defect: DefectData,
    /// `Λ_j : 𝒟_T → ℱ`.
    pub lambda: Vec<ComplexMatrix>,
    /// `U_j Λ_j`-images: `D_T h ↦ D_{T_j}h ⊕ Δ_(j) D_{T_(j)} T_j h`.
    pub image: Vec<ComplexMatrix>,
    /// Unitaries `U_j` on `ℱ` (so `U_j*` maps `Λ_j` onto `image`).
    pub unitaries: Vec<ComplexMatrix>,
    /// Unitaries with `τ_j Λ_j = Λ_1`, `τ_1 = I`.
    pub tau: Vec<ComplexMatrix>,
    pub checks: Vec<Check>,
}

impl AndoTuple {
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn d(&self) -> usize {
        self.summands.len()
    }

    /// Orthogonal projection of `ℱ` onto the summand `𝒟_{T_j}`.
    pub fn projection(&self, j: usize) -> ComplexMatrix {
        let f = self.dim();
        let mut p = zeros(f, f);
        for k in self.offsets[j]..self.offsets[j + 1] {
            p[(k, k)] = 1.0.into();
        }
        p
    }

    /// `Λ_j*(P_j^⊥ U_j*, U_j P_j)Λ_j`.
    pub fn halmos_pair(&self, j: usize) -> (ComplexMatrix, ComplexMatrix) {
        let (a, b) = self.partial_isometries(j);
        let l = &self.lambda[j];
        (l.adjoint() * a * l, l.adjoint() * b * l)
    }

    /// `Λ_1*(τ_j P_j^⊥ U_j* τ_j*, τ_j U_j P_j τ_j*)Λ_1`.
    pub fn joint_halmos_pair(&self, j: usize) -> (ComplexMatrix, ComplexMatrix) {
        let (a, b) = self.partial_isometries(j);
        let t = &self.tau[j];
        let l = &self.lambda[0];
        (l.adjoint() * t * a * t.adjoint() * l, l.adjoint() * t * b * t.adjoint() * l)
    }

    /// `(P_j^⊥ U_j*, U_j P_j)`.
    pub fn partial_isometries(&self, j: usize) -> (ComplexMatrix, ComplexMatrix) {
        let p = self.projection(j);
        let perp = identity(self.dim()) - &p;
        let u = &self.unitaries[j];
        (perp * u.adjoint(), u * p)
    }
}

/// Writes `blocks[i]·h` into the `ℱ` rows belonging to summand `summand_of[i]`.
fn stack_blocks(rows: usize, n: usize, offsets: &[usize], parts: &[(usize, ComplexMatrix)]) -> ComplexMatrix {
    let mut out = zeros(rows, n);
    for (k, block) in parts {
        out.view_mut((offsets[*k], 0), (block.nrows(), n)).copy_from(block);
    }
    out
}

/// Components of `Δ_α D_{T_α} h` as maps of `h`: for `α = (k_1 < ⋯ < k_m)`
/// the `k_i`-block is `D_{T_{k_i}} T_{k_{i+1}} ⋯ T_{k_m}` in range coordinates,
/// each multiplied on the right by `tail`.
fn delta_components(
    tuple: &ContractionTuple,
    summands: &[DefectData],
    alpha: &[usize],
    tail: &ComplexMatrix,
) -> Vec<(usize, ComplexMatrix)> {
    alpha
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let after = tuple.subset_product(&alpha[i + 1..]);
            (k, summands[k].coords_op() * after * tail)
        })
        .collect()
}

/// Right inverse of `h ↦ B* D h` on `ran D`: `B (B* D B)^{-1}`.
fn defect_right_inverse(defect: &DefectData) -> ComplexMatrix {
    let dc = defect.compressed();
    let r = dc.nrows();
    let inv = dc.try_inverse().unwrap_or_else(|| zeros(r, r));
    defect.basis.matrix() * inv
}

/// `Δ_α` as a matrix from `𝒟_{T_α}` coordinates to the summands `α` of `ℱ`
/// (rows outside `α` are zero), together with its well-definedness residual.
pub fn delta_operator(tuple: &ContractionTuple, ando: &AndoTuple, alpha: &[usize]) -> Result<(ComplexMatrix, f64)> {
    let n = tuple.dim();
    let t_alpha = tuple.subset_product(alpha);
    let d_alpha = defect(&t_alpha, tuple.tol())?;
    let parts = delta_components(tuple, &ando.summands, alpha, &identity(n));
    let on_h = stack_blocks(ando.dim(), n, &ando.offsets, &parts);
    let delta = &on_h * defect_right_inverse(&d_alpha);
    let consistency = spectral_norm(&(&delta * d_alpha.coords_op() - &on_h));
    Ok((delta, consistency))
}

/// Builds the Andô tuple of `tuple` and verifies its defining properties.
pub fn ando_tuple(tuple: &ContractionTuple) -> Result<AndoTuple> {
    let tol = *tuple.tol();
    let n = tuple.dim();
    let d = tuple.d();
    let check_tol = identity_tolerance(tuple);
    let summands: Vec<DefectData> = tuple.ops().iter().map(|t| defect(t, &tol)).collect::<Result<_>>()?;
    let mut offsets = vec![0];
    for s in &summands {
        offsets.push(offsets.last().unwrap() + s.rank());
    }
    let f = offsets[d];
    let product_defect = defect(&tuple.product(), &tol)?;
    let r = product_defect.rank();
    let right_inv = defect_right_inverse(&product_defect);
    let coords = product_defect.coords_op();

    let mut checks = Vec::new();
    let mut lambda = Vec::with_capacity(d);
    let mut image = Vec::with_capacity(d);
    for j in 0..d {
        let others: Vec<usize> = (0..d).filter(|&k| k != j).collect();
        let tpj = tuple.partial_product(j);
        let tj = tuple.op(j);

        let mut source = vec![(j, summands[j].coords_op() * &tpj)];
        source.extend(delta_components(tuple, &summands, &others, &identity(n)));
        let source = stack_blocks(f, n, &offsets, &source);

        let mut target = vec![(j, summands[j].coords_op())];
        target.extend(delta_components(tuple, &summands, &others, tj));
        let target = stack_blocks(f, n, &offsets, &target);

        let lam = &source * &right_inv;
        let img = &target * &right_inv;
        let label = j + 1;
        checks.push(Check::new(format!("Λ well-defined, j={label}"), spectral_norm(&(&lam * &coords - &source)), check_tol));
        checks.push(Check::new(format!("U* well-defined, j={label}"), spectral_norm(&(&img * &coords - &target)), check_tol));
        checks.push(Check::new(format!("Λ isometry, j={label}"), isometry_residual(&lam), check_tol));
        checks.push(Check::new(format!("U* isometry on ran Λ, j={label}"), isometry_residual(&img), check_tol));

        let gap = range_basis(&lam, &tol).rank().abs_diff(range_basis(&img, &tol).rank());
        if gap != 0 {
            return Err(Error::EnlargementRequired { gap });
        }
        lambda.push(lam);
        image.push(img);
    }
    for c in &checks {
        if !c.pass {
            return Err(Error::ResidualExceeded { equation: c.name.clone(), norm: c.residual });
        }
    }

    let eye_r = identity(r);
    let mut unitaries = Vec::with_capacity(d);
    let mut tau = Vec::with_capacity(d);
    let lambda_first = SubspaceBasis::from_orthonormal(lambda[0].clone());
    for j in 0..d {
        let dom = SubspaceBasis::from_orthonormal(lambda[j].clone());
        let img = SubspaceBasis::from_orthonormal(image[j].clone());
        let u_star = complete_to_unitary(&dom, &img, &eye_r, &tol)?;
        unitaries.push(u_star.adjoint());
        tau.push(if j == 0 { identity(f) } else { complete_to_unitary(&dom, &lambda_first, &eye_r, &tol)? });
    }
    for j in 0..d {
        let label = j + 1;
        checks.push(Check::new(format!("U unitary, j={label}"), unitarity_residual(&unitaries[j]), check_tol));
        checks.push(Check::new(format!("τ unitary, j={label}"), unitarity_residual(&tau[j]), check_tol));
        checks.push(Check::new(
            format!("τΛ = Λ_1, j={label}"),
            spectral_norm(&(&tau[j] * &lambda[j] - &lambda[0])),
            check_tol,
        ));
    }
    checks.push(Check::new("enlargement not required", 0.0, 0.0));
    Ok(AndoTuple { summands, offsets, product_defect, lambda, image, unitaries, tau, checks })
}

/// Compares the Halmos and joint Halmos dilations with the fundamental
/// operators computed independently.
pub fn verify_halmos(tuple: &ContractionTuple, ando: &AndoTuple, fops: &FundamentalOps) -> Vec<Check> {
    let tol = identity_tolerance(tuple);
    let mut checks = Vec::new();
    for j in 0..tuple.d() {
        let label = j + 1;
        let pair = &fops.pairs[j];
        let (h1, h2) = ando.halmos_pair(j);
        let (g1, g2) = ando.joint_halmos_pair(j);
        checks.push(Check::new(format!("Halmos F1, j={label}"), spectral_norm(&(&h1 - &pair.first)), tol));
        checks.push(Check::new(format!("Halmos F2, j={label}"), spectral_norm(&(&h2 - &pair.second)), tol));
        checks.push(Check::new(format!("joint Halmos F1, j={label}"), spectral_norm(&(&g1 - &pair.first)), tol));
        checks.push(Check::new(format!("joint Halmos F2, j={label}"), spectral_norm(&(&g2 - &pair.second)), tol));
        let (a, b) = ando.partial_isometries(j);
        checks.push(Check::new(format!("dilation pair commutes, j={label}"), spectral_norm(&(&a * &b - &b * &a)), tol));
        let pi = |x: &ComplexMatrix| spectral_norm(&(x * x.adjoint() * x - x));
        checks.push(Check::new(format!("dilation pair partial isometries, j={label}"), pi(&a).max(pi(&b)), tol));
    }
    checks
}

/// Isometry and well-definedness residuals of `Δ_α` for every non-empty
/// `α ⊆ {1, …, d}`.
pub fn verify_delta_isometries(tuple: &ContractionTuple, ando: &AndoTuple) -> Result<Vec<Check>> {
    let tol = identity_tolerance(tuple);
    let d = tuple.d();
    let mut checks = Vec::new();
    for mask in 1usize..(1 << d) {
        let alpha: Vec<usize> = (0..d).filter(|k| mask & (1 << k) != 0).collect();
        let (delta, consistency) = delta_operator(tuple, ando, &alpha)?;
        let name: Vec<String> = alpha.iter().map(|k| (k + 1).to_string()).collect();
        let name = name.join(",");
        checks.push(Check::new(format!("Δ isometry, α=({name})"), isometry_residual(&delta), tol));
        checks.push(Check::new(format!("Δ well-defined, α=({name})"), consistency, tol));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundamental::fundamental_ops;
    use crate::numkit::{c, TolerancePolicy};
    use crate::tuples::validate;

    #[test]
    fn zero_pair_on_the_line() {
        let z = ComplexMatrix::from_element(1, 1, c(0.0, 0.0));
        let t = validate(vec![z.clone(), z], TolerancePolicy::default()).unwrap();
        let ando = ando_tuple(&t).unwrap();
        assert_eq!(ando.dim(), 2);
        for l in &ando.lambda {
            assert_eq!(l.shape(), (2, 1));
            assert!(l.iter().filter(|z| z.norm() > 0.5).count() == 1);
        }
        let f = fundamental_ops(&t).unwrap();
        assert!(verify_halmos(&t, &ando, &f).iter().all(|c| c.pass));
    }

    #[test]
    fn unitary_tuple_has_empty_dilation_domain() {
        let u = ComplexMatrix::from_element(1, 1, c(0.0, 1.0));
        let t = validate(vec![u.clone(), u], TolerancePolicy::default()).unwrap();
        let ando = ando_tuple(&t).unwrap();
        assert_eq!(ando.dim(), 0);
        assert_eq!(ando.product_defect.rank(), 0);
    }
}
