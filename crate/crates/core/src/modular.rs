//! Disjoint complements, central supports and Tomita-Takesaki data.
//!
//! The standard form of `A = ⊕_k M_{n_k}` with a faithful state `φ(x) = Σ_k tr(ρ_k x_k)`
//! is realized on the Hilbert-Schmidt space `⊕_k M_{n_k}` (vectorized column
//! major) with `A` acting by left multiplication. There `Ω = ⊕ ρ_k^{1/2}`,
//! `Δξ = ρ ξ ρ⁻¹` and `Jξ = ξ*`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{join, Block, FiniteDimAlgebra, Projection};
use crate::linalg::{
    self, c64, gram_schmidt, hermitian_eigen, hermitian_function, identity, intertwining_subspace, kron, range_basis,
    subspace_distance, to_columns, zeros, CMatrix, CVector,
};
use crate::representation::{check_same_algebra, intertwiner_space, AlgebraSignature, RepresentationData};
use crate::states::State;
use crate::{Error, Result};

fn canonical_on(signature: &AlgebraSignature, support: &BTreeSet<usize>) -> RepresentationData {
    let mults = (0..signature.block_count()).map(|k| usize::from(support.contains(&k))).collect();
    RepresentationData::canonical(signature.clone(), mults).expect("multiplicity vector matches block count")
}

/// `π°`: one copy of every block on which `π` vanishes.
pub fn disjoint_complement(pi: &RepresentationData) -> RepresentationData {
    let all: BTreeSet<usize> = (0..pi.signature().block_count()).collect();
    let complement = all.difference(&pi.support()).copied().collect();
    canonical_on(pi.signature(), &complement)
}

/// `c(π)` as a projection on the reduced universal representation space.
pub fn central_support(pi: &RepresentationData) -> Projection {
    let universal = RepresentationData::reduced_universal(pi.signature().clone());
    let mut c = zeros(universal.dim(), universal.dim());
    for k in pi.support() {
        c += universal.block_identity(k);
    }
    Projection::new_unchecked(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiorthReport {
    /// `‖P(π°) − (1 − c(π))‖`.
    pub complement_residual: f64,
    /// `‖P(π°°) − c(π)‖`.
    pub double_complement_residual: f64,
    /// `π° = π°°°`.
    pub triple_complement_holds: bool,
    /// `π ≤ π°°` as containment of block supports.
    pub contained_in_double: bool,
}

impl BiorthReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.complement_residual <= tol
            && self.double_complement_residual <= tol
            && self.triple_complement_holds
            && self.contained_in_double
    }
}

pub fn biorth_identities(pi: &RepresentationData) -> BiorthReport {
    let c = central_support(pi).into_matrix();
    let one = identity(c.nrows());
    let pc = disjoint_complement(pi);
    let pcc = disjoint_complement(&pc);
    let pccc = disjoint_complement(&pcc);
    BiorthReport {
        complement_residual: (central_support(&pc).into_matrix() - (&one - &c)).norm(),
        double_complement_residual: (central_support(&pcc).into_matrix() - &c).norm(),
        triple_complement_holds: pccc.support() == pc.support(),
        contained_in_double: pi.support().is_subset(&pcc.support()),
    }
}

/// Quasi-equivalence decided by `π₁°° = π₂°°`.
pub fn quasi_equiv_via_biorth(pi1: &RepresentationData, pi2: &RepresentationData) -> Result<bool> {
    check_same_algebra(pi1, pi2)?;
    let d1 = disjoint_complement(&disjoint_complement(pi1));
    let d2 = disjoint_complement(&disjoint_complement(pi2));
    Ok(d1.support() == d2.support())
}

#[derive(Debug, Clone)]
pub struct ModularData {
    source: FiniteDimAlgebra,
    block_dims: Vec<usize>,
    densities: Vec<CMatrix>,
    representation: RepresentationData,
    algebra: FiniteDimAlgebra,
    omega: CVector,
    delta: CMatrix,
    /// `J ξ = j_unitary · conj(ξ)`.
    j_unitary: CMatrix,
    tol: f64,
}

fn block_offsets(dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .scan(0, |acc, &n| {
            let start = *acc;
            *acc += n * n;
            Some(start)
        })
        .collect()
}

fn embed_block(total: usize, offset: usize, block: &CMatrix) -> CMatrix {
    let mut out = zeros(total, total);
    out.view_mut((offset, offset), block.shape()).copy_from(block);
    out
}

/// Permutation of `vec(ξ)` to `vec(ξᵀ)` for `n × n` matrices.
fn transpose_permutation(n: usize) -> CMatrix {
    let perm: Vec<usize> = (0..n * n).map(|idx| (idx % n) * n + idx / n).collect();
    linalg::permutation_matrix(&perm)
}

/// Standard form of `A` for a faithful state.
pub fn standard_form(a: &FiniteDimAlgebra, phi: &State) -> Result<ModularData> {
    if phi.dim() != a.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state on C^{} for algebra on C^{}",
            phi.dim(),
            a.ambient_dim()
        )));
    }
    let tol = a.tol();
    let restricted = phi.restricted_density(a);
    let parts = a.block_components(&restricted);
    let block_dims: Vec<usize> = a.blocks().iter().map(|b| b.dim).collect();
    let mut densities = Vec::with_capacity(parts.len());
    for (k, (part, b)) in parts.iter().zip(a.blocks()).enumerate() {
        let rho = part.scale(b.multiplicity as f64);
        let rho = (&rho + rho.adjoint()).scale(0.5);
        let (values, _) = hermitian_eigen(&rho);
        let min = values.first().copied().unwrap_or(0.0);
        if min <= tol {
            return Err(Error::NotFaithful(format!("block {k} density has eigenvalue {min:e}")));
        }
        densities.push(rho);
    }
    let offsets = block_offsets(&block_dims);
    let total: usize = block_dims.iter().map(|n| n * n).sum();

    let mut images = Vec::with_capacity(a.signature().dim());
    for (k, &n) in block_dims.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let left = kron(&identity(n), &linalg::matrix_unit(n, i, j));
                images.push(embed_block(total, offsets[k], &left));
            }
        }
    }
    let representation = RepresentationData::from_parts(a.signature(), block_dims.clone(), images, total);

    let mut omega = CVector::zeros(total);
    let mut delta = zeros(total, total);
    let mut j_unitary = zeros(total, total);
    for (k, (&n, rho)) in block_dims.iter().zip(&densities).enumerate() {
        let root = hermitian_function(rho, |x| c64(x.max(0.0).sqrt(), 0.0));
        omega.rows_mut(offsets[k], n * n).copy_from(&linalg::vectorize(&root));
        let inverse = hermitian_function(rho, |x| c64(1.0 / x, 0.0));
        let local = kron(&inverse.transpose(), rho);
        delta.view_mut((offsets[k], offsets[k]), (n * n, n * n)).copy_from(&local);
        j_unitary.view_mut((offsets[k], offsets[k]), (n * n, n * n)).copy_from(&transpose_permutation(n));
    }
    let delta = (&delta + delta.adjoint()).scale(0.5);
    // The images are orthogonal matrix units `1 ⊗ e_ij`, each of norm `√n_k`.
    let norms = block_dims.iter().flat_map(|&n| std::iter::repeat_n((n as f64).sqrt(), n * n));
    let basis = representation.images().iter().zip(norms).map(|(x, s)| x.unscale(s)).collect();
    let algebra = FiniteDimAlgebra::from_orthonormal(basis, total, tol)?;
    Ok(ModularData {
        source: a.clone(),
        block_dims,
        densities,
        representation,
        algebra,
        omega,
        delta,
        j_unitary,
        tol,
    })
}

impl ModularData {
    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn source(&self) -> &FiniteDimAlgebra {
        &self.source
    }

    /// Per-block densities `ρ_k` with `φ(x) = Σ_k tr(ρ_k x_k)`.
    pub fn densities(&self) -> &[CMatrix] {
        &self.densities
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// The standard representation; block `k` has multiplicity `n_k`.
    pub fn representation(&self) -> &RepresentationData {
        &self.representation
    }

    /// `π(A)` as a concrete algebra on the standard space.
    pub fn algebra(&self) -> &FiniteDimAlgebra {
        &self.algebra
    }

    pub fn omega(&self) -> &CVector {
        &self.omega
    }

    pub fn delta(&self) -> &CMatrix {
        &self.delta
    }

    pub fn j_unitary(&self) -> &CMatrix {
        &self.j_unitary
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The same data with `J` replaced by plain entrywise conjugation.
    pub fn with_plain_conjugation(&self) -> Self {
        Self { j_unitary: identity(self.dim()), ..self.clone() }
    }

    pub fn apply_j(&self, xi: &CVector) -> CVector {
        &self.j_unitary * xi.map(|z| z.conj())
    }

    /// The linear operator `J X J`.
    pub fn conjugate_by_j(&self, x: &CMatrix) -> CMatrix {
        &self.j_unitary * linalg::conj(x) * linalg::conj(&self.j_unitary)
    }

    /// `Δ^w` for complex `w`.
    pub fn delta_power(&self, w: Complex64) -> CMatrix {
        hermitian_function(&self.delta, |x| (w * x.ln()).exp())
    }

    /// `σ_z(x) = Δ^{iz} x Δ^{−iz}`.
    pub fn flow(&self, x: &CMatrix, z: Complex64) -> CMatrix {
        let iz = Complex64::i() * z;
        self.delta_power(iz) * x * self.delta_power(-iz)
    }

    /// `φ(x) = ⟨Ω, xΩ⟩`.
    pub fn state_value(&self, x: &CMatrix) -> Complex64 {
        self.omega.dotc(&(x * &self.omega))
    }

    /// `π(x)` for `x` in the source algebra.
    pub fn represent(&self, x: &CMatrix) -> Result<CMatrix> {
        self.representation.represent(&self.source.block_components(x))
    }

    /// `Δ` recomputed from the polar decomposition of `S: xΩ ↦ x*Ω`.
    pub fn polar_delta(&self) -> Result<CMatrix> {
        let units = self.representation.images();
        let d = self.dim();
        let mut v = zeros(d, units.len());
        let mut w = zeros(d, units.len());
        for (c, e) in units.iter().enumerate() {
            v.set_column(c, &(e * &self.omega).map(|z| z.conj()));
            w.set_column(c, &(e.adjoint() * &self.omega));
        }
        let inverse = v
            .try_inverse()
            .ok_or_else(|| Error::Numerical("vectors xΩ are not a basis; state is not faithful".into()))?;
        // S = K ∘ conj with K conj(xΩ) = x*Ω, and S*S = conj(K*K).
        let k = w * inverse;
        Ok(linalg::conj(&(k.adjoint() * k)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomitaReport {
    /// `max ‖JΔ^{1/2} xΩ − x*Ω‖` over matrix units.
    pub s_residual: f64,
    /// Subspace distance between `JMJ` and the brute-force commutant `M′`.
    pub jmj_residual: f64,
    /// `(t, max_x dist(Δ^{it}xΔ^{−it}, M))`.
    pub flow_residuals: Vec<(f64, f64)>,
    /// `max |φ(x σ_{−i}(y)) − φ(yx)|` over seeded random pairs.
    pub kms_residual: f64,
    /// `max ‖σ_t(z) − z‖` over a central basis at the sampled times.
    pub center_residual: f64,
    /// `‖ΔΩ − Ω‖ + ‖JΩ − Ω‖ + ‖J² − 1‖`.
    pub fixed_vector_residual: f64,
    /// `‖Δ − |S|²‖` with `|S|²` from the polar decomposition.
    pub polar_residual: f64,
}

impl TomitaReport {
    pub fn max_residual(&self) -> f64 {
        let flows = self.flow_residuals.iter().map(|(_, r)| *r);
        [
            self.s_residual,
            self.jmj_residual,
            self.kms_residual,
            self.center_residual,
            self.fixed_vector_residual,
            self.polar_residual,
        ]
        .into_iter()
        .chain(flows)
        .fold(0.0, f64::max)
    }
}

pub const FLOW_TIMES: [f64; 3] = [0.3, 1.0, std::f64::consts::PI];
const KMS_PAIRS: usize = 8;
const KMS_SEED: u64 = 0x5eed;

fn random_element(m: &FiniteDimAlgebra, rng: &mut impl Rng) -> CMatrix {
    let d = m.ambient_dim();
    let mut x = zeros(d, d);
    for b in m.basis() {
        x += b * c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    x
}

pub fn check_tomita(md: &ModularData) -> Result<TomitaReport> {
    let m = md.algebra();
    let omega = md.omega();
    let half = md.delta_power(c64(0.5, 0.0));
    let s_residual = md
        .representation
        .images()
        .iter()
        .map(|x| (md.apply_j(&(&half * x * omega)) - x.adjoint() * omega).norm())
        .fold(0.0, f64::max);

    let commutant = m.commutant()?;
    let conjugated: Vec<CMatrix> = m.basis().iter().map(|b| md.conjugate_by_j(b)).collect();
    let conjugated = gram_schmidt(&conjugated, md.tol);
    let n = md.dim();
    let jmj_residual = subspace_distance(&to_columns(&conjugated, n * n), &commutant.basis_columns());

    let flow_residuals = FLOW_TIMES
        .iter()
        .map(|&t| {
            let worst = m
                .basis()
                .iter()
                .map(|x| m.distance(&md.flow(x, c64(t, 0.0))))
                .fold(0.0, f64::max);
            (t, worst)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(KMS_SEED);
    let mut kms_residual: f64 = 0.0;
    for _ in 0..KMS_PAIRS {
        let x = random_element(m, &mut rng);
        let y = random_element(m, &mut rng);
        let lhs = md.state_value(&(&x * md.flow(&y, c64(0.0, -1.0))));
        let rhs = md.state_value(&(&y * &x));
        kms_residual = kms_residual.max((lhs - rhs).norm());
    }

    let center = m.center()?;
    let mut center_residual: f64 = 0.0;
    for z in center.basis() {
        for &t in &FLOW_TIMES {
            center_residual = center_residual.max((md.flow(z, c64(t, 0.0)) - z).norm());
        }
    }

    let j_squared = &md.j_unitary * linalg::conj(&md.j_unitary);
    let fixed_vector_residual = (md.delta() * omega - omega).norm()
        + (md.apply_j(omega) - omega).norm()
        + (j_squared - identity(n)).norm();
    let polar_residual = (md.polar_delta()? - md.delta()).norm();

    Ok(TomitaReport {
        s_residual,
        jmj_residual,
        flow_residuals,
        kms_residual,
        center_residual,
        fixed_vector_residual,
        polar_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaloisReport {
    /// Subspace distance between `M ∨ M′` and `Z(M)′`.
    pub join_residual: f64,
    /// Subspace distance between `M` and the fixed points of `M ∨ M′` under `Ad 𝒰(M′)`.
    pub fixed_point_residual: f64,
    pub join_blocks: Vec<Block>,
    pub is_factor: bool,
    /// `M ∨ M′` is all of `B(H)`.
    pub join_is_full: bool,
}

impl GaloisReport {
    pub fn ergodicity_consistent(&self) -> bool {
        self.is_factor == self.join_is_full
    }
}

/// Unitaries `exp(ih)` for Hermitian parts of a basis, scaled so `‖h‖ ≤ 1`;
/// each has the same commutant as its generator.
fn generating_unitaries(a: &FiniteDimAlgebra) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for b in a.basis() {
        for h in [b + b.adjoint(), (b - b.adjoint()) * c64(0.0, 1.0)] {
            let norm = h.norm();
            if norm <= a.tol() {
                continue;
            }
            out.push(hermitian_function(&h.unscale(norm), |x| Complex64::from_polar(1.0, x)));
        }
    }
    out
}

pub fn galois_identities(m: &FiniteDimAlgebra) -> Result<GaloisReport> {
    let d = m.ambient_dim();
    let commutant = m.commutant()?;
    let joined = join(m, &commutant)?;
    let center_commutant = m.center()?.commutant()?;
    let join_residual = joined.span_distance(&center_commutant);

    let pairs: Vec<(CMatrix, CMatrix)> = generating_unitaries(&commutant).into_iter().map(|u| (u.clone(), u)).collect();
    let fixed = intertwining_subspace(joined.basis_columns(), d, d, &pairs, m.tol());
    let fixed_point_residual = subspace_distance(&fixed, &m.basis_columns());

    Ok(GaloisReport {
        join_residual,
        fixed_point_residual,
        join_blocks: joined.blocks().to_vec(),
        is_factor: m.is_factor(),
        join_is_full: joined.dim() == d * d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityReport {
    /// `dim Rep(π, σ)`.
    pub hom_dim: usize,
    /// `dim Std(π°°, σ)`.
    pub standard_hom_dim: usize,
    /// `max ‖η π(e) − π°°(e) η‖` plus the unitarity defect of `η`.
    pub eta_residual: f64,
    /// Largest residual of `T = T°° ∘ η` and of `T°°` intertwining `π°°` with `σ`.
    pub factorization_residual: f64,
}

/// Unitary `V: H_{π°°} → H_π` sending the canonical basis vector `(k, i, l)`
/// to `π(e^{(k)}_{i0}) f_{k,l}`, with `f_{k,·}` an orthonormal basis of the range of `π(e^{(k)}_{00})`.
fn canonical_frame(pi: &RepresentationData, tol: f64) -> Result<CMatrix> {
    let mut columns: Vec<CVector> = Vec::with_capacity(pi.dim());
    for (k, &n) in pi.signature().block_dims.iter().enumerate() {
        let m = pi.multiplicities()[k];
        if m == 0 {
            continue;
        }
        let f = range_basis(pi.unit_image(k, 0, 0), tol);
        if f.ncols() != m {
            return Err(Error::Numerical(format!("block {k}: rank {} for multiplicity {m}", f.ncols())));
        }
        for i in 0..n {
            for l in 0..m {
                columns.push(pi.unit_image(k, i, 0) * f.column(l));
            }
        }
    }
    Ok(CMatrix::from_columns(&columns))
}

pub fn standard_universality(pi: &RepresentationData, sigma: &RepresentationData, tol: f64) -> Result<UniversalityReport> {
    check_same_algebra(pi, sigma)?;
    let sig = sigma.signature();
    for k in sigma.support() {
        if sigma.multiplicities()[k] != sig.block_dims[k] {
            return Err(Error::NotStandard(format!(
                "block {k} has multiplicity {} but dimension {}",
                sigma.multiplicities()[k],
                sig.block_dims[k]
            )));
        }
    }
    let double = RepresentationData::canonical(sig.clone(), pi.multiplicities().to_vec())?;
    let hom = intertwiner_space(pi, sigma, tol)?;
    let standard_hom = intertwiner_space(&double, sigma, tol)?;

    let frame = canonical_frame(pi, tol)?;
    let eta = frame.adjoint();
    let mut eta_residual = if pi.dim() == 0 { 0.0 } else { linalg::unitarity_defect(&eta) };
    for (e, e2) in pi.images().iter().zip(double.images()) {
        eta_residual = eta_residual.max((&eta * e - e2 * &eta).norm());
    }

    let mut factorization_residual: f64 = 0.0;
    for t in &hom {
        let t_double = t * &frame;
        factorization_residual = factorization_residual.max((t - &t_double * &eta).norm());
        for (e2, s) in double.images().iter().zip(sigma.images()) {
            factorization_residual = factorization_residual.max((&t_double * e2 - s * &t_double).norm());
        }
    }
    Ok(UniversalityReport {
        hom_dim: hom.len(),
        standard_hom_dim: standard_hom.len(),
        eta_residual,
        factorization_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;
    use crate::states::quasi_equivalent;
    use crate::testutil::{random_density, random_unitary, rng};
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    fn sig(dims: &[usize]) -> AlgebraSignature {
        AlgebraSignature::new("A", dims.to_vec())
    }

    fn rep(dims: &[usize], mults: &[usize]) -> RepresentationData {
        RepresentationData::canonical(sig(dims), mults.to_vec()).unwrap()
    }

    #[test]
    fn complement_examples() {
        let pi = rep(&[1, 2], &[1, 0]);
        assert_eq!(disjoint_complement(&pi).multiplicities(), &[0, 1]);
        let faithful = rep(&[1, 2], &[2, 1]);
        assert_eq!(disjoint_complement(&faithful).dim(), 0);
        let zero = rep(&[1, 2], &[0, 0]);
        assert_eq!(disjoint_complement(&zero).multiplicities(), &[1, 1]);
    }

    #[test]
    fn central_support_example() {
        let pi = rep(&[1, 2], &[3, 0]);
        assert_eq!(central_support(&pi).matrix(), &diag(&[1.0, 0.0, 0.0]));
        assert_eq!(central_support(&disjoint_complement(&pi)).matrix(), &diag(&[0.0, 1.0, 1.0]));
        assert!(biorth_identities(&pi).holds(0.0));
    }

    #[test]
    fn quasi_equivalence_examples() {
        let pi = rep(&[2, 1], &[1, 0]);
        let three = rep(&[2, 1], &[3, 0]);
        assert!(quasi_equiv_via_biorth(&pi, &three).unwrap());
        assert!(!quasi_equiv_via_biorth(&pi, &rep(&[2, 1], &[0, 1])).unwrap());
        assert!(!quasi_equiv_via_biorth(&pi, &rep(&[2, 1], &[1, 1])).unwrap());
        let other = RepresentationData::canonical(AlgebraSignature::new("B", vec![2, 1]), vec![1, 0]).unwrap();
        assert!(quasi_equiv_via_biorth(&pi, &other).is_err());
    }

    fn state(rho: CMatrix) -> State {
        State::new(rho, TOL).unwrap()
    }

    #[test]
    fn tracial_m2_has_trivial_modular_operator() {
        let a = FiniteDimAlgebra::full(2, TOL).unwrap();
        let md = standard_form(&a, &state(identity(2).unscale(2.0))).unwrap();
        assert_eq!(md.dim(), 4);
        assert!((md.delta() - identity(4)).norm() < 1e-12);
        let report = check_tomita(&md).unwrap();
        assert!(report.max_residual() < 1e-10, "{report:?}");
    }

    #[test]
    fn modular_spectrum_of_diagonal_state() {
        let a = FiniteDimAlgebra::full(2, TOL).unwrap();
        let p = 0.7;
        let md = standard_form(&a, &state(diag(&[p, 1.0 - p]))).unwrap();
        let (values, _) = hermitian_eigen(md.delta());
        let mut expected = [1.0, 1.0, p / (1.0 - p), (1.0 - p) / p];
        expected.sort_by(f64::total_cmp);
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
        let report = check_tomita(&md).unwrap();
        assert!(report.max_residual() < 1e-9, "{report:?}");
    }

    #[test]
    fn commutative_modular_operator_is_trivial() {
        let a = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let md = standard_form(&a, &state(diag(&[0.2, 0.8]))).unwrap();
        assert_eq!(md.dim(), 2);
        assert!((md.delta() - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn non_faithful_state_rejected() {
        let a = FiniteDimAlgebra::full(2, TOL).unwrap();
        assert!(matches!(standard_form(&a, &state(diag(&[1.0, 0.0]))), Err(Error::NotFaithful(_))));
    }

    #[test]
    fn wrong_conjugation_fails_jmj() {
        let a = FiniteDimAlgebra::full(2, TOL).unwrap();
        let md = standard_form(&a, &state(diag(&[0.7, 0.3]))).unwrap();
        let wrong = md.with_plain_conjugation();
        assert!(check_tomita(&wrong).unwrap().jmj_residual > 0.1);
    }

    #[test]
    fn kms_fails_with_opposite_sign() {
        let a = FiniteDimAlgebra::full(2, TOL).unwrap();
        let md = standard_form(&a, &state(diag(&[0.7, 0.3]))).unwrap();
        let x = md.represent(&linalg::matrix_unit(2, 0, 1)).unwrap();
        let y = md.represent(&linalg::matrix_unit(2, 1, 0)).unwrap();
        let good = md.state_value(&(&x * md.flow(&y, c64(0.0, -1.0)))) - md.state_value(&(&y * &x));
        let bad = md.state_value(&(&x * md.flow(&y, c64(0.0, 1.0)))) - md.state_value(&(&y * &x));
        assert!(good.norm() < 1e-12);
        assert!(bad.norm() > 0.1);
    }

    #[test]
    fn block_algebra_standard_form() {
        let mut r = rng(5);
        let a = FiniteDimAlgebra::direct_sum(&[Block::new(2, 1), Block::new(3, 1)], TOL).unwrap();
        let rho = random_density(&mut r, 5);
        let md = standard_form(&a, &state(rho)).unwrap();
        assert_eq!(md.dim(), 13);
        assert_eq!(md.representation().multiplicities(), &[2, 3]);
        let report = check_tomita(&md).unwrap();
        assert!(report.max_residual() < 1e-8, "{report:?}");
    }

    #[test]
    fn galois_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let md = standard_form(&m2, &state(identity(2).unscale(2.0))).unwrap();
        let g = galois_identities(md.algebra()).unwrap();
        assert!(g.join_is_full && g.is_factor);
        assert_eq!(g.join_blocks, vec![Block::new(4, 1)]);
        assert!(g.join_residual < 1e-9 && g.fixed_point_residual < 1e-9);

        let d2 = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let md = standard_form(&d2, &state(diag(&[0.4, 0.6]))).unwrap();
        let g = galois_identities(md.algebra()).unwrap();
        assert!(!g.is_factor && !g.join_is_full && g.ergodicity_consistent());
        assert_eq!(g.join_blocks, vec![Block::new(1, 1), Block::new(1, 1)]);
        assert!(g.join_residual < 1e-9 && g.fixed_point_residual < 1e-9);

        let full = FiniteDimAlgebra::full(3, TOL).unwrap();
        let g = galois_identities(&full).unwrap();
        assert!(g.join_residual < 1e-9 && g.fixed_point_residual < 1e-9 && g.join_is_full);
    }

    #[test]
    fn universality_examples() {
        let sigma = rep(&[2], &[2]);
        let pi = rep(&[2], &[1]);
        let r = standard_universality(&pi, &sigma, TOL).unwrap();
        assert_eq!((r.hom_dim, r.standard_hom_dim), (2, 2));
        assert!(r.eta_residual < 1e-12 && r.factorization_residual < 1e-12);

        let sigma = rep(&[1, 2], &[0, 2]);
        let pi = rep(&[1, 2], &[3, 0]);
        let r = standard_universality(&pi, &sigma, TOL).unwrap();
        assert_eq!((r.hom_dim, r.standard_hom_dim), (0, 0));

        // A rotated copy of π°° factors through an η that is a genuine unitary.
        let mut rg = rng(3);
        let pi = rep(&[1, 2], &[2, 1]);
        let u = random_unitary(&mut rg, pi.dim());
        let rotated = RepresentationData::from_images(sig(&[1, 2]), pi.conjugated(&u).unwrap().images().to_vec(), TOL).unwrap();
        let sigma = rep(&[1, 2], &[1, 2]);
        let r = standard_universality(&rotated, &sigma, TOL).unwrap();
        assert_eq!((r.hom_dim, r.standard_hom_dim), (4, 4));
        assert!(r.eta_residual < 1e-10 && r.factorization_residual < 1e-10);

        assert!(matches!(standard_universality(&pi, &rep(&[1, 2], &[1, 1]), TOL), Err(Error::NotStandard(_))));
    }

    fn support_rep(dims: &[usize], mask: u32) -> RepresentationData {
        let mults: Vec<usize> = (0..dims.len()).map(|k| ((mask >> k) & 1) as usize * (k % 2 + 1)).collect();
        rep(dims, &mults)
    }

    #[test]
    fn order_reversal_exhaustive() {
        let dims = [1, 2, 1, 3, 2];
        for a in 0u32..32 {
            for b in 0u32..32 {
                if a & !b != 0 {
                    continue;
                }
                let (pa, pb) = (support_rep(&dims, a), support_rep(&dims, b));
                let (ca, cb) = (disjoint_complement(&pa), disjoint_complement(&pb));
                assert!(cb.support().is_subset(&ca.support()));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn biorth_agrees_with_concrete(m1 in prop::collection::vec(0usize..3, 3), m2 in prop::collection::vec(0usize..3, 3), seed in any::<u64>()) {
            let dims = [1, 2, 1];
            let p1 = rep(&dims, &m1);
            let p2 = rep(&dims, &m2);
            let mut r = rng(seed);
            let p2 = if p2.dim() > 0 { p2.conjugated(&random_unitary(&mut r, p2.dim())).unwrap() } else { p2 };
            prop_assert_eq!(quasi_equiv_via_biorth(&p1, &p2).unwrap(), quasi_equivalent(&p1, &p2, TOL).unwrap());
            prop_assert!(biorth_identities(&p1).holds(0.0));
        }
    }
}
