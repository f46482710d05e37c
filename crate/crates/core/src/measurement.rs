//! Measurement through the multiplicative unitary.
//!
//! A factor `M` with MASA `N` is coupled to the pointer space `ℂ[G]` by
//! `φ(V) = Σ_γ E(γ) ⊗ λ_γ`. Starting the pointer at the neutral position, the
//! coupling correlates each eigenvector with its pointer label, and the
//! instrument `𝔍(Δ|ω)(B) = (ω ⊗ |ι⟩⟨ι|)(φ(V)* (B ⊗ χ_Δ) φ(V))` yields both
//! outcome probabilities and post-measurement states.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::FiniteDimAlgebra;
use crate::group::{multiplicative_unitary, translation, FiniteAbelianGroup, MasaData};
use crate::linalg::{self, c64, embed_on_legs, identity, kron, zeros, CMatrix, CVector};
use crate::states::State;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MeasurementSetup {
    system: MasaData,
    group: FiniteAbelianGroup,
    coupling: CMatrix,
    /// `φ(V)(1 ⊗ |ι⟩)`, an isometry `H_M → H_M ⊗ ℂ[G]`.
    dilation: CMatrix,
    tol: f64,
}

/// `φ(V) = Σ_γ E(γ) ⊗ λ_γ`.
pub fn build_coupling(masa: &MasaData, group: &FiniteAbelianGroup) -> Result<MeasurementSetup> {
    let ops: Vec<CMatrix> = (0..group.order()).map(|g| translation(group, g)).collect();
    MeasurementSetup::with_pointer_operators(masa, group, &ops)
}

impl MeasurementSetup {
    /// Coupling `Σ_γ E(γ) ⊗ ops[γ]` with arbitrary pointer unitaries; used to
    /// build deliberately wrong couplings.
    pub fn with_pointer_operators(masa: &MasaData, group: &FiniteAbelianGroup, ops: &[CMatrix]) -> Result<Self> {
        let count = masa.outcome_count();
        if group.order() != count {
            return Err(Error::GroupOrderMismatch { expected: count, found: group.order() });
        }
        if ops.len() != count || ops.iter().any(|o| o.nrows() != count || o.ncols() != count) {
            return Err(Error::DimensionMismatch("one pointer operator of size |G| per outcome".into()));
        }
        let d = masa.dim();
        let mut coupling = zeros(d * count, d * count);
        for (e, op) in masa.projections().iter().zip(ops) {
            coupling += kron(e, op);
        }
        let tol = masa.factor().tol();
        if !linalg::is_unitary(&coupling, tol.sqrt()) {
            return Err(Error::NotUnitary(format!("coupling defect {:e}", linalg::unitarity_defect(&coupling))));
        }
        let mut pointer = zeros(count, 1);
        pointer[(group.identity(), 0)] = c64(1.0, 0.0);
        let dilation = &coupling * kron(&identity(d), &pointer);
        Ok(Self { system: masa.clone(), group: group.clone(), coupling, dilation, tol })
    }

    pub fn system(&self) -> &MasaData {
        &self.system
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn pointer_dim(&self) -> usize {
        self.group.order()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `‖φ(V) − Σ_γ E(γ) ⊗ λ_γ‖`.
    pub fn reconstruction_residual(&self) -> f64 {
        let mut expected = zeros(self.coupling.nrows(), self.coupling.ncols());
        for (g, e) in self.system.projections().iter().enumerate() {
            expected += kron(e, &translation(&self.group, g));
        }
        (&self.coupling - expected).norm()
    }
}

/// `‖φ(V)₁₂ φ(V)₁₃ V₂₃ − V₂₃ φ(V)₁₂‖` on `H_M ⊗ ℂ[G] ⊗ ℂ[G]`.
pub fn check_modified_pentagonal(setup: &MeasurementSetup) -> Result<f64> {
    let dims = [setup.dim(), setup.pointer_dim(), setup.pointer_dim()];
    let v = multiplicative_unitary(&setup.group).to_matrix();
    let phi12 = embed_on_legs(&setup.coupling, &dims, &[0, 1])?;
    let phi13 = embed_on_legs(&setup.coupling, &dims, &[0, 2])?;
    let v23 = embed_on_legs(&v, &dims, &[1, 2])?;
    Ok((&phi12 * &phi13 * &v23 - &v23 * &phi12).norm())
}

/// `φ_γ ξ_δ = ξ_{γ+δ}` on the MASA eigenbasis.
pub fn cyclic_shift_representation(setup: &MeasurementSetup) -> Vec<CMatrix> {
    let basis = setup.system.eigenbasis();
    let count = setup.pointer_dim();
    let m = basis.ncols() / count;
    let g = &setup.group;
    (0..count)
        .map(|gamma| {
            let mut u = zeros(setup.dim(), setup.dim());
            for delta in 0..count {
                let target = g.add(gamma, delta);
                for l in 0..m {
                    u += basis.column(target * m + l) * basis.column(delta * m + l).adjoint();
                }
            }
            u
        })
        .collect()
}

fn spectral_projection(setup: &MeasurementSetup, delta: &BTreeSet<usize>) -> CMatrix {
    let mut e = zeros(setup.dim(), setup.dim());
    for &g in delta {
        e += &setup.system.projections()[g];
    }
    e
}

fn outcome_set(setup: &MeasurementSetup, delta: &[usize]) -> Result<BTreeSet<usize>> {
    let n = setup.pointer_dim();
    if let Some(&bad) = delta.iter().find(|&&g| g >= n) {
        return Err(Error::InvalidInput(format!("outcome {bad} is not an element of a group of order {n}")));
    }
    Ok(delta.iter().copied().collect())
}

/// Largest residual of `φ_γ E(Δ) φ_γ* = E(γ+Δ)` over all `γ` and all subsets
/// `Δ`, together with `φ(V)(φ_γ ⊗ 1) = (φ_γ ⊗ λ_γ)φ(V)`.
pub fn check_imprimitivity(setup: &MeasurementSetup, shift: &[CMatrix]) -> Result<f64> {
    let n = setup.pointer_dim();
    let d = setup.dim();
    if shift.len() != n {
        return Err(Error::DimensionMismatch(format!("{} shift unitaries for a group of order {n}", shift.len())));
    }
    for (g, u) in shift.iter().enumerate() {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch(format!("shift {g} has the wrong size")));
        }
        if !linalg::is_unitary(u, setup.tol.sqrt()) {
            return Err(Error::NotUnitary(format!("shift {g}")));
        }
    }
    let group = &setup.group;
    let mut worst: f64 = 0.0;
    let subsets: u64 = 1 << n.min(20);
    for (gamma, u) in shift.iter().enumerate() {
        for mask in 0..subsets {
            let delta: BTreeSet<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
            let moved: BTreeSet<usize> = delta.iter().map(|&k| group.add(gamma, k)).collect();
            let lhs = u * spectral_projection(setup, &delta) * u.adjoint();
            worst = worst.max((lhs - spectral_projection(setup, &moved)).norm());
        }
        let lhs = &setup.coupling * kron(u, &identity(n));
        let rhs = kron(u, &translation(group, gamma)) * &setup.coupling;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `φ(V)(ξ ⊗ |ι⟩)`. A non-normalized `ξ` is normalized with a warning.
pub fn correlate(setup: &MeasurementSetup, xi: &CVector) -> Result<CVector> {
    if xi.len() != setup.dim() {
        return Err(Error::DimensionMismatch(format!("vector of length {} for C^{}", xi.len(), setup.dim())));
    }
    let norm = xi.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidState("zero vector".into()));
    }
    let xi = if (norm - 1.0).abs() > setup.tol {
        log::warn!("input vector has norm {norm}; normalizing");
        xi.unscale(norm)
    } else {
        xi.clone()
    };
    Ok(&setup.dilation * xi)
}

/// Pointer basis projection `χ_Δ`.
fn pointer_projection(n: usize, delta: &BTreeSet<usize>) -> CMatrix {
    let mut chi = zeros(n, n);
    for &g in delta {
        chi[(g, g)] = c64(1.0, 0.0);
    }
    chi
}

fn check_state(setup: &MeasurementSetup, omega: &State) -> Result<()> {
    if omega.dim() != setup.dim() {
        return Err(Error::DimensionMismatch(format!("state on C^{} for C^{}", omega.dim(), setup.dim())));
    }
    Ok(())
}

/// Heisenberg-picture operator `Φ* (B ⊗ χ_Δ) Φ` on `H_M`.
fn instrument_operator(setup: &MeasurementSetup, delta: &BTreeSet<usize>, b: &CMatrix) -> CMatrix {
    let chi = pointer_projection(setup.pointer_dim(), delta);
    setup.dilation.adjoint() * kron(b, &chi) * &setup.dilation
}

/// `𝔍(Δ|ω)(B)`. `B` must lie in `M`.
pub fn instrument(setup: &MeasurementSetup, omega: &State, delta: &[usize], b: &CMatrix) -> Result<Complex64> {
    check_state(setup, omega)?;
    if b.nrows() != setup.dim() || b.ncols() != setup.dim() {
        return Err(Error::DimensionMismatch("observable has the wrong size".into()));
    }
    let distance = setup.system.factor().distance(b);
    if distance > setup.tol.sqrt() * b.norm().max(1.0) {
        return Err(Error::OutsideAlgebra(distance));
    }
    let delta = outcome_set(setup, delta)?;
    Ok(omega.expect(&instrument_operator(setup, &delta, b)))
}

#[derive(Debug, Clone)]
pub struct InstrumentResult {
    pub probability: f64,
    pub post_state: State,
    pub outcome_set: Vec<usize>,
}

/// Outcome probability and the normalized post-measurement state.
pub fn measure(setup: &MeasurementSetup, omega: &State, delta: &[usize]) -> Result<InstrumentResult> {
    check_state(setup, omega)?;
    let set = outcome_set(setup, delta)?;
    let d = setup.dim();
    let probability = omega.expect(&instrument_operator(setup, &set, &identity(d))).re;
    if probability < setup.tol {
        return Err(Error::NoOutcome { probability });
    }
    // Trace duality over an orthonormal basis of M: σ = Σ_i f(B_i*) B_i.
    let factor: &FiniteDimAlgebra = setup.system.factor();
    let mut density = zeros(d, d);
    for b in factor.basis() {
        let value = omega.expect(&instrument_operator(setup, &set, &b.adjoint()));
        density += b * value;
    }
    let post_state = State::new(density.unscale(probability), setup.tol.sqrt())?;
    Ok(InstrumentResult { probability, post_state, outcome_set: set.into_iter().collect() })
}

/// Singleton outcome probabilities `p({γ}|ω)`.
pub fn outcome_probabilities(setup: &MeasurementSetup, omega: &State) -> Result<Vec<f64>> {
    check_state(setup, omega)?;
    let d = setup.dim();
    Ok((0..setup.pointer_dim())
        .map(|g| {
            let set = BTreeSet::from([g]);
            omega.expect(&instrument_operator(setup, &set, &identity(d))).re
        })
        .collect())
}

/// Histogram of `count` i.i.d. outcomes drawn with a seeded ChaCha8 generator.
pub fn sample_outcomes(setup: &MeasurementSetup, omega: &State, count: usize, seed: u64) -> Result<Vec<usize>> {
    let probabilities: Vec<f64> = outcome_probabilities(setup, omega)?.into_iter().map(|p| p.max(0.0)).collect();
    let mut histogram = vec![0; probabilities.len()];
    if count == 0 {
        return Ok(histogram);
    }
    let dist = WeightedIndex::new(&probabilities).map_err(|e| Error::Numerical(format!("outcome weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        histogram[dist.sample(&mut rng)] += 1;
    }
    Ok(histogram)
}

/// The two ways of embedding `M` into `B(H_M ⊗ ℂ[G])` before adjoining `1 ⊗ λ(G)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossedEmbedding {
    /// `α(B) = φ(V)(B ⊗ 1)φ(V)*`.
    Coupling,
    /// `π_α(B) = Σ_h φ_h* B φ_h ⊗ |h⟩⟨h|` for the cyclic shift action.
    ShiftAction,
}

#[derive(Debug, Clone)]
pub struct CrossedProductComparison {
    pub embedding: CrossedEmbedding,
    pub algebra: FiniteDimAlgebra,
    /// Distance of `φ(V)` from the generated algebra.
    pub coupling_distance: f64,
}

/// Algebra generated by `1 ⊗ λ(G)` and the chosen copy of `M`.
pub fn measurement_crossed_product(setup: &MeasurementSetup, embedding: CrossedEmbedding) -> Result<CrossedProductComparison> {
    let n = setup.pointer_dim();
    let d = setup.dim();
    let group = &setup.group;
    let mut generators: Vec<CMatrix> = (0..n).map(|g| kron(&identity(d), &translation(group, g))).collect();
    let factor = setup.system.factor();
    match embedding {
        CrossedEmbedding::Coupling => {
            let phi = &setup.coupling;
            for b in factor.basis() {
                generators.push(phi * kron(b, &identity(n)) * phi.adjoint());
            }
        }
        CrossedEmbedding::ShiftAction => {
            let shift = cyclic_shift_representation(setup);
            for b in factor.basis() {
                let mut image = zeros(d * n, d * n);
                for (h, u) in shift.iter().enumerate() {
                    image += kron(&(u.adjoint() * b * u), &linalg::matrix_unit(n, h, h));
                }
                generators.push(image);
            }
        }
    }
    let algebra = FiniteDimAlgebra::generate(&generators, d * n, setup.tol)?;
    let coupling_distance = algebra.distance(&setup.coupling);
    Ok(CrossedProductComparison { embedding, algebra, coupling_distance })
}
