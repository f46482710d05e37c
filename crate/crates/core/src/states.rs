//! States, GNS representations and the sector-level channels.
//!
//! A state of an algebra acting on `ℂ^n` is stored as a density matrix with
//! `ω(a) = tr(ρ a)`. Its restriction to the center gives the classical sector
//! distribution (the q→c channel); the conditional expectation onto the
//! center built from the central decomposition has a dual that maps sector
//! distributions back to states (the c→q channel).

use num_complex::Complex64;

use crate::algebra::{self, FiniteDimAlgebra};
use crate::linalg::{self, hermitian_eigen, range_basis, zeros, CMatrix, CVector};
use crate::representation::{check_same_algebra, intertwiner_space, RepresentationData};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    density: CMatrix,
    label: String,
}

impl State {
    /// Validates positivity (eigenvalues ≥ −tol) and unit trace.
    pub fn new(density: CMatrix, tol: f64) -> Result<Self> {
        if !density.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        if !linalg::is_hermitian(&density, tol) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let trace = density.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let (values, _) = hermitian_eigen(&density);
        if let Some(&min) = values.first() {
            if min < -tol {
                return Err(Error::InvalidState(format!("density has negative eigenvalue {min:e}")));
            }
        }
        let density = (&density + density.adjoint()).scale(0.5);
        Ok(Self { density, label: "defining".into() })
    }

    /// Vector state `|ξ⟩⟨ξ| / ‖ξ‖²`.
    pub fn from_vector(xi: &CVector) -> Result<Self> {
        let norm = xi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = xi.unscale(norm);
        Ok(Self { density: &v * v.adjoint(), label: "defining".into() })
    }

    pub(crate) fn new_unchecked(density: CMatrix) -> Self {
        Self { density, label: "defining".into() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn density(&self) -> &CMatrix {
        &self.density
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.density.nrows()
    }

    /// `ω(a) = tr(ρ a)`.
    pub fn expect(&self, a: &CMatrix) -> Complex64 {
        (&self.density * a).trace()
    }

    /// The unique density inside the algebra inducing the same functional on it.
    pub fn restricted_density(&self, a: &FiniteDimAlgebra) -> CMatrix {
        a.project(&self.density)
    }
}

fn check_dims(a: &FiniteDimAlgebra, omega: &State) -> Result<()> {
    if omega.dim() != a.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state on C^{} for algebra on C^{}",
            omega.dim(),
            a.ambient_dim()
        )));
    }
    Ok(())
}

/// Probability vector over sectors in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDistribution {
    weights: Vec<f64>,
}

impl SectorDistribution {
    pub fn new(weights: Vec<f64>, tol: f64) -> Result<Self> {
        if weights.iter().any(|&w| w < -tol || !w.is_finite()) {
            return Err(Error::InvalidInput("sector weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!("sector weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn point_mass(sectors: usize, k: usize) -> Self {
        let mut weights = vec![0.0; sectors];
        weights[k] = 1.0;
        Self { weights }
    }

    pub fn uniform(sectors: usize) -> Self {
        Self { weights: vec![1.0 / sectors as f64; sectors] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sup-norm distance between two distributions.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// q→c channel: `weights[k] = ω(z_k)`.
pub fn sector_distribution(a: &FiniteDimAlgebra, omega: &State) -> Result<SectorDistribution> {
    check_dims(a, omega)?;
    let weights = algebra::central_traces(a, omega.density())
        .into_iter()
        .map(|w| if w.abs() < a.tol() { 0.0 } else { w })
        .collect();
    SectorDistribution::new(weights, a.tol().sqrt())
}

/// GNS triple `(H_ω, π_ω, Ω_ω)` realized on `A / N_ω`.
#[derive(Debug, Clone)]
pub struct GnsTriple {
    /// Elements of `A` whose classes form an orthonormal basis of `H_ω`.
    vectors: Vec<CMatrix>,
    density: CMatrix,
    representation: RepresentationData,
    cyclic: CVector,
}

impl GnsTriple {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn representation(&self) -> &RepresentationData {
        &self.representation
    }

    pub fn cyclic_vector(&self) -> &CVector {
        &self.cyclic
    }

    /// `π_ω(a)` as a matrix, `π(a)_{rs} = ω(f_r* a f_s)`.
    pub fn represent(&self, a: &CMatrix) -> CMatrix {
        let d = self.dim();
        let right: Vec<CMatrix> = self.vectors.iter().map(|f| a * f * &self.density).collect();
        CMatrix::from_fn(d, d, |r, s| linalg::hs_inner(&self.vectors[r], &right[s]))
    }

    /// Class `[a] ∈ H_ω` in the orthonormal basis.
    pub fn vector_of(&self, a: &CMatrix) -> CVector {
        let ad = a * &self.density;
        CVector::from_iterator(self.dim(), self.vectors.iter().map(|f| linalg::hs_inner(f, &ad)))
    }
}

/// GNS construction from the algebra's own orthonormal basis.
pub fn gns(a: &FiniteDimAlgebra, omega: &State) -> Result<GnsTriple> {
    gns_with_basis(a, a.basis(), omega)
}

/// GNS construction from any spanning set of the algebra.
pub fn gns_with_basis(a: &FiniteDimAlgebra, spanning: &[CMatrix], omega: &State) -> Result<GnsTriple> {
    check_dims(a, omega)?;
    let rho = omega.density();
    let k = spanning.len();
    let products: Vec<CMatrix> = spanning.iter().map(|b| b * rho).collect();
    // Gram matrix G_ij = ω(b_i* b_j) = tr(b_i* b_j ρ).
    let gram = CMatrix::from_fn(k, k, |i, j| linalg::hs_inner(&spanning[i], &products[j]));
    let (values, vectors) = hermitian_eigen(&gram);
    let mut basis = Vec::new();
    for (r, &lambda) in values.iter().enumerate() {
        if lambda <= a.tol() {
            continue;
        }
        let mut f = zeros(a.ambient_dim(), a.ambient_dim());
        for (i, b) in spanning.iter().enumerate() {
            f += b * vectors[(i, r)];
        }
        basis.push(f.unscale(lambda.sqrt()));
    }
    let mut triple = GnsTriple {
        vectors: basis,
        density: rho.clone(),
        representation: RepresentationData::reduced_universal(a.signature()),
        cyclic: CVector::zeros(0),
    };
    triple.cyclic = triple.vector_of(&linalg::identity(a.ambient_dim()));
    let images: Vec<CMatrix> = a.all_matrix_units().iter().map(|e| triple.represent(e)).collect();
    triple.representation = if triple.dim() == 0 {
        return Err(Error::InvalidState("state vanishes on the algebra".into()));
    } else {
        RepresentationData::from_images(a.signature(), images, a.tol().sqrt())?
    };
    Ok(triple)
}

/// Unitary `U` with `U π₁(a) Ω₁ = π₂(a) Ω₂`, witnessing uniqueness of the GNS triple.
pub fn gns_equivalence(a: &FiniteDimAlgebra, g1: &GnsTriple, g2: &GnsTriple) -> Result<CMatrix> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch("GNS spaces differ in dimension".into()));
    }
    let d = g1.dim();
    let mut x1 = zeros(d, a.dim());
    let mut x2 = zeros(d, a.dim());
    for (j, b) in a.basis().iter().enumerate() {
        x1.set_column(j, &g1.vector_of(b));
        x2.set_column(j, &g2.vector_of(b));
    }
    let pinv = x1
        .pseudo_inverse(a.tol())
        .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;
    Ok(x2 * pinv)
}

/// True iff the center of `π_ω(A)″` in the GNS representation is trivial.
pub fn is_factor_state(a: &FiniteDimAlgebra, omega: &State) -> Result<bool> {
    let g = gns(a, omega)?;
    let generated = FiniteDimAlgebra::generate(g.representation().images(), g.dim(), a.tol())?;
    Ok(generated.center()?.dim() == 1)
}

/// Supports computed from the concrete images `π(1_k)`.
fn concrete_support(pi: &RepresentationData, tol: f64) -> Vec<bool> {
    (0..pi.signature().block_count())
        .map(|k| pi.block_identity(k).norm() > tol)
        .collect()
}

/// Unitary equivalence up to multiplicity: the same blocks occur with non-zero multiplicity.
pub fn quasi_equivalent(pi1: &RepresentationData, pi2: &RepresentationData, tol: f64) -> Result<bool> {
    check_same_algebra(pi1, pi2)?;
    Ok(concrete_support(pi1, tol) == concrete_support(pi2, tol))
}

/// No non-zero intertwiner exists.
pub fn disjoint(pi1: &RepresentationData, pi2: &RepresentationData, tol: f64) -> Result<bool> {
    Ok(intertwiner_space(pi1, pi2, tol)?.is_empty())
}

#[derive(Debug, Clone)]
pub struct CentralComponent {
    pub sector: usize,
    pub weight: f64,
    pub state: State,
}

/// `ω = Σ_k w_k ω_k` with each `ω_k` a factor state; zero-weight sectors omitted.
#[derive(Debug, Clone)]
pub struct CentralDecomposition {
    pub components: Vec<CentralComponent>,
}

impl CentralDecomposition {
    /// `‖ρ_A − Σ w_k (ρ_k)_A‖` with densities restricted to the algebra.
    pub fn barycenter_defect(&self, a: &FiniteDimAlgebra, omega: &State) -> f64 {
        let mut sum = zeros(a.ambient_dim(), a.ambient_dim());
        for c in &self.components {
            sum += c.state.restricted_density(a).scale(c.weight);
        }
        (omega.restricted_density(a) - sum).norm()
    }
}

pub fn central_decomposition(a: &FiniteDimAlgebra, omega: &State) -> Result<CentralDecomposition> {
    check_dims(a, omega)?;
    let rho = omega.density();
    let mut components = Vec::new();
    for (k, z) in a.minimal_central_projections().iter().enumerate() {
        let z = z.matrix();
        let weight = (z * rho).trace().re;
        if weight <= a.tol() {
            continue;
        }
        let density = (z * rho * z).unscale(weight);
        components.push(CentralComponent { sector: k, weight, state: State::new_unchecked(density) });
    }
    Ok(CentralDecomposition { components })
}

/// `Λ(x) = Σ_k ω_k(z_k x z_k) z_k`, the conditional expectation onto the center
/// determined by the central measure of a state with full sector support.
#[derive(Debug, Clone)]
pub struct ConditionalExpectation {
    projections: Vec<CMatrix>,
    components: Vec<State>,
    weights: Vec<f64>,
}

impl ConditionalExpectation {
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let n = x.nrows();
        let mut out = zeros(n, n);
        for (z, state) in self.projections.iter().zip(&self.components) {
            out += z * state.expect(&(z * x * z));
        }
        out
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The factor state `ω_k = δ_k ∘ Λ`.
    pub fn component(&self, k: usize) -> &State {
        &self.components[k]
    }

    pub fn sector_count(&self) -> usize {
        self.projections.len()
    }
}

pub fn conditional_expectation(a: &FiniteDimAlgebra, omega: &State) -> Result<ConditionalExpectation> {
    check_dims(a, omega)?;
    let rho = omega.density();
    let mut projections = Vec::new();
    let mut components = Vec::new();
    let mut weights = Vec::new();
    for (k, z) in a.minimal_central_projections().into_iter().enumerate() {
        let z = z.into_matrix();
        let w = (&z * rho).trace().re;
        if w <= a.tol() {
            return Err(Error::NotFaithful(format!("sector {k} has central weight {w:e}")));
        }
        components.push(State::new_unchecked((&z * rho * &z).unscale(w)));
        projections.push(z);
        weights.push(w);
    }
    Ok(ConditionalExpectation { projections, components, weights })
}

/// c→q channel: `Λ*(target) = Σ_k target_k ω_k`.
pub fn c_to_q_channel(a: &FiniteDimAlgebra, omega: &State, target: &SectorDistribution) -> Result<State> {
    let lambda = conditional_expectation(a, omega)?;
    if target.len() != lambda.sector_count() {
        return Err(Error::DimensionMismatch(format!(
            "distribution over {} sectors for an algebra with {}",
            target.len(),
            lambda.sector_count()
        )));
    }
    let mut density = zeros(a.ambient_dim(), a.ambient_dim());
    for (t, state) in target.weights().iter().zip(&lambda.components) {
        density += state.density().scale(*t);
    }
    Ok(State::new_unchecked(density).with_label(omega.label().to_string()))
}

/// Brute-force check of `μ(Â₁Â₂) = ⟨Ω | π(A₁) P π(A₂) Ω⟩` with `P = [𝔅Ω]`, `𝔅` the
/// center of `π_ω(A)″`, and `μ` the central measure. Returns `|lhs − rhs|`.
pub fn tomita_correspondence_residual(a: &FiniteDimAlgebra, omega: &State, a1: &CMatrix, a2: &CMatrix) -> Result<f64> {
    let (a1, a2) = (a.project(a1), a.project(a2));
    let decomposition = central_decomposition(a, omega)?;
    let lhs: Complex64 = decomposition
        .components
        .iter()
        .map(|c| c.state.expect(&a1) * c.state.expect(&a2) * c.weight)
        .sum();

    let g = gns(a, omega)?;
    let generated = FiniteDimAlgebra::generate(g.representation().images(), g.dim(), a.tol())?;
    let center = generated.center()?;
    let omega_vec = g.cyclic_vector();
    let mut span = zeros(g.dim(), center.dim());
    for (j, z) in center.basis().iter().enumerate() {
        span.set_column(j, &(z * omega_vec));
    }
    let q = range_basis(&span, a.tol());
    let p = &q * q.adjoint();
    let rhs = (omega_vec.adjoint() * g.represent(&a1) * p * g.represent(&a2) * omega_vec)[(0, 0)];
    Ok((lhs - rhs).norm())
}
