//! Finite-dimensional `*`-algebras of matrices and their Wedderburn structure.
//!
//! A [`FiniteDimAlgebra`] is a unital `*`-subalgebra of `M_n(ℂ)` stored as a
//! trace-orthonormal basis. On construction the algebra is decomposed into
//! blocks `⊕_k M_{n_k} ⊗ 1_{m_k}`: the minimal central projections (sectors)
//! are found by diagonalizing a generic central element, and matrix units
//! inside each central summand give the block unitary.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{
    self, c64, cluster_sorted, hermitian_eigen, identity, intertwining_subspace, range_basis,
    to_columns, zeros, CMatrix,
};
use crate::representation::{AlgebraSignature, RepresentationData};
use crate::{Error, Result};

/// One Wedderburn block `M_dim ⊗ 1_multiplicity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub dim: usize,
    pub multiplicity: usize,
}

impl Block {
    pub fn new(dim: usize, multiplicity: usize) -> Self {
        Self { dim, multiplicity }
    }
}

/// An orthogonal projection `P = P* = P²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection(CMatrix);

impl Projection {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("projection must be square".into()));
        }
        let defect = (&matrix - matrix.adjoint()).norm().max((&matrix * &matrix - &matrix).norm());
        if defect > tol {
            return Err(Error::InvalidInput(format!("not a projection (defect {defect:e})")));
        }
        Ok(Self(matrix))
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn rank(&self) -> usize {
        self.0.trace().re.round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct FiniteDimAlgebra {
    ambient_dim: usize,
    basis: Vec<CMatrix>,
    blocks: Vec<Block>,
    central_projections: Vec<CMatrix>,
    /// Columns grouped per block; within block `k` column `i·m_k + l` is the
    /// `l`-th copy of the `i`-th basis vector of `ℂ^{n_k}`.
    block_unitary: CMatrix,
    label: String,
    tol: f64,
}

/// Smallest unital `*`-algebra containing `generators`, computed as the double commutant.
pub fn generate_algebra(generators: &[CMatrix], ambient_dim: usize, tol: f64) -> Result<FiniteDimAlgebra> {
    FiniteDimAlgebra::generate(generators, ambient_dim, tol)
}

impl FiniteDimAlgebra {
    pub fn generate(generators: &[CMatrix], ambient_dim: usize, tol: f64) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.nrows() != ambient_dim || g.ncols() != ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "generator {i} is {}x{}, expected {ambient_dim}x{ambient_dim}",
                    g.nrows(),
                    g.ncols()
                )));
            }
        }
        let n = ambient_dim;
        let mut set: Vec<CMatrix> = Vec::with_capacity(2 * generators.len());
        for g in generators {
            set.push(g.clone());
            if (g - g.adjoint()).norm() > tol * g.norm().max(1.0) {
                set.push(g.adjoint());
            }
        }
        let first = commutant_columns(&set, n, tol);
        let first = linalg::from_columns(&first, n, n);
        let second = commutant_columns(&first, n, tol);
        Self::from_orthonormal(linalg::from_columns(&second, n, n), n, tol)
    }

    /// Builds an algebra from any spanning set. The span must be closed under
    /// products and adjoints and contain the identity.
    pub fn from_spanning_set(elements: &[CMatrix], ambient_dim: usize, tol: f64) -> Result<Self> {
        for e in elements {
            if e.nrows() != ambient_dim || e.ncols() != ambient_dim {
                return Err(Error::DimensionMismatch("element size differs from ambient dimension".into()));
            }
        }
        let basis = linalg::gram_schmidt(elements, tol);
        let q = to_columns(&basis, ambient_dim * ambient_dim);
        let check_tol = tol.sqrt();
        let outside = |x: &CMatrix| linalg::residual_from_span(&q, &linalg::vectorize(x)) > check_tol * x.norm().max(1.0);
        if outside(&identity(ambient_dim)) {
            return Err(Error::NotSubalgebra("span does not contain the identity".into()));
        }
        for a in &basis {
            if outside(&a.adjoint()) {
                return Err(Error::NotSubalgebra("span is not closed under adjoints".into()));
            }
            for b in &basis {
                if outside(&(a * b)) {
                    return Err(Error::NotSubalgebra("span is not closed under products".into()));
                }
            }
        }
        Self::from_orthonormal(basis, ambient_dim, tol)
    }

    pub(crate) fn from_orthonormal(basis: Vec<CMatrix>, ambient_dim: usize, tol: f64) -> Result<Self> {
        let structure = analyze(&basis, ambient_dim, tol)?;
        let label = structure
            .blocks
            .iter()
            .map(|b| format!("M{}", b.dim))
            .collect::<Vec<_>>()
            .join("+");
        Ok(Self {
            ambient_dim,
            basis,
            blocks: structure.blocks,
            central_projections: structure.projections,
            block_unitary: structure.unitary,
            label,
            tol,
        })
    }

    /// `⊕_k M_{n_k} ⊗ 1_{m_k}` in block-diagonal position.
    pub fn direct_sum(blocks: &[Block], tol: f64) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.dim * b.multiplicity).sum();
        let mut basis = Vec::new();
        let mut offset = 0;
        for b in blocks {
            let scale = 1.0 / (b.multiplicity as f64).sqrt();
            for i in 0..b.dim {
                for j in 0..b.dim {
                    let mut m = zeros(n, n);
                    for l in 0..b.multiplicity {
                        m[(offset + i * b.multiplicity + l, offset + j * b.multiplicity + l)] = c64(scale, 0.0);
                    }
                    basis.push(m);
                }
            }
            offset += b.dim * b.multiplicity;
        }
        Self::from_orthonormal(basis, n, tol)
    }

    pub fn full(n: usize, tol: f64) -> Result<Self> {
        Self::direct_sum(&[Block::new(n, 1)], tol)
    }

    pub fn scalars(n: usize, tol: f64) -> Result<Self> {
        Self::direct_sum(&[Block::new(1, n)], tol)
    }

    pub fn diagonal(n: usize, tol: f64) -> Result<Self> {
        Self::direct_sum(&vec![Block::new(1, 1); n], tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Blocks in canonical sector order.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_unitary(&self) -> &CMatrix {
        &self.block_unitary
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn sector_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_factor(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }

    pub fn signature(&self) -> AlgebraSignature {
        AlgebraSignature::new(self.label.clone(), self.blocks.iter().map(|b| b.dim).collect())
    }

    /// Basis as vectorized columns, an orthonormal `n² × dim` matrix.
    pub fn basis_columns(&self) -> CMatrix {
        to_columns(&self.basis, self.ambient_dim * self.ambient_dim)
    }

    /// Orthogonal projection (trace inner product) onto the algebra.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += b * linalg::hs_inner(b, x);
        }
        out
    }

    /// Frobenius distance from `x` to the algebra.
    pub fn distance(&self, x: &CMatrix) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &CMatrix) -> bool {
        self.distance(x) <= self.tol * x.norm().max(1.0)
    }

    /// Subspace distance between the spans of two algebras on the same space.
    pub fn span_distance(&self, other: &FiniteDimAlgebra) -> f64 {
        if self.ambient_dim != other.ambient_dim {
            return f64::INFINITY;
        }
        linalg::subspace_distance(&self.basis_columns(), &other.basis_columns())
    }

    pub fn commutant(&self) -> Result<FiniteDimAlgebra> {
        let n = self.ambient_dim;
        let cols = commutant_columns(&self.basis, n, self.tol);
        Self::from_orthonormal(linalg::from_columns(&cols, n, n), n, self.tol)
    }

    /// `A ∩ A′`.
    pub fn center(&self) -> Result<FiniteDimAlgebra> {
        let n = self.ambient_dim;
        let cols = center_columns(&self.basis, n, self.tol);
        Self::from_orthonormal(linalg::from_columns(&cols, n, n), n, self.tol)
    }

    /// Minimal central projections in canonical order; one per sector.
    pub fn minimal_central_projections(&self) -> Vec<Projection> {
        self.central_projections.iter().cloned().map(Projection::new_unchecked).collect()
    }

    pub fn central_projection(&self, k: usize) -> &CMatrix {
        &self.central_projections[k]
    }

    fn block_offset(&self, k: usize) -> usize {
        self.blocks[..k].iter().map(|b| b.dim * b.multiplicity).sum()
    }

    /// Isometry `ℂ^{n_k} → ℂ^n` onto the first multiplicity copy of block `k`.
    pub fn block_isometry(&self, k: usize) -> CMatrix {
        let b = self.blocks[k];
        let off = self.block_offset(k);
        let mut out = zeros(self.ambient_dim, b.dim);
        for i in 0..b.dim {
            out.set_column(i, &self.block_unitary.column(off + i * b.multiplicity));
        }
        out
    }

    /// Matrix units `e^{(k)}_{ij}` of block `k`, row-major in `(i, j)`.
    pub fn matrix_units(&self, k: usize) -> Vec<CMatrix> {
        let b = self.blocks[k];
        let off = self.block_offset(k);
        let u = &self.block_unitary;
        let mut out = Vec::with_capacity(b.dim * b.dim);
        for i in 0..b.dim {
            for j in 0..b.dim {
                let mut e = zeros(self.ambient_dim, self.ambient_dim);
                for l in 0..b.multiplicity {
                    let ci = u.column(off + i * b.multiplicity + l);
                    let cj = u.column(off + j * b.multiplicity + l);
                    e += ci * cj.adjoint();
                }
                out.push(e);
            }
        }
        out
    }

    /// All matrix units, block by block.
    pub fn all_matrix_units(&self) -> Vec<CMatrix> {
        (0..self.blocks.len()).flat_map(|k| self.matrix_units(k)).collect()
    }

    /// Coordinates of `x` in each block: `x ≅ ⊕_k x_k ⊗ 1_{m_k}` for `x` in the algebra.
    pub fn block_components(&self, x: &CMatrix) -> Vec<CMatrix> {
        (0..self.blocks.len())
            .map(|k| {
                let v = self.block_isometry(k);
                v.adjoint() * x * v
            })
            .collect()
    }

    /// Reassembles an element from per-block matrices.
    pub fn from_block_components(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        if parts.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} block components for {} blocks",
                parts.len(),
                self.blocks.len()
            )));
        }
        let mut out = zeros(self.ambient_dim, self.ambient_dim);
        for (k, (part, b)) in parts.iter().zip(&self.blocks).enumerate() {
            if part.nrows() != b.dim || part.ncols() != b.dim {
                return Err(Error::DimensionMismatch(format!("block {k} expects {0}x{0}", b.dim)));
            }
            let units = self.matrix_units(k);
            for i in 0..b.dim {
                for j in 0..b.dim {
                    out += &units[i * b.dim + j] * part[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// The defining (identity) representation as abstract representation data.
    pub fn identity_representation(&self) -> RepresentationData {
        RepresentationData::from_parts(
            self.signature(),
            self.blocks.iter().map(|b| b.multiplicity).collect(),
            self.all_matrix_units(),
            self.ambient_dim,
        )
    }

    /// Tensor product algebra on `ℂ^n ⊗ ℂ^m`.
    pub fn tensor(&self, other: &FiniteDimAlgebra) -> Result<FiniteDimAlgebra> {
        let mut basis = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.basis {
            for b in &other.basis {
                basis.push(linalg::kron(a, b));
            }
        }
        Self::from_orthonormal(basis, self.ambient_dim * other.ambient_dim, self.tol.max(other.tol))
    }

    /// Checks the structural invariants: closure, unit membership and block counts.
    pub fn structure_defect(&self) -> f64 {
        let q = self.basis_columns();
        let mut worst = linalg::residual_from_span(&q, &linalg::vectorize(&identity(self.ambient_dim)));
        for a in &self.basis {
            worst = worst.max(linalg::residual_from_span(&q, &linalg::vectorize(&a.adjoint())));
            for b in &self.basis {
                worst = worst.max(linalg::residual_from_span(&q, &linalg::vectorize(&(a * b))));
            }
        }
        worst
    }
}

impl fmt::Display for FiniteDimAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("({}, {})", b.dim, b.multiplicity))
            .collect();
        write!(f, "{} on C^{} [{}]", self.label, self.ambient_dim, parts.join(", "))
    }
}

fn commutant_columns(set: &[CMatrix], n: usize, tol: f64) -> CMatrix {
    let pairs: Vec<(CMatrix, CMatrix)> = set.iter().map(|b| (b.clone(), b.clone())).collect();
    intertwining_subspace(identity(n * n), n, n, &pairs, tol)
}

fn center_columns(basis: &[CMatrix], n: usize, tol: f64) -> CMatrix {
    let pairs: Vec<(CMatrix, CMatrix)> = basis.iter().map(|b| (b.clone(), b.clone())).collect();
    intertwining_subspace(to_columns(basis, n * n), n, n, &pairs, tol)
}

struct Structure {
    blocks: Vec<Block>,
    projections: Vec<CMatrix>,
    unitary: CMatrix,
}

const ATTEMPTS: u64 = 8;

fn cluster_gap(tol: f64) -> f64 {
    tol.sqrt()
}

/// Random element `Σ c_i B_i` with coefficients drawn from a fixed seed.
fn generic_element(basis: &[CMatrix], n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = zeros(n, n);
    for b in basis {
        let z = c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        out += b * z;
    }
    out
}

fn generic_hermitian(basis: &[CMatrix], n: usize, seed: u64) -> CMatrix {
    let g = generic_element(basis, n, seed);
    (&g + g.adjoint()).scale(0.5)
}

/// Spectral projections of a generic self-adjoint element of a commutative
/// `*`-algebra; these are its minimal projections.
pub(crate) fn minimal_projections_commutative(basis: &[CMatrix], n: usize, tol: f64) -> Result<Vec<CMatrix>> {
    let expected = basis.len();
    for attempt in 0..ATTEMPTS {
        let h = generic_hermitian(basis, n, 0x5ec7_0000 + attempt);
        let (values, vectors) = hermitian_eigen(&h);
        let clusters = cluster_sorted(&values, cluster_gap(tol));
        if clusters.len() != expected {
            continue;
        }
        return Ok(clusters
            .into_iter()
            .map(|r| {
                let v = vectors.columns(r.start, r.len());
                v * v.adjoint()
            })
            .collect());
    }
    Err(Error::Numerical(format!(
        "could not separate {expected} minimal projections at tolerance {tol:e}"
    )))
}

fn canonical_order(a: &(Block, CMatrix, CMatrix), b: &(Block, CMatrix, CMatrix)) -> Ordering {
    let key = |z: &CMatrix| -> Vec<i64> { (0..z.nrows()).map(|i| (z[(i, i)].re * 1e6).round() as i64).collect() };
    a.0.dim
        .cmp(&b.0.dim)
        .then_with(|| key(&b.1).cmp(&key(&a.1)))
}

fn analyze(basis: &[CMatrix], n: usize, tol: f64) -> Result<Structure> {
    if basis.is_empty() {
        return Err(Error::NotSubalgebra("empty basis".into()));
    }
    let center = center_columns(basis, n, tol);
    let center = linalg::from_columns(&center, n, n);
    let projections = minimal_projections_commutative(&center, n, tol)?;

    let mut parts = Vec::with_capacity(projections.len());
    for z in projections {
        let (block, columns) = block_of(basis, &z, tol)?;
        parts.push((block, z, columns));
    }
    parts.sort_by(canonical_order);

    let total: usize = parts.iter().map(|p| p.0.dim * p.0.multiplicity).sum();
    let dim_sum: usize = parts.iter().map(|p| p.0.dim * p.0.dim).sum();
    if total != n || dim_sum != basis.len() {
        return Err(Error::Numerical(format!(
            "block structure inconsistent: Σ m·n = {total} (ambient {n}), Σ n² = {dim_sum} (dim {})",
            basis.len()
        )));
    }
    let mut unitary = zeros(n, n);
    let mut col = 0;
    for p in &parts {
        unitary.view_mut((0, col), (n, p.2.ncols())).copy_from(&p.2);
        col += p.2.ncols();
    }
    let blocks = parts.iter().map(|p| p.0).collect();
    let projections = parts.into_iter().map(|p| p.1).collect();
    Ok(Structure { blocks, projections, unitary })
}

/// Block size, multiplicity and adapted orthonormal columns of one central summand.
fn block_of(basis: &[CMatrix], z: &CMatrix, tol: f64) -> Result<(Block, CMatrix)> {
    let v = range_basis(z, cluster_gap(tol));
    let r = v.ncols();
    let compressed: Vec<CMatrix> = basis.iter().map(|b| v.adjoint() * b * &v).collect();
    let span_dim = linalg::rank(&to_columns(&compressed, r * r), tol.sqrt());
    let dim = (span_dim as f64).sqrt().round() as usize;
    if dim == 0 || dim * dim != span_dim || !r.is_multiple_of(dim) {
        return Err(Error::Numerical(format!(
            "central summand of rank {r} spans {span_dim} dimensions; not a full matrix block"
        )));
    }
    let mult = r / dim;
    if dim == 1 {
        return Ok((Block::new(1, mult), v));
    }
    for attempt in 0..ATTEMPTS {
        let h = generic_hermitian(&compressed, r, 0xb10c_0000 + attempt);
        let (values, vectors) = hermitian_eigen(&h);
        let clusters = cluster_sorted(&values, cluster_gap(tol));
        if clusters.len() != dim || clusters.iter().any(|c| c.len() != mult) {
            continue;
        }
        let w: Vec<CMatrix> = clusters
            .iter()
            .map(|c| vectors.columns(c.start, c.len()).into_owned())
            .collect();
        let g = generic_element(&compressed, r, 0x0ff_d1a9 + attempt);
        let mut adapted = vec![w[0].clone()];
        let mut ok = true;
        for wj in &w[1..] {
            // x = e_1 g e_j is a multiple of the partial isometry e_{1j} ⊗ 1.
            let x = &w[0] * (w[0].adjoint() * &g * wj) * wj.adjoint();
            let c2 = (x.adjoint() * &x).trace().re / mult as f64;
            if c2 <= tol {
                ok = false;
                break;
            }
            adapted.push(x.adjoint() * &w[0] / c64(c2.sqrt(), 0.0));
        }
        if !ok {
            continue;
        }
        let mut cols = zeros(r, r);
        for (i, a) in adapted.iter().enumerate() {
            for l in 0..mult {
                cols.set_column(i * mult + l, &a.column(l));
            }
        }
        let global = &v * cols;
        if block_form_defect(basis, &global, dim, mult) <= tol.sqrt() {
            return Ok((Block::new(dim, mult), global));
        }
    }
    Err(Error::Numerical(format!("could not find matrix units for a {dim}x{dim} block")))
}

/// How far `U* B U` is from `X ⊗ 1_m` for the basis elements.
fn block_form_defect(basis: &[CMatrix], u: &CMatrix, dim: usize, mult: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for b in basis {
        let x = u.adjoint() * b * u;
        let mut core = zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                core[(i, j)] = x[(i * mult, j * mult)];
            }
        }
        let expected = linalg::kron(&core, &identity(mult));
        worst = worst.max((x - expected).norm());
    }
    worst
}

/// Intersection `N′ ∩ M` for a subset `N` of `M` (relative commutant).
pub fn relative_commutant(m: &FiniteDimAlgebra, n: &[CMatrix]) -> Result<FiniteDimAlgebra> {
    let d = m.ambient_dim();
    let pairs: Vec<(CMatrix, CMatrix)> = n.iter().map(|b| (b.clone(), b.clone())).collect();
    let cols = intertwining_subspace(m.basis_columns(), d, d, &pairs, m.tol());
    FiniteDimAlgebra::from_orthonormal(linalg::from_columns(&cols, d, d), d, m.tol())
}

/// The von Neumann algebra generated by two algebras on the same space.
pub fn join(a: &FiniteDimAlgebra, b: &FiniteDimAlgebra) -> Result<FiniteDimAlgebra> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch("join of algebras on different spaces".into()));
    }
    let mut gens = a.basis().to_vec();
    gens.extend_from_slice(b.basis());
    FiniteDimAlgebra::generate(&gens, a.ambient_dim(), a.tol().max(b.tol()))
}

/// Vector of `tr(z_k x)` over the minimal central projections.
pub(crate) fn central_traces(a: &FiniteDimAlgebra, x: &CMatrix) -> Vec<f64> {
    a.central_projections.iter().map(|z| (z * x).trace().re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, matrix_unit};
    use crate::testutil::{random_algebra, rng};

    const TOL: f64 = 1e-9;

    #[test]
    fn identity_generates_scalars() {
        let a = generate_algebra(&[identity(2)], 2, TOL).unwrap();
        assert_eq!(a.dim(), 1);
        assert_eq!(a.blocks(), &[Block::new(1, 2)]);
    }

    #[test]
    fn matrix_units_generate_full_algebra() {
        let gens: Vec<CMatrix> = (0..2).flat_map(|i| (0..2).map(move |j| matrix_unit(2, i, j))).collect();
        let a = generate_algebra(&gens, 2, TOL).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.blocks(), &[Block::new(2, 1)]);
    }

    #[test]
    fn degenerate_diagonal_generator() {
        let a = generate_algebra(&[diag(&[1.0, 2.0, 2.0])], 3, TOL).unwrap();
        assert_eq!(a.blocks(), &[Block::new(1, 1), Block::new(1, 2)]);
        let z = a.minimal_central_projections();
        assert!((z[0].matrix() - diag(&[1.0, 0.0, 0.0])).norm() < 1e-10);
        assert!((z[1].matrix() - diag(&[0.0, 1.0, 1.0])).norm() < 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = generate_algebra(&[identity(2), identity(3)], 2, TOL).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn commutant_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        assert_eq!(m2.commutant().unwrap().dim(), 1);
        let c = FiniteDimAlgebra::scalars(2, TOL).unwrap();
        assert_eq!(c.commutant().unwrap().dim(), 4);
        let d2 = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let d2c = d2.commutant().unwrap();
        assert!(d2c.span_distance(&d2) < TOL);
    }

    #[test]
    fn center_examples() {
        assert_eq!(FiniteDimAlgebra::full(3, TOL).unwrap().center().unwrap().dim(), 1);
        let a = FiniteDimAlgebra::direct_sum(&[Block::new(2, 1), Block::new(3, 1)], TOL).unwrap();
        let z = a.center().unwrap();
        assert_eq!(z.dim(), 2);
        assert!(z.contains(&diag(&[1.0, 1.0, 0.0, 0.0, 0.0])));
        let d3 = FiniteDimAlgebra::diagonal(3, TOL).unwrap();
        assert!(d3.center().unwrap().span_distance(&d3) < TOL);
    }

    #[test]
    fn minimal_central_projection_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let z = m2.minimal_central_projections();
        assert_eq!(z.len(), 1);
        assert!((z[0].matrix() - identity(2)).norm() < 1e-10);

        let a = FiniteDimAlgebra::direct_sum(&[Block::new(2, 1), Block::new(3, 1)], TOL).unwrap();
        let z = a.minimal_central_projections();
        assert!((z[0].matrix() - diag(&[1.0, 1.0, 0.0, 0.0, 0.0])).norm() < 1e-10);
        assert!((z[1].matrix() - diag(&[0.0, 0.0, 1.0, 1.0, 1.0])).norm() < 1e-10);
    }

    #[test]
    fn block_unitary_brings_basis_to_block_form() {
        let mut r = rng(3);
        for _ in 0..10 {
            let a = random_algebra(&mut r, 6);
            let u = a.block_unitary();
            assert!(linalg::unitarity_defect(u) < 1e-9);
            let mut off = 0;
            for b in a.blocks() {
                let size = b.dim * b.multiplicity;
                let cols = u.columns(off, size).into_owned();
                assert!(block_form_defect(a.basis(), &cols, b.dim, b.multiplicity) < 1e-8);
                off += size;
            }
        }
    }

    #[test]
    fn matrix_units_multiply_correctly() {
        let a = FiniteDimAlgebra::direct_sum(&[Block::new(2, 2), Block::new(1, 1)], TOL).unwrap();
        // Canonical order puts the 1x1 block first.
        assert_eq!(a.blocks(), &[Block::new(1, 1), Block::new(2, 2)]);
        let e = a.matrix_units(1);
        // e_01 e_10 = e_00
        assert!((&e[1] * &e[2] - &e[0]).norm() < 1e-12);
        assert!((&e[1] * &e[1]).norm() < 1e-12);
        let parts = vec![identity(1), CMatrix::from_fn(2, 2, |i, j| c64(i as f64, j as f64))];
        let x = a.from_block_components(&parts).unwrap();
        let back = a.block_components(&x);
        assert!((&back[1] - &parts[1]).norm() < 1e-12);
    }

    #[test]
    fn spanning_set_validation() {
        let err = FiniteDimAlgebra::from_spanning_set(&[identity(2), matrix_unit(2, 0, 1)], 2, TOL).unwrap_err();
        assert!(matches!(err, Error::NotSubalgebra(_)));
        let ok = FiniteDimAlgebra::from_spanning_set(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], 2, TOL).unwrap();
        assert_eq!(ok.sector_count(), 2);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn bicommutant_and_commutant_structure(seed in proptest::prelude::any::<u64>()) {
            let mut r = rng(seed);
            let a = random_algebra(&mut r, 6);
            let c = a.commutant().unwrap();
            let cc = c.commutant().unwrap();
            proptest::prop_assert!(cc.span_distance(&a) < 1e-9);
            let mut swapped: Vec<(usize, usize)> = a.blocks().iter().map(|b| (b.multiplicity, b.dim)).collect();
            let mut found: Vec<(usize, usize)> = c.blocks().iter().map(|b| (b.dim, b.multiplicity)).collect();
            swapped.sort();
            found.sort();
            proptest::prop_assert_eq!(swapped, found);
        }

        #[test]
        fn central_projections_partition_unity(seed in proptest::prelude::any::<u64>()) {
            let mut r = rng(seed);
            let a = random_algebra(&mut r, 6);
            let n = a.ambient_dim();
            let mut sum = zeros(n, n);
            for (k, p) in a.minimal_central_projections().iter().enumerate() {
                let p = p.matrix();
                proptest::prop_assert!((p * p - p).norm() < 1e-9);
                proptest::prop_assert!(a.contains(p));
                proptest::prop_assert_eq!(p.trace().re.round() as usize, a.blocks()[k].dim * a.blocks()[k].multiplicity);
                sum += p;
            }
            proptest::prop_assert!((sum - identity(n)).norm() < 1e-9);
            proptest::prop_assert!(a.structure_defect() < 1e-9);
        }
    }
}
