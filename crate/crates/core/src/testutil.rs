use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Block, FiniteDimAlgebra};
use crate::linalg::{c64, CMatrix, CVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

pub fn random_vector(r: &mut impl Rng, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    let norm = v.norm();
    v.unscale(norm)
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> CMatrix {
    random_matrix(r, n, n).qr().q()
}

/// Full-rank density matrix.
pub fn random_density(r: &mut impl Rng, n: usize) -> CMatrix {
    let g = random_matrix(r, n, n);
    let p = &g * g.adjoint() + CMatrix::identity(n, n).scale(0.05);
    let t = p.trace();
    p / t
}

pub fn random_positive(r: &mut impl Rng, n: usize) -> CMatrix {
    let g = random_matrix(r, n, n);
    &g * g.adjoint()
}

/// Random block structure with at most four blocks, conjugated by a random unitary.
pub fn random_algebra(r: &mut impl Rng, max_dim: usize) -> FiniteDimAlgebra {
    let blocks = random_blocks(r, max_dim);
    let a = FiniteDimAlgebra::direct_sum(&blocks, 1e-9).unwrap();
    let u = random_unitary(r, a.ambient_dim());
    let basis: Vec<CMatrix> = a.basis().iter().map(|b| &u * b * u.adjoint()).collect();
    FiniteDimAlgebra::from_orthonormal(basis, a.ambient_dim(), 1e-9).unwrap()
}

pub fn random_blocks(r: &mut impl Rng, max_dim: usize) -> Vec<Block> {
    loop {
        let count = r.random_range(1..=4);
        let blocks: Vec<Block> = (0..count)
            .map(|_| Block::new(r.random_range(1..=3), r.random_range(1..=2)))
            .collect();
        let total: usize = blocks.iter().map(|b| b.dim * b.multiplicity).sum();
        if total <= max_dim {
            return blocks;
        }
    }
}
