//! Representations of an abstract finite-dimensional C*-algebra `⊕_k M_{n_k}`.
//!
//! A representation is recorded by the images of the matrix units
//! `e^{(k)}_{ij}` (block, then row, then column). Any representation is
//! unitarily equivalent to `⊕_k ℂ^{n_k} ⊗ ℂ^{m_k}` and is classified by its
//! multiplicity vector `(m_k)`.

use std::collections::BTreeSet;

use crate::linalg::{self, c64, identity, intertwining_subspace, kron, zeros, CMatrix};
use crate::{Error, Result};

/// Identifies the abstract algebra a representation belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraSignature {
    pub label: String,
    pub block_dims: Vec<usize>,
}

impl AlgebraSignature {
    pub fn new(label: impl Into<String>, block_dims: Vec<usize>) -> Self {
        Self { label: label.into(), block_dims }
    }

    pub fn block_count(&self) -> usize {
        self.block_dims.len()
    }

    /// Number of matrix units `Σ n_k²`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    fn unit_offset(&self, k: usize) -> usize {
        self.block_dims[..k].iter().map(|n| n * n).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RepresentationData {
    signature: AlgebraSignature,
    multiplicities: Vec<usize>,
    images: Vec<CMatrix>,
    dim: usize,
}

impl RepresentationData {
    pub(crate) fn from_parts(
        signature: AlgebraSignature,
        multiplicities: Vec<usize>,
        images: Vec<CMatrix>,
        dim: usize,
    ) -> Self {
        Self { signature, multiplicities, images, dim }
    }

    /// The canonical representation `⊕_k M_{n_k} ⊗ 1_{m_k}` with the given multiplicities.
    pub fn canonical(signature: AlgebraSignature, multiplicities: Vec<usize>) -> Result<Self> {
        if multiplicities.len() != signature.block_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} multiplicities for {} blocks",
                multiplicities.len(),
                signature.block_count()
            )));
        }
        let dim: usize = signature.block_dims.iter().zip(&multiplicities).map(|(n, m)| n * m).sum();
        let mut images = Vec::with_capacity(signature.dim());
        let mut offset = 0;
        for (&n, &m) in signature.block_dims.iter().zip(&multiplicities) {
            for i in 0..n {
                for j in 0..n {
                    let unit = kron(&linalg::matrix_unit(n, i, j), &identity(m));
                    let mut e = zeros(dim, dim);
                    e.view_mut((offset, offset), (n * m, n * m)).copy_from(&unit);
                    images.push(e);
                }
            }
            offset += n * m;
        }
        Ok(Self { signature, multiplicities, images, dim })
    }

    /// Reduced universal representation: one copy of every block.
    pub fn reduced_universal(signature: AlgebraSignature) -> Self {
        let ones = vec![1; signature.block_count()];
        Self::canonical(signature, ones).expect("multiplicity vector matches block count")
    }

    /// Builds a representation from concrete images of the matrix units and
    /// validates `π(e_ij)π(e_kl) = δ_jk π(e_il)` and `π(e_ij)* = π(e_ji)`.
    pub fn from_images(signature: AlgebraSignature, images: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if images.len() != signature.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} matrix units",
                images.len(),
                signature.dim()
            )));
        }
        let dim = images.first().map_or(0, |m| m.nrows());
        if images.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::DimensionMismatch("images differ in size".into()));
        }
        let mut multiplicities = Vec::with_capacity(signature.block_count());
        let mut unit_sum = zeros(dim, dim);
        for (k, &n) in signature.block_dims.iter().enumerate() {
            let off = signature.unit_offset(k);
            let e = |i: usize, j: usize| &images[off + i * n + j];
            for i in 0..n {
                for j in 0..n {
                    if (e(i, j).adjoint() - e(j, i)).norm() > tol {
                        return Err(Error::InvalidInput(format!("image of e({i},{j}) in block {k} is not *-compatible")));
                    }
                    for l in 0..n {
                        let prod = e(i, j) * e(j, l);
                        if (prod - e(i, l)).norm() > tol {
                            return Err(Error::InvalidInput(format!("images in block {k} are not multiplicative")));
                        }
                    }
                }
            }
            // Products across different blocks vanish.
            for other in 0..k {
                let oo = signature.unit_offset(other);
                if (&images[oo] * e(0, 0)).norm() > tol {
                    return Err(Error::InvalidInput(format!("blocks {other} and {k} are not orthogonal")));
                }
            }
            let m = e(0, 0).trace().re;
            if (m - m.round()).abs() > tol.sqrt() || m < -tol {
                return Err(Error::InvalidInput(format!("block {k} has non-integral multiplicity {m}")));
            }
            multiplicities.push(m.round() as usize);
            for i in 0..n {
                unit_sum += e(i, i);
            }
        }
        if (unit_sum - identity(dim)).norm() > tol.sqrt() {
            return Err(Error::InvalidInput("representation is not unital".into()));
        }
        Ok(Self { signature, multiplicities, images, dim })
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.signature
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    /// `π(e^{(k)}_{ij})`.
    pub fn unit_image(&self, k: usize, i: usize, j: usize) -> &CMatrix {
        let n = self.signature.block_dims[k];
        &self.images[self.signature.unit_offset(k) + i * n + j]
    }

    /// `π(1_k)`, the image of the block identity.
    pub fn block_identity(&self, k: usize) -> CMatrix {
        let n = self.signature.block_dims[k];
        let mut out = zeros(self.dim, self.dim);
        for i in 0..n {
            out += self.unit_image(k, i, i);
        }
        out
    }

    /// Blocks with non-zero multiplicity.
    pub fn support(&self) -> BTreeSet<usize> {
        self.multiplicities
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(k, _)| k)
            .collect()
    }

    /// Image of the abstract element with block components `parts`.
    pub fn represent(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        if parts.len() != self.signature.block_count() {
            return Err(Error::DimensionMismatch("wrong number of block components".into()));
        }
        let mut out = zeros(self.dim, self.dim);
        for (k, part) in parts.iter().enumerate() {
            let n = self.signature.block_dims[k];
            if part.nrows() != n || part.ncols() != n {
                return Err(Error::DimensionMismatch(format!("block {k} expects {n}x{n}")));
            }
            for i in 0..n {
                for j in 0..n {
                    if part[(i, j)] != c64(0.0, 0.0) {
                        out += self.unit_image(k, i, j) * part[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Conjugates every image by a unitary, giving an equivalent representation.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::DimensionMismatch("conjugating unitary has wrong size".into()));
        }
        let images = self.images.iter().map(|e| u * e * u.adjoint()).collect();
        Ok(Self { images, ..self.clone() })
    }

    /// Direct sum `π₁ ⊕ π₂`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        check_same_algebra(self, other)?;
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| linalg::direct_sum(&[a.clone(), b.clone()]))
            .collect();
        let multiplicities = self.multiplicities.iter().zip(&other.multiplicities).map(|(a, b)| a + b).collect();
        Ok(Self {
            signature: self.signature.clone(),
            multiplicities,
            images,
            dim: self.dim + other.dim,
        })
    }
}

pub(crate) fn check_same_algebra(a: &RepresentationData, b: &RepresentationData) -> Result<()> {
    if a.signature != b.signature {
        return Err(Error::AlgebraMismatch(a.signature.label.clone(), b.signature.label.clone()));
    }
    Ok(())
}

/// Basis of `{T : T π₁(a) = π₂(a) T}`; empty exactly when the representations are disjoint.
pub fn intertwiner_space(pi1: &RepresentationData, pi2: &RepresentationData, tol: f64) -> Result<Vec<CMatrix>> {
    check_same_algebra(pi1, pi2)?;
    let (d1, d2) = (pi1.dim, pi2.dim);
    if d1 == 0 || d2 == 0 {
        return Ok(Vec::new());
    }
    let pairs: Vec<(CMatrix, CMatrix)> = pi1.images.iter().cloned().zip(pi2.images.iter().cloned()).collect();
    let cols = intertwining_subspace(identity(d1 * d2), d2, d1, &pairs, tol);
    Ok(linalg::from_columns(&cols, d2, d1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_unitary, rng};

    const TOL: f64 = 1e-9;

    fn sig(dims: &[usize]) -> AlgebraSignature {
        AlgebraSignature::new("A", dims.to_vec())
    }

    #[test]
    fn schur_for_irreducible() {
        let pi = RepresentationData::canonical(sig(&[2]), vec![1]).unwrap();
        assert_eq!(intertwiner_space(&pi, &pi, TOL).unwrap().len(), 1);
    }

    #[test]
    fn distinct_characters_are_disjoint() {
        let chi1 = RepresentationData::canonical(sig(&[1, 1]), vec![1, 0]).unwrap();
        let chi2 = RepresentationData::canonical(sig(&[1, 1]), vec![0, 1]).unwrap();
        assert!(intertwiner_space(&chi1, &chi2, TOL).unwrap().is_empty());
    }

    #[test]
    fn multiplicity_counts_hom_dimension() {
        let one = RepresentationData::canonical(sig(&[2]), vec![1]).unwrap();
        let two = RepresentationData::canonical(sig(&[2]), vec![2]).unwrap();
        assert_eq!(intertwiner_space(&one, &two, TOL).unwrap().len(), 2);
    }

    #[test]
    fn rotated_images_are_validated() {
        let mut r = rng(11);
        let pi = RepresentationData::canonical(sig(&[2, 1]), vec![2, 1]).unwrap();
        let u = random_unitary(&mut r, pi.dim());
        let rotated = pi.conjugated(&u).unwrap();
        let rebuilt = RepresentationData::from_images(sig(&[2, 1]), rotated.images().to_vec(), 1e-9).unwrap();
        assert_eq!(rebuilt.multiplicities(), &[2, 1]);
        assert_eq!(intertwiner_space(&pi, &rebuilt, TOL).unwrap().len(), 5);
    }

    #[test]
    fn non_multiplicative_images_rejected() {
        let mut images = RepresentationData::canonical(sig(&[2]), vec![1]).unwrap().images().to_vec();
        images[1] = images[1].scale(2.0);
        assert!(RepresentationData::from_images(sig(&[2]), images, TOL).is_err());
    }

    #[test]
    fn mismatched_algebras_error() {
        let a = RepresentationData::canonical(sig(&[2]), vec![1]).unwrap();
        let b = RepresentationData::canonical(AlgebraSignature::new("B", vec![2]), vec![1]).unwrap();
        assert!(matches!(intertwiner_space(&a, &b, TOL), Err(Error::AlgebraMismatch(_, _))));
    }
}
