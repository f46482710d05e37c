//! Dense complex matrix helpers shared by every module.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Operator spaces are
//! handled through column-major vectorization, so the trace inner product
//! `⟨X, Y⟩ = tr(X* Y)` coincides with the standard inner product of `vec(X)`
//! and `vec(Y)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default tolerance for rank decisions and subspace comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Real diagonal matrix.
pub fn diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        entries.len(),
        entries.iter().map(|&x| c64(x, 0.0)),
    ))
}

/// The matrix unit `|i⟩⟨j|` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n, n);
    m[(i, j)] = c64(1.0, 0.0);
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Column-major vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Trace inner product `tr(a* b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.dotc(b)
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).norm() <= tol * m.norm().max(1.0)
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    (u.adjoint() * u - identity(n)).norm().max((u * u.adjoint() - identity(n)).norm())
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitarity_defect(u) <= tol
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    // Symmetrize first so round-off never leaks into the solver.
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let d = CVector::from_iterator(values.len(), values.iter().map(|&x| f(x)));
    &vectors * CMatrix::from_diagonal(&d) * vectors.adjoint()
}

/// Groups ascending eigenvalues into clusters whose consecutive gaps are at most `gap`.
pub fn cluster_sorted(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Orthonormal basis (as columns) of the null space of `m`.
///
/// A singular value counts as zero when it is at most `tol · max(1, σ_max)`.
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(cols);
    }
    // Pad to at least square so the SVD returns a complete right basis.
    let padded;
    let work = if m.nrows() < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let svd = work.clone().svd(false, true);
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let thresh = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= thresh).collect();
    let mut out = zeros(cols, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &v.column(src));
    }
    out
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let thresh = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > thresh).collect();
    let mut out = zeros(rows, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

pub fn rank(m: &CMatrix, tol: f64) -> usize {
    range_basis(m, tol).ncols()
}

/// Modified Gram-Schmidt under the trace inner product; drops vectors whose
/// residual norm falls below `tol`.
pub fn gram_schmidt(mats: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::new();
    for m in mats {
        let mut r = m.clone();
        // Two passes keep the basis orthonormal to machine precision.
        for _ in 0..2 {
            for b in &basis {
                let coeff = hs_inner(b, &r);
                r -= b * coeff;
            }
        }
        let norm = r.norm();
        if norm > tol * m.norm().max(1.0) {
            basis.push(r.unscale(norm));
        }
    }
    basis
}

/// Stacks vectorized matrices as columns.
pub fn to_columns(mats: &[CMatrix], rows: usize) -> CMatrix {
    let mut out = zeros(rows, mats.len());
    for (j, m) in mats.iter().enumerate() {
        out.set_column(j, &vectorize(m));
    }
    out
}

pub fn from_columns(cols: &CMatrix, rows: usize, ncols: usize) -> Vec<CMatrix> {
    (0..cols.ncols())
        .map(|j| CMatrix::from_column_slice(rows, ncols, cols.column(j).as_slice()))
        .collect()
}

/// Distance between the spans of two orthonormal column sets.
///
/// Returns the largest Frobenius residual of projecting either basis onto the
/// other span; unequal dimensions give at least 1.
pub fn subspace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0_f64.max((a.ncols() as f64 - b.ncols() as f64).abs());
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let ab = a.adjoint() * b;
    let r1 = (b - a * &ab).norm();
    let r2 = (a - b * ab.adjoint()).norm();
    r1.max(r2)
}

/// Residual of `x` after orthogonal projection onto the span of the orthonormal columns `q`.
pub fn residual_from_span(q: &CMatrix, x: &CVector) -> f64 {
    if q.ncols() == 0 {
        return x.norm();
    }
    (x - q * (q.adjoint() * x)).norm()
}

/// Orthonormal basis of the operators `X` in the span of `start` (vectorized
/// columns of `rows × cols` matrices) satisfying `X L = R X` for every pair
/// `(L, R)`. `L` is `cols × cols`, `R` is `rows × rows`.
///
/// Commutants, relative commutants and intertwiner spaces are all instances.
pub fn intertwining_subspace(
    start: CMatrix,
    rows: usize,
    cols: usize,
    pairs: &[(CMatrix, CMatrix)],
    tol: f64,
) -> CMatrix {
    let mut basis = start;
    for (l, r) in pairs {
        if basis.ncols() == 0 {
            break;
        }
        let scale = l.norm().max(r.norm());
        if scale == 0.0 {
            continue;
        }
        let (l, r) = (l.unscale(scale), r.unscale(scale));
        let mut image = zeros(rows * cols, basis.ncols());
        for j in 0..basis.ncols() {
            let x = CMatrix::from_column_slice(rows, cols, basis.column(j).as_slice());
            let defect = &x * &l - &r * &x;
            image.set_column(j, &vectorize(&defect));
        }
        if image.norm() <= tol {
            continue;
        }
        let kernel = null_space(&image, tol);
        basis = &basis * kernel;
    }
    basis
}

/// Operator embedding on a tensor product: `op` acts on the factors listed in
/// `legs` (in that order) of `⊗ ℂ^{dims[i]}`, identity elsewhere.
pub fn embed_on_legs(op: &CMatrix, dims: &[usize], legs: &[usize]) -> Result<CMatrix> {
    let sub: usize = legs.iter().map(|&l| dims[l]).product();
    if op.nrows() != sub || op.ncols() != sub {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, legs {:?} span dimension {}",
            op.nrows(),
            op.ncols(),
            legs,
            sub
        )));
    }
    let total: usize = dims.iter().product();
    let strides: Vec<usize> = (0..dims.len())
        .map(|i| dims[i + 1..].iter().product())
        .collect();
    let digits = |idx: usize| -> Vec<usize> {
        (0..dims.len()).map(|i| (idx / strides[i]) % dims[i]).collect()
    };
    let leg_index = |d: &[usize]| -> usize { legs.iter().fold(0, |acc, &l| acc * dims[l] + d[l]) };
    let mut out = zeros(total, total);
    for col in 0..total {
        let dc = digits(col);
        let sub_col = leg_index(&dc);
        for sub_row in 0..sub {
            let v = op[(sub_row, sub_col)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut dr = dc.clone();
            let mut rem = sub_row;
            for &l in legs.iter().rev() {
                dr[l] = rem % dims[l];
                rem /= dims[l];
            }
            let row = dr.iter().zip(&strides).map(|(d, s)| d * s).sum::<usize>();
            out[(row, col)] += v;
        }
    }
    Ok(out)
}

/// Permutation matrix sending basis vector `j` to `perm[j]`.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut out = zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        out[(i, j)] = c64(1.0, 0.0);
    }
    out
}

/// Range vectors of a projection. Columns of `p` with the largest weight are
/// used first, so coordinate projections give standard basis vectors.
pub fn projection_frame(p: &CMatrix, tol: f64) -> CMatrix {
    let rank = p.trace().re.round() as usize;
    let mut order: Vec<usize> = (0..p.ncols()).collect();
    order.sort_by(|&a, &b| p[(b, b)].re.total_cmp(&p[(a, a)].re).then(a.cmp(&b)));
    let mut chosen: Vec<CVector> = Vec::with_capacity(rank);
    for j in order {
        if chosen.len() == rank {
            break;
        }
        let mut v = p.column(j).into_owned();
        for c in &chosen {
            let overlap = c.dotc(&v);
            v -= c * overlap;
        }
        let norm = v.norm();
        if norm > tol.sqrt() {
            chosen.push(v.unscale(norm));
        }
    }
    CMatrix::from_columns(&chosen)
}
