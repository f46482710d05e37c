//! Finite abelian groups, characters and the multiplicative unitary.
//!
//! Elements of `ℤ_{n₁} × … × ℤ_{n_r}` are addressed by a flat index in
//! mixed radix (last factor fastest), so the group law is exact integer
//! arithmetic. The multiplicative unitary `V|s,t⟩ = |s, s+t⟩` is stored as an
//! index permutation and only materialized as a dense matrix on request.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{relative_commutant, FiniteDimAlgebra};
use crate::linalg::{self, c64, embed_on_legs, permutation_matrix, zeros, CMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
}

impl FiniteAbelianGroup {
    pub fn new(cyclic_orders: Vec<usize>) -> Result<Self> {
        if cyclic_orders.contains(&0) {
            return Err(Error::InvalidInput("cyclic orders must be positive".into()));
        }
        Ok(Self { orders: cyclic_orders })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn trivial() -> Self {
        Self { orders: Vec::new() }
    }

    pub fn cyclic_orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn order(&self) -> usize {
        self.orders.iter().product()
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Mixed-radix digits of an element.
    pub fn digits(&self, g: usize) -> Vec<usize> {
        let mut out = vec![0; self.orders.len()];
        let mut rem = g;
        for (i, &n) in self.orders.iter().enumerate().rev() {
            out[i] = rem % n;
            rem /= n;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.orders).fold(0, |acc, (&d, &n)| acc * n + d % n)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| x + y).collect();
        self.index(&sum)
    }

    pub fn neg(&self, a: usize) -> usize {
        let d: Vec<usize> = self.digits(a).iter().zip(&self.orders).map(|(&x, &n)| (n - x) % n).collect();
        self.index(&d)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Character with exponent tuple equal to the digits of `k`.
    pub fn character(&self, k: usize) -> Character {
        Character { exponents: self.digits(k) }
    }

    pub fn characters(&self) -> Vec<Character> {
        (0..self.order()).map(|k| self.character(k)).collect()
    }
}

/// Dual group. For a finite abelian group it has the same cyclic orders.
pub fn dual_group(g: &FiniteAbelianGroup) -> FiniteAbelianGroup {
    g.clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Character {
    pub exponents: Vec<usize>,
}

/// `χ(g) = exp(2πi Σ_j k_j g_j / n_j)`.
pub fn pairing(group: &FiniteAbelianGroup, chi: &Character, g: usize) -> Complex64 {
    let digits = group.digits(g);
    let phase: f64 = chi
        .exponents
        .iter()
        .zip(&digits)
        .zip(group.cyclic_orders())
        .map(|((&k, &x), &n)| ((k * x) % n) as f64 / n as f64)
        .sum();
    Complex64::from_polar(1.0, 2.0 * PI * phase)
}

/// Left translation `λ_g|t⟩ = |g+t⟩` on `ℂ[G]`.
pub fn translation(group: &FiniteAbelianGroup, g: usize) -> CMatrix {
    let perm: Vec<usize> = (0..group.order()).map(|t| group.add(g, t)).collect();
    permutation_matrix(&perm)
}

/// Fourier matrix with rows `F_{χ,t} = conj χ(t) / √|G|`; it maps `λ_g` to `diag(conj χ(g))`.
pub fn fourier_matrix(group: &FiniteAbelianGroup) -> CMatrix {
    let n = group.order();
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |k, t| pairing(group, &group.character(k), t).conj() * scale)
}

/// `(ω₁ ∗ ω₂)(g) = Σ_{a+b=g} ω₁(a) ω₂(b)`.
pub fn convolution(group: &FiniteAbelianGroup, w1: &[Complex64], w2: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = group.order();
    if w1.len() != n || w2.len() != n {
        return Err(Error::DimensionMismatch(format!("functionals must have {n} weights")));
    }
    let mut out = vec![c64(0.0, 0.0); n];
    for a in 0..n {
        for b in 0..n {
            out[group.add(a, b)] += w1[a] * w2[b];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MultiplicativeUnitary {
    group: FiniteAbelianGroup,
    /// Basis index `s·|G| + t` is sent to `perm[s·|G| + t]`.
    perm: Vec<usize>,
}

pub fn multiplicative_unitary(group: &FiniteAbelianGroup) -> MultiplicativeUnitary {
    let n = group.order();
    let perm = (0..n * n).map(|idx| {
        let (s, t) = (idx / n, idx % n);
        s * n + group.add(s, t)
    });
    MultiplicativeUnitary { group: group.clone(), perm: perm.collect() }
}

impl MultiplicativeUnitary {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn to_matrix(&self) -> CMatrix {
        permutation_matrix(&self.perm)
    }

    /// Pentagonal residual computed on basis indices. Both sides are
    /// permutations, so the Frobenius residual is `√(2·#mismatches)`.
    pub fn pentagonal_residual(&self) -> f64 {
        let n = self.group.order();
        let g = &self.group;
        let v12 = |(s, t, u): (usize, usize, usize)| (s, g.add(s, t), u);
        let v13 = |(s, t, u): (usize, usize, usize)| (s, t, g.add(s, u));
        let v23 = |(s, t, u): (usize, usize, usize)| (s, t, g.add(t, u));
        let mut mismatches = 0usize;
        for s in 0..n {
            for t in 0..n {
                for u in 0..n {
                    let lhs = v12(v13(v23((s, t, u))));
                    let rhs = v23(v12((s, t, u)));
                    if lhs != rhs {
                        mismatches += 1;
                    }
                }
            }
        }
        (2.0 * mismatches as f64).sqrt()
    }
}

fn square_root_dim(size: usize) -> Result<usize> {
    let d = (size as f64).sqrt().round() as usize;
    if d * d != size {
        return Err(Error::DimensionMismatch(format!("size {size} is not a perfect square")));
    }
    Ok(d)
}

/// `‖V₁₂V₁₃V₂₃ − V₂₃V₁₂‖` (Frobenius) for a dense operator on `ℂ^d ⊗ ℂ^d`.
pub fn check_pentagonal(v: &CMatrix) -> Result<f64> {
    if !v.is_square() {
        return Err(Error::DimensionMismatch("operator must be square".into()));
    }
    let d = square_root_dim(v.nrows())?;
    let dims = [d, d, d];
    let v12 = embed_on_legs(v, &dims, &[0, 1])?;
    let v13 = embed_on_legs(v, &dims, &[0, 2])?;
    let v23 = embed_on_legs(v, &dims, &[1, 2])?;
    Ok((&v12 * &v13 * &v23 - &v23 * &v12).norm())
}

/// `λ(ω)`: the slice of `V` by `ω` on the first leg, `Σ_s ω(s) λ_s`.
pub fn lambda_of(v: &MultiplicativeUnitary, omega: &[Complex64]) -> Result<CMatrix> {
    let n = v.group.order();
    if omega.len() != n {
        return Err(Error::DimensionMismatch(format!("functional must have {n} weights")));
    }
    let mut out = zeros(n, n);
    for (col, &row) in v.perm.iter().enumerate() {
        let (s, b) = (col / n, col % n);
        let (s2, a) = (row / n, row % n);
        if s == s2 {
            out[(a, b)] += omega[s];
        }
    }
    Ok(out)
}

/// Point mass `δ_g` as a weight vector.
pub fn delta(group: &FiniteAbelianGroup, g: usize) -> Vec<Complex64> {
    let mut w = vec![c64(0.0, 0.0); group.order()];
    w[g] = c64(1.0, 0.0);
    w
}

/// A verified maximal abelian subalgebra `N` of a factor `M`, with its
/// one-to-one labeling of spectral projections by `ℤ_n`.
#[derive(Debug, Clone)]
pub struct MasaData {
    factor: FiniteDimAlgebra,
    masa: FiniteDimAlgebra,
    projections: Vec<CMatrix>,
    eigenbasis: CMatrix,
    group: FiniteAbelianGroup,
}

impl MasaData {
    pub fn factor(&self) -> &FiniteDimAlgebra {
        &self.factor
    }

    pub fn masa(&self) -> &FiniteDimAlgebra {
        &self.masa
    }

    /// `E(γ)` for `γ = 0, …, n−1`.
    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    /// Unitary whose columns are grouped by label: the `l`-th vector of label
    /// `γ` is column `γ·m + l`, `m` being the rank of each `E(γ)`.
    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eigenbasis
    }

    /// Eigenvector `ξ_γ` (first copy when `E(γ)` has rank above one).
    pub fn eigenvector(&self, gamma: usize) -> linalg::CVector {
        let m = self.eigenbasis.ncols() / self.projections.len();
        self.eigenbasis.column(gamma * m).into_owned()
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn outcome_count(&self) -> usize {
        self.projections.len()
    }

    pub fn dim(&self) -> usize {
        self.factor.ambient_dim()
    }
}

pub fn verify_masa(m: &FiniteDimAlgebra, n: &FiniteDimAlgebra) -> Result<MasaData> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(Error::DimensionMismatch("algebras act on different spaces".into()));
    }
    if !m.is_factor() {
        return Err(Error::InvalidInput("the ambient algebra must be a factor".into()));
    }
    let tol = m.tol().max(n.tol());
    for b in n.basis() {
        let d = m.distance(b);
        if d > tol.sqrt() {
            return Err(Error::NotSubalgebra(format!("element at distance {d:e} from the factor")));
        }
    }
    if !n.is_commutative() {
        return Err(Error::NotCommutative);
    }
    let rel = relative_commutant(m, n.basis())?;
    if rel.dim() != n.dim() {
        return Err(Error::NotMaximal { expected: n.dim(), found: rel.dim() });
    }
    let projections: Vec<CMatrix> = n.minimal_central_projections().into_iter().map(|p| p.into_matrix()).collect();
    let columns: Vec<CMatrix> = projections.iter().map(|p| linalg::projection_frame(p, tol)).collect();
    let total: usize = columns.iter().map(|c| c.ncols()).sum();
    let mut eigenbasis = zeros(m.ambient_dim(), total);
    let mut j = 0;
    for c in &columns {
        for col in c.column_iter() {
            eigenbasis.set_column(j, &col);
            j += 1;
        }
    }
    let group = FiniteAbelianGroup::cyclic(projections.len())?;
    Ok(MasaData { factor: m.clone(), masa: n.clone(), projections, eigenbasis, group })
}

#[derive(Debug, Clone)]
pub struct ConditionalSectorReport {
    pub sector_count: usize,
    pub center_dim: usize,
    /// Subspace distance between the center of `M ⊗ N` and `1 ⊗ N`.
    pub center_residual: f64,
}

/// Sector structure of `M ⊗ N` for a MASA `N` of a factor `M`: its center is `1 ⊗ N`.
pub fn conditional_sector_structure(m: &FiniteDimAlgebra, n: &FiniteDimAlgebra) -> Result<ConditionalSectorReport> {
    verify_masa(m, n)?;
    let product = m.tensor(n)?;
    let center = product.center()?;
    let one_n = FiniteDimAlgebra::scalars(m.ambient_dim(), m.tol())?.tensor(n)?;
    Ok(ConditionalSectorReport {
        sector_count: product.sector_count(),
        center_dim: center.dim(),
        center_residual: center.span_distance(&one_n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::generate_algebra;
    use crate::linalg::{diag, identity, matrix_unit};
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    fn z(n: usize) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let z2 = z(2);
        assert!((pairing(&z2, &z2.character(1), 1) - c64(-1.0, 0.0)).norm() < 1e-15);
        let z3 = z(3);
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((pairing(&z3, &z3.character(1), 1) - w).norm() < 1e-15);
        let k = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let chi = Character { exponents: vec![1, 0] };
        assert!((pairing(&k, &chi, k.index(&[0, 1])) - c64(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(dual_group(&k).order(), 4);
    }

    #[test]
    fn z2_unitary_swaps_second_half() {
        let v = multiplicative_unitary(&z(2));
        assert_eq!(v.permutation(), &[0, 1, 3, 2]);
        let trivial = multiplicative_unitary(&FiniteAbelianGroup::trivial());
        assert_eq!(trivial.to_matrix(), identity(1));
    }

    #[test]
    fn z3_unitary_has_two_three_cycles() {
        let v = multiplicative_unitary(&z(3));
        let p = v.permutation();
        assert_eq!(&p[..3], &[0, 1, 2]);
        assert_eq!(&p[3..6], &[4, 5, 3]);
        assert_eq!(&p[6..], &[8, 6, 7]);
    }

    #[test]
    fn pentagonal_examples() {
        for n in [2, 4] {
            let v = multiplicative_unitary(&z(n));
            assert_eq!(v.pentagonal_residual(), 0.0);
            assert_eq!(check_pentagonal(&v.to_matrix()).unwrap(), 0.0);
        }
        let swap = permutation_matrix(&[0, 2, 1, 3]);
        assert!(check_pentagonal(&swap).unwrap() > 0.5);
        assert!(check_pentagonal(&identity(3)).is_err());
    }

    #[test]
    fn lambda_examples() {
        let g = z(2);
        let v = multiplicative_unitary(&g);
        assert_eq!(lambda_of(&v, &delta(&g, 0)).unwrap(), identity(2));
        assert_eq!(lambda_of(&v, &delta(&g, 1)).unwrap(), permutation_matrix(&[1, 0]));
        let g = z(5);
        let v = multiplicative_unitary(&g);
        let conv = convolution(&g, &delta(&g, 3), &delta(&g, 4)).unwrap();
        assert_eq!(conv, delta(&g, 2));
        let lhs = lambda_of(&v, &conv).unwrap();
        let rhs = lambda_of(&v, &delta(&g, 3)).unwrap() * lambda_of(&v, &delta(&g, 4)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn intertwiner_property() {
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        let v = multiplicative_unitary(&g).to_matrix();
        let n = g.order();
        for x in 0..n {
            let l = translation(&g, x);
            let lhs = &v * linalg::kron(&l, &identity(n));
            let rhs = linalg::kron(&l, &l) * &v;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn fourier_diagonalizes_translations() {
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        let f = fourier_matrix(&g);
        assert!(linalg::is_unitary(&f, 1e-12));
        for x in 0..g.order() {
            let d = &f * translation(&g, x) * f.adjoint();
            for k in 0..g.order() {
                for l in 0..g.order() {
                    let expected = if k == l { pairing(&g, &g.character(k), x).conj() } else { c64(0.0, 0.0) };
                    assert!((d[(k, l)] - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn masa_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let d2 = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let masa = verify_masa(&m2, &d2).unwrap();
        assert!((&masa.projections()[0] - diag(&[1.0, 0.0])).norm() < 1e-12);
        assert!((&masa.projections()[1] - diag(&[0.0, 1.0])).norm() < 1e-12);
        assert!((masa.eigenbasis() - identity(2)).norm() < 1e-12);

        let m3 = FiniteDimAlgebra::full(3, TOL).unwrap();
        let n = generate_algebra(&[diag(&[1.0, 1.0, 2.0])], 3, TOL).unwrap();
        assert!(matches!(verify_masa(&m3, &n), Err(Error::NotMaximal { expected: 2, found: 5 })));
        assert!(matches!(verify_masa(&m2, &m2), Err(Error::NotCommutative)));

        let d2_sum = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let off = generate_algebra(&[matrix_unit(2, 0, 1) + matrix_unit(2, 1, 0)], 2, TOL).unwrap();
        assert!(matches!(verify_masa(&d2_sum, &off), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn conditional_sectors() {
        for n in [2, 3] {
            let m = FiniteDimAlgebra::full(n, TOL).unwrap();
            let d = FiniteDimAlgebra::diagonal(n, TOL).unwrap();
            let r = conditional_sector_structure(&m, &d).unwrap();
            assert_eq!(r.sector_count, n);
            assert_eq!(r.center_dim, n);
            assert!(r.center_residual < 1e-9);
        }
        let c = FiniteDimAlgebra::full(1, TOL).unwrap();
        assert_eq!(conditional_sector_structure(&c, &c).unwrap().sector_count, 1);
    }

    fn small_group() -> impl Strategy<Value = FiniteAbelianGroup> {
        prop::collection::vec(1usize..5, 0..3)
            .prop_filter("order at most 12", |o| o.iter().product::<usize>() <= 12)
            .prop_map(|o| FiniteAbelianGroup::new(o).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pentagonal_holds_exactly(g in small_group()) {
            prop_assert_eq!(multiplicative_unitary(&g).pentagonal_residual(), 0.0);
        }

        #[test]
        fn unitary_is_permutation(g in small_group()) {
            let v = multiplicative_unitary(&g).to_matrix();
            let n = v.nrows();
            prop_assert_eq!(v.adjoint() * &v, identity(n));
        }

        #[test]
        fn characters_are_multiplicative(g in small_group(), k in 0usize..12, a in 0usize..12, b in 0usize..12) {
            let n = g.order();
            let (k, a, b) = (k % n, a % n, b % n);
            let chi = g.character(k);
            let lhs = pairing(&g, &chi, g.add(a, b));
            let rhs = pairing(&g, &chi, a) * pairing(&g, &chi, b);
            prop_assert!((lhs - rhs).norm() < 1e-12);
            prop_assert!((lhs.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn group_inverse(g in small_group(), a in 0usize..12) {
            let a = a % g.order();
            prop_assert_eq!(g.add(a, g.neg(a)), g.identity());
        }

        #[test]
        fn masa_acceptance_matches_spectral_degeneracy(values in prop::collection::vec(0u8..3, 1..5)) {
            let n = values.len();
            let h = diag(&values.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let sub = generate_algebra(&[h], n, TOL).unwrap();
            let full = FiniteDimAlgebra::full(n, TOL).unwrap();
            let brute = relative_commutant(&full, sub.basis()).unwrap().dim();
            let mut distinct = values.clone();
            distinct.sort();
            distinct.dedup();
            let accepted = verify_masa(&full, &sub).is_ok();
            prop_assert_eq!(accepted, distinct.len() == n);
            prop_assert_eq!(accepted, brute == sub.dim());
        }
    }
}
