//! Group actions on algebras and the sector-level symmetry-breaking criterion.
//!
//! A symmetry is unbroken in a representation when the induced permutation of
//! its sectors fixes every sector the representation contains. Broken
//! symmetries split the supported sectors into orbits (ergodic components);
//! on the augmented algebra the action becomes unitarily implemented at the
//! price of a larger center.

use std::collections::BTreeSet;

use crate::algebra::FiniteDimAlgebra;
use crate::group::{pairing, FiniteAbelianGroup};
use crate::linalg::{self, kron, range_basis, zeros, CMatrix};
use crate::representation::RepresentationData;
use crate::states::{gns, State};
use crate::{Error, Result};

/// Finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidInput("multiplication table must be square with entries below its order".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidInput("multiplication table has no identity".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for (g, row) in table.iter().enumerate() {
            let inv = (0..n)
                .find(|&h| row[h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidInput(format!("element {g} has no inverse")))?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidInput(format!("product is not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(Self { table, identity, inverses })
    }

    pub fn from_abelian(g: &FiniteAbelianGroup) -> Self {
        let n = g.order();
        let table = (0..n).map(|a| (0..n).map(|b| g.add(a, b)).collect()).collect();
        let inverses = (0..n).map(|a| g.neg(a)).collect();
        Self { table, identity: g.identity(), inverses }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Left regular representation `L_g|h⟩ = |gh⟩`.
    pub fn left_regular(&self, g: usize) -> CMatrix {
        linalg::permutation_matrix(&self.table[g])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Automorphism {
    /// `x ↦ u x u*`.
    Unitary(CMatrix),
    /// A linear map acting on column-major vectorized matrices.
    Superoperator(CMatrix),
}

impl Automorphism {
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        match self {
            Self::Unitary(u) => u * x * u.adjoint(),
            Self::Superoperator(s) => linalg::unvectorize(&(s * linalg::vectorize(x)), x.nrows(), x.ncols()),
        }
    }

    fn acts_on(&self) -> usize {
        match self {
            Self::Unitary(u) => u.nrows(),
            Self::Superoperator(s) => (s.nrows() as f64).sqrt().round() as usize,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroupAction {
    group: FiniteGroup,
    maps: Vec<Automorphism>,
}

impl GroupAction {
    /// Validates that every map preserves the algebra and the adjoint, that
    /// the identity acts trivially and that `α_g ∘ α_h = α_{gh}` on a basis.
    pub fn new(group: FiniteGroup, maps: Vec<Automorphism>, algebra: &FiniteDimAlgebra) -> Result<Self> {
        if maps.len() != group.order() {
            return Err(Error::InvalidAction(format!("{} maps for a group of order {}", maps.len(), group.order())));
        }
        let d = algebra.ambient_dim();
        let tol = algebra.tol().sqrt();
        for (g, map) in maps.iter().enumerate() {
            match map {
                Automorphism::Unitary(u) if u.nrows() != d || u.ncols() != d => {
                    return Err(Error::DimensionMismatch(format!("unitary {g} is not {d}x{d}")));
                }
                Automorphism::Unitary(u) if !linalg::is_unitary(u, tol) => {
                    return Err(Error::NotUnitary(format!("implementer of element {g}")));
                }
                Automorphism::Superoperator(s) if s.nrows() != d * d || s.ncols() != d * d => {
                    return Err(Error::DimensionMismatch(format!("superoperator {g} is not {0}x{0}", d * d)));
                }
                _ => {}
            }
            debug_assert_eq!(map.acts_on(), d);
        }
        let action = Self { group, maps };
        for b in algebra.basis() {
            let scale = b.norm().max(1.0);
            if (action.apply(action.group.identity(), b) - b).norm() > tol * scale {
                return Err(Error::InvalidAction("identity does not act trivially".into()));
            }
            for g in 0..action.group.order() {
                let image = action.apply(g, b);
                let distance = algebra.distance(&image);
                if distance > tol * scale {
                    return Err(Error::InvalidAction(format!("element {g} moves the algebra (distance {distance:e})")));
                }
                if (action.apply(g, &b.adjoint()) - image.adjoint()).norm() > tol * scale {
                    return Err(Error::InvalidAction(format!("element {g} does not commute with the adjoint")));
                }
                for h in 0..action.group.order() {
                    let composed = action.apply(g, &action.apply(h, b));
                    let direct = action.apply(action.group.product(g, h), b);
                    if (composed - direct).norm() > tol * scale {
                        return Err(Error::InvalidAction(format!("maps of {g} and {h} do not compose")));
                    }
                }
            }
        }
        Ok(action)
    }

    /// Inner action `α_g = Ad u_g`.
    pub fn inner(group: FiniteGroup, unitaries: Vec<CMatrix>, algebra: &FiniteDimAlgebra) -> Result<Self> {
        Self::new(group, unitaries.into_iter().map(Automorphism::Unitary).collect(), algebra)
    }

    pub fn trivial(group: FiniteGroup, dim: usize) -> Self {
        let maps = vec![Automorphism::Unitary(linalg::identity(dim)); group.order()];
        Self { group, maps }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn automorphism(&self, g: usize) -> &Automorphism {
        &self.maps[g]
    }

    pub fn apply(&self, g: usize, x: &CMatrix) -> CMatrix {
        self.maps[g].apply(x)
    }
}

/// Matrix of the averaging map `x ↦ |G|⁻¹ Σ_g α_g(x)` in the algebra's orthonormal basis.
pub fn averaging_matrix(f: &FiniteDimAlgebra, act: &GroupAction) -> CMatrix {
    let basis = f.basis();
    let order = act.group().order() as f64;
    let mut out = zeros(basis.len(), basis.len());
    for (j, b) in basis.iter().enumerate() {
        let mut avg = zeros(f.ambient_dim(), f.ambient_dim());
        for g in 0..act.group().order() {
            avg += act.apply(g, b);
        }
        let avg = avg.unscale(order);
        for (i, c) in basis.iter().enumerate() {
            out[(i, j)] = linalg::hs_inner(c, &avg);
        }
    }
    out
}

/// `F^G`, the range of the averaging map.
pub fn fixed_point_algebra(f: &FiniteDimAlgebra, act: &GroupAction) -> Result<FiniteDimAlgebra> {
    let coefficients = range_basis(&averaging_matrix(f, act), f.tol());
    let elements: Vec<CMatrix> = coefficients
        .column_iter()
        .map(|c| {
            let mut x = zeros(f.ambient_dim(), f.ambient_dim());
            for (b, &z) in f.basis().iter().zip(c.iter()) {
                x += b * z;
            }
            x
        })
        .collect();
    FiniteDimAlgebra::from_spanning_set(&elements, f.ambient_dim(), f.tol())
}

/// `perm[g][k] = j` when `α_g(z_k) = z_j`.
pub fn sector_permutations(f: &FiniteDimAlgebra, act: &GroupAction) -> Result<Vec<Vec<usize>>> {
    let k = f.sector_count();
    let tol = f.tol().sqrt();
    let mut out = Vec::with_capacity(act.group().order());
    for g in 0..act.group().order() {
        let mut perm = Vec::with_capacity(k);
        for s in 0..k {
            let image = act.apply(g, f.central_projection(s));
            let target = (0..k)
                .find(|&j| (&image - f.central_projection(j)).norm() <= tol)
                .ok_or_else(|| Error::InvalidAction(format!("element {g} does not map sector {s} onto a sector")))?;
            perm.push(target);
        }
        let distinct: BTreeSet<usize> = perm.iter().copied().collect();
        if distinct.len() != k {
            return Err(Error::InvalidAction(format!("element {g} does not permute the sectors")));
        }
        out.push(perm);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unbroken,
    Broken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErgodicComponent {
    pub sectors: Vec<usize>,
}

impl ErgodicComponent {
    pub fn verdict(&self) -> Verdict {
        if self.sectors.len() > 1 {
            Verdict::Broken
        } else {
            Verdict::Unbroken
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakingReport {
    /// Induced permutation of all sectors of `F`, per group element.
    pub sector_permutations: Vec<Vec<usize>>,
    /// Sectors present in the representation.
    pub supported: Vec<usize>,
    pub verdict: Verdict,
    /// Orbits of the supported sectors.
    pub ergodic_components: Vec<ErgodicComponent>,
    /// Elements fixing every supported sector.
    pub stabilizer: Vec<usize>,
}

fn orbits(perms: &[Vec<usize>], sectors: &[usize]) -> Vec<ErgodicComponent> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in sectors {
        if seen.contains(&s) {
            continue;
        }
        let orbit: BTreeSet<usize> = perms.iter().map(|p| p[s]).chain([s]).collect();
        seen.extend(orbit.iter().copied());
        out.push(ErgodicComponent { sectors: orbit.into_iter().collect() });
    }
    out
}

/// Breaking analysis in a representation of `F`: only sectors with non-zero
/// multiplicity count.
pub fn breaking_analysis(f: &FiniteDimAlgebra, act: &GroupAction, rep: &RepresentationData) -> Result<BreakingReport> {
    let dims: Vec<usize> = f.blocks().iter().map(|b| b.dim).collect();
    if rep.signature().block_dims != dims {
        return Err(Error::AlgebraMismatch(f.label().to_string(), rep.signature().label.clone()));
    }
    let perms = sector_permutations(f, act)?;
    let supported: Vec<usize> = rep.support().into_iter().collect();
    for (g, perm) in perms.iter().enumerate() {
        for &s in &supported {
            if !rep.support().contains(&perm[s]) {
                return Err(Error::InvalidAction(format!(
                    "element {g} maps sector {s} to sector {} outside the representation",
                    perm[s]
                )));
            }
        }
    }
    let stabilizer = (0..perms.len()).filter(|&g| supported.iter().all(|&s| perms[g][s] == s)).collect();
    let ergodic_components = orbits(&perms, &supported);
    let verdict = if ergodic_components.iter().all(|c| c.verdict() == Verdict::Unbroken) {
        Verdict::Unbroken
    } else {
        Verdict::Broken
    };
    Ok(BreakingReport { sector_permutations: perms, supported, verdict, ergodic_components, stabilizer })
}

/// Breaking analysis in the GNS representation of a state; sectors of zero weight are ignored.
pub fn breaking_analysis_for_state(f: &FiniteDimAlgebra, act: &GroupAction, omega: &State) -> Result<BreakingReport> {
    let g = gns(f, omega)?;
    breaking_analysis(f, act, g.representation())
}

/// `M ⋊_α G` on `H ⊗ ℂ[G]`, generated by `Σ_h α_{h⁻¹}(x) ⊗ |h⟩⟨h|` and `1 ⊗ λ_g`.
pub fn crossed_product(m: &FiniteDimAlgebra, act: &GroupAction) -> Result<FiniteDimAlgebra> {
    let group = act.group();
    if !group.is_abelian() {
        return Err(Error::NonAbelian);
    }
    let n = group.order();
    let d = m.ambient_dim();
    let mut generators: Vec<CMatrix> = (0..n).map(|g| kron(&linalg::identity(d), &group.left_regular(g))).collect();
    for b in m.basis() {
        let mut image = zeros(d * n, d * n);
        for h in 0..n {
            image += kron(&act.apply(group.inverse(h), b), &linalg::matrix_unit(n, h, h));
        }
        generators.push(image);
    }
    FiniteDimAlgebra::generate(&generators, d * n, m.tol())
}

#[derive(Debug, Clone)]
pub struct DhrReport {
    pub observables: FiniteDimAlgebra,
    /// Subspace distance between `π(A)″` and `U(G)′`.
    pub commutant_residual: f64,
    /// Subspace distance between `U(G)″` and `π(A)′`.
    pub bicommutant_residual: f64,
    pub center_dim: usize,
    /// Characters `γ` with non-zero spectral projection `P_γ` in `U`.
    pub characters_present: Vec<usize>,
    /// Character whose spectral projection equals the sector's central projection.
    pub sector_labels: Vec<Option<usize>>,
}

impl DhrReport {
    pub fn labels_bijective(&self) -> bool {
        let labels: BTreeSet<usize> = self.sector_labels.iter().flatten().copied().collect();
        self.sector_labels.iter().all(Option::is_some)
            && labels.len() == self.sector_labels.len()
            && labels.into_iter().eq(self.characters_present.iter().copied())
    }
}

/// `P_γ = |G|⁻¹ Σ_g conj γ(g) U_g`.
pub fn character_projections(group: &FiniteAbelianGroup, u: &[CMatrix]) -> Vec<CMatrix> {
    let n = group.order();
    (0..n)
        .map(|k| {
            let chi = group.character(k);
            let mut p = zeros(u[0].nrows(), u[0].ncols());
            for (g, ug) in u.iter().enumerate() {
                p += ug * pairing(group, &chi, g).conj();
            }
            p.unscale(n as f64)
        })
        .collect()
}

/// Observable algebra `A = F^G` for a unitary representation `U` of `G`, with
/// the duality `π(A)″ = U(G)′` and the labeling of sectors by characters.
pub fn dhr_toy(f: &FiniteDimAlgebra, group: &FiniteAbelianGroup, u: &[CMatrix]) -> Result<DhrReport> {
    let n = group.order();
    let d = f.ambient_dim();
    let tol = f.tol().sqrt();
    if u.len() != n {
        return Err(Error::InvalidAction(format!("{} unitaries for a group of order {n}", u.len())));
    }
    for (g, ug) in u.iter().enumerate() {
        if ug.nrows() != d || ug.ncols() != d {
            return Err(Error::DimensionMismatch(format!("unitary {g} is not {d}x{d}")));
        }
        if !linalg::is_unitary(ug, tol) {
            return Err(Error::NotUnitary(format!("U({g})")));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if (&u[a] * &u[b] - &u[group.add(a, b)]).norm() > tol {
                return Err(Error::InvalidAction(format!("U({a})U({b}) differs from U({a}+{b})")));
            }
        }
    }
    let act = GroupAction::inner(FiniteGroup::from_abelian(group), u.to_vec(), f)?;
    let observables = fixed_point_algebra(f, &act)?;
    let implemented = FiniteDimAlgebra::generate(u, d, f.tol())?;
    let commutant_residual = observables.span_distance(&implemented.commutant()?);
    let bicommutant_residual = implemented.span_distance(&observables.commutant()?);
    let center_dim = observables.center()?.dim();

    let projections = character_projections(group, u);
    let characters_present = (0..n).filter(|&k| projections[k].norm() > tol).collect();
    let sector_labels = (0..observables.sector_count())
        .map(|s| {
            let z = observables.central_projection(s);
            (0..n).find(|&k| (z - &projections[k]).norm() <= tol)
        })
        .collect();
    Ok(DhrReport { observables, commutant_residual, bicommutant_residual, center_dim, characters_present, sector_labels })
}

#[derive(Debug, Clone)]
pub struct AugmentedAlgebra {
    pub algebra: FiniteDimAlgebra,
    /// Sectors of `F` making up the base representation.
    pub base_sectors: Vec<usize>,
    pub quotient_order: usize,
    /// `W_g` implementing `α_g` on the augmented representation, per group element.
    pub implementers: Vec<CMatrix>,
    /// Largest of: unitarity defect of `W_g`, `‖W_g π̂(x) W_g* − π̂(α_g(x))‖`,
    /// and the distance of `W_g y W_g*` from the augmented algebra.
    pub implementation_residual: f64,
    pub center_dim: usize,
}

fn validate_subgroup(group: &FiniteGroup, h: &[usize]) -> Result<BTreeSet<usize>> {
    let set: BTreeSet<usize> = h.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&x| x >= group.order()) {
        return Err(Error::InvalidSubgroup(format!("{bad} is not a group element")));
    }
    if !set.contains(&group.identity()) {
        return Err(Error::InvalidSubgroup("missing the identity".into()));
    }
    for &a in &set {
        for &b in &set {
            if !set.contains(&group.product(a, b)) {
                return Err(Error::InvalidSubgroup(format!("not closed: {a}·{b}")));
            }
        }
    }
    Ok(set)
}

/// Augmented algebra for the quotient `G/H`. With `base` unset the base
/// representation takes one sector from each `G`-orbit.
///
/// With `π_S` the restriction to the base sectors and `r(q)` the smallest
/// element of the coset `q`, the augmented representation is
/// `π̂(x) = Σ_q π_S(α_{r(q)}⁻¹(x)) ⊗ |q⟩⟨q|` on `H_S ⊗ ℂ[G/H]`, the algebra is
/// generated by `π̂(F)` and `1 ⊗ ℓ∞(G/H)`, and
/// `W_g = Σ_q u_{r(q)+g−r(q+[g])} ⊗ |q+[g]⟩⟨q|` with `u_h` the compression of
/// the implementer of `h ∈ H` to `H_S`.
pub fn augmented_algebra(
    f: &FiniteDimAlgebra,
    act: &GroupAction,
    h: &[usize],
    base: Option<&[usize]>,
) -> Result<AugmentedAlgebra> {
    let group = act.group();
    if !group.is_abelian() {
        return Err(Error::NonAbelian);
    }
    let subgroup = validate_subgroup(group, h)?;
    let perms = sector_permutations(f, act)?;
    let base_sectors: Vec<usize> = match base {
        Some(b) => {
            let set: BTreeSet<usize> = b.iter().copied().collect();
            if set.iter().any(|&s| s >= f.sector_count()) {
                return Err(Error::InvalidInput("base sector out of range".into()));
            }
            set.into_iter().collect()
        }
        None => {
            let all: Vec<usize> = (0..f.sector_count()).collect();
            orbits(&perms, &all).iter().map(|c| c.sectors[0]).collect()
        }
    };
    for &x in &subgroup {
        if let Some(&s) = base_sectors.iter().find(|&&s| perms[x][s] != s) {
            return Err(Error::InvalidSubgroup(format!("element {x} moves sector {s}")));
        }
    }

    // Cosets of H, each represented by its smallest element.
    let n = group.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for g in 0..n {
        if coset_of[g] != usize::MAX {
            continue;
        }
        for &x in &subgroup {
            coset_of[group.product(g, x)] = reps.len();
        }
        reps.push(g);
    }
    let q = reps.len();

    let d = f.ambient_dim();
    let mut p_s = zeros(d, d);
    for &s in &base_sectors {
        p_s += f.central_projection(s);
    }
    let frame = linalg::projection_frame(&p_s, f.tol());
    let ds = frame.ncols();
    let compress = |x: &CMatrix| frame.adjoint() * x * &frame;

    let mut implementer_of = vec![None; n];
    for &x in &subgroup {
        let u = match act.automorphism(x) {
            Automorphism::Unitary(u) => compress(u),
            Automorphism::Superoperator(_) if x == group.identity() => linalg::identity(ds),
            Automorphism::Superoperator(_) => {
                return Err(Error::InvalidAction(format!("element {x} of H needs a unitary implementer")));
            }
        };
        if !linalg::is_unitary(&u, f.tol().sqrt()) {
            return Err(Error::NotUnitary(format!("compressed implementer of {x}")));
        }
        implementer_of[x] = Some(u);
    }

    let hat = |x: &CMatrix| -> CMatrix {
        let mut out = zeros(ds * q, ds * q);
        for (c, &r) in reps.iter().enumerate() {
            out += kron(&compress(&act.apply(group.inverse(r), x)), &linalg::matrix_unit(q, c, c));
        }
        out
    };
    let mut generators: Vec<CMatrix> = f.basis().iter().map(hat).collect();
    for c in 0..q {
        generators.push(kron(&linalg::identity(ds), &linalg::matrix_unit(q, c, c)));
    }
    let algebra = FiniteDimAlgebra::generate(&generators, ds * q, f.tol())?;

    let mut implementers = Vec::with_capacity(n);
    let mut implementation_residual: f64 = 0.0;
    for g in 0..n {
        let mut w = zeros(ds * q, ds * q);
        for (c, &r) in reps.iter().enumerate() {
            let target = coset_of[group.product(r, g)];
            let hq = group.product(group.product(r, g), group.inverse(reps[target]));
            let u = implementer_of[hq].as_ref().expect("coset offsets lie in H");
            w += kron(u, &linalg::matrix_unit(q, target, c));
        }
        implementation_residual = implementation_residual.max(linalg::unitarity_defect(&w));
        for b in f.basis() {
            let lhs = &w * hat(b) * w.adjoint();
            implementation_residual = implementation_residual.max((lhs - hat(&act.apply(g, b))).norm());
        }
        for y in algebra.basis() {
            implementation_residual = implementation_residual.max(algebra.distance(&(&w * y * w.adjoint())));
        }
        implementers.push(w);
    }
    let center_dim = algebra.center()?.dim();
    Ok(AugmentedAlgebra { algebra, base_sectors, quotient_order: q, implementers, implementation_residual, center_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Block;
    use crate::linalg::{diag, identity, permutation_matrix};
    use crate::testutil::{random_matrix, rng};
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    fn z(n: usize) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    fn z2() -> FiniteGroup {
        FiniteGroup::from_abelian(&z(2))
    }

    fn sigma_z_action(a: &FiniteDimAlgebra) -> GroupAction {
        GroupAction::inner(z2(), vec![identity(2), diag(&[1.0, -1.0])], a).unwrap()
    }

    fn swap_model() -> (FiniteDimAlgebra, GroupAction) {
        let f = FiniteDimAlgebra::direct_sum(&[Block::new(2, 1), Block::new(2, 1)], TOL).unwrap();
        let swap = permutation_matrix(&[2, 3, 0, 1]);
        let act = GroupAction::inner(z2(), vec![identity(4), swap], &f).unwrap();
        (f, act)
    }

    #[test]
    fn group_table_validation() {
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 0]]).is_ok());
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]]).is_err());
        // S₃ as permutations of three points.
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let compose = |a: &[usize; 3], b: &[usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| perms.iter().position(|p| *p == compose(a, b)).unwrap()).collect())
            .collect();
        let s3 = FiniteGroup::from_table(table).unwrap();
        assert!(!s3.is_abelian());
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let act = GroupAction::trivial(s3, 2);
        assert!(matches!(crossed_product(&m2, &act), Err(Error::NonAbelian)));
    }

    #[test]
    fn action_validation() {
        let d2 = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let h = (identity(2) + permutation_matrix(&[1, 0])).unscale(2f64.sqrt());
        assert!(matches!(
            GroupAction::inner(z2(), vec![identity(2), h], &d2),
            Err(Error::InvalidAction(_)) | Err(Error::NotUnitary(_))
        ));
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let z3 = FiniteGroup::from_abelian(&z(3));
        let bad = vec![identity(2), diag(&[1.0, -1.0]), diag(&[1.0, -1.0])];
        assert!(matches!(GroupAction::inner(z3, bad, &m2), Err(Error::InvalidAction(_))));
    }

    #[test]
    fn fixed_point_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let trivial = GroupAction::trivial(z2(), 2);
        assert_eq!(fixed_point_algebra(&m2, &trivial).unwrap().dim(), 4);

        let a = fixed_point_algebra(&m2, &sigma_z_action(&m2)).unwrap();
        assert!(a.span_distance(&FiniteDimAlgebra::diagonal(2, TOL).unwrap()) < 1e-9);

        let (f, act) = swap_model();
        let a = fixed_point_algebra(&f, &act).unwrap();
        assert_eq!(a.blocks(), &[Block::new(2, 2)]);
        assert_eq!(f.dim(), 2 * a.dim());
    }

    #[test]
    fn superoperator_action_matches_unitary() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let u = diag(&[1.0, -1.0]);
        let s = kron(&linalg::conj(&u), &u);
        let act = GroupAction::new(z2(), vec![Automorphism::Superoperator(identity(4)), Automorphism::Superoperator(s)], &m2).unwrap();
        let a = fixed_point_algebra(&m2, &act).unwrap();
        assert!(a.span_distance(&FiniteDimAlgebra::diagonal(2, TOL).unwrap()) < 1e-9);
    }

    #[test]
    fn breaking_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let r = breaking_analysis(&m2, &sigma_z_action(&m2), &m2.identity_representation()).unwrap();
        assert_eq!(r.verdict, Verdict::Unbroken);

        let (f, act) = swap_model();
        let r = breaking_analysis(&f, &act, &f.identity_representation()).unwrap();
        assert_eq!(r.verdict, Verdict::Broken);
        assert_eq!(r.ergodic_components, vec![ErgodicComponent { sectors: vec![0, 1] }]);
        assert_eq!(r.stabilizer, vec![0]);

        let f = FiniteDimAlgebra::direct_sum(&[Block::new(2, 1), Block::new(2, 1), Block::new(3, 1)], TOL).unwrap();
        let swap = permutation_matrix(&[2, 3, 0, 1, 4, 5, 6]);
        let act = GroupAction::inner(z2(), vec![identity(7), swap], &f).unwrap();
        let r = breaking_analysis(&f, &act, &f.identity_representation()).unwrap();
        assert_eq!(r.verdict, Verdict::Broken);
        let comps: Vec<(Vec<usize>, Verdict)> = r.ergodic_components.iter().map(|c| (c.sectors.clone(), c.verdict())).collect();
        assert_eq!(comps, vec![(vec![0, 1], Verdict::Broken), (vec![2], Verdict::Unbroken)]);
    }

    #[test]
    fn breaking_depends_on_representation() {
        let (f, act) = swap_model();
        let one_sector = RepresentationData::canonical(f.signature(), vec![1, 0]).unwrap();
        assert!(matches!(breaking_analysis(&f, &act, &one_sector), Err(Error::InvalidAction(_))));
        // A state supported on both sectors sees the breaking.
        let omega = State::new(identity(4).unscale(4.0), TOL).unwrap();
        assert_eq!(breaking_analysis_for_state(&f, &act, &omega).unwrap().verdict, Verdict::Broken);
    }

    #[test]
    fn crossed_product_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let c = crossed_product(&m2, &GroupAction::trivial(z2(), 2)).unwrap();
        assert_eq!(c.blocks(), &[Block::new(2, 1), Block::new(2, 1)]);

        let d2 = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let shift = GroupAction::inner(z2(), vec![identity(2), permutation_matrix(&[1, 0])], &d2).unwrap();
        let c = crossed_product(&d2, &shift).unwrap();
        assert_eq!(c.blocks(), &[Block::new(2, 2)]);

        let c = crossed_product(&m2, &sigma_z_action(&m2)).unwrap();
        assert_eq!(c.blocks(), &[Block::new(2, 1), Block::new(2, 1)]);
    }

    #[test]
    fn dhr_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let r = dhr_toy(&m2, &z(2), &[identity(2), diag(&[1.0, -1.0])]).unwrap();
        assert!(r.observables.span_distance(&FiniteDimAlgebra::diagonal(2, TOL).unwrap()) < 1e-9);
        assert!(r.commutant_residual < 1e-9 && r.bicommutant_residual < 1e-9);
        assert_eq!(r.center_dim, 2);
        assert!(r.labels_bijective());

        let w = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let u1 = CMatrix::from_diagonal(&linalg::CVector::from_vec(vec![w.powu(0), w, w * w]));
        let u: Vec<CMatrix> = (0..3).map(|k| u1.pow(k as u32)).collect();
        let m3 = FiniteDimAlgebra::full(3, TOL).unwrap();
        let r = dhr_toy(&m3, &z(3), &u).unwrap();
        assert_eq!(r.center_dim, 3);
        assert_eq!(r.characters_present, vec![0, 1, 2]);
        assert!(r.labels_bijective());

        let r = dhr_toy(&m2, &FiniteAbelianGroup::trivial(), &[identity(2)]).unwrap();
        assert_eq!(r.observables.dim(), 4);
        assert_eq!(r.observables.sector_count(), 1);

        assert!(matches!(
            dhr_toy(&m2, &z(2), &[identity(2), diag(&[1.0, -1.0]).scale(2.0)]),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn augmented_examples() {
        let m2 = FiniteDimAlgebra::full(2, TOL).unwrap();
        let aug = augmented_algebra(&m2, &sigma_z_action(&m2), &[0, 1], None).unwrap();
        assert_eq!(aug.quotient_order, 1);
        assert!(aug.algebra.span_distance(&m2) < 1e-9);
        assert!(aug.implementation_residual < 1e-9);

        let (f, act) = swap_model();
        let aug = augmented_algebra(&f, &act, &[0], None).unwrap();
        assert_eq!(aug.algebra.ambient_dim(), 4);
        assert_eq!(aug.base_sectors, vec![0]);
        assert!(aug.center_dim >= 2);
        assert!(aug.implementation_residual < 1e-9);
        assert!(matches!(augmented_algebra(&f, &act, &[0, 1], None), Err(Error::InvalidSubgroup(_))));

        let d2 = FiniteDimAlgebra::diagonal(2, TOL).unwrap();
        let shift = GroupAction::inner(z2(), vec![identity(2), permutation_matrix(&[1, 0])], &d2).unwrap();
        let aug = augmented_algebra(&d2, &shift, &[0], None).unwrap();
        assert!(aug.implementation_residual < 1e-9);
        assert_eq!(aug.center_dim, 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn averaging_is_idempotent_and_invariant(seed in any::<u64>()) {
            let (f, act) = swap_model();
            let p = averaging_matrix(&f, &act);
            prop_assert!((&p * &p - &p).norm() < 1e-12);
            prop_assert!((&p - p.adjoint()).norm() < 1e-12);
            let a = fixed_point_algebra(&f, &act).unwrap();
            let mut r = rng(seed);
            let x = a.project(&random_matrix(&mut r, 4, 4));
            for g in 0..2 {
                prop_assert!((act.apply(g, &x) - &x).norm() < 1e-9);
            }
        }
    }
}
