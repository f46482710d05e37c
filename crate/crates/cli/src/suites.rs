//! Invariant suites run by `verify`, one per spec kind.

use num_complex::Complex64;

use sectorkit::group::{check_pentagonal, fourier_matrix, multiplicative_unitary, pairing};
use sectorkit::linalg::{self, c64, identity, CMatrix};
use sectorkit::measurement::{
    check_imprimitivity, check_modified_pentagonal, correlate, cyclic_shift_representation, instrument, measure,
    measurement_crossed_product, outcome_probabilities, CrossedEmbedding,
};
use sectorkit::modular::{biorth_identities, check_tomita, galois_identities, standard_form};
use sectorkit::states::{
    c_to_q_channel, central_decomposition, conditional_expectation, gns, sector_distribution,
    tomita_correspondence_residual,
};
use sectorkit::symmetry::{averaging_matrix, fixed_point_algebra, sector_permutations};
use sectorkit::{FiniteAbelianGroup, FiniteDimAlgebra, SectorDistribution, State};

use crate::report::VerdictEntry;
use crate::spec::{ActionSpec, MeasurementSpec, Payload, ProblemSpec, SymmetrySpec};
use crate::CliError;

pub(crate) struct Checks {
    input: String,
    tol: f64,
    pub(crate) out: Vec<VerdictEntry>,
}

impl Checks {
    pub(crate) fn new(input: &str, tol: f64) -> Self {
        Self { input: input.into(), tol, out: Vec::new() }
    }

    pub(crate) fn residual(&mut self, check: &str, r: f64) {
        let tol = self.tol;
        self.residual_with(check, r, tol);
    }

    pub(crate) fn residual_with(&mut self, check: &str, r: f64, tol: f64) {
        self.out.push(VerdictEntry { input: self.input.clone(), check: check.into(), residual: Some(r), tol, passed: r.is_finite() && r <= tol });
    }

    pub(crate) fn exact(&mut self, check: &str, ok: bool) {
        self.out.push(VerdictEntry { input: self.input.clone(), check: check.into(), residual: None, tol: self.tol, passed: ok });
    }
}

pub(crate) fn core(spec: &ProblemSpec, what: &str) -> impl Fn(sectorkit::Error) -> CliError {
    let context = format!("{}: {what}", spec.source);
    move |error| CliError::Core { context: context.clone(), error }
}

/// Deterministic generic element of `a`.
pub(crate) fn probe(a: &FiniteDimAlgebra, salt: usize) -> CMatrix {
    let n = a.ambient_dim();
    a.basis().iter().enumerate().fold(linalg::zeros(n, n), |acc, (k, b)| {
        let t = (k + 1) as f64;
        let s = salt as f64;
        acc + b * c64((1.3 * t + s).cos(), (0.7 * t + 2.1 * s).sin())
    })
}

pub(crate) fn run_suite(spec: &ProblemSpec, checks: &mut Checks) -> Result<(), CliError> {
    match &spec.payload {
        Payload::Algebra(a) => algebra_suite(spec, a, checks),
        Payload::State { algebra, state } => {
            algebra_suite(spec, algebra, checks)?;
            state_suite(spec, algebra, state, checks)
        }
        Payload::Group(g) => {
            if let Some(a) = &g.abelian {
                group_suite(spec, a, checks)?;
            }
            Ok(())
        }
        Payload::Action(act) => action_suite(spec, act, checks),
        Payload::Measurement(m) => measurement_suite(spec, m, checks),
        Payload::Modular { algebra, state } => modular_suite(spec, algebra, state, checks),
        Payload::Symmetry(s) => symmetry_suite(spec, s, checks),
    }
}

fn algebra_suite(spec: &ProblemSpec, a: &FiniteDimAlgebra, checks: &mut Checks) -> Result<(), CliError> {
    let c = a.commutant().map_err(core(spec, "commutant"))?;
    let cc = c.commutant().map_err(core(spec, "bicommutant"))?;
    checks.residual("bicommutant", cc.span_distance(a));
    let mut swapped: Vec<(usize, usize)> = a.blocks().iter().map(|b| (b.multiplicity, b.dim)).collect();
    let mut found: Vec<(usize, usize)> = c.blocks().iter().map(|b| (b.dim, b.multiplicity)).collect();
    swapped.sort_unstable();
    found.sort_unstable();
    checks.exact("commutant_structure_swapped", swapped == found);
    let n = a.ambient_dim();
    let sum = a.minimal_central_projections().iter().fold(linalg::zeros(n, n), |acc, p| acc + p.matrix());
    checks.residual("central_projections_sum", (sum - identity(n)).norm());
    checks.residual("structure", a.structure_defect());
    let center = a.center().map_err(core(spec, "center"))?;
    checks.exact("center_counts_sectors", center.dim() == a.sector_count());
    Ok(())
}

fn state_suite(spec: &ProblemSpec, a: &FiniteDimAlgebra, omega: &State, checks: &mut Checks) -> Result<(), CliError> {
    let n = a.ambient_dim();
    let w = sector_distribution(a, omega).map_err(core(spec, "sector distribution"))?;
    checks.residual("weights_sum", (w.weights().iter().sum::<f64>() - 1.0).abs());

    let target = SectorDistribution::uniform(a.sector_count());
    let image = c_to_q_channel(a, omega, &target).map_err(core(spec, "c->q channel"))?;
    let back = sector_distribution(a, &image).map_err(core(spec, "q->c channel"))?;
    checks.residual("section", back.distance(&target));
    let decomposition = central_decomposition(a, omega).map_err(core(spec, "central decomposition"))?;
    checks.residual("barycenter", decomposition.barycenter_defect(a, omega));

    let lambda = conditional_expectation(a, omega).map_err(core(spec, "conditional expectation"))?;
    let x = probe(a, 1);
    let lx = lambda.apply(&x);
    checks.residual("expectation_idempotent", (lambda.apply(&lx) - &lx).norm());
    checks.residual("expectation_unital", (lambda.apply(&identity(n)) - identity(n)).norm());
    let (values, _) = linalg::hermitian_eigen(&lambda.apply(&(&x * x.adjoint())));
    checks.residual("expectation_positive", (-values[0]).max(0.0));
    let center = a.center().map_err(core(spec, "center"))?;
    let (z1, z2) = (probe(&center, 2), probe(&center, 3));
    checks.residual("expectation_bimodule", (lambda.apply(&(&z1 * &x * &z2)) - &z1 * lx * &z2).norm());

    let g = gns(a, omega).map_err(core(spec, "GNS"))?;
    let omega_vec = g.cyclic_vector();
    let cyclic = a.basis().iter().map(|b| (omega_vec.dotc(&(g.represent(b) * omega_vec)) - omega.expect(b)).norm()).fold(0.0, f64::max);
    checks.residual("gns_cyclic_expectation", cyclic);
    let y = probe(a, 4);
    checks.residual("gns_multiplicative", (g.represent(&(&x * &y)) - g.represent(&x) * g.represent(&y)).norm());
    let r = tomita_correspondence_residual(a, omega, &x, &y).map_err(core(spec, "Tomita correspondence"))?;
    checks.residual("tomita_correspondence", r);
    Ok(())
}

fn group_suite(spec: &ProblemSpec, g: &FiniteAbelianGroup, checks: &mut Checks) -> Result<(), CliError> {
    let v = multiplicative_unitary(g);
    checks.residual_with("pentagonal", v.pentagonal_residual(), 0.0);
    let dense = check_pentagonal(&v.to_matrix()).map_err(core(spec, "pentagonal"))?;
    checks.residual_with("pentagonal_dense", dense, 0.0);
    checks.residual("fourier_unitary", linalg::unitarity_defect(&fourier_matrix(g)));
    let n = g.order();
    let chars = g.characters();
    let mut worst: f64 = 0.0;
    for (i, a) in chars.iter().enumerate() {
        for (j, b) in chars.iter().enumerate() {
            let s: Complex64 = (0..n).map(|x| pairing(g, a, x) * pairing(g, b, x).conj()).sum();
            let expected = if i == j { n as f64 } else { 0.0 };
            worst = worst.max((s - expected).norm());
        }
    }
    checks.residual("character_orthogonality", worst);
    Ok(())
}

fn action_suite(spec: &ProblemSpec, act: &ActionSpec, checks: &mut Checks) -> Result<(), CliError> {
    let f = &act.algebra;
    let e = averaging_matrix(f, &act.action);
    checks.residual("averaging_idempotent", (&e * &e - &e).norm());
    let fixed = fixed_point_algebra(f, &act.action).map_err(core(spec, "fixed points"))?;
    let group = &act.group.group;
    let moved = fixed
        .basis()
        .iter()
        .flat_map(|x| (0..group.order()).map(move |g| (g, x)))
        .map(|(g, x)| (act.action.apply(g, x) - x).norm())
        .fold(0.0, f64::max);
    checks.residual("fixed_points_invariant", moved);
    checks.exact("fixed_points_subalgebra", fixed.basis().iter().all(|x| f.contains(x)));
    let perms = sector_permutations(f, &act.action).map_err(core(spec, "sector permutations"))?;
    let homomorphism = (0..group.order())
        .all(|g| (0..group.order()).all(|h| (0..f.sector_count()).all(|s| perms[group.product(g, h)][s] == perms[g][perms[h][s]])));
    checks.exact("sector_action_homomorphism", homomorphism);
    Ok(())
}

fn measurement_suite(spec: &ProblemSpec, m: &MeasurementSpec, checks: &mut Checks) -> Result<(), CliError> {
    let setup = &m.setup;
    let group = setup.group();
    checks.residual_with("pentagonal", multiplicative_unitary(group).pentagonal_residual(), 0.0);
    checks.residual("modified_pentagonal", check_modified_pentagonal(setup).map_err(core(spec, "modified pentagonal"))?);
    let shift = cyclic_shift_representation(setup);
    checks.residual("imprimitivity", check_imprimitivity(setup, &shift).map_err(core(spec, "imprimitivity"))?);
    checks.residual("coupling_reconstruction", setup.reconstruction_residual());
    let n = setup.pointer_dim();
    let mut worst: f64 = 0.0;
    for gamma in 0..n {
        let xi = setup.system().eigenvector(gamma);
        let mut pointer = linalg::CVector::zeros(n);
        pointer[gamma] = c64(1.0, 0.0);
        let out = correlate(setup, &xi).map_err(core(spec, "correlate"))?;
        worst = worst.max((out - xi.kronecker(&pointer)).norm());
    }
    checks.residual("perfect_correlation", worst);
    let cp = measurement_crossed_product(setup, CrossedEmbedding::Coupling).map_err(core(spec, "crossed product"))?;
    checks.residual("crossed_product_contains_coupling", cp.coupling_distance);

    if let Some(omega) = &m.state {
        let probs = outcome_probabilities(setup, omega).map_err(core(spec, "probabilities"))?;
        checks.residual("probabilities_sum", (probs.iter().sum::<f64>() - 1.0).abs());
        let born = setup
            .system()
            .projections()
            .iter()
            .zip(&probs)
            .map(|(p, q)| (omega.expect(p).re - q).abs())
            .fold(0.0, f64::max);
        checks.residual("born_rule", born);
        let mut repeat: f64 = 0.0;
        for (gamma, &p) in probs.iter().enumerate() {
            if p > spec.tol {
                let first = measure(setup, omega, &[gamma]).map_err(core(spec, "measure"))?;
                let again = measure(setup, &first.post_state, &[gamma]).map_err(core(spec, "re-measure"))?;
                repeat = repeat.max(1.0 - again.probability);
            }
        }
        checks.residual("repeatability", repeat);
        if n > 1 {
            let rest: Vec<usize> = (1..n).collect();
            let all: Vec<usize> = (0..n).collect();
            let one = identity(setup.dim());
            let p = |delta: &[usize]| instrument(setup, omega, delta, &one).map(|z| z.re).map_err(core(spec, "instrument"));
            checks.residual("instrument_additivity", (p(&all)? - p(&[0])? - p(&rest)?).abs());
        }
    }
    Ok(())
}

fn modular_suite(spec: &ProblemSpec, a: &FiniteDimAlgebra, phi: &State, checks: &mut Checks) -> Result<(), CliError> {
    let md = standard_form(a, phi).map_err(core(spec, "standard form"))?;
    let t = check_tomita(&md).map_err(core(spec, "Tomita-Takesaki"))?;
    checks.residual("tomita_s", t.s_residual);
    checks.residual("tomita_jmj", t.jmj_residual);
    checks.residual("modular_flow", t.flow_residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max));
    checks.residual("kms", t.kms_residual);
    checks.residual("flow_fixes_center", t.center_residual);
    checks.residual("cyclic_vector_fixed", t.fixed_vector_residual);
    checks.residual("polar_decomposition", t.polar_residual);
    let galois = galois_identities(md.algebra()).map_err(core(spec, "Galois identities"))?;
    checks.residual("galois_join", galois.join_residual);
    checks.residual("galois_fixed_points", galois.fixed_point_residual);
    checks.exact("galois_ergodicity", galois.ergodicity_consistent());
    let g = gns(a, phi).map_err(core(spec, "GNS"))?;
    checks.exact("biorth_identities", biorth_identities(g.representation()).holds(spec.tol));
    Ok(())
}

fn symmetry_suite(spec: &ProblemSpec, s: &SymmetrySpec, checks: &mut Checks) -> Result<(), CliError> {
    action_suite(spec, &s.action, checks)?;
    let analysis = crate::commands::symmetry_analysis(spec, s)?;
    for (name, r) in analysis.residuals {
        checks.residual(name, r);
    }
    for (name, ok) in analysis.exact {
        checks.exact(name, ok);
    }
    Ok(())
}
