//! Command dispatch. Each command maps specs to a [`Report`].

use serde_json::{json, Map, Value};

use sectorkit::linalg::{self, CMatrix};
use sectorkit::measurement::{measure, measurement_crossed_product, outcome_probabilities, sample_outcomes, CrossedEmbedding};
use sectorkit::modular::{check_tomita, standard_form};
use sectorkit::states::{gns, is_factor_state, sector_distribution};
use sectorkit::symmetry::{
    augmented_algebra, breaking_analysis, breaking_analysis_for_state, crossed_product, dhr_toy, fixed_point_algebra,
};
use sectorkit::{Block, FiniteDimAlgebra, RepresentationData, Verdict};

use crate::report::{InputEcho, Report};
use crate::spec::{Kind, Payload, ProblemSpec, SymmetrySpec};
use crate::suites::{core, probe, run_suite, Checks};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Sectors,
    Gns,
    Measure,
    Modular,
    Symmetry,
    Crossed,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sectors => "sectors",
            Command::Gns => "gns",
            Command::Measure => "measure",
            Command::Modular => "modular",
            Command::Symmetry => "symmetry",
            Command::Crossed => "crossed",
            Command::Verify => "verify",
        }
    }

    fn accepts(self, kind: Kind) -> bool {
        match self {
            Command::Sectors => kind != Kind::Group,
            Command::Gns => matches!(kind, Kind::State | Kind::Modular | Kind::Symmetry | Kind::Measurement),
            Command::Measure => kind == Kind::Measurement,
            Command::Modular => matches!(kind, Kind::State | Kind::Modular),
            Command::Symmetry => matches!(kind, Kind::Action | Kind::Symmetry),
            Command::Crossed => matches!(kind, Kind::Action | Kind::Symmetry | Kind::Measurement),
            Command::Verify => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flags {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Flags {
    fn default() -> Self {
        Self { tol: sectorkit::DEFAULT_TOL, samples: 0, seed: 0 }
    }
}

pub fn run_command(command: Command, specs: &[ProblemSpec], flags: &Flags) -> Result<Report, CliError> {
    if specs.is_empty() {
        return Err(CliError::Arity(format!("{} needs at least one spec file", command.name())));
    }
    let mut report = Report::new(command.name());
    for spec in specs {
        if !command.accepts(spec.kind) {
            return Err(CliError::Arity(format!("{}: {} does not accept a {} spec", spec.source, command.name(), spec.kind)));
        }
        let mut key = spec.name().to_string();
        let mut copy = 2;
        while report.results.contains_key(&key) {
            key = format!("{}#{copy}", spec.name());
            copy += 1;
        }
        report.inputs.push(InputEcho { file: spec.source.clone(), name: key.clone(), kind: spec.kind.to_string(), tolerance: spec.tol });
        let mut checks = Checks::new(&key, spec.tol);
        let value = match command {
            Command::Sectors => sectors(spec, &mut checks)?,
            Command::Gns => gns_command(spec, &mut checks)?,
            Command::Measure => measure_command(spec, flags, &mut checks)?,
            Command::Modular => modular_command(spec, &mut checks)?,
            Command::Symmetry => match &spec.payload {
                Payload::Symmetry(s) => symmetry_value(spec, s, &mut checks)?,
                _ => symmetry_value(spec, &as_symmetry(spec), &mut checks)?,
            },
            Command::Crossed => crossed(spec, &mut checks)?,
            Command::Verify => {
                run_suite(spec, &mut checks)?;
                let failed = checks.out.iter().filter(|v| !v.passed).count();
                json!({"kind": spec.kind.to_string(), "checks": checks.out.len(), "failed": failed})
            }
        };
        let mut value = value;
        if let Value::Object(map) = &mut value {
            map.insert("tol".into(), json!(spec.tol));
        }
        report.results.insert(key, value);
        report.verdicts.append(&mut checks.out);
    }
    Ok(report)
}

fn as_symmetry(spec: &ProblemSpec) -> SymmetrySpec {
    match &spec.payload {
        Payload::Action(a) => SymmetrySpec { action: a.clone(), state: None, subgroup: None },
        _ => unreachable!("checked by Command::accepts"),
    }
}

/// Entries below this magnitude are written as zero.
const CLEAN: f64 = 1e-14;

fn clean(x: f64) -> f64 {
    if x.abs() < CLEAN {
        0.0
    } else {
        x
    }
}

fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([clean(m[(i, j)].re), clean(m[(i, j)].im)])).collect()))
            .collect(),
    )
}

fn blocks_value(blocks: &[Block]) -> Value {
    Value::Array(blocks.iter().map(|b| json!({"dim": b.dim, "multiplicity": b.multiplicity})).collect())
}

fn algebra_value(a: &FiniteDimAlgebra) -> Value {
    json!({
        "ambient_dim": a.ambient_dim(),
        "dim": a.dim(),
        "blocks": blocks_value(a.blocks()),
        "center_dim": a.sector_count(),
    })
}

fn one_based(sectors: &[usize]) -> Vec<usize> {
    sectors.iter().map(|s| s + 1).collect()
}

fn sectors(spec: &ProblemSpec, checks: &mut Checks) -> Result<Value, CliError> {
    let (a, state) = spec.algebra_and_state().expect("accepted kinds carry an algebra");
    let weights = state.map(|s| sector_distribution(a, s)).transpose().map_err(core(spec, "sector distribution"))?;
    let rows: Vec<Value> = a
        .blocks()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let mut row = Map::new();
            row.insert("sector".into(), json!(k + 1));
            row.insert("dim".into(), json!(b.dim));
            row.insert("multiplicity".into(), json!(b.multiplicity));
            if let Some(w) = &weights {
                row.insert("weight".into(), json!(clean(w.weights()[k])));
            }
            Value::Object(row)
        })
        .collect();
    let mut out = Map::new();
    out.insert("ambient_dim".into(), json!(a.ambient_dim()));
    out.insert("algebra_dim".into(), json!(a.dim()));
    out.insert("center_dim".into(), json!(a.sector_count()));
    out.insert("is_factor".into(), json!(a.is_factor()));
    out.insert("is_commutative".into(), json!(a.is_commutative()));
    out.insert("sectors".into(), Value::Array(rows));
    checks.residual("structure", a.structure_defect());
    if let Some(w) = &weights {
        out.insert("distribution".into(), json!(w.weights().iter().map(|&x| clean(x)).collect::<Vec<_>>()));
        checks.residual("weights_sum", (w.weights().iter().sum::<f64>() - 1.0).abs());
    }
    Ok(Value::Object(out))
}

fn gns_command(spec: &ProblemSpec, checks: &mut Checks) -> Result<Value, CliError> {
    let (a, state) = spec.algebra_and_state().expect("accepted kinds carry an algebra");
    let omega = state.ok_or_else(|| CliError::Arity(format!("{}: gns needs a state", spec.source)))?;
    let g = gns(a, omega).map_err(core(spec, "GNS"))?;
    let images: Vec<CMatrix> = a.basis().iter().map(|b| g.represent(b)).collect();
    let generated = FiniteDimAlgebra::from_spanning_set(&images, g.dim(), spec.tol).map_err(core(spec, "GNS algebra"))?;
    let commutant = generated.commutant().map_err(core(spec, "GNS commutant"))?;
    let support: Vec<usize> = g.representation().support().into_iter().collect();
    let factor = is_factor_state(a, omega).map_err(core(spec, "factor state"))?;
    let x = probe(a, 1);
    let y = probe(a, 4);
    checks.residual("gns_multiplicative", (g.represent(&(&x * &y)) - g.represent(&x) * g.represent(&y)).norm());
    let omega_vec = g.cyclic_vector();
    checks.residual("gns_cyclic_expectation", (omega_vec.dotc(&(g.represent(&x) * omega_vec)) - omega.expect(&x)).norm());
    checks.residual("gns_bicommutant", commutant.commutant().map_err(core(spec, "GNS bicommutant"))?.span_distance(&generated));
    Ok(json!({
        "gns_dim": g.dim(),
        "is_factor_state": factor,
        "support": one_based(&support),
        "multiplicities": g.representation().multiplicities(),
        "represented_blocks": blocks_value(generated.blocks()),
        "commutant_blocks": blocks_value(commutant.blocks()),
    }))
}

fn measure_command(spec: &ProblemSpec, flags: &Flags, checks: &mut Checks) -> Result<Value, CliError> {
    let Payload::Measurement(m) = &spec.payload else { unreachable!("checked by Command::accepts") };
    let omega = m.state.as_ref().ok_or_else(|| CliError::Arity(format!("{}: measure needs a state", spec.source)))?;
    let setup = &m.setup;
    let probs = outcome_probabilities(setup, omega).map_err(core(spec, "probabilities"))?;
    let mut post = Vec::new();
    for (gamma, &p) in probs.iter().enumerate() {
        if p > spec.tol {
            let res = measure(setup, omega, &[gamma]).map_err(core(spec, "measure"))?;
            post.push(json!({"outcome": gamma, "density": matrix_value(res.post_state.density())}));
        }
    }
    let mut sets = Vec::new();
    for set in &m.outcome_sets {
        let p = sectorkit::measurement::instrument(setup, omega, set, &linalg::identity(setup.dim())).map_err(core(spec, "instrument"))?;
        sets.push(json!({"outcomes": set, "probability": clean(p.re)}));
    }
    checks.residual("probabilities_sum", (probs.iter().sum::<f64>() - 1.0).abs());
    let born = setup.system().projections().iter().zip(&probs).map(|(p, q)| (omega.expect(p).re - q).abs()).fold(0.0, f64::max);
    checks.residual("born_rule", born);
    let mut out = Map::new();
    out.insert(
        "outcomes".into(),
        Value::Array(probs.iter().enumerate().map(|(g, &p)| json!({"outcome": g, "probability": clean(p)})).collect()),
    );
    out.insert("post_states".into(), Value::Array(post));
    if !sets.is_empty() {
        out.insert("outcome_sets".into(), Value::Array(sets));
    }
    if flags.samples > 0 {
        let counts = sample_outcomes(setup, omega, flags.samples, flags.seed).map_err(core(spec, "sampling"))?;
        let n = flags.samples as f64;
        let z = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| {
                let sd = (n * p * (1.0 - p)).sqrt();
                let dev = (c as f64 - n * p).abs();
                if sd > 0.0 {
                    dev / sd
                } else if dev == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max);
        checks.residual_with("histogram_sigma", z, 4.0);
        out.insert("histogram".into(), json!({"samples": flags.samples, "seed": flags.seed, "counts": counts}));
    }
    Ok(Value::Object(out))
}

fn modular_command(spec: &ProblemSpec, checks: &mut Checks) -> Result<Value, CliError> {
    let (a, state) = spec.algebra_and_state().expect("accepted kinds carry an algebra");
    let phi = state.expect("accepted kinds carry a state");
    let md = standard_form(a, phi).map_err(core(spec, "standard form"))?;
    let (spectrum, _) = linalg::hermitian_eigen(md.delta());
    let spectrum: Vec<f64> = spectrum.into_iter().map(clean).collect();
    let t = check_tomita(&md).map_err(core(spec, "Tomita-Takesaki"))?;
    checks.residual("tomita_s", t.s_residual);
    checks.residual("tomita_jmj", t.jmj_residual);
    checks.residual("modular_flow", t.flow_residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max));
    checks.residual("kms", t.kms_residual);
    checks.residual("polar_decomposition", t.polar_residual);
    let n = md.dim();
    Ok(json!({
        "standard_dim": n,
        "delta_spectrum": spectrum,
        "delta_identity_defect": clean((md.delta() - linalg::identity(n)).norm()),
        "flow_times": t.flow_residuals.iter().map(|(s, _)| *s).collect::<Vec<_>>(),
    }))
}

pub(crate) struct SymmetryAnalysis {
    pub value: Value,
    pub residuals: Vec<(&'static str, f64)>,
    pub exact: Vec<(&'static str, bool)>,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Unbroken => "unbroken",
        Verdict::Broken => "broken",
    }
}

pub(crate) fn symmetry_analysis(spec: &ProblemSpec, s: &SymmetrySpec) -> Result<SymmetryAnalysis, CliError> {
    let act = &s.action;
    let f = &act.algebra;
    let fixed = fixed_point_algebra(f, &act.action).map_err(core(spec, "fixed points"))?;
    let report = match &s.state {
        Some(omega) => breaking_analysis_for_state(f, &act.action, omega),
        None => breaking_analysis(f, &act.action, &RepresentationData::reduced_universal(f.signature())),
    }
    .map_err(core(spec, "breaking analysis"))?;
    let mut residuals = Vec::new();
    let mut exact = Vec::new();
    let stabilizer_fixes = report.stabilizer.iter().all(|&g| report.supported.iter().all(|&k| report.sector_permutations[g][k] == k));
    exact.push(("stabilizer_fixes_support", stabilizer_fixes));

    let mut out = Map::new();
    out.insert("fixed_point_algebra".into(), algebra_value(&fixed));
    out.insert(
        "sector_permutations".into(),
        json!(report.sector_permutations.iter().map(|p| one_based(p)).collect::<Vec<_>>()),
    );
    out.insert("supported_sectors".into(), json!(one_based(&report.supported)));
    out.insert("verdict".into(), json!(verdict_name(report.verdict)));
    out.insert(
        "verdict_note".into(),
        json!(match report.verdict {
            Verdict::Unbroken => "all supported sectors fixed (sector criterion; unitary implementability not tested)",
            Verdict::Broken => "a supported sector is moved (sector criterion; unitary implementability not tested)",
        }),
    );
    out.insert(
        "ergodic_components".into(),
        Value::Array(
            report
                .ergodic_components
                .iter()
                .map(|c| json!({"sectors": one_based(&c.sectors), "verdict": verdict_name(c.verdict())}))
                .collect(),
        ),
    );
    out.insert("stabilizer".into(), json!(report.stabilizer));

    if let Some(group) = &act.group.abelian {
        let n = f.ambient_dim();
        if f.dim() == n * n {
            let dhr = dhr_toy(f, group, &act.unitaries).map_err(core(spec, "DHR duality"))?;
            residuals.push(("dhr_commutant", dhr.commutant_residual));
            residuals.push(("dhr_bicommutant", dhr.bicommutant_residual));
            exact.push(("dhr_labels_bijective", dhr.labels_bijective()));
            exact.push(("dhr_center_matches_characters", dhr.center_dim == dhr.characters_present.len()));
            out.insert(
                "dhr".into(),
                json!({
                    "observables": algebra_value(&dhr.observables),
                    "center_dim": dhr.center_dim,
                    "characters_present": dhr.characters_present,
                    "sector_labels": dhr.sector_labels,
                }),
            );
        }
        if report.verdict == Verdict::Broken {
            let h = s.subgroup.clone().unwrap_or_else(|| report.stabilizer.clone());
            let base: Vec<usize> = report.ergodic_components.iter().map(|c| c.sectors[0]).collect();
            let aug = augmented_algebra(f, &act.action, &h, Some(&base)).map_err(core(spec, "augmented algebra"))?;
            residuals.push(("augmented_implementation", aug.implementation_residual));
            out.insert(
                "augmented".into(),
                json!({
                    "subgroup": h,
                    "base_sectors": one_based(&aug.base_sectors),
                    "quotient_order": aug.quotient_order,
                    "algebra": algebra_value(&aug.algebra),
                }),
            );
        }
    }
    Ok(SymmetryAnalysis { value: Value::Object(out), residuals, exact })
}

fn symmetry_value(spec: &ProblemSpec, s: &SymmetrySpec, checks: &mut Checks) -> Result<Value, CliError> {
    let analysis = symmetry_analysis(spec, s)?;
    for (name, r) in analysis.residuals {
        checks.residual(name, r);
    }
    for (name, ok) in analysis.exact {
        checks.exact(name, ok);
    }
    Ok(analysis.value)
}

fn crossed(spec: &ProblemSpec, checks: &mut Checks) -> Result<Value, CliError> {
    let action = match &spec.payload {
        Payload::Action(a) => a,
        Payload::Symmetry(s) => &s.action,
        Payload::Measurement(m) => {
            let mut out = Map::new();
            for (name, embedding) in [("coupling", CrossedEmbedding::Coupling), ("shift_action", CrossedEmbedding::ShiftAction)] {
                let cp = measurement_crossed_product(&m.setup, embedding).map_err(core(spec, "crossed product"))?;
                let mut v = algebra_value(&cp.algebra);
                v["coupling_distance"] = json!(clean(cp.coupling_distance));
                out.insert(name.into(), v);
                if embedding == CrossedEmbedding::Coupling {
                    checks.residual("crossed_product_contains_coupling", cp.coupling_distance);
                }
            }
            return Ok(Value::Object(out));
        }
        _ => unreachable!("checked by Command::accepts"),
    };
    let cp = crossed_product(&action.algebra, &action.action).map_err(core(spec, "crossed product"))?;
    checks.exact("crossed_dimension", cp.dim() == action.algebra.dim() * action.group.group.order());
    checks.residual("structure", cp.structure_defect());
    Ok(algebra_value(&cp))
}
