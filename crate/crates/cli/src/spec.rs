//! Problem spec files: JSON with a `schema_version`, a `kind`, optional
//! `metadata` and a kind-specific `payload`.
//!
//! Complex scalars are `[re, im]` pairs and matrices are row-major nested
//! arrays of them. Every payload is converted into validated core objects
//! before any command runs.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use sectorkit::group::verify_masa;
use sectorkit::linalg::{self, CMatrix, CVector};
use sectorkit::measurement::build_coupling;
use sectorkit::{
    Automorphism, Block, FiniteAbelianGroup, FiniteDimAlgebra, FiniteGroup, GroupAction, MeasurementSetup,
    SectorDistribution, State,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Algebra,
    State,
    Group,
    Action,
    Measurement,
    Modular,
    Symmetry,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Algebra => "algebra",
            Kind::State => "state",
            Kind::Group => "group",
            Kind::Action => "action",
            Kind::Measurement => "measurement",
            Kind::Modular => "modular",
            Kind::Symmetry => "symmetry",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub name: Option<String>,
    pub description: Option<String>,
    pub tolerance: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    schema_version: u32,
    kind: Kind,
    #[serde(default)]
    metadata: Metadata,
    payload: serde_json::Value,
}

#[derive(Deserialize)]
struct RawComplex([f64; 2]);

type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    ambient_dim: Option<usize>,
    generators: Option<Vec<RawMatrix>>,
    /// `[dim, multiplicity]` per block.
    direct_sum: Option<Vec<[usize; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    density: Option<RawMatrix>,
    vector: Option<Vec<RawComplex>>,
    /// Block-tracial state with these sector weights.
    sector_weights: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    cyclic_orders: Option<Vec<usize>>,
    table: Option<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    /// One implementing unitary per group element.
    unitaries: Option<Vec<RawMatrix>>,
    /// One basis permutation per group element, `e_j ↦ e_{p[j]}`.
    permutations: Option<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatePayload {
    algebra: RawAlgebra,
    state: RawState,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionPayload {
    algebra: RawAlgebra,
    group: RawGroup,
    action: RawAction,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementPayload {
    dim: usize,
    factor: Option<RawAlgebra>,
    masa: Option<RawAlgebra>,
    group: Option<RawGroup>,
    state: Option<RawState>,
    outcome_sets: Option<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetryPayload {
    algebra: RawAlgebra,
    group: RawGroup,
    action: RawAction,
    state: Option<RawState>,
    subgroup: Option<Vec<usize>>,
}

/// A group given either by cyclic orders (abelian) or by a Cayley table.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    pub abelian: Option<FiniteAbelianGroup>,
    pub group: FiniteGroup,
}

#[derive(Debug, Clone)]
pub struct ActionSpec {
    pub algebra: FiniteDimAlgebra,
    pub group: GroupSpec,
    pub action: GroupAction,
    /// Implementing unitaries, one per group element.
    pub unitaries: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
pub struct MeasurementSpec {
    pub setup: MeasurementSetup,
    pub state: Option<State>,
    pub outcome_sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SymmetrySpec {
    pub action: ActionSpec,
    pub state: Option<State>,
    pub subgroup: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub enum Payload {
    Algebra(FiniteDimAlgebra),
    State { algebra: FiniteDimAlgebra, state: State },
    Group(GroupSpec),
    Action(ActionSpec),
    Measurement(Box<MeasurementSpec>),
    Modular { algebra: FiniteDimAlgebra, state: State },
    Symmetry(Box<SymmetrySpec>),
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub source: String,
    pub kind: Kind,
    pub metadata: Metadata,
    pub tol: f64,
    pub payload: Payload,
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        self.metadata.name.as_deref().unwrap_or(&self.source)
    }

    /// Algebra and optional state carried by the spec.
    pub fn algebra_and_state(&self) -> Option<(&FiniteDimAlgebra, Option<&State>)> {
        match &self.payload {
            Payload::Algebra(a) => Some((a, None)),
            Payload::State { algebra, state } | Payload::Modular { algebra, state } => Some((algebra, Some(state))),
            Payload::Action(a) => Some((&a.algebra, None)),
            Payload::Symmetry(s) => Some((&s.action.algebra, s.state.as_ref())),
            Payload::Measurement(m) => Some((m.setup.system().factor(), m.state.as_ref())),
            Payload::Group(_) => None,
        }
    }
}

pub fn parse_spec_file(path: &Path, default_tol: f64) -> Result<ProblemSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let source = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_spec(&text, &source, default_tol)
}

pub fn parse_spec(text: &str, source: &str, default_tol: f64) -> Result<ProblemSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawSpec = serde_path_to_error::deserialize(de).map_err(|e| schema(source, &e.path().to_string(), e.inner()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(CliError::Schema {
            file: source.into(),
            path: "schema_version".into(),
            message: format!("unsupported version {}, expected {SCHEMA_VERSION}", raw.schema_version),
        });
    }
    let tol = match raw.metadata.tolerance {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(CliError::Schema {
                file: source.into(),
                path: "metadata.tolerance".into(),
                message: "tolerance must be positive".into(),
            })
        }
        Some(t) => t,
        None => default_tol,
    };
    let cx = Ctx { source, tol };
    let payload = match raw.kind {
        Kind::Algebra => Payload::Algebra(cx.algebra(&payload::<RawAlgebra>(source, raw.payload)?, "payload")?),
        Kind::State | Kind::Modular => {
            let p: StatePayload = payload(source, raw.payload)?;
            let algebra = cx.algebra(&p.algebra, "payload.algebra")?;
            let state = cx.state(&p.state, &algebra, "payload.state")?;
            if raw.kind == Kind::State {
                Payload::State { algebra, state }
            } else {
                Payload::Modular { algebra, state }
            }
        }
        Kind::Group => Payload::Group(cx.group(&payload::<RawGroup>(source, raw.payload)?, "payload")?),
        Kind::Action => {
            let p: ActionPayload = payload(source, raw.payload)?;
            Payload::Action(cx.action(&p.algebra, &p.group, &p.action)?)
        }
        Kind::Measurement => Payload::Measurement(Box::new(cx.measurement(payload(source, raw.payload)?)?)),
        Kind::Symmetry => {
            let p: SymmetryPayload = payload(source, raw.payload)?;
            let action = cx.action(&p.algebra, &p.group, &p.action)?;
            let state = p.state.as_ref().map(|s| cx.state(s, &action.algebra, "payload.state")).transpose()?;
            if let Some(h) = &p.subgroup {
                if let Some(i) = h.iter().position(|&x| x >= action.group.group.order()) {
                    return Err(cx.err(&format!("payload.subgroup[{i}]"), "not a group element"));
                }
            }
            Payload::Symmetry(Box::new(SymmetrySpec { action, state, subgroup: p.subgroup }))
        }
    };
    Ok(ProblemSpec { source: source.into(), kind: raw.kind, metadata: raw.metadata, tol, payload })
}

fn schema(source: &str, path: &str, e: impl fmt::Display) -> CliError {
    CliError::Schema { file: source.into(), path: path.into(), message: e.to_string() }
}

fn payload<T: for<'de> Deserialize<'de>>(source: &str, value: serde_json::Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { "payload".to_string() } else { format!("payload.{inner}") };
        schema(source, &path, e.inner())
    })
}

struct Ctx<'a> {
    source: &'a str,
    tol: f64,
}

impl Ctx<'_> {
    fn err(&self, path: &str, message: impl fmt::Display) -> CliError {
        schema(self.source, path, message)
    }

    fn core(&self, path: &str, e: sectorkit::Error) -> CliError {
        CliError::Core { context: format!("{}: {path}", self.source), error: e }
    }

    fn matrix(&self, raw: &RawMatrix, dim: usize, path: &str) -> Result<CMatrix, CliError> {
        if raw.len() != dim {
            return Err(self.err(path, format!("expected {dim} rows, found {}", raw.len())));
        }
        for (i, row) in raw.iter().enumerate() {
            if row.len() != dim {
                return Err(self.err(&format!("{path}[{i}]"), format!("matrix is not square: row has {} entries, expected {dim}", row.len())));
            }
        }
        Ok(DMatrix::from_fn(dim, dim, |i, j| {
            let [re, im] = raw[i][j].0;
            Complex64::new(re, im)
        }))
    }

    fn algebra(&self, raw: &RawAlgebra, path: &str) -> Result<FiniteDimAlgebra, CliError> {
        match (&raw.generators, &raw.direct_sum) {
            (Some(gens), None) => {
                let dim = raw
                    .ambient_dim
                    .or_else(|| gens.first().map(|g| g.len()))
                    .ok_or_else(|| self.err(&format!("{path}.ambient_dim"), "required when there are no generators"))?;
                if dim == 0 {
                    return Err(self.err(&format!("{path}.ambient_dim"), "must be positive"));
                }
                let mats = gens
                    .iter()
                    .enumerate()
                    .map(|(i, g)| self.matrix(g, dim, &format!("{path}.generators[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                FiniteDimAlgebra::generate(&mats, dim, self.tol).map_err(|e| self.core(path, e))
            }
            (None, Some(blocks)) => {
                if let Some(i) = blocks.iter().position(|b| b[0] == 0 || b[1] == 0) {
                    return Err(self.err(&format!("{path}.direct_sum[{i}]"), "block dimension and multiplicity must be positive"));
                }
                let blocks: Vec<Block> = blocks.iter().map(|b| Block::new(b[0], b[1])).collect();
                let total: usize = blocks.iter().map(|b| b.dim * b.multiplicity).sum();
                if let Some(d) = raw.ambient_dim {
                    if d != total {
                        return Err(self.err(&format!("{path}.ambient_dim"), format!("blocks occupy {total} dimensions, not {d}")));
                    }
                }
                FiniteDimAlgebra::direct_sum(&blocks, self.tol).map_err(|e| self.core(path, e))
            }
            _ => Err(self.err(path, "exactly one of `generators` or `direct_sum` is required")),
        }
    }

    fn state(&self, raw: &RawState, algebra: &FiniteDimAlgebra, path: &str) -> Result<State, CliError> {
        let n = algebra.ambient_dim();
        let state = match (&raw.density, &raw.vector, &raw.sector_weights) {
            (Some(d), None, None) => {
                let rho = self.matrix(d, n, &format!("{path}.density"))?;
                State::new(rho, self.tol)
            }
            (None, Some(v), None) => {
                if v.len() != n {
                    return Err(self.err(&format!("{path}.vector"), format!("expected {n} entries, found {}", v.len())));
                }
                let xi = CVector::from_iterator(n, v.iter().map(|c| Complex64::new(c.0[0], c.0[1])));
                State::from_vector(&xi)
            }
            (None, None, Some(w)) => {
                if w.len() != algebra.sector_count() {
                    return Err(self.err(
                        &format!("{path}.sector_weights"),
                        format!("expected {} weights, found {}", algebra.sector_count(), w.len()),
                    ));
                }
                let dist = SectorDistribution::new(w.clone(), self.tol).map_err(|e| self.core(path, e))?;
                let mut rho = linalg::zeros(n, n);
                for (k, b) in algebra.blocks().iter().enumerate() {
                    let p = algebra.central_projection(k);
                    rho += p.scale(dist.weights()[k] / (b.dim * b.multiplicity) as f64);
                }
                State::new(rho, self.tol)
            }
            _ => return Err(self.err(path, "exactly one of `density`, `vector` or `sector_weights` is required")),
        };
        state.map_err(|e| self.core(path, e))
    }

    fn group(&self, raw: &RawGroup, path: &str) -> Result<GroupSpec, CliError> {
        match (&raw.cyclic_orders, &raw.table) {
            (Some(orders), None) => {
                if let Some(i) = orders.iter().position(|&k| k == 0) {
                    return Err(self.err(&format!("{path}.cyclic_orders[{i}]"), "cyclic order must be positive"));
                }
                let g = FiniteAbelianGroup::new(orders.clone()).map_err(|e| self.core(path, e))?;
                Ok(GroupSpec { group: FiniteGroup::from_abelian(&g), abelian: Some(g) })
            }
            (None, Some(table)) => {
                let g = FiniteGroup::from_table(table.clone()).map_err(|e| self.core(&format!("{path}.table"), e))?;
                Ok(GroupSpec { abelian: None, group: g })
            }
            _ => Err(self.err(path, "exactly one of `cyclic_orders` or `table` is required")),
        }
    }

    fn action(&self, algebra: &RawAlgebra, group: &RawGroup, action: &RawAction) -> Result<ActionSpec, CliError> {
        let algebra = self.algebra(algebra, "payload.algebra")?;
        let group = self.group(group, "payload.group")?;
        let n = algebra.ambient_dim();
        let unitaries = match (&action.unitaries, &action.permutations) {
            (Some(us), None) => us
                .iter()
                .enumerate()
                .map(|(i, u)| {
                    let path = format!("payload.action.unitaries[{i}]");
                    let m = self.matrix(u, n, &path)?;
                    let defect = linalg::unitarity_defect(&m);
                    if defect > self.tol {
                        return Err(self.err(&path, format!("declared unitary has unitarity residual {defect:e} > {:e}", self.tol)));
                    }
                    Ok(m)
                })
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(ps)) => ps
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let path = format!("payload.action.permutations[{i}]");
                    let mut seen = vec![false; n];
                    if p.len() != n {
                        return Err(self.err(&path, format!("expected {n} entries, found {}", p.len())));
                    }
                    for &j in p {
                        if j >= n || std::mem::replace(&mut seen[j], true) {
                            return Err(self.err(&path, "not a permutation of the basis"));
                        }
                    }
                    Ok(linalg::permutation_matrix(p))
                })
                .collect::<Result<Vec<_>, _>>()?,
            _ => return Err(self.err("payload.action", "exactly one of `unitaries` or `permutations` is required")),
        };
        if unitaries.len() != group.group.order() {
            return Err(self.err(
                "payload.action",
                format!("{} maps given for a group of order {}", unitaries.len(), group.group.order()),
            ));
        }
        let maps = unitaries.iter().cloned().map(Automorphism::Unitary).collect();
        let act = GroupAction::new(group.group.clone(), maps, &algebra).map_err(|e| self.core("payload.action", e))?;
        Ok(ActionSpec { algebra, group, action: act, unitaries })
    }

    fn measurement(&self, p: MeasurementPayload) -> Result<MeasurementSpec, CliError> {
        if p.dim == 0 {
            return Err(self.err("payload.dim", "must be positive"));
        }
        let factor = match &p.factor {
            Some(a) => self.algebra(a, "payload.factor")?,
            None => FiniteDimAlgebra::full(p.dim, self.tol).map_err(|e| self.core("payload.factor", e))?,
        };
        let masa = match &p.masa {
            Some(a) => self.algebra(a, "payload.masa")?,
            None => FiniteDimAlgebra::diagonal(p.dim, self.tol).map_err(|e| self.core("payload.masa", e))?,
        };
        for (a, path) in [(&factor, "payload.factor"), (&masa, "payload.masa")] {
            if a.ambient_dim() != p.dim {
                return Err(self.err(path, format!("acts on dimension {}, not {}", a.ambient_dim(), p.dim)));
            }
        }
        let data = verify_masa(&factor, &masa).map_err(|e| self.core("payload.masa", e))?;
        let group = match &p.group {
            Some(g) => self
                .group(g, "payload.group")?
                .abelian
                .ok_or_else(|| self.err("payload.group", "measurement groups are given by `cyclic_orders`"))?,
            None => FiniteAbelianGroup::cyclic(data.outcome_count()).map_err(|e| self.core("payload.group", e))?,
        };
        let setup = build_coupling(&data, &group).map_err(|e| self.core("payload.group", e))?;
        let state = p.state.as_ref().map(|s| self.state(s, &factor, "payload.state")).transpose()?;
        let outcome_sets = p.outcome_sets.unwrap_or_default();
        for (i, set) in outcome_sets.iter().enumerate() {
            if let Some(j) = set.iter().position(|&g| g >= group.order()) {
                return Err(self.err(&format!("payload.outcome_sets[{i}][{j}]"), "not an outcome"));
            }
        }
        Ok(MeasurementSpec { setup, state, outcome_sets })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn schema_path(text: &str) -> String {
        match parse_spec(text, "t.json", TOL) {
            Err(CliError::Schema { path, .. }) => path,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn cyclic_group() {
        let spec = parse_spec(r#"{"schema_version":1,"kind":"group","payload":{"cyclic_orders":[2]}}"#, "g", TOL).unwrap();
        match spec.payload {
            Payload::Group(g) => assert_eq!(g.abelian.unwrap().order(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn flip_generates_commutative_algebra() {
        let text = r#"{"schema_version":1,"kind":"algebra","payload":{"ambient_dim":2,
            "generators":[[[[0,0],[1,0]],[[1,0],[0,0]]]]}}"#;
        match parse_spec(text, "a", TOL).unwrap().payload {
            Payload::Algebra(a) => {
                assert_eq!(a.dim(), 2);
                assert!(a.is_commutative());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn malformed_complex_names_path() {
        let text = r#"{"schema_version":1,"kind":"algebra","payload":{"ambient_dim":2,
            "generators":[[[[0,0],[1,0,0]],[[1,0],[0,0]]]]}}"#;
        assert_eq!(schema_path(text), "payload.generators[0][0][1]");
    }

    #[test]
    fn non_square_and_non_unitary_rejected() {
        let text = r#"{"schema_version":1,"kind":"algebra","payload":{"ambient_dim":2,
            "generators":[[[[0,0],[1,0]],[[1,0]]]]}}"#;
        assert_eq!(schema_path(text), "payload.generators[0][1]");
        let text = r#"{"schema_version":1,"kind":"action","payload":{"algebra":{"direct_sum":[[2,1]]},
            "group":{"cyclic_orders":[2]},
            "action":{"unitaries":[[[[1,0],[0,0]],[[0,0],[1,0]]],[[[2,0],[0,0]],[[0,0],[1,0]]]]}}}"#;
        assert_eq!(schema_path(text), "payload.action.unitaries[1]");
    }

    #[test]
    fn version_kind_and_unknown_fields() {
        assert_eq!(schema_path(r#"{"schema_version":2,"kind":"group","payload":{"cyclic_orders":[2]}}"#), "schema_version");
        assert_eq!(schema_path(r#"{"schema_version":1,"kind":"ring","payload":{}}"#), "kind");
        assert_eq!(schema_path(r#"{"schema_version":1,"kind":"group","payload":{"orders":[2]}}"#), "payload.orders");
    }

    #[test]
    fn tolerance_override_and_sector_weights() {
        let text = r#"{"schema_version":1,"kind":"state","metadata":{"name":"w","tolerance":1e-7},
            "payload":{"algebra":{"direct_sum":[[2,1],[3,1]]},"state":{"sector_weights":[0.3,0.7]}}}"#;
        let spec = parse_spec(text, "s", TOL).unwrap();
        assert_eq!(spec.tol, 1e-7);
        assert_eq!(spec.name(), "w");
        let (a, s) = spec.algebra_and_state().unwrap();
        let w = sectorkit::states::sector_distribution(a, s.unwrap()).unwrap();
        assert!((w.weights()[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn permutation_tables_validated() {
        let text = r#"{"schema_version":1,"kind":"action","payload":{"algebra":{"direct_sum":[[2,1],[2,1]]},
            "group":{"cyclic_orders":[2]},"action":{"permutations":[[0,1,2,3],[2,3,0,0]]}}}"#;
        assert_eq!(schema_path(text), "payload.action.permutations[1]");
    }
}
