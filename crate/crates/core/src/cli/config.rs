//! JSON run configuration. `qnslab eval` consumes all of it; `table1` and
//! `fig4` only take model size, coupling, β, grid, tolerance and output
//! directory from it. The schema is documented in the README.
//!
//! Parsing reports the JSON path of the offending field. Semantic checks
//! (label references, site ranges, time ordering over the grid) run before
//! any correlation is computed and report paths in the same style.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::contour::{EtaVector, Permutation};
use crate::correlation::{check_increasing, ObservableSet};
use crate::error::{Error, Result};
use crate::model::{build_tfim_with_field, collective_z, pauli_string, pauli_sum, product_state_c, t_breaking_term, thermal_state, Pauli};
use crate::operator::{DensityMatrix, QuantumOperator};
use crate::sweep::{Grid, SweepTemplate, TimeExpr};
use crate::symmetry::{SymmetryKind, Theorem};

pub const DEFAULT_SITES: usize = 8;
pub const DEFAULT_COUPLING: f64 = 1.5;
pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_GRID: Grid = Grid { start: 2.05, stop: 8.0, step: 0.05 };
pub const DEFAULT_AXIS: &str = "t";

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub state: Option<StateConfig>,
    #[serde(default)]
    pub observables: BTreeMap<String, ObservableConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub correlations: Vec<CorrelationConfig>,
    #[serde(default)]
    pub symmetries: BTreeMap<SymmetryKind, SymmetryConfig>,
    #[serde(default)]
    pub theorems: Vec<TheoremConfig>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub random_checks: Option<RandomChecksConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Rejects a field that does not belong to the chosen `kind`.
fn forbid(present: bool, field: &str, kind: &str) -> std::result::Result<(), String> {
    if present {
        Err(format!("`{field}` does not apply to kind `{kind}`"))
    } else {
        Ok(())
    }
}

fn require<T>(value: Option<T>, field: &str, kind: &str) -> std::result::Result<T, String> {
    value.ok_or_else(|| format!("kind `{kind}` needs field `{field}`"))
}

// Config objects selected by a `kind` field are read as flat structs and then
// converted, so type errors keep the path of the offending field.

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    Tfim,
    PauliSum,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: ModelKind,
    sites: Option<usize>,
    coupling: Option<f64>,
    field: Option<f64>,
    periodic: Option<bool>,
    t_breaking: Option<f64>,
    terms: Option<Vec<TermConfig>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(try_from = "RawModel")]
pub enum ModelConfig {
    /// H = −h Σ σ^z − λ Σ σ^x σ^x, optionally plus a T-breaking term.
    Tfim { sites: usize, coupling: f64, field: f64, periodic: bool, t_breaking: f64 },
    PauliSum { sites: usize, terms: Vec<TermConfig> },
}

impl TryFrom<RawModel> for ModelConfig {
    type Error = String;

    fn try_from(r: RawModel) -> std::result::Result<Self, String> {
        match r.kind {
            ModelKind::Tfim => {
                forbid(r.terms.is_some(), "terms", "tfim")?;
                Ok(ModelConfig::Tfim {
                    sites: r.sites.unwrap_or(DEFAULT_SITES),
                    coupling: r.coupling.unwrap_or(DEFAULT_COUPLING),
                    field: r.field.unwrap_or(1.0),
                    periodic: r.periodic.unwrap_or(true),
                    t_breaking: r.t_breaking.unwrap_or(0.0),
                })
            }
            ModelKind::PauliSum => {
                for (present, field) in [
                    (r.coupling.is_some(), "coupling"),
                    (r.field.is_some(), "field"),
                    (r.periodic.is_some(), "periodic"),
                    (r.t_breaking.is_some(), "t_breaking"),
                ] {
                    forbid(present, field, "pauli_sum")?;
                }
                Ok(ModelConfig::PauliSum { sites: require(r.sites, "sites", "pauli_sum")?, terms: require(r.terms, "terms", "pauli_sum")? })
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coeff: f64,
    pub factors: Vec<(usize, Pauli)>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum StateKind {
    ProductC,
    Thermal,
    MaximallyMixed,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    kind: StateKind,
    beta: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(try_from = "RawState")]
pub enum StateConfig {
    /// The C-symmetric product state ∏(I + σ^x_{2l−1} σ^y_{2l})/2 normalized.
    ProductC,
    Thermal { beta: f64 },
    MaximallyMixed,
}

impl TryFrom<RawState> for StateConfig {
    type Error = String;

    fn try_from(r: RawState) -> std::result::Result<Self, String> {
        match r.kind {
            StateKind::ProductC => forbid(r.beta.is_some(), "beta", "product_c").map(|_| StateConfig::ProductC),
            StateKind::Thermal => Ok(StateConfig::Thermal { beta: r.beta.unwrap_or(DEFAULT_BETA) }),
            StateKind::MaximallyMixed => forbid(r.beta.is_some(), "beta", "maximally_mixed").map(|_| StateConfig::MaximallyMixed),
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum ObservableKind {
    CollectiveZ,
    Pauli,
    PauliSum,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    kind: ObservableKind,
    factors: Option<Vec<(usize, Pauli)>>,
    terms: Option<Vec<TermConfig>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(try_from = "RawObservable")]
pub enum ObservableConfig {
    CollectiveZ,
    Pauli { factors: Vec<(usize, Pauli)> },
    PauliSum { terms: Vec<TermConfig> },
}

impl TryFrom<RawObservable> for ObservableConfig {
    type Error = String;

    fn try_from(r: RawObservable) -> std::result::Result<Self, String> {
        match r.kind {
            ObservableKind::CollectiveZ => {
                forbid(r.factors.is_some(), "factors", "collective_z")?;
                forbid(r.terms.is_some(), "terms", "collective_z")?;
                Ok(ObservableConfig::CollectiveZ)
            }
            ObservableKind::Pauli => {
                forbid(r.terms.is_some(), "terms", "pauli")?;
                Ok(ObservableConfig::Pauli { factors: require(r.factors, "factors", "pauli")? })
            }
            ObservableKind::PauliSum => {
                forbid(r.factors.is_some(), "factors", "pauli_sum")?;
                Ok(ObservableConfig::PauliSum { terms: require(r.terms, "terms", "pauli_sum")? })
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub axis: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
}

/// A single label used for every slot, or one label per slot.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Labels {
    One(String),
    Many(Vec<String>),
}

impl Labels {
    fn expand(&self, n: usize) -> Vec<String> {
        match self {
            Labels::One(l) => vec![l.clone(); n],
            Labels::Many(v) => v.clone(),
        }
    }
}

/// A time slot: a number, the axis name, `{"axis_plus": c}` or
/// `{"offset": a, "slope": b}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Fixed(f64),
    Axis(String),
    AxisPlus {
        axis_plus: f64,
    },
    Affine {
        offset: f64,
        slope: f64,
    },
}

impl TimeSpec {
    fn resolve(&self, axis: &str, path: &str) -> Result<TimeExpr> {
        match self {
            TimeSpec::Fixed(t) => Ok(TimeExpr::fixed(*t)),
            TimeSpec::Axis(name) if name == axis => Ok(TimeExpr::axis()),
            TimeSpec::Axis(name) => Err(Error::config(path, format!("unknown axis `{name}`, the grid axis is `{axis}`"))),
            TimeSpec::AxisPlus { axis_plus } => Ok(TimeExpr::axis_plus(*axis_plus)),
            TimeSpec::Affine { offset, slope } => Ok(TimeExpr { offset: *offset, slope: *slope }),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    #[serde(default)]
    pub ctoc: Option<EtaVector>,
    /// One-line σ: the slot indices σ(1)…σ(n), so the trace reads B_{σ(n)}…B_{σ(1)}.
    #[serde(default)]
    pub wightman: Option<Permutation>,
    pub observables: Labels,
    pub times: Vec<TimeSpec>,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum SymmetryConfigKind {
    TfimC,
    TfimT,
    Composed,
    Identity,
    Pauli,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymmetry {
    kind: SymmetryConfigKind,
    factors: Option<Vec<(usize, Pauli)>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(try_from = "RawSymmetry")]
pub enum SymmetryConfig {
    /// ∏ σ^x_{2l−1} σ^y_{2l}
    TfimC,
    /// ∏ σ^z_l
    TfimT,
    /// 𝒞·𝒯⁻¹ from the configured C and T
    Composed,
    Identity,
    Pauli { factors: Vec<(usize, Pauli)> },
}

impl TryFrom<RawSymmetry> for SymmetryConfig {
    type Error = String;

    fn try_from(r: RawSymmetry) -> std::result::Result<Self, String> {
        let plain = |config: SymmetryConfig, kind: &str| forbid(r.factors.is_some(), "factors", kind).map(|_| config);
        match r.kind {
            SymmetryConfigKind::TfimC => plain(SymmetryConfig::TfimC, "tfim_c"),
            SymmetryConfigKind::TfimT => plain(SymmetryConfig::TfimT, "tfim_t"),
            SymmetryConfigKind::Composed => plain(SymmetryConfig::Composed, "composed"),
            SymmetryConfigKind::Identity => plain(SymmetryConfig::Identity, "identity"),
            SymmetryConfigKind::Pauli => Ok(SymmetryConfig::Pauli { factors: require(r.factors.clone(), "factors", "pauli")? }),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremConfig {
    pub theorem: Theorem,
    pub sigma: Permutation,
    pub observables: Labels,
    pub times: Vec<TimeSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative tolerance of symmetry relations and parities.
    #[serde(default = "ToleranceConfig::default_symmetry")]
    pub symmetry: f64,
    /// Absolute tolerance of theorem equalities.
    #[serde(default = "ToleranceConfig::default_theorem")]
    pub theorem: f64,
    /// Zero / equality threshold of the `table1` and `fig4` assertions.
    #[serde(default = "ToleranceConfig::default_assertion")]
    pub assertion: f64,
    /// Agreement required between the two CTOC routes in random checks.
    #[serde(default = "ToleranceConfig::default_route")]
    pub route: f64,
}

impl ToleranceConfig {
    fn default_symmetry() -> f64 {
        1e-10
    }
    fn default_theorem() -> f64 {
        1e-9
    }
    fn default_assertion() -> f64 {
        1e-8
    }
    fn default_route() -> f64 {
        1e-12
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            symmetry: Self::default_symmetry(),
            theorem: Self::default_theorem(),
            assertion: Self::default_assertion(),
            route: Self::default_route(),
        }
    }
}

/// Random Hermitian instances comparing the two CTOC routes.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomChecksConfig {
    #[serde(default = "RandomChecksConfig::default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "RandomChecksConfig::default_min_sites")]
    pub min_sites: usize,
    #[serde(default = "RandomChecksConfig::default_max_sites")]
    pub max_sites: usize,
    #[serde(default = "RandomChecksConfig::default_max_order")]
    pub max_order: usize,
}

impl RandomChecksConfig {
    fn default_instances() -> usize {
        200
    }
    fn default_min_sites() -> usize {
        2
    }
    fn default_max_sites() -> usize {
        3
    }
    fn default_max_order() -> usize {
        4
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "OutputConfig::default_prefix")]
    pub prefix: String,
}

impl OutputConfig {
    fn default_prefix() -> String {
        "eval".into()
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, prefix: Self::default_prefix() }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
    pub grid_start: Option<f64>,
    pub grid_stop: Option<f64>,
    pub grid_step: Option<f64>,
    pub beta: Option<f64>,
    pub sites: Option<usize>,
    pub coupling: Option<f64>,
    pub seed: Option<u64>,
}

pub const DEFAULT_OUT: &str = "results";

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("$", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| Error::config("$", e.to_string()))?;
    Ok(config)
}

fn positive(value: f64, path: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::config(path, format!("must be a positive finite number, got {value}")))
    }
}

/// Settings shared by `table1` and `fig4`, after defaults, config and flags.
#[derive(Clone, Debug)]
pub struct StudySettings {
    pub sites: usize,
    pub coupling: f64,
    pub beta: f64,
    pub grid: Grid,
    pub tolerance: f64,
    pub out: PathBuf,
}

impl StudySettings {
    pub fn resolve(config: Option<&RunConfig>, ov: &Overrides) -> Result<Self> {
        let mut s = Self {
            sites: DEFAULT_SITES,
            coupling: DEFAULT_COUPLING,
            beta: DEFAULT_BETA,
            grid: DEFAULT_GRID,
            tolerance: ToleranceConfig::default().assertion,
            out: PathBuf::from(DEFAULT_OUT),
        };
        if let Some(c) = config {
            match &c.model {
                Some(ModelConfig::Tfim { sites, coupling, .. }) => {
                    s.sites = *sites;
                    s.coupling = *coupling;
                }
                Some(ModelConfig::PauliSum { .. }) => {
                    return Err(Error::config("model.kind", "this subcommand only runs the transverse-field Ising chain"))
                }
                None => {}
            }
            if let Some(StateConfig::Thermal { beta }) = &c.state {
                s.beta = *beta;
            }
            s.grid = c.grid_with(None)?;
            s.tolerance = c.tolerances.assertion;
            if let Some(dir) = &c.output.dir {
                s.out = dir.clone();
            }
        }
        s.sites = ov.sites.unwrap_or(s.sites);
        s.coupling = ov.coupling.unwrap_or(s.coupling);
        s.beta = ov.beta.unwrap_or(s.beta);
        s.grid = apply_grid_overrides(s.grid, ov);
        s.tolerance = ov.tolerance.unwrap_or(s.tolerance);
        if let Some(out) = &ov.out {
            s.out = out.clone();
        }
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        crate::operator::check_sites(self.sites, 2).map_err(|e| Error::config("model.sites", e.to_string()))?;
        if !self.sites.is_multiple_of(2) {
            return Err(Error::config("model.sites", format!("site count {} must be even", self.sites)));
        }
        if !self.coupling.is_finite() {
            return Err(Error::config("model.coupling", "must be finite"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::config("state.beta", format!("must be finite and non-negative, got {}", self.beta)));
        }
        positive(self.tolerance, "tolerances.assertion")?;
        self.grid.points().map_err(|e| Error::config("grid", e.to_string()))?;
        Ok(())
    }
}

fn apply_grid_overrides(grid: Grid, ov: &Overrides) -> Grid {
    Grid {
        start: ov.grid_start.unwrap_or(grid.start),
        stop: ov.grid_stop.unwrap_or(grid.stop),
        step: ov.grid_step.unwrap_or(grid.step),
    }
}

impl RunConfig {
    fn grid_with(&self, ov: Option<&Overrides>) -> Result<Grid> {
        let g = self.grid.clone().unwrap_or_default();
        let grid = Grid {
            start: g.start.unwrap_or(DEFAULT_GRID.start),
            stop: g.stop.unwrap_or(DEFAULT_GRID.stop),
            step: g.step.unwrap_or(DEFAULT_GRID.step),
        };
        Ok(match ov {
            Some(ov) => apply_grid_overrides(grid, ov),
            None => grid,
        })
    }

    fn axis(&self) -> String {
        self.grid.as_ref().and_then(|g| g.axis.clone()).unwrap_or_else(|| DEFAULT_AXIS.to_string())
    }

    /// Validates everything and builds the operators `eval` works with.
    pub fn build(&self, ov: &Overrides) -> Result<EvalPlan> {
        let tolerances = ToleranceConfig { theorem: ov.tolerance.unwrap_or(self.tolerances.theorem), ..self.tolerances };
        positive(tolerances.symmetry, "tolerances.symmetry")?;
        positive(tolerances.theorem, "tolerances.theorem")?;
        positive(tolerances.assertion, "tolerances.assertion")?;
        positive(tolerances.route, "tolerances.route")?;

        let model = self.model.clone().ok_or_else(|| Error::config("model", "missing field"))?;
        let (sites, hamiltonian) = build_model(&model, ov)?;
        let state = build_state(self.state.as_ref().ok_or_else(|| Error::config("state", "missing field"))?, &hamiltonian, sites, ov)?;

        let mut observables = ObservableSet::new();
        for (label, spec) in &self.observables {
            let path = format!("observables.{label}");
            let op = build_observable(spec, sites, &path)?;
            observables.insert(label.clone(), op).map_err(|e| Error::config(&path, e.to_string()))?;
        }

        let axis = self.axis();
        let grid_spec = self.grid_with(Some(ov))?;
        let grid = grid_spec.points().map_err(|e| Error::config("grid", e.to_string()))?;

        let mut templates = Vec::with_capacity(self.correlations.len());
        for (i, c) in self.correlations.iter().enumerate() {
            let path = format!("correlations[{i}]");
            let template = match (&c.ctoc, &c.wightman) {
                (Some(eta), None) => {
                    let (obs, times) = slots(&observables, &c.observables, &c.times, eta.len(), &axis, &path)?;
                    SweepTemplate::ctoc(eta.clone(), obs, times)
                }
                (None, Some(sigma)) => {
                    let (obs, times) = slots(&observables, &c.observables, &c.times, sigma.len(), &axis, &path)?;
                    SweepTemplate::wightman(sigma.clone(), obs, times)
                }
                _ => return Err(Error::config(&path, "exactly one of `ctoc` and `wightman` is required")),
            };
            let template = match &c.name {
                Some(name) => template.named(name.clone()),
                None => template,
            };
            check_ordering(&template.times, &grid, &axis, &format!("{path}.times"))?;
            if templates.iter().any(|t: &SweepTemplate| t.name == template.name) {
                return Err(Error::config(&path, format!("duplicate series name `{}`; set `name`", template.name)));
            }
            templates.push(template);
        }

        let mut symmetries = Vec::new();
        for (kind, spec) in &self.symmetries {
            let path = format!("symmetries.{kind}");
            match (kind, spec) {
                (SymmetryKind::S, SymmetryConfig::Composed) => {
                    if !(self.symmetries.contains_key(&SymmetryKind::C) && self.symmetries.contains_key(&SymmetryKind::T)) {
                        return Err(Error::config(&path, "`composed` needs both C and T to be configured"));
                    }
                }
                (_, SymmetryConfig::Composed) => return Err(Error::config(&path, "`composed` is only valid for S")),
                (SymmetryKind::T | SymmetryKind::S, SymmetryConfig::TfimC) | (SymmetryKind::C | SymmetryKind::S, SymmetryConfig::TfimT) => {
                    return Err(Error::config(&path, "transform does not match its symmetry kind"))
                }
                (_, SymmetryConfig::TfimC) if !sites.is_multiple_of(2) => {
                    return Err(Error::config(&path, "tfim_c needs an even number of sites"))
                }
                (_, SymmetryConfig::Pauli { factors }) => {
                    pauli_string(sites, factors).map_err(|e| Error::config(format!("{path}.factors"), e.to_string()))?;
                }
                _ => {}
            }
            symmetries.push((*kind, spec.clone()));
        }

        let mut theorems = Vec::with_capacity(self.theorems.len());
        for (i, t) in self.theorems.iter().enumerate() {
            let path = format!("theorems[{i}]");
            let kind = t.theorem.kind();
            if !self.symmetries.contains_key(&kind) {
                return Err(Error::config(format!("{path}.theorem"), format!("needs symmetry `{kind}` in `symmetries`")));
            }
            let (obs, times) = slots(&observables, &t.observables, &t.times, t.sigma.len(), &axis, &path)?;
            check_ordering(&times, &grid, &axis, &format!("{path}.times"))?;
            let depends_on_axis = times.iter().any(|e| e.slope != 0.0);
            theorems.push(TheoremPlan { theorem: t.theorem, sigma: t.sigma.clone(), observables: obs, times, depends_on_axis });
        }

        let random_checks = match self.random_checks {
            Some(mut r) => {
                if let Some(seed) = ov.seed {
                    r.seed = seed;
                }
                if r.min_sites == 0 || r.min_sites > r.max_sites || r.max_sites > 6 {
                    return Err(Error::config("random_checks", "need 1 ≤ min_sites ≤ max_sites ≤ 6"));
                }
                if r.max_order == 0 || r.max_order > 6 {
                    return Err(Error::config("random_checks.max_order", "must be in 1..=6"));
                }
                Some(r)
            }
            None => None,
        };

        let out = ov.out.clone().or_else(|| self.output.dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let prefix = &self.output.prefix;
        if prefix.is_empty() || prefix.contains(['/', '\\']) {
            return Err(Error::config("output.prefix", "must be a non-empty file name without separators"));
        }

        Ok(EvalPlan {
            sites,
            hamiltonian,
            state,
            observables,
            axis,
            grid,
            templates,
            symmetries,
            theorems,
            tolerances,
            random_checks,
            out,
            prefix: prefix.clone(),
        })
    }
}

fn build_model(model: &ModelConfig, ov: &Overrides) -> Result<(usize, QuantumOperator)> {
    match model {
        ModelConfig::Tfim { sites, coupling, field, periodic, t_breaking } => {
            let sites = ov.sites.unwrap_or(*sites);
            let coupling = ov.coupling.unwrap_or(*coupling);
            if !coupling.is_finite() || !field.is_finite() || !t_breaking.is_finite() {
                return Err(Error::config("model", "coupling, field and t_breaking must be finite"));
            }
            let mut h = build_tfim_with_field(sites, coupling, *field, *periodic).map_err(|e| Error::config("model.sites", e.to_string()))?;
            if *t_breaking != 0.0 {
                h = h.add(&t_breaking_term(sites, *t_breaking).map_err(|e| Error::config("model.t_breaking", e.to_string()))?)?;
            }
            Ok((sites, h))
        }
        ModelConfig::PauliSum { sites, terms } => {
            if ov.sites.is_some() || ov.coupling.is_some() {
                return Err(Error::config("model", "--n and --lambda only apply to the tfim model"));
            }
            Ok((*sites, build_terms(*sites, terms, "model.terms")?))
        }
    }
}

fn build_terms(sites: usize, terms: &[TermConfig], path: &str) -> Result<QuantumOperator> {
    crate::operator::check_sites(sites, 1).map_err(|e| Error::config(path, e.to_string()))?;
    for (i, t) in terms.iter().enumerate() {
        if !t.coeff.is_finite() {
            return Err(Error::config(format!("{path}[{i}].coeff"), "must be finite"));
        }
        pauli_string(sites, &t.factors).map_err(|e| Error::config(format!("{path}[{i}].factors"), e.to_string()))?;
    }
    let terms: Vec<(f64, Vec<(usize, Pauli)>)> = terms.iter().map(|t| (t.coeff, t.factors.clone())).collect();
    pauli_sum(sites, &terms).map_err(|e| Error::config(path, e.to_string()))
}

fn build_state(spec: &StateConfig, h: &QuantumOperator, sites: usize, ov: &Overrides) -> Result<DensityMatrix> {
    match spec {
        StateConfig::ProductC => product_state_c(sites).map_err(|e| Error::config("state", e.to_string())),
        StateConfig::Thermal { beta } => {
            let beta = ov.beta.unwrap_or(*beta);
            if !(beta.is_finite() && beta >= 0.0) {
                return Err(Error::config("state.beta", format!("must be finite and non-negative, got {beta}")));
            }
            thermal_state(h, beta).map_err(|e| Error::config("state.beta", e.to_string()))
        }
        StateConfig::MaximallyMixed => DensityMatrix::maximally_mixed(sites).map_err(|e| Error::config("state", e.to_string())),
    }
}

fn build_observable(spec: &ObservableConfig, sites: usize, path: &str) -> Result<QuantumOperator> {
    match spec {
        ObservableConfig::CollectiveZ => collective_z(sites).map_err(|e| Error::config(path, e.to_string())),
        ObservableConfig::Pauli { factors } => {
            pauli_string(sites, factors).map_err(|e| Error::config(format!("{path}.factors"), e.to_string()))
        }
        ObservableConfig::PauliSum { terms } => build_terms(sites, terms, &format!("{path}.terms")),
    }
}

fn slots(
    observables: &ObservableSet,
    labels: &Labels,
    times: &[TimeSpec],
    n: usize,
    axis: &str,
    path: &str,
) -> Result<(Vec<String>, Vec<TimeExpr>)> {
    let labels = labels.expand(n);
    if labels.len() != n {
        return Err(Error::config(format!("{path}.observables"), format!("expected {n} labels, found {}", labels.len())));
    }
    for (j, l) in labels.iter().enumerate() {
        if observables.get(l).is_none() {
            return Err(Error::config(format!("{path}.observables[{j}]"), format!("unknown observable `{l}`")));
        }
    }
    if times.len() != n {
        return Err(Error::config(format!("{path}.times"), format!("expected {n} times, found {}", times.len())));
    }
    let times = times
        .iter()
        .enumerate()
        .map(|(j, t)| t.resolve(axis, &format!("{path}.times[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok((labels, times))
}

fn check_ordering(times: &[TimeExpr], grid: &[f64], axis: &str, path: &str) -> Result<()> {
    for &x in grid {
        let values: Vec<f64> = times.iter().map(|t| t.at(x)).collect();
        if check_increasing(&values).is_err() {
            return Err(Error::config(path, format!("times must be strictly increasing; at {axis} = {x} they are {values:?}")));
        }
    }
    Ok(())
}

/// A theorem check over the grid (or at one point if no slot follows the axis).
#[derive(Clone, Debug)]
pub struct TheoremPlan {
    pub theorem: Theorem,
    pub sigma: Permutation,
    pub observables: Vec<String>,
    pub times: Vec<TimeExpr>,
    pub depends_on_axis: bool,
}

/// A validated configuration with its operators built.
#[derive(Debug)]
pub struct EvalPlan {
    pub sites: usize,
    pub hamiltonian: QuantumOperator,
    pub state: DensityMatrix,
    pub observables: ObservableSet,
    pub axis: String,
    pub grid: Vec<f64>,
    pub templates: Vec<SweepTemplate>,
    pub symmetries: Vec<(SymmetryKind, SymmetryConfig)>,
    pub theorems: Vec<TheoremPlan>,
    pub tolerances: ToleranceConfig,
    pub random_checks: Option<RandomChecksConfig>,
    pub out: PathBuf,
    pub prefix: String,
}
