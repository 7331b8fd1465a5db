//! Subcommand implementations. Each returns `Ok(true)` when every assertion
//! holds, `Ok(false)` when one is violated and `Err` for invalid input.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{EvalPlan, RandomChecksConfig, StudySettings, SymmetryConfig, TheoremPlan};
use crate::contour::{enumerate_ranks, EtaVector, Permutation, Sign, MAX_ENUMERATION_ORDER};
use crate::correlation::{CtocSpec, Evaluator, ObservableSet, WightmanSpec};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{build_tfim, collective_z, pauli_string, product_state_c, t_breaking_term, thermal_state, Pauli};
use crate::operator::{DensityMatrix, QuantumOperator};
use crate::random;
use crate::sweep::{format_number, Grid, Series, SweepResult, SweepTemplate, TimeExpr};
use crate::symmetry::{
    compose_s, observable_parity, selection_rule, symmetry_residuals, tfim_c_transform, tfim_t_transform, verify_theorem1,
    verify_theorem2, verify_theorem3, SelectionVerdict, SymmetryKind, SymmetryResiduals, SymmetryTransform, Theorem,
    TheoremReport, VerifyOptions, SYMMETRY_TOL,
};

/// An allowed correlation counts as visibly nonzero above this value.
pub const NONZERO_FLOOR: f64 = 1e-3;

/// Strength of the T-breaking term used by `fig4 b --break-t-symmetry`.
pub const T_BREAKING_STRENGTH: f64 = 0.5;

const T1: f64 = 0.0;
const T2: f64 = 2.0;

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Series times for a CTOC of order 2 (t₁ = 0, t₂ = x) or 3 (t₁ = 0, t₂ = 2, t₃ = x).
fn study_times(order: usize) -> Vec<TimeExpr> {
    match order {
        2 => vec![TimeExpr::fixed(T1), TimeExpr::axis()],
        _ => vec![TimeExpr::fixed(T1), TimeExpr::fixed(T2), TimeExpr::axis()],
    }
}

fn study_grid(s: &StudySettings, latest_fixed: f64) -> Result<Vec<f64>> {
    let grid = s.grid.points().map_err(|e| Error::config("grid", e.to_string()))?;
    if grid[0] <= latest_fixed {
        return Err(Error::config("grid.start", format!("must exceed t2 = {latest_fixed}, got {}", grid[0])));
    }
    Ok(grid)
}

#[derive(Serialize)]
struct GridSummary {
    axis: &'static str,
    start: f64,
    stop: f64,
    step: f64,
    points: usize,
}

impl GridSummary {
    fn new(axis: &'static str, grid: Grid, points: usize) -> Self {
        Self { axis, start: grid.start, stop: grid.stop, step: grid.step, points }
    }
}

#[derive(Serialize)]
struct Table1Cell {
    row: &'static str,
    observable: &'static str,
    alpha: i8,
    eta: String,
    predicted: &'static str,
    verdict: SelectionVerdict,
    max_abs: f64,
    confirmed: bool,
}

#[derive(Serialize)]
struct Table1Report {
    sites: usize,
    coupling: f64,
    state: &'static str,
    times: &'static str,
    grid: GridSummary,
    tolerance: f64,
    nonzero_floor: f64,
    c_symmetry: SymmetryResiduals,
    cells: Vec<Table1Cell>,
    pass: bool,
}

const TABLE1_COLUMNS: [&str; 6] = ["+-", "++", "+--", "++-", "+-+", "+++"];

/// C-symmetric TFIM setup: H, product-C state and 𝒞.
fn c_setup(s: &StudySettings) -> Result<(QuantumOperator, DensityMatrix, SymmetryTransform, SymmetryResiduals)> {
    let h = build_tfim(s.sites, s.coupling, true)?;
    let rho = product_state_c(s.sites)?;
    let c = tfim_c_transform(s.sites)?;
    let residuals = symmetry_residuals(&c, &h, &rho)?;
    if !residuals.holds(SYMMETRY_TOL) {
        return Err(Error::Precondition(format!("C symmetry does not hold for the chain: {residuals:?}")));
    }
    Ok((h, rho, c, residuals))
}

fn ctoc_templates(columns: &[&str]) -> Result<Vec<SweepTemplate>> {
    columns
        .iter()
        .map(|col| {
            let eta: EtaVector = col.parse()?;
            let n = eta.len();
            Ok(SweepTemplate::ctoc(eta, vec!["B".into(); n], study_times(n)))
        })
        .collect()
}

pub fn table1(s: &StudySettings, out: &mut dyn Write) -> Result<bool> {
    let grid = study_grid(s, T2)?;
    let (h, rho, c, c_residuals) = c_setup(s)?;
    let rows: [(&str, &str, QuantumOperator); 2] = [
        ("anti_symmetric", "collective_z", collective_z(s.sites)?),
        ("symmetric", "sigma_y_1", pauli_string(s.sites, &[(1, Pauli::Y)])?),
    ];
    let templates = ctoc_templates(&TABLE1_COLUMNS)?;

    writeln!(
        out,
        "table1: N={} lambda={} state=product_c t=({T1}, t) and ({T1}, {T2}, t), t in [{}, {}] step {} ({} points), tolerance {:e}",
        s.sites,
        s.coupling,
        s.grid.start,
        s.grid.stop,
        s.grid.step,
        grid.len(),
        s.tolerance
    )?;
    let mut cells = Vec::new();
    let mut series = Vec::new();
    for (row, observable, op) in rows {
        let alpha = observable_parity(&c, &op, SYMMETRY_TOL)?
            .ok_or_else(|| Error::Precondition(format!("{observable} has no definite C-parity")))?
            .value;
        let ev = Evaluator::new(&h, &rho, &ObservableSet::single("B", op)?)?;
        let result = ev.sweep("t", &grid, &templates)?;
        for (template, values) in templates.iter().zip(result.series) {
            let crate::sweep::TemplateKind::Ctoc(eta) = &template.kind else { unreachable!() };
            let verdict = selection_rule(eta, &vec![alpha; eta.len()])?;
            let max_abs = values.max_abs();
            let confirmed = match verdict {
                SelectionVerdict::Forbidden => max_abs <= s.tolerance,
                SelectionVerdict::Allowed => max_abs >= NONZERO_FLOOR,
            };
            let predicted = if verdict == SelectionVerdict::Forbidden { "0" } else { "-" };
            writeln!(
                out,
                "  {row:<14} alpha={alpha:+} C^{{{eta}}}{pad} predicted {predicted}  max|C| = {max_abs:.3e}  {}",
                if confirmed { "ok" } else { "VIOLATED" },
                pad = " ".repeat(4 - eta.len()),
            )?;
            cells.push(Table1Cell { row, observable, alpha, eta: eta.to_string(), predicted, verdict, max_abs, confirmed });
            series.push(Series { name: format!("{row}/{}", values.name), values: values.values });
        }
    }
    let pass = cells.iter().all(|c| c.confirmed);
    let confirmed = cells.iter().filter(|c| c.confirmed).count();

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["row", "observable", "alpha", "eta", "predicted", "max_abs", "confirmed"])?;
    for c in &cells {
        csv.write_record([
            c.row,
            c.observable,
            &c.alpha.to_string(),
            &c.eta,
            c.predicted,
            &format_number(c.max_abs),
            &c.confirmed.to_string(),
        ])?;
    }
    let csv = String::from_utf8(csv.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8");
    write_output(&s.out, "table1.csv", &csv)?;
    let sweep = SweepResult { axis: "t".into(), grid: grid.clone(), series };
    write_output(&s.out, "table1_series.csv", &sweep.to_csv_string()?)?;
    let report = Table1Report {
        sites: s.sites,
        coupling: s.coupling,
        state: "product_c",
        times: "order 2: (0, t); order 3: (0, 2, t)",
        grid: GridSummary::new("t", s.grid, grid.len()),
        tolerance: s.tolerance,
        nonzero_floor: NONZERO_FLOOR,
        c_symmetry: c_residuals,
        cells,
        pass,
    };
    write_output(&s.out, "table1.json", &to_json(&report)?)?;
    writeln!(out, "{} table1: {confirmed}/{} cells confirmed", verdict_word(pass), report.cells.len())?;
    Ok(pass)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Fig4Variant {
    A,
    B,
}

#[derive(Serialize)]
struct PatternEntry {
    name: String,
    expected: &'static str,
    max_abs: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Fig4aReport {
    variant: &'static str,
    sites: usize,
    coupling: f64,
    state: &'static str,
    times: &'static str,
    grid: GridSummary,
    tolerance: f64,
    nonzero_floor: f64,
    series: Vec<PatternEntry>,
    pass: bool,
}

#[derive(Serialize)]
struct Fig4bReport {
    variant: &'static str,
    sites: usize,
    coupling: f64,
    beta: f64,
    t_breaking: f64,
    t_symmetry: SymmetryResiduals,
    times: &'static str,
    grid: GridSummary,
    tolerance: f64,
    max_deviation_re: f64,
    max_deviation_im: f64,
    worst_t: f64,
    pass: bool,
}

pub fn fig4(variant: Fig4Variant, break_t_symmetry: bool, s: &StudySettings, out: &mut dyn Write) -> Result<bool> {
    match variant {
        Fig4Variant::A => {
            if break_t_symmetry {
                return Err(Error::config("--break-t-symmetry", "only applies to variant b"));
            }
            fig4a(s, out)
        }
        Fig4Variant::B => fig4b(s, break_t_symmetry, out),
    }
}

fn fig4a(s: &StudySettings, out: &mut dyn Write) -> Result<bool> {
    let grid = study_grid(s, T2)?;
    let (h, rho, _, _) = c_setup(s)?;
    let ev = Evaluator::new(&h, &rho, &ObservableSet::single("B", collective_z(s.sites)?)?)?;
    let columns = ["+--", "++-", "+-+", "+++"];
    let expected_zero = [true, false, false, true];
    let result = ev.sweep("t3", &grid, &ctoc_templates(&columns)?)?;
    writeln!(
        out,
        "fig4 a: N={} lambda={} state=product_c t1={T1} t2={T2} t3 in [{}, {}] ({} points), tolerance {:e}",
        s.sites,
        s.coupling,
        s.grid.start,
        s.grid.stop,
        grid.len(),
        s.tolerance
    )?;
    let mut entries = Vec::new();
    for (series, zero) in result.series.iter().zip(expected_zero) {
        let max_abs = series.max_abs();
        let pass = if zero { max_abs <= s.tolerance } else { max_abs >= NONZERO_FLOOR };
        writeln!(
            out,
            "  {:<7} expected {:<7} max|C| = {max_abs:.3e}  {}",
            series.name,
            if zero { "zero" } else { "nonzero" },
            if pass { "ok" } else { "VIOLATED" }
        )?;
        entries.push(PatternEntry { name: series.name.clone(), expected: if zero { "zero" } else { "nonzero" }, max_abs, pass });
    }
    let pass = entries.iter().all(|e| e.pass);
    write_output(&s.out, "fig4a.csv", &result.to_csv_string()?)?;
    let report = Fig4aReport {
        variant: "a",
        sites: s.sites,
        coupling: s.coupling,
        state: "product_c",
        times: "(0, 2, t3)",
        grid: GridSummary::new("t3", s.grid, grid.len()),
        tolerance: s.tolerance,
        nonzero_floor: NONZERO_FLOOR,
        series: entries,
        pass,
    };
    write_output(&s.out, "fig4a.json", &to_json(&report)?)?;
    writeln!(out, "{} fig4 a", verdict_word(pass))?;
    Ok(pass)
}

/// W^{213}(t₁, t₂, t₃) = Tr[B(t₂)B(t₁)B(t₃)ρ] and its T-partner
/// W^{21′3} = Tr[B(t₂)B(t₁′)B(t₃)ρ] with t₁′ = t₃ + t₂ − t₁, written with
/// ascending slot times (t₂, t₃, t₁′).
pub fn fig4b_templates() -> Vec<SweepTemplate> {
    let b = || vec!["B".to_string(); 3];
    let sigma = Permutation::new(vec![3, 1, 2]).expect("valid permutation");
    let partner = Permutation::new(vec![2, 3, 1]).expect("valid permutation");
    vec![
        SweepTemplate::wightman(sigma, b(), vec![TimeExpr::fixed(T1), TimeExpr::fixed(T2), TimeExpr::axis()]),
        SweepTemplate::wightman(partner, b(), vec![TimeExpr::fixed(T2), TimeExpr::axis(), TimeExpr::axis_plus(T2 - T1)])
            .named("W:21'3"),
    ]
}

fn fig4b(s: &StudySettings, break_t: bool, out: &mut dyn Write) -> Result<bool> {
    let grid = study_grid(s, T2)?;
    let mut h = build_tfim(s.sites, s.coupling, true)?;
    let t_breaking = if break_t { T_BREAKING_STRENGTH } else { 0.0 };
    if break_t {
        h = h.add(&t_breaking_term(s.sites, t_breaking)?)?;
    }
    let rho = thermal_state(&h, s.beta)?;
    let t_symmetry = symmetry_residuals(&tfim_t_transform(s.sites)?, &h, &rho)?;
    let ev = Evaluator::new(&h, &rho, &ObservableSet::single("B", collective_z(s.sites)?)?)?;
    let result = ev.sweep("t3", &grid, &fig4b_templates())?;
    let (w, partner) = (&result.series[0], &result.series[1]);
    let (mut dre, mut dim, mut worst_t, mut worst) = (0.0f64, 0.0f64, grid[0], -1.0f64);
    for (i, &x) in grid.iter().enumerate() {
        let d = w.complex_at(i) - partner.complex_at(i);
        dre = dre.max(d.re.abs());
        dim = dim.max(d.im.abs());
        if d.norm() > worst {
            worst = d.norm();
            worst_t = x;
        }
    }
    let pass = dre <= s.tolerance && dim <= s.tolerance;
    writeln!(
        out,
        "fig4 b: N={} lambda={} beta={} t_breaking={} t1={T1} t2={T2} t3 in [{}, {}] ({} points), tolerance {:e}",
        s.sites,
        s.coupling,
        s.beta,
        t_breaking,
        s.grid.start,
        s.grid.stop,
        grid.len(),
        s.tolerance
    )?;
    writeln!(out, "  max|Re(W:213 - W:21'3)| = {dre:.3e}  max|Im(W:213 - W:21'3)| = {dim:.3e}  worst at t3 = {worst_t}")?;
    write_output(&s.out, "fig4b.csv", &result.to_csv_string()?)?;
    let report = Fig4bReport {
        variant: "b",
        sites: s.sites,
        coupling: s.coupling,
        beta: s.beta,
        t_breaking,
        t_symmetry,
        times: "W:213 at (0, 2, t3); W:21'3 at (2, t3, t3 + 2)",
        grid: GridSummary::new("t3", s.grid, grid.len()),
        tolerance: s.tolerance,
        max_deviation_re: dre,
        max_deviation_im: dim,
        worst_t,
        pass,
    };
    write_output(&s.out, "fig4b.json", &to_json(&report)?)?;
    writeln!(out, "{} fig4 b", verdict_word(pass))?;
    Ok(pass)
}

pub fn ranks(order: usize, dir: &Path, out: &mut dyn Write) -> Result<bool> {
    if order == 0 || order > MAX_ENUMERATION_ORDER {
        return Err(Error::config("order", format!("must be in 1..={MAX_ENUMERATION_ORDER}, got {order}")));
    }
    let hist = enumerate_ranks(order)?;
    writeln!(out, "rank  count")?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["rank", "count"])?;
    for (rank, count) in &hist.counts {
        writeln!(out, "{rank:<5} {count}")?;
        csv.write_record([rank.to_string(), count.to_string()])?;
    }
    writeln!(out, "total {}", hist.total())?;
    let csv = String::from_utf8(csv.into_inner().map_err(|e| e.into_error())?).expect("csv output is UTF-8");
    write_output(dir, &format!("ranks_n{order}.csv"), &csv)?;
    Ok(true)
}

#[derive(Serialize)]
struct SymmetryEntry {
    kind: SymmetryKind,
    transform: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<SymmetryResiduals>,
    holds: bool,
    /// ±1, or null when the observable has no definite parity.
    parities: BTreeMap<String, Option<i8>>,
}

#[derive(Serialize)]
struct TheoremEntry {
    theorem: Theorem,
    sigma: Permutation,
    observables: Vec<String>,
    points: usize,
    max_deviation: f64,
    tolerance: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst: Option<TheoremReport>,
}

#[derive(Serialize)]
struct RandomCheckEntry {
    instances: usize,
    seed: u64,
    max_deviation: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct EvalReport {
    sites: usize,
    axis: String,
    grid_points: usize,
    grid_start: f64,
    grid_stop: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    series_file: Option<String>,
    series_max_abs: BTreeMap<String, f64>,
    symmetries: Vec<SymmetryEntry>,
    theorems: Vec<TheoremEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    random_checks: Option<RandomCheckEntry>,
    pass: bool,
}

fn build_transform(
    kind: SymmetryKind,
    spec: &SymmetryConfig,
    plan: &EvalPlan,
    built: &BTreeMap<SymmetryKind, std::result::Result<SymmetryTransform, String>>,
) -> std::result::Result<SymmetryTransform, String> {
    let result = match spec {
        SymmetryConfig::TfimC => tfim_c_transform(plan.sites),
        SymmetryConfig::TfimT => tfim_t_transform(plan.sites),
        SymmetryConfig::Identity => SymmetryTransform::new(kind, CMatrix::identity(plan.state.dim(), plan.state.dim())),
        SymmetryConfig::Pauli { factors } => SymmetryTransform::from_pauli_string(kind, plan.sites, factors),
        SymmetryConfig::Composed => {
            let c = built[&SymmetryKind::C].as_ref().map_err(|e| format!("C unavailable: {e}"))?;
            let t = built[&SymmetryKind::T].as_ref().map_err(|e| format!("T unavailable: {e}"))?;
            compose_s(c, t, &plan.hamiltonian, &plan.state, plan.tolerances.symmetry)
        }
    };
    result.map_err(|e| e.to_string())
}

fn transform_name(spec: &SymmetryConfig) -> String {
    match spec {
        SymmetryConfig::TfimC => "tfim_c".into(),
        SymmetryConfig::TfimT => "tfim_t".into(),
        SymmetryConfig::Composed => "composed".into(),
        SymmetryConfig::Identity => "identity".into(),
        SymmetryConfig::Pauli { factors } => {
            factors.iter().map(|(site, p)| format!("{p}{site}")).collect::<Vec<_>>().join(" ")
        }
    }
}

fn run_theorem(
    ev: &Evaluator,
    plan: &EvalPlan,
    t: &TheoremPlan,
    transforms: &BTreeMap<SymmetryKind, std::result::Result<SymmetryTransform, String>>,
) -> Result<TheoremEntry> {
    let opts = VerifyOptions { symmetry_tol: plan.tolerances.symmetry, theorem_tol: plan.tolerances.theorem };
    let mut entry = TheoremEntry {
        theorem: t.theorem,
        sigma: t.sigma.clone(),
        observables: t.observables.clone(),
        points: 0,
        max_deviation: 0.0,
        tolerance: opts.theorem_tol,
        pass: false,
        error: None,
        worst: None,
    };
    let tr = match &transforms[&t.theorem.kind()] {
        Ok(tr) => tr,
        Err(e) => {
            entry.error = Some(e.clone());
            return Ok(entry);
        }
    };
    let points: &[f64] = if t.depends_on_axis { &plan.grid } else { &plan.grid[..1] };
    for &x in points {
        let times: Vec<f64> = t.times.iter().map(|e| e.at(x)).collect();
        let spec = WightmanSpec::new(t.sigma.clone(), times, t.observables.clone())?;
        let report = match t.theorem {
            Theorem::ParticleHole => verify_theorem1(ev, &spec, tr, opts),
            Theorem::TimeReversal => verify_theorem2(ev, &spec, tr, opts),
            Theorem::Chiral => verify_theorem3(ev, &spec, tr, opts),
        };
        let report = match report {
            Ok(r) => r,
            Err(Error::Precondition(msg)) => {
                entry.error = Some(msg);
                return Ok(entry);
            }
            Err(e) => return Err(e),
        };
        entry.points += 1;
        if entry.worst.as_ref().is_none_or(|w| report.max_deviation > w.max_deviation) {
            entry.max_deviation = report.max_deviation;
            entry.worst = Some(report);
        }
    }
    entry.pass = entry.max_deviation <= entry.tolerance;
    Ok(entry)
}

/// Random Hermitian instances: nested-superoperator CTOC vs its Wightman expansion.
pub fn random_route_check(cfg: &RandomChecksConfig) -> Result<f64> {
    let mut rng = random::rng(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..cfg.instances {
        use rand::Rng;
        let sites = rng.random_range(cfg.min_sites..=cfg.max_sites);
        let dim = 1usize << sites;
        let n = rng.random_range(1..=cfg.max_order);
        let mut signs: Vec<Sign> = (0..n - 1).map(|_| if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus }).collect();
        signs.push(Sign::Plus);
        let eta = EtaVector::new(signs)?;
        let h = random::random_hermitian(&mut rng, dim)?;
        let rho = random::random_density(&mut rng, dim)?;
        let mut obs = ObservableSet::new();
        let mut labels = Vec::with_capacity(n);
        for j in 1..=n {
            let label = format!("B{j}");
            obs.insert(label.clone(), random::random_hermitian(&mut rng, dim)?)?;
            labels.push(label);
        }
        let times = random::random_times(&mut rng, n, 5.0);
        let ev = Evaluator::new(&h, &rho, &obs)?;
        let spec = CtocSpec::new(eta, times, labels)?;
        let direct = ev.ctoc_direct(&spec)?;
        let expanded = ev.ctoc_via_expansion(&spec)?;
        worst = worst.max((direct - expanded).abs());
    }
    Ok(worst)
}

pub fn eval(plan: &EvalPlan, out: &mut dyn Write) -> Result<bool> {
    let ev = Evaluator::new(&plan.hamiltonian, &plan.state, &plan.observables)?;
    writeln!(
        out,
        "eval: N={} {} = [{}, {}] ({} points)",
        plan.sites,
        plan.axis,
        plan.grid[0],
        plan.grid[plan.grid.len() - 1],
        plan.grid.len()
    )?;

    let mut series_file = None;
    let mut series_max_abs = BTreeMap::new();
    if !plan.templates.is_empty() {
        let result = ev.sweep(&plan.axis, &plan.grid, &plan.templates)?;
        let name = format!("{}.csv", plan.prefix);
        write_output(&plan.out, &name, &result.to_csv_string()?)?;
        for s in &result.series {
            writeln!(out, "  series {:<12} max|value| = {:.3e}", s.name, s.max_abs())?;
            series_max_abs.insert(s.name.clone(), s.max_abs());
        }
        series_file = Some(name);
    }

    // C and T before S so that a composed S can use them
    let mut transforms = BTreeMap::new();
    let order = [SymmetryKind::C, SymmetryKind::T, SymmetryKind::S];
    for kind in order {
        if let Some((_, spec)) = plan.symmetries.iter().find(|(k, _)| *k == kind) {
            let tr = build_transform(kind, spec, plan, &transforms);
            transforms.insert(kind, tr);
        }
    }
    let mut symmetries = Vec::new();
    for (kind, spec) in &plan.symmetries {
        let mut entry = SymmetryEntry {
            kind: *kind,
            transform: transform_name(spec),
            error: None,
            residuals: None,
            holds: false,
            parities: BTreeMap::new(),
        };
        match &transforms[kind] {
            Ok(tr) => {
                let r = symmetry_residuals(tr, &plan.hamiltonian, &plan.state)?;
                entry.holds = r.holds(plan.tolerances.symmetry);
                entry.residuals = Some(r);
                for (label, op) in plan.observables.iter() {
                    let p = observable_parity(tr, op, plan.tolerances.symmetry)?.map(|p| p.value);
                    entry.parities.insert(label.to_string(), p);
                }
            }
            Err(e) => entry.error = Some(e.clone()),
        }
        writeln!(
            out,
            "  symmetry {kind} ({}): {}",
            entry.transform,
            match (&entry.error, entry.holds) {
                (Some(e), _) => format!("unavailable: {e}"),
                (None, true) => "holds".to_string(),
                (None, false) => "does not hold".to_string(),
            }
        )?;
        symmetries.push(entry);
    }

    let mut theorems = Vec::new();
    for t in &plan.theorems {
        let entry = run_theorem(&ev, plan, t, &transforms)?;
        writeln!(
            out,
            "  {:?} sigma={} over {} point(s): max deviation {:.3e}  {}",
            entry.theorem,
            entry.sigma,
            entry.points,
            entry.max_deviation,
            match &entry.error {
                Some(e) => format!("FAIL ({e})"),
                None => verdict_word(entry.pass).to_string(),
            }
        )?;
        theorems.push(entry);
    }

    let random_checks = match &plan.random_checks {
        Some(cfg) => {
            let max_deviation = random_route_check(cfg)?;
            let pass = max_deviation <= plan.tolerances.route;
            writeln!(
                out,
                "  random route checks: {} instances, seed {}, max deviation {max_deviation:.3e}  {}",
                cfg.instances,
                cfg.seed,
                verdict_word(pass)
            )?;
            Some(RandomCheckEntry { instances: cfg.instances, seed: cfg.seed, max_deviation, tolerance: plan.tolerances.route, pass })
        }
        None => None,
    };

    let pass = theorems.iter().all(|t| t.pass) && random_checks.as_ref().is_none_or(|r| r.pass);
    let report = EvalReport {
        sites: plan.sites,
        axis: plan.axis.clone(),
        grid_points: plan.grid.len(),
        grid_start: plan.grid[0],
        grid_stop: plan.grid[plan.grid.len() - 1],
        series_file,
        series_max_abs,
        symmetries,
        theorems,
        random_checks,
        pass,
    };
    write_output(&plan.out, &format!("{}.json", plan.prefix), &to_json(&report)?)?;
    writeln!(out, "{} eval", verdict_word(pass))?;
    Ok(pass)
}
