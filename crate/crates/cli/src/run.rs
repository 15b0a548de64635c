//! Executes the operations of an experiment and writes one CSV per operation
//! plus `summary.csv`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use orbital::{
    almost_periodicity_test, census, classify_module, covering_index, exact_arc_cover, expectation_field, field_grid,
    folner_average, inner_product, invariant_measure_estimate, lattice_subset, orbit_closure_average, orbit_probe,
    stability_probe, uniform_continuity_probe, uniqueness_check, ActionScenario, ApParams, ApVerdict, AverageReport, AveragingConfig,
    CensusParams, ClassifyParams, CompactSubset, Complex64, ContinuityVerdict, FieldParams, FieldReport, MeasureParams,
    ModuleClassification, OrbitCensus, OrbitVerdict, Point, ProbeParams, StabilityReport,
};

use crate::config::{CensusSpec, ExperimentConfig, GridSpec, Operation, ProbeSpec, RegionSpec, RunRequest, Tolerances};
use crate::error::{CliError, Result};

/// Version of every CSV layout written by this binary.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpStatus {
    Ok,
    NonConverged,
    Error,
}

impl OpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OpStatus::Ok => "ok",
            OpStatus::NonConverged => "non-converged",
            OpStatus::Error => "error",
        }
    }

    fn worst(self, other: OpStatus) -> OpStatus {
        let rank = |s: OpStatus| match s {
            OpStatus::Ok => 0,
            OpStatus::NonConverged => 1,
            OpStatus::Error => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for OpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Comparison of an operation result with the fixture's recorded ground truth.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthCheck {
    NotApplicable,
    Pass(String),
    Fail(String),
}

impl TruthCheck {
    pub fn as_str(&self) -> &'static str {
        match self {
            TruthCheck::NotApplicable => "n/a",
            TruthCheck::Pass(_) => "pass",
            TruthCheck::Fail(_) => "fail",
        }
    }

    fn from_checks(checks: Vec<(bool, String)>) -> Self {
        if checks.is_empty() {
            return TruthCheck::NotApplicable;
        }
        let text = checks.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join("; ");
        if checks.iter().all(|(ok, _)| *ok) {
            TruthCheck::Pass(text)
        } else {
            TruthCheck::Fail(text)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpSummary {
    pub run: String,
    pub operation: &'static str,
    pub status: OpStatus,
    pub rows: usize,
    pub output: PathBuf,
    pub tolerances: Tolerances,
    pub truth: TruthCheck,
    pub detail: String,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub operations: Vec<OpSummary>,
    pub summary_path: PathBuf,
}

impl RunSummary {
    /// No operation errored and every ground-truth comparison passed.
    pub fn success(&self) -> bool {
        self.operations.iter().all(|o| o.status != OpStatus::Error && !matches!(o.truth, TruthCheck::Fail(_)))
    }

    pub fn exit_code(&self) -> u8 {
        if self.success() {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.operations {
            writeln!(
                f,
                "run {:>3}  {:<22} {:<14} truth={:<4} {:>9.3}s  {}",
                o.run,
                o.operation,
                o.status,
                o.truth.as_str(),
                o.wall_time.as_secs_f64(),
                o.output.display()
            )?;
            if !o.detail.is_empty() {
                writeln!(f, "         {}", o.detail)?;
            }
            if let TruthCheck::Pass(s) | TruthCheck::Fail(s) = &o.truth {
                writeln!(f, "         ground truth: {s}")?;
            }
        }
        write!(f, "{}", if self.success() { "all operations succeeded" } else { "run FAILED" })
    }
}

/// Rows of one CSV file; the schema_version column is added on write.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let version = SCHEMA_VERSION.to_string();
        w.write_record(std::iter::once("schema_version").chain(self.header.iter().copied())).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(std::iter::once(version.as_str()).chain(row.iter().map(String::as_str))).map_err(csv_err)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

pub fn num(x: f64) -> String {
    x.to_string()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn averaging(t: Tolerances) -> AveragingConfig {
    AveragingConfig { tol: t.tol, n_max: t.n_max, ..AveragingConfig::default() }
}

/// Result of one operation before it is written out.
struct Outcome {
    table: Table,
    status: OpStatus,
    truth: TruthCheck,
    detail: String,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome { table, status: OpStatus::Ok, truth: TruthCheck::NotApplicable, detail: String::new() }
    }

    fn failed(table: Table, err: orbital::Error) -> Self {
        Outcome { table, status: OpStatus::Error, truth: TruthCheck::NotApplicable, detail: err.to_string() }
    }

    fn note(&mut self, status: OpStatus) {
        self.status = self.status.worst(status);
    }
}

fn report_status(r: &AverageReport) -> OpStatus {
    if r.converged {
        OpStatus::Ok
    } else {
        OpStatus::NonConverged
    }
}

fn average_cells(r: &AverageReport) -> Vec<String> {
    vec![
        num(r.value.re),
        num(r.value.im),
        r.converged.to_string(),
        r.stages.len().to_string(),
        opt(r.stages.last().map(|s| s.0)),
        opt(r.finite_orbit),
    ]
}

fn error_row(width: usize, lead: Vec<String>, err: &orbital::Error) -> Vec<String> {
    let mut row = lead;
    row.resize(width - 2, String::new());
    row.push(OpStatus::Error.to_string());
    row.push(err.to_string());
    row
}

/// Per-point Følner averages, checked against any recorded mean for the same
/// point and function.
fn run_averages(
    scenario: &ActionScenario,
    function: &str,
    points: &[Point],
    eval: impl Fn(&Point) -> orbital::Result<AverageReport>,
) -> Outcome {
    let header =
        ["point_repr", "function", "value_re", "value_im", "converged", "stages", "final_index", "finite_orbit", "status", "message"];
    let mut out = Outcome::new(Table::new(&header));
    let mut checks = Vec::new();
    for x in points {
        match eval(x) {
            Ok(r) => {
                let status = report_status(&r);
                out.note(status);
                let mut row = vec![x.to_string(), function.to_string()];
                row.extend(average_cells(&r));
                row.extend([status.to_string(), String::new()]);
                out.table.push(row);
                for m in scenario.ground_truth().means.iter().filter(|m| m.function == function) {
                    let at = scenario.space().parse_point(m.point).ok();
                    if at.is_some_and(|p| scenario.space().same_point(&p, x)) {
                        let dev = (r.value - Complex64::new(m.value, 0.0)).norm();
                        let ok = r.converged && dev <= m.tol;
                        checks.push((ok, format!("mean of {function} at {x} = {} (expected {} within {})", r.value.re, m.value, m.tol)));
                    }
                }
            }
            Err(e) => {
                out.note(OpStatus::Error);
                out.table.push(error_row(header.len(), vec![x.to_string(), function.to_string()], &e));
            }
        }
    }
    out.truth = TruthCheck::from_checks(checks);
    out
}

pub fn field_detail(report: &FieldReport) -> String {
    match &report.verdict {
        ContinuityVerdict::JumpDetected { location, magnitude } => format!(
            "Jump-detected: magnitude {magnitude:.4} between {} and {} (window {:.4})",
            location.0, location.1, report.jump_window
        ),
        ContinuityVerdict::ContinuousAtResolution => {
            format!("Continuous-at-resolution: largest jump {:.4} (window {:.4})", report.max_jump, report.jump_window)
        }
    }
}

pub fn field_table(report: &FieldReport) -> Table {
    let mut t = Table::new(&["point_repr", "value_re", "value_im", "converged", "stages"]);
    for (p, r) in report.grid.iter().zip(&report.reports) {
        t.push(vec![p.to_string(), num(r.value.re), num(r.value.im), r.converged.to_string(), r.stages.len().to_string()]);
    }
    t
}

/// Compares a field verdict with the fixture's recorded continuity truth.
pub fn field_truth(scenario: &ActionScenario, function: &str, report: &FieldReport) -> TruthCheck {
    let truth = scenario.ground_truth();
    match truth.field_jump {
        Some(expected) if truth.field_function == Some(function) => {
            let found = matches!(report.verdict, ContinuityVerdict::JumpDetected { .. });
            let word = |j: bool| if j { "jump" } else { "no jump" };
            TruthCheck::from_checks(vec![(found == expected, format!("expected {}, found {}", word(expected), word(found)))])
        }
        _ => TruthCheck::NotApplicable,
    }
}

fn probe_table(scenario: &ActionScenario, spec: &ProbeSpec, seed: u64, continuity: bool) -> Outcome {
    let header = [
        "point_repr",
        "eps",
        "probe_radius",
        "horizon",
        "trials",
        "delta_estimate",
        "witness_y",
        "witness_g",
        "witness_distance",
        "stabilizer_size",
        "status",
        "message",
    ];
    let mut out = Outcome::new(Table::new(&header));
    let params = ProbeParams { horizon: spec.horizon, trials: spec.trials, seed, ..ProbeParams::new(spec.eps, spec.radius) };
    let mut witnesses = 0;
    for x in &spec.points {
        let r: orbital::Result<StabilityReport> = if continuity {
            uniform_continuity_probe(scenario, x, &params)
        } else {
            stability_probe(scenario, x, &params)
        };
        match r {
            Ok(r) => {
                witnesses += usize::from(r.witness.is_some());
                out.table.push(vec![
                    x.to_string(),
                    num(r.eps),
                    num(r.probe_radius),
                    r.horizon.to_string(),
                    r.trials.to_string(),
                    opt(r.delta_estimate),
                    opt(r.witness.map(|w| w.y)),
                    opt(r.witness.map(|w| scenario.group().format_element(&w.g))),
                    opt(r.witness.map(|w| w.attained_distance)),
                    opt(r.stabilizer_size),
                    OpStatus::Ok.to_string(),
                    String::new(),
                ]);
            }
            Err(e) => {
                out.note(OpStatus::Error);
                out.table.push(error_row(header.len(), vec![x.to_string()], &e));
            }
        }
    }
    out.detail = format!("{witnesses} of {} points have an instability witness", spec.points.len());
    out
}

fn census_params(spec: &CensusSpec, seed: u64) -> CensusParams {
    CensusParams {
        sample_size: spec.samples,
        cutoff: spec.cutoff,
        cluster_sep: spec.cluster_sep,
        hausdorff_samples: spec.hausdorff_samples,
        seed,
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn census_cells(c: &OrbitCensus) -> Vec<String> {
    vec![
        c.samples.to_string(),
        num(c.cluster_sep),
        c.infinite_closure_clusters.to_string(),
        opt(c.max_finite_card),
        join(c.distinct_cardinalities(), ";"),
        join(&c.cluster_leaders, "|"),
    ]
}

const CENSUS_HEADER: [&str; 6] =
    ["samples", "cluster_sep", "infinite_closure_clusters", "max_finite_card", "distinct_cardinalities", "cluster_leaders"];

/// "Label (rule)" line used in summaries.
pub fn classification_line(c: &ModuleClassification) -> String {
    format!("{} ({})", c.label, c.rule.name())
}

fn subset(scenario: &ActionScenario, r: &RegionSpec) -> orbital::Result<CompactSubset> {
    lattice_subset(scenario, r.region.clone(), Some(r.anchor))
}

fn execute(scenario: &ActionScenario, req: &RunRequest, seed: u64) -> Outcome {
    let cfg = averaging(req.tolerances);
    match &req.op {
        Operation::FolnerAverage { function, points } => {
            run_averages(scenario, function, points, |x| folner_average(scenario, function, x, &cfg))
        }
        Operation::InnerProduct { phi, psi, points } => {
            let header = ["point_repr", "phi", "psi", "value_re", "value_im", "converged", "stages", "final_index", "finite_orbit", "status", "message"];
            let mut out = Outcome::new(Table::new(&header));
            for x in points {
                match inner_product(scenario, phi, psi, x, &cfg) {
                    Ok(r) => {
                        let status = report_status(&r);
                        out.note(status);
                        let mut row = vec![x.to_string(), phi.clone(), psi.clone()];
                        row.extend(average_cells(&r));
                        row.extend([status.to_string(), String::new()]);
                        out.table.push(row);
                    }
                    Err(e) => {
                        out.note(OpStatus::Error);
                        out.table.push(error_row(header.len(), vec![x.to_string(), phi.clone(), psi.clone()], &e));
                    }
                }
            }
            out
        }
        Operation::OrbitClosureAverage { function, points, quadrature } => {
            let header = ["point_repr", "function", "quadrature", "value_re", "value_im", "status", "message"];
            let mut out = Outcome::new(Table::new(&header));
            for x in points {
                let lead = vec![x.to_string(), function.clone(), quadrature.to_string()];
                match orbit_closure_average(scenario, function, x, *quadrature) {
                    Ok(v) => {
                        let mut row = lead;
                        row.extend([num(v.re), num(v.im), OpStatus::Ok.to_string(), String::new()]);
                        out.table.push(row);
                    }
                    Err(e) => {
                        out.note(OpStatus::Error);
                        out.table.push(error_row(header.len(), lead, &e));
                    }
                }
            }
            out
        }
        Operation::ExpectationField { function, grid, jump_window, jump_threshold } => {
            let points = match grid {
                GridSpec::Count(n) => field_grid(scenario, *n),
                GridSpec::Points(p) => p.clone(),
            };
            let params = FieldParams { jump_window: *jump_window, jump_threshold: *jump_threshold };
            match expectation_field(scenario, function, &points, &cfg, &params) {
                Ok(report) => {
                    let mut out = Outcome::new(field_table(&report));
                    if !report.all_converged() {
                        out.note(OpStatus::NonConverged);
                    }
                    out.detail = field_detail(&report);
                    out.truth = field_truth(scenario, function, &report);
                    out
                }
                Err(e) => Outcome::failed(Table::new(&["point_repr", "value_re", "value_im", "converged", "stages"]), e),
            }
        }
        Operation::StabilityProbe(spec) => probe_table(scenario, spec, seed, false),
        Operation::ContinuityProbe(spec) => probe_table(scenario, spec, seed, true),
        Operation::ApTest { function, points, eps, translates, probes, net_cap } => {
            let header = ["point_repr", "function", "eps", "verdict", "net_size", "separated_family_size", "status", "message"];
            let mut out = Outcome::new(Table::new(&header));
            let params = ApParams { translate_count: *translates, probe_count: *probes, net_cap: *net_cap, seed, ..ApParams::new(*eps) };
            let mut not_ap = 0;
            for x in points {
                let lead = vec![x.to_string(), function.clone(), num(*eps)];
                match almost_periodicity_test(scenario, function, x, &params) {
                    Ok(r) => {
                        not_ap += usize::from(r.verdict == ApVerdict::NotAp);
                        let mut row = lead;
                        row.extend([
                            format!("{:?}", r.verdict),
                            opt(r.net_size),
                            r.separated_family_size.to_string(),
                            OpStatus::Ok.to_string(),
                            String::new(),
                        ]);
                        out.table.push(row);
                    }
                    Err(e) => {
                        out.note(OpStatus::Error);
                        out.table.push(error_row(header.len(), lead, &e));
                    }
                }
            }
            out.detail = format!("{not_ap} of {} points not almost periodic at eps {eps}", points.len());
            out
        }
        Operation::OrbitProbe { points, cutoff } => {
            let header = ["point_repr", "verdict", "cardinality", "cutoff", "status", "message"];
            let mut out = Outcome::new(Table::new(&header));
            for x in points {
                match orbit_probe(scenario, x, *cutoff) {
                    Ok(p) => {
                        let (verdict, card) = match p.verdict {
                            OrbitVerdict::Finite(n) => ("finite", n.to_string()),
                            OrbitVerdict::InfiniteLikely => ("infinite-likely", String::new()),
                        };
                        out.table.push(vec![
                            x.to_string(),
                            verdict.into(),
                            card,
                            cutoff.to_string(),
                            OpStatus::Ok.to_string(),
                            String::new(),
                        ]);
                    }
                    Err(e) => {
                        out.note(OpStatus::Error);
                        out.table.push(error_row(header.len(), vec![x.to_string()], &e));
                    }
                }
            }
            out
        }
        Operation::Census(spec) => match census(scenario, &census_params(spec, seed)) {
            Ok(c) => {
                let mut out = Outcome::new(Table::new(&CENSUS_HEADER));
                out.detail = format!(
                    "{} infinite closure cluster(s), finite cardinalities {:?}",
                    c.infinite_closure_clusters,
                    c.distinct_cardinalities()
                );
                out.table.push(census_cells(&c));
                out
            }
            Err(e) => Outcome::failed(Table::new(&CENSUS_HEADER), e),
        },
        Operation::ClassifyModule { census: spec, cluster_bound, distinct_card_limit } => {
            let mut header = vec!["label", "rule", "fired", "reasons"];
            header.extend(CENSUS_HEADER);
            let header: Vec<&'static str> = header;
            match census(scenario, &census_params(spec, seed)) {
                Ok(c) => {
                    let params = ClassifyParams { cluster_bound: *cluster_bound, distinct_card_limit: *distinct_card_limit };
                    let m = classify_module(&c, scenario.flags(), &params);
                    let mut out = Outcome::new(Table::new(&header));
                    let mut row = vec![
                        m.label.to_string(),
                        m.rule.name().to_string(),
                        join(m.fired.iter().map(|r| r.name()), "|"),
                        m.reasons.join("|"),
                    ];
                    row.extend(census_cells(&c));
                    out.table.push(row);
                    out.detail = classification_line(&m);
                    if let Some(expected) = scenario.ground_truth().label {
                        out.truth = TruthCheck::from_checks(vec![(
                            m.label == expected,
                            format!("expected {expected}, found {}", m.label),
                        )]);
                    }
                    out
                }
                Err(e) => Outcome::failed(Table::new(&header), e),
            }
        }
        Operation::CoveringIndex { a, b, pool_size, exhaustive } => {
            let header = ["a", "b", "method", "index_value", "lower_bound", "translates"];
            let method = if *exhaustive { "exhaustive" } else { "greedy" };
            let result = subset(scenario, a).and_then(|sa| {
                let sb = subset(scenario, b)?;
                if *exhaustive {
                    exact_arc_cover(&sa, &sb)
                } else {
                    covering_index(scenario, &sa, &sb, *pool_size, seed)
                }
            });
            match result {
                Ok(r) => {
                    let mut out = Outcome::new(Table::new(&header));
                    let translates = if r.exhaustive {
                        join(r.arc_offsets.iter().map(|o| num(*o)), "|")
                    } else {
                        join(r.chosen_translates.iter().map(|g| scenario.group().format_element(g)), "|")
                    };
                    out.table.push(vec![
                        a.text.clone(),
                        b.text.clone(),
                        method.into(),
                        r.index_value.to_string(),
                        r.lower_bound.to_string(),
                        translates,
                    ]);
                    out.detail = format!("({} : {}) = {}", a.text, b.text, r.index_value);
                    out
                }
                Err(e) => Outcome::failed(Table::new(&header), e),
            }
        }
        Operation::InvariantMeasure { k, a0, base, pool_size, tol } => {
            let header = ["eps", "k_index", "a0_index", "lambda", "final_value", "converged", "exhaustive"];
            let params = MeasureParams { tol: *tol, pool_size: *pool_size, seed, ..MeasureParams::default() };
            let result = subset(scenario, k).and_then(|sk| {
                let sa = subset(scenario, a0)?;
                invariant_measure_estimate(scenario, &sk, &sa, base, &params)
            });
            match result {
                Ok(m) => {
                    let mut out = Outcome::new(Table::new(&header));
                    for s in &m.stages {
                        out.table.push(vec![
                            num(s.eps),
                            s.k_index.to_string(),
                            s.a0_index.to_string(),
                            num(s.lambda),
                            num(m.value),
                            m.converged.to_string(),
                            m.exhaustive.to_string(),
                        ]);
                    }
                    if !m.converged {
                        out.note(OpStatus::NonConverged);
                    }
                    out.detail = format!("lambda'({}) relative to {} = {}", k.text, a0.text, m.value);
                    out
                }
                Err(e) => Outcome::failed(Table::new(&header), e),
            }
        }
        Operation::UniquenessCheck { k1, k2, a0, base, pool_size, tol } => {
            let header = ["k1", "k2", "lambda1", "lambda2", "nu1", "nu2", "lhs", "rhs", "pass"];
            let params = MeasureParams { tol: *tol, pool_size: *pool_size, seed, ..MeasureParams::default() };
            let result = (|| {
                let (s1, s2, sa) = (subset(scenario, k1)?, subset(scenario, k2)?, subset(scenario, a0)?);
                uniqueness_check(scenario, &s1, &s2, &sa, base, &params, &cfg)
            })();
            match result {
                Ok(u) => {
                    let mut out = Outcome::new(Table::new(&header));
                    out.table.push(vec![
                        k1.text.clone(),
                        k2.text.clone(),
                        num(u.lambda.0),
                        num(u.lambda.1),
                        num(u.nu.0),
                        num(u.nu.1),
                        num(u.lhs),
                        num(u.rhs),
                        u.pass.to_string(),
                    ]);
                    out.detail = format!("|lhs - rhs| = {:.3e}, pass = {}", (u.lhs - u.rhs).abs(), u.pass);
                    out
                }
                Err(e) => Outcome::failed(Table::new(&header), e),
            }
        }
    }
}

/// Runs every operation in order. Operation failures are recorded and the
/// run continues; only I/O failures abort.
pub fn run(config: &ExperimentConfig, scenario: &ActionScenario) -> Result<RunSummary> {
    let dir = &config.output_dir;
    create_dir(dir)?;
    let mut summary = RunSummary::default();
    for req in &config.runs {
        let started = Instant::now();
        let out = execute(scenario, req, config.seed);
        let file = format!("run_{}_{}.csv", req.name, req.op.name());
        out.table.write(&dir.join(&file))?;
        summary.operations.push(OpSummary {
            run: req.name.clone(),
            operation: req.op.name(),
            status: out.status,
            rows: out.table.rows.len(),
            output: PathBuf::from(file),
            tolerances: req.tolerances,
            truth: out.truth,
            detail: out.detail,
            wall_time: started.elapsed(),
        });
    }
    summary.summary_path = dir.join("summary.csv");
    summary_table(&summary).write(&summary.summary_path)?;
    Ok(summary)
}

/// Per-operation summary rows; wall times stay out so reruns are byte-identical.
pub fn summary_table(summary: &RunSummary) -> Table {
    let mut t = Table::new(&["run", "operation", "status", "rows", "output", "tol", "n_max", "truth", "truth_detail", "detail"]);
    for o in &summary.operations {
        let truth_detail = match &o.truth {
            TruthCheck::Pass(s) | TruthCheck::Fail(s) => s.clone(),
            TruthCheck::NotApplicable => String::new(),
        };
        t.push(vec![
            o.run.clone(),
            o.operation.to_string(),
            o.status.to_string(),
            o.rows.to_string(),
            o.output.display().to_string(),
            num(o.tolerances.tol),
            o.tolerances.n_max.to_string(),
            o.truth.as_str().to_string(),
            truth_detail,
            o.detail.clone(),
        ]);
    }
    t
}
