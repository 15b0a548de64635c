//! Experiment description: an INI-style text with a `[scenario]` section,
//! numbered `[run.N]` sections executed in file order, and an optional
//! `[output]` section.
//!
//! ```text
//! [scenario]
//! name = spiral_two_circles
//! seed = 7
//!
//! [run.1]
//! op = expectation_field
//! function = z
//! grid = 300
//! n_max = 2^22
//!
//! [output]
//! dir = results
//! ```
//!
//! Values are scalars or comma-separated lists; `#` starts a comment.
//! Integers accept `a^b`, reals accept `a^b` with an integer exponent.

use std::collections::BTreeSet;
use std::path::PathBuf;

use orbital::{build, ActionScenario, JLevel, Point, Region, ScenarioId, ScenarioSpec};

use crate::error::{CliError, Result};

pub const DEFAULT_OUT_DIR: &str = "orbital-out";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol: f64,
    pub n_max: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol: 1e-3, n_max: 1 << 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Defaults for every run; each run may override them.
    pub tolerances: Tolerances,
    pub runs: Vec<RunRequest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    /// The `N` of `[run.N]`.
    pub name: String,
    pub line: usize,
    pub tolerances: Tolerances,
    pub op: Operation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// A generated grid of about this many points over every stratum.
    Count(usize),
    Points(Vec<Point>),
}

/// A compact region with the text it was written as.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub text: String,
    pub region: Region,
    pub anchor: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub points: Vec<Point>,
    pub eps: f64,
    pub radius: f64,
    pub horizon: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusSpec {
    pub samples: usize,
    pub cutoff: usize,
    pub cluster_sep: Option<f64>,
    pub hausdorff_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    FolnerAverage { function: String, points: Vec<Point> },
    OrbitClosureAverage { function: String, points: Vec<Point>, quadrature: usize },
    InnerProduct { phi: String, psi: String, points: Vec<Point> },
    ExpectationField { function: String, grid: GridSpec, jump_window: Option<f64>, jump_threshold: f64 },
    StabilityProbe(ProbeSpec),
    ContinuityProbe(ProbeSpec),
    ApTest { function: String, points: Vec<Point>, eps: f64, translates: usize, probes: usize, net_cap: usize },
    OrbitProbe { points: Vec<Point>, cutoff: usize },
    Census(CensusSpec),
    ClassifyModule { census: CensusSpec, cluster_bound: usize, distinct_card_limit: usize },
    CoveringIndex { a: RegionSpec, b: RegionSpec, pool_size: usize, exhaustive: bool },
    InvariantMeasure { k: RegionSpec, a0: RegionSpec, base: Point, pool_size: usize, tol: f64 },
    UniquenessCheck { k1: RegionSpec, k2: RegionSpec, a0: RegionSpec, base: Point, pool_size: usize, tol: f64 },
}

pub const OPERATIONS: [&str; 13] = [
    "folner_average",
    "orbit_closure_average",
    "inner_product",
    "expectation_field",
    "stability_probe",
    "continuity_probe",
    "ap_test",
    "orbit_probe",
    "census",
    "classify_module",
    "covering_index",
    "invariant_measure",
    "uniqueness_check",
];

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::FolnerAverage { .. } => "folner_average",
            Operation::OrbitClosureAverage { .. } => "orbit_closure_average",
            Operation::InnerProduct { .. } => "inner_product",
            Operation::ExpectationField { .. } => "expectation_field",
            Operation::StabilityProbe(_) => "stability_probe",
            Operation::ContinuityProbe(_) => "continuity_probe",
            Operation::ApTest { .. } => "ap_test",
            Operation::OrbitProbe { .. } => "orbit_probe",
            Operation::Census(_) => "census",
            Operation::ClassifyModule { .. } => "classify_module",
            Operation::CoveringIndex { .. } => "covering_index",
            Operation::InvariantMeasure { .. } => "invariant_measure",
            Operation::UniquenessCheck { .. } => "uniqueness_check",
        }
    }
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::at(line, format!("malformed section header `{content}`")))?
                .trim();
            if sections.iter().any(|s| s.name == name) {
                return Err(CliError::at(line, format!("duplicate section [{name}]")));
            }
            sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| CliError::at(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            return Err(CliError::at(line, format!("keys are lowercase snake_case, got `{key}`")));
        }
        let section = sections.last_mut().ok_or_else(|| CliError::at(line, format!("key `{key}` outside any section")))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(CliError::at(line, format!("duplicate key `{key}` in [{}]", section.name)));
        }
        section.entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
    }
    Ok(sections)
}

/// Key lookup that remembers which keys were read, so leftovers are reported.
struct Fields<'a> {
    section: &'a Section,
    used: BTreeSet<&'a str>,
}

impl<'a> Fields<'a> {
    fn new(section: &'a Section) -> Self {
        Fields { section, used: BTreeSet::new() }
    }

    fn get(&mut self, key: &str) -> Option<&'a Entry> {
        let e = self.section.entries.iter().find(|e| e.key == key)?;
        self.used.insert(e.key.as_str());
        Some(e)
    }

    fn require(&mut self, key: &str) -> Result<&'a Entry> {
        self.get(key)
            .ok_or_else(|| CliError::at(self.section.line, format!("[{}] is missing `{key}`", self.section.name)))
    }

    fn parsed<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(Some)
                .ok_or_else(|| CliError::at(e.line, format!("`{key}`: malformed {what} `{}`", e.value))),
        }
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parsed(key, parse_real, "number")?.unwrap_or(default))
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.real(key, default)?;
        self.check(key, v > 0.0, "must be positive")?;
        Ok(v)
    }

    fn count(&mut self, key: &str, default: u64) -> Result<u64> {
        let v = self.parsed(key, parse_int, "integer")?.unwrap_or(default);
        self.check(key, v > 0, "must be positive")?;
        Ok(v)
    }

    fn check(&mut self, key: &str, ok: bool, message: &str) -> Result<()> {
        if ok {
            return Ok(());
        }
        let line = self.get(key).map_or(self.section.line, |e| e.line);
        Err(CliError::at(line, format!("`{key}` {message}")))
    }

    fn finish(self) -> Result<()> {
        match self.section.entries.iter().find(|e| !self.used.contains(e.key.as_str())) {
            Some(e) => Err(CliError::at(e.line, format!("unknown key `{}` in [{}]", e.key, self.section.name))),
            None => Ok(()),
        }
    }
}

/// Parses an unsigned integer, also written as `a^b`.
pub fn parse_int(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.split_once('^') {
        Some((a, b)) => a.trim().parse::<u64>().ok()?.checked_pow(b.trim().parse().ok()?),
        None => s.parse().ok(),
    }
}

/// Parses a finite real, also written as `a^b` with an integer exponent.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('^') {
        Some((a, b)) => a.trim().parse::<f64>().ok()?.powi(b.trim().parse().ok()?),
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_points(scenario: &ActionScenario, e: &Entry) -> Result<Vec<Point>> {
    let points = list(&e.value)
        .into_iter()
        .map(|s| scenario.space().parse_point(s).map_err(|err| CliError::at(e.line, format!("`{}`: {err}", e.key))))
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(CliError::at(e.line, format!("`{}` lists no points", e.key)));
    }
    Ok(points)
}

fn parse_one_point(scenario: &ActionScenario, e: &Entry) -> Result<Point> {
    scenario.space().parse_point(&e.value).map_err(|err| CliError::at(e.line, format!("`{}`: {err}", e.key)))
}

/// `arc:START:LEN`, `cylinder:BITS` (coordinate 1 first) or `ball:RADIUS:POINT`.
fn parse_region(scenario: &ActionScenario, e: &Entry) -> Result<RegionSpec> {
    let bad = |why: &str| CliError::at(e.line, format!("`{}`: {why} in region `{}`", e.key, e.value));
    let text = e.value.clone();
    let id = scenario.id();
    let (kind, rest) = text.split_once(':').ok_or_else(|| bad("missing kind"))?;
    let (region, anchor) = match kind.trim() {
        "arc" => {
            let (start, len) = rest.split_once(':').ok_or_else(|| bad("expected arc:START:LEN"))?;
            let start = parse_real(start).ok_or_else(|| bad("malformed start"))?;
            let len = parse_real(len).ok_or_else(|| bad("malformed length"))?;
            if len.is_nan() || len <= 0.0 {
                return Err(bad("length must be positive"));
            }
            let anchor = Point::new(id, orbital::Coords::Circle { t: start.rem_euclid(1.0) });
            (Region::Arc { start, len }, anchor)
        }
        "cylinder" => {
            let bits = rest.trim();
            if bits.is_empty() || bits.len() > 60 || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(bad("expected a nonempty 0/1 prefix"));
            }
            let prefix = bits.chars().enumerate().fold(0u64, |acc, (k, c)| acc | u64::from(c == '1') << k);
            let anchor = Point::new(id, orbital::Coords::Dyadic { level: JLevel::Limit, bits: prefix });
            (Region::DyadicCylinder { prefix, len: bits.len() as u32 }, anchor)
        }
        "ball" => {
            let (radius, point) = rest.split_once(':').ok_or_else(|| bad("expected ball:RADIUS:POINT"))?;
            let radius = parse_real(radius).filter(|r| *r > 0.0).ok_or_else(|| bad("malformed radius"))?;
            let center = scenario.space().parse_point(point.trim()).map_err(|err| bad(&err.to_string()))?;
            (Region::Ball { center, radius }, center)
        }
        other => return Err(bad(&format!("unknown kind `{other}`"))),
    };
    Ok(RegionSpec { text, region, anchor })
}

fn function(scenario: &ActionScenario, f: &mut Fields, key: &str) -> Result<String> {
    let e = f.require(key)?;
    scenario.function(&e.value).map_err(|err| CliError::at(e.line, format!("`{key}`: {err}")))?;
    Ok(e.value.clone())
}

fn probe_spec(scenario: &ActionScenario, f: &mut Fields) -> Result<ProbeSpec> {
    let points = parse_points(scenario, f.require("points")?)?;
    let eps = f.positive("eps", 0.5)?;
    Ok(ProbeSpec {
        points,
        eps,
        radius: f.positive("radius", 0.05)?,
        horizon: f.count("horizon", 1 << 16)?,
        trials: f.count("trials", 256)? as usize,
    })
}

fn census_spec(f: &mut Fields) -> Result<CensusSpec> {
    let cluster_sep = f.parsed("cluster_sep", parse_real, "number")?;
    f.check("cluster_sep", cluster_sep.is_none_or(|s| s > 0.0), "must be positive")?;
    Ok(CensusSpec {
        samples: f.count("samples", 64)? as usize,
        cutoff: f.count("cutoff", orbital::census::DEFAULT_ORBIT_CUTOFF as u64)? as usize,
        cluster_sep,
        hausdorff_samples: f.count("hausdorff_samples", 200)? as usize,
    })
}

fn parse_operation(scenario: &ActionScenario, section: &Section, defaults: Tolerances) -> Result<RunRequest> {
    let mut f = Fields::new(section);
    let op_entry = f.require("op")?;
    let tolerances = Tolerances { tol: f.positive("tol", defaults.tol)?, n_max: f.count("n_max", defaults.n_max)? };
    let op = match op_entry.value.as_str() {
        "folner_average" => Operation::FolnerAverage {
            function: function(scenario, &mut f, "function")?,
            points: parse_points(scenario, f.require("points")?)?,
        },
        "orbit_closure_average" => Operation::OrbitClosureAverage {
            function: function(scenario, &mut f, "function")?,
            points: parse_points(scenario, f.require("points")?)?,
            quadrature: f.count("quadrature", 4096)? as usize,
        },
        "inner_product" => Operation::InnerProduct {
            phi: function(scenario, &mut f, "phi")?,
            psi: function(scenario, &mut f, "psi")?,
            points: parse_points(scenario, f.require("points")?)?,
        },
        "expectation_field" => {
            let function = function(scenario, &mut f, "function")?;
            let grid = match (f.get("grid"), f.get("points")) {
                (Some(e), None) => GridSpec::Count(
                    parse_int(&e.value)
                        .filter(|n| *n > 0)
                        .ok_or_else(|| CliError::at(e.line, format!("`grid`: malformed size `{}`", e.value)))?
                        as usize,
                ),
                (None, Some(e)) => GridSpec::Points(parse_points(scenario, e)?),
                (Some(e), Some(_)) => return Err(CliError::at(e.line, "give either `grid` or `points`, not both")),
                (None, None) => return Err(CliError::at(section.line, format!("[{}] needs `grid` or `points`", section.name))),
            };
            let jump_window = f.parsed("jump_window", parse_real, "number")?;
            f.check("jump_window", jump_window.is_none_or(|w| w > 0.0), "must be positive")?;
            Operation::ExpectationField { function, grid, jump_window, jump_threshold: f.positive("jump_threshold", 0.1)? }
        }
        "stability_probe" => Operation::StabilityProbe(probe_spec(scenario, &mut f)?),
        "continuity_probe" => Operation::ContinuityProbe(probe_spec(scenario, &mut f)?),
        "ap_test" => Operation::ApTest {
            function: function(scenario, &mut f, "function")?,
            points: parse_points(scenario, f.require("points")?)?,
            eps: f.positive("eps", 0.2)?,
            translates: f.count("translates", 256)? as usize,
            probes: f.count("probes", 1024)? as usize,
            net_cap: f.count("net_cap", 64)? as usize,
        },
        "orbit_probe" => Operation::OrbitProbe {
            points: parse_points(scenario, f.require("points")?)?,
            cutoff: f.count("cutoff", orbital::census::DEFAULT_ORBIT_CUTOFF as u64)? as usize,
        },
        "census" => Operation::Census(census_spec(&mut f)?),
        "classify_module" => Operation::ClassifyModule {
            census: census_spec(&mut f)?,
            cluster_bound: f.count("cluster_bound", 4)? as usize,
            distinct_card_limit: f.count("distinct_card_limit", 3)? as usize,
        },
        "covering_index" => {
            let a = parse_region(scenario, f.require("a")?)?;
            let b = parse_region(scenario, f.require("b")?)?;
            let pool_size = f.count("pool_size", 4096)? as usize;
            let exhaustive = match f.get("method") {
                None => false,
                Some(e) => match e.value.as_str() {
                    "greedy" => false,
                    "exhaustive" => true,
                    other => return Err(CliError::at(e.line, format!("`method`: expected greedy or exhaustive, got `{other}`"))),
                },
            };
            Operation::CoveringIndex { a, b, pool_size, exhaustive }
        }
        "invariant_measure" => Operation::InvariantMeasure {
            k: parse_region(scenario, f.require("k")?)?,
            a0: parse_region(scenario, f.require("a0")?)?,
            base: parse_one_point(scenario, f.require("base_point")?)?,
            pool_size: f.count("pool_size", 4096)? as usize,
            tol: f.positive("measure_tol", 1e-2)?,
        },
        "uniqueness_check" => Operation::UniquenessCheck {
            k1: parse_region(scenario, f.require("k1")?)?,
            k2: parse_region(scenario, f.require("k2")?)?,
            a0: parse_region(scenario, f.require("a0")?)?,
            base: parse_one_point(scenario, f.require("base_point")?)?,
            pool_size: f.count("pool_size", 4096)? as usize,
            tol: f.positive("measure_tol", 3e-2)?,
        },
        other => {
            return Err(CliError::at(
                op_entry.line,
                format!("unknown operation `{other}` for key `op`; expected one of {}", OPERATIONS.join(", ")),
            ))
        }
    };
    f.finish()?;
    let name = section.name.trim_start_matches("run.").to_string();
    Ok(RunRequest { name, line: section.line, tolerances, op })
}

fn parse_scenario(section: &Section) -> Result<(ScenarioSpec, u64, Tolerances)> {
    let mut f = Fields::new(section);
    let name_entry = f.get("name").ok_or_else(|| CliError::at(section.line, "[scenario] is missing `name`"))?;
    let name: ScenarioId = name_entry
        .value
        .parse()
        .map_err(|err: orbital::Error| CliError::at(name_entry.line, format!("`name`: {err}")))?;
    let alpha = f.parsed("alpha", parse_real, "number")?;
    let rational = f.parsed(
        "rational",
        |s| {
            let (p, q) = s.split_once('/')?;
            Some((p.trim().parse::<i64>().ok()?, q.trim().parse::<i64>().ok()?))
        },
        "fraction p/q",
    )?;
    let levels = f.parsed("levels", parse_int, "integer")?;
    let depth = f.parsed("depth", parse_int, "integer")?;
    let seed = f.parsed("seed", parse_int, "integer")?.unwrap_or(0);
    let defaults = Tolerances::default();
    let tolerances = Tolerances { tol: f.positive("tol", defaults.tol)?, n_max: f.count("n_max", defaults.n_max)? };
    f.finish()?;
    let narrow = |key: &str, v: Option<u64>| -> Result<Option<u32>> {
        v.map(|v| u32::try_from(v).map_err(|_| CliError::at(section.line, format!("`{key}` is too large"))))
            .transpose()
    };
    let spec = ScenarioSpec { name: Some(name), alpha, rational, levels: narrow("levels", levels)?, depth: narrow("depth", depth)? };
    Ok((spec, seed, tolerances))
}

/// Parses and validates an experiment description. The scenario is built
/// so that every point and function name can be checked.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let sections = split_sections(text)?;
    for s in &sections {
        let known = s.name == "scenario" || s.name == "output" || s.name.strip_prefix("run.").is_some_and(|n| !n.is_empty());
        if !known {
            return Err(CliError::at(s.line, format!("unknown section [{}]", s.name)));
        }
    }
    let scenario_section = sections
        .iter()
        .find(|s| s.name == "scenario")
        .ok_or_else(|| CliError::Invalid("missing [scenario] section with a scenario name".into()))?;
    let (spec, seed, tolerances) = parse_scenario(scenario_section)?;
    let scenario = build(&spec).map_err(|err| CliError::at(scenario_section.line, err.to_string()))?;

    let mut output_dir = PathBuf::from(DEFAULT_OUT_DIR);
    if let Some(out) = sections.iter().find(|s| s.name == "output") {
        let mut f = Fields::new(out);
        if let Some(e) = f.get("dir") {
            output_dir = PathBuf::from(&e.value);
        }
        f.finish()?;
    }

    let runs = sections
        .iter()
        .filter(|s| s.name.starts_with("run."))
        .map(|s| parse_operation(&scenario, s, tolerances))
        .collect::<Result<Vec<_>>>()?;
    if runs.is_empty() {
        return Err(CliError::Invalid("no [run.N] sections".into()));
    }
    Ok(ExperimentConfig { scenario: spec, seed, output_dir, tolerances, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[scenario]\nname = rotation\n\n[run.1]\nop = folner_average\nfunction = cos1\npoints = t=0.2\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.tolerances, Tolerances { tol: 1e-3, n_max: 1 << 20 });
        assert_eq!(c.runs.len(), 1);
        assert_eq!(c.runs[0].op.name(), "folner_average");
        assert_eq!(c.output_dir, PathBuf::from(DEFAULT_OUT_DIR));
    }

    #[test]
    fn unknown_operation_names_the_key() {
        let text = MINIMAL.replace("folner_average", "fourier_average");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(&err, CliError::Config { line: 5, message } if message.contains("`op`")), "{err}");
    }

    #[test]
    fn unknown_key_and_bad_number_carry_line_numbers() {
        let err = parse_config(&format!("{MINIMAL}colour = red\n")).unwrap_err();
        assert!(matches!(&err, CliError::Config { line: 8, message } if message.contains("colour")), "{err}");
        let err = parse_config(&format!("{MINIMAL}tol = 1e-3x\n")).unwrap_err();
        assert!(matches!(err, CliError::Config { line: 8, .. }));
    }

    #[test]
    fn missing_scenario_name_is_rejected() {
        let err = parse_config("[scenario]\nseed = 3\n[run.1]\nop = census\n").unwrap_err();
        assert!(err.to_string().contains("name"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn overrides_and_power_syntax() {
        let text = "[scenario]\nname = spiral_two_circles\nseed = 2^4\n[run.7]\nop = expectation_field\nfunction = z\ngrid = 300\nn_max = 2^22\njump_window = 0.05\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.seed, 16);
        assert_eq!(c.runs[0].name, "7");
        assert_eq!(c.runs[0].tolerances.n_max, 1 << 22);
        assert!(matches!(c.runs[0].op, Operation::ExpectationField { grid: GridSpec::Count(300), jump_window: Some(w), .. } if w == 0.05));
    }

    #[test]
    fn unknown_function_and_bad_point_are_rejected() {
        assert!(parse_config(&MINIMAL.replace("cos1", "cos9")).is_err());
        let err = parse_config(&MINIMAL.replace("t=0.2", "t=1.5")).unwrap_err();
        assert!(matches!(err, CliError::Config { line: 7, .. }), "{err}");
    }

    #[test]
    fn shipped_example_configs_parse() {
        for text in [
            include_str!("../../../configs/rotation.ini"),
            include_str!("../../../configs/spiral.ini"),
            include_str!("../../../configs/dyadic.ini"),
        ] {
            parse_config(text).unwrap();
        }
    }

    #[test]
    fn regions_parse() {
        let text = "[scenario]\nname = dyadic_product\n[run.1]\nop = covering_index\na = cylinder:01\nb = cylinder:011\n";
        let c = parse_config(text).unwrap();
        match &c.runs[0].op {
            Operation::CoveringIndex { a, .. } => assert_eq!(a.region, Region::DyadicCylinder { prefix: 0b10, len: 2 }),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_int("2^20"), Some(1 << 20));
        assert_eq!(parse_real("2^-3"), Some(0.125));
    }
}
