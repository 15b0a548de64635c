//! The built-in ground-truth suite: recorded means, field continuity and
//! module labels of every fixture.

use std::fmt;
use std::path::Path;

use orbital::{
    census, classify_module, expectation_field, field_grid, fixture, folner_average, AveragingConfig, CensusParams,
    ClassifyParams, ContinuityVerdict, FieldParams, ScenarioId,
};

use crate::error::Result;
use crate::run::{create_dir, field_detail, field_table, num, Table};

/// Grid size of the field checks.
pub const FIELD_GRID: usize = 150;
/// Pairs of grid points closer than this are compared for jumps.
pub const FIELD_WINDOW: f64 = 0.05;
pub const FIELD_N_MAX: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub category: &'static str,
    pub scenario: ScenarioId,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifySummary {
    pub checks: Vec<Check>,
}

impl VerifySummary {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn exit_code(&self) -> u8 {
        u8::from(self.failures() > 0)
    }
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<6} {:<24} {}", if c.pass { "PASS" } else { "FAIL" }, c.category, c.scenario, c.detail)?;
        }
        write!(f, "{} of {} fixture checks passed", self.checks.len() - self.failures(), self.checks.len())
    }
}

/// Runs every fixture check and writes `verify_means.csv`, `verify_fields.csv`,
/// `verify_labels.csv`, one `field_<scenario>.csv` per fixture and `summary.csv`.
pub fn verify_fixtures(seed: u64, dir: &Path) -> Result<VerifySummary> {
    create_dir(dir)?;
    let mut summary = VerifySummary::default();
    let mut means = Table::new(&["scenario", "point_repr", "function", "expected", "tol", "value_re", "value_im", "converged", "result"]);
    let mut fields = Table::new(&["scenario", "function", "grid_size", "expected_jump", "verdict", "max_jump", "jump_window", "result"]);
    let mut labels = Table::new(&["scenario", "expected", "label", "rule", "infinite_closure_clusters", "distinct_cardinalities", "result"]);
    let word = |ok: bool| if ok { "pass" } else { "fail" }.to_string();

    for id in ScenarioId::ALL {
        let s = fixture(id);
        let truth = s.ground_truth();

        for m in &truth.means {
            let x = s.space().parse_point(m.point).expect("fixture points parse");
            let (row, pass, detail) = match folner_average(&s, m.function, &x, &AveragingConfig::default()) {
                Ok(r) => {
                    let pass = r.converged && (r.value.re - m.value).abs() <= m.tol && r.value.im.abs() <= m.tol;
                    let row = vec![num(r.value.re), num(r.value.im), r.converged.to_string()];
                    (row, pass, format!("mean of {} at {} = {:.6} (expected {})", m.function, m.point, r.value.re, m.value))
                }
                Err(e) => (vec![String::new(), String::new(), String::new()], false, e.to_string()),
            };
            let mut full = vec![id.to_string(), m.point.to_string(), m.function.to_string(), num(m.value), num(m.tol)];
            full.extend(row);
            full.push(word(pass));
            means.push(full);
            summary.checks.push(Check { category: "mean", scenario: id, pass, detail });
        }

        if let (Some(expected), Some(function)) = (truth.field_jump, truth.field_function) {
            let grid = field_grid(&s, FIELD_GRID);
            let cfg = AveragingConfig { n_max: FIELD_N_MAX, ..AveragingConfig::default() };
            let params = FieldParams { jump_window: Some(FIELD_WINDOW), ..FieldParams::default() };
            let (pass, detail) = match expectation_field(&s, function, &grid, &cfg, &params) {
                Ok(report) => {
                    let found = matches!(report.verdict, ContinuityVerdict::JumpDetected { .. });
                    let pass = found == expected && report.all_converged();
                    let verdict = if found { "Jump-detected" } else { "Continuous-at-resolution" };
                    fields.push(vec![
                        id.to_string(),
                        function.to_string(),
                        grid.len().to_string(),
                        expected.to_string(),
                        verdict.into(),
                        num(report.max_jump),
                        num(report.jump_window),
                        word(pass),
                    ]);
                    field_table(&report).write(&dir.join(format!("field_{id}.csv")))?;
                    (pass, field_detail(&report))
                }
                Err(e) => (false, e.to_string()),
            };
            summary.checks.push(Check { category: "field", scenario: id, pass, detail });
        }

        if let Some(expected) = truth.label {
            let params = CensusParams { seed, ..CensusParams::default() };
            let (pass, detail) = match census(&s, &params) {
                Ok(c) => {
                    let m = classify_module(&c, s.flags(), &ClassifyParams::default());
                    let pass = m.label == expected;
                    labels.push(vec![
                        id.to_string(),
                        expected.to_string(),
                        m.label.to_string(),
                        m.rule.name().to_string(),
                        c.infinite_closure_clusters.to_string(),
                        c.distinct_cardinalities().iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
                        word(pass),
                    ]);
                    (pass, format!("{} ({}), expected {expected}", m.label, m.rule.name()))
                }
                Err(e) => (false, e.to_string()),
            };
            summary.checks.push(Check { category: "label", scenario: id, pass, detail });
        }
    }

    means.write(&dir.join("verify_means.csv"))?;
    fields.write(&dir.join("verify_fields.csv"))?;
    labels.write(&dir.join("verify_labels.csv"))?;
    let mut table = Table::new(&["category", "scenario", "result", "detail"]);
    for c in &summary.checks {
        table.push(vec![c.category.to_string(), c.scenario.to_string(), word(c.pass), c.detail.clone()]);
    }
    table.write(&dir.join("summary.csv"))?;
    Ok(summary)
}
