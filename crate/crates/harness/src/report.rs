//! Experiment reports: one cell per compared quantity, as JSON and CSV.

use std::io::Write;
use std::path::Path;

use arbor::stats::{wilson_interval, Z95};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;

/// One compared quantity. `reproduce` is a sub-configuration that
/// regenerates exactly this cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub experiment: String,
    pub target: String,
    pub n: u64,
    pub grid_value: f64,
    pub empirical: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub std_error: f64,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    pub verdict: bool,
    /// How the verdict was reached.
    pub rule: String,
    pub seed: u64,
    pub reproduce: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<Cell>,
    pub wall_clock_seconds: f64,
    pub library_version: String,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    n: u64,
    grid_value: f64,
    empirical: f64,
    ci_lo: f64,
    ci_hi: f64,
    bound: f64,
    verdict: bool,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, cells: Vec<Cell>, wall_clock_seconds: f64) -> Self {
        Self { config, cells, wall_clock_seconds, library_version: env!("CARGO_PKG_VERSION").to_string() }
    }

    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.verdict)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.verdict)
    }

    pub fn cells_named<'a>(&'a self, experiment: &'a str) -> impl Iterator<Item = &'a Cell> + 'a {
        self.cells.iter().filter(move |c| c.experiment == experiment)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The JSON form with the wall-clock field zeroed, for byte comparison.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_clock_seconds = 0.0;
        copy.to_json()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.cells {
            w.serialize(CsvRow {
                experiment: &c.experiment,
                n: c.n,
                grid_value: c.grid_value,
                empirical: c.empirical,
                ci_lo: c.ci_lo,
                ci_hi: c.ci_hi,
                bound: c.bound,
                verdict: c.verdict,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `path` (JSON) and the same path with a `.csv` extension.
    pub fn write_files(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        let file = std::fs::File::create(path.with_extension("csv"))?;
        self.write_csv(file)
    }
}

/// A cell builder holding the fields shared by every cell of a run.
pub(crate) struct CellFactory<'a> {
    pub config: &'a ExperimentConfig,
}

impl CellFactory<'_> {
    #[allow(clippy::too_many_arguments)]
    pub fn cell(
        &self,
        experiment: &str,
        target: &str,
        n: u64,
        grid_value: f64,
        empirical: f64,
        bound: f64,
        verdict: bool,
        rule: &str,
        reproduce: ExperimentConfig,
    ) -> Cell {
        Cell {
            experiment: experiment.to_string(),
            target: target.to_string(),
            n,
            grid_value,
            empirical,
            ci_lo: empirical,
            ci_hi: empirical,
            std_error: 0.0,
            bound,
            exact: None,
            verdict,
            rule: rule.to_string(),
            seed: self.config.seed,
            reproduce,
        }
    }
}

/// Multiple of the zero-success Wilson upper limit above which a bound
/// counts as resolvable by the given number of trials.
pub const RESOLVABLE_FACTOR: f64 = 10.0;

/// Wilson interval and verdict for an empirical tail against a bound.
///
/// When the bound is at least [`RESOLVABLE_FACTOR`] times the Wilson upper
/// limit for zero successes the whole interval must lie below it. Otherwise
/// Monte Carlo cannot resolve the bound and the cell fails only if the
/// entire interval exceeds it. An exact tail, when available, must not
/// exceed the bound either.
pub fn tail_verdict(successes: u64, trials: u64, bound: f64, exact: Option<f64>) -> (f64, f64, bool, &'static str) {
    let (lo, hi) = wilson_interval(successes, trials, Z95);
    let floor = RESOLVABLE_FACTOR * wilson_interval(0, trials, Z95).1;
    let (mc_ok, rule) = if bound >= floor {
        (hi <= bound, "ci_hi<=bound")
    } else {
        (lo <= bound, "unresolvable:ci_lo<=bound")
    };
    let exact_ok = exact.is_none_or(|e| e <= bound * (1.0 + 1e-9));
    let rule = match (exact.is_some(), rule) {
        (true, "ci_hi<=bound") => "ci_hi<=bound,exact<=bound",
        (true, _) => "unresolvable:ci_lo<=bound,exact<=bound",
        (false, r) => r,
    };
    (lo, hi, mc_ok && exact_ok, rule)
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentKind, Target};

    fn report() -> ExperimentReport {
        let config = ExperimentConfig::new(ExperimentKind::Equivalence, Target::AllSmall, vec![3], 1, 42);
        let f = CellFactory { config: &config };
        let cells = vec![
            f.cell("count", "{\"0\":1}", 1, 0.0, 1.0, 1.0, true, "exact_equal", config.clone()),
            f.cell("count", "{\"0\":2,\"2\":1}", 3, 0.0, 1.0, 2.0, false, "exact_equal", config.clone()),
        ];
        ExperimentReport::new(config, cells, 1.5)
    }

    #[test]
    fn csv_columns() {
        let mut out = Vec::new();
        report().write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "experiment,n,grid_value,empirical,ci_lo,ci_hi,bound,verdict");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn json_round_trip_and_failures() {
        let r = report();
        let back: ExperimentReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
        assert!(r.cells.iter().all(|c| c.seed == 42));
        assert!(!r.deterministic_json().unwrap().contains("1.5"));
    }

    #[test]
    fn verdict_rules() {
        // resolvable: interval must sit below the bound
        let (_, hi, ok, rule) = tail_verdict(10, 100_000, 0.5, None);
        assert!(ok && hi < 0.5 && rule == "ci_hi<=bound");
        let (_, _, ok, _) = tail_verdict(600, 1000, 0.5, None);
        assert!(!ok);
        // unresolvable: only a whole interval above the bound fails
        let (_, _, ok, rule) = tail_verdict(3, 100_000, 1e-4, None);
        assert!(ok && rule.starts_with("unresolvable"));
        let (_, _, ok, _) = tail_verdict(100, 100_000, 1e-4, None);
        assert!(!ok);
        // exact values are decisive on their own
        let (_, _, ok, _) = tail_verdict(0, 100_000, 1e-4, Some(2e-4));
        assert!(!ok);
    }

    #[test]
    fn summaries() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_se(&[7.0]), (7.0, 0.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
