//! The verification suites. Each suite turns a validated configuration into
//! report rows; cases run in parallel and are collected in case order.

use extrapolab_core::{DyadicCube, Grid, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, ExperimentConfig, SuiteName};
use crate::report::{self, ReportRecord, Summary};

mod applications;
mod endpoint;
mod exponents;
mod identity;
mod lemma33;
mod mmax;
mod offdiag;
mod prop31;
mod remark34;
mod sawyer;

#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub suite: SuiteName,
    pub records: Vec<ReportRecord>,
    pub summary: Summary,
    /// Human-readable side output (tables, missing goldens).
    pub notes: Vec<String>,
}

/// Shared state while a suite runs.
pub(crate) struct Run<'a> {
    pub cfg: &'a ExperimentConfig,
    pub name: &'static str,
    pub notes: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn record(
        &self,
        case_id: impl Into<String>,
        resolution: u32,
        lhs: f64,
        rhs: f64,
        witness: impl Into<String>,
        pass: bool,
    ) -> ReportRecord {
        ReportRecord::new(self.name, case_id, resolution, lhs, rhs, witness, pass)
    }

    /// A case whose computation failed: recorded, never passing.
    pub fn failed(&self, case_id: impl Into<String>, resolution: u32, err: impl std::fmt::Display) -> ReportRecord {
        self.record(case_id, resolution, f64::NAN, f64::NAN, format!("error: {err}"), false)
    }

    /// Compares `measured` with `goldens[name]` within `rel_tol`.
    pub fn golden(&mut self, name: &str, resolution: u32, measured: f64, rel_tol: f64) -> ReportRecord {
        match self.cfg.goldens.get(name) {
            Some(&g) => {
                let pass = (measured - g).abs() <= rel_tol * g.abs();
                self.record(format!("golden-{name}"), resolution, measured, g, format!("tol={rel_tol}"), pass)
            }
            None => {
                self.notes.push(format!("golden `{name}` is not frozen; measured {measured:?}"));
                self.record(format!("golden-{name}"), resolution, measured, f64::NAN, "missing", false)
            }
        }
    }

    /// Refinement check: batch maxima at consecutive levels may differ by at
    /// most `limit` (only growth counts when `growth_only`).
    pub fn stability(&self, records: &[ReportRecord], limit: f64, growth_only: bool) -> Vec<ReportRecord> {
        let maxima = report::batch_maxima(records);
        let v: Vec<(u32, f64)> = maxima.into_iter().collect();
        v.windows(2)
            .map(|w| {
                let r = report::ratio(w[1].1, w[0].1);
                let factor = if growth_only { r } else { r.max(1.0 / r) };
                self.record(
                    format!("stability-L{}-L{}", w[0].0, w[1].0),
                    w[1].0,
                    factor,
                    limit,
                    format!("max {:?} -> {:?}", w[0].1, w[1].1),
                    factor <= limit,
                )
            })
            .collect()
    }

    pub fn grids(&self) -> Vec<Grid> {
        self.cfg.grids()
    }
}

pub(crate) fn cube_label(c: &DyadicCube) -> String {
    format!("L{}[{},{}]s{}{}", c.level, c.index[0], c.index[1], c.shift[0], c.shift[1])
}

/// Random interval `[a, b)` in units of `1/units`.
pub(crate) fn random_interval(rng: &mut impl Rng, units: u32) -> (u32, u32) {
    let a = rng.gen_range(0..units);
    let b = rng.gen_range(a + 1..=units);
    (a, b)
}

/// Indicator of the union of the given intervals (units of `1/units`) on the
/// first axis; the grid must resolve `1/units`.
pub(crate) fn interval_indicator(grid: Grid, intervals: &[(u32, u32)], units: u32) -> GridFunction {
    let n = grid.side_cells() as u64;
    GridFunction::from_cells(grid, |i| {
        let x = grid.coords(i)[0] as u64;
        let hit = intervals
            .iter()
            .any(|&(a, b)| a as u64 * n <= x * units as u64 && x * (units as u64) < b as u64 * n);
        if hit {
            1.0
        } else {
            0.0
        }
    })
    .expect("indicator values are finite")
}

pub(crate) fn require_level_at_least(cfg: &ExperimentConfig, min: u32, why: &str) -> Result<(), ConfigError> {
    if let Some(i) = cfg.grid.levels.iter().position(|&l| l < min) {
        return Err(ConfigError::field(format!("grid.levels[{i}]"), format!("{why} needs level >= {min}")));
    }
    Ok(())
}

pub(crate) fn require_dim(cfg: &ExperimentConfig, dim: usize) -> Result<(), ConfigError> {
    if cfg.grid.dim != dim {
        return Err(ConfigError::field("grid.dim", format!("suite {} runs in dimension {dim}", cfg.suite)));
    }
    Ok(())
}

/// Parses and checks the suite parameters without computing anything.
pub fn validate_params(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    match cfg.suite {
        SuiteName::Identity => identity::validate(cfg),
        SuiteName::Exponents => exponents::validate(cfg),
        SuiteName::Lemma33 => lemma33::validate(cfg),
        SuiteName::Remark34 => remark34::validate(cfg),
        SuiteName::Mmax => mmax::validate(cfg),
        SuiteName::Sawyer => sawyer::validate(cfg),
        SuiteName::Offdiag => offdiag::validate(cfg),
        SuiteName::Prop31a => prop31::validate_a(cfg),
        SuiteName::Prop31b => prop31::validate_b(cfg),
        SuiteName::Endpoint => endpoint::validate(cfg),
        SuiteName::Applications => applications::validate(cfg),
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<SuiteOutput, ConfigError> {
    let mut ctx = Run { cfg, name: cfg.suite.as_str(), notes: Vec::new() };
    let mut records = match cfg.suite {
        SuiteName::Identity => identity::run(&mut ctx)?,
        SuiteName::Exponents => exponents::run(&mut ctx)?,
        SuiteName::Lemma33 => lemma33::run(&mut ctx)?,
        SuiteName::Remark34 => remark34::run(&mut ctx)?,
        SuiteName::Mmax => mmax::run(&mut ctx)?,
        SuiteName::Sawyer => sawyer::run(&mut ctx)?,
        SuiteName::Offdiag => offdiag::run(&mut ctx)?,
        SuiteName::Prop31a => prop31::run_a(&mut ctx)?,
        SuiteName::Prop31b => prop31::run_b(&mut ctx)?,
        SuiteName::Endpoint => endpoint::run(&mut ctx)?,
        SuiteName::Applications => applications::run(&mut ctx)?,
    };
    report::sort_records(&mut records);
    let summary = report::summarize(ctx.name, &records);
    Ok(SuiteOutput { suite: cfg.suite, records, summary, notes: ctx.notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_indicator_counts_cells() {
        let g = Grid::new(1, 10).unwrap();
        let f = interval_indicator(g, &[(1, 3), (200, 256)], 256);
        let ones: Vec<usize> = (0..1024).filter(|&i| f.values()[i] == 1.0).collect();
        // [1/256, 3/256) is cells 4..12 and [200/256, 1) is 800..1024
        let expected: Vec<usize> = (4..12).chain(800..1024).collect();
        assert_eq!(ones, expected);
    }

    #[test]
    fn stability_rows_compare_consecutive_levels() {
        let cfg = ExperimentConfig::bundled(SuiteName::Mmax).unwrap();
        let run = Run { cfg: &cfg, name: "mmax", notes: Vec::new() };
        let recs = vec![
            run.record("case-0000", 8, 1.0, 1.0, "", true),
            run.record("case-0000", 9, 1.4, 1.0, "", true),
            run.record("case-0000", 10, 0.5, 1.0, "", true),
        ];
        let growth = run.stability(&recs, 1.5, true);
        assert_eq!(growth.iter().map(|r| r.pass).collect::<Vec<_>>(), [true, true]);
        let both = run.stability(&recs, 1.5, false);
        assert_eq!(both.iter().map(|r| r.pass).collect::<Vec<_>>(), [true, false]);
        assert_eq!(both[1].case_id, "stability-L9-L10");
    }
}
