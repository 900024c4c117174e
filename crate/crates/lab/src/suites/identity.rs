//! Exact identities: characteristics of constant weights, Lorentz norms of
//! indicators and maximal functions of constants.

use extrapolab_core::lorentz::{lorentz_norm, LorentzIndex};
use extrapolab_core::maximal::{maximal, multilinear_maximal};
use extrapolab_core::weights::{
    a1_constant, ainf_constant, apr_constant, apr_r1_constant, apvec_constant,
    restricted_one_weight_constant, ExponentSystem,
};
use extrapolab_core::{CellBox, GridFunction, MaximalConfig, Weight};
use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::{cube_label, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::ReportRecord;

/// Tolerance for characteristics of constant weights.
const CHARACTERISTIC_TOL: f64 = 1e-9;
/// Tolerance for `‖χ_E‖_{L^{p,q}(w)} = w(E)^{1/p}`.
const INDICATOR_TOL: f64 = 1e-12;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    cfg.params::<Params>().map(|_| ())
}

fn characteristics(run: &Run<'_>, grid: extrapolab_core::Grid) -> Vec<ReportRecord> {
    let level = grid.level();
    let fam = run.cfg.family;
    type Eval = Box<dyn Fn() -> extrapolab_core::Result<extrapolab_core::ConstantEstimate> + Sync>;
    let evals: Vec<(&str, Eval)> = vec![
        ("a1", Box::new(move || a1_constant(&Weight::ones(grid), None, fam))),
        ("a1-measure", Box::new(move || a1_constant(&Weight::ones(grid), Some(&Weight::constant(grid, 3.0)?), fam))),
        ("ainf", Box::new(move || ainf_constant(&Weight::ones(grid), fam))),
        ("apvec-1-1", Box::new(move || apvec_constant(&[Weight::ones(grid), Weight::ones(grid)], &[1.0, 1.0], fam))),
        ("apvec-2-3", Box::new(move || apvec_constant(&[Weight::ones(grid), Weight::ones(grid)], &[2.0, 3.0], fam))),
        (
            "apr-restricted-2-2",
            Box::new(move || {
                apr_constant(&[Weight::ones(grid), Weight::ones(grid)], &ExponentSystem::restricted(vec![2.0, 2.0])?, fam)
            }),
        ),
        (
            "apr-general",
            Box::new(move || {
                let sys = ExponentSystem::new(vec![2.0, 3.0], vec![1.0, 1.5, 1.0], vec![1.0, 2.0])?;
                apr_constant(&[Weight::ones(grid), Weight::ones(grid)], &sys, fam)
            }),
        ),
        (
            "apr-infinite-deltas",
            Box::new(move || {
                let sys = ExponentSystem::new(vec![2.0, 2.0], vec![2.0, 2.0, 1.0], vec![1.0, 1.0])?;
                apr_constant(&[Weight::constant(grid, 0.3)?, Weight::constant(grid, 7.0)?], &sys, fam)
            }),
        ),
        ("apr-r1", Box::new(move || apr_r1_constant(&[Weight::ones(grid), Weight::ones(grid)], &[2.0, 4.0], fam))),
        ("one-weight", Box::new(move || restricted_one_weight_constant(&Weight::ones(grid), 2.5, fam))),
    ];
    evals
        .par_iter()
        .map(|(name, eval)| {
            let id = format!("case-char-{name}");
            match eval() {
                Ok(est) => run.record(
                    id,
                    level,
                    est.value,
                    1.0,
                    cube_label(&est.witness),
                    (est.value - 1.0).abs() <= CHARACTERISTIC_TOL,
                ),
                Err(e) => run.failed(id, level, e),
            }
        })
        .collect()
}

fn indicators(run: &Run<'_>, grid: extrapolab_core::Grid, count: usize) -> Vec<ReportRecord> {
    let level = grid.level();
    let n = grid.side_cells();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = run.rng(1_000 + i as u64);
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(a + 1..=n);
            let (lo, hi) = if grid.dim() == 2 {
                let c = rng.gen_range(0..n);
                let d = rng.gen_range(c + 1..=n);
                ([a, c], [b, d])
            } else {
                ([a, 0], [b, 1])
            };
            let cells = CellBox { lo, hi };
            let values: Vec<f64> = (0..grid.cell_count()).map(|_| rng.gen_range(0.1..10.0)).collect();
            let p = rng.gen_range(0.5..4.0);
            let q = if rng.gen_bool(0.25) { f64::INFINITY } else { rng.gen_range(0.5..8.0) };
            let id = format!("case-indicator-{i:04}");
            let result = (|| {
                let w = Weight::new(grid, values.clone())?;
                let chi = GridFunction::indicator(grid, &cells, 1.0)?;
                let norm = lorentz_norm(&chi, Some(&w), LorentzIndex::new(p, q)?)?;
                let mut mass = 0.0;
                cells.for_each_index(&grid, |k| mass += values[k]);
                Ok::<_, extrapolab_core::Error>((norm, (mass * grid.cell_volume()).powf(1.0 / p)))
            })();
            match result {
                Ok((norm, exact)) => run.record(
                    id,
                    level,
                    norm,
                    exact,
                    format!("p={p:.4} q={q:.4}"),
                    (norm - exact).abs() <= INDICATOR_TOL * exact,
                ),
                Err(e) => run.failed(id, level, e),
            }
        })
        .collect()
}

fn constants(run: &Run<'_>, grid: extrapolab_core::Grid) -> Vec<ReportRecord> {
    let level = grid.level();
    let fam = run.cfg.family;
    let mu = Weight::new(grid, (0..grid.cell_count()).map(|i| 1.0 + (i % 7) as f64).collect()).expect("positive");
    let mut out = Vec::new();
    for (name, c, measure) in [("maximal-lebesgue", 0.75, false), ("maximal-weighted", 0.5, true)] {
        let f = GridFunction::constant(grid, c).expect("finite");
        let cfg = if measure { MaximalConfig::with_measure(fam, &mu) } else { MaximalConfig::lebesgue(fam) };
        let id = format!("case-{name}");
        match maximal(&f, &cfg) {
            Ok(m) => {
                let exact = m.values().iter().all(|&v| v == c);
                out.push(run.record(id, level, m.max(), c, "all cells", exact));
            }
            Err(e) => out.push(run.failed(id, level, e)),
        }
    }
    let f1 = GridFunction::constant(grid, 0.75).expect("finite");
    let f2 = GridFunction::constant(grid, 2.0).expect("finite");
    match multilinear_maximal(&[&f1, &f2], &MaximalConfig::lebesgue(fam)) {
        Ok(m) => {
            let exact = m.values().iter().all(|&v| v == 1.5);
            out.push(run.record("case-multilinear", level, m.max(), 1.5, "all cells", exact));
        }
        Err(e) => out.push(run.failed("case-multilinear", level, e)),
    }
    out
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let count = run.cfg.cases_or(50);
    let mut out = Vec::new();
    for grid in run.grids() {
        out.extend(characteristics(run, grid));
        out.extend(indicators(run, grid, count));
        out.extend(constants(run, grid));
    }
    Ok(out)
}
