//! The bilinear operator `N = T²`: homogeneity, a point value, the hypothesis
//! against `𝓜`, the layer and endpoint bounds, the `N*` growth table and
//! series of scale-truncated maximal operators.

use extrapolab_core::applications::{
    endpoint_bound_check, hypothesis_check, layer_bound_check, nstar_growth, operator_n, series_sum_check,
    SeriesTerm,
};
use extrapolab_core::weights::generate_vector;
use extrapolab_core::{Grid, GridFunction, WeightKind};
use rand::Rng;
use serde::Deserialize;

use super::{cube_label, interval_indicator, require_dim, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::ReportRecord;

const POINT_TOL: f64 = 0.02;
const INVARIANCE_TOL: f64 = 1e-12;
const GOLDEN_TOL: f64 = 0.01;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    homogeneity_cases: usize,
    /// Grid level for `N(χ, χ)(1/2)` with `χ = χ_{[0,1/4)}`.
    point_level: u32,
    /// `E` and `F` for the hypothesis, in units of `1/units`.
    hypothesis_sets: [(u32, u32); 2],
    lambdas: Vec<[f64; 2]>,
    /// Exponent `q` of the layer and endpoint bounds.
    q: f64,
    bound_weights: Vec<WeightKind>,
    nstar_counts: Vec<usize>,
    series_p: Vec<f64>,
    series_terms: Vec<SeriesTerm>,
    units: u32,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            homogeneity_cases: 10,
            point_level: 12,
            hypothesis_sets: [(100, 300), (200, 600)],
            lambdas: vec![[1.0, 1.0], [2.0, 3.0], [0.5, 7.0], [1e-3, 1e3]],
            q: 3.0,
            bound_weights: vec![WeightKind::Power { exponent: -0.3 }, WeightKind::Power { exponent: 0.4 }],
            nstar_counts: vec![4, 8, 16, 32, 64, 128, 256],
            series_p: vec![3.0, 3.0],
            series_terms: (0..4).map(|j| SeriesTerm { coarsest: j, weight: 0.5f64.powi(j as i32) }).collect(),
            units: 1024,
        }
    }
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: Params = cfg.params()?;
    require_dim(cfg, 1)?;
    Grid::new(1, p.point_level).map_err(|e| ConfigError::field("params.point_level", e))?;
    if p.point_level < 2 {
        return Err(ConfigError::field("params.point_level", "must resolve 1/4"));
    }
    if !p.units.is_power_of_two() {
        return Err(ConfigError::field("params.units", "must be a power of two"));
    }
    super::require_level_at_least(cfg, p.units.trailing_zeros(), "resolving the hypothesis sets")?;
    for (k, &(a, b)) in p.hypothesis_sets.iter().enumerate() {
        if !(a < b && b <= p.units) {
            return Err(ConfigError::field(format!("params.hypothesis_sets[{k}]"), "need a < b <= units"));
        }
    }
    if p.lambdas.iter().flatten().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(ConfigError::field("params.lambdas", "scalings must be positive"));
    }
    if !(p.q > 1.0 && p.q.is_finite()) {
        return Err(ConfigError::field("params.q", "need 1 < q < inf"));
    }
    if p.bound_weights.len() != 2 {
        return Err(ConfigError::field("params.bound_weights", "exactly two weights are required"));
    }
    if p.series_p.len() != 2 || p.series_p.iter().map(|x| 1.0 / x).sum::<f64>() >= 1.0 {
        return Err(ConfigError::field("params.series_p", "need two exponents with p > 1"));
    }
    Ok(())
}

fn random_function(run: &Run<'_>, grid: Grid, stream: u64) -> GridFunction {
    let mut rng = run.rng(stream);
    GridFunction::from_cells(grid, |_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..4.0) })
        .expect("finite")
}

fn homogeneity(run: &Run<'_>, grid: Grid, cases: usize) -> Vec<ReportRecord> {
    let level = grid.level();
    (0..cases)
        .map(|i| {
            let id = format!("homogeneity-{i:04}");
            let f = random_function(run, grid, 2 * i as u64);
            let g = random_function(run, grid, 2 * i as u64 + 1);
            let result = (|| {
                let base = operator_n(&f, &g)?;
                let mut worst = 0usize;
                for (lf, lg) in [(2.0, 1.0), (1.0, 4.0), (2.0, 4.0)] {
                    let scaled = operator_n(&f.scale(lf)?, &g.scale(lg)?)?;
                    worst += base
                        .values()
                        .iter()
                        .zip(scaled.values())
                        .filter(|(b, s)| (lf * lg) * **b != **s)
                        .count();
                }
                Ok::<_, extrapolab_core::Error>(worst)
            })();
            match result {
                Ok(bad) => run.record(id, level, bad as f64, 0.0, "cells differing from lambda N", bad == 0),
                Err(e) => run.failed(id, level, e),
            }
        })
        .collect()
}

fn point_value(run: &Run<'_>, level: u32) -> ReportRecord {
    let result = (|| {
        let grid = Grid::new(1, level)?;
        let chi = interval_indicator(grid, &[(0, 4)], 16);
        let n = operator_n(&chi, &chi)?;
        Ok::<_, extrapolab_core::Error>(n.values()[grid.cell_at([0.5, 0.0])])
    })();
    match result {
        Ok(v) => run.record("point-half", level, v, 0.25, "N(chi,chi)(1/2)", (v - 0.25).abs() <= POINT_TOL * 0.25),
        Err(e) => run.failed("point-half", level, e),
    }
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let p: Params = run.cfg.params()?;
    let fam = run.cfg.family;
    let mut out = Vec::new();
    out.push(point_value(run, p.point_level));
    for grid in run.grids() {
        let level = grid.level();
        out.extend(homogeneity(run, grid, p.homogeneity_cases));

        // hypothesis against 𝓜 with α = 1/2
        let mask = |(a, b): (u32, u32)| interval_indicator(grid, &[(a, b)], p.units).support();
        let (e, f) = (mask(p.hypothesis_sets[0]), mask(p.hypothesis_sets[1]));
        let mut base = None;
        for (k, &lambda) in p.lambdas.iter().enumerate() {
            let id = format!("case-hypothesis-{k}");
            match hypothesis_check(grid, &e, &f, lambda, 0.5, fam) {
                Ok(h) => {
                    let reference = *base.get_or_insert(h.ratio);
                    let dev = (h.ratio - reference).abs() / reference;
                    out.push(run.record(
                        id,
                        level,
                        h.lhs,
                        h.rhs,
                        format!("lambda={lambda:?} cell={} dev={dev:e}", h.witness_cell),
                        dev <= INVARIANCE_TOL,
                    ));
                }
                Err(e) => out.push(run.failed(id, level, e)),
            }
        }
        if let Some(c) = base {
            out.push(run.golden(&format!("hypothesis-L{level}"), level, c, GOLDEN_TOL));
        }

        // layer and endpoint bounds on two step functions
        let bounds = (|| {
            let ws = generate_vector(&p.bound_weights, grid, 0)?;
            let f1 = GridFunction::from_cells(grid, |i| {
                let x = (i as f64 + 0.5) / grid.side_cells() as f64;
                if x < 0.5 {
                    1.0 + 3.0 * x
                } else {
                    0.0
                }
            })?;
            let f2 = interval_indicator(grid, &[(p.units / 4, 3 * p.units / 4)], p.units);
            let layer = layer_bound_check(&f1, &f2, &ws, p.q, fam)?;
            let endpoint = endpoint_bound_check(&f1, &f2, &ws, p.q, fam)?;
            Ok::<_, extrapolab_core::Error>((layer, endpoint))
        })();
        match bounds {
            Ok((layer, endpoint)) => {
                out.push(run.record(
                    "case-layer",
                    level,
                    layer.lhs,
                    layer.norms,
                    format!(
                        "lhs/layers={:.6} layers/norms={:.6} audit={:.6}",
                        layer.lhs_over_layers, layer.layers_over_norms, layer.audit.value
                    ),
                    layer.constant.is_finite(),
                ));
                out.push(run.golden(&format!("layer-L{level}"), level, layer.constant, GOLDEN_TOL));
                out.push(run.record(
                    "case-endpoint",
                    level,
                    endpoint.lhs,
                    endpoint.rhs,
                    format!("audit={:.6} at {}", endpoint.audit.value, cube_label(&endpoint.audit.witness)),
                    endpoint.constant.is_finite(),
                ));
                out.push(run.golden(&format!("endpoint-L{level}"), level, endpoint.constant, GOLDEN_TOL));
            }
            Err(e) => out.push(run.failed("case-layer", level, e)),
        }

        // N* growth table: reported, no threshold
        match nstar_growth(grid, &p.nstar_counts) {
            Ok(rows) => {
                let mut table = format!("N* growth at L{level}\n  N  weak  l1  ratio");
                for r in rows {
                    table.push_str(&format!("\n  {}  {:.6}  {:.6}  {:.6}", r.spikes, r.weak, r.l1, r.ratio));
                    out.push(run.record(format!("nstar-{:04}", r.spikes), level, r.weak, r.l1, "no threshold", true));
                }
                run.notes.push(table);
            }
            Err(e) => out.push(run.failed("nstar", level, e)),
        }

        // series of scale-truncated maximal operators
        let series = (|| {
            let ws = generate_vector(&p.bound_weights, grid, 0)?;
            let f1 = interval_indicator(grid, &[(0, p.units / 8)], p.units);
            let f2 = interval_indicator(grid, &[(p.units / 16, p.units / 2)], p.units);
            series_sum_check(&[&f1, &f2], &ws, &p.series_p, &p.series_terms, fam.shifted)
        })();
        match series {
            Ok(s) => out.push(run.record(
                "series",
                level,
                s.aggregate,
                s.bound,
                format!("components={:?} triangle={}", s.component_constants, s.triangle_constant),
                s.holds(),
            )),
            Err(e) => out.push(run.failed("series", level, e)),
        }
    }
    Ok(out)
}
