//! Restricted weak type of `𝓜` with power weights on random indicator pairs,
//! tracked across resolutions.

use extrapolab_core::extrapolation::multilinear_ratio;
use extrapolab_core::weights::generate_vector;
use extrapolab_core::WeightKind;
use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::{interval_indicator, random_interval, require_dim, require_level_at_least, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{case_id, ReportRecord};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    p: Vec<f64>,
    exponent_range: [f64; 2],
    /// Endpoints are multiples of `1/units`.
    units: u32,
    growth_limit: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { p: vec![2.0, 2.0], exponent_range: [-0.5, 0.5], units: 256, growth_limit: 1.5 }
    }
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: Params = cfg.params()?;
    require_dim(cfg, 1)?;
    if p.p.is_empty() || p.p.iter().any(|&x| !(x >= 1.0 && x.is_finite())) {
        return Err(ConfigError::field("params.p", "need finite exponents p_i >= 1"));
    }
    let [lo, hi] = p.exponent_range;
    if !(lo > -1.0 && lo <= hi && hi.is_finite()) {
        return Err(ConfigError::field("params.exponent_range", "need -1 < lo <= hi < inf"));
    }
    if !p.units.is_power_of_two() {
        return Err(ConfigError::field("params.units", "must be a power of two"));
    }
    require_level_at_least(cfg, p.units.trailing_zeros(), "resolving the endpoints")?;
    Ok(())
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let params: Params = run.cfg.params()?;
    let count = run.cfg.cases_or(100);
    let fam = run.cfg.family;
    let grids = run.grids();
    let ctx = &*run;
    let mut out: Vec<ReportRecord> = (0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = ctx.rng(i as u64);
            let [lo, hi] = params.exponent_range;
            let kinds: Vec<WeightKind> =
                params.p.iter().map(|_| WeightKind::Power { exponent: rng.gen_range(lo..=hi) }).collect();
            let intervals: Vec<(u32, u32)> =
                params.p.iter().map(|_| random_interval(&mut rng, params.units)).collect();
            let id = case_id(i);
            grids
                .iter()
                .map(|&grid| {
                    let level = grid.level();
                    let result = (|| {
                        let ws = generate_vector(&kinds, grid, 0)?;
                        let fs: Vec<_> =
                            intervals.iter().map(|&iv| interval_indicator(grid, &[iv], params.units)).collect();
                        let refs: Vec<_> = fs.iter().collect();
                        multilinear_ratio(&refs, &ws, &params.p, fam)
                    })();
                    match result {
                        Ok(r) => ctx.record(
                            &id,
                            level,
                            r.weak,
                            r.rhs,
                            format!("strong_ratio={:.6} intervals={intervals:?}", r.strong_ratio),
                            r.weak_ratio.is_finite(),
                        ),
                        Err(e) => ctx.failed(&id, level, e),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let stability = run.stability(&out, params.growth_limit, true);
    out.extend(stability);
    Ok(out)
}
