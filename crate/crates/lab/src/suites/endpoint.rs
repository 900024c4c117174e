//! End-to-end endpoint check with `g = 𝓜(f⃗)` as the hypothesis pair, and the
//! diagonal index identity `L^{r,r} = L^r`.

use extrapolab_core::extrapolation::{diagonal_index_residual, endpoint_verify_maximal};
use extrapolab_core::weights::generate_vector;
use extrapolab_core::{ExponentSystem, WeightKind};
use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::{interval_indicator, random_interval, require_dim, require_level_at_least, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{case_id, ReportRecord};

const DIAGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    p: Vec<f64>,
    r: Vec<f64>,
    exponent_range: [f64; 2],
    units: u32,
    stability_limit: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            p: vec![2.0, 2.0],
            r: vec![1.0, 1.0, 1.0],
            exponent_range: [-0.5, 0.5],
            units: 256,
            stability_limit: 1.5,
        }
    }
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: Params = cfg.params()?;
    require_dim(cfg, 1)?;
    ExponentSystem::new(p.p.clone(), p.r.clone(), p.p.clone()).map_err(|e| ConfigError::field("params.r", e))?;
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
    let count = run.cfg.cases_or(50);
    let fam = run.cfg.family;
    let grids = run.grids();
    let ctx = &*run;
    let mut out: Vec<ReportRecord> = (0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = ctx.rng(i as u64);
            let [lo, hi] = params.exponent_range;
            let m = params.p.len();
            let kinds: Vec<WeightKind> =
                (0..m).map(|_| WeightKind::Power { exponent: rng.gen_range(lo..=hi) }).collect();
            let intervals: Vec<(u32, u32)> = (0..m).map(|_| random_interval(&mut rng, params.units)).collect();
            let alpha: Vec<f64> = params.p.iter().map(|&pi| rng.gen_range(0.05..=pi)).collect();
            let id = case_id(i);
            let mut rows = Vec::new();
            for &grid in &grids {
                let level = grid.level();
                let result = (|| {
                    let sys = ExponentSystem::new(params.p.clone(), params.r.clone(), alpha.clone())?;
                    let vs = generate_vector(&kinds, grid, 0)?;
                    let fs: Vec<_> =
                        intervals.iter().map(|&iv| interval_indicator(grid, &[iv], params.units)).collect();
                    let refs: Vec<_> = fs.iter().collect();
                    let rep = endpoint_verify_maximal(&refs, &vs, &sys, fam)?;
                    let mut diag = 0.0f64;
                    for (f, (v, &r)) in fs.iter().zip(vs.iter().zip(&params.r)) {
                        diag = diag.max(diagonal_index_residual(f, v, r)?);
                    }
                    Ok::<_, extrapolab_core::Error>((rep, diag))
                })();
                match result {
                    Ok((rep, diag)) => {
                        rows.push(ctx.record(
                            &id,
                            level,
                            rep.lhs,
                            rep.rhs,
                            format!("alpha={alpha:?} r_tilde={}", rep.r_tilde),
                            rep.constant.is_finite(),
                        ));
                        rows.push(ctx.record(
                            format!("diagonal-{i:04}"),
                            level,
                            diag,
                            DIAGONAL_TOL,
                            "L^{r,r} against L^r",
                            diag <= DIAGONAL_TOL,
                        ));
                    }
                    Err(e) => rows.push(ctx.failed(&id, level, e)),
                }
            }
            rows
        })
        .collect();
    let stability = run.stability(&out, params.stability_limit, false);
    out.extend(stability);
    Ok(out)
}
