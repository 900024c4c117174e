//! Restricted vector characteristic with `r⃗ = 1⃗` against its
//! reformulation through `‖χ_Q wᵢ⁻¹‖_{L^{pᵢ',∞}(wᵢ/|Q|)}`.
//!
//! Per factor the two quantities are the two sides of the cube norm
//! equivalence with `q = pᵢ'`, `a = 1/pᵢ`, `b = 0`, so
//! `apr_r1 ≤ apr ≤ ∏ C(pᵢ', 0) · apr_r1`.

use extrapolab_core::lorentz::equivalence_band_constant;
use extrapolab_core::weights::{apr_constant, apr_r1_constant, generate_vector};
use extrapolab_core::{ExponentSystem, WeightKind};
use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::{cube_label, require_dim, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{case_id, ReportRecord};

const RATIO_BAND: f64 = 16.0;
const REL_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    m: usize,
    p_range: [f64; 2],
}

impl Default for Params {
    fn default() -> Self {
        Params { m: 2, p_range: [1.0, 3.0] }
    }
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: Params = cfg.params()?;
    require_dim(cfg, 1)?;
    if p.m == 0 {
        return Err(ConfigError::field("params.m", "must be positive"));
    }
    if !(1.0 <= p.p_range[0] && p.p_range[0] <= p.p_range[1] && p.p_range[1].is_finite()) {
        return Err(ConfigError::field("params.p_range", "need 1 <= lo <= hi < inf"));
    }
    Ok(())
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let params: Params = run.cfg.params()?;
    let count = run.cfg.cases_or(100);
    let fam = run.cfg.family;
    let grids = run.grids();
    let ctx = &*run;
    Ok((0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = ctx.rng(i as u64);
            let [lo, hi] = params.p_range;
            let p: Vec<f64> = (0..params.m).map(|_| if lo == hi { lo } else { rng.gen_range(lo..=hi) }).collect();
            let kinds: Vec<WeightKind> = p
                .iter()
                .map(|&pi| {
                    let exponent = rng.gen_range(-0.8..=(0.8 * (pi - 1.0)).max(0.0));
                    if rng.gen_bool(0.5) {
                        WeightKind::Power { exponent }
                    } else {
                        WeightKind::ShiftedPower { exponent, center: rng.gen_range(0.0..1.0) }
                    }
                })
                .collect();
            let band: f64 = p.iter().map(|&pi| equivalence_band_constant(conjugate(pi), 0.0)).product();
            let id = case_id(i);
            grids
                .iter()
                .map(|&grid| {
                    let level = grid.level();
                    let result = (|| {
                        let ws = generate_vector(&kinds, grid, 0)?;
                        let sys = ExponentSystem::restricted(p.clone())?;
                        Ok::<_, extrapolab_core::Error>((
                            apr_constant(&ws, &sys, fam)?,
                            apr_r1_constant(&ws, &p, fam)?,
                        ))
                    })();
                    match result {
                        Ok((general, r1)) => {
                            let ratio = general.value / r1.value;
                            let pass = ratio >= 1.0 - REL_TOL
                                && ratio <= band * (1.0 + REL_TOL)
                                && (1.0 / RATIO_BAND..=RATIO_BAND).contains(&ratio);
                            ctx.record(
                                &id,
                                level,
                                general.value,
                                r1.value,
                                format!("{} band={band:.4} p={p:?}", cube_label(&general.witness)),
                                pass,
                            )
                        }
                        Err(e) => ctx.failed(&id, level, e),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect())
}
