//! The off-diagonal argument run end to end: cover and disjointness of the
//! level split, both estimate chains, the optimal `γ` and the spread of the
//! final constant over levels `y`.

use extrapolab_core::extrapolation::{offdiag_verify, y_grid, OffDiagExponents, OffDiagTrace};
use extrapolab_core::maximal::maximal;
use extrapolab_core::weights::generate;
use extrapolab_core::{CellBox, Grid, GridFunction, MaximalConfig, WeightKind};
use rayon::prelude::*;
use serde::Deserialize;

use super::{require_dim, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::ReportRecord;

const SPREAD_LIMIT: f64 = 4.0;
const GAMMA_TOL: f64 = 1e-6;
const GAMMA_POINTS: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Setup {
    r0: f64,
    p0: f64,
    q0: f64,
    /// `null` stands for `s₀ = ∞`.
    s0: Option<f64>,
    alpha: f64,
    w: WeightKind,
    mu: WeightKind,
    /// `f = χ_{[0, support)}`.
    support: f64,
    /// `g = (M f)^{g_power}`.
    g_power: f64,
}

impl Setup {
    fn exponents(&self) -> extrapolab_core::Result<OffDiagExponents> {
        OffDiagExponents::new(self.r0, self.p0, self.q0, self.s0.unwrap_or(f64::INFINITY), self.alpha)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    setups: Vec<Setup>,
}

impl Default for Params {
    fn default() -> Self {
        let one = WeightKind::Constant { value: 1.0 };
        Params {
            setups: vec![Setup {
                r0: 1.0,
                p0: 2.0,
                q0: 2.0 / 3.0,
                s0: None,
                alpha: 1.0,
                w: one.clone(),
                mu: one,
                support: 1.0 / 256.0,
                g_power: 2.0,
            }],
        }
    }
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: Params = cfg.params()?;
    require_dim(cfg, 1)?;
    for (k, s) in p.setups.iter().enumerate() {
        s.exponents().map_err(|e| ConfigError::field(format!("params.setups[{k}]"), e))?;
        if !(s.support > 0.0 && s.support <= 1.0) {
            return Err(ConfigError::field(format!("params.setups[{k}].support"), "must lie in (0, 1]"));
        }
        if !(s.g_power > 0.0 && s.g_power.is_finite()) {
            return Err(ConfigError::field(format!("params.setups[{k}].g_power"), "must be positive"));
        }
    }
    Ok(())
}

fn trace(s: &Setup, grid: Grid, run: &Run<'_>) -> extrapolab_core::Result<OffDiagTrace> {
    let x = s.exponents()?;
    let cells = ((s.support * grid.side_cells() as f64).ceil() as usize).max(1);
    let f = GridFunction::indicator(grid, &CellBox { lo: [0, 0], hi: [cells, 1] }, 1.0)?;
    let g = maximal(&f, &MaximalConfig::lebesgue(run.cfg.family))?.map(|v| v.powf(s.g_power))?;
    let w = generate(&s.w, grid, 0)?;
    let mu = generate(&s.mu, grid, 0)?;
    offdiag_verify(&f, &g, &w, &mu, &x, &y_grid(&g), run.cfg.family)
}

/// Smallest value of `Aγ^{−r₀} + Bγ^{r₀β}` over a log-spaced grid spanning
/// six decades around `center`.
fn grid_minimum(a: f64, b: f64, r0: f64, beta: f64, center: f64) -> f64 {
    (0..GAMMA_POINTS)
        .map(|j| {
            let t = -3.0 + 6.0 * j as f64 / (GAMMA_POINTS - 1) as f64;
            let gamma = center * 10f64.powf(t);
            a * gamma.powf(-r0) + b * gamma.powf(r0 * beta)
        })
        .fold(f64::INFINITY, f64::min)
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let params: Params = run.cfg.params()?;
    let grids = run.grids();
    let ctx = &*run;
    let jobs: Vec<(usize, Grid)> =
        (0..params.setups.len()).flat_map(|k| grids.iter().map(move |&g| (k, g))).collect();
    Ok(jobs
        .into_par_iter()
        .flat_map_iter(|(k, grid)| {
            let s = &params.setups[k];
            let level = grid.level();
            let mut out = Vec::new();
            let t = match trace(s, grid, ctx) {
                Ok(t) => t,
                Err(e) => {
                    out.push(ctx.failed(format!("case-s{k}"), level, e));
                    return out;
                }
            };
            let beta = t.exponents.beta();
            for (j, r) in t.rows.iter().enumerate() {
                out.push(ctx.record(
                    format!("case-s{k}-y{j}"),
                    level,
                    r.lhs,
                    r.bound,
                    format!("y={:e} C={:.6} masks={} chains={}", r.y, r.constant, r.masks_ok, r.chain_ok),
                    r.masks_ok && r.chain_ok && r.lhs <= r.bound * (1.0 + 1e-9),
                ));
                if beta > 0.0 && r.bound_e > 0.0 && r.bound_f > 0.0 {
                    let a = r.bound_e * r.gamma.powf(t.exponents.r0);
                    let b = r.bound_f * r.gamma.powf(-t.exponents.r0 * beta);
                    let best = grid_minimum(a, b, t.exponents.r0, beta, r.gamma);
                    out.push(ctx.record(
                        format!("gamma-s{k}-y{j}"),
                        level,
                        r.bound,
                        best,
                        format!("gamma*={:e}", r.gamma),
                        r.bound <= best * (1.0 + GAMMA_TOL),
                    ));
                }
            }
            let spread = t.constant_spread();
            out.push(ctx.record(
                format!("spread-s{k}"),
                level,
                spread,
                SPREAD_LIMIT,
                format!("sawyer={:.6} hypothesis={:.6}", t.sawyer_constant, t.hypothesis_constant),
                spread <= SPREAD_LIMIT,
            ));
            out.push(ctx.record(
                format!("membership-s{k}"),
                level,
                t.membership_residual,
                RESIDUAL_TOL,
                "v identity",
                t.membership_residual <= RESIDUAL_TOL,
            ));
            out
        })
        .collect())
}
