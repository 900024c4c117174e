//! Exponent bookkeeping identities over random valid parameter draws.

use extrapolab_core::extrapolation::OffDiagExponents;
use extrapolab_core::weights::ExponentSystem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::Run;
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{case_id, ReportRecord};

/// Absolute tolerance for every derived identity.
const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    cfg.params::<Params>().map(|_| ())
}

fn draw_system(rng: &mut ChaCha8Rng) -> ExponentSystem {
    loop {
        let m = rng.gen_range(1..=3);
        let p: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..6.0)).collect();
        let mut r: Vec<f64> = p
            .iter()
            .map(|&pi| if rng.gen_bool(0.2) { pi } else { rng.gen_range(1.0..=pi) })
            .collect();
        let inv_p: f64 = p.iter().map(|x| 1.0 / x).sum();
        // 1/r_{m+1} > 1 − 1/p keeps δ_{m+1} positive
        let floor = (1.0 - inv_p).max(0.0);
        let inv_last = rng.gen_range(floor..1.0).max(floor + 1e-3).min(1.0);
        r.push(1.0 / inv_last);
        let alpha: Vec<f64> = p.iter().map(|&pi| rng.gen_range(0.01..=pi)).collect();
        if let Ok(sys) = ExponentSystem::new(p, r, alpha) {
            return sys;
        }
    }
}

fn draw_offdiag(rng: &mut ChaCha8Rng) -> OffDiagExponents {
    loop {
        let r0 = rng.gen_range(1.0..4.0);
        let p0 = if rng.gen_bool(0.1) { r0 } else { rng.gen_range(r0..8.0) };
        let s0 = if rng.gen_bool(0.3) { f64::INFINITY } else { rng.gen_range(0.5..20.0) };
        let q0 = rng.gen_range(0.05..s0.min(10.0));
        let alpha = rng.gen_range(0.01..=p0);
        if let Ok(x) = OffDiagExponents::new(r0, p0, q0, s0, alpha) {
            return x;
        }
    }
}

/// Largest residual among the system identities:
/// `Σ_{i≤m} 1/δᵢ = (1/r − 1) − 1/δ_{m+1}` and `1/ϱ = 1/δ_m + 1/δ_{m+1}`.
fn system_residual(sys: &ExponentSystem) -> f64 {
    let m = sys.m();
    let rho = (sys.inv_rho() - (sys.inv_delta(m - 1) + sys.inv_delta(m))).abs();
    sys.delta_sum_residual().max(rho)
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let count = run.cfg.cases_or(1000);
    let level = run.cfg.grid.levels[0];
    let ctx = &*run;
    Ok((0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = ctx.rng(i as u64);
            let sys = draw_system(&mut rng);
            let x = draw_offdiag(&mut rng);
            let a = system_residual(&sys);
            let [b, c] = x.identity_residuals();
            let xb = b.max(c);
            [
                ctx.record(
                    format!("{}-system", case_id(i)),
                    level,
                    a,
                    IDENTITY_TOL,
                    format!("p={:?} r={:?}", sys.p(), sys.r()),
                    a <= IDENTITY_TOL,
                ),
                ctx.record(
                    format!("{}-offdiag", case_id(i)),
                    level,
                    xb,
                    IDENTITY_TOL,
                    format!("r0={} p0={} q0={} s0={}", x.r0, x.p0, x.q0, x.s0),
                    xb <= IDENTITY_TOL,
                ),
            ]
        })
        .collect())
}
