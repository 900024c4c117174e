//! Structure of restricted vector weights: (a) the factorization when
//! `p_m = r_m`, (b) assembling the last weight when `p_m > r_m`.

use extrapolab_core::extrapolation::{assemble_last_weight, factorization_check};
use extrapolab_core::weights::{composite_class_check, generate, generate_vector};
use extrapolab_core::{CellBox, ExponentSystem, Grid, GridFunction, WeightKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::{cube_label, require_dim, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{case_id, ReportRecord};

const FORWARD_TOL: f64 = 1e-9;
const GOLDEN_TOL: f64 = 0.01;
const REFINE_LIMIT: f64 = 2.0;
const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ParamsA {
    m_range: [usize; 2],
    p_range: [f64; 2],
    exponent_range: [f64; 2],
    /// Also compare the composite weight with the vector characteristic.
    composite: bool,
}

impl Default for ParamsA {
    fn default() -> Self {
        ParamsA { m_range: [1, 3], p_range: [1.0, 4.0], exponent_range: [-0.5, 0.5], composite: true }
    }
}

pub(super) fn validate_a(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: ParamsA = cfg.params()?;
    require_dim(cfg, 1)?;
    if !(1 <= p.m_range[0] && p.m_range[0] <= p.m_range[1]) {
        return Err(ConfigError::field("params.m_range", "need 1 <= lo <= hi"));
    }
    if !(1.0 <= p.p_range[0] && p.p_range[0] <= p.p_range[1] && p.p_range[1].is_finite()) {
        return Err(ConfigError::field("params.p_range", "need 1 <= lo <= hi < inf"));
    }
    let [lo, hi] = p.exponent_range;
    if !(lo > -1.0 && lo <= hi && hi.is_finite()) {
        return Err(ConfigError::field("params.exponent_range", "need -1 < lo <= hi < inf"));
    }
    Ok(())
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// A valid system with `r_m = p_m`.
fn draw_system(rng: &mut ChaCha8Rng, p: &ParamsA) -> ExponentSystem {
    loop {
        let m = rng.gen_range(p.m_range[0]..=p.m_range[1]);
        let ps: Vec<f64> = (0..m).map(|_| uniform(rng, p.p_range)).collect();
        let mut rs: Vec<f64> = ps[..m - 1].iter().map(|&pi| rng.gen_range(1.0..=pi)).collect();
        rs.push(ps[m - 1]);
        let inv_p: f64 = ps.iter().map(|x| 1.0 / x).sum();
        let floor = (1.0 - inv_p).max(0.0);
        rs.push(1.0 / rng.gen_range(floor..=1.0).max(floor + 1e-3).min(1.0));
        let alpha: Vec<f64> = ps.iter().map(|&pi| rng.gen_range(0.01..=pi)).collect();
        if let Ok(sys) = ExponentSystem::new(ps, rs, alpha) {
            return sys;
        }
    }
}

pub(super) fn run_a(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let params: ParamsA = run.cfg.params()?;
    let count = run.cfg.cases_or(100);
    let fam = run.cfg.family;
    let grids = run.grids();
    let ctx = &*run;
    Ok((0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = ctx.rng(i as u64);
            let sys = draw_system(&mut rng, &params);
            let kinds: Vec<WeightKind> = (0..sys.m())
                .map(|_| {
                    let exponent = uniform(&mut rng, params.exponent_range);
                    if rng.gen_bool(0.5) {
                        WeightKind::Power { exponent }
                    } else {
                        WeightKind::ShiftedPower { exponent, center: rng.gen_range(0.0..1.0) }
                    }
                })
                .collect();
            let id = case_id(i);
            let mut out = Vec::new();
            for &grid in &grids {
                let level = grid.level();
                let ws = match generate_vector(&kinds, grid, 0) {
                    Ok(ws) => ws,
                    Err(e) => {
                        out.push(ctx.failed(&id, level, e));
                        continue;
                    }
                };
                match factorization_check(&ws, &sys, fam) {
                    Ok(rep) => out.push(ctx.record(
                        &id,
                        level,
                        rep.full.value,
                        rep.partial.value * rep.a1.value.powf(1.0 / rep.rho),
                        format!(
                            "{} p={:?} r={:?} reverse_a1={:.4} reverse_partial={:.4}",
                            cube_label(&rep.full.witness),
                            sys.p(),
                            sys.r(),
                            rep.reverse_a1_ratio,
                            rep.reverse_partial_ratio
                        ),
                        rep.forward_holds(FORWARD_TOL),
                    )),
                    Err(e) => out.push(ctx.failed(&id, level, e)),
                }
                if params.composite && sys.inv_r() > 1.0 {
                    let cid = format!("composite-{i:04}");
                    out.push(match composite_class_check(&ws, &sys, fam) {
                        Ok(c) => ctx.record(
                            cid,
                            level,
                            c.one_weight.value,
                            c.bound,
                            format!("P={:.4} holder={:.4}", c.exponent, c.holder_constant),
                            c.holds(FORWARD_TOL),
                        ),
                        Err(e) => ctx.failed(cid, level, e),
                    });
                }
            }
            out
        })
        .collect())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Assembly {
    p: Vec<f64>,
    r: Vec<f64>,
    alpha: Vec<f64>,
    /// `w₁, …, w_{m−1}`.
    prefix: Vec<WeightKind>,
    u: WeightKind,
    /// `g = χ_{[lo, hi)}`.
    g_interval: [f64; 2],
}

impl Assembly {
    fn system(&self) -> extrapolab_core::Result<ExponentSystem> {
        ExponentSystem::new(self.p.clone(), self.r.clone(), self.alpha.clone())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ParamsB {
    setups: Vec<Assembly>,
}

impl Default for ParamsB {
    fn default() -> Self {
        ParamsB {
            setups: vec![
                Assembly {
                    p: vec![2.0, 3.0],
                    r: vec![1.0, 2.0, 1.0],
                    alpha: vec![1.0, 1.0],
                    prefix: vec![WeightKind::Power { exponent: -0.3 }],
                    u: WeightKind::IndicatorSmoothed { lo: 0.25, hi: 0.5, theta: 0.5 },
                    g_interval: [0.5, 0.75],
                },
                Assembly {
                    p: vec![3.0, 2.0],
                    r: vec![2.0, 1.0, 1.0],
                    alpha: vec![2.0, 1.0],
                    prefix: vec![WeightKind::Power { exponent: 0.4 }],
                    u: WeightKind::IndicatorSmoothed { lo: 0.1, hi: 0.2, theta: 0.3 },
                    g_interval: [0.0, 0.125],
                },
            ],
        }
    }
}

pub(super) fn validate_b(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: ParamsB = cfg.params()?;
    require_dim(cfg, 1)?;
    for (k, s) in p.setups.iter().enumerate() {
        let path = format!("params.setups[{k}]");
        let sys = s.system().map_err(|e| ConfigError::field(&path, e))?;
        let m = sys.m();
        if !(sys.p()[m - 1] > sys.r()[m - 1]) {
            return Err(ConfigError::field(&path, "the assembly needs p_m > r_m"));
        }
        if s.prefix.len() + 1 != m {
            return Err(ConfigError::field(format!("{path}.prefix"), format!("expected {} weights", m - 1)));
        }
        let [lo, hi] = s.g_interval;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(ConfigError::field(format!("{path}.g_interval"), "need 0 <= lo < hi <= 1"));
        }
    }
    Ok(())
}

struct Assembled {
    dual_ratio: f64,
    assembled: f64,
    identity: f64,
    witness: String,
}

fn assemble(s: &Assembly, grid: Grid, run: &Run<'_>) -> extrapolab_core::Result<Assembled> {
    let sys = s.system()?;
    let prefix = generate_vector(&s.prefix, grid, 0)?;
    let u = generate(&s.u, grid, 0)?;
    let n = grid.side_cells() as f64;
    let [lo, hi] = s.g_interval;
    let cells = CellBox { lo: [(lo * n) as usize, 0], hi: [((hi * n).ceil() as usize).max((lo * n) as usize + 1), 1] };
    let g = GridFunction::indicator(grid, &cells, 1.0)?;
    let rep = assemble_last_weight(&prefix, &u, &g, &sys, run.cfg.family)?;
    Ok(Assembled {
        dual_ratio: rep.dual_ratio,
        assembled: rep.assembled.value,
        identity: rep.identity_residual,
        witness: format!(
            "dual at {} u_a1={:.4} partial={:.4}",
            cube_label(&rep.dual_witness),
            rep.u_a1.value,
            rep.partial.value
        ),
    })
}

pub(super) fn run_b(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let params: ParamsB = run.cfg.params()?;
    let grids = run.grids();
    let results: Vec<Vec<(Grid, extrapolab_core::Result<Assembled>)>> = {
        let ctx = &*run;
        params
            .setups
            .par_iter()
            .map(|s| grids.par_iter().map(|&g| (g, assemble(s, g, ctx))).collect())
            .collect()
    };
    let mut out = Vec::new();
    for (k, per_level) in results.into_iter().enumerate() {
        let id = format!("case-s{k}");
        let mut previous: Option<(u32, f64, f64)> = None;
        for (grid, res) in per_level {
            let level = grid.level();
            let a = match res {
                Ok(a) => a,
                Err(e) => {
                    out.push(run.failed(&id, level, e));
                    continue;
                }
            };
            out.push(run.record(&id, level, a.dual_ratio, 1.0, a.witness, a.dual_ratio.is_finite()));
            out.push(run.record(
                format!("assembled-s{k}"),
                level,
                a.assembled,
                1.0,
                "restricted vector characteristic",
                a.assembled.is_finite() && a.assembled > 0.0,
            ));
            out.push(run.record(
                format!("identity-s{k}"),
                level,
                a.identity,
                IDENTITY_TOL,
                "dual factor identity",
                a.identity <= IDENTITY_TOL,
            ));
            out.push(run.golden(&format!("dual_ratio-s{k}-L{level}"), level, a.dual_ratio, GOLDEN_TOL));
            if let Some((prev_level, dual, assembled)) = previous {
                for (what, now, before) in [("dual", a.dual_ratio, dual), ("assembled", a.assembled, assembled)] {
                    let r = now / before;
                    let factor = r.max(1.0 / r);
                    out.push(run.record(
                        format!("refine-s{k}-{what}"),
                        level,
                        factor,
                        REFINE_LIMIT,
                        format!("L{prev_level} -> L{level}"),
                        factor <= REFINE_LIMIT,
                    ));
                }
            }
            previous = Some((level, a.dual_ratio, a.assembled));
        }
    }
    Ok(out)
}
