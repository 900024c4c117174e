//! Two-sided equivalence between `‖χ_Q v⁻¹‖_{L^{q,∞}(v)}` and
//! `‖χ_Q v^{-a}‖^k_{L^{kq,∞}(v^b)}` on random cubes, with the band bracket
//! `S ≤ ‖χ_Q v⁻¹‖ ≤ 2S` and the drift between consecutive resolutions.

use extrapolab_core::lorentz::{
    cube_inverse_weak_norm, dyadic_level_sup, equivalence_band_constant, norm_equivalence_check,
};
use extrapolab_core::weights::{cube_at, generate};
use extrapolab_core::{Grid, WeightKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::{cube_label, require_dim, require_level_at_least, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{case_id, ReportRecord};

const RATIO_BAND: f64 = 16.0;
const BRACKET_TOL: f64 = 1e-9;
const DRIFT_LIMIT: f64 = 2.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    /// Cube levels are drawn from `0..=max_cube_level`.
    max_cube_level: u32,
    /// Rejection bound on the band constant of `(q, b)`.
    max_band_constant: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { max_cube_level: 6, max_band_constant: 8.0 }
    }
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: Params = cfg.params()?;
    require_dim(cfg, 1)?;
    require_level_at_least(cfg, p.max_cube_level, "the cube draw")?;
    if !(p.max_band_constant > 1.0) {
        return Err(ConfigError::field("params.max_band_constant", "must exceed 1"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Case {
    kind: WeightKind,
    level: u32,
    point: f64,
    q: f64,
    a: f64,
    b: f64,
}

fn draw(rng: &mut ChaCha8Rng, p: &Params) -> Case {
    let (q, b) = loop {
        let q = rng.gen_range(1.0..=4.0);
        let b = rng.gen_range(0.0..0.9);
        if equivalence_band_constant(q, b) <= p.max_band_constant {
            break (q, b);
        }
    };
    // x^e keeps ‖χ_Q v⁻¹‖_{L^{q,∞}(v)} finite in the limit when e(q−1) ≤ 1
    let top = if q > 1.0 { (0.9 / (q - 1.0)).min(1.5) } else { 1.5 };
    let exponent = rng.gen_range(-0.8..top);
    let kind = if rng.gen_bool(0.5) {
        WeightKind::Power { exponent }
    } else {
        WeightKind::ShiftedPower { exponent, center: rng.gen_range(0.0..1.0) }
    };
    Case {
        kind,
        level: rng.gen_range(0..=p.max_cube_level),
        point: rng.gen_range(0.0..1.0),
        q,
        a: rng.gen_range(0.05..0.95),
        b,
    }
}

struct Measured {
    ratio: f64,
    lhs: f64,
    rhs: f64,
    band: f64,
    weak: f64,
    witness: String,
}

fn measure(case: &Case, grid: Grid) -> extrapolab_core::Result<Measured> {
    let v = generate(&case.kind, grid, 0)?;
    let cube = cube_at(&grid, case.level, [case.point, 0.0]);
    let eq = norm_equivalence_check(&v, &cube, case.q, case.a, case.b)?;
    Ok(Measured {
        ratio: eq.ratio,
        lhs: eq.lhs,
        rhs: eq.rhs_pow_k,
        band: dyadic_level_sup(&v, &cube, case.q)?,
        weak: cube_inverse_weak_norm(&v, &cube, case.q)?,
        witness: cube_label(&cube),
    })
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let p: Params = run.cfg.params()?;
    let count = run.cfg.cases_or(200);
    let grids = run.grids();
    let ctx = &*run;
    Ok((0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let case = draw(&mut ctx.rng(i as u64), &p);
            let id = case_id(i);
            let mut out = Vec::new();
            let mut previous: Option<(u32, f64)> = None;
            for &grid in &grids {
                let level = grid.level();
                match measure(&case, grid) {
                    Ok(m) => {
                        let pass = m.ratio.is_finite() && (1.0 / RATIO_BAND..=RATIO_BAND).contains(&m.ratio);
                        let detail = format!(
                            "{} q={:.4} a={:.4} b={:.4} {:?}",
                            m.witness, case.q, case.a, case.b, case.kind
                        );
                        out.push(ctx.record(&id, level, m.lhs, m.rhs, detail, pass));
                        let bracket = m.band <= m.weak * (1.0 + BRACKET_TOL)
                            && m.weak <= 2.0 * m.band * (1.0 + BRACKET_TOL);
                        out.push(ctx.record(
                            format!("band-{i:04}"),
                            level,
                            m.weak,
                            m.band,
                            "S <= W <= 2S",
                            bracket,
                        ));
                        if let Some((prev_level, prev)) = previous {
                            let r = m.ratio / prev;
                            let drift = r.max(1.0 / r);
                            out.push(ctx.record(
                                format!("drift-{i:04}"),
                                level,
                                drift,
                                DRIFT_LIMIT,
                                format!("L{prev_level} -> L{level}"),
                                drift <= DRIFT_LIMIT,
                            ));
                        }
                        previous = Some((level, m.ratio));
                    }
                    Err(e) => out.push(ctx.failed(&id, level, e)),
                }
            }
            out
        })
        .collect())
}
