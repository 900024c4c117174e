//! Sawyer-type ratio `‖M_μ f / v‖_{L^{1,∞}(u v μ)} / ‖f‖_{L¹(u μ)}` over random
//! step functions against fixed audited triples `(u, v, μ)`.

use extrapolab_core::extrapolation::sawyer_ratio;
use extrapolab_core::weights::{a1_constant, ainf_constant, cube_at, generate};
use extrapolab_core::{FamilySpec, GridFunction, Weight, WeightKind};
use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::{cube_label, require_dim, Run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{case_id, ReportRecord};

const GOLDEN_TOL: f64 = 0.01;
/// The dyadic maximal operator is weak `(1,1)` with constant one.
const INDICATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Triple {
    u: WeightKind,
    v: WeightKind,
    mu: WeightKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    triples: Vec<Triple>,
    indicator_cases: usize,
}

impl Default for Params {
    fn default() -> Self {
        let c = |value| WeightKind::Constant { value };
        let pw = |exponent| WeightKind::Power { exponent };
        Params {
            triples: vec![
                Triple { u: pw(-0.3), v: pw(0.5), mu: c(1.0) },
                Triple { u: pw(-0.2), v: WeightKind::ShiftedPower { exponent: -0.4, center: 0.5 }, mu: pw(0.3) },
                Triple { u: c(1.0), v: pw(-0.5), mu: pw(-0.3) },
            ],
            indicator_cases: 20,
        }
    }
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let p: Params = cfg.params()?;
    require_dim(cfg, 1)?;
    if p.triples.is_empty() {
        return Err(ConfigError::field("params.triples", "at least one triple is required"));
    }
    Ok(())
}

struct Triplet {
    u: Weight,
    v: Weight,
    mu: Weight,
}

fn random_step(rng: &mut impl Rng, grid: extrapolab_core::Grid) -> GridFunction {
    let n = grid.side_cells();
    let pieces: Vec<(usize, usize, f64)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(a + 1..=n.min(a + n / 4 + 1));
            (a, b, rng.gen_range(0.1..10.0))
        })
        .collect();
    GridFunction::from_cells(grid, |i| {
        pieces.iter().filter(|&&(a, b, _)| (a..b).contains(&i)).map(|p| p.2).sum()
    })
    .expect("finite")
}

pub(super) fn run(run: &mut Run<'_>) -> Result<Vec<ReportRecord>, ConfigError> {
    let params: Params = run.cfg.params()?;
    let count = run.cfg.cases_or(100);
    let fam = run.cfg.family;
    let mut out = Vec::new();
    for grid in run.grids() {
        let level = grid.level();
        let mut triples = Vec::new();
        for (k, t) in params.triples.iter().enumerate() {
            let built = (|| {
                Ok::<_, extrapolab_core::Error>(Triplet {
                    u: generate(&t.u, grid, 0)?,
                    v: generate(&t.v, grid, 0)?,
                    mu: generate(&t.mu, grid, 0)?,
                })
            })();
            match built {
                Ok(tr) => {
                    for (what, est) in [
                        ("a1-u", a1_constant(&tr.u, Some(&tr.mu), fam)),
                        ("ainf-v", ainf_constant(&tr.v, fam)),
                    ] {
                        let id = format!("audit-t{k}-{what}");
                        out.push(match est {
                            Ok(e) => run.record(id, level, e.value, 1.0, cube_label(&e.witness), e.value.is_finite()),
                            Err(e) => run.failed(id, level, e),
                        });
                    }
                    triples.push(tr);
                }
                Err(e) => {
                    out.push(run.failed(format!("audit-t{k}"), level, e));
                    return Ok(out);
                }
            }
        }
        let ctx = &*run;
        let cases: Vec<ReportRecord> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ctx.rng(i as u64);
                let f = random_step(&mut rng, grid);
                let k = i % triples.len();
                let t = &triples[k];
                match sawyer_ratio(&f, &t.u, &t.v, &t.mu, fam) {
                    Ok(r) => ctx.record(case_id(i), level, r, 1.0, format!("triple {k}"), r.is_finite()),
                    Err(e) => ctx.failed(case_id(i), level, e),
                }
            })
            .collect();
        let max = cases.iter().map(|r| r.constant).fold(f64::NEG_INFINITY, f64::max);
        out.extend(cases);
        let indicators: Vec<ReportRecord> = (0..params.indicator_cases)
            .into_par_iter()
            .map(|i| {
                let mut rng = ctx.rng(10_000 + i as u64);
                let cube = cube_at(&grid, rng.gen_range(0..=level.min(8)), [rng.gen_range(0.0..1.0), 0.0]);
                let k = i % triples.len();
                let id = format!("indicator-{i:04}");
                let result = (|| {
                    let chi = GridFunction::indicator(grid, &cube.cell_box(&grid)?, 1.0)?;
                    let one = Weight::ones(grid);
                    sawyer_ratio(&chi, &one, &one, &triples[k].mu, FamilySpec::DYADIC)
                })();
                match result {
                    Ok(r) => ctx.record(
                        id,
                        level,
                        r,
                        1.0,
                        format!("{} triple {k}", cube_label(&cube)),
                        r <= 1.0 + INDICATOR_TOL,
                    ),
                    Err(e) => ctx.failed(id, level, e),
                }
            })
            .collect();
        out.extend(indicators);
        out.push(run.golden(&format!("max_ratio-L{level}"), level, max, GOLDEN_TOL));
    }
    Ok(out)
}
