//! Maximal operators over cube families.
//!
//! `M_μ g(x) = sup_{Q ∋ x} μ(Q)⁻¹ ∫_Q g dμ` where `Q` runs over a
//! [`CubeFamily`]. Each layer of the family partitions the domain, so one pass
//! per layer computes every cube average and pushes it to the cells it covers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{
    box_integral, box_measure, same_grid, CellBox, CubeFamily, DyadicCube, FamilySpec, Grid,
    GridFunction, Weight,
};
use crate::math;

/// Cube family plus an optional measure density (Lebesgue when `None`).
#[derive(Debug, Clone, Copy)]
pub struct MaximalConfig<'a> {
    pub family: FamilySpec,
    pub mu: Option<&'a Weight>,
}

impl<'a> MaximalConfig<'a> {
    pub fn lebesgue(family: FamilySpec) -> Self {
        MaximalConfig { family, mu: None }
    }

    pub fn with_measure(family: FamilySpec, mu: &'a Weight) -> Self {
        MaximalConfig { family, mu: Some(mu) }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        match self.mu {
            Some(mu) => same_grid(grid, mu.grid()),
            None => Ok(()),
        }
    }
}

/// `M_μ g` on every cell. The single-cell cubes belong to every family, and the
/// output starts from `g` itself, so `M_μ g ≥ g` holds exactly.
pub fn maximal(g: &GridFunction, cfg: &MaximalConfig<'_>) -> Result<GridFunction> {
    let grid = *g.grid();
    cfg.check(&grid)?;
    let family = CubeFamily::new(grid, cfg.family);
    let mu = cfg.mu.map(|m| m.values());
    let mut out = g.values().to_vec();
    family.for_each_cube(|_, cells| {
        let avg = box_integral(&grid, g.values(), mu, cells) / box_measure(&grid, mu, cells);
        cells.for_each_index(&grid, |i| {
            if avg > out[i] {
                out[i] = avg;
            }
        });
    });
    GridFunction::new(grid, out)
}

/// `𝓜(f⃗)(x) = sup_{Q ∋ x} ∏ᵢ μ(Q)⁻¹ ∫_Q fᵢ dμ` (plain averages when `μ` is
/// absent).
pub fn multilinear_maximal(fs: &[&GridFunction], cfg: &MaximalConfig<'_>) -> Result<GridFunction> {
    let Some(first) = fs.first() else {
        return Err(crate::error::param("multilinear maximal function needs at least one input"));
    };
    let grid = *first.grid();
    for f in fs {
        same_grid(&grid, f.grid())?;
    }
    cfg.check(&grid)?;
    let family = CubeFamily::new(grid, cfg.family);
    let mu = cfg.mu.map(|m| m.values());
    let mut out: Vec<f64> =
        (0..grid.cell_count()).map(|i| fs.iter().map(|f| f.values()[i]).product()).collect();
    family.for_each_cube(|_, cells| {
        let measure = box_measure(&grid, mu, cells);
        let mut prod = 1.0;
        for f in fs {
            prod *= box_integral(&grid, f.values(), mu, cells) / measure;
            if prod == 0.0 {
                return;
            }
        }
        cells.for_each_index(&grid, |i| {
            if prod > out[i] {
                out[i] = prod;
            }
        });
    });
    GridFunction::new(grid, out)
}

/// `M(μχ_Q)` on the cells of `Q` with plain averages, returned as
/// `∫_Q M(μχ_Q) dx`.
pub(crate) fn localized_maximal_integral(
    family: &CubeFamily,
    mu: &[f64],
    region: &CellBox,
) -> f64 {
    let grid = *family.grid();
    let width = region.hi[0] - region.lo[0];
    let mut local = vec![0.0f64; region.cell_count()];
    let slot = |i: usize| {
        let c = grid.coords(i);
        (c[1] - region.lo[1]) * width + (c[0] - region.lo[0])
    };
    family.for_each_cube_meeting(region, |_, cells| {
        let part = cells.intersect(region);
        if part.is_empty() {
            return;
        }
        let avg = box_integral(&grid, mu, None, &part) / cells.volume(&grid);
        part.for_each_index(&grid, |i| {
            let s = slot(i);
            if avg > local[s] {
                local[s] = avg;
            }
        });
    });
    math::compensated_sum(local.iter().copied()) * grid.cell_volume()
}

/// Two-sided comparison of `M_μ g` with `ess inf_Q M_μ g + M_μ(g χ_{3Q})` on
/// the cells of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitReport {
    /// `max_{x∈Q} M_μ g / (inf + local)`.
    pub upper: f64,
    /// `min_{x∈Q} M_μ g / (inf + local)`.
    pub lower: f64,
    pub ess_inf: f64,
    pub upper_cell: usize,
}

pub fn local_global_split_check(
    g: &GridFunction,
    mu: &Weight,
    cube: &DyadicCube,
    family: FamilySpec,
) -> Result<SplitReport> {
    let grid = *g.grid();
    let cells = cube.cell_box(&grid)?;
    let triple = cube.triple_box(&grid)?;
    let cfg = MaximalConfig::with_measure(family, mu);
    let full = maximal(g, &cfg)?;
    let local = maximal(&g.restrict(&triple), &cfg)?;
    let (ess_inf, _) = crate::grid::box_bounds(&grid, full.values(), &cells);
    let mut report = SplitReport { upper: 0.0, lower: f64::INFINITY, ess_inf, upper_cell: 0 };
    cells.for_each_index(&grid, |i| {
        let a = full.values()[i];
        let b = ess_inf + local.values()[i];
        let ratio = if b > 0.0 {
            a / b
        } else if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        if ratio > report.upper {
            report.upper = ratio;
            report.upper_cell = i;
        }
        report.lower = report.lower.min(ratio);
    });
    Ok(report)
}

/// Floor applied to Rubio de Francia outputs, relative to their maximum.
pub const RDF_FLOOR: f64 = 1.0 / (1u64 << 40) as f64;

/// Largest iteration count accepted by [`rdf_iterate`].
pub const RDF_MAX_STEPS: usize = 12;

fn l2_norm(f: &GridFunction) -> f64 {
    let s = math::compensated_sum(f.values().iter().map(|v| v * v));
    math::sqrt(s * f.grid().cell_volume())
}

/// Measured `2·max ‖Mh‖₂/‖h‖₂` over the probes `g` and the indicator of the
/// first dyadic cube of half the grid level.
pub fn measured_norm_bound(g: &GridFunction, cfg: &MaximalConfig<'_>) -> Result<f64> {
    let grid = *g.grid();
    let probe_cube = DyadicCube::new(grid.level() / 2, [0, 0], [0, 0]);
    let probe = GridFunction::indicator(grid, &probe_cube.cell_box(&grid)?, 1.0)?;
    let mut best = 1.0f64;
    for h in [g, &probe] {
        let n = l2_norm(h);
        if n > 0.0 {
            best = best.max(l2_norm(&maximal(h, cfg)?) / n);
        }
    }
    Ok(2.0 * best)
}

/// Rubio de Francia sum `Σ_{j ≤ k} M^j g / (2K)^j` with `K` from
/// [`measured_norm_bound`], floored at `RDF_FLOOR · max`.
pub fn rdf_iterate(g: &GridFunction, k: usize, cfg: &MaximalConfig<'_>) -> Result<Weight> {
    if g.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if k > RDF_MAX_STEPS {
        return Err(crate::error::param(alloc::format!(
            "at most {RDF_MAX_STEPS} iterations are supported, got {k}"
        )));
    }
    let big_k = measured_norm_bound(g, cfg)?;
    let grid = *g.grid();
    let mut acc = g.values().to_vec();
    let mut term = g.clone();
    let mut scale = 1.0;
    for _ in 0..k {
        term = maximal(&term, cfg)?;
        scale /= 2.0 * big_k;
        for (a, t) in acc.iter_mut().zip(term.values()) {
            *a += t * scale;
        }
    }
    let floor = RDF_FLOOR * acc.iter().copied().fold(0.0, f64::max);
    for a in &mut acc {
        *a = a.max(floor);
    }
    Weight::new(grid, acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximal_of_half_indicator() {
        let g = Grid::new(1, 3).unwrap();
        let f = GridFunction::from_cells(g, |i| if i < 4 { 1.0 } else { 0.0 }).unwrap();
        let m = maximal(&f, &MaximalConfig::lebesgue(FamilySpec::DYADIC)).unwrap();
        for i in 0..4 {
            assert_eq!(m.values()[i], 1.0);
        }
        for i in 4..8 {
            assert_eq!(m.values()[i], 0.5);
        }
    }

    #[test]
    fn constants_are_fixed() {
        let g = Grid::new(2, 4).unwrap();
        let c = GridFunction::constant(g, 0.75).unwrap();
        let mu = Weight::new(g, (0..256).map(|i| 1.0 + (i % 7) as f64).collect()).unwrap();
        for cfg in [
            MaximalConfig::lebesgue(FamilySpec::SHIFTED),
            MaximalConfig::with_measure(FamilySpec::DYADIC, &mu),
        ] {
            let m = maximal(&c, &cfg).unwrap();
            assert!(m.values().iter().all(|&v| (v - 0.75).abs() < 1e-15));
        }
        let d = GridFunction::constant(g, 2.0).unwrap();
        let mm = multilinear_maximal(&[&c, &d], &MaximalConfig::lebesgue(FamilySpec::SHIFTED)).unwrap();
        assert!(mm.values().iter().all(|&v| (v - 1.5).abs() < 1e-15));
    }

    #[test]
    fn multilinear_small_cube_example() {
        let g = Grid::new(1, 6).unwrap();
        let f1 = GridFunction::from_cells(g, |i| if i < 4 { 1.0 } else { 0.0 }).unwrap();
        let f2 = GridFunction::constant(g, 1.0).unwrap();
        let m = multilinear_maximal(&[&f1, &f2], &MaximalConfig::lebesgue(FamilySpec::DYADIC)).unwrap();
        for i in 32..64 {
            assert_eq!(m.values()[i], 0.0625);
        }
        assert!(multilinear_maximal(&[], &MaximalConfig::lebesgue(FamilySpec::DYADIC)).is_err());
    }

    #[test]
    fn split_dyadic_upper_is_one() {
        let g = Grid::new(1, 6).unwrap();
        let f = GridFunction::from_cells(g, |i| ((i * 37) % 11) as f64).unwrap();
        let mu = Weight::new(g, (0..64).map(|i| 1.0 + i as f64 / 8.0).collect()).unwrap();
        let q = DyadicCube::new(3, [5, 0], [0, 0]);
        let r = local_global_split_check(&f, &mu, &q, FamilySpec::DYADIC).unwrap();
        assert!(r.upper <= 1.0 + 1e-12);
        assert!(r.lower >= 0.5 - 1e-12);
    }

    #[test]
    fn rdf_constant_input() {
        let g = Grid::new(1, 5).unwrap();
        let one = GridFunction::constant(g, 1.0).unwrap();
        let w = rdf_iterate(&one, 4, &MaximalConfig::lebesgue(FamilySpec::DYADIC)).unwrap();
        let first = w.values()[0];
        assert!(w.values().iter().all(|&v| v == first));
        assert!(rdf_iterate(&GridFunction::zeros(g), 2, &MaximalConfig::lebesgue(FamilySpec::DYADIC)).is_err());
        assert!(rdf_iterate(&one, 13, &MaximalConfig::lebesgue(FamilySpec::DYADIC)).is_err());
    }
}
