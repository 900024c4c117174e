use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};
use crate::grid::{CellBox, DyadicCube, FamilySpec, Grid, GridFunction, Weight};
use crate::math;
use crate::maximal::{maximal, rdf_iterate, MaximalConfig};

/// Test weight families. Power-type kinds store exact cell averages.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum WeightKind {
    Constant { value: f64 },
    /// `|x|^a` (the radial power in two dimensions).
    Power { exponent: f64 },
    /// `x₁^{a₁} x₂^{a₂}`; only `a₁` is used in one dimension.
    ProductOfPowers { exponents: [f64; 2] },
    /// `|x₁ − c|^a`, depending on the first coordinate only.
    ShiftedPower { exponent: f64, center: f64 },
    /// Rubio de Francia sum started from `spikes` random cells.
    RdfRandom { steps: usize, spikes: usize, shifted: bool },
    /// `(M χ_{[lo,hi)^d})^θ` with `0 ≤ θ < 1`.
    IndicatorSmoothed { lo: f64, hi: f64, theta: f64 },
}

fn integrable(a: f64, dim: usize) -> Result<()> {
    if a > -1.0 / dim as f64 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::NonIntegrable { exponent: a, dim })
    }
}

/// Antiderivative of `sign(t)|t|^a` vanishing at `0`: `F(t) = sign(t)|t|^{a+1}/(a+1)`.
fn signed_power_primitive(t: f64, a: f64) -> f64 {
    let v = math::powf(math::abs(t), a + 1.0) / (a + 1.0);
    if t < 0.0 {
        -v
    } else {
        v
    }
}

/// Average of `x^a` over `[u, v] ⊂ [0, ∞)`.
pub(crate) fn power_average(u: f64, v: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    (signed_power_primitive(v, a) - signed_power_primitive(u, a)) / (v - u)
}

/// Average of `|x − c|^a` over `[u, v]`.
fn shifted_power_average(u: f64, v: f64, a: f64, c: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    // ∫ |t|^a dt = G(t) with G odd, G(t) = sign(t)|t|^{a+1}/(a+1)
    (signed_power_primitive(v - c, a) - signed_power_primitive(u - c, a)) / (v - u)
}

/// Average of `|x|^a` over the square `[x0, x0+h) × [y0, y0+h)`.
fn radial_power_average(x0: f64, y0: f64, h: f64, a: f64, nodes: &[(f64, f64)]) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    if x0 == 0.0 && y0 == 0.0 {
        // polar coordinates over the two triangles of the corner cell:
        // ⨍ = h^a · (2/(a+2)) ∫_0^{π/4} sec^{a+2}θ dθ
        let half = core::f64::consts::FRAC_PI_8;
        let mut s = 0.0;
        for (t, wt) in math::gauss_legendre(24) {
            let theta = half * (t + 1.0);
            s += wt * half * math::powf(1.0 / math::cos(theta), a + 2.0);
        }
        return math::powf(h, a) * 2.0 / (a + 2.0) * s;
    }
    let mut s = 0.0;
    for &(tx, wx) in nodes {
        let x = x0 + 0.5 * h * (tx + 1.0);
        for &(ty, wy) in nodes {
            let y = y0 + 0.5 * h * (ty + 1.0);
            s += wx * wy * math::powf(x * x + y * y, 0.5 * a);
        }
    }
    s / 4.0
}

/// Deterministic weight of the given kind; `seed` only matters for random kinds.
pub fn generate(kind: &WeightKind, grid: Grid, seed: u64) -> Result<Weight> {
    let h = grid.cell_width();
    let n = grid.side_cells();
    match *kind {
        WeightKind::Constant { value } => Weight::constant(grid, value),
        WeightKind::Power { exponent: a } => {
            integrable(a, grid.dim())?;
            if grid.dim() == 1 {
                Weight::new(grid, (0..n).map(|i| power_average(i as f64 * h, (i + 1) as f64 * h, a)).collect())
            } else {
                let nodes = math::gauss_legendre(8);
                let values = (0..grid.cell_count())
                    .map(|i| {
                        let o = grid.cell_origin(i);
                        radial_power_average(o[0], o[1], h, a, &nodes)
                    })
                    .collect();
                Weight::new(grid, values)
            }
        }
        WeightKind::ProductOfPowers { exponents } => {
            let axes = if grid.dim() == 1 { &exponents[..1] } else { &exponents[..] };
            for &a in axes {
                integrable(a, 1)?;
            }
            let per_axis: Vec<Vec<f64>> = axes
                .iter()
                .map(|&a| (0..n).map(|i| power_average(i as f64 * h, (i + 1) as f64 * h, a)).collect())
                .collect();
            let values = (0..grid.cell_count())
                .map(|i| {
                    let c = grid.coords(i);
                    per_axis.iter().enumerate().map(|(ax, v)| v[c[ax]]).product()
                })
                .collect();
            Weight::new(grid, values)
        }
        WeightKind::ShiftedPower { exponent: a, center } => {
            integrable(a, 1)?;
            let col: Vec<f64> =
                (0..n).map(|i| shifted_power_average(i as f64 * h, (i + 1) as f64 * h, a, center)).collect();
            Weight::new(grid, (0..grid.cell_count()).map(|i| col[grid.coords(i)[0]]).collect())
        }
        WeightKind::RdfRandom { steps, spikes, shifted } => {
            if spikes == 0 || spikes > grid.cell_count() {
                return Err(param(alloc::format!("spike count {spikes} out of range")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut mask = alloc::vec![false; grid.cell_count()];
            for i in sample(&mut rng, grid.cell_count(), spikes) {
                mask[i] = true;
            }
            let g = GridFunction::from_mask(grid, &mask)?;
            let family = if shifted { FamilySpec::SHIFTED } else { FamilySpec::DYADIC };
            rdf_iterate(&g, steps, &MaximalConfig::lebesgue(family))
        }
        WeightKind::IndicatorSmoothed { lo, hi, theta } => {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) || !(0.0..1.0).contains(&theta) {
                return Err(param("indicator-smoothed weight needs 0 <= lo < hi <= 1 and 0 <= theta < 1"));
            }
            let a = ((lo / h) as usize).min(n - 1);
            let b = (math::ceil(hi / h) as usize).clamp(a + 1, n);
            let hi_y = if grid.dim() == 2 { b } else { 1 };
            let lo_y = if grid.dim() == 2 { a } else { 0 };
            let cells = CellBox { lo: [a, lo_y], hi: [b, hi_y] };
            let chi = GridFunction::indicator(grid, &cells, 1.0)?;
            let m = maximal(&chi, &MaximalConfig::lebesgue(FamilySpec::DYADIC))?;
            Weight::from_function(m.map(|v| math::powf(v, theta))?)
        }
    }
}

/// Weight vector drawn from a list of kinds with seeds `seed, seed+1, …`.
pub fn generate_vector(kinds: &[WeightKind], grid: Grid, seed: u64) -> Result<Vec<Weight>> {
    kinds.iter().enumerate().map(|(i, k)| generate(k, grid, seed.wrapping_add(i as u64))).collect()
}

/// Unshifted dyadic cube of the given level containing the point `x`.
pub fn cube_at(grid: &Grid, level: u32, x: [f64; 2]) -> DyadicCube {
    DyadicCube::containing(grid, level, grid.cell_at(x))
}
