//! The bilinear operator `N`, its square root `T` and the linear operator `N*`
//! on one-dimensional grids.
//!
//! For each cell `x` the shifts `y = jΔ` with `j ≠ 0` and `x + y` inside the
//! domain carry the value `h(j)`. The supremum over `λ` of
//! `λ · |{h > λ}|^k` is attained just below one of the values of `h`, so with
//! the positive values sorted as `a₁ ≥ a₂ ≥ …` it equals `max_i a_i (iΔ)^k`.

use alloc::vec::Vec;

use crate::error::{param, Result};
use crate::grid::{same_grid, Grid, GridFunction};
use crate::lorentz::weak_norm;
use crate::math;

fn require_line(grid: &Grid) -> Result<()> {
    if grid.dim() == 1 {
        Ok(())
    } else {
        Err(param("this operator is defined on one-dimensional grids only"))
    }
}

/// Kernel value `|y|^{−k}` on the shift `j`: midpoint value except for the
/// two cells next to the origin, which use exact averages.
fn kernel(j: usize, dy: f64, k: u32) -> f64 {
    match (j, k) {
        // (1/Δ) ∫_{Δ/2}^{3Δ/2} y^{−2} dy
        (1, 2) => 4.0 / (3.0 * dy * dy),
        // (1/Δ) ∫_{Δ/2}^{3Δ/2} y^{−1} dy
        (1, 1) => math::ln(3.0) / dy,
        _ => math::powf(j as f64 * dy, -(k as f64)),
    }
}

fn sup_over_levels(values: &mut [f64], dy: f64, k: u32) -> f64 {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    values
        .iter()
        .enumerate()
        .map(|(i, &a)| a * math::powf((i + 1) as f64 * dy, k as f64))
        .fold(0.0, f64::max)
}

fn evaluate(density: &[f64], grid: &Grid, k: u32) -> Vec<f64> {
    let n = density.len();
    let dy = grid.cell_width();
    let support: Vec<usize> = (0..n).filter(|&i| density[i] > 0.0).collect();
    let mut scratch = Vec::with_capacity(support.len());
    (0..n)
        .map(|x| {
            scratch.clear();
            for &s in &support {
                if s != x {
                    let j = s.abs_diff(x);
                    scratch.push(density[s] * kernel(j, dy, k));
                }
            }
            sup_over_levels(&mut scratch, dy, k)
        })
        .collect()
}

/// `N(f,g)(x) = sup_λ λ |{y ≠ 0 : f(x+y) g(x+y) / y² > λ}|²`, with `f` and `g`
/// extended by zero outside the unit interval.
pub fn operator_n(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let grid = *f.grid();
    require_line(&grid)?;
    same_grid(&grid, g.grid())?;
    let product: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
    GridFunction::new(grid, evaluate(&product, &grid, 2))
}

/// `T(f,g) = N(f,g)^{1/2}`.
pub fn operator_t(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    operator_n(f, g)?.map(math::sqrt)
}

/// `N*(f)(x) = sup_λ λ |{y ≠ 0 : f(x+y) / |y| > λ}|`.
pub fn operator_nstar(f: &GridFunction) -> Result<GridFunction> {
    let grid = *f.grid();
    require_line(&grid)?;
    GridFunction::new(grid, evaluate(f.values(), &grid, 1))
}

/// One row of the `N*` growth table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NstarRow {
    pub spikes: usize,
    /// `‖N* f‖_{L^{1,∞}}`.
    pub weak: f64,
    /// `‖f‖_{L¹}`, one up to rounding.
    pub l1: f64,
    pub ratio: f64,
}

/// `N` spikes of one cell each at the positions `k/N`, `k = 0, …, N−1`, with
/// height `1/(NΔ)` so that the total mass is one.
pub fn spike_family(grid: Grid, spikes: usize) -> Result<GridFunction> {
    require_line(&grid)?;
    let n = grid.cell_count();
    if spikes == 0 || spikes > n || n % spikes != 0 {
        return Err(param(alloc::format!("{spikes} spikes do not divide {n} cells")));
    }
    let height = 1.0 / (spikes as f64 * grid.cell_width());
    let stride = n / spikes;
    GridFunction::from_cells(grid, |i| if i % stride == 0 { height } else { 0.0 })
}

/// Weak `(1,1)` ratios of `N*` over spike families.
pub fn nstar_growth(grid: Grid, counts: &[usize]) -> Result<Vec<NstarRow>> {
    counts
        .iter()
        .map(|&spikes| {
            let f = spike_family(grid, spikes)?;
            let l1 = math::compensated_sum(f.values().iter().copied()) * grid.cell_width();
            let weak = weak_norm(&operator_nstar(&f)?, None, 1.0)?;
            Ok(NstarRow { spikes, weak, l1, ratio: weak / l1 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(grid: Grid, a: f64, b: f64) -> GridFunction {
        let h = grid.cell_width();
        GridFunction::from_cells(grid, |i| {
            let c = (i as f64 + 0.5) * h;
            if a <= c && c < b {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn zero_input_gives_zero() {
        let g = Grid::new(1, 6).unwrap();
        let z = GridFunction::zeros(g);
        let one = GridFunction::constant(g, 1.0).unwrap();
        assert!(operator_n(&z, &one).unwrap().is_zero());
        assert!(operator_t(&one, &z).unwrap().is_zero());
        assert!(operator_nstar(&z).unwrap().is_zero());
    }

    #[test]
    fn quarter_interval_at_midpoint() {
        let g = Grid::new(1, 12).unwrap();
        let f = interval(g, 0.0, 0.25);
        let n = operator_n(&f, &f).unwrap();
        let x = g.cell_at([0.5, 0.0]);
        let v = n.values()[x];
        assert!((v - 0.25).abs() < 0.02 * 0.25, "{v}");
    }

    #[test]
    fn rejects_two_dimensional_grids() {
        let g = Grid::new(2, 3).unwrap();
        let one = GridFunction::constant(g, 1.0).unwrap();
        assert!(operator_n(&one, &one).is_err());
        assert!(operator_nstar(&one).is_err());
    }

    #[test]
    fn spikes_have_unit_mass() {
        let g = Grid::new(1, 8).unwrap();
        let rows = nstar_growth(g, &[4, 16]).unwrap();
        for r in rows {
            assert!((r.l1 - 1.0).abs() < 1e-12);
            assert!(r.ratio > 0.0);
        }
        assert!(spike_family(g, 3).is_err());
    }
}
