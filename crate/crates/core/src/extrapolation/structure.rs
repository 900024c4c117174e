//! Factorization of restricted vector weights through their last component.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{
    box_bounds, box_integral, same_grid, ConstantEstimate, CubeFamily, DyadicCube, FamilySpec,
    GridFunction, Weight,
};
use crate::math;
use crate::maximal::{maximal, MaximalConfig};
use crate::weights::{
    a1_constant, apr_constant, normalized_weak, A1Integrand, AprIntegrand, ExponentSystem,
};

/// The three characteristics of the case `p_m = r_m` and their per-cube
/// relation `full(Q) = partial(Q) · a1(Q)^{1/ϱ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    /// `[w⃗]` in the restricted vector class.
    pub full: ConstantEstimate,
    /// `[(w₁, …, w_{m−1}, 1)]`.
    pub partial: ConstantEstimate,
    /// `[w_m^{ϱ/r_m}]_{A₁(μ)}`.
    pub a1: ConstantEstimate,
    pub rho: f64,
    /// `full / (partial · a1^{1/ϱ})`, at most one.
    pub forward_ratio: f64,
    /// Largest relative deviation in the per-cube factorization.
    pub factorization_residual: f64,
    /// `min_Q partial(Q)`: the lower bound behind the reverse direction.
    pub min_partial: f64,
    /// `a1^{1/ϱ} / full`.
    pub reverse_a1_ratio: f64,
    /// `partial / full`.
    pub reverse_partial_ratio: f64,
}

impl FactorizationReport {
    pub fn forward_holds(&self, rel_tol: f64) -> bool {
        self.forward_ratio <= 1.0 + rel_tol
    }
}

fn mu_of(prefix: &[Weight], sys: &ExponentSystem, grid: &crate::grid::Grid) -> Result<Weight> {
    let rho = sys.rho();
    let factors: Vec<(&Weight, f64)> = prefix.iter().zip(sys.p()).map(|(w, p)| (w, rho / p)).collect();
    if factors.is_empty() {
        Ok(Weight::ones(*grid))
    } else {
        Weight::product(&factors)
    }
}

/// Forward and reverse comparisons of the factorization for `p_m = r_m`.
pub fn factorization_check(
    ws: &[Weight],
    sys: &ExponentSystem,
    family: FamilySpec,
) -> Result<FactorizationReport> {
    let m = sys.m();
    if ws.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: ws.len() });
    }
    if sys.p()[m - 1] != sys.r()[m - 1] {
        return Err(Error::InvalidExponents("the factorization check needs p_m = r_m".into()));
    }
    let grid = *ws[0].grid();
    let rho = sys.rho();
    let mu = mu_of(&ws[..m - 1], sys, &grid)?;
    let mut partial_ws: Vec<Weight> = ws[..m - 1].to_vec();
    partial_ws.push(Weight::ones(grid));
    let last = ws[m - 1].pow(rho / sys.r()[m - 1])?;

    let full_i = AprIntegrand::new(ws, sys)?;
    let partial_i = AprIntegrand::new(&partial_ws, sys)?;
    let a1_i = A1Integrand::new(&last, Some(&mu))?;

    let fam = CubeFamily::new(grid, family);
    let mut full = fam.sup(|_, _| f64::NEG_INFINITY);
    let mut partial = full;
    let mut a1 = full;
    let mut residual = 0.0f64;
    let mut min_partial = f64::INFINITY;
    fam.for_each_cube(|cube, cells| {
        let f = full_i.eval(cells);
        let p = partial_i.eval(cells);
        let a = a1_i.eval(cells);
        let product = p * math::powf(a, 1.0 / rho);
        residual = residual.max(math::abs(f - product) / product);
        min_partial = min_partial.min(p);
        for (est, val) in [(&mut full, f), (&mut partial, p), (&mut a1, a)] {
            if val > est.value {
                est.value = val;
                est.witness = *cube;
            }
        }
    });
    let a1_root = math::powf(a1.value, 1.0 / rho);
    Ok(FactorizationReport {
        forward_ratio: full.value / (partial.value * a1_root),
        reverse_a1_ratio: a1_root / full.value,
        reverse_partial_ratio: partial.value / full.value,
        full,
        partial,
        a1,
        rho,
        factorization_residual: residual,
        min_partial,
    })
}

/// Vector assembled from `(w₁, …, w_{m−1})`, `u_m` and `g` with `p_m > r_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyReport {
    pub weights: Vec<Weight>,
    pub mu: Weight,
    /// `[u_m]_{A₁(μ)}`.
    pub u_a1: ConstantEstimate,
    /// `[(w₁, …, w_{m−1}, 1)]` with `p_m` replaced by `r_m`.
    pub partial: ConstantEstimate,
    /// Largest per-cube ratio of the last dual factor against
    /// `(min_Q M_μg)^{1/δ_m} (min_Q u_m)^{−1/δ_{m+1}} (μ(Q)/|Q|)^{1/δ_m}`.
    pub dual_ratio: f64,
    pub dual_witness: DyadicCube,
    /// Largest relative deviation in
    /// `w_m^{−1/p_m} = u_m^{−1/δ_{m+1}} (M_μg)^{1/δ_m} μ^{1/δ_m}`.
    pub identity_residual: f64,
    /// `[w⃗]` of the assembled vector.
    pub assembled: ConstantEstimate,
}

/// `W^{δ_{m+1}/r_m} = u_m (M_μ g)^{−δ_{m+1}/δ_m}` and `w_m = W^{p_m/r_m} μ^{−p_m/δ_m}`.
pub fn assemble_last_weight(
    prefix: &[Weight],
    u_m: &Weight,
    g: &GridFunction,
    sys: &ExponentSystem,
    family: FamilySpec,
) -> Result<AssemblyReport> {
    let m = sys.m();
    if prefix.len() + 1 != m {
        return Err(Error::LengthMismatch { expected: m - 1, got: prefix.len() });
    }
    let (pm, rm) = (sys.p()[m - 1], sys.r()[m - 1]);
    if !(pm > rm) {
        return Err(Error::InvalidExponents("the assembly needs p_m > r_m".into()));
    }
    if g.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let grid = *u_m.grid();
    same_grid(&grid, g.grid())?;
    for w in prefix {
        same_grid(&grid, w.grid())?;
    }
    let inv_dm = sys.inv_delta(m - 1);
    let inv_dl = sys.inv_delta(m);
    let mu = mu_of(prefix, sys, &grid)?;
    let mg = maximal(g, &MaximalConfig::with_measure(family, &mu))?;
    let n = grid.cell_count();
    let big_w: Vec<f64> = (0..n)
        .map(|i| {
            let inner = u_m.values()[i] * math::powf(mg.values()[i], -inv_dm / inv_dl);
            math::powf(inner, rm * inv_dl)
        })
        .collect();
    let w_m = Weight::new(
        grid,
        (0..n).map(|i| math::powf(big_w[i], pm / rm) * math::powf(mu.values()[i], -pm * inv_dm)).collect(),
    )?;
    let dual: Vec<f64> = w_m.values().iter().map(|&x| math::powf(x, -1.0 / pm)).collect();
    let mut identity_residual = 0.0f64;
    for (i, &d) in dual.iter().enumerate() {
        let rhs = math::powf(u_m.values()[i], -inv_dl)
            * math::powf(mg.values()[i] * mu.values()[i], inv_dm);
        identity_residual = identity_residual.max(math::abs(d - rhs) / rhs);
    }

    let fam = CubeFamily::new(grid, family);
    let delta_m = sys.delta(m - 1);
    let mut dual_ratio = 0.0f64;
    let mut dual_witness = DyadicCube::unit();
    fam.for_each_cube(|cube, cells| {
        let lhs = normalized_weak(&grid, &dual, cells, delta_m);
        let (mg_min, _) = box_bounds(&grid, mg.values(), cells);
        let (u_min, _) = box_bounds(&grid, u_m.values(), cells);
        let density = box_integral(&grid, mu.values(), None, cells) / cells.volume(&grid);
        let rhs = math::powf(mg_min * density, inv_dm) / math::powf(u_min, inv_dl);
        let ratio = lhs / rhs;
        if ratio > dual_ratio {
            dual_ratio = ratio;
            dual_witness = *cube;
        }
    });

    let mut partial_ws: Vec<Weight> = prefix.to_vec();
    partial_ws.push(Weight::ones(grid));
    let mut lowered_p = sys.p().to_vec();
    lowered_p[m - 1] = rm;
    let mut lowered_alpha = sys.alpha().to_vec();
    lowered_alpha[m - 1] = lowered_alpha[m - 1].min(rm);
    let lowered = ExponentSystem::new(lowered_p, sys.r().to_vec(), lowered_alpha)?;
    let partial = apr_constant(&partial_ws, &lowered, family)?;
    let u_a1 = a1_constant(u_m, Some(&mu), family)?;

    let mut weights: Vec<Weight> = prefix.to_vec();
    weights.push(w_m);
    let assembled = apr_constant(&weights, sys, family)?;
    Ok(AssemblyReport {
        weights,
        mu,
        u_a1,
        partial,
        dual_ratio,
        dual_witness,
        identity_residual,
        assembled,
    })
}
