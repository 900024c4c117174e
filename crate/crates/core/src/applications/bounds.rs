//! Layer decompositions and the weighted bounds for `N`, `T` and sums of
//! bilinear operators.

use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::grid::{same_grid, ConstantEstimate, FamilySpec, Grid, GridFunction, Weight};
use crate::lorentz::{lorentz_norm, weak_norm, LorentzIndex};
use crate::math;
use crate::maximal::{multilinear_maximal, MaximalConfig};
use crate::weights::{apr_constant, apvec_constant, ExponentSystem};

use super::operators::{operator_n, operator_t};

/// Cells of `{2^j ≤ f < 2^{j+1}}` for every occupied `j`, in increasing `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerDecomposition {
    grid: Grid,
    layers: Vec<(i32, Vec<bool>)>,
}

impl LayerDecomposition {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn layers(&self) -> &[(i32, Vec<bool>)] {
        &self.layers
    }

    /// `Σ_j 2^j χ_{E_j}`.
    pub fn lower_envelope(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.grid.cell_count()];
        for (j, mask) in &self.layers {
            let v = math::exp2i(*j);
            for (o, &m) in out.iter_mut().zip(mask) {
                if m {
                    *o += v;
                }
            }
        }
        out
    }

    /// `Σ_j 2^j χ_{E_j} ≤ f < 2 Σ_j 2^j χ_{E_j}` on the support of `f`, and
    /// zero envelope off it.
    pub fn brackets(&self, f: &GridFunction) -> bool {
        self.lower_envelope().iter().zip(f.values()).all(|(&lo, &v)| {
            if v > 0.0 {
                lo <= v && v < 2.0 * lo
            } else {
                lo == 0.0
            }
        })
    }

    /// `Σ_j 2^{αj} w(E_j)^{α/p}`.
    pub fn layer_sum(&self, w: &Weight, alpha: f64, p: f64) -> Result<f64> {
        same_grid(&self.grid, w.grid())?;
        let vol = self.grid.cell_volume();
        let mut acc = math::Compensated::default();
        for (j, mask) in &self.layers {
            let mass = math::compensated_sum(
                mask.iter().zip(w.values()).filter(|(m, _)| **m).map(|(_, v)| *v),
            ) * vol;
            acc.add(math::powf(math::exp2i(*j), alpha) * math::powf(mass, alpha / p));
        }
        Ok(acc.value())
    }
}

pub fn layer_decompose(f: &GridFunction) -> LayerDecomposition {
    let grid = *f.grid();
    let mut layers: Vec<(i32, Vec<bool>)> = Vec::new();
    for (i, &v) in f.values().iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        let j = math::floor_log2(v);
        let slot = match layers.binary_search_by_key(&j, |(k, _)| *k) {
            Ok(s) => s,
            Err(s) => {
                layers.insert(s, (j, alloc::vec![false; grid.cell_count()]));
                s
            }
        };
        layers[slot].1[i] = true;
    }
    LayerDecomposition { grid, layers }
}

/// `sup_x T(λ₁χ_E, λ₂χ_F)(x) / ((λ₁λ₂)^α 𝓜(χ_E, χ_F)(x)^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    pub ratio: f64,
    pub witness_cell: usize,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn hypothesis_check(
    grid: Grid,
    e: &[bool],
    f: &[bool],
    lambda: [f64; 2],
    alpha: f64,
    family: FamilySpec,
) -> Result<HypothesisReport> {
    if !(lambda[0] > 0.0 && lambda[1] > 0.0 && alpha > 0.0) {
        return Err(param("hypothesis check needs positive scalings and alpha"));
    }
    let ce = GridFunction::from_mask(grid, e)?;
    let cf = GridFunction::from_mask(grid, f)?;
    let t = operator_t(&ce.scale(lambda[0])?, &cf.scale(lambda[1])?)?;
    let m = multilinear_maximal(&[&ce, &cf], &MaximalConfig::lebesgue(family))?;
    let scale = math::powf(lambda[0] * lambda[1], alpha);
    let mut report = HypothesisReport { ratio: 0.0, witness_cell: 0, lhs: 0.0, rhs: 0.0 };
    for (i, (&l, &mv)) in t.values().iter().zip(m.values()).enumerate() {
        if l == 0.0 {
            continue;
        }
        let r = scale * math::powf(mv, alpha);
        let ratio = if r > 0.0 { l / r } else { f64::INFINITY };
        if ratio > report.ratio {
            report = HypothesisReport { ratio, witness_cell: i, lhs: l, rhs: r };
        }
    }
    Ok(report)
}

/// Both steps of the layer argument for `S = T² = N` with `p = q/2`,
/// `p₁ = p₂ = q` and `α = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerBoundReport {
    pub q: f64,
    /// `‖N(f₁,f₂)‖^α_{L^{p,∞}(w₁^{1/2}w₂^{1/2})}`.
    pub lhs: f64,
    /// `Σ_{i,j} 2^{αj} 2^{αi} w₁(E_j)^{α/q} w₂(F_i)^{α/q}`.
    pub layer_sum: f64,
    /// `∏ ‖fᵢ‖^α_{L^{q,α}(wᵢ)}`.
    pub norms: f64,
    pub lhs_over_layers: f64,
    pub layers_over_norms: f64,
    pub constant: f64,
    /// `[w⃗]` in the restricted class for `(q, q)`.
    pub audit: ConstantEstimate,
}

fn quotient(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn check_pair(fs: [&GridFunction; 2], ws: &[Weight]) -> Result<Grid> {
    if ws.len() != 2 {
        return Err(Error::LengthMismatch { expected: 2, got: ws.len() });
    }
    let grid = *fs[0].grid();
    same_grid(&grid, fs[1].grid())?;
    for w in ws {
        same_grid(&grid, w.grid())?;
    }
    Ok(grid)
}

pub fn layer_bound_check(
    f1: &GridFunction,
    f2: &GridFunction,
    ws: &[Weight],
    q: f64,
    family: FamilySpec,
) -> Result<LayerBoundReport> {
    check_pair([f1, f2], ws)?;
    if !(q > 1.0 && q.is_finite()) {
        return Err(param(alloc::format!("the layer bound needs 1 < q < inf, got {q}")));
    }
    let alpha = 0.5;
    let p = q / 2.0;
    let w = Weight::product(&[(&ws[0], 0.5), (&ws[1], 0.5)])?;
    let lhs = math::powf(weak_norm(&operator_n(f1, f2)?, Some(&w), p)?, alpha);
    let layer_sum = layer_decompose(f1).layer_sum(&ws[0], alpha, q)?
        * layer_decompose(f2).layer_sum(&ws[1], alpha, q)?;
    let idx = LorentzIndex::new(q, alpha)?;
    let norms = math::powf(
        lorentz_norm(f1, Some(&ws[0]), idx)? * lorentz_norm(f2, Some(&ws[1]), idx)?,
        alpha,
    );
    let audit = apr_constant(ws, &ExponentSystem::restricted(alloc::vec![q, q])?, family)?;
    Ok(LayerBoundReport {
        q,
        lhs,
        layer_sum,
        norms,
        lhs_over_layers: quotient(lhs, layer_sum),
        layers_over_norms: quotient(layer_sum, norms),
        constant: quotient(lhs, norms),
        audit,
    })
}

/// `‖N(f₁,f₂)‖_{L^{1/2,∞}(v₁^{1/2}v₂^{1/2})}` against
/// `∏‖fᵢ‖_{L^{1,1/(2q)}(vᵢ)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointBoundReport {
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    /// `[v⃗]` in the multilinear class for `(1, 1)`.
    pub audit: ConstantEstimate,
}

pub fn endpoint_bound_check(
    f1: &GridFunction,
    f2: &GridFunction,
    vs: &[Weight],
    q: f64,
    family: FamilySpec,
) -> Result<EndpointBoundReport> {
    check_pair([f1, f2], vs)?;
    if !(q > 1.0 && q.is_finite()) {
        return Err(param(alloc::format!("the endpoint bound needs 1 < q < inf, got {q}")));
    }
    let v = Weight::product(&[(&vs[0], 0.5), (&vs[1], 0.5)])?;
    let lhs = weak_norm(&operator_n(f1, f2)?, Some(&v), 0.5)?;
    let idx = LorentzIndex::new(1.0, 1.0 / (2.0 * q))?;
    let rhs = lorentz_norm(f1, Some(&vs[0]), idx)? * lorentz_norm(f2, Some(&vs[1]), idx)?;
    let audit = apvec_constant(vs, &[1.0, 1.0], family)?;
    Ok(EndpointBoundReport { q, lhs, rhs, constant: quotient(lhs, rhs), audit })
}

/// One term `c_j T_j` where `T_j` is `𝓜` restricted to cubes of level at
/// least `coarsest`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesTerm {
    pub coarsest: u32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    /// `‖T_j f⃗‖_{L^{p,∞}(w)} / ∏‖fᵢ‖_{L^{pᵢ,1}(wᵢ)}` per term.
    pub component_constants: Vec<f64>,
    /// The same ratio for `Σ_j c_j T_j f⃗`.
    pub aggregate: f64,
    /// `p' Σ_j c_j C_j`.
    pub bound: f64,
    /// `p'`, the constant of the triangle inequality in `L^{p,∞}`.
    pub triangle_constant: f64,
}

impl SeriesReport {
    pub fn holds(&self) -> bool {
        self.aggregate <= self.bound * (1.0 + 1e-12)
    }
}

pub fn series_sum_check(
    fs: &[&GridFunction],
    ws: &[Weight],
    p: &[f64],
    terms: &[SeriesTerm],
    shifted: bool,
) -> Result<SeriesReport> {
    if fs.len() != ws.len() || fs.len() != p.len() || fs.is_empty() {
        return Err(Error::LengthMismatch { expected: p.len(), got: fs.len() });
    }
    let grid = *fs[0].grid();
    for f in fs {
        same_grid(&grid, f.grid())?;
    }
    let inv_p: f64 = p.iter().map(|pi| 1.0 / pi).sum();
    if !(inv_p < 1.0) {
        return Err(param("the series bound needs p > 1"));
    }
    if terms.iter().any(|t| !(t.weight >= 0.0 && t.weight.is_finite())) {
        return Err(param("series weights must be finite and nonnegative"));
    }
    let total = 1.0 / inv_p;
    let factors: Vec<(&Weight, f64)> = ws.iter().zip(p).map(|(w, pi)| (w, total / pi)).collect();
    let w = Weight::product(&factors)?;
    let mut rhs = 1.0;
    for ((f, wi), &pi) in fs.iter().zip(ws).zip(p) {
        rhs *= lorentz_norm(f, Some(wi), LorentzIndex::new(pi, 1.0)?)?;
    }
    let triangle_constant = math::conjugate(total);
    let mut sum = GridFunction::zeros(grid);
    let mut component_constants = Vec::with_capacity(terms.len());
    let mut bound = 0.0;
    for t in terms {
        let spec = FamilySpec { shifted, coarsest: t.coarsest };
        let g = multilinear_maximal(fs, &MaximalConfig::lebesgue(spec))?;
        let c = quotient(weak_norm(&g, Some(&w), total)?, rhs);
        bound += t.weight * c;
        component_constants.push(c);
        sum = sum.add(&g.scale(t.weight)?)?;
    }
    let aggregate = quotient(weak_norm(&sum, Some(&w), total)?, rhs);
    Ok(SeriesReport { component_constants, aggregate, bound: triangle_constant * bound, triangle_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_one_is_a_single_layer() {
        let g = Grid::new(1, 5).unwrap();
        let f = GridFunction::constant(g, 1.0).unwrap();
        let d = layer_decompose(&f);
        assert_eq!(d.layers().len(), 1);
        assert_eq!(d.layers()[0].0, 0);
        assert!(d.layers()[0].1.iter().all(|&b| b));
        let f3 = GridFunction::from_cells(g, |i| if i < 5 { 3.0 } else { 0.0 }).unwrap();
        let d3 = layer_decompose(&f3);
        assert_eq!(d3.layers().len(), 1);
        assert_eq!(d3.layers()[0].0, 1);
        assert!(d3.brackets(&f3));
    }

    #[test]
    fn empty_sets_give_zero_ratio() {
        let g = Grid::new(1, 6).unwrap();
        let none = vec![false; 64];
        let r = hypothesis_check(g, &none, &none, [1.0, 1.0], 0.5, FamilySpec::SHIFTED).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn zero_inputs_give_zero_constants() {
        let g = Grid::new(1, 6).unwrap();
        let z = GridFunction::zeros(g);
        let ws = vec![Weight::ones(g), Weight::ones(g)];
        let a = layer_bound_check(&z, &z, &ws, 4.0, FamilySpec::SHIFTED).unwrap();
        assert_eq!(a.constant, 0.0);
        let b = endpoint_bound_check(&z, &z, &ws, 2.0, FamilySpec::SHIFTED).unwrap();
        assert_eq!(b.constant, 0.0);
    }

    #[test]
    fn series_of_nothing_is_zero() {
        let g = Grid::new(1, 5).unwrap();
        let f = GridFunction::constant(g, 1.0).unwrap();
        let ws = vec![Weight::ones(g), Weight::ones(g)];
        let r = series_sum_check(&[&f, &f], &ws, &[3.0, 3.0], &[], true).unwrap();
        assert_eq!(r.aggregate, 0.0);
        assert_eq!(r.bound, 0.0);
    }

    #[test]
    fn doubled_term_doubles_the_constant() {
        let g = Grid::new(1, 7).unwrap();
        let f = GridFunction::from_cells(g, |i| if (10..30).contains(&i) { 1.0 } else { 0.0 }).unwrap();
        let h = GridFunction::from_cells(g, |i| if (20..70).contains(&i) { 1.0 } else { 0.0 }).unwrap();
        let ws = vec![Weight::ones(g), Weight::ones(g)];
        let t = SeriesTerm { coarsest: 0, weight: 1.0 };
        let one = series_sum_check(&[&f, &h], &ws, &[3.0, 3.0], &[t], true).unwrap();
        let two = series_sum_check(&[&f, &h], &ws, &[3.0, 3.0], &[t, t], true).unwrap();
        assert!((two.aggregate - 2.0 * one.aggregate).abs() <= 1e-9 * one.aggregate);
        assert!(two.holds());
    }
}
