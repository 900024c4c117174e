use alloc::vec::Vec;

use crate::error::{param, Result};
use crate::grid::{
    box_bounds, box_integral, box_measure, same_grid, CellBox, ConstantEstimate, CubeFamily,
    FamilySpec, Grid, GridFunction, Weight,
};
use crate::lorentz::Distribution;
use crate::math;
use crate::maximal::{localized_maximal_integral, maximal, MaximalConfig};

use super::ExponentSystem;

/// `‖χ_Q f‖_{L^{q,∞}(dx/|Q|)}`; `q = ∞` is the maximum over the box.
pub(crate) fn normalized_weak(grid: &Grid, values: &[f64], cells: &CellBox, q: f64) -> f64 {
    if q.is_infinite() {
        return box_bounds(grid, values, cells).1;
    }
    let mass = 1.0 / cells.cell_count() as f64;
    Distribution::from_box(grid, cells, |i| values[i], |_| mass).weak(q)
}

/// `‖χ_Q w⁻¹‖_{L^{q,∞}(w/|Q|)}`; `q = ∞` is `max_Q w⁻¹`.
fn restricted_weak(grid: &Grid, w: &[f64], cells: &CellBox, q: f64) -> f64 {
    if q.is_infinite() {
        return 1.0 / box_bounds(grid, w, cells).0;
    }
    let scale = 1.0 / cells.cell_count() as f64;
    Distribution::from_box(grid, cells, |i| 1.0 / w[i], |i| w[i] * scale).weak(q)
}

pub(crate) fn average(grid: &Grid, values: &[f64], cells: &CellBox) -> f64 {
    box_integral(grid, values, None, cells) / cells.volume(grid)
}

fn check_vector(ws: &[Weight]) -> Result<Grid> {
    let Some(first) = ws.first() else {
        return Err(param("empty weight vector"));
    };
    let grid = *first.grid();
    for w in ws {
        same_grid(&grid, w.grid())?;
    }
    Ok(grid)
}

/// Per-cube `A₁(μ)` quotient `(μ(Q)⁻¹ ∫_Q w dμ) / min_Q w`.
pub(crate) struct A1Integrand<'a> {
    grid: Grid,
    w: &'a [f64],
    mu: Option<&'a [f64]>,
}

impl<'a> A1Integrand<'a> {
    pub(crate) fn new(w: &'a Weight, mu: Option<&'a Weight>) -> Result<Self> {
        if let Some(mu) = mu {
            same_grid(w.grid(), mu.grid())?;
        }
        Ok(A1Integrand { grid: *w.grid(), w: w.values(), mu: mu.map(|m| m.values()) })
    }

    pub(crate) fn eval(&self, cells: &CellBox) -> f64 {
        let avg = box_integral(&self.grid, self.w, self.mu, cells) / box_measure(&self.grid, self.mu, cells);
        avg / box_bounds(&self.grid, self.w, cells).0
    }
}

/// `sup_Q (μ(Q)⁻¹ ∫_Q w dμ) / min_Q w`.
pub fn a1_constant(w: &Weight, mu: Option<&Weight>, family: FamilySpec) -> Result<ConstantEstimate> {
    let integrand = A1Integrand::new(w, mu)?;
    Ok(CubeFamily::new(*w.grid(), family).sup(|_, cells| integrand.eval(cells)))
}

/// Fujii–Wilson diagnostic `sup_Q μ(Q)⁻¹ ∫_Q M(μχ_Q)`.
pub fn ainf_constant(mu: &Weight, family: FamilySpec) -> Result<ConstantEstimate> {
    let grid = *mu.grid();
    let fam = CubeFamily::new(grid, family);
    Ok(fam.sup(|_, cells| {
        let total = box_integral(&grid, mu.values(), None, cells);
        localized_maximal_integral(&fam, mu.values(), cells) / total
    }))
}

/// Multilinear characteristic
/// `sup_Q (⨍_Q ∏ wᵢ^{p/pᵢ})^{1/p} ∏ (⨍_Q wᵢ^{1−pᵢ'})^{1/pᵢ'}`, where a factor
/// with `pᵢ = 1` is `(min_Q wᵢ)⁻¹`.
pub fn apvec_constant(ws: &[Weight], p: &[f64], family: FamilySpec) -> Result<ConstantEstimate> {
    let grid = check_vector(ws)?;
    if p.len() != ws.len() || p.iter().any(|&pi| !(pi >= 1.0 && pi.is_finite())) {
        return Err(param("apvec needs one exponent p_i in [1, inf) per weight"));
    }
    let inv_p: f64 = p.iter().map(|pi| 1.0 / pi).sum();
    let pt = 1.0 / inv_p;
    let factors: Vec<(&Weight, f64)> = ws.iter().zip(p).map(|(w, pi)| (w, pt / pi)).collect();
    let composite = Weight::product(&factors)?;
    let duals: Vec<Option<Vec<f64>>> = ws
        .iter()
        .zip(p)
        .map(|(w, &pi)| {
            (pi > 1.0).then(|| {
                let e = 1.0 - math::conjugate(pi);
                w.values().iter().map(|&x| math::powf(x, e)).collect()
            })
        })
        .collect();
    let fam = CubeFamily::new(grid, family);
    Ok(fam.sup(|_, cells| {
        let mut value = math::powf(average(&grid, composite.values(), cells), inv_p);
        for ((w, &pi), dual) in ws.iter().zip(p).zip(&duals) {
            value *= match dual {
                Some(d) => math::powf(average(&grid, d, cells), 1.0 / math::conjugate(pi)),
                None => 1.0 / box_bounds(&grid, w.values(), cells).0,
            };
        }
        value
    }))
}

/// Per-cube restricted vector quotient
/// `(⨍_Q w^{δ_{m+1}/p})^{1/δ_{m+1}} ∏ ‖χ_Q wᵢ^{−1/pᵢ}‖_{L^{δᵢ,∞}(dx/|Q|)}`.
pub(crate) struct AprIntegrand {
    grid: Grid,
    inv_last: f64,
    lead: Weight,
    duals: Vec<Vec<f64>>,
    deltas: Vec<f64>,
}

impl AprIntegrand {
    pub(crate) fn new(ws: &[Weight], sys: &ExponentSystem) -> Result<Self> {
        let grid = check_vector(ws)?;
        sys.check_len(ws)?;
        let m = sys.m();
        let inv_last = sys.inv_delta(m);
        let factors: Vec<(&Weight, f64)> =
            ws.iter().zip(sys.p()).map(|(w, pi)| (w, 1.0 / (inv_last * pi))).collect();
        let lead = Weight::product(&factors)?;
        let duals = ws
            .iter()
            .zip(sys.p())
            .map(|(w, &pi)| w.values().iter().map(|&x| math::powf(x, -1.0 / pi)).collect())
            .collect();
        let deltas = (0..m).map(|i| sys.delta(i)).collect();
        Ok(AprIntegrand { grid, inv_last, lead, duals, deltas })
    }

    pub(crate) fn eval(&self, cells: &CellBox) -> f64 {
        let mut value = math::powf(average(&self.grid, self.lead.values(), cells), self.inv_last);
        for (d, &delta) in self.duals.iter().zip(&self.deltas) {
            value *= normalized_weak(&self.grid, d, cells, delta);
        }
        value
    }
}

/// `sup_Q (⨍_Q w^{δ_{m+1}/p})^{1/δ_{m+1}} ∏ ‖χ_Q wᵢ^{−1/pᵢ}‖_{L^{δᵢ,∞}(dx/|Q|)}`
/// with `w = ∏ wᵢ^{p/pᵢ}`; a factor with `δᵢ = ∞` is `max_Q wᵢ^{−1/pᵢ}`.
pub fn apr_constant(ws: &[Weight], sys: &ExponentSystem, family: FamilySpec) -> Result<ConstantEstimate> {
    let integrand = AprIntegrand::new(ws, sys)?;
    Ok(CubeFamily::new(integrand.grid, family).sup(|_, cells| integrand.eval(cells)))
}

/// `sup_Q (⨍_Q ∏ wᵢ^{p/pᵢ})^{1/p} ∏ ‖χ_Q wᵢ⁻¹‖_{L^{pᵢ',∞}(wᵢ/|Q|)}`, the
/// `pᵢ = 1` factors being `max_Q wᵢ⁻¹`.
pub fn apr_r1_constant(ws: &[Weight], p: &[f64], family: FamilySpec) -> Result<ConstantEstimate> {
    let grid = check_vector(ws)?;
    if p.len() != ws.len() || p.iter().any(|&pi| !(pi >= 1.0 && pi.is_finite())) {
        return Err(param("apr_r1 needs one exponent p_i in [1, inf) per weight"));
    }
    let inv_p: f64 = p.iter().map(|pi| 1.0 / pi).sum();
    let pt = 1.0 / inv_p;
    let factors: Vec<(&Weight, f64)> = ws.iter().zip(p).map(|(w, pi)| (w, pt / pi)).collect();
    let composite = Weight::product(&factors)?;
    let fam = CubeFamily::new(grid, family);
    Ok(fam.sup(|_, cells| {
        let mut value = math::powf(average(&grid, composite.values(), cells), inv_p);
        for (w, &pi) in ws.iter().zip(p) {
            value *= restricted_weak(&grid, w.values(), cells, math::conjugate(pi));
        }
        value
    }))
}

/// One-weight restricted characteristic
/// `sup_Q (⨍_Q W)^{1/P} ‖χ_Q W^{−1/P}‖_{L^{P',∞}(dx/|Q|)}`, `P ≥ 1`.
pub fn restricted_one_weight_constant(
    w: &Weight,
    big_p: f64,
    family: FamilySpec,
) -> Result<ConstantEstimate> {
    if !(big_p >= 1.0 && big_p.is_finite()) {
        return Err(param(alloc::format!("one-weight exponent P = {big_p} must lie in [1, inf)")));
    }
    let grid = *w.grid();
    let dual: Vec<f64> = w.values().iter().map(|&x| math::powf(x, -1.0 / big_p)).collect();
    let dual_exp = math::conjugate(big_p);
    let fam = CubeFamily::new(grid, family);
    Ok(fam.sup(|_, cells| {
        math::powf(average(&grid, w.values(), cells), 1.0 / big_p)
            * normalized_weak(&grid, &dual, cells, dual_exp)
    }))
}

/// Constant of the weak-type Hölder inequality
/// `‖∏ fᵢ‖_{L^{t,∞}} ≤ t^{−1/t} ∏ tᵢ^{1/tᵢ} ∏ ‖fᵢ‖_{L^{tᵢ,∞}}`, `1/t = Σ 1/tᵢ`;
/// infinite exponents contribute the factor `1`.
pub fn weak_holder_constant(t: &[f64]) -> f64 {
    let inv_t: f64 = t.iter().filter(|x| x.is_finite()).map(|x| 1.0 / x).sum();
    if inv_t == 0.0 {
        return 1.0;
    }
    let mut c = math::powf(inv_t, inv_t);
    for &ti in t.iter().filter(|x| x.is_finite()) {
        c *= math::powf(ti, 1.0 / ti);
    }
    c
}

/// Comparison between `[w^{δ_{m+1}/p}]` in the one-weight restricted class of
/// exponent `P = (1/r − 1)δ_{m+1}` and `[w⃗]^{r/(1−r)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeClassReport {
    pub exponent: f64,
    pub one_weight: ConstantEstimate,
    pub vector: ConstantEstimate,
    /// `[w⃗]^{r/(1−r)}` times the Hölder constant.
    pub bound: f64,
    pub holder_constant: f64,
}

impl CompositeClassReport {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.one_weight.value <= self.bound * (1.0 + rel_tol)
    }
}

pub fn composite_class_check(
    ws: &[Weight],
    sys: &ExponentSystem,
    family: FamilySpec,
) -> Result<CompositeClassReport> {
    let m = sys.m();
    let inv_last = sys.inv_delta(m);
    let theta = 1.0 / (sys.inv_r() - 1.0);
    let mut big_p = (sys.inv_r() - 1.0) / inv_last;
    // P = 1 exactly when every δᵢ is infinite; undo the rounding
    if big_p < 1.0 && big_p > 1.0 - 1e-12 {
        big_p = 1.0;
    }
    let factors: Vec<(&Weight, f64)> =
        ws.iter().zip(sys.p()).map(|(w, pi)| (w, 1.0 / (inv_last * pi))).collect();
    let composite = Weight::product(&factors)?;
    let one_weight = restricted_one_weight_constant(&composite, big_p, family)?;
    let vector = apr_constant(ws, sys, family)?;
    // Hölder exponents sᵢP' with sᵢ = δᵢ((1/r − 1) − 1/δ_{m+1})
    let dual = math::conjugate(big_p);
    let t: Vec<f64> = (0..m)
        .map(|i| {
            let inv_d = sys.inv_delta(i);
            if inv_d == 0.0 || dual.is_infinite() {
                f64::INFINITY
            } else {
                dual * (sys.inv_r() - 1.0 - inv_last) / inv_d
            }
        })
        .collect();
    let holder_constant = weak_holder_constant(&t);
    Ok(CompositeClassReport {
        exponent: big_p,
        one_weight,
        vector,
        bound: holder_constant * math::powf(vector.value, theta),
        holder_constant,
    })
}

/// `v = u₁ (M_μ g)^{1−r}`.
pub fn hat_ar_construct(
    u1: &Weight,
    g: &GridFunction,
    r: f64,
    mu: &Weight,
    family: FamilySpec,
) -> Result<Weight> {
    if !(r >= 1.0) {
        return Err(param(alloc::format!("r = {r} must be >= 1")));
    }
    if g.is_zero() {
        return Err(crate::error::Error::ZeroFunction);
    }
    if r == 1.0 {
        return Ok(u1.clone());
    }
    let mg = maximal(g, &MaximalConfig::with_measure(family, mu))?;
    same_grid(u1.grid(), mg.grid())?;
    let values =
        u1.values().iter().zip(mg.values()).map(|(&u, &m)| u * math::powf(m, 1.0 - r)).collect();
    Weight::new(*u1.grid(), values)
}

/// `v = (u₁ (M_μ g)^{−q/r'})^{1/q}`, so that `v^q = hat_ar_construct(u₁, g, 1 + q/r')`.
pub fn hat_arq_construct(
    u1: &Weight,
    g: &GridFunction,
    r: f64,
    q: f64,
    mu: &Weight,
    family: FamilySpec,
) -> Result<Weight> {
    if !(q > 0.0) || !(r >= 1.0) {
        return Err(param(alloc::format!("need q > 0 and r >= 1, got q = {q}, r = {r}")));
    }
    let inv_dual = 1.0 - 1.0 / r;
    let inner = hat_ar_construct(u1, g, 1.0 + q * inv_dual, mu, family)?;
    inner.pow(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::grid::DyadicCube;

    fn ones(grid: Grid, n: usize) -> Vec<Weight> {
        (0..n).map(|_| Weight::ones(grid)).collect()
    }

    #[test]
    fn all_ones_give_one() {
        let g = Grid::new(1, 6).unwrap();
        let ws = ones(g, 2);
        let sys = ExponentSystem::new(vec![2.0, 3.0], vec![1.0, 1.5, 1.0], vec![1.0, 1.0]).unwrap();
        for fam in [FamilySpec::DYADIC, FamilySpec::SHIFTED] {
            assert!((a1_constant(&ws[0], None, fam).unwrap().value - 1.0).abs() < 1e-12);
            assert!((ainf_constant(&ws[0], fam).unwrap().value - 1.0).abs() < 1e-12);
            assert!((apvec_constant(&ws, &[1.0, 2.0], fam).unwrap().value - 1.0).abs() < 1e-12);
            assert!((apr_constant(&ws, &sys, fam).unwrap().value - 1.0).abs() < 1e-12);
            assert!((apr_r1_constant(&ws, &[2.0, 2.0], fam).unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_reevaluates() {
        let g = Grid::new(1, 6).unwrap();
        let w = Weight::new(g, (0..64).map(|i| 1.0 + (i as f64 / 8.0).powi(2)).collect()).unwrap();
        let est = a1_constant(&w, None, FamilySpec::SHIFTED).unwrap();
        let cells = est.witness.cell_box(&g).unwrap();
        let direct = average(&g, w.values(), &cells) / box_bounds(&g, w.values(), &cells).0;
        assert!((direct - est.value).abs() <= 1e-12 * est.value);
        assert!(est.value >= 1.0);
        let _ = DyadicCube::unit();
    }

    #[test]
    fn holder_constant_limits() {
        assert_eq!(weak_holder_constant(&[f64::INFINITY, f64::INFINITY]), 1.0);
        assert!((weak_holder_constant(&[2.0, f64::INFINITY]) - 1.0).abs() < 1e-15);
        // t = 1 from (2, 2): 1^{-1} * 2^{1/2} * 2^{1/2} = 2
        assert!((weak_holder_constant(&[2.0, 2.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hat_constructions() {
        let g = Grid::new(1, 5).unwrap();
        let u = Weight::ones(g);
        let one = GridFunction::constant(g, 1.0).unwrap();
        let v = hat_ar_construct(&u, &one, 3.0, &u, FamilySpec::DYADIC).unwrap();
        assert!(v.values().iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let f = GridFunction::from_cells(g, |i| if i < 4 { 1.0 } else { 0.0 }).unwrap();
        let v1 = hat_ar_construct(&u, &f, 1.0, &u, FamilySpec::DYADIC).unwrap();
        assert_eq!(v1, u);
        let vq = hat_arq_construct(&u, &f, 1.0, 2.0, &u, FamilySpec::DYADIC).unwrap();
        assert_eq!(vq.values(), u.values());
    }

    #[test]
    fn composite_exponent_one_survives_rounding() {
        // r_i = p_i everywhere: P = 1 in exact arithmetic
        let g = Grid::new(1, 5).unwrap();
        for p in [3.0, 7.0, 1.3] {
            let sys = ExponentSystem::new(vec![p], vec![p, 1.0], vec![1.0]).unwrap();
            let rep = composite_class_check(&[Weight::ones(g)], &sys, FamilySpec::DYADIC).unwrap();
            assert_eq!(rep.exponent, 1.0);
            assert!(rep.holds(1e-12));
        }
    }
}
