use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::grid::{same_grid, FamilySpec, GridFunction, Weight};
use crate::lorentz::Distribution;
use crate::math::{self, Compensated};
use crate::maximal::{maximal, MaximalConfig};

/// Parameters of the off-diagonal extrapolation step: the hypothesis lives at
/// `(p₀, q₀)` with secondary index `α`, the conclusion at `(r₀, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OffDiagExponents {
    pub r0: f64,
    pub p0: f64,
    pub q0: f64,
    /// May be `∞`.
    pub s0: f64,
    pub alpha: f64,
}

impl OffDiagExponents {
    pub fn new(r0: f64, p0: f64, q0: f64, s0: f64, alpha: f64) -> Result<Self> {
        let x = OffDiagExponents { r0, p0, q0, s0, alpha };
        if !(1.0 <= r0 && r0 <= p0 && p0.is_finite()) {
            return Err(Error::InvalidExponents(alloc::format!(
                "need 1 <= r0 <= p0 < inf, got r0 = {r0}, p0 = {p0}"
            )));
        }
        if !(q0 > 0.0 && q0 < s0) {
            return Err(Error::InvalidExponents(alloc::format!(
                "need 0 < q0 < s0, got q0 = {q0}, s0 = {s0}"
            )));
        }
        if !(alpha > 0.0 && alpha <= p0) {
            return Err(Error::InvalidExponents(alloc::format!("alpha = {alpha} must lie in (0, p0]")));
        }
        if !(x.q() < s0) {
            return Err(Error::InvalidExponents(alloc::format!("q = {} must be < s0 = {s0}", x.q())));
        }
        Ok(x)
    }

    fn inv_s0(&self) -> f64 {
        if self.s0.is_infinite() {
            0.0
        } else {
            1.0 / self.s0
        }
    }

    /// `1/δ₀ = 1/q₀ − 1/s₀`.
    pub fn inv_delta0(&self) -> f64 {
        1.0 / self.q0 - self.inv_s0()
    }

    pub fn delta0(&self) -> f64 {
        1.0 / self.inv_delta0()
    }

    /// `1/q = 1/q₀ + 1/r₀ − 1/p₀`.
    pub fn inv_q(&self) -> f64 {
        1.0 / self.q0 + 1.0 / self.r0 - 1.0 / self.p0
    }

    pub fn q(&self) -> f64 {
        1.0 / self.inv_q()
    }

    /// `1/δ₁ = 1/q − 1/s₀`.
    pub fn inv_delta1(&self) -> f64 {
        self.inv_q() - self.inv_s0()
    }

    pub fn delta1(&self) -> f64 {
        1.0 / self.inv_delta1()
    }

    /// `β = (q₀/r₀)/(p₀/r₀)'`, zero when `p₀ = r₀`.
    pub fn beta(&self) -> f64 {
        (self.q0 / self.r0) * (1.0 - self.r0 / self.p0)
    }

    /// `1 − r₀/p₀ = 1/(p₀/r₀)'`.
    pub fn inv_dual_ratio(&self) -> f64 {
        1.0 - self.r0 / self.p0
    }

    /// Residuals of `1 + β = q₀/q` and `1 − (q/s₀)(1+β) = q₀/δ₀`.
    pub fn identity_residuals(&self) -> [f64; 2] {
        let b = self.beta();
        let q = self.q();
        [
            math::abs(1.0 + b - self.q0 / q),
            math::abs(1.0 - q * self.inv_s0() * (1.0 + b) - self.q0 * self.inv_delta0()),
        ]
    }
}

fn weighted_sum(mask: impl Fn(usize) -> bool, density: &[f64], cell_volume: f64) -> f64 {
    let mut acc = Compensated::default();
    for (i, &d) in density.iter().enumerate() {
        if mask(i) {
            acc.add(d);
        }
    }
    acc.value() * cell_volume
}

/// `H = f^{r₀} w^{1−δ₁/r₀} μ⁻¹`.
pub fn build_h(f: &GridFunction, w: &Weight, mu: &Weight, x: &OffDiagExponents) -> Result<GridFunction> {
    same_grid(f.grid(), w.grid())?;
    same_grid(f.grid(), mu.grid())?;
    let e = 1.0 - x.delta1() / x.r0;
    GridFunction::from_cells(*f.grid(), |i| {
        let fv = f.values()[i];
        if fv == 0.0 {
            0.0
        } else {
            math::powf(fv, x.r0) * math::powf(w.values()[i], e) / mu.values()[i]
        }
    })
}

/// `v = w^{δ₁/δ₀} (M_μ H)^{−1/(p₀/r₀)'}` from a precomputed `M_μ H`.
pub fn construct_v_from(w: &Weight, mh: &GridFunction, x: &OffDiagExponents) -> Result<Weight> {
    same_grid(w.grid(), mh.grid())?;
    let a = x.delta1() / x.delta0();
    let b = -x.inv_dual_ratio();
    let values = w
        .values()
        .iter()
        .zip(mh.values())
        .map(|(&wv, &m)| if b == 0.0 { math::powf(wv, a) } else { math::powf(wv, a) * math::powf(m, b) })
        .collect();
    Weight::new(*w.grid(), values)
}

/// `v = w^{δ₁/δ₀} (M_μ H)^{−1/(p₀/r₀)'}`.
pub fn construct_v(
    w: &Weight,
    h: &GridFunction,
    mu: &Weight,
    x: &OffDiagExponents,
    family: FamilySpec,
) -> Result<Weight> {
    if h.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let mh = maximal(h, &MaximalConfig::with_measure(family, mu))?;
    construct_v_from(w, &mh, x)
}

/// Largest relative deviation in
/// `v^{δ₀/r₀} = w^{δ₁/r₀} (M_μ H)^{−(δ₀/r₀)/(p₀/r₀)'}`.
pub fn membership_residual(v: &Weight, w: &Weight, mh: &GridFunction, x: &OffDiagExponents) -> f64 {
    let e = x.delta0() / x.r0;
    let mut worst = 0.0f64;
    for i in 0..v.values().len() {
        let lhs = math::powf(v.values()[i], e);
        let rhs = math::powf(w.values()[i], x.delta1() / x.r0)
            * math::powf(mh.values()[i], -e * x.inv_dual_ratio());
        worst = worst.max(math::abs(lhs - rhs) / rhs);
    }
    worst
}

/// `‖M_μ f / v‖_{L^{1,∞}(u v μ)} / ‖f‖_{L¹(u μ)}`.
pub fn sawyer_ratio(
    f: &GridFunction,
    u: &Weight,
    v: &Weight,
    mu: &Weight,
    family: FamilySpec,
) -> Result<f64> {
    let mf = maximal(f, &MaximalConfig::with_measure(family, mu))?;
    sawyer_ratio_from(f, &mf, u, v, mu)
}

pub(crate) fn sawyer_ratio_from(
    f: &GridFunction,
    mf: &GridFunction,
    u: &Weight,
    v: &Weight,
    mu: &Weight,
) -> Result<f64> {
    let grid = *f.grid();
    for w in [u, v, mu] {
        same_grid(&grid, w.grid())?;
    }
    let vol = grid.cell_volume();
    let mut den = Compensated::default();
    for i in 0..grid.cell_count() {
        den.add(f.values()[i] * u.values()[i] * mu.values()[i]);
    }
    let den = den.value() * vol;
    if !(den > 0.0) {
        return Err(Error::ZeroFunction);
    }
    let num = Distribution::from_pairs((0..grid.cell_count()).map(|i| {
        let (uv, vv, mv) = (u.values()[i], v.values()[i], mu.values()[i]);
        (mf.values()[i] / vv, uv * vv * mv * vol)
    }))
    .weak(1.0);
    Ok(num / den)
}

/// Minimizer of `A γ^{−r₀} + B γ^{r₀β}` over `γ > 0`.
pub fn gamma_optimize(a: f64, b: f64, r0: f64, beta: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && r0 > 0.0 && beta > 0.0) {
        return Err(param(alloc::format!(
            "gamma optimization needs positive A, B, r0, beta; got {a}, {b}, {r0}, {beta}"
        )));
    }
    let gamma = math::powf(a / (beta * b), 1.0 / (r0 * (1.0 + beta)));
    let value = a * math::powf(gamma, -r0) + b * math::powf(gamma, r0 * beta);
    Ok((gamma, value))
}

/// One level `y` of the off-diagonal pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagRow {
    pub y: f64,
    /// `∫_{g>y} w^{q/r₀} μ^{q/δ₁}`.
    pub lhs: f64,
    pub gamma: f64,
    /// `min_γ (Aγ^{−r₀} + Bγ^{r₀β})`.
    pub bound: f64,
    pub term_e: f64,
    pub term_f: f64,
    pub bound_e: f64,
    pub bound_f: f64,
    /// `E ∩ F = ∅` and `{g > y} ⊆ E ∪ F` on the cell masks.
    pub masks_ok: bool,
    /// Every inequality of both chains holds (relative slack `1e-9`).
    pub chain_ok: bool,
    /// `lhs · y^q / ‖f‖^q_{L^{r₀,αr₀/p₀}(w)}`.
    pub constant: f64,
}

/// Constants shared by every `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagTrace {
    pub exponents: OffDiagExponents,
    pub h: GridFunction,
    pub mh: GridFunction,
    pub v: Weight,
    pub sawyer_constant: f64,
    pub hypothesis_constant: f64,
    /// `‖f‖_{L^{r₀,αr₀/p₀}(w)}`.
    pub f_norm: f64,
    pub membership_residual: f64,
    pub rows: Vec<OffDiagRow>,
}

impl OffDiagTrace {
    /// Ratio of the largest to the smallest constant among levels where the
    /// left side does not vanish.
    pub fn constant_spread(&self) -> f64 {
        let active: Vec<f64> = self.rows.iter().filter(|r| r.lhs > 0.0).map(|r| r.constant).collect();
        if active.is_empty() {
            return 1.0;
        }
        let hi = active.iter().copied().fold(0.0, f64::max);
        let lo = active.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }

    pub fn all_checks_hold(&self) -> bool {
        self.rows.iter().all(|r| r.masks_ok && r.chain_ok && r.lhs <= r.bound * (1.0 + 1e-9))
    }
}

/// Levels `2^k · median` for `k = −3..=3`, the median taken over the cells
/// where `g > 0`; empty when `g ≡ 0`.
pub fn y_grid(g: &GridFunction) -> Vec<f64> {
    let mut pos: Vec<f64> = g.values().iter().copied().filter(|&v| v > 0.0).collect();
    if pos.is_empty() {
        return Vec::new();
    }
    pos.sort_unstable_by(f64::total_cmp);
    let median = pos[(pos.len() - 1) / 2];
    (-3..=3).map(|k| median * math::exp2i(k)).collect()
}

/// Runs the full off-diagonal argument for the pair `(f, g)` at each level in
/// `ys`, with the hypothesis constant measured on the constructed weight `v`.
pub fn offdiag_verify(
    f: &GridFunction,
    g: &GridFunction,
    w: &Weight,
    mu: &Weight,
    x: &OffDiagExponents,
    ys: &[f64],
    family: FamilySpec,
) -> Result<OffDiagTrace> {
    let grid = *f.grid();
    for other in [g.grid(), w.grid(), mu.grid()] {
        same_grid(&grid, other)?;
    }
    let vol = grid.cell_volume();
    let n = grid.cell_count();
    let (q, r0, p0, q0, alpha) = (x.q(), x.r0, x.p0, x.q0, x.alpha);
    let beta = x.beta();

    // conclusion-side measure w^{q/r₀} μ^{q/δ₁}
    let target: Vec<f64> = (0..n)
        .map(|i| math::powf(w.values()[i], q / r0) * math::powf(mu.values()[i], q * x.inv_delta1()))
        .collect();
    let lhs_at = |y: f64| weighted_sum(|i| g.values()[i] > y, &target, vol);
    let f_norm = Distribution::of(f, Some(w))?.lorentz(r0, alpha * r0 / p0);

    let h = build_h(f, w, mu, x)?;
    if p0 == r0 || h.is_zero() {
        // β = 0: conclusion and hypothesis coincide with v = w
        let hyp = if f_norm > 0.0 {
            Distribution::from_pairs((0..n).map(|i| (g.values()[i], target[i] * vol))).weak(q) / f_norm
        } else {
            0.0
        };
        let rows = ys
            .iter()
            .map(|&y| {
                let lhs = lhs_at(y);
                let bound = math::powf(hyp * f_norm / y, q);
                OffDiagRow {
                    y,
                    lhs,
                    gamma: 1.0,
                    bound,
                    term_e: 0.0,
                    term_f: lhs,
                    bound_e: 0.0,
                    bound_f: bound,
                    masks_ok: true,
                    chain_ok: lhs <= bound * (1.0 + 1e-9),
                    constant: if f_norm > 0.0 { lhs * math::powf(y / f_norm, q) } else { 0.0 },
                }
            })
            .collect();
        return Ok(OffDiagTrace {
            exponents: *x,
            mh: h.clone(),
            h,
            v: w.clone(),
            sawyer_constant: 0.0,
            hypothesis_constant: hyp,
            f_norm,
            membership_residual: 0.0,
            rows,
        });
    }

    let cfg = MaximalConfig::with_measure(family, mu);
    let mh = maximal(&h, &cfg)?;
    let v = construct_v_from(w, &mh, x)?;
    let membership = membership_residual(&v, w, &mh, x);

    // Z = w^{(δ₁/r₀)(q/s₀)} μ^{q/s₀}; U = w^{δ₁/r₀}
    let qs = if x.s0.is_infinite() { 0.0 } else { q / x.s0 };
    let z: Vec<f64> = (0..n)
        .map(|i| math::powf(w.values()[i], x.delta1() / r0 * qs) * math::powf(mu.values()[i], qs))
        .collect();
    let u = w.pow(x.delta1() / r0)?;
    let z_inv = Weight::new(grid, z.iter().map(|zv| 1.0 / zv).collect())?;
    let sawyer_constant = sawyer_ratio_from(&h, &mh, &u, &z_inv, mu)?;
    let phi: Vec<f64> = (0..n).map(|i| z[i] * mh.values()[i]).collect();

    // hypothesis: ‖g‖_{L^{q₀,∞}(v^{q₀/r₀} μ^{q₀/δ₀})} against ‖f‖_{L^{p₀,α}(v^{p₀/r₀} μ^{1−p₀/r₀})}
    let nu: Vec<f64> = (0..n)
        .map(|i| math::powf(v.values()[i], q0 / r0) * math::powf(mu.values()[i], q0 * x.inv_delta0()))
        .collect();
    let g_weak = Distribution::from_pairs((0..n).map(|i| (g.values()[i], nu[i] * vol))).weak(q0);
    let sigma_norm = Distribution::from_pairs(
        (0..n).map(|i| {
            (f.values()[i], math::powf(v.values()[i], p0 / r0) * math::powf(mu.values()[i], 1.0 - p0 / r0) * vol)
        }),
    )
    .lorentz(p0, alpha);
    let hypothesis_constant = if sigma_norm > 0.0 { g_weak / sigma_norm } else { 0.0 };
    // σ_H = w f^{r₀−p₀} on {f > 0}
    let sigma_h_norm = Distribution::from_pairs((0..n).filter(|&i| f.values()[i] > 0.0).map(|i| {
        (f.values()[i], w.values()[i] * math::powf(f.values()[i], r0 - p0) * vol)
    }))
    .lorentz(p0, alpha);
    let layer_constant = math::powf(p0 / r0, q0 / alpha);
    let f_r0 = {
        let mut acc = Compensated::default();
        for i in 0..n {
            acc.add(math::powf(f.values()[i], r0) * w.values()[i]);
        }
        acc.value() * vol
    };
    let hu_mu = {
        let mut acc = Compensated::default();
        for i in 0..n {
            acc.add(h.values()[i] * u.values()[i] * mu.values()[i]);
        }
        acc.value() * vol
    };
    let embedding = p0 / alpha;
    let uz: Vec<f64> = (0..n).map(|i| u.values()[i] / z[i] * mu.values()[i]).collect();
    let ok = |a: f64, b: f64| a <= b * (1.0 + 1e-9) + 1e-300;
    let same = |a: f64, b: f64| math::abs(a - b) <= 1e-9 * math::abs(a).max(math::abs(b)) + 1e-300;

    let mut rows = Vec::with_capacity(ys.len());
    for &y in ys {
        if !(y > 0.0) {
            return Err(param("levels y must be positive"));
        }
        let lhs = lhs_at(y);
        let a_coef = sawyer_constant * embedding * math::powf(y, -r0) * math::powf(f_norm, r0);
        let b_coef = math::powf(hypothesis_constant, q0)
            * layer_constant
            * math::powf(y, r0 * beta - q0)
            * math::powf(f_norm, q0 * r0 / p0);
        let (gamma, bound) = if a_coef > 0.0 && b_coef > 0.0 {
            gamma_optimize(a_coef, b_coef, r0, beta)?
        } else {
            (1.0, a_coef + b_coef)
        };
        let threshold = math::powf(gamma * y, r0);
        let in_e = |i: usize| phi[i] > threshold;
        let in_f = |i: usize| phi[i] <= threshold && g.values()[i] > y;
        let masks_ok = (0..n).all(|i| !(in_e(i) && in_f(i)) && (g.values()[i] <= y || in_e(i) || in_f(i)));

        let term_e = weighted_sum(in_e, &target, vol);
        let term_f = weighted_sum(in_f, &target, vol);
        // E chain
        let e_rewritten = weighted_sum(in_e, &uz, vol);
        let e_chain = same(term_e, e_rewritten)
            && ok(threshold * e_rewritten, sawyer_constant * hu_mu)
            && same(hu_mu, f_r0)
            && ok(f_r0, embedding * math::powf(f_norm, r0));
        // F chain
        let over = weighted_sum(|i| g.values()[i] > y, &nu, vol);
        let f_chain = ok(term_f, math::powf(threshold, beta) * over)
            && ok(over, math::powf(g_weak / y, q0))
            && ok(sigma_norm, sigma_h_norm)
            && ok(math::powf(sigma_h_norm, q0), layer_constant * math::powf(f_norm, q0 * r0 / p0));
        let bound_e = a_coef * math::powf(gamma, -r0);
        let bound_f = b_coef * math::powf(gamma, r0 * beta);
        let chain_ok = e_chain && f_chain && ok(term_e, bound_e) && ok(term_f, bound_f) && ok(lhs, term_e + term_f);
        let constant = if f_norm > 0.0 { lhs * math::powf(y / f_norm, q) } else { 0.0 };
        rows.push(OffDiagRow {
            y,
            lhs,
            gamma,
            bound,
            term_e,
            term_f,
            bound_e,
            bound_f,
            masks_ok,
            chain_ok,
            constant,
        });
    }
    Ok(OffDiagTrace {
        exponents: *x,
        h,
        mh,
        v,
        sawyer_constant,
        hypothesis_constant,
        f_norm,
        membership_residual: membership,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_closed_forms() {
        let (g, v) = gamma_optimize(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((g - 1.0).abs() < 1e-15 && (v - 2.0).abs() < 1e-15);
        let (g, v) = gamma_optimize(16.0, 1.0, 1.0, 1.0).unwrap();
        assert!((g - 4.0).abs() < 1e-14 && (v - 8.0).abs() < 1e-13);
        assert!(gamma_optimize(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn exponent_identities() {
        let x = OffDiagExponents::new(1.0, 2.0, 2.0 / 3.0, f64::INFINITY, 1.0).unwrap();
        assert!((x.q() - 0.5).abs() < 1e-15);
        assert!((x.beta() - 1.0 / 3.0).abs() < 1e-15);
        assert!(x.identity_residuals().iter().all(|&r| r < 1e-15));
        assert!(OffDiagExponents::new(2.0, 1.0, 1.0, 2.0, 1.0).is_err());
        assert!(OffDiagExponents::new(1.0, 2.0, 3.0, 2.0, 1.0).is_err());
    }
}
