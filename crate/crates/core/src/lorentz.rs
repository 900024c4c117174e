//! Lorentz quasi-norms of cell-wise constant functions.
//!
//! The normalization is
//! `‖f‖_{L^{p,q}(w)} = (q ∫₀^∞ t^{q-1} w({f>t})^{q/p} dt)^{1/q}`, so that
//! `L^{p,p} = L^p` and `‖χ_E‖_{L^{p,q}(w)} = w(E)^{1/p}` for every `q`.
//! The weak quasi-norm is `sup_t t·w({f>t})^{1/p}`. On step functions both are
//! finite sums over the distinct values of `f`, which is how they are
//! evaluated here.

use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::grid::{same_grid, CellBox, DyadicCube, Grid, GridFunction, Weight};
use crate::math::{self, Compensated};

/// `(p, q)` with `q = ∞` meaning the weak space `L^{p,∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LorentzIndex {
    pub p: f64,
    pub q: f64,
}

impl LorentzIndex {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(param(alloc::format!("Lorentz exponent p = {p} must be positive and finite")));
        }
        if !(q > 0.0) {
            return Err(param(alloc::format!("Lorentz exponent q = {q} must be positive")));
        }
        Ok(LorentzIndex { p, q })
    }

    pub fn weak(p: f64) -> Result<Self> {
        LorentzIndex::new(p, f64::INFINITY)
    }

    pub fn is_weak(&self) -> bool {
        self.q.is_infinite()
    }
}

/// Distribution function of a step function: distinct positive values in
/// decreasing order with the mass of `{f ≥ value}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Distribution {
    levels: Vec<(f64, f64)>,
}

impl Distribution {
    /// Builds the distribution from `(value, mass)` pairs; nonpositive values
    /// never belong to a level set `{f > t}`, `t ≥ 0`, and are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().filter(|&(v, _)| v > 0.0).collect();
        pairs.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
        let mut levels: Vec<(f64, f64)> = Vec::new();
        let mut acc = Compensated::default();
        for (v, m) in pairs {
            acc.add(m);
            match levels.last_mut() {
                Some(last) if last.0 == v => last.1 = acc.value(),
                _ => levels.push((v, acc.value())),
            }
        }
        Distribution { levels }
    }

    pub(crate) fn from_box(
        grid: &Grid,
        cells: &CellBox,
        value: impl Fn(usize) -> f64,
        mass: impl Fn(usize) -> f64,
    ) -> Self {
        let mut pairs = Vec::with_capacity(cells.cell_count());
        cells.for_each_index(grid, |i| pairs.push((value(i), mass(i))));
        Distribution::from_pairs(pairs)
    }

    pub fn of(f: &GridFunction, w: Option<&Weight>) -> Result<Self> {
        if let Some(w) = w {
            same_grid(f.grid(), w.grid())?;
        }
        let vol = f.grid().cell_volume();
        Ok(Distribution::from_pairs(
            f.values()
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, vol * w.map_or(1.0, |w| w.values()[i]))),
        ))
    }

    /// `(value, mass of {f ≥ value})`, values strictly decreasing.
    pub fn levels(&self) -> &[(f64, f64)] {
        &self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.levels.first().map_or(0.0, |l| l.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.1)
    }

    /// `mass({f > t})`.
    pub fn measure_above(&self, t: f64) -> f64 {
        // levels are decreasing; find the last value > t
        let k = self.levels.partition_point(|&(v, _)| v > t);
        if k == 0 {
            0.0
        } else {
            self.levels[k - 1].1
        }
    }

    /// `sup_t t·mass({f>t})^{1/p}`, attained as `t` increases to a value.
    pub fn weak(&self, p: f64) -> f64 {
        self.levels
            .iter()
            .map(|&(v, m)| v * math::root(m, p))
            .fold(0.0, f64::max)
    }

    /// `∫₀^∞ s^{a-1} mass({f>s})^{b} ds` for `a > 0`, summed exactly over the
    /// steps of the distribution function.
    pub fn layer_cake(&self, a: f64, b: f64) -> f64 {
        let mut acc = Compensated::default();
        for (k, &(v, m)) in self.levels.iter().enumerate() {
            let next = self.levels.get(k + 1).map_or(0.0, |l| l.0);
            acc.add(math::powf(m, b) * (math::powf(v, a) - math::powf(next, a)));
        }
        acc.value() / a
    }

    pub fn lorentz(&self, p: f64, q: f64) -> f64 {
        if q.is_infinite() {
            return self.weak(p);
        }
        math::powf(q * self.layer_cake(q, q / p), 1.0 / q)
    }
}

/// `‖f‖_{L^{p,∞}(w)}`; Lebesgue measure when `w` is `None`.
pub fn weak_norm(f: &GridFunction, w: Option<&Weight>, p: f64) -> Result<f64> {
    LorentzIndex::weak(p)?;
    Ok(Distribution::of(f, w)?.weak(p))
}

/// `‖f‖_{L^{p,q}(w)}`; delegates to [`weak_norm`] when `q = ∞`.
pub fn lorentz_norm(f: &GridFunction, w: Option<&Weight>, idx: LorentzIndex) -> Result<f64> {
    let idx = LorentzIndex::new(idx.p, idx.q)?;
    Ok(Distribution::of(f, w)?.lorentz(idx.p, idx.q))
}

fn check_restricted_exponent(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        Err(param(alloc::format!("restricted exponent q = {q} must be >= 1")))
    }
}

/// `‖χ_Q v⁻¹‖_{L^{q,∞}(v)}` against the unnormalized measure `v dx`.
pub fn cube_inverse_weak_norm(v: &Weight, cube: &DyadicCube, q: f64) -> Result<f64> {
    check_restricted_exponent(q)?;
    let grid = v.grid();
    let cells = cube.cell_box(grid)?;
    let vals = v.values();
    let vol = grid.cell_volume();
    Ok(Distribution::from_box(grid, &cells, |i| 1.0 / vals[i], |i| vals[i] * vol).weak(q))
}

/// `‖χ_Q v⁻¹‖_{L^{q,∞}(v/|Q|)}`; `q = ∞` gives `ess sup_Q v⁻¹`.
pub fn restricted_cube_norm(v: &Weight, cube: &DyadicCube, q: f64) -> Result<f64> {
    check_restricted_exponent(q)?;
    let grid = v.grid();
    let cells = cube.cell_box(grid)?;
    let vals = v.values();
    let scale = grid.cell_volume() / cells.volume(grid);
    Ok(Distribution::from_box(grid, &cells, |i| 1.0 / vals[i], |i| vals[i] * scale).weak(q))
}

/// Band supremum `S = sup_t t·v({x ∈ Q : t < v⁻¹(x) ≤ 2t})^{1/q}` with the
/// unnormalized measure `v dx`.
///
/// The band mass is a step function of `t` whose jumps sit at `V` and `V/2`
/// for the values `V` of `v⁻¹`, and `t·mass^{1/q}` increases between jumps,
/// so the supremum is the largest left limit at a jump: `b·v({b ≤ v⁻¹ < 2b})`.
/// This scans every band position, which makes `S ≤ ‖χ_Q v⁻¹‖ ≤ 2S` exact.
pub fn dyadic_level_sup(v: &Weight, cube: &DyadicCube, q: f64) -> Result<f64> {
    check_restricted_exponent(q)?;
    let grid = v.grid();
    let cells = cube.cell_box(grid)?;
    let vol = grid.cell_volume();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(cells.cell_count());
    cells.for_each_index(grid, |i| {
        let x = v.values()[i];
        pairs.push((1.0 / x, x * vol));
    });
    Ok(band_sup(pairs, q))
}

pub(crate) fn band_sup(mut pairs: Vec<(f64, f64)>, q: f64) -> f64 {
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix = Vec::with_capacity(pairs.len() + 1);
    let mut acc = Compensated::default();
    prefix.push(0.0);
    for &(_, m) in &pairs {
        acc.add(m);
        prefix.push(acc.value());
    }
    let first_at_least = |x: f64| pairs.partition_point(|&(val, _)| val < x);
    let mut best = 0.0f64;
    for &(val, _) in &pairs {
        for b in [val, 0.5 * val] {
            let mass = prefix[first_at_least(2.0 * b)] - prefix[first_at_least(b)];
            if mass > 0.0 {
                best = best.max(b * math::root(mass, q));
            }
        }
    }
    best
}

/// Both sides of the two-sided equivalence between
/// `‖χ_Q v⁻¹‖_{L^{q,∞}(v)}` and `‖χ_Q v^{-a}‖^k_{L^{kq,∞}(v^b)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEquivalence {
    pub lhs: f64,
    /// `‖χ_Q v^{-a}‖_{L^{kq,∞}(v^b)}` raised to the power `k`.
    pub rhs_pow_k: f64,
    pub k: f64,
    pub ratio: f64,
}

/// `k = 1/(a q') + b/(a q)`.
pub fn equivalence_exponent(q: f64, a: f64, b: f64) -> f64 {
    (1.0 - 1.0 / q) / a + b / (a * q)
}

pub fn norm_equivalence_check(
    v: &Weight,
    cube: &DyadicCube,
    q: f64,
    a: f64,
    b: f64,
) -> Result<NormEquivalence> {
    check_restricted_exponent(q)?;
    if !(a > 0.0 && a < 1.0) {
        return Err(param(alloc::format!("a = {a} must lie in (0,1)")));
    }
    if !(0.0..1.0).contains(&b) {
        return Err(param(alloc::format!("b = {b} must lie in [0,1)")));
    }
    let k = equivalence_exponent(q, a, b);
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "k = 1/(a q') + b/(a q) vanishes for q = {q}, b = {b}"
        )));
    }
    let lhs = cube_inverse_weak_norm(v, cube, q)?;
    let grid = v.grid();
    let cells = cube.cell_box(grid)?;
    let vals = v.values();
    let vol = grid.cell_volume();
    let rhs = Distribution::from_box(
        grid,
        &cells,
        |i| math::powf(vals[i], -a),
        |i| math::powf(vals[i], b) * vol,
    )
    .weak(k * q);
    let rhs_pow_k = math::powf(rhs, k);
    Ok(NormEquivalence { lhs, rhs_pow_k, k, ratio: lhs / rhs_pow_k })
}

/// Upper bound for `rhs^k / lhs` obtained by summing the dyadic bands of
/// `v⁻¹`: `(2^{1-b} / (1 - 2^{1-b-q}))^{1/q}`; `lhs ≤ rhs^k` holds with
/// constant one. Infinite when the band series diverges (`q ≤ 1 - b`).
pub fn equivalence_band_constant(q: f64, b: f64) -> f64 {
    let r = math::powf(2.0, 1.0 - b - q);
    if r >= 1.0 {
        return f64::INFINITY;
    }
    math::powf(math::powf(2.0, 1.0 - b) / (1.0 - r), 1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn grid(level: u32) -> Grid {
        Grid::new(1, level).unwrap()
    }

    #[test]
    fn weak_norm_examples() {
        let g = grid(3);
        let half = GridFunction::from_cells(g, |i| if i < 4 { 1.0 } else { 0.0 }).unwrap();
        let v = weak_norm(&half, None, 2.0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(weak_norm(&GridFunction::zeros(g), None, 2.0).unwrap(), 0.0);
        let stair = GridFunction::from_cells(g, |i| if i < 2 { 2.0 } else { 1.0 }).unwrap();
        assert_eq!(weak_norm(&stair, None, 1.0).unwrap(), 1.0);
        assert!(weak_norm(&stair, None, 0.0).is_err());
    }

    #[test]
    fn lorentz_indicator_and_constant() {
        let g = grid(4);
        let w = Weight::new(g, (0..16).map(|i| 1.0 + i as f64).collect()).unwrap();
        let e = GridFunction::from_cells(g, |i| if i % 5 == 1 { 1.0 } else { 0.0 }).unwrap();
        let we: f64 = (0..16).filter(|i| i % 5 == 1).map(|i| (1.0 + i as f64) / 16.0).sum();
        for (p, q) in [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0), (3.0, 0.25)] {
            let idx = LorentzIndex::new(p, q).unwrap();
            let n = lorentz_norm(&e, Some(&w), idx).unwrap();
            assert!((n - we.powf(1.0 / p)).abs() < 1e-12 * n);
        }
        let c = GridFunction::constant(g, 2.5).unwrap();
        let n = lorentz_norm(&c, None, LorentzIndex::new(3.0, 3.0).unwrap()).unwrap();
        assert!((n - 2.5).abs() < 1e-14);
    }

    #[test]
    fn lorentz_matches_midpoint_quadrature() {
        // oracle: midpoint rule over t on a fine grid, independent of the step sum
        let g = grid(3);
        let vals = [3.0, 0.5, 2.0, 2.0, 0.0, 1.25, 3.0, 0.75];
        let f = GridFunction::new(g, vals.to_vec()).unwrap();
        let (p, q) = (2.0, 1.0);
        let n = 1_000_000;
        let tmax = 3.0;
        let h = tmax / n as f64;
        let mut acc = 0.0;
        for j in 0..n {
            let t = (j as f64 + 0.5) * h;
            let m = vals.iter().filter(|&&v| v > t).count() as f64 / 8.0;
            acc += q * t.powf(q - 1.0) * m.powf(q / p) * h;
        }
        let oracle = acc.powf(1.0 / q);
        let got = lorentz_norm(&f, None, LorentzIndex::new(p, q).unwrap()).unwrap();
        assert!((got - oracle).abs() < 1e-6 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn restricted_cube_norm_examples() {
        let g = grid(5);
        let one = Weight::ones(g);
        let q = DyadicCube::new(2, [1, 0], [0, 0]);
        assert!((restricted_cube_norm(&one, &q, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let c = Weight::constant(g, 4.0).unwrap();
        assert_eq!(restricted_cube_norm(&c, &q, f64::INFINITY).unwrap(), 0.25);
    }

    #[test]
    fn band_sup_examples() {
        let g = grid(6);
        let one = Weight::ones(g);
        assert_eq!(dyadic_level_sup(&one, &DyadicCube::unit(), 2.0).unwrap(), 1.0);

        // two values {1, 2}: v^{-1} ∈ {1, 1/2} on equal halves; exhaustive
        // oracle over a fine t grid plus the breakpoints from the left
        let v = Weight::new(g, (0..64).map(|i| if i < 32 { 1.0 } else { 2.0 }).collect()).unwrap();
        for q in [1.0, 1.5, 3.0] {
            let s = dyadic_level_sup(&v, &DyadicCube::unit(), q).unwrap();
            let band = |t: f64| -> f64 {
                let mut m: f64 = 0.0;
                if t < 1.0 && 1.0 <= 2.0 * t {
                    m += 0.5;
                }
                if t < 0.5 && 0.5 <= 2.0 * t {
                    m += 1.0;
                }
                t * m.powf(1.0 / q)
            };
            let mut oracle = 0.0f64;
            for j in 1..200_000 {
                oracle = oracle.max(band(j as f64 * 1e-5));
            }
            assert!((s - oracle).abs() < 1e-4, "q={q}: {s} vs {oracle}");
            let w = cube_inverse_weak_norm(&v, &DyadicCube::unit(), q).unwrap();
            assert!(s <= w + 1e-12 && w <= 2.0 * s + 1e-12);
        }
    }

    #[test]
    fn equivalence_for_constant_weight_is_exact() {
        let g = grid(5);
        let c = Weight::constant(g, 3.0).unwrap();
        let q = DyadicCube::new(1, [0, 0], [0, 0]);
        let r = norm_equivalence_check(&c, &q, 2.0, 0.4, 0.3).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
        assert!(norm_equivalence_check(&c, &q, 1.0, 0.5, 0.0).is_err());
        assert!(norm_equivalence_check(&c, &q, 2.0, 1.0, 0.0).is_err());
        assert!(norm_equivalence_check(&c, &q, 0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn equivalence_near_a_equal_one_for_smooth_weight() {
        let g = grid(8);
        let v = Weight::new(g, (0..256).map(|i| 1.0 + 0.1 * (i as f64 + 0.5) / 256.0).collect()).unwrap();
        for q in [1.5, 2.0, 4.0] {
            let r = norm_equivalence_check(&v, &DyadicCube::unit(), q, 0.999, 0.0).unwrap();
            assert!((0.9..=1.1).contains(&r.ratio), "q={q}: {}", r.ratio);
        }
    }
}
