//! Endpoint bounds for pairs `(f⃗, g)` with `g = 𝓜(f⃗)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{same_grid, DyadicCube, FamilySpec, GridFunction, Weight};
use crate::lorentz::{lorentz_norm, weak_norm, LorentzIndex};
use crate::math;
use crate::maximal::{multilinear_maximal, MaximalConfig};
use crate::weights::ExponentSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointReport {
    /// `‖g‖_{L^{r̃,∞}(∏vᵢ^{r̃/rᵢ})}`.
    pub lhs: f64,
    /// `∏‖fᵢ‖_{L^{rᵢ, αᵢrᵢ/pᵢ}(vᵢ)}`.
    pub rhs: f64,
    /// `lhs / rhs`, zero when `lhs` vanishes.
    pub constant: f64,
    pub r_tilde: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn check_inputs(fs: &[&GridFunction], vs: &[Weight], m: usize) -> Result<()> {
    if fs.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: fs.len() });
    }
    if vs.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: vs.len() });
    }
    let grid = *vs[0].grid();
    for f in fs {
        same_grid(&grid, f.grid())?;
    }
    for v in vs {
        same_grid(&grid, v.grid())?;
    }
    Ok(())
}

/// Measures `g` against the inputs in the endpoint scale of `sys`.
pub fn endpoint_verify(
    fs: &[&GridFunction],
    g: &GridFunction,
    vs: &[Weight],
    sys: &ExponentSystem,
) -> Result<EndpointReport> {
    let m = sys.m();
    check_inputs(fs, vs, m)?;
    same_grid(vs[0].grid(), g.grid())?;
    let r_tilde = 1.0 / sys.inv_r_tilde();
    let factors: Vec<(&Weight, f64)> =
        vs.iter().zip(sys.r()).map(|(v, r)| (v, r_tilde / r)).collect();
    let target = Weight::product(&factors)?;
    let lhs = weak_norm(g, Some(&target), r_tilde)?;
    let mut rhs = 1.0;
    for i in 0..m {
        let (p, r, a) = (sys.p()[i], sys.r()[i], sys.alpha()[i]);
        rhs *= lorentz_norm(fs[i], Some(&vs[i]), LorentzIndex::new(r, a * r / p)?)?;
    }
    Ok(EndpointReport { lhs, rhs, constant: ratio(lhs, rhs), r_tilde })
}

/// [`endpoint_verify`] with `g = 𝓜(f⃗)` over `family`.
pub fn endpoint_verify_maximal(
    fs: &[&GridFunction],
    vs: &[Weight],
    sys: &ExponentSystem,
    family: FamilySpec,
) -> Result<EndpointReport> {
    check_inputs(fs, vs, sys.m())?;
    let g = multilinear_maximal(fs, &MaximalConfig::lebesgue(family))?;
    endpoint_verify(fs, &g, vs, sys)
}

/// Restricted weak type ratio of `𝓜` and the strong-type ratio with the
/// same denominators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultilinearRatio {
    /// `‖𝓜f⃗‖_{L^{p,∞}(w)}`.
    pub weak: f64,
    /// `‖𝓜f⃗‖_{L^{p}(w)}`.
    pub strong: f64,
    /// `∏‖fᵢ‖_{L^{pᵢ,1}(wᵢ)}`.
    pub rhs: f64,
    pub weak_ratio: f64,
    pub strong_ratio: f64,
}

/// `w = ∏wᵢ^{p/pᵢ}` with `1/p = Σ1/pᵢ`.
pub fn multilinear_ratio(
    fs: &[&GridFunction],
    ws: &[Weight],
    p: &[f64],
    family: FamilySpec,
) -> Result<MultilinearRatio> {
    check_inputs(fs, ws, p.len())?;
    if p.iter().any(|&pi| !(pi >= 1.0 && pi.is_finite())) {
        return Err(Error::InvalidExponents("multilinear ratio needs finite p_i >= 1".into()));
    }
    let total = 1.0 / p.iter().map(|pi| 1.0 / pi).sum::<f64>();
    let factors: Vec<(&Weight, f64)> = ws.iter().zip(p).map(|(w, pi)| (w, total / pi)).collect();
    let w = Weight::product(&factors)?;
    let g = multilinear_maximal(fs, &MaximalConfig::lebesgue(family))?;
    let weak = weak_norm(&g, Some(&w), total)?;
    let strong = lorentz_norm(&g, Some(&w), LorentzIndex::new(total, total)?)?;
    let mut rhs = 1.0;
    for ((f, wi), &pi) in fs.iter().zip(ws).zip(p) {
        rhs *= lorentz_norm(f, Some(wi), LorentzIndex::new(pi, 1.0)?)?;
    }
    Ok(MultilinearRatio {
        weak,
        strong,
        rhs,
        weak_ratio: ratio(weak, rhs),
        strong_ratio: ratio(strong, rhs),
    })
}

/// `|‖f‖_{L^{r,r}(v)} − (∫|f|^r v)^{1/r}|` relative to the latter.
pub fn diagonal_index_residual(f: &GridFunction, v: &Weight, r: f64) -> Result<f64> {
    let lorentz = lorentz_norm(f, Some(v), LorentzIndex::new(r, r)?)?;
    let direct = math::powf(
        crate::grid::integrate(&f.map(|x| math::powf(math::abs(x), r))?, &DyadicCube::unit(), Some(v))?,
        1.0 / r,
    );
    if direct == 0.0 {
        return Ok(lorentz);
    }
    Ok(math::abs(lorentz - direct) / direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn constant_inputs_give_constant_one() {
        let g = Grid::new(1, 6).unwrap();
        let one = GridFunction::constant(g, 1.0).unwrap();
        let vs = [Weight::ones(g), Weight::ones(g)];
        let sys = ExponentSystem::new(vec_of(&[2.0, 2.0]), vec_of(&[1.0, 1.0, 1.0]), vec_of(&[2.0, 2.0]))
            .unwrap();
        let rep = endpoint_verify_maximal(&[&one, &one], &vs, &sys, FamilySpec::DYADIC).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-12);
        assert!((rep.rhs - 1.0).abs() < 1e-12);
        assert!((rep.constant - 1.0).abs() < 1e-12);
        assert_eq!(rep.r_tilde, 0.5);
    }

    #[test]
    fn zero_input_gives_zero_constant() {
        let g = Grid::new(1, 5).unwrap();
        let zero = GridFunction::zeros(g);
        let one = GridFunction::constant(g, 1.0).unwrap();
        let ws = [Weight::ones(g), Weight::ones(g)];
        let r = multilinear_ratio(&[&zero, &one], &ws, &[2.0, 2.0], FamilySpec::SHIFTED).unwrap();
        assert_eq!(r.weak_ratio, 0.0);
        assert_eq!(r.strong_ratio, 0.0);
    }

    #[test]
    fn diagonal_index_matches_direct_integral() {
        let g = Grid::new(1, 7).unwrap();
        let f = GridFunction::from_cells(g, |i| ((i * 13) % 9) as f64 / 3.0).unwrap();
        let v = Weight::new(g, (0..128).map(|i| 0.5 + (i % 5) as f64).collect()).unwrap();
        for r in [1.0, 1.5, 2.0] {
            assert!(diagonal_index_residual(&f, &v, r).unwrap() < 1e-12);
        }
    }

    fn vec_of(x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}
