use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Weight;
use crate::math;

/// Exponents `p₁..p_m`, `r₁..r_{m+1}` and secondary indices `α₁..α_m`, with the
/// derived quantities of the restricted vector weight classes.
///
/// Derived values are stored as reciprocals so that `δᵢ = ∞` (`rᵢ = pᵢ`) is
/// the exact value `0` rather than a large float.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentSystem {
    p: Vec<f64>,
    r: Vec<f64>,
    alpha: Vec<f64>,
}

fn invalid(msg: alloc::string::String) -> Error {
    Error::InvalidExponents(msg)
}

impl ExponentSystem {
    pub fn new(p: Vec<f64>, r: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        let m = p.len();
        if m == 0 {
            return Err(invalid("at least one exponent p_i is required".into()));
        }
        if r.len() != m + 1 {
            return Err(invalid(format!("expected {} exponents r_i, got {}", m + 1, r.len())));
        }
        if alpha.len() != m {
            return Err(invalid(format!("expected {m} indices alpha_i, got {}", alpha.len())));
        }
        for (i, &pi) in p.iter().enumerate() {
            if !(pi >= 1.0 && pi.is_finite()) {
                return Err(invalid(format!("p_{} = {pi} must lie in [1, inf)", i + 1)));
            }
        }
        for (i, &ri) in r.iter().enumerate() {
            if !(ri >= 1.0 && ri.is_finite()) {
                return Err(invalid(format!("r_{} = {ri} must lie in [1, inf)", i + 1)));
            }
        }
        for i in 0..m {
            if r[i] > p[i] {
                return Err(invalid(format!(
                    "r_i <= p_i violated at i = {}: r = {}, p = {}",
                    i + 1,
                    r[i],
                    p[i]
                )));
            }
            if !(alpha[i] > 0.0 && alpha[i] <= p[i]) {
                return Err(invalid(format!(
                    "alpha_{} = {} must lie in (0, p_{}]",
                    i + 1,
                    alpha[i],
                    i + 1
                )));
            }
        }
        let sys = ExponentSystem { p, r, alpha };
        if !(sys.inv_delta(m) > 0.0) {
            return Err(invalid(format!(
                "p < r'_(m+1) violated: 1/p = {} but 1 - 1/r_(m+1) = {}",
                sys.inv_p(),
                1.0 - 1.0 / sys.r[m]
            )));
        }
        Ok(sys)
    }

    /// `r⃗ = (1,…,1)` and `αᵢ = 1`: the restricted weak-type setting.
    pub fn restricted(p: Vec<f64>) -> Result<Self> {
        let m = p.len();
        ExponentSystem::new(p, alloc::vec![1.0; m + 1], alloc::vec![1.0; m])
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `1/p = Σ 1/pᵢ`.
    pub fn inv_p(&self) -> f64 {
        self.p.iter().map(|p| 1.0 / p).sum()
    }

    pub fn p_total(&self) -> f64 {
        1.0 / self.inv_p()
    }

    /// `1/p_{m+1} = 1 − 1/p` (negative when `p < 1`).
    pub fn inv_p_last(&self) -> f64 {
        1.0 - self.inv_p()
    }

    /// `1/δᵢ = 1/rᵢ − 1/pᵢ` for the 0-based index `i ≤ m`; `i = m` is `δ_{m+1}`.
    pub fn inv_delta(&self, i: usize) -> f64 {
        if i < self.m() {
            if self.r[i] == self.p[i] {
                0.0
            } else {
                1.0 / self.r[i] - 1.0 / self.p[i]
            }
        } else {
            1.0 / self.r[self.m()] - self.inv_p_last()
        }
    }

    /// `δᵢ`, `∞` exactly when `rᵢ = pᵢ`.
    pub fn delta(&self, i: usize) -> f64 {
        let inv = self.inv_delta(i);
        if inv == 0.0 {
            f64::INFINITY
        } else {
            1.0 / inv
        }
    }

    /// `1/r = Σ_{i ≤ m+1} 1/rᵢ`.
    pub fn inv_r(&self) -> f64 {
        self.r.iter().map(|r| 1.0 / r).sum()
    }

    /// `1/r̃ = Σ_{i ≤ m} 1/rᵢ`.
    pub fn inv_r_tilde(&self) -> f64 {
        self.r[..self.m()].iter().map(|r| 1.0 / r).sum()
    }

    /// `1/ϱ = 1/r_m − 1/r'_{m+1} + Σ_{i<m} 1/pᵢ`.
    pub fn inv_rho(&self) -> f64 {
        let m = self.m();
        1.0 / self.r[m - 1] - (1.0 - 1.0 / self.r[m])
            + self.p[..m - 1].iter().map(|p| 1.0 / p).sum::<f64>()
    }

    pub fn rho(&self) -> f64 {
        1.0 / self.inv_rho()
    }

    /// `w = ∏ wᵢ^{p/pᵢ}`.
    pub fn composite(&self, ws: &[Weight]) -> Result<Weight> {
        self.check_len(ws)?;
        let p = self.p_total();
        let factors: Vec<(&Weight, f64)> =
            ws.iter().zip(&self.p).map(|(w, pi)| (w, p / pi)).collect();
        Weight::product(&factors)
    }

    /// `μ = (∏_{i<m} wᵢ^{1/pᵢ})^ϱ`; the constant `1` when `m = 1`.
    pub fn mu(&self, ws: &[Weight]) -> Result<Weight> {
        self.check_len(ws)?;
        let rho = self.rho();
        let factors: Vec<(&Weight, f64)> =
            ws.iter().zip(&self.p).take(self.m() - 1).map(|(w, pi)| (w, rho / pi)).collect();
        if factors.is_empty() {
            return Ok(Weight::ones(*ws[0].grid()));
        }
        Weight::product(&factors)
    }

    pub(crate) fn check_len(&self, ws: &[Weight]) -> Result<()> {
        if ws.len() != self.m() {
            return Err(Error::LengthMismatch { expected: self.m(), got: ws.len() });
        }
        Ok(())
    }

    /// Components with `pᵢ > rᵢ`, in the order the extrapolation steps visit
    /// them: decreasing `pᵢ/rᵢ`, ties by index.
    pub fn extrapolation_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.m()).filter(|&i| self.p[i] > self.r[i]).collect();
        idx.sort_by(|&a, &b| {
            (self.p[b] / self.r[b]).total_cmp(&(self.p[a] / self.r[a])).then(a.cmp(&b))
        });
        idx
    }

    /// Copy of the system with component `i` moved to the last slot, so the
    /// structure theorem for restricted vector weights applies to it.
    pub fn move_to_last(&self, i: usize) -> Result<Self> {
        let m = self.m();
        if i >= m {
            return Err(invalid(format!("component {i} out of range for m = {m}")));
        }
        let mut p = self.p.clone();
        let mut r = self.r.clone();
        let mut alpha = self.alpha.clone();
        p.swap(i, m - 1);
        r.swap(i, m - 1);
        alpha.swap(i, m - 1);
        ExponentSystem::new(p, r, alpha)
    }

    /// Same system with `p_i` replaced by `r_i` (the exponent reached after
    /// one extrapolation step in component `i`), keeping `αᵢ ≤ pᵢ`.
    pub fn lowered(&self, i: usize) -> Result<Self> {
        let mut p = self.p.clone();
        let mut alpha = self.alpha.clone();
        alpha[i] = alpha[i] * self.r[i] / p[i];
        p[i] = self.r[i];
        ExponentSystem::new(p, self.r.clone(), alpha)
    }

    /// `Σ_{i ≤ m} 1/δᵢ − ((1/r − 1) − 1/δ_{m+1})`, zero by definition.
    pub fn delta_sum_residual(&self) -> f64 {
        let lhs: f64 = (0..self.m()).map(|i| self.inv_delta(i)).sum();
        let rhs = (self.inv_r() - 1.0) - self.inv_delta(self.m());
        math::abs(lhs - rhs)
    }
}
