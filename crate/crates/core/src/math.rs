//! Float helpers for `no_std` builds plus compensated summation.

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `x^(1/y)` with the conventions `y = inf -> 1` used by the weak norms.
#[inline]
pub(crate) fn root(x: f64, y: f64) -> f64 {
    if y.is_infinite() {
        1.0
    } else {
        powf(x, 1.0 / y)
    }
}

/// Hölder conjugate; `1 -> inf`, `inf -> 1`.
#[inline]
pub(crate) fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Exact binary exponent: returns `j` with `2^j <= x < 2^(j+1)` for `x > 0`.
pub(crate) fn floor_log2(x: f64) -> i32 {
    let (_, e) = libm::frexp(x);
    // frexp gives x = m * 2^e with m in [0.5, 1)
    e - 1
}

#[inline]
pub(crate) fn exp2i(j: i32) -> f64 {
    libm::ldexp(1.0, j)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if abs(self.sum) >= abs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub(crate) fn compensated_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Compensated::default();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub(crate) fn gauss_legendre(n: usize) -> alloc::vec::Vec<(f64, f64)> {
    let mut out = alloc::vec::Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if abs(dx) < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_log2_is_exact_on_powers() {
        for j in -40..40 {
            let x = exp2i(j);
            assert_eq!(floor_log2(x), j);
            assert_eq!(floor_log2(x * 1.999_999), j);
        }
        assert_eq!(floor_log2(3.0), 1);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        let weight_sum: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((weight_sum - 2.0).abs() < 1e-13);
        // x^14 is integrated exactly by 8 nodes
        let i: f64 = rule.iter().map(|&(x, w)| w * powf(x, 14.0)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
