//! Closed-form Gaussian kernel family.
//!
//! Everything is expressed through the squared distance `r2`, the scale `t`
//! and the intrinsic dimension `d`. With `u = π r2 / t` the heat kernel is
//! `K_t = t^{-d/2} e^{-u}`, and every power of the log-scale generator
//! `θ = t ∂_t` applied to it has the form `t^{-d/2} Q_k(u) e^{-u}` for a
//! polynomial `Q_k` obeying
//!
//! ```text
//! Q_0 = 1,    Q_{k+1}(u) = (u - d/2) Q_k(u) - u Q_k'(u).
//! ```
//!
//! The wavelet `ψ_t = θ K_t`, its τ-derivatives (`∂_τ = ln(a) θ`) and the
//! ordinary `t^k ∂_t^k` kernels are all linear combinations of these terms,
//! so no finite differencing happens at runtime.

use crate::error::{Error, Result};

pub const DEFAULT_BASE: f64 = 2.0;
pub const DEFAULT_EPS_TRUNC: f64 = 1e-12;

/// Multiplier applied to [`KernelParams::r_max`] when truncating sums; covers
/// the polynomial factor carried by the derivative kernels.
pub const SUPPORT_MARGIN: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelParams {
    /// Intrinsic dimension of the domain the kernel integrates over.
    pub d: usize,
    /// Logarithmic base, `τ = log_a t`.
    pub a: f64,
    /// Tail threshold defining the truncation radius.
    pub eps_trunc: f64,
}

impl KernelParams {
    pub fn new(d: usize, a: f64, eps_trunc: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::contract("kernel dimension d must be >= 1"));
        }
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::contract(format!("log base a must be > 1, got {a}")));
        }
        if !(eps_trunc > 0.0 && eps_trunc < 1.0) {
            return Err(Error::contract(format!("eps_trunc must lie in (0,1), got {eps_trunc}")));
        }
        Ok(Self { d, a, eps_trunc })
    }

    /// Defaults: `a = 2`, `eps_trunc = 1e-12`.
    pub fn with_dim(d: usize) -> Self {
        Self {
            d: d.max(1),
            a: DEFAULT_BASE,
            eps_trunc: DEFAULT_EPS_TRUNC,
        }
    }

    pub fn ln_a(&self) -> f64 {
        self.a.ln()
    }

    /// Radius beyond which `e^{-π r²/t} < eps_trunc`.
    pub fn r_max(&self, t: f64) -> f64 {
        (t * (1.0 / self.eps_trunc).ln() / std::f64::consts::PI).sqrt()
    }

    /// Truncation radius actually used by the quadrature sums.
    pub fn support_radius(&self, t: f64) -> f64 {
        SUPPORT_MARGIN * self.r_max(t)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("scale t must be positive and finite, got {t}")))
    }
}

fn check_r2(r2: f64) -> Result<()> {
    if r2 >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("squared distance must be >= 0, got {r2}")))
    }
}

/// `Q_k` in the variable `u = π r2 / t`; `coeffs[i]` multiplies `u^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivPolynomial {
    pub k: usize,
    pub coeffs: Vec<f64>,
}

impl LogDerivPolynomial {
    pub fn one() -> Self {
        Self { k: 0, coeffs: vec![1.0] }
    }

    /// Applies the recurrence once.
    pub fn next(&self, d: usize) -> Self {
        let half_d = d as f64 / 2.0;
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            // (u - d/2) c u^i - u * (i c u^{i-1})
            out[i + 1] += c;
            out[i] -= (half_d + i as f64) * c;
        }
        Self {
            k: self.k + 1,
            coeffs: out,
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

pub fn heat_kernel(r2: f64, t: f64, params: &KernelParams) -> Result<f64> {
    check_t(t)?;
    check_r2(r2)?;
    Ok(t.powf(-(params.d as f64) / 2.0) * (-std::f64::consts::PI * r2 / t).exp())
}

pub fn log_deriv_polynomial(k: usize, params: &KernelParams) -> LogDerivPolynomial {
    let mut q = LogDerivPolynomial::one();
    for _ in 0..k {
        q = q.next(params.d);
    }
    q
}

/// Kernel whose convolution gives `∂_τ^j S`: `(ln a)^j t^{-d/2} Q_{j+1}(u) e^{-u}`.
/// `j = 0` is `ψ_t` itself.
pub fn wavelet_deriv_value(j: usize, r2: f64, t: f64, params: &KernelParams) -> Result<f64> {
    check_t(t)?;
    check_r2(r2)?;
    Ok(KernelTable::new(*params, j + 1).wavelet(j, r2, t))
}

/// `t^k ∂_t^k K_t`.
pub fn t_deriv_kernel_value(k: usize, r2: f64, t: f64, params: &KernelParams) -> Result<f64> {
    check_t(t)?;
    check_r2(r2)?;
    Ok(KernelTable::new(*params, k).t_deriv(k, r2, t))
}

/// `t^{-d/2} u^k e^{-u}` (the free constant in front is fixed to one).
pub fn psi_tk_value(k: usize, r2: f64, t: f64, params: &KernelParams) -> Result<f64> {
    check_t(t)?;
    check_r2(r2)?;
    let u = std::f64::consts::PI * r2 / t;
    Ok(t.powf(-(params.d as f64) / 2.0) * u.powi(k as i32) * (-u).exp())
}

/// Signed Stirling numbers of the first kind `s(k, j)`, `j = 0..=k`, so that
/// `t^k ∂_t^k = Σ_j s(k, j) θ^j`.
///
/// From `t^{k+1} ∂_t^{k+1} = (θ - k) t^k ∂_t^k` one gets
/// `s(k+1, j) = s(k, j-1) - k s(k, j)`.
pub fn stirling_first(k: usize) -> Vec<i64> {
    let mut row = vec![1i64];
    for m in 0..k {
        let mut next = vec![0i64; row.len() + 1];
        for (j, &s) in row.iter().enumerate() {
            next[j + 1] += s;
            next[j] -= m as i64 * s;
        }
        row = next;
    }
    row
}

/// Precomputed polynomials for hot loops. No argument checking.
#[derive(Debug, Clone)]
pub struct KernelTable {
    params: KernelParams,
    polys: Vec<LogDerivPolynomial>,
    stirling: Vec<Vec<i64>>,
    ln_a: f64,
}

impl KernelTable {
    /// Holds `Q_0..=Q_{max_order}` (at least up to `Q_1`).
    pub fn new(params: KernelParams, max_order: usize) -> Self {
        let max_order = max_order.max(1);
        let mut polys = Vec::with_capacity(max_order + 1);
        polys.push(LogDerivPolynomial::one());
        for i in 0..max_order {
            let next = polys[i].next(params.d);
            polys.push(next);
        }
        let stirling = (0..=max_order).map(stirling_first).collect();
        Self {
            params,
            polys,
            stirling,
            ln_a: params.ln_a(),
        }
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn max_order(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn poly(&self, k: usize) -> &LogDerivPolynomial {
        &self.polys[k]
    }

    #[inline]
    pub fn prefactor(&self, t: f64) -> f64 {
        t.powf(-(self.params.d as f64) / 2.0)
    }

    /// `θ^k K_t`.
    #[inline]
    pub fn theta_power(&self, k: usize, r2: f64, t: f64) -> f64 {
        let u = std::f64::consts::PI * r2 / t;
        self.prefactor(t) * self.polys[k].eval(u) * (-u).exp()
    }

    #[inline]
    pub fn heat(&self, r2: f64, t: f64) -> f64 {
        self.theta_power(0, r2, t)
    }

    /// `∂_τ^j ψ_t`.
    #[inline]
    pub fn wavelet(&self, j: usize, r2: f64, t: f64) -> f64 {
        self.ln_a.powi(j as i32) * self.theta_power(j + 1, r2, t)
    }

    /// `t^k ∂_t^k K_t`.
    pub fn t_deriv(&self, k: usize, r2: f64, t: f64) -> f64 {
        self.stirling[k]
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(j, &s)| s as f64 * self.theta_power(j, r2, t))
            .sum()
    }

    /// `t^k ∂_t^k ψ_t`; needs `Q_{k+1}`.
    pub fn t_deriv_wavelet(&self, k: usize, r2: f64, t: f64) -> f64 {
        self.stirling[k]
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(j, &s)| s as f64 * self.theta_power(j + 1, r2, t))
            .sum()
    }

    /// `(∂_τ^0 ψ, .., ∂_τ^jmax ψ)` sharing one exponential. `out.len() = jmax + 1`.
    #[inline]
    pub fn wavelet_family(&self, r2: f64, t: f64, prefactor: f64, out: &mut [f64]) {
        let u = std::f64::consts::PI * r2 / t;
        let e = prefactor * (-u).exp();
        let mut scale = 1.0;
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = scale * self.polys[j + 1].eval(u) * e;
            scale *= self.ln_a;
        }
    }
}
