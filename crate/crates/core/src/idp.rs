//! Ideal directivity patterns `B_N(θ_s, θ) = Σ_n α_n cos(n(θ − θ_s))` and
//! their split into an exponential series plus a `sin θ`-weighted
//! exponential series, which is the form the beamformer design matches.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of `Σ α_n` from one.
pub const ALPHA_SUM_TOLERANCE: f64 = 1e-12;

/// Pattern order `N` and coefficients `α_{N,0..N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct IdpSpec {
    alpha: Vec<f64>,
}

impl IdpSpec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "pattern needs order at least 1 (2 coefficients), got {}",
                alpha.len()
            )));
        }
        if let Some(i) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha[{i}] is not finite")));
        }
        let sum: f64 = alpha.iter().sum();
        if libm::fabs(sum - 1.0) > ALPHA_SUM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "alpha coefficients sum to {sum}, expected 1"
            )));
        }
        Ok(IdpSpec { alpha })
    }

    /// Second-order supercardioid `(0.309, 0.484, 0.207)`.
    pub fn supercardioid() -> Self {
        IdpSpec {
            alpha: vec![0.309, 0.484, 0.207],
        }
    }

    /// First-order cardioid `(0.5, 0.5)`.
    pub fn cardioid() -> Self {
        IdpSpec {
            alpha: vec![0.5, 0.5],
        }
    }

    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

impl TryFrom<Vec<f64>> for IdpSpec {
    type Error = Error;

    fn try_from(alpha: Vec<f64>) -> Result<Self> {
        IdpSpec::new(alpha)
    }
}

impl From<IdpSpec> for Vec<f64> {
    fn from(spec: IdpSpec) -> Self {
        spec.alpha
    }
}

/// `B_N(θ_s, θ)` by direct cosine sum.
pub fn idp_value(spec: &IdpSpec, theta_s: f64, theta: f64) -> f64 {
    spec.alpha
        .iter()
        .enumerate()
        .map(|(n, &a)| a * libm::cos(n as f64 * (theta - theta_s)))
        .sum()
}

/// Coefficients of
/// `B_N(θ_s, θ) = Σ_{|n|≤N} η_n e^{ȷnθ} + sin θ Σ_{|n|≤N−1} η̃_n e^{ȷnθ}`.
///
/// Both families are real and even in `n` for cosine-series patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct IdpCoefficients {
    pub theta_s: f64,
    order: usize,
    /// `η_n` at index `n + N`
    eta: Vec<f64>,
    /// `η̃_n` at index `n + N − 1`
    eta_tilde: Vec<f64>,
}

impl IdpCoefficients {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `η_n`; zero outside `|n| ≤ N`.
    pub fn eta(&self, n: i32) -> f64 {
        let idx = n + self.order as i32;
        if idx < 0 {
            return 0.0;
        }
        self.eta.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// `η̃_n`; zero outside `|n| ≤ N − 1`.
    pub fn eta_tilde(&self, n: i32) -> f64 {
        let idx = n + self.order as i32 - 1;
        if idx < 0 {
            return 0.0;
        }
        self.eta_tilde.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// Evaluates the two-series form at `θ`.
    pub fn reconstruct(&self, theta: f64) -> Complex64 {
        let n_max = self.order as i32;
        let unit = |n: i32| {
            let p = n as f64 * theta;
            Complex64::new(libm::cos(p), libm::sin(p))
        };
        let first: Complex64 = (-n_max..=n_max).map(|n| unit(n) * self.eta(n)).sum();
        let second: Complex64 = (-(n_max - 1)..=(n_max - 1))
            .map(|n| unit(n) * self.eta_tilde(n))
            .sum();
        first + second * libm::sin(theta)
    }
}

/// Splits the pattern into the two exponential series.
///
/// `cos(nθ)` contributes `α_n cos(nθ_s)/2` to `η_{±n}`. The `sin(nθ) sin(nθ_s)`
/// part uses `sin(nθ) = sin θ · U_{n−1}(cos θ)` with
/// `U_{n−1}(cos θ) = Σ_{k=0}^{n−1} e^{ȷ(n−1−2k)θ}`, so `α_n sin(nθ_s)` lands
/// on every `η̃_m` with `|m| ≤ n − 1` and `m ≡ n − 1 (mod 2)`.
pub fn expand_idp(spec: &IdpSpec, theta_s: f64) -> IdpCoefficients {
    let order = spec.order();
    let mut eta = vec![0.0; 2 * order + 1];
    let mut eta_tilde = vec![0.0; 2 * order - 1];
    eta[order] = spec.alpha[0];
    for n in 1..=order {
        let a = spec.alpha[n];
        let c = 0.5 * a * libm::cos(n as f64 * theta_s);
        eta[order + n] = c;
        eta[order - n] = c;
        let s = a * libm::sin(n as f64 * theta_s);
        let top = n as i32 - 1;
        for m in (-top..=top).step_by(2) {
            eta_tilde[(m + order as i32 - 1) as usize] += s;
        }
    }
    IdpCoefficients {
        theta_s,
        order,
        eta,
        eta_tilde,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The same split computed through the power-of-cosine route: the
/// coefficients `γ_i` of `cos^i θ` in `Σ_n α_n sin(nθ_s) U_{n−1}(cos θ)`,
/// followed by the binomial expansion of `cos^i θ` into exponentials.
///
/// The binomial symbols are read as `C(i + k, k)` and `C(n' + 2k, k)`,
/// i.e. with the upper index first after swapping; the literal reading
/// (upper index smaller than lower) vanishes identically for `n' > 0` and
/// cannot reproduce the pattern.
pub fn expand_idp_power_series(spec: &IdpSpec, theta_s: f64) -> IdpCoefficients {
    let order = spec.order();
    let n = order as i64;
    let gamma: Vec<f64> = (0..order)
        .map(|i| {
            let kmax = (order - 1 - i) / 2;
            (0..=kmax)
                .map(|k| {
                    let idx = i + 2 * k + 1;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * spec.alpha[idx]
                        * libm::sin(idx as f64 * theta_s)
                        * libm::pow(2.0, i as f64)
                        * binomial(i + k, k)
                })
                .sum()
        })
        .collect();
    let mut eta_tilde = vec![0.0; 2 * order - 1];
    for np in -(n - 1)..=(n - 1) {
        let kmin = (-np).max(0);
        let kmax = (n - 1 - np).div_euclid(2);
        let mut acc = 0.0;
        for k in kmin..=kmax {
            let i = (np + 2 * k) as usize;
            acc += gamma[i] * binomial(i, k as usize) * libm::pow(2.0, -(i as f64));
        }
        eta_tilde[(np + n - 1) as usize] = acc;
    }
    let mut out = expand_idp(spec, theta_s);
    out.eta_tilde = eta_tilde;
    out
}
