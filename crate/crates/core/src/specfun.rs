//! Bessel functions of the first kind for integer order and real argument.
//!
//! Small arguments use the ascending power series. Larger arguments use
//! Miller's downward recurrence normalized by the Neumann identity
//! `J_0 + 2 Σ_{k≥1} J_{2k} = 1`, which is stable for every order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Above this argument the power series loses too many digits to
/// cancellation and the recurrence takes over.
const SERIES_LIMIT: f64 = 8.0;

const RESCALE_THRESHOLD: f64 = 1e250;

/// Non-negative Bessel order. Negative orders go through
/// [`BesselOrder::reflect`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BesselOrder(u32);

impl BesselOrder {
    pub const fn new(n: u32) -> Self {
        BesselOrder(n)
    }

    /// Splits a signed order into `(|n|, sign)` with
    /// `J_n(z) = sign · J_{|n|}(z)`.
    pub fn reflect(n: i32) -> (Self, f64) {
        let m = n.unsigned_abs();
        let sign = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
        (BesselOrder(m), sign)
    }

    pub const fn get(self) -> u32 {
        self.0
    }
}

impl From<u32> for BesselOrder {
    fn from(n: u32) -> Self {
        BesselOrder(n)
    }
}

fn check_argument(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Bessel argument must be finite, got {z}"
        )))
    }
}

/// `J_n(z)`.
pub fn bessel_j(n: impl Into<BesselOrder>, z: f64) -> Result<f64> {
    let n = n.into().get();
    check_argument(z)?;
    let (x, sign) = if z < 0.0 && n % 2 == 1 {
        (-z, -1.0)
    } else {
        (libm::fabs(z), 1.0)
    };
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let value = if x <= SERIES_LIMIT {
        series(n, x)
    } else {
        let mut out = vec![0.0; n as usize + 1];
        miller(x, &mut out);
        out[n as usize]
    };
    Ok(sign * value)
}

/// Fills `out[k] = J_k(z)` for `k = 0..out.len()`.
pub fn bessel_j_orders(z: f64, out: &mut [f64]) -> Result<()> {
    check_argument(z)?;
    if out.is_empty() {
        return Ok(());
    }
    let x = libm::fabs(z);
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
    } else if x <= SERIES_LIMIT {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = series(k as u32, x);
        }
    } else {
        miller(x, out);
    }
    if z < 0.0 {
        for slot in out.iter_mut().skip(1).step_by(2) {
            *slot = -*slot;
        }
    }
    Ok(())
}

/// `β_n(z) = ȷⁿ J_n(z)`. Even in `n`: `β_{-n} = β_n`.
pub fn beta(n: i32, z: f64) -> Result<Complex64> {
    let m = n.unsigned_abs();
    Ok(j_power(m) * bessel_j(m, z)?)
}

/// `ȷᵐ` without rounding.
pub(crate) fn j_power(m: u32) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        term *= -q / ((k + 1) as f64 * (k + n + 1) as f64);
        sum += term;
        k += 1;
        if libm::fabs(term) <= 1e-17 * libm::fabs(sum) && (k as f64) > q {
            break;
        }
        if k > 300 {
            break;
        }
    }
    sum
}

fn miller(x: f64, out: &mut [f64]) {
    let top = (out.len() - 1).max(libm::ceil(x) as usize) as f64;
    let mut start = (top + 16.0 + libm::ceil(libm::sqrt(50.0 * top))) as usize;
    start += start % 2;

    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 2.0 * cur;
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order < out.len() {
            out[order] = cur;
        }
        if order % 2 == 0 {
            norm += if order == 0 { cur } else { 2.0 * cur };
        }
        if libm::fabs(cur) > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut().skip(order) {
                *v *= s;
            }
        }
    }
    let scale = 1.0 / norm;
    for v in out.iter_mut() {
        *v *= scale;
    }
}

/// Convenience used by callers that need `J_0 .. J_max` at many arguments.
pub(crate) fn orders_upto(max: usize, z: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; max + 1];
    bessel_j_orders(z, &mut out)?;
    Ok(out)
}
