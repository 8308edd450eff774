use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{float::FloatCore, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superarray_core::specfun::{bessel_j, beta};

const SCALE_BITS: i64 = 400;

fn shift(v: BigInt, by: i64) -> BigInt {
    if by >= 0 {
        v << by as usize
    } else {
        v >> (-by) as usize
    }
}

/// Power series for `J_n(z)` in 400-bit fixed point, exact in `z`.
fn oracle(n: u32, z: f64) -> f64 {
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let (mant, exp, sign) = FloatCore::integer_decode(z);
    let half_exp = exp as i64 - 1;
    let x = BigInt::from(mant) * BigInt::from(sign);
    let x2 = &x * &x;

    let mut term = shift(x.pow(n), SCALE_BITS + n as i64 * half_exp);
    let mut fact = BigInt::one();
    for k in 2..=n {
        fact *= k;
    }
    term /= fact;

    let mut sum = BigInt::zero();
    let floor = BigInt::one() << 8usize;
    let mut k: u64 = 0;
    loop {
        sum += &term;
        k += 1;
        term = shift(&term * &x2, 2 * half_exp);
        term /= BigInt::from(k * (k + n as u64));
        term = -term;
        if term.magnitude() < floor.magnitude() && k as f64 > z.abs() {
            break;
        }
    }
    sum.to_f64().unwrap() * 2f64.powi(-(SCALE_BITS as i32))
}

#[test]
fn oracle_sanity() {
    assert!((oracle(0, 1.0) - 0.7651976865579666).abs() < 1e-15);
    assert!((oracle(1, 1.0) - 0.4400505857449335).abs() < 1e-15);
    assert!((oracle(3, -2.0) + 0.12894324947440206).abs() < 1e-15);
}

#[test]
fn matches_series_oracle_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(0..=16u32);
        let z = rng.gen_range(-30.0..=30.0);
        let err = (bessel_j(n, z).unwrap() - oracle(n, z)).abs();
        worst = worst.max(err);
    }
    assert!(worst <= 1e-10, "worst abs error {worst:e}");
}

#[test]
fn matches_series_oracle_at_high_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.gen_range(0..=64u32);
        let z = rng.gen_range(-50.0..=50.0);
        let err = (bessel_j(n, z).unwrap() - oracle(n, z)).abs();
        assert!(err <= 1e-12, "J_{n}({z}) off by {err:e}");
    }
}

#[test]
fn first_zero_of_j0() {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if oracle(0, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 2.404825557695773).abs() < 1e-14);
    assert!(bessel_j(0u32, lo).unwrap().abs() < 1e-14);
}

#[test]
fn three_term_recurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..500 {
        let n = rng.gen_range(1..=40u32);
        let z: f64 = rng.gen_range(0.1..=40.0);
        let lhs = bessel_j(n - 1, z).unwrap() + bessel_j(n + 1, z).unwrap();
        let rhs = 2.0 * n as f64 / z * bessel_j(n, z).unwrap();
        assert!(
            (lhs - rhs).abs() < 1e-12 * (1.0 + n as f64 / z),
            "n={n} z={z}"
        );
    }
}

// Beyond z ≈ 21 the order-40 tail itself exceeds 1e-8.
#[test]
fn jacobi_anger_identity() {
    let truncation = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let z: f64 = rng.gen_range(0.0..=20.0);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let exact = Complex64::new(0.0, z * theta.cos()).exp();
        let series: Complex64 = (-truncation..=truncation)
            .map(|n| beta(n, z).unwrap() * Complex64::new(0.0, n as f64 * theta).exp())
            .sum();
        assert!((series - exact).norm() < 1e-8, "z={z} θ={theta}");
    }
}
