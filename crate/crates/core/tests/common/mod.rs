#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

fn fact_f64(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Wigner's explicit sum for `d^J_{mu nu}(beta)` in plain floating point.
/// Only trustworthy for small `J`.
pub fn wigner_sum(two_j: i64, two_mu: i64, two_nu: i64, beta: f64) -> f64 {
    let jpm = (two_j + two_mu) / 2;
    let jmm = (two_j - two_mu) / 2;
    let jpn = (two_j + two_nu) / 2;
    let jmn = (two_j - two_nu) / 2;
    let mmn = (two_mu - two_nu) / 2;
    let pref = (fact_f64(jpm) * fact_f64(jmm) * fact_f64(jpn) * fact_f64(jmn)).sqrt();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let mut total = 0.0;
    for k in 0.max(-mmn)..=jpn.min(jmm) {
        let den = fact_f64(jpn - k) * fact_f64(k) * fact_f64(mmn + k) * fact_f64(jmm - k);
        let sign = if (mmn + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        total += sign * c.powi((two_j - mmn - 2 * k) as i32) * s.powi((mmn + 2 * k) as i32) / den;
    }
    pref * total
}

fn binom(n: i64, k: i64) -> BigUint {
    if k < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from((n - i) as u64) / BigUint::from((i + 1) as u64);
    }
    acc
}

fn factorial(n: i64) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |a, k| a * BigUint::from(k))
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = (den.bits() as i64 - num.bits() as i64 + 64).max(0);
    let q = (num << shift as usize) / den;
    let mut v = q.to_f64().unwrap();
    let mut s = shift;
    while s > 0 {
        let step = s.min(1000);
        v *= 2f64.powi(-(step as i32));
        s -= step;
    }
    v
}

/// Exact `d^J_{mu nu}(pi/2)`: the squared value is the rational
/// `T^2 (J+mu)! (J-mu)! / ((J+nu)! (J-nu)! 4^J)` with the integer
/// `T = sum_k (-1)^(mu-nu+k) C(J+nu, k) C(J-nu, J-mu-k)`.
pub fn wigner_half_pi_exact(two_j: i64, two_mu: i64, two_nu: i64) -> f64 {
    let jpm = (two_j + two_mu) / 2;
    let jmm = (two_j - two_mu) / 2;
    let jpn = (two_j + two_nu) / 2;
    let jmn = (two_j - two_nu) / 2;
    let mmn = (two_mu - two_nu) / 2;
    let mut t = BigInt::zero();
    for k in 0.max(-mmn)..=jpn.min(jmm) {
        let term = BigInt::from(binom(jpn, k) * binom(jmn, jmm - k));
        if (mmn + k).rem_euclid(2) == 0 {
            t += term;
        } else {
            t -= term;
        }
    }
    if t.is_zero() {
        return 0.0;
    }
    let t_abs = t.abs().to_biguint().unwrap();
    let num = &t_abs * &t_abs * factorial(jpm) * factorial(jmm);
    let den = (factorial(jpn) * factorial(jmn)) << (two_j as usize);
    let mag = ratio_to_f64(&num, &den).sqrt();
    if t.is_negative() {
        -mag
    } else {
        mag
    }
}

/// Central finite difference.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
