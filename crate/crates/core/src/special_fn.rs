//! Special functions used by the Fock-space arithmetic: log-factorials,
//! Wigner's small d-matrix and the error-function pair.

use crate::error::{invalid, Error, Result};

/// Largest 2J accepted by [`wigner_d`] unless a different limit is given.
pub const DEFAULT_MAX_TWO_J: u32 = 1024;

const FACTORIALS: [u64; 21] = {
    let mut table = [1u64; 21];
    let mut n = 1;
    while n < 21 {
        table[n] = table[n - 1] * n as u64;
        n += 1;
    }
    table
};

/// Natural logarithm of `n!`.
///
/// Values up to `20!` come from the exact integer factorial. Beyond that the
/// Stirling series is used with four correction terms; its truncation error
/// at `n = 21` is below 1e-15 absolute.
pub fn log_factorial(n: u64) -> f64 {
    if n < FACTORIALS.len() as u64 {
        return (FACTORIALS[n as usize] as f64).ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
    x * x.ln() - x + 0.5 * (std::f64::consts::TAU * x).ln() + series
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn log_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}

/// `(erf(x), erfc(x))`.
///
/// Only one of the pair is evaluated directly; the other is its complement,
/// so `erf + erfc == 1` up to a single rounding.
pub fn erf_pair(x: f64) -> (f64, f64) {
    if x.abs() < 0.5 {
        let e = libm::erf(x);
        (e, 1.0 - e)
    } else {
        let c = libm::erfc(x);
        (1.0 - c, c)
    }
}

/// Wigner's small d-matrix `d^J_{mu,nu}(beta) = <J,mu| exp(-i beta J_y) |J,nu>`.
///
/// Rows are indexed by `mu`, columns by `nu`, both running from `-J` to `+J`.
/// Storage is row-major over the integer offsets `mu + J` and `nu + J`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerDMatrix {
    two_j: u32,
    angle: f64,
    entries: Vec<f64>,
}

impl WignerDMatrix {
    /// Twice the spin, `2J`.
    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Matrix dimension `2J + 1`.
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Entry by offsets `row = mu + J`, `col = nu + J`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    /// Entry by twice-valued labels `2 mu`, `2 nu`.
    ///
    /// Returns `None` if either label is out of range or has the wrong parity.
    pub fn get(&self, two_mu: i32, two_nu: i32) -> Option<f64> {
        let row = offset(self.two_j, two_mu)?;
        let col = offset(self.two_j, two_nu)?;
        Some(self.at(row, col))
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let d = self.dim();
        &self.entries[row * d..(row + 1) * d]
    }

    /// `d * v` for a vector indexed by `nu + J`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim(), "vector length must be 2J + 1");
        (0..self.dim())
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Converts a twice-valued projection `2 mu` into the offset `mu + J`.
pub fn offset(two_j: u32, two_mu: i32) -> Option<usize> {
    let two_j = two_j as i32;
    if two_mu.abs() > two_j || (two_mu + two_j) % 2 != 0 {
        return None;
    }
    Some(((two_mu + two_j) / 2) as usize)
}

/// Wigner d-matrix with the default size limit.
pub fn wigner_d(two_j: u32, angle: f64) -> Result<WignerDMatrix> {
    wigner_d_with_limit(two_j, angle, DEFAULT_MAX_TWO_J)
}

/// Wigner d-matrix for `J = two_j / 2`, rejecting `two_j > max_two_j`.
///
/// Each row is seeded at both extremal columns `nu = +J` and `nu = -J` from
/// the closed-form binomial entries (in log space), then filled inwards by
/// the three-term recurrence in `nu`. The two sweeps meet at
/// `nu ~ mu cos(beta)`, the centre of the oscillatory band, so each sweep
/// only ever runs in the direction in which the wanted solution grows.
pub fn wigner_d_with_limit(two_j: u32, angle: f64, max_two_j: u32) -> Result<WignerDMatrix> {
    if two_j > max_two_j {
        return Err(Error::ResourceGuard {
            two_j,
            max: max_two_j,
        });
    }
    if !angle.is_finite() {
        return Err(invalid("angle", "must be finite"));
    }
    let dim = two_j as usize + 1;
    let j = f64::from(two_j) / 2.0;
    let (s, c) = (angle / 2.0).sin_cos();
    let sin_b = angle.sin();
    let cos_b = angle.cos();
    let mut entries = vec![0.0; dim * dim];

    if sin_b == 0.0 || s == 0.0 || c == 0.0 {
        // beta is a multiple of pi: the rotation is (up to signs) a permutation.
        fill_degenerate(&mut entries, two_j, c, s);
        return Ok(WignerDMatrix {
            two_j,
            angle,
            entries,
        });
    }

    let (ln_c, ln_s) = (c.abs().ln(), s.abs().ln());
    let (neg_c, neg_s) = (c < 0.0, s < 0.0);
    let jj1 = j * (j + 1.0);
    let raise = |nu: f64| (jj1 - nu * (nu + 1.0)).max(0.0).sqrt();
    let lower = |nu: f64| (jj1 - nu * (nu - 1.0)).max(0.0).sqrt();
    let n2 = u64::from(two_j);

    for row in 0..dim {
        let mu = row as f64 - j;
        let up = row as u64; // J + mu
        let down = n2 - up; // J - mu
        let meet = ((mu * cos_b + j).round().clamp(0.0, f64::from(two_j))) as usize;
        let out = &mut entries[row * dim..(row + 1) * dim];

        // d_{mu,+J} = sqrt(C(2J, J+mu)) c^{J+mu} s^{J-mu}
        let ln_top = 0.5 * log_binomial(n2, up) + up as f64 * ln_c + down as f64 * ln_s;
        let top_neg = (neg_c && up % 2 == 1) ^ (neg_s && down % 2 == 1);
        let mut sweep = Sweep::new(ln_top, top_neg);
        out[dim - 1] = sweep.value();
        for col in (meet + 1..dim).rev() {
            let nu = col as f64 - j;
            let a = 2.0 * (nu * cos_b - mu) / sin_b;
            sweep.step(a, raise(nu), lower(nu));
            out[col - 1] = sweep.value();
        }

        // d_{mu,-J} = (-1)^{J+mu} sqrt(C(2J, J-mu)) c^{J-mu} s^{J+mu}
        if meet > 0 {
            let ln_bottom = 0.5 * log_binomial(n2, down) + down as f64 * ln_c + up as f64 * ln_s;
            let bottom_neg = (up % 2 == 1) ^ (neg_c && down % 2 == 1) ^ (neg_s && up % 2 == 1);
            let mut sweep = Sweep::new(ln_bottom, bottom_neg);
            out[0] = sweep.value();
            for col in 0..meet.saturating_sub(1) {
                let nu = col as f64 - j;
                let a = 2.0 * (nu * cos_b - mu) / sin_b;
                sweep.step(a, lower(nu), raise(nu));
                out[col + 1] = sweep.value();
            }
        }
    }

    Ok(WignerDMatrix {
        two_j,
        angle,
        entries,
    })
}

/// Homogeneous three-term recurrence carried with a separate log scale so
/// that seeds far below the f64 range still produce correct O(1) entries.
struct Sweep {
    cur: f64,
    prev: f64,
    ln_scale: f64,
}

impl Sweep {
    const RESCALE: f64 = 1e150;

    fn new(ln_seed: f64, negative: bool) -> Self {
        Self {
            cur: if negative { -1.0 } else { 1.0 },
            prev: 0.0,
            ln_scale: ln_seed,
        }
    }

    /// `next = (a * cur - behind * prev) / ahead`
    fn step(&mut self, a: f64, behind: f64, ahead: f64) {
        let next = (a * self.cur - behind * self.prev) / ahead;
        self.prev = self.cur;
        self.cur = next;
        if self.cur.abs() > Self::RESCALE {
            self.cur /= Self::RESCALE;
            self.prev /= Self::RESCALE;
            self.ln_scale += Self::RESCALE.ln();
        }
    }

    fn value(&self) -> f64 {
        if self.cur == 0.0 {
            return 0.0;
        }
        if self.ln_scale > -700.0 {
            self.cur * self.ln_scale.exp()
        } else {
            self.cur.signum() * (self.ln_scale + self.cur.abs().ln()).exp()
        }
    }
}

fn fill_degenerate(entries: &mut [f64], two_j: u32, c: f64, s: f64) {
    let dim = two_j as usize + 1;
    if s.abs() < c.abs() {
        // beta = 2 pi m: d = c^{2J} * identity with c = +-1
        let sign = if c < 0.0 && two_j % 2 == 1 { -1.0 } else { 1.0 };
        for i in 0..dim {
            entries[i * dim + i] = sign;
        }
    } else {
        // beta = pi (mod 2 pi): d_{mu,-mu} = (-1)^{J+mu} s^{2J}
        let s_sign = if s < 0.0 && two_j % 2 == 1 { -1.0 } else { 1.0 };
        for row in 0..dim {
            let sign = if row % 2 == 1 { -s_sign } else { s_sign };
            entries[row * dim + (dim - 1 - row)] = sign;
        }
    }
}
