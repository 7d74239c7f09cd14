//! Character-sum laboratory.
//!
//! Everything needed to evaluate shifted-prime sums
//!
//! ```text
//!     S_a(q; N) = Σ_{n ≤ N} Λ(n) χ(n + a),        (a, q) = 1,
//! ```
//!
//! exactly and to test the bounds that control them: exact Dirichlet
//! characters mod arbitrary q (`dirichlet`), the integer substrate they sit
//! on (`arith`), complete and incomplete character sums (`charsums`), the
//! solution-set counting chain behind the r = 3 mean values (`burgess`), and
//! the four-term combinatorial decomposition of S_a with the final bound
//! shapes (`vaughan`).
//!
//! All sums are evaluated by direct summation with compensated accumulation,
//! so results are deterministic and reproducible bit-for-bit for a fixed
//! input.  Identities that hold exactly (CRT factorizations, completion of
//! incomplete sums, the four-term decomposition) are implemented as two
//! independent routes and never collapsed into one.

pub mod arith;
pub mod burgess;
pub mod charsums;
pub mod dirichlet;
pub mod vaughan;

use std::fmt;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Inputs outside an operation's domain (wrong parity, non-coprime
    /// shift, modulus not a prime power, ...).
    Domain(String),
    /// A well-posed instance with no answer (element outside the subgroup
    /// in a discrete log, say).
    NoSolution(String),
    /// Work estimate exceeds the configured brute-force budget.
    Resource { cost: u128, budget: u64, what: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NoSolution(msg) => write!(f, "no solution: {msg}"),
            Error::Resource { cost, budget, what } => {
                write!(f, "resource limit: {what} needs ~{cost} steps, budget is {budget}")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

/// Compensated (Kahan) accumulator.  The sums in this crate routinely add
/// 10⁵–10⁸ terms and are then compared at 10⁻⁸..10⁻⁹ relative, which plain
/// summation does not reliably survive.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Kahan accumulator for complex values (independent real/imaginary parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: num_complex::Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.value(), self.im.value())
    }
}

/// e(x) = exp(2πi·x).
#[inline]
pub fn e(x: f64) -> num_complex::Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * x).sin_cos();
    num_complex::Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_ill_conditioned_sum() {
        // 1 + 10^16 ulp-sized crumbs: naive summation loses them all.
        let mut k = Kahan::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 10_000.0 * 1e-16)).abs() < 1e-18);
    }

    #[test]
    fn e_is_unit_circle() {
        for i in 0..8 {
            let z = e(i as f64 / 8.0);
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
        assert!((e(0.5) + num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
