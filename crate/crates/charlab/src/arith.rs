//! Integer substrate: factorization, unit groups of prime powers, discrete
//! logarithms, radicals, and sieves for Λ, μ and ω.
//!
//! Moduli are u64 and assumed ≤ 2⁴⁸ throughout the crate, so every product
//! that could overflow is taken through u128.  Everything here is exact
//! integer arithmetic; the only floats are the natural logs handed out by
//! [`ArithTables::lambda_ln`], applied as late as possible.

use crate::{Error, Result};

/// Largest prime-power modulus for which a full discrete-log lookup table is
/// materialized at construction time.
pub const DLOG_TABLE_LIMIT: u64 = 1 << 20;

// ======================= gcd / modular primitives =======================

/// Greatest common divisor.  gcd(0, n) = n.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// gcd(|a|, m) for signed a, with the convention gcd(0, m) = m.
pub fn gcd_i128(a: i128, m: u64) -> u64 {
    if m == 0 {
        return a.unsigned_abs().min(u64::MAX as u128) as u64;
    }
    let r = (a.rem_euclid(m as i128)) as u64;
    gcd(r, m)
}

/// Extended gcd: returns (g, x, y) with a·x + b·y = g.
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Inverse of a mod m, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = egcd((a % m) as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

/// a·b mod m without overflow.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// a^e mod m by binary exponentiation.
pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// x reduced to [0, m).
#[inline]
pub fn reduce_i64(x: i64, m: u64) -> u64 {
    (x.rem_euclid(m as i64)) as u64
}

// ============================ primality ============================

/// Deterministic Miller–Rabin, valid for every u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    // This witness set is deterministic for n < 3.3·10²⁴, far past u64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent-cycle Pollard rho; returns a nontrivial factor of composite odd n.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut count = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
            count += 1;
            if count > (1 << 24) {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
        c += 1;
    }
}

// ========================= factored moduli =========================

/// A positive integer together with its prime factorization, carried around
/// so downstream code never refactors the same modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredModulus {
    q: u64,
    factors: Vec<(u64, u32)>,
    phi: u64,
}

/// Factor q ≥ 1 into prime powers (trial division, Pollard rho fallback).
pub fn factorize(q: u64) -> Result<FactoredModulus> {
    FactoredModulus::new(q)
}

impl FactoredModulus {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("modulus must be positive".into()));
        }
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut rest = q;
        for p in [2u64, 3, 5] {
            let mut a = 0;
            while rest % p == 0 {
                rest /= p;
                a += 1;
            }
            if a > 0 {
                factors.push((p, a));
            }
        }
        let mut p = 7u64;
        let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
        let mut w = 0;
        while p * p <= rest && p < 100_000 {
            if rest % p == 0 {
                let mut a = 0;
                while rest % p == 0 {
                    rest /= p;
                    a += 1;
                }
                factors.push((p, a));
            }
            p += wheel[w];
            w = (w + 1) % 8;
        }
        // Whatever survives trial division is split recursively.
        let mut stack = vec![rest];
        let mut large: Vec<u64> = Vec::new();
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime(m) {
                large.push(m);
            } else {
                let d = pollard_rho(m);
                stack.push(d);
                stack.push(m / d);
            }
        }
        large.sort_unstable();
        let mut i = 0;
        while i < large.len() {
            let p = large[i];
            let mut a = 0;
            while i < large.len() && large[i] == p {
                a += 1;
                i += 1;
            }
            factors.push((p, a));
        }
        factors.sort_unstable();
        let phi = factors
            .iter()
            .map(|&(p, a)| p.pow(a - 1) * (p - 1))
            .product::<u64>()
            .max(1);
        Ok(Self { q, factors, phi })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Prime-power factors (p, α), p strictly increasing.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Euler φ(q).
    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Number of distinct prime divisors ω(q).
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a == 1)
    }

    /// μ(q): 0 unless squarefree, else (−1)^ω.
    pub fn mu(&self) -> i64 {
        if !self.is_squarefree() {
            0
        } else if self.omega() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All divisors of q, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, a) in &self.factors {
            let prev = divs.clone();
            let mut pk = 1u64;
            for _ in 0..a {
                pk *= p;
                divs.extend(prev.iter().map(|d| d * pk));
            }
        }
        divs.sort_unstable();
        divs
    }
}

// ====================== unit groups of prime powers ======================

/// The unit group (ℤ/p^α ℤ)^× presented by explicit generators:
///
/// * odd p: cyclic, generated by the smallest primitive root;
/// * 2^α, α ≥ 3: ⟨−1⟩ × ⟨3⟩ with orders 2 and 2^{α−2};
/// * 4: ⟨3⟩ of order 2;  2: trivial.
///
/// For moduli up to [`DLOG_TABLE_LIMIT`] a full index table is built so that
/// discrete logs — the inner loop of every character evaluation — are O(1).
#[derive(Debug, Clone)]
pub struct UnitGroup {
    modulus: u64,
    p: u64,
    alpha: u32,
    generators: Vec<(u64, u64)>,
    /// Packed generator exponents per residue; u32::MAX marks non-units.
    table: Option<Vec<u32>>,
}

/// Structure of (ℤ/pp ℤ)^× for a prime power pp.
pub fn unit_group(pp: u64) -> Result<UnitGroup> {
    UnitGroup::new(pp)
}

impl UnitGroup {
    pub fn new(pp: u64) -> Result<Self> {
        let fm = FactoredModulus::new(pp)?;
        if fm.factors().len() != 1 {
            return Err(Error::Domain(format!("{pp} is not a prime power")));
        }
        let (p, alpha) = fm.factors()[0];
        let generators: Vec<(u64, u64)> = if p == 2 {
            match alpha {
                1 => vec![],
                2 => vec![(3, 2)],
                _ => vec![(pp - 1, 2), (3, 1u64 << (alpha - 2))],
            }
        } else {
            let g = smallest_primitive_root(p, pp)?;
            vec![(g, fm.phi())]
        };
        let mut group = Self { modulus: pp, p, alpha, generators, table: None };
        if pp <= DLOG_TABLE_LIMIT {
            group.build_table();
        }
        Ok(group)
    }

    fn build_table(&mut self) {
        let pp = self.modulus as usize;
        let mut table = vec![u32::MAX; pp];
        if self.p == 2 && self.alpha >= 3 {
            let half = 1u64 << (self.alpha - 2);
            for e1 in 0..2u64 {
                let mut x = if e1 == 0 { 1 } else { self.modulus - 1 };
                for e2 in 0..half {
                    table[x as usize] = (e1 * half + e2) as u32;
                    x = mul_mod(x, 3, self.modulus);
                }
            }
        } else if self.generators.is_empty() {
            table[1 % pp] = 0;
        } else {
            let (g, ord) = self.generators[0];
            let mut x = 1u64;
            for k in 0..ord {
                table[x as usize] = k as u32;
                x = mul_mod(x, g, self.modulus);
            }
        }
        self.table = Some(table);
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// Generators as (element, order) pairs, in canonical order
    /// (for 2^α with α ≥ 3: first −1, then 3).
    pub fn generators(&self) -> &[(u64, u64)] {
        &self.generators
    }

    pub fn phi(&self) -> u64 {
        self.generators.iter().map(|&(_, ord)| ord).product::<u64>().max(1)
    }

    /// Exponent vector of a unit x against [`Self::generators`], or None if
    /// x is not a unit.
    pub fn dlog_vector(&self, x: u64) -> Option<Vec<u64>> {
        let x = x % self.modulus;
        if self.modulus == 1 {
            return Some(vec![]);
        }
        if gcd(x, self.modulus) != 1 {
            return None;
        }
        if let Some(table) = &self.table {
            let packed = table[x as usize];
            debug_assert_ne!(packed, u32::MAX);
            let packed = packed as u64;
            return Some(match self.generators.len() {
                0 => vec![],
                1 => vec![packed],
                _ => {
                    let half = 1u64 << (self.alpha - 2);
                    vec![packed / half, packed % half]
                }
            });
        }
        match self.generators.len() {
            0 => Some(vec![]),
            1 => {
                let (g, _) = self.generators[0];
                discrete_log(g, x, self.modulus).ok().map(|e| vec![e])
            }
            _ => {
                // x ≡ (−1)^{e₁}·3^{e₂}; try e₁ = 0, then e₁ = 1.
                if let Ok(e2) = discrete_log(3, x, self.modulus) {
                    return Some(vec![0, e2]);
                }
                let neg = self.modulus - x;
                discrete_log(3, neg, self.modulus).ok().map(|e2| vec![1, e2])
            }
        }
    }
}

/// Smallest primitive root of (ℤ/p^α ℤ)^× for odd p, found by direct search:
/// g is a generator iff g^{φ/r} ≠ 1 for every prime r | φ.
fn smallest_primitive_root(p: u64, pp: u64) -> Result<u64> {
    let phi = pp / p * (p - 1);
    let phi_factors = FactoredModulus::new(phi)?;
    'candidate: for g in 2..pp {
        if gcd(g, pp) != 1 {
            continue;
        }
        for &(r, _) in phi_factors.factors() {
            if pow_mod(g, phi / r, pp) == 1 {
                continue 'candidate;
            }
        }
        return Ok(g);
    }
    Err(Error::NoSolution(format!("no primitive root mod {pp}")))
}

/// Multiplicative order of a unit g mod m, given φ(m).
pub fn multiplicative_order(g: u64, m: u64) -> Result<u64> {
    if m == 1 {
        return Ok(1);
    }
    if gcd(g % m, m) != 1 {
        return Err(Error::Domain(format!("{g} is not a unit mod {m}")));
    }
    let fm = FactoredModulus::new(m)?;
    let mut ord = fm.phi();
    let of = FactoredModulus::new(ord)?;
    for &(r, _) in of.factors() {
        while ord % r == 0 && pow_mod(g, ord / r, m) == 1 {
            ord /= r;
        }
    }
    Ok(ord)
}

/// Discrete log of x in the subgroup ⟨g⟩ ⊆ (ℤ/pp ℤ)^×, by Pohlig–Hellman
/// with baby-step/giant-step leaves.  Errors with [`Error::NoSolution`] when
/// x lies outside ⟨g⟩.
pub fn discrete_log(g: u64, x: u64, pp: u64) -> Result<u64> {
    if pp == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let g = g % pp;
    let x = x % pp;
    if pp == 1 {
        return Ok(0);
    }
    if gcd(g, pp) != 1 || gcd(x, pp) != 1 {
        return Err(Error::Domain("discrete log needs units".into()));
    }
    let ord = multiplicative_order(g, pp)?;
    let ord_factors = FactoredModulus::new(ord)?;
    let mut residues: Vec<(u64, u64)> = Vec::new();
    for &(l, e) in ord_factors.factors() {
        let le = l.pow(e);
        let g_i = pow_mod(g, ord / le, pp);
        let x_i = pow_mod(x, ord / le, pp);
        let y = prime_power_dlog(g_i, x_i, l, e, pp)
            .ok_or_else(|| Error::NoSolution(format!("{x} is outside <{g}> mod {pp}")))?;
        residues.push((y, le));
    }
    // CRT over the coprime prime-power orders.
    let mut sol = 0u64;
    let mut modulus = 1u64;
    for (r, m) in residues {
        let inv = inv_mod(modulus % m, m).expect("orders are coprime");
        let diff = (r + m - sol % m) % m;
        sol += modulus * mul_mod(diff, inv, m);
        modulus *= m;
    }
    if pow_mod(g, sol, pp) != x {
        return Err(Error::NoSolution(format!("{x} is outside <{g}> mod {pp}")));
    }
    Ok(sol)
}

/// Dlog in a cyclic group of order ℓ^e, digit by digit in base ℓ.
fn prime_power_dlog(g: u64, x: u64, l: u64, e: u32, pp: u64) -> Option<u64> {
    let gamma = pow_mod(g, l.pow(e - 1), pp); // order ℓ
    let g_inv = inv_mod(g, pp)?;
    let mut y = 0u64;
    for k in 0..e {
        let shift = pow_mod(g_inv, y, pp);
        let c = pow_mod(mul_mod(x, shift, pp), l.pow(e - 1 - k), pp);
        let d = bsgs(gamma, c, l, pp)?;
        y += d * l.pow(k);
    }
    Some(y)
}

/// Baby-step/giant-step for γ of prime order ℓ: find d with γ^d = c.
fn bsgs(gamma: u64, c: u64, l: u64, pp: u64) -> Option<u64> {
    let m = (l as f64).sqrt().ceil() as u64;
    let mut baby = std::collections::HashMap::with_capacity(m as usize);
    let mut cur = 1u64;
    for j in 0..m {
        baby.entry(cur).or_insert(j);
        cur = mul_mod(cur, gamma, pp);
    }
    let giant = inv_mod(pow_mod(gamma, m, pp), pp)?;
    let mut gamma_im = c;
    for i in 0..=m {
        if let Some(&j) = baby.get(&gamma_im) {
            let d = i * m + j;
            if d < l {
                return Some(d);
            }
        }
        gamma_im = mul_mod(gamma_im, giant, pp);
    }
    None
}

// ============================== radicals ==============================

/// The three radicals attached to q = Π p^{α_p}:
///
/// * h₁ = Π p^{⌈α/2⌉}, the smallest h with q | h²;
/// * h₂ = Π p^{⌈α/3⌉}, the smallest h with q | h³;
/// * h₃ = Π p, the squarefree kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radicals {
    pub h1: u64,
    pub h2: u64,
    pub h3: u64,
}

pub fn radicals(m: &FactoredModulus) -> Radicals {
    let mut h1 = 1u64;
    let mut h2 = 1u64;
    let mut h3 = 1u64;
    for &(p, a) in m.factors() {
        h1 *= p.pow(a.div_ceil(2));
        h2 *= p.pow(a.div_ceil(3));
        h3 *= p;
    }
    Radicals { h1, h2, h3 }
}

// =============================== sieves ===============================

/// Sieve tables on [1, limit]: Λ kept symbolically as (p, k) so logs are
/// taken only at the point of use, plus μ and ω, plus smallest prime
/// factors for cheap per-n factorization.
#[derive(Debug, Clone)]
pub struct ArithTables {
    limit: usize,
    spf: Vec<u32>,
    lambda_p: Vec<u32>,
    lambda_k: Vec<u8>,
    mu: Vec<i8>,
    omega: Vec<u8>,
}

/// Build [`ArithTables`] on [1, limit].
pub fn sieve(limit: usize) -> ArithTables {
    ArithTables::new(limit)
}

impl ArithTables {
    pub fn new(limit: usize) -> Self {
        let limit = limit.max(1);
        let n = limit + 1;
        let mut spf = vec![0u32; n];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let ip = i * p as usize;
                if p > spf[i] || ip >= n {
                    break;
                }
                spf[ip] = p;
            }
        }
        let mut lambda_p = vec![0u32; n];
        let mut lambda_k = vec![0u8; n];
        let mut mu = vec![0i8; n];
        let mut omega = vec![0u8; n];
        if limit >= 1 {
            mu[1] = 1;
        }
        for i in 2..n {
            let p = spf[i] as usize;
            let mut m = i;
            let mut k = 0u8;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            if m == 1 {
                lambda_p[i] = p as u32;
                lambda_k[i] = k;
            }
            omega[i] = omega[m] + 1;
            mu[i] = if k > 1 { 0 } else { -mu[m] };
        }
        Self { limit, spf, lambda_p, lambda_k, mu, omega }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Λ(n) as the prime-power marker (p, k) when n = p^k, else None.
    pub fn lambda(&self, n: u64) -> Option<(u64, u32)> {
        let i = n as usize;
        if i < 2 || i > self.limit || self.lambda_p[i] == 0 {
            None
        } else {
            Some((self.lambda_p[i] as u64, self.lambda_k[i] as u32))
        }
    }

    /// Λ(n) as a float: ln p when n is a power of p, else 0.
    pub fn lambda_ln(&self, n: u64) -> f64 {
        match self.lambda(n) {
            Some((p, _)) => (p as f64).ln(),
            None => 0.0,
        }
    }

    pub fn mu(&self, n: u64) -> i64 {
        self.mu[n as usize] as i64
    }

    pub fn omega(&self, n: u64) -> u32 {
        self.omega[n as usize] as u32
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    /// Prime factorization of n ≤ limit via the smallest-prime table.
    pub fn factor(&self, n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut k = 0u32;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            out.push((p as u64, k));
        }
        out
    }

    /// Σ_{d | n, d ≤ cap} μ(d): the truncated-Möbius coefficient that sits
    /// on the outer variable of the fourth decomposition piece.
    pub fn mu_divisor_sum(&self, n: u64, cap: u64) -> i64 {
        let primes: Vec<u64> = self.factor(n).into_iter().map(|(p, _)| p).collect();
        let mut total = 0i64;
        // Squarefree divisors only; the rest have μ = 0.
        for mask in 0..(1u32 << primes.len()) {
            let mut d = 1u64;
            let mut sign = 1i64;
            for (i, &p) in primes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    d = d.saturating_mul(p);
                    sign = -sign;
                }
            }
            if d <= cap {
                total += sign;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // -------- factoring --------

    /// Plain trial division, the independent reference for `factorize`.
    fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2u64;
        while p * p <= n {
            if n % p == 0 {
                let mut a = 0;
                while n % p == 0 {
                    n /= p;
                    a += 1;
                }
                out.push((p, a));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn factorize_12() {
        let m = factorize(12).unwrap();
        assert_eq!(m.factors(), &[(2, 2), (3, 1)]);
        assert_eq!(m.phi(), 4);
        assert_eq!(m.omega(), 2);
        assert!(!m.is_squarefree());
    }

    #[test]
    fn factorize_one_and_zero() {
        let m = factorize(1).unwrap();
        assert!(m.factors().is_empty());
        assert_eq!(m.phi(), 1);
        assert_eq!(m.divisors(), vec![1]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn factorize_matches_trial_division() {
        for n in 1..=2000u64 {
            assert_eq!(factorize(n).unwrap().factors(), trial_factor(n).as_slice(), "n={n}");
        }
        for n in [9973u64, 2 * 3 * 5 * 7 * 11 * 13, 1009 * 1013, 999_983 * 2, 10_000_019] {
            assert_eq!(factorize(n).unwrap().factors(), trial_factor(n).as_slice(), "n={n}");
        }
    }

    #[test]
    fn factorize_large_semiprime() {
        // Big enough that trial division alone gives up and rho must split it.
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        let m = factorize(p * q).unwrap();
        assert_eq!(m.factors(), &[(p, 1), (q, 1)]);
    }

    #[test]
    fn phi_matches_coprime_count() {
        for q in 1..=300u64 {
            let count = (1..=q).filter(|&n| gcd(n, q) == 1).count() as u64;
            assert_eq!(factorize(q).unwrap().phi(), count, "q={q}");
        }
    }

    #[test]
    fn divisors_sorted_and_complete() {
        let m = factorize(360).unwrap();
        let d = m.divisors();
        assert_eq!(d.len(), 24);
        assert!(d.windows(2).all(|w| w[0] < w[1]));
        assert!(d.iter().all(|&x| 360 % x == 0));
    }

    // -------- unit groups --------

    /// Exhaustive smallest-generator search, the reference for the
    /// primitive-root computation.
    fn brute_smallest_generator(pp: u64) -> Option<u64> {
        let phi = factorize(pp).unwrap().phi();
        (2..pp).find(|&g| {
            gcd(g, pp) == 1 && {
                let mut x = g;
                let mut ord = 1;
                while x != 1 {
                    x = mul_mod(x, g, pp);
                    ord += 1;
                }
                ord == phi
            }
        })
    }

    #[test]
    fn unit_group_mod_5() {
        let u = unit_group(5).unwrap();
        assert_eq!(u.generators(), &[(2, 4)]);
        assert_eq!(u.phi(), 4);
    }

    #[test]
    fn unit_group_mod_8() {
        let u = unit_group(8).unwrap();
        assert_eq!(u.generators(), &[(7, 2), (3, 2)]);
        assert_eq!(u.phi(), 4);
    }

    #[test]
    fn unit_group_small_two_powers() {
        assert!(unit_group(2).unwrap().generators().is_empty());
        assert_eq!(unit_group(4).unwrap().generators(), &[(3, 2)]);
    }

    #[test]
    fn unit_group_rejects_composites() {
        assert!(unit_group(12).is_err());
        assert!(unit_group(0).is_err());
    }

    #[test]
    fn smallest_generator_matches_brute_force() {
        for pp in [3u64, 5, 7, 9, 11, 13, 25, 27, 49, 81, 121, 125, 169, 243, 343, 361] {
            let u = unit_group(pp).unwrap();
            assert_eq!(u.generators()[0].0, brute_smallest_generator(pp).unwrap(), "pp={pp}");
        }
    }

    #[test]
    fn generator_orders_exhaustive() {
        // Orders of the claimed generators, verified by direct powering,
        // and the product of orders equals φ.
        for pp in [2u64, 4, 8, 16, 64, 1024, 3, 9, 27, 6561, 5, 625, 7, 2401, 994009, 524288] {
            let u = unit_group(pp).unwrap();
            let phi = factorize(pp).unwrap().phi();
            assert_eq!(u.phi(), phi, "pp={pp}");
            for &(g, ord) in u.generators() {
                assert_eq!(pow_mod(g, ord, pp), 1 % pp, "pp={pp} g={g}");
                let of = factorize(ord).unwrap();
                for &(r, _) in of.factors() {
                    assert_ne!(pow_mod(g, ord / r, pp), 1, "order of {g} mod {pp} divides {ord}/{r}");
                }
            }
        }
    }

    #[test]
    fn dlog_vector_reconstructs_units() {
        for pp in [5u64, 8, 16, 27, 121, 2048] {
            let u = unit_group(pp).unwrap();
            for x in 1..pp {
                if gcd(x, pp) != 1 {
                    assert!(u.dlog_vector(x).is_none());
                    continue;
                }
                let e = u.dlog_vector(x).unwrap();
                let mut rebuilt = 1u64 % pp;
                for (&(g, _), &ei) in u.generators().iter().zip(&e) {
                    rebuilt = mul_mod(rebuilt, pow_mod(g, ei, pp), pp);
                }
                assert_eq!(rebuilt, x, "pp={pp} x={x}");
            }
        }
    }

    // -------- discrete log --------

    #[test]
    fn dlog_examples() {
        assert_eq!(discrete_log(2, 3, 5).unwrap(), 3);
        assert_eq!(discrete_log(2, 4, 5).unwrap(), 2);
        assert_eq!(discrete_log(2, 1, 5).unwrap(), 0);
        assert_eq!(discrete_log(3, 1, 8).unwrap(), 0);
    }

    #[test]
    fn dlog_round_trips_above_table_limit() {
        // 1987² > 2²⁰ forces the Pohlig–Hellman/BSGS path.
        let pp = 1987u64 * 1987;
        assert!(pp > DLOG_TABLE_LIMIT);
        let u = unit_group(pp).unwrap();
        let (g, _) = u.generators()[0];
        for k in [0u64, 1, 2, 77, 12345, 999_999, 1987 * 1986 - 1] {
            let x = pow_mod(g, k, pp);
            assert_eq!(discrete_log(g, x, pp).unwrap(), k, "k={k}");
        }
    }

    #[test]
    fn dlog_outside_subgroup_errors() {
        // ⟨7⟩ = {1, 7} mod 8; 3 is not in it.
        assert!(matches!(discrete_log(7, 3, 8), Err(Error::NoSolution(_))));
        // ⟨4⟩ = squares mod 5; 2 is a non-residue.
        assert!(matches!(discrete_log(4, 2, 5), Err(Error::NoSolution(_))));
    }

    #[test]
    fn dlog_rejects_non_units() {
        assert!(matches!(discrete_log(2, 4, 8), Err(Error::Domain(_))));
    }

    // -------- radicals --------

    #[test]
    fn radicals_examples() {
        let r = radicals(&factorize(12).unwrap());
        assert_eq!((r.h1, r.h2, r.h3), (6, 6, 6));
        let r = radicals(&factorize(8).unwrap());
        assert_eq!((r.h1, r.h2, r.h3), (4, 2, 2));
        let r = radicals(&factorize(1).unwrap());
        assert_eq!((r.h1, r.h2, r.h3), (1, 1, 1));
    }

    #[test]
    fn radicals_are_minimal() {
        // h₁ is the least h with q | h², h₂ the least with q | h³, h₃ the
        // largest squarefree divisor — checked by exhaustive search.
        for q in 1..=10_000u64 {
            let r = radicals(&factorize(q).unwrap());
            let h1 = (1..).find(|&h| (h * h) % q == 0).unwrap();
            assert_eq!(r.h1, h1, "q={q}");
            let h2 = (1u64..).find(|&h| (h * h * h) % q == 0).unwrap();
            assert_eq!(r.h2, h2, "q={q}");
            let h3 = (1..=q).filter(|&h| q % h == 0 && factorize(h).unwrap().is_squarefree()).max();
            assert_eq!(r.h3, h3.unwrap(), "q={q}");
        }
    }

    // -------- sieve --------

    #[test]
    fn sieve_examples() {
        let t = sieve(100);
        assert_eq!(t.lambda(8), Some((2, 3)));
        assert_eq!(t.lambda(9), Some((3, 2)));
        assert_eq!(t.lambda(97), Some((97, 1)));
        assert_eq!(t.lambda(1), None);
        assert_eq!(t.lambda(12), None);
        assert_eq!(t.mu(1), 1);
        assert_eq!(t.mu(6), 1);
        assert_eq!(t.mu(12), 0);
        assert_eq!(t.mu(30), -1);
        assert_eq!(t.omega(1), 0);
        assert_eq!(t.omega(12), 2);
        assert_eq!(t.omega(30), 3);
    }

    #[test]
    fn sieve_matches_factorize() {
        let t = sieve(3000);
        for n in 1..=3000u64 {
            let m = factorize(n).unwrap();
            assert_eq!(t.mu(n), m.mu(), "mu({n})");
            assert_eq!(t.omega(n), m.omega(), "omega({n})");
            assert_eq!(t.factor(n), m.factors().to_vec(), "factor({n})");
            let expect = if m.factors().len() == 1 { Some(m.factors()[0]) } else { None };
            assert_eq!(t.lambda(n), expect, "lambda({n})");
        }
    }

    #[test]
    fn chebyshev_identity_exact() {
        // Σ_{d|n} Λ(d) = log n, held at the level of prime multisets:
        // collecting (p, 1) once per prime-power divisor p^k | n must give
        // exactly the multiset of primes dividing n with multiplicity.
        let t = sieve(10_000);
        for n in 1..=10_000u64 {
            let mut collected: Vec<u64> = Vec::new();
            for d in factorize(n).unwrap().divisors() {
                if let Some((p, _)) = t.lambda(d) {
                    collected.push(p);
                }
            }
            collected.sort_unstable();
            let mut expected: Vec<u64> = Vec::new();
            for (p, a) in t.factor(n) {
                for _ in 0..a {
                    expected.push(p);
                }
            }
            expected.sort_unstable();
            assert_eq!(collected, expected, "n={n}");
        }
    }

    #[test]
    fn mu_divisor_sum_truncates() {
        let t = sieve(100);
        // n = 30: divisors 1,2,3,5,6,10,15,30 with μ = 1,−1,−1,−1,1,1,1,−1.
        assert_eq!(t.mu_divisor_sum(30, 30), 0);
        assert_eq!(t.mu_divisor_sum(30, 1), 1);
        assert_eq!(t.mu_divisor_sum(30, 5), -2);
        assert_eq!(t.mu_divisor_sum(30, 10), 0);
        // Full sum over divisors of n > 1 is 0.
        for n in 2..=100u64 {
            assert_eq!(t.mu_divisor_sum(n, n), 0, "n={n}");
        }
    }

    // -------- modular primitives --------

    #[test]
    fn egcd_and_inverse() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 8), None);
        assert_eq!(inv_mod(1, 1), Some(0));
        for m in 2..=50u64 {
            for a in 1..m {
                if let Some(inv) = inv_mod(a, m) {
                    assert_eq!(mul_mod(a, inv, m), 1);
                } else {
                    assert_ne!(gcd(a, m), 1);
                }
            }
        }
    }

    #[test]
    fn gcd_i128_convention() {
        assert_eq!(gcd_i128(0, 12), 12);
        assert_eq!(gcd_i128(-8, 12), 4);
        assert_eq!(gcd_i128(25, 10), 5);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let t = sieve(20_000);
        for n in 0..=20_000u64 {
            assert_eq!(is_prime(n), n >= 2 && t.is_prime(n), "n={n}");
        }
        assert!(is_prime(2_147_483_647)); // 2³¹ − 1
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }
}
