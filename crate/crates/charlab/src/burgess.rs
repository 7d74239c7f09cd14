//! Brute-force counting sets behind the complete product-sum bounds.
//!
//! A six-offset shift tuple splits into two monic cubics f₁, f₂ and the
//! Wronskian-style polynomial F = f₁′f₂ − f₁f₂′.  The sets counted here
//! classify tuples by how strongly f₁ and f₂ collide modulo a divisor pair
//! (s, s′): the base set `A` demands an x where F, F′ vanish mod s and F″
//! vanishes mod s′ while f₁f₂ stays coprime to s, and a chain of
//! substitution sets `A1`–`A4` successively eliminates variables until only
//! divisibility conditions on offset differences remain.  Every set is
//! enumerated exactly by definitional scanning, and each report carries the
//! expected cardinality shape so the chain constants can be tracked
//! empirically instead of assumed.
//!
//! The restricted set `C` slices a complete product sum by the divisibility
//! pattern of F, F′, F″ against radical levels of a coprime factorization
//! q = q₀q₁q₂q₃; for squarefree q the slices over all 4^ω(q) patterns
//! partition [1, q] exactly, so summing them recovers the complete sum.

use crate::arith::{factorize, gcd, gcd_i128, radicals, FactoredModulus};
use crate::charsums::ShiftTuple;
use crate::dirichlet::DirichletCharacter;
use crate::{Error, KahanComplex, Result};
use num_complex::Complex64;

/// Dense integer polynomial with exact `i128` coefficients, ascending order,
/// trailing zeros trimmed (the zero polynomial has no coefficients).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<i128>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    /// Π_i (x + d·v_i), a monic polynomial with one linear factor per offset.
    pub fn from_linear_shifts(d: u64, offsets: &[u64]) -> Self {
        let mut p = IntPolynomial::new(vec![1]);
        for &v in offsets {
            let shift = d as i128 * v as i128;
            p = p.mul(&IntPolynomial::new(vec![shift, 1]));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn eval(&self, x: i128) -> i128 {
        let mut acc = 0i128;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Horner evaluation with every step reduced mod m, so coefficients and
    /// points of any size stay overflow-free.  Returns a value in [0, m).
    pub fn eval_mod(&self, x: u64, m: u64) -> u64 {
        let mi = m as i128;
        let xi = (x % m) as i128;
        let mut acc = 0i128;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * xi + c.rem_euclid(mi)).rem_euclid(mi);
        }
        acc as u64
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return IntPolynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as i128 * c)
            .collect();
        IntPolynomial::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return IntPolynomial::zero();
        }
        let mut coeffs = vec![0i128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        IntPolynomial::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(0) - other.coeffs.get(i).copied().unwrap_or(0)
            })
            .collect();
        IntPolynomial::new(coeffs)
    }
}

/// F = f₁′f₂ − f₁f₂′ for a six-offset tuple.  The x⁵ terms of the two
/// products always cancel (both cubics are monic), so deg F ≤ 4; F is
/// identically zero exactly when f₁ = f₂.
pub fn f_polynomial(t: &ShiftTuple) -> Result<IntPolynomial> {
    if t.r() != 3 {
        return Err(Error::Domain(format!(
            "F is defined for six-offset tuples, got 2r = {}",
            2 * t.r()
        )));
    }
    let (lo, hi) = t.halves();
    let f1 = IntPolynomial::from_linear_shifts(t.d(), lo);
    let f2 = IntPolynomial::from_linear_shifts(t.d(), hi);
    let f = f1.derivative().mul(&f2).sub(&f1.mul(&f2.derivative()));
    assert!(f.degree().unwrap_or(0) <= 4);
    Ok(f)
}

/// One exact counting result with the cardinality shape it is measured
/// against.  For the divisor-triple set `A4` the three moduli are stored in
/// (s, s_prime, s_dprime) and d is recorded as 1 (it does not enter that
/// set's definition).
#[derive(Clone, Debug)]
pub struct CountReport {
    pub set: &'static str,
    pub s: u64,
    pub s_prime: u64,
    pub s_dprime: Option<u64>,
    pub d: u64,
    pub v_cap: u64,
    pub q: Option<u64>,
    pub cardinality: u64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

fn validate_divisor_pair(s: u64, s_prime: u64) -> Result<()> {
    if s == 0 || s_prime == 0 {
        return Err(Error::Domain("moduli must be positive".into()));
    }
    if s % s_prime != 0 {
        return Err(Error::Domain(format!(
            "s' = {s_prime} must divide s = {s}"
        )));
    }
    Ok(())
}

fn validate_scan_params(d: u64, v_cap: u64) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("shift scale d must be positive".into()));
    }
    if v_cap == 0 {
        return Err(Error::Domain("offset cap V must be positive".into()));
    }
    Ok(())
}

fn check_budget(cost: u128, budget: u64, what: &str) -> Result<()> {
    if cost > budget as u128 {
        return Err(Error::Resource {
            cost,
            budget,
            what: what.into(),
        });
    }
    Ok(())
}

/// Odometer over [1, v_cap]^6, first coordinate fastest.
struct TupleBox {
    v: [u64; 6],
    v_cap: u64,
    done: bool,
}

fn tuple_box(v_cap: u64) -> TupleBox {
    TupleBox {
        v: [1; 6],
        v_cap,
        done: v_cap == 0,
    }
}

impl Iterator for TupleBox {
    type Item = [u64; 6];

    fn next(&mut self) -> Option<[u64; 6]> {
        if self.done {
            return None;
        }
        let out = self.v;
        let mut i = 0;
        loop {
            self.v[i] += 1;
            if self.v[i] <= self.v_cap {
                break;
            }
            self.v[i] = 1;
            i += 1;
            if i == 6 {
                self.done = true;
                break;
            }
        }
        Some(out)
    }
}

/// Nonzero signed offsets −v_cap ≤ x ≤ v_cap, x ≠ 0, in ascending order.
fn nonzero_offsets(v_cap: u64) -> impl Iterator<Item = i64> + Clone {
    let v = v_cap as i64;
    (-v..=v).filter(|&x| x != 0)
}

/// Elementary symmetric functions of three signed offsets.
fn elem_sym3(a: i64, b: i64, c: i64) -> (i128, i128, i128) {
    let (a, b, c) = (a as i128, b as i128, c as i128);
    (a + b + c, a * b + a * c + b * c, a * b * c)
}

/// Membership in `A(s, s')`: some x (scanned mod s, since all three
/// divisibility conditions are periodic mod s) has f₁(x)f₂(x) coprime to s
/// while s | F(x), s | F′(x) and s′ | F″(x).
fn a_member(s: u64, s_prime: u64, d: u64, v: &[u64; 6]) -> bool {
    let f1 = IntPolynomial::from_linear_shifts(d, &v[..3]);
    let f2 = IntPolynomial::from_linear_shifts(d, &v[3..]);
    let big_f = f1.derivative().mul(&f2).sub(&f1.mul(&f2.derivative()));
    let df = big_f.derivative();
    let ddf = df.derivative();
    for x in 0..s {
        if big_f.eval_mod(x, s) != 0 || df.eval_mod(x, s) != 0 || ddf.eval_mod(x, s_prime) != 0 {
            continue;
        }
        let prod = (f1.eval_mod(x, s) as u128 * f2.eval_mod(x, s) as u128 % s as u128) as u64;
        if gcd(s, prod) == 1 {
            return true;
        }
    }
    false
}

/// #A(s,s') = #{v ∈ [1,V]^6 : a_member}, reported against the shape
/// (d,s)⁴(V⁶/(ss′) + V⁵/s′) + V³.
pub fn count_a(s: u64, s_prime: u64, d: u64, v_cap: u64, q: u64, budget: u64) -> Result<CountReport> {
    validate_divisor_pair(s, s_prime)?;
    validate_scan_params(d, v_cap)?;
    let cost = s as u128 * (v_cap as u128).pow(6);
    check_budget(cost, budget, "count_a tuple-by-root scan")?;
    let mut cardinality = 0u64;
    for v in tuple_box(v_cap) {
        if a_member(s, s_prime, d, &v) {
            cardinality += 1;
        }
    }
    let gds = gcd(d, s) as f64;
    let vf = v_cap as f64;
    let bound =
        gds.powi(4) * (vf.powi(6) / (s as f64 * s_prime as f64) + vf.powi(5) / s_prime as f64)
            + vf.powi(3);
    Ok(CountReport {
        set: "A",
        s,
        s_prime,
        s_dprime: None,
        d,
        v_cap,
        q: Some(q),
        cardinality,
        bound: Some(bound),
        ratio: Some(cardinality as f64 / bound),
    })
}

/// The cubic-collapse congruence of `A1`, checked coefficientwise: writing
/// f₁(X) = X³ + d·e₁X² + d²e₂X + d³e₃ (and likewise f₂), the identity
/// 6(f₁(X) + λf₂(X)) ≡ 6(1+λ)(X+t)³ (mod s) at degrees 0..3.  The degree-3
/// coefficients are identical, so three congruences decide.
fn a1_congruence(
    s: u64,
    d: u64,
    ef1: (i128, i128, i128),
    ef2: (i128, i128, i128),
    lambda: u64,
    t: u64,
) -> bool {
    let s = s as i128;
    let d = d as i128;
    let l = lambda as i128;
    let t = t as i128;
    let c2 = 6 * d * (ef1.0 + l * ef2.0) - 18 * (1 + l) * t;
    let c1 = 6 * d * d * (ef1.1 + l * ef2.1) - 18 * (1 + l) * t * t;
    let c0 = 6 * d * d * d * (ef1.2 + l * ef2.2) - 6 * (1 + l) * t * t * t;
    c2.rem_euclid(s) == 0 && c1.rem_euclid(s) == 0 && c0.rem_euclid(s) == 0
}

/// f₁(−t) = Π_{i≤3} (d·v_i − t) as an exact integer.
fn f1_at_neg_t(d: u64, v: &[u64], t: u64) -> i128 {
    v.iter()
        .map(|&vi| d as i128 * vi as i128 - t as i128)
        .product()
}

/// Membership in `A1(s, s')` for (v, λ, t): every later offset differs from
/// v₁, λ is a unit mod s with 6(1+λ) ≡ 0 (mod s′), f₁(−t) is coprime to
/// s/s′, and the cubic-collapse congruence holds.
fn a1_member(s: u64, s_prime: u64, d: u64, v: &[u64; 6], lambda: u64, t: u64) -> bool {
    if v[1..].iter().any(|&vi| vi == v[0]) {
        return false;
    }
    if gcd(lambda, s) != 1 {
        return false;
    }
    if (6 * (1 + lambda as u128)) % s_prime as u128 != 0 {
        return false;
    }
    let t_range = s / s_prime;
    if gcd_i128(f1_at_neg_t(d, &v[..3], t), t_range) != 1 {
        return false;
    }
    let ef1 = elem_sym3(v[0] as i64, v[1] as i64, v[2] as i64);
    let ef2 = elem_sym3(v[3] as i64, v[4] as i64, v[5] as i64);
    a1_congruence(s, d, ef1, ef2, lambda, t)
}

/// #A1(s,s') over v ∈ [1,V]^6, 0 < λ ≤ s, 0 < t ≤ s/s′.  No standalone
/// bound shape: this set is measured inside `chain_report`.
pub fn count_a1(s: u64, s_prime: u64, d: u64, v_cap: u64, budget: u64) -> Result<CountReport> {
    validate_divisor_pair(s, s_prime)?;
    validate_scan_params(d, v_cap)?;
    let t_range = s / s_prime;
    let cost = (v_cap as u128).pow(6) * s as u128 * t_range as u128;
    check_budget(cost, budget, "count_a1 (v, lambda, t) scan")?;
    let mut cardinality = 0u64;
    for v in tuple_box(v_cap) {
        for lambda in 1..=s {
            for t in 1..=t_range {
                if a1_member(s, s_prime, d, &v, lambda, t) {
                    cardinality += 1;
                }
            }
        }
    }
    Ok(CountReport {
        set: "A1",
        s,
        s_prime,
        s_dprime: None,
        d,
        v_cap,
        q: None,
        cardinality,
        bound: None,
        ratio: None,
    })
}

/// The congruence of `A2` after the substitution eliminates (V₂, λ):
/// 6d²T³(V₃²−σ₁V₃+σ₂) − 18d³σ₃T² + 18d⁴V₃σ₃T − 6d⁵V₃²σ₃ ≡ 0 (mod s).
fn a2_congruence(s: u64, d: u64, v3: i64, sig: (i128, i128, i128), t: u64) -> bool {
    let s = s as i128;
    let d = d as i128;
    let v3 = v3 as i128;
    let t = t as i128;
    let p = v3 * v3 - sig.0 * v3 + sig.1;
    let val = 6 * d * d * t * t * t * p - 18 * d * d * d * sig.2 * t * t
        + 18 * d * d * d * d * v3 * sig.2 * t
        - 6 * d * d * d * d * d * v3 * v3 * sig.2;
    val.rem_euclid(s) == 0
}

/// Membership in `A2(s, s')` for (V₃, V₄, V₅, V₆, T): T and T − dV₃ both
/// coprime to s/s′, the eliminated congruence mod s, and 6d³σ₃ ≡ 0 (mod s′).
fn a2_member(s: u64, s_prime: u64, d: u64, v3: i64, v4: i64, v5: i64, v6: i64, t: u64) -> bool {
    let t_range = s / s_prime;
    if gcd(t_range, t) != 1 {
        return false;
    }
    if gcd_i128(t as i128 - d as i128 * v3 as i128, t_range) != 1 {
        return false;
    }
    let sig = elem_sym3(v4, v5, v6);
    let c23 = 6 * (d as i128).pow(3) * sig.2;
    if c23.rem_euclid(s_prime as i128) != 0 {
        return false;
    }
    a2_congruence(s, d, v3, sig, t)
}

/// #A2(s,s') over nonzero |V_i| ≤ V (i = 3..6) and 0 < T ≤ s/s′.
pub fn count_a2(s: u64, s_prime: u64, d: u64, v_cap: u64, budget: u64) -> Result<CountReport> {
    validate_divisor_pair(s, s_prime)?;
    validate_scan_params(d, v_cap)?;
    let t_range = s / s_prime;
    let cost = (2 * v_cap as u128).pow(4) * t_range as u128;
    check_budget(cost, budget, "count_a2 substituted-tuple scan")?;
    let mut cardinality = 0u64;
    for v3 in nonzero_offsets(v_cap) {
        for v4 in nonzero_offsets(v_cap) {
            for v5 in nonzero_offsets(v_cap) {
                for v6 in nonzero_offsets(v_cap) {
                    for t in 1..=t_range {
                        if a2_member(s, s_prime, d, v3, v4, v5, v6, t) {
                            cardinality += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(CountReport {
        set: "A2",
        s,
        s_prime,
        s_dprime: None,
        d,
        v_cap,
        q: None,
        cardinality,
        bound: None,
        ratio: None,
    })
}

/// Membership in `A3(s, s', s'')`: gcd(s, 6d³σ₃) = s′s″ and
/// s″ | 6d²(V₃²−σ₁V₃+σ₂).  (The quadratic-coefficient congruence is imposed
/// modulo s″: that is the modulus under which the A2 → A3 counting
/// inequality holds for the enumerated sets.)
fn a3_member(
    s: u64,
    s_prime: u64,
    s_dprime: u64,
    d: u64,
    v3: i64,
    v4: i64,
    v5: i64,
    v6: i64,
) -> bool {
    let sig = elem_sym3(v4, v5, v6);
    let c31 = 6 * (d as i128).pow(3) * sig.2;
    if gcd_i128(c31, s) as u128 != s_prime as u128 * s_dprime as u128 {
        return false;
    }
    let v3 = v3 as i128;
    let c32 = 6 * (d as i128).pow(2) * (v3 * v3 - sig.0 * v3 + sig.1);
    c32.rem_euclid(s_dprime as i128) == 0
}

/// #A3(s,s',s'') over nonzero |V_i| ≤ V, reported against the shape
/// (d³,s)·V⁴/(s′s″).
pub fn count_a3(
    s: u64,
    s_prime: u64,
    s_dprime: u64,
    d: u64,
    v_cap: u64,
    budget: u64,
) -> Result<CountReport> {
    validate_divisor_pair(s, s_prime)?;
    if s_dprime == 0 || (s / s_prime) % s_dprime != 0 {
        return Err(Error::Domain(format!(
            "s'' = {s_dprime} must divide s/s' = {}",
            s / s_prime
        )));
    }
    validate_scan_params(d, v_cap)?;
    let cost = (2 * v_cap as u128).pow(4);
    check_budget(cost, budget, "count_a3 offset scan")?;
    let mut cardinality = 0u64;
    for v3 in nonzero_offsets(v_cap) {
        for v4 in nonzero_offsets(v_cap) {
            for v5 in nonzero_offsets(v_cap) {
                for v6 in nonzero_offsets(v_cap) {
                    if a3_member(s, s_prime, s_dprime, d, v3, v4, v5, v6) {
                        cardinality += 1;
                    }
                }
            }
        }
    }
    let d_cubed_gcd = {
        let dm = d % s;
        let d3m = crate::arith::mul_mod(crate::arith::mul_mod(dm, dm, s), dm, s);
        gcd(s, d3m)
    };
    let bound =
        d_cubed_gcd as f64 * (v_cap as f64).powi(4) / (s_prime as f64 * s_dprime as f64);
    Ok(CountReport {
        set: "A3",
        s,
        s_prime,
        s_dprime: Some(s_dprime),
        d,
        v_cap,
        q: None,
        cardinality,
        bound: Some(bound),
        ratio: Some(cardinality as f64 / bound),
    })
}

/// #A4(s₁,s₂,s₃) = #{(V₄,V₅,V₆) : 0 < |V_i| ≤ V, s₁|6V₄, s₂|6V₅, s₃|6V₆},
/// reported against the shape V³/(s₁s₂s₃).
pub fn count_a4(s1: u64, s2: u64, s3: u64, v_cap: u64, budget: u64) -> Result<CountReport> {
    if s1 == 0 || s2 == 0 || s3 == 0 {
        return Err(Error::Domain("divisor triple must be positive".into()));
    }
    if v_cap == 0 {
        return Err(Error::Domain("offset cap V must be positive".into()));
    }
    let cost = (2 * v_cap as u128).pow(3);
    check_budget(cost, budget, "count_a4 offset scan")?;
    let divides = |m: u64, x: i64| (6 * x as i128).rem_euclid(m as i128) == 0;
    let mut cardinality = 0u64;
    for v4 in nonzero_offsets(v_cap) {
        if !divides(s1, v4) {
            continue;
        }
        for v5 in nonzero_offsets(v_cap) {
            if !divides(s2, v5) {
                continue;
            }
            for v6 in nonzero_offsets(v_cap) {
                if divides(s3, v6) {
                    cardinality += 1;
                }
            }
        }
    }
    let bound = (v_cap as f64).powi(3) / (s1 as f64 * s2 as f64 * s3 as f64);
    Ok(CountReport {
        set: "A4",
        s: s1,
        s_prime: s2,
        s_dprime: Some(s3),
        d: 1,
        v_cap,
        q: None,
        cardinality,
        bound: Some(bound),
        ratio: Some(cardinality as f64 / bound),
    })
}

/// All four set cardinalities on one (s, s′, d, V) cell plus the empirical
/// constants of the counting chain, each the ratio of a counted cardinality
/// to the shape it is measured against (0 when both sides vanish, infinite
/// when only the denominator does).
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub s: u64,
    pub s_prime: u64,
    pub d: u64,
    pub v_cap: u64,
    pub q: u64,
    pub a: u64,
    pub a1: u64,
    pub a2: u64,
    /// (s″, #A3(s,s′,s″)) for every s″ | s/s′, ascending.
    pub a3: Vec<(u64, u64)>,
    /// #A / (V³ + #A1)
    pub ratio_a: f64,
    /// #A1 / ((d,s) · V · (1 + V/q) · #A2)
    pub ratio_a1: f64,
    /// #A2 / Σ_{s″} s″·#A3
    pub ratio_a2: f64,
    /// max over s″ of #A3 · s′s″ / ((d³,s) · V⁴)
    pub ratio_a3: f64,
}

fn chain_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Count every set of the chain on one parameter cell.
pub fn chain_report(
    s: u64,
    s_prime: u64,
    d: u64,
    v_cap: u64,
    q: u64,
    budget: u64,
) -> Result<ChainReport> {
    if q == 0 {
        return Err(Error::Domain("q must be positive".into()));
    }
    let a = count_a(s, s_prime, d, v_cap, q, budget)?;
    let a1 = count_a1(s, s_prime, d, v_cap, budget)?;
    let a2 = count_a2(s, s_prime, d, v_cap, budget)?;
    let quotient = factorize(s / s_prime)?;
    let mut a3 = Vec::new();
    for s_dprime in quotient.divisors() {
        let r = count_a3(s, s_prime, s_dprime, d, v_cap, budget)?;
        a3.push((s_dprime, r.cardinality));
    }
    let vf = v_cap as f64;
    let ratio_a = chain_ratio(a.cardinality as f64, vf.powi(3) + a1.cardinality as f64);
    let a1_shape = gcd(d, s) as f64 * vf * (1.0 + vf / q as f64) * a2.cardinality as f64;
    let ratio_a1 = chain_ratio(a1.cardinality as f64, a1_shape);
    let a3_weighted: f64 = a3.iter().map(|&(sd, c)| sd as f64 * c as f64).sum();
    let ratio_a2 = chain_ratio(a2.cardinality as f64, a3_weighted);
    let d_cubed_gcd = {
        let dm = d % s;
        gcd(s, crate::arith::mul_mod(crate::arith::mul_mod(dm, dm, s), dm, s))
    };
    let ratio_a3 = a3
        .iter()
        .map(|&(sd, c)| {
            chain_ratio(
                c as f64,
                d_cubed_gcd as f64 * vf.powi(4) / (s_prime as f64 * sd as f64),
            )
        })
        .fold(0.0f64, f64::max);
    Ok(ChainReport {
        s,
        s_prime,
        d,
        v_cap,
        q,
        a: a.cardinality,
        a1: a1.cardinality,
        a2: a2.cardinality,
        a3,
        ratio_a,
        ratio_a1,
        ratio_a2,
        ratio_a3,
    })
}

/// #{0 ≤ x < s : G(x) ≡ 0 (mod s), gcd(s, G′(x)) | 6} for deg G ≤ 4 and
/// s ≤ 10⁶ (definitional scan; both caps asserted).
pub fn constrained_root_count(g: &IntPolynomial, s: u64) -> u64 {
    assert!(g.degree().unwrap_or(0) <= 4, "degree must be at most 4");
    assert!(s >= 1 && s <= 1_000_000, "modulus must be in [1, 10^6]");
    let dg = g.derivative();
    let mut count = 0;
    for x in 0..s {
        if g.eval_mod(x, s) != 0 {
            continue;
        }
        let slope_gcd = gcd(s, dg.eval_mod(x, s));
        if 6 % slope_gcd == 0 {
            count += 1;
        }
    }
    count
}

/// A coprime four-part factorization q = q₀q₁q₂q₃ together with the three
/// radical levels (l₀, l₁, l₂) that slice the divisibility pattern of
/// (F, F′, F″).  Valid when l₀ | h₁(q₀)/h₃(q₀), l₁ | h₂(q₁)/h₃(q₁) and
/// l₂ | h₂(q₂)/h₃(q₂), where h₁, h₂, h₃ are the square, cube and prime
/// radicals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsetPartition {
    pub parts: [u64; 4],
    pub levels: [u64; 3],
}

/// Radicals of the partition parts needed by the three slice conditions.
struct PartRadicals {
    h1_q0: u64,
    h2_q1: u64,
    h2_q2: u64,
    h2_q3: u64,
    /// h₁(q₁q₂q₃), multiplicative over the coprime parts.
    h1_rest: u64,
    /// h₂(q₂q₃).
    h2_q23: u64,
}

fn partition_radicals(q: u64, p: &CsetPartition) -> Result<PartRadicals> {
    if p.parts.iter().any(|&x| x == 0) || p.levels.iter().any(|&x| x == 0) {
        return Err(Error::Domain("partition parts and levels must be positive".into()));
    }
    let product: u128 = p.parts.iter().map(|&x| x as u128).product();
    if product != q as u128 {
        return Err(Error::Domain(format!(
            "partition parts multiply to {product}, expected q = {q}"
        )));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if gcd(p.parts[i], p.parts[j]) != 1 {
                return Err(Error::Domain(format!(
                    "partition parts {} and {} are not coprime",
                    p.parts[i], p.parts[j]
                )));
            }
        }
    }
    let rad: Vec<_> = p
        .parts
        .iter()
        .map(|&x| factorize(x).map(|m| radicals(&m)))
        .collect::<Result<_>>()?;
    let caps = [
        rad[0].h1 / rad[0].h3,
        rad[1].h2 / rad[1].h3,
        rad[2].h2 / rad[2].h3,
    ];
    for (i, (&level, &cap)) in p.levels.iter().zip(caps.iter()).enumerate() {
        if cap % level != 0 {
            return Err(Error::Domain(format!(
                "level l{i} = {level} does not divide its radical quotient {cap}"
            )));
        }
    }
    Ok(PartRadicals {
        h1_q0: rad[0].h1,
        h2_q1: rad[1].h2,
        h2_q2: rad[2].h2,
        h2_q3: rad[3].h2,
        h1_rest: rad[1].h1 * rad[2].h1 * rad[3].h1,
        h2_q23: rad[2].h2 * rad[3].h2,
    })
}

/// The slice of [1, q] selected by a partition: x belongs when
///   l₀·h₁(q₁q₂q₃) | F(x)  and gcd(F(x),  h₁(q₀)) = l₀,
///   l₁·h₂(q₂q₃)   | F′(x) and gcd(F′(x), h₂(q₁)) = l₁,
///   l₂·h₂(q₃)     | F″(x) and gcd(F″(x), h₂(q₂)) = l₂.
/// All arithmetic is modular (gcd(F(x), h) only needs F(x) mod h), so the
/// scan is overflow-free for any tuple.
pub fn set_c_members(q: u64, partition: &CsetPartition, t: &ShiftTuple) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::Domain("q must be positive".into()));
    }
    if q > 1_000_000 {
        return Err(Error::Resource {
            cost: q as u128,
            budget: 1_000_000,
            what: "set_c_members point scan".into(),
        });
    }
    let pr = partition_radicals(q, partition)?;
    let f = f_polynomial(t)?;
    let df = f.derivative();
    let ddf = df.derivative();
    let [l0, l1, l2] = partition.levels;
    let m0 = l0 * pr.h1_rest;
    let m1 = l1 * pr.h2_q23;
    let m2 = l2 * pr.h2_q3;
    let mut members = Vec::new();
    for x in 1..=q {
        if f.eval_mod(x, m0) != 0 || gcd(pr.h1_q0, f.eval_mod(x, pr.h1_q0)) != l0 {
            continue;
        }
        if df.eval_mod(x, m1) != 0 || gcd(pr.h2_q1, df.eval_mod(x, pr.h2_q1)) != l1 {
            continue;
        }
        if ddf.eval_mod(x, m2) != 0 || gcd(pr.h2_q2, ddf.eval_mod(x, pr.h2_q2)) != l2 {
            continue;
        }
        members.push(x);
    }
    Ok(members)
}

/// A sliced product sum with its cardinality and bound shape.
#[derive(Clone, Debug)]
pub struct CsetReport {
    pub sum: Complex64,
    pub members: u64,
    /// √q · √(q₂q₃l₁) · l₂ / h₂(q₂); meaningful for primitive characters.
    pub bound: f64,
    pub ratio: f64,
}

/// Σ_{x ∈ C} χ(f₁(x))·conj(χ(f₂(x))) over the slice selected by the
/// partition.
pub fn set_c_sum(
    chi: &DirichletCharacter,
    partition: &CsetPartition,
    t: &ShiftTuple,
) -> Result<CsetReport> {
    let q = chi.modulus();
    let pr = partition_radicals(q, partition)?;
    let members = set_c_members(q, partition, t)?;
    let (lo, hi) = t.halves();
    let f1 = IntPolynomial::from_linear_shifts(t.d(), lo);
    let f2 = IntPolynomial::from_linear_shifts(t.d(), hi);
    let table = chi.value_table();
    let mut acc = KahanComplex::new();
    for &x in &members {
        let a = table.at_raw(f1.eval_mod(x, q));
        let b = table.at_raw(f2.eval_mod(x, q));
        acc.add(a * b.conj());
    }
    let sum = acc.value();
    let q2q3l1 = partition.parts[2] as f64 * partition.parts[3] as f64 * partition.levels[1] as f64;
    let bound = (q as f64).sqrt() * q2q3l1.sqrt() * partition.levels[2] as f64 / pr.h2_q2 as f64;
    Ok(CsetReport {
        sum,
        members: members.len() as u64,
        bound,
        ratio: sum.norm() / bound,
    })
}

/// Every valid partition of a squarefree q: each prime goes to exactly one
/// of the four parts (4^ω(q) assignments), and all radical quotients are 1,
/// so every level is forced to (1, 1, 1).  Assignments are enumerated with
/// the smallest prime's slot moving fastest.
pub fn squarefree_partitions(m: &FactoredModulus) -> Result<Vec<CsetPartition>> {
    if !m.is_squarefree() {
        return Err(Error::Domain(format!(
            "q = {} is not squarefree",
            m.q()
        )));
    }
    let primes: Vec<u64> = m.factors().iter().map(|&(p, _)| p).collect();
    let omega = primes.len();
    let total = 4usize.pow(omega as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut parts = [1u64; 4];
        let mut rem = code;
        for &p in &primes {
            parts[rem % 4] *= p;
            rem /= 4;
        }
        out.push(CsetPartition {
            parts,
            levels: [1, 1, 1],
        });
    }
    Ok(out)
}
