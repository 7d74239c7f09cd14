//! Complete and incomplete character sums.
//!
//! The headline object is the shifted-prime sum Σ_{n≤N} Λ(n) χ(n+a); around
//! it sit the sums its estimation decomposes into: linear sums over coprime
//! ranges and progressions, complete sums of products χ(f₁(x))χ̄(f₂(x)),
//! their mean values over shift tuples, twisted pair sums, inverse-shift
//! sums (computed by two independent routes), Ramanujan sums (two closed
//! forms plus direct summation), and bilinear forms with fixed or variable
//! inner limits together with their exact completion.
//!
//! Everything is evaluated by direct summation in a deterministic order with
//! compensated accumulation.  Where the analysis supplies an exact identity
//! (CRT factorization, completion, closed forms) both sides are implemented
//! separately — never reduced to one code path.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, ArithTables, FactoredModulus};
use crate::dirichlet::{CharTable, DirichletCharacter};
use crate::{e, Error, Kahan, KahanComplex, Result};

/// How a sum was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMethod {
    Direct,
    CrtFactored,
}

/// A finished sum: its value, how many summands the defining range held,
/// and which route produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumResult {
    pub value: Complex64,
    pub terms: u64,
    pub method: SumMethod,
}

#[inline]
fn phase(num: u64, q: u64) -> Complex64 {
    e(num as f64 / q as f64)
}

fn require_coprime_shift(a: i64, q: u64) -> Result<u64> {
    let a_red = arith::reduce_i64(a, q);
    if arith::gcd(a_red, q) != 1 {
        return Err(Error::Domain(format!("shift {a} is not coprime to {q}")));
    }
    Ok(a_red)
}

// ======================= shifted-prime and linear sums =======================

/// S_a(q; N) = Σ_{n ≤ N} Λ(n) χ(n + a), with Λ from the sieve tables and
/// logs applied termwise.  Requires (a, q) = 1 and N within the tables.
pub fn shifted_prime_sum(
    chi: &DirichletCharacter,
    a: i64,
    n_max: u64,
    tables: &ArithTables,
) -> Result<SumResult> {
    let q = chi.modulus();
    require_coprime_shift(a, q)?;
    if n_max as usize > tables.limit() {
        return Err(Error::Domain(format!(
            "N = {n_max} exceeds the sieve limit {}",
            tables.limit()
        )));
    }
    let table = chi.value_table();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for n in 1..=n_max {
        if let Some((p, _)) = tables.lambda(n) {
            acc.add(table.at(n as i64 + a) * (p as f64).ln());
            terms += 1;
        }
    }
    Ok(SumResult { value: acc.value(), terms, method: SumMethod::Direct })
}

/// Σ_{M < n ≤ M+N, (n,q)=1} χ(n + a), the linear sum over a coprime range.
pub fn type1_sum(chi: &DirichletCharacter, a: i64, m_start: i64, len: u64) -> Result<SumResult> {
    let q = chi.modulus();
    require_coprime_shift(a, q)?;
    let table = chi.value_table();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for n in (m_start + 1)..=(m_start + len as i64) {
        if arith::gcd(arith::reduce_i64(n, q), q) != 1 {
            continue;
        }
        acc.add(table.at(n + a));
        terms += 1;
    }
    Ok(SumResult { value: acc.value(), terms, method: SumMethod::Direct })
}

/// Σ_{M < n ≤ M+N} χ(d·n + a), the sum along an arithmetic progression.
pub fn progression_sum(
    chi: &DirichletCharacter,
    d: u64,
    a: i64,
    m_start: i64,
    len: u64,
) -> Result<SumResult> {
    if d == 0 {
        return Err(Error::Domain("progression step must be positive".into()));
    }
    let q = chi.modulus();
    let table = chi.value_table();
    let d_red = d % q;
    let mut idx = arith::reduce_i64(m_start.wrapping_mul(d as i64) + a, q);
    let mut acc = KahanComplex::new();
    for _ in 0..len {
        idx += d_red;
        if idx >= q {
            idx -= q;
        }
        acc.add(table.at_raw(idx));
    }
    Ok(SumResult { value: acc.value(), terms: len, method: SumMethod::Direct })
}

// ========================= complete product sums =========================

/// Shifts (d; v₁,...,v_{2r}) defining the product polynomials
/// f₁(x) = Π_{i ≤ r} (x + d·v_i) and f₂(x) = Π_{i > r} (x + d·v_i),
/// with r ∈ {2, 3}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftTuple {
    d: u64,
    v: Vec<u64>,
}

impl ShiftTuple {
    pub fn new(d: u64, v: Vec<u64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("shift scale d must be positive".into()));
        }
        if v.len() != 4 && v.len() != 6 {
            return Err(Error::Domain(format!(
                "need 2r = 4 or 6 shifts, got {}",
                v.len()
            )));
        }
        if v.iter().any(|&x| x == 0) {
            return Err(Error::Domain("shifts must be positive".into()));
        }
        Ok(Self { d, v })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn v(&self) -> &[u64] {
        &self.v
    }

    pub fn r(&self) -> usize {
        self.v.len() / 2
    }

    /// Shifts of f₁ and of f₂.
    pub fn halves(&self) -> (&[u64], &[u64]) {
        self.v.split_at(self.r())
    }
}

/// Σ_{x=1}^{q} χ(f₁(x)) χ̄(f₂(x)) for the product polynomials of `t`.
pub fn complete_product_sum(chi: &DirichletCharacter, t: &ShiftTuple) -> SumResult {
    complete_product_sum_with(&chi.value_table(), t)
}

/// Same, reusing a precomputed value table (the hot path inside mean
/// values, where the same χ is paired with many tuples).
pub fn complete_product_sum_with(table: &CharTable, t: &ShiftTuple) -> SumResult {
    let q = table.q();
    let (v1, v2) = t.halves();
    let s1: Vec<u64> = v1.iter().map(|&v| (t.d() as u128 * v as u128 % q as u128) as u64).collect();
    let s2: Vec<u64> = v2.iter().map(|&v| (t.d() as u128 * v as u128 % q as u128) as u64).collect();
    let mut acc = KahanComplex::new();
    for x in 1..=q {
        let mut f1 = 1u64;
        for &s in &s1 {
            let mut y = x + s;
            if y >= q {
                y -= q;
            }
            f1 = arith::mul_mod(f1, y, q);
        }
        let a = table.at_raw(f1 % q);
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let mut f2 = 1u64;
        for &s in &s2 {
            let mut y = x + s;
            if y >= q {
                y -= q;
            }
            f2 = arith::mul_mod(f2, y, q);
        }
        let b = table.at_raw(f2 % q);
        acc.add(a * b.conj());
    }
    SumResult { value: acc.value(), terms: q, method: SumMethod::Direct }
}

/// The gcd-flavored square-root bound for a complete product sum with
/// r = 2 and at least three distinct shifts:
///
/// ```text
///     |Σ_x χ(f₁(x)) χ̄(f₂(x))| ≤ 8^{ω(q)} √q · max_{A_i ≠ 0} (q, A_i),
/// ```
///
/// where A_i = Π_{j ≠ i} (d·v_i − d·v_j).
pub fn product_sum_gcd_bound(m: &FactoredModulus, t: &ShiftTuple) -> Result<f64> {
    if t.r() != 2 {
        return Err(Error::Domain("gcd bound is for r = 2 tuples".into()));
    }
    let mut distinct: Vec<u64> = t.v().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Domain("gcd bound needs at least 3 distinct shifts".into()));
    }
    let q = m.q();
    let d = t.d() as i128;
    let mut best: Option<u64> = None;
    for i in 0..4 {
        let mut a_i: i128 = 1;
        for j in 0..4 {
            if j != i {
                a_i *= d * t.v()[i] as i128 - d * t.v()[j] as i128;
            }
        }
        if a_i != 0 {
            let g = arith::gcd_i128(a_i, q);
            best = Some(best.map_or(g, |b| b.max(g)));
        }
    }
    let g = best.expect("three distinct shifts give a nonzero A_i");
    Ok(8f64.powi(m.omega() as i32) * (q as f64).sqrt() * g as f64)
}

// ============================== mean values ==============================

/// Policy for mean-value evaluation: a work budget (tuples × q elementary
/// steps), whether Monte-Carlo sampling may stand in when the budget is
/// exceeded, and the sampling seed.
#[derive(Debug, Clone, Copy)]
pub struct MeanValuePolicy {
    pub budget: u64,
    pub sampling: bool,
    pub seed: u64,
}

impl Default for MeanValuePolicy {
    fn default() -> Self {
        Self { budget: 1_000_000_000, sampling: false, seed: 0x5EED }
    }
}

/// Result of a mean-value computation: exact enumeration, or a stratified
/// estimate with its uncertainty spelled out.
#[derive(Debug, Clone, Copy)]
pub enum MeanValue {
    Exact {
        value: f64,
        tuples: u64,
    },
    Sampled {
        estimate: f64,
        std_error: f64,
        /// 95% upper confidence bound — the honest side for bound checks.
        ci95_upper: f64,
        samples: u64,
        seed: u64,
    },
}

impl MeanValue {
    /// Point value (exact value or estimate).
    pub fn point(&self) -> f64 {
        match *self {
            MeanValue::Exact { value, .. } => value,
            MeanValue::Sampled { estimate, .. } => estimate,
        }
    }

    /// Value to test upper bounds against: exact, or the CI upper edge.
    pub fn upper(&self) -> f64 {
        match *self {
            MeanValue::Exact { value, .. } => value,
            MeanValue::Sampled { ci95_upper, .. } => ci95_upper,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MeanValue::Exact { .. })
    }
}

/// Mean value of complete product sums over all shift tuples in [1, V]^{2r}:
///
/// ```text
///     M_r(V) = Σ_{v ∈ [1,V]^{2r}} |Σ_x χ(f₁(x)) χ̄(f₂(x))|.
/// ```
///
/// Enumerates exactly when V^{2r}·q fits the budget; otherwise samples
/// (stratified by v₁) when the policy allows, and errors when it does not.
pub fn mean_value(
    chi: &DirichletCharacter,
    r: usize,
    d: u64,
    v_cap: u64,
    policy: &MeanValuePolicy,
) -> Result<MeanValue> {
    if r != 2 && r != 3 {
        return Err(Error::Domain(format!("r must be 2 or 3, got {r}")));
    }
    if d == 0 || v_cap == 0 {
        return Err(Error::Domain("d and V must be positive".into()));
    }
    let q = chi.modulus();
    let tuples: u128 = (v_cap as u128).pow(2 * r as u32);
    let cost = tuples * q as u128;
    let table = chi.value_table();
    if cost <= policy.budget as u128 {
        let mut acc = Kahan::new();
        let mut v = vec![1u64; 2 * r];
        loop {
            let t = ShiftTuple::new(d, v.clone()).expect("valid tuple");
            acc.add(complete_product_sum_with(&table, &t).value.norm());
            // Odometer, last coordinate fastest.
            let mut i = v.len();
            loop {
                if i == 0 {
                    return Ok(MeanValue::Exact { value: acc.value(), tuples: tuples as u64 });
                }
                i -= 1;
                v[i] += 1;
                if v[i] <= v_cap {
                    break;
                }
                v[i] = 1;
            }
        }
    }
    if !policy.sampling {
        return Err(Error::Resource {
            cost,
            budget: policy.budget,
            what: format!("mean value r={r} V={v_cap} q={q}"),
        });
    }
    // Stratified sampling: strata are the values of v₁; inside a stratum the
    // remaining 2r−1 coordinates are drawn uniformly.
    let stratum_size = (v_cap as f64).powi(2 * r as i32 - 1);
    let per_stratum =
        ((policy.budget / q.max(1)) / v_cap).clamp(2, 1_000_000) as usize;
    let mut estimate = Kahan::new();
    let mut variance = Kahan::new();
    let mut samples = 0u64;
    for v1 in 1..=v_cap {
        let mut rng = ChaCha8Rng::seed_from_u64(
            policy.seed ^ v1.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let mut mean = 0.0f64;
        let mut m2 = 0.0f64;
        for i in 0..per_stratum {
            let mut v = vec![v1];
            for _ in 1..2 * r {
                v.push(rng.gen_range(1..=v_cap));
            }
            let t = ShiftTuple::new(d, v).expect("valid tuple");
            let x = complete_product_sum_with(&table, &t).value.norm();
            // Welford, so the variance is single-pass and stable.
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
        }
        let var = m2 / (per_stratum - 1) as f64;
        estimate.add(stratum_size * mean);
        variance.add(stratum_size * stratum_size * var / per_stratum as f64);
        samples += per_stratum as u64;
    }
    let std_error = variance.value().max(0.0).sqrt();
    Ok(MeanValue::Sampled {
        estimate: estimate.value(),
        std_error,
        ci95_upper: estimate.value() + 1.96 * std_error,
        samples,
        seed: policy.seed,
    })
}

/// The r = 2 mean-value bound shape V²q + (d,q)³ √q V⁴ (sub-polynomial
/// factors dropped).
pub fn mean_value_bound_r2(m: &FactoredModulus, d: u64, v_cap: u64) -> f64 {
    let q = m.q() as f64;
    let v = v_cap as f64;
    let g = arith::gcd(d % m.q(), m.q()).max(1) as f64;
    v * v * q + g * g * g * q.sqrt() * v.powi(4)
}

/// The r = 3 mean-value bound shape V³q (valid for V < q^{1/6} d^{−2};
/// sub-polynomial factors dropped).
pub fn mean_value_bound_r3(m: &FactoredModulus, v_cap: u64) -> f64 {
    let v = v_cap as f64;
    v * v * v * m.q() as f64
}

// =========================== twisted pair sums ===========================

/// Σ_{n=1}^{q} χ(n+u₁) χ̄(n+u₂) e(λn/q) for primitive χ.
pub fn twisted_pair_sum(
    chi: &DirichletCharacter,
    u1: i64,
    u2: i64,
    lambda: i64,
) -> Result<SumResult> {
    if !chi.is_primitive() {
        return Err(Error::Domain(format!("character {} is not primitive", chi.label())));
    }
    Ok(twisted_pair_sum_with(&chi.value_table(), u1, u2, lambda))
}

/// Table-reusing variant of [`twisted_pair_sum`]; the table must come from
/// a primitive character.
pub fn twisted_pair_sum_with(table: &CharTable, u1: i64, u2: i64, lambda: i64) -> SumResult {
    let q = table.q();
    let l = arith::reduce_i64(lambda, q);
    let mut acc = KahanComplex::new();
    for n in 1..=q {
        let a = table.at(n as i64 + u1);
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let b = table.at(n as i64 + u2);
        if b.re == 0.0 && b.im == 0.0 {
            continue;
        }
        acc.add(a * b.conj() * phase(arith::mul_mod(l, n, q), q));
    }
    SumResult { value: acc.value(), terms: q, method: SumMethod::Direct }
}

// =========================== inverse-shift sums ===========================

/// Σ_{(n,q)=1} χ(1 + b·n⁻¹) e(λn/q) for primitive χ, inverses by extended
/// gcd, direct route.
pub fn inverse_shift_sum(chi: &DirichletCharacter, b: i64, lambda: i64) -> Result<SumResult> {
    if !chi.is_primitive() {
        return Err(Error::Domain(format!("character {} is not primitive", chi.label())));
    }
    let q = chi.modulus();
    let table = chi.value_table();
    let b_red = arith::reduce_i64(b, q);
    let l = arith::reduce_i64(lambda, q);
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for n in 1..=q {
        let inv = match arith::inv_mod(n % q, q) {
            Some(i) => i,
            None => continue,
        };
        let arg = (1 + arith::mul_mod(b_red, inv, q)) % q;
        acc.add(table.at_raw(arg) * phase(arith::mul_mod(l, n % q, q), q));
        terms += 1;
    }
    Ok(SumResult { value: acc.value(), terms, method: SumMethod::Direct })
}

/// The same sum evaluated through the CRT: with q = Π p^α, q_i = q/p^α and
/// χ = Π χ_i,
///
/// ```text
///     Σ_{(n,q)=1} χ(1 + b n⁻¹) e(λn/q)
///       = Π_i Σ_{(n_i, p)=1} χ_i(1 + b (n_i q_i)⁻¹) e(λ n_i / p^α),
/// ```
///
/// an independent route used to cross-check the direct one.
pub fn inverse_shift_sum_crt(chi: &DirichletCharacter, b: i64, lambda: i64) -> Result<SumResult> {
    if !chi.is_primitive() {
        return Err(Error::Domain(format!("character {} is not primitive", chi.label())));
    }
    let q = chi.modulus();
    let mut product = Complex64::new(1.0, 0.0);
    for comp in chi.components() {
        let pp = comp.modulus();
        let qi = q / pp;
        let table = comp.value_table();
        let b_red = arith::reduce_i64(b, pp);
        let l = arith::reduce_i64(lambda, pp);
        let mut acc = KahanComplex::new();
        for n in 1..=pp {
            let base = arith::mul_mod(n, qi % pp, pp);
            let inv = match arith::inv_mod(base, pp) {
                Some(i) => i,
                None => continue,
            };
            let arg = (1 + arith::mul_mod(b_red, inv, pp)) % pp;
            acc.add(table.at_raw(arg) * phase(arith::mul_mod(l, n % pp, pp), pp));
        }
        product *= acc.value();
    }
    Ok(SumResult {
        value: product,
        terms: chi.modulus_factored().phi(),
        method: SumMethod::CrtFactored,
    })
}

// ============================ Ramanujan sums ============================

/// c_q(b) = Σ_{d | (b,q)} d·μ(q/d), exact integer arithmetic.
pub fn ramanujan_sum(q: u64, b: i64) -> Result<i64> {
    let (g, m) = ramanujan_gcd(q, b)?;
    let mut total = 0i64;
    for d in arith::factorize(g)?.divisors() {
        total += d as i64 * arith::factorize(m.q() / d)?.mu();
    }
    Ok(total)
}

/// The closed form c_q(b) = μ(q/g)·φ(q)/φ(q/g) with g = (b, q) — the other
/// exact route.
pub fn ramanujan_sum_closed(q: u64, b: i64) -> Result<i64> {
    let (g, m) = ramanujan_gcd(q, b)?;
    let cofactor = arith::factorize(q / g)?;
    Ok(cofactor.mu() * (m.phi() / cofactor.phi()) as i64)
}

fn ramanujan_gcd(q: u64, b: i64) -> Result<(u64, FactoredModulus)> {
    let m = arith::factorize(q)?;
    let b_red = arith::reduce_i64(b, q);
    let g = if b_red == 0 { q } else { arith::gcd(b_red, q) };
    Ok((g, m))
}

/// Σ_{(n,q)=1} e(bn/q) by direct summation — the floating-point check on
/// the two integer closed forms.
pub fn ramanujan_sum_direct(q: u64, b: i64) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let b_red = arith::reduce_i64(b, q);
    let mut acc = KahanComplex::new();
    for n in 1..=q {
        if arith::gcd(n, q) == 1 {
            acc.add(phase(arith::mul_mod(b_red, n, q), q));
        }
    }
    Ok(acc.value())
}

// ======================= quadratic congruence counts =======================

/// #{1 ≤ n ≤ p^α : (n, p) = 1, λn² ≡ cb (mod p^α)} by direct scan.
/// Always ≤ 4·(λ, p^α).
pub fn quad_congruence_count(lambda: i64, b: i64, c: i64, pp: u64) -> Result<u64> {
    let m = arith::factorize(pp)?;
    if m.factors().len() != 1 {
        return Err(Error::Domain(format!("{pp} is not a prime power")));
    }
    if pp > 10_000_000 {
        return Err(Error::Resource {
            cost: pp as u128,
            budget: 10_000_000,
            what: format!("quadratic congruence scan mod {pp}"),
        });
    }
    let p = m.factors()[0].0;
    let l = arith::reduce_i64(lambda, pp);
    let target = arith::mul_mod(arith::reduce_i64(c, pp), arith::reduce_i64(b, pp), pp);
    let mut count = 0u64;
    for n in 1..=pp {
        if n % p == 0 {
            continue;
        }
        if arith::mul_mod(l, arith::mul_mod(n, n, pp), pp) == target {
            count += 1;
        }
    }
    Ok(count)
}

// ============================ bilinear forms ============================

/// A bilinear form instance: coefficients α ∈ ℂ^K, β ∈ ℂ^L, a shift a, and
/// optionally per-k inner windows (M_k, L_k] ⊆ [1, L].
#[derive(Debug, Clone)]
pub struct BilinearInstance {
    k_max: u64,
    l_max: u64,
    a: i64,
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
    limits: Option<Vec<(u64, u64)>>,
}

impl BilinearInstance {
    pub fn new(
        a: i64,
        alpha: Vec<Complex64>,
        beta: Vec<Complex64>,
    ) -> Result<Self> {
        if alpha.is_empty() || beta.is_empty() {
            return Err(Error::Domain("coefficient vectors must be nonempty".into()));
        }
        Ok(Self {
            k_max: alpha.len() as u64,
            l_max: beta.len() as u64,
            a,
            alpha,
            beta,
            limits: None,
        })
    }

    /// Attach per-k windows (M_k, L_k]; each must satisfy 0 ≤ M_k < L_k ≤ L.
    pub fn with_limits(mut self, limits: Vec<(u64, u64)>) -> Result<Self> {
        if limits.len() as u64 != self.k_max {
            return Err(Error::Domain(format!(
                "need {} windows, got {}",
                self.k_max,
                limits.len()
            )));
        }
        for (k, &(m, l)) in limits.iter().enumerate() {
            if m >= l || l > self.l_max {
                return Err(Error::Domain(format!(
                    "window ({m}, {l}] at k={} violates 0 ≤ M_k < L_k ≤ {}",
                    k + 1,
                    self.l_max
                )));
            }
        }
        self.limits = Some(limits);
        Ok(self)
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    pub fn l_max(&self) -> u64 {
        self.l_max
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn limits(&self) -> Option<&[(u64, u64)]> {
        self.limits.as_deref()
    }

    /// (A, B) = (max_k |α_k|, max_ℓ |β_ℓ|).
    pub fn coefficient_bounds(&self) -> (f64, f64) {
        let a = self.alpha.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let b = self.beta.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (a, b)
    }

    /// Coefficients must vanish off the coprime support.
    fn check_support(&self, q: u64) -> Result<()> {
        for (i, z) in self.alpha.iter().enumerate() {
            if (z.re != 0.0 || z.im != 0.0) && arith::gcd((i as u64 + 1) % q, q) != 1 {
                return Err(Error::Domain(format!(
                    "α_{} ≠ 0 but gcd({}, {q}) > 1",
                    i + 1,
                    i + 1
                )));
            }
        }
        for (i, z) in self.beta.iter().enumerate() {
            if (z.re != 0.0 || z.im != 0.0) && arith::gcd((i as u64 + 1) % q, q) != 1 {
                return Err(Error::Domain(format!(
                    "β_{} ≠ 0 but gcd({}, {q}) > 1",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// W = Σ_{k ≤ K} Σ_{ℓ ≤ L} α_k β_ℓ χ(kℓ + a).
pub fn bilinear_w(chi: &DirichletCharacter, inst: &BilinearInstance) -> Result<SumResult> {
    let q = chi.modulus();
    require_coprime_shift(inst.a, q)?;
    inst.check_support(q)?;
    let table = chi.value_table();
    let a_red = arith::reduce_i64(inst.a, q);
    let mut acc = KahanComplex::new();
    for k in 1..=inst.k_max {
        let ak = inst.alpha[(k - 1) as usize];
        if ak.re == 0.0 && ak.im == 0.0 {
            continue;
        }
        let step = k % q;
        let mut idx = (a_red + step) % q;
        let mut inner = KahanComplex::new();
        for l in 1..=inst.l_max {
            let bl = inst.beta[(l - 1) as usize];
            if bl.re != 0.0 || bl.im != 0.0 {
                inner.add(bl * table.at_raw(idx));
            }
            idx += step;
            if idx >= q {
                idx -= q;
            }
        }
        acc.add(ak * inner.value());
    }
    Ok(SumResult {
        value: acc.value(),
        terms: inst.k_max * inst.l_max,
        method: SumMethod::Direct,
    })
}

/// W with variable inner limits: Σ_k α_k Σ_{M_k < ℓ ≤ L_k} β_ℓ χ(kℓ + a).
pub fn bilinear_w_variable(chi: &DirichletCharacter, inst: &BilinearInstance) -> Result<SumResult> {
    let q = chi.modulus();
    require_coprime_shift(inst.a, q)?;
    inst.check_support(q)?;
    let limits = inst
        .limits()
        .ok_or_else(|| Error::Domain("instance has no inner windows".into()))?;
    let table = chi.value_table();
    let mut acc = KahanComplex::new();
    let mut terms = 0u64;
    for k in 1..=inst.k_max {
        let ak = inst.alpha[(k - 1) as usize];
        let (m_k, l_k) = limits[(k - 1) as usize];
        terms += l_k - m_k;
        if ak.re == 0.0 && ak.im == 0.0 {
            continue;
        }
        let mut inner = KahanComplex::new();
        for l in (m_k + 1)..=l_k {
            let bl = inst.beta[(l - 1) as usize];
            if bl.re != 0.0 || bl.im != 0.0 {
                inner.add(bl * table.at((k * l) as i64 + inst.a));
            }
        }
        acc.add(ak * inner.value());
    }
    Ok(SumResult { value: acc.value(), terms, method: SumMethod::Direct })
}

/// The bilinear bound shape A·B·(K L^{1/2} + q^{1/4} K^{1/2} L + K L q^{−1/4})
/// (sub-polynomial factors dropped).
pub fn bilinear_bound(q: u64, inst: &BilinearInstance) -> f64 {
    let (a, b) = inst.coefficient_bounds();
    let k = inst.k_max as f64;
    let l = inst.l_max as f64;
    let qf = q as f64;
    a * b * (k * l.sqrt() + qf.powf(0.25) * k.sqrt() * l + k * l / qf.powf(0.25))
}

// ===================== completion of variable limits =====================

/// One term of the exact completion: a fixed-limit instance with weight
/// 1/L, tagged by its frequency shift r ∈ (−L/2, L/2].
#[derive(Debug, Clone)]
pub struct CompletionTerm {
    pub shift: i64,
    pub weight: f64,
    pub instance: BilinearInstance,
}

/// Expand a variable-limit instance into L fixed-limit instances via the
/// finite Fourier expansion of the window indicators:
///
/// ```text
///     1_{M_k < s ≤ L_k}(s) = (1/L) Σ_{r ∈ (−L/2, L/2]} κ_k(r) e(rs/L),
///     κ_k(r) = Σ_{M_k < t ≤ L_k} e(−rt/L),
/// ```
///
/// so that W_variable = Σ_r (1/L) · W_fixed(α·κ(r), β·e(r·/L)) exactly.
pub fn complete_variable_limits(inst: &BilinearInstance) -> Result<Vec<CompletionTerm>> {
    let limits = inst
        .limits()
        .ok_or_else(|| Error::Domain("instance has no inner windows".into()))?;
    let l_max = inst.l_max;
    let lf = l_max as f64;
    let mut out = Vec::with_capacity(l_max as usize);
    let r_lo = -((l_max as i64 - 1) / 2);
    let r_hi = l_max as i64 / 2;
    for r in r_lo..=r_hi {
        let mut alpha = Vec::with_capacity(inst.k_max as usize);
        for k in 1..=inst.k_max {
            let (m_k, l_k) = limits[(k - 1) as usize];
            let mut kappa = KahanComplex::new();
            for t in (m_k + 1)..=l_k {
                kappa.add(e(-(r as f64) * t as f64 / lf));
            }
            alpha.push(inst.alpha[(k - 1) as usize] * kappa.value());
        }
        let beta: Vec<Complex64> = (1..=l_max)
            .map(|s| inst.beta[(s - 1) as usize] * e(r as f64 * s as f64 / lf))
            .collect();
        let fixed = BilinearInstance::new(inst.a, alpha, beta)?;
        out.push(CompletionTerm { shift: r, weight: 1.0 / lf, instance: fixed });
    }
    Ok(out)
}

/// Re-sum a completion expansion: Σ_r weight·W_fixed, the identity's other
/// side.
pub fn resum_completion(chi: &DirichletCharacter, terms: &[CompletionTerm]) -> Result<SumResult> {
    let mut acc = KahanComplex::new();
    let mut count = 0u64;
    for term in terms {
        let w = bilinear_w(chi, &term.instance)?;
        acc.add(term.value_scaled(w.value));
        count += w.terms;
    }
    Ok(SumResult { value: acc.value(), terms: count, method: SumMethod::Direct })
}

impl CompletionTerm {
    fn value_scaled(&self, w: Complex64) -> Complex64 {
        w * self.weight
    }

    /// max over k of |κ_k(shift)|·(|shift|+1)/L — the window-kernel decay
    /// constant; always ≤ 1 (and in particular ≤ π).
    pub fn kernel_decay_constant(&self, original: &BilinearInstance) -> f64 {
        let lf = original.l_max as f64;
        let mut worst = 0.0f64;
        for k in 1..=original.k_max as usize {
            let orig = original.alpha[k - 1];
            let scaled = self.instance.alpha[k - 1];
            let kappa = if orig.norm() == 0.0 { 0.0 } else { scaled.norm() / orig.norm() };
            worst = worst.max(kappa * (self.shift.unsigned_abs() as f64 + 1.0) / lf);
        }
        worst
    }
}
