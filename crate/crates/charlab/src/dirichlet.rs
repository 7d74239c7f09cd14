//! Dirichlet characters mod arbitrary q with exact values.
//!
//! A character χ mod q = Π p^α is stored as its exponent vector against the
//! canonical generators of each unit group (ℤ/p^α ℤ)^×, so
//!
//! ```text
//!     χ(n) = e( Σ_j  t_j · e_j(n) / m_j ),      e(x) = exp(2πi x),
//! ```
//!
//! where e_j(n) are the discrete logs of n in the j-th generator and m_j the
//! generator orders.  Values are exact roots of unity ([`UnitRoot`]), only
//! converted to floating point at the edge of a sum.  Conductors are
//! computed per prime-power component from the exponent vector alone.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{self, FactoredModulus, UnitGroup};
use crate::{e, Error, KahanComplex, Result};

// ============================ exact values ============================

/// e^{2πi·num/den} with 0 ≤ num < den and gcd(num, den) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitRoot {
    num: u64,
    den: u64,
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl UnitRoot {
    /// The root e^{2πi·num/den}; den ≥ 1.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        Self::reduce(num as u128 % den as u128, den as u128)
    }

    fn reduce(num: u128, den: u128) -> Self {
        let num = num % den;
        if num == 0 {
            return Self { num: 0, den: 1 };
        }
        let g = gcd_u128(num, den);
        Self { num: (num / g) as u64, den: (den / g) as u64 }
    }

    pub fn one() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// Fraction num/den of a full turn, reduced.
    pub fn fraction(&self) -> (u64, u64) {
        (self.num, self.den)
    }

    /// Multiplicative order: the reduced denominator.
    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn mul(&self, other: &UnitRoot) -> UnitRoot {
        let d1 = self.den as u128;
        let d2 = other.den as u128;
        let num = self.num as u128 * d2 + other.num as u128 * d1;
        Self::reduce(num, d1 * d2)
    }

    pub fn pow(&self, k: u64) -> UnitRoot {
        Self::reduce(self.num as u128 * k as u128 % self.den as u128, self.den as u128)
    }

    pub fn conj(&self) -> UnitRoot {
        Self { num: if self.num == 0 { 0 } else { self.den - self.num }, den: self.den }
    }

    /// Bit-exact under conjugation: the roots k/n and (n−k)/n evaluate to
    /// exact floating-point conjugates (the upper half-turn is computed as
    /// the conjugate of the lower, and ±1 are exact), so conjugating a
    /// character conjugates every complex value it takes, bit for bit.
    pub fn to_complex(&self) -> Complex64 {
        if self.num == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if 2 * self.num == self.den {
            return Complex64::new(-1.0, 0.0);
        }
        if 2 * self.num > self.den {
            e((self.den - self.num) as f64 / self.den as f64).conj()
        } else {
            e(self.num as f64 / self.den as f64)
        }
    }
}

/// Value of a character: 0 on non-units, a root of unity on units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharValue {
    Zero,
    Root(UnitRoot),
}

impl CharValue {
    pub fn is_zero(&self) -> bool {
        matches!(self, CharValue::Zero)
    }

    pub fn mul(&self, other: &CharValue) -> CharValue {
        match (self, other) {
            (CharValue::Root(a), CharValue::Root(b)) => CharValue::Root(a.mul(b)),
            _ => CharValue::Zero,
        }
    }

    pub fn conj(&self) -> CharValue {
        match self {
            CharValue::Zero => CharValue::Zero,
            CharValue::Root(r) => CharValue::Root(r.conj()),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            CharValue::Zero => Complex64::new(0.0, 0.0),
            CharValue::Root(r) => r.to_complex(),
        }
    }
}

// ========================== the character group ==========================

#[derive(Debug)]
struct GroupData {
    modulus: FactoredModulus,
    units: Vec<UnitGroup>,
    /// Orders of the flattened generator list, factor by factor.
    gen_orders: Vec<u64>,
    /// (start, len) of each factor's generator block in the flat list.
    spans: Vec<(usize, usize)>,
}

/// The group of Dirichlet characters mod q.  Cheap to clone (shared state);
/// characters hold a reference to it, so evaluation reuses the discrete-log
/// tables across every character of the same modulus.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    data: Arc<GroupData>,
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        let modulus = FactoredModulus::new(q)?;
        let mut units = Vec::with_capacity(modulus.factors().len());
        let mut gen_orders = Vec::new();
        let mut spans = Vec::new();
        for &(p, a) in modulus.factors() {
            let u = UnitGroup::new(p.pow(a))?;
            let start = gen_orders.len();
            gen_orders.extend(u.generators().iter().map(|&(_, ord)| ord));
            spans.push((start, gen_orders.len() - start));
            units.push(u);
        }
        Ok(Self { data: Arc::new(GroupData { modulus, units, gen_orders, spans }) })
    }

    pub fn q(&self) -> u64 {
        self.data.modulus.q()
    }

    pub fn modulus(&self) -> &FactoredModulus {
        &self.data.modulus
    }

    /// Orders of the flattened generator list.
    pub fn generator_orders(&self) -> &[u64] {
        &self.data.gen_orders
    }

    /// The character with the given exponent vector (one entry per
    /// generator, reduced mod the generator order).
    pub fn character(&self, exps: &[u64]) -> Result<DirichletCharacter> {
        if exps.len() != self.data.gen_orders.len() {
            return Err(Error::Domain(format!(
                "modulus {} needs {} exponents, got {}",
                self.q(),
                self.data.gen_orders.len(),
                exps.len()
            )));
        }
        let exps: Vec<u64> =
            exps.iter().zip(&self.data.gen_orders).map(|(&t, &m)| t % m).collect();
        let order = exps
            .iter()
            .zip(&self.data.gen_orders)
            .map(|(&t, &m)| m / arith::gcd(t, m))
            .fold(1u64, lcm);
        Ok(DirichletCharacter { data: self.data.clone(), exps, order })
    }

    pub fn principal(&self) -> DirichletCharacter {
        self.character(&vec![0; self.data.gen_orders.len()]).expect("length matches")
    }

    /// All φ(q) characters in label order (exponent tuples counted
    /// odometer-style, last coordinate fastest).
    pub fn characters(&self) -> Vec<DirichletCharacter> {
        let orders = &self.data.gen_orders;
        let mut out = Vec::with_capacity(self.data.modulus.phi() as usize);
        let mut exps = vec![0u64; orders.len()];
        loop {
            out.push(self.character(&exps).expect("length matches"));
            let mut i = orders.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                exps[i] += 1;
                if exps[i] < orders[i] {
                    break;
                }
                exps[i] = 0;
            }
        }
    }

    /// The primitive characters, in label order.
    pub fn primitive_characters(&self) -> Vec<DirichletCharacter> {
        self.characters().into_iter().filter(|c| c.is_primitive()).collect()
    }

    /// First primitive character in label order, if any exists.
    pub fn canonical_primitive(&self) -> Option<DirichletCharacter> {
        self.characters().into_iter().find(|c| c.is_primitive())
    }

    /// Number of primitive characters mod q, from the local counts
    /// φ(p^α) − φ(p^{α−1}) — no enumeration.
    pub fn primitive_count(&self) -> u64 {
        self.data
            .modulus
            .factors()
            .iter()
            .map(|&(p, a)| {
                let hi = p.pow(a - 1) * (p - 1);
                let lo = if a >= 2 { p.pow(a.saturating_sub(2)) * (p - 1) } else { 1 };
                hi.saturating_sub(lo)
            })
            .product()
    }

    /// Parse a label "q:t1,t2,...,tk" (one exponent per generator).
    pub fn from_label(label: &str) -> Result<DirichletCharacter> {
        let (q_str, exp_str) = label
            .split_once(':')
            .ok_or_else(|| Error::Domain(format!("bad character label {label:?}")))?;
        let q: u64 = q_str
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad modulus in label {label:?}")))?;
        let group = CharacterGroup::new(q)?;
        let exps: Vec<u64> = if exp_str.trim().is_empty() {
            vec![]
        } else {
            exp_str
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::Domain(format!("bad exponent in label {label:?}")))
                })
                .collect::<Result<_>>()?
        };
        group.character(&exps)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / arith::gcd(a, b) * b
}

/// Enumerate characters mod q, optionally only primitive ones.
pub fn enumerate_characters(q: u64, primitive_only: bool) -> Result<Vec<DirichletCharacter>> {
    let group = CharacterGroup::new(q)?;
    Ok(if primitive_only { group.primitive_characters() } else { group.characters() })
}

// ============================= characters =============================

/// A Dirichlet character mod q, exactly represented.  Clones share the
/// underlying group tables and are `Send + Sync`.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    data: Arc<GroupData>,
    exps: Vec<u64>,
    order: u64,
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.data.modulus.q()
    }

    pub fn modulus_factored(&self) -> &FactoredModulus {
        &self.data.modulus
    }

    pub fn group(&self) -> CharacterGroup {
        CharacterGroup { data: self.data.clone() }
    }

    /// Exponent against each generator, in factor order.
    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    /// Multiplicative order of χ in the character group.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&t| t == 0)
    }

    /// Label "q:t1,...,tk".
    pub fn label(&self) -> String {
        let exps: Vec<String> = self.exps.iter().map(|t| t.to_string()).collect();
        format!("{}:{}", self.modulus(), exps.join(","))
    }

    /// χ̄, the complex-conjugate character.
    pub fn conjugate(&self) -> DirichletCharacter {
        let exps: Vec<u64> = self
            .exps
            .iter()
            .zip(&self.data.gen_orders)
            .map(|(&t, &m)| if t == 0 { 0 } else { m - t })
            .collect();
        DirichletCharacter { data: self.data.clone(), exps, order: self.order }
    }

    /// The conductor: the smallest f | q such that χ is trivial on every
    /// unit ≡ 1 (mod f).  Computed factor by factor from the exponents.
    pub fn conductor(&self) -> u64 {
        let mut cond = 1u64;
        for (i, u) in self.data.units.iter().enumerate() {
            let (start, len) = self.data.spans[i];
            let t = &self.exps[start..start + len];
            cond *= local_conductor(u, t);
        }
        cond
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }

    /// The component characters mod each prime-power factor; their product
    /// under the CRT is χ.
    pub fn components(&self) -> Vec<DirichletCharacter> {
        self.data
            .units
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let (start, len) = self.data.spans[i];
                let group = CharacterGroup::new(u.modulus()).expect("prime power");
                group.character(&self.exps[start..start + len]).expect("length matches")
            })
            .collect()
    }

    /// χ(n), exact.  n is reduced mod q; non-units map to zero.
    pub fn eval(&self, n: i64) -> CharValue {
        let q = self.modulus();
        let r = arith::reduce_i64(n, q);
        if q == 1 {
            return CharValue::Root(UnitRoot::one());
        }
        if arith::gcd(r, q) != 1 {
            return CharValue::Zero;
        }
        let mut acc = UnitRoot::one();
        for (i, u) in self.data.units.iter().enumerate() {
            let (start, len) = self.data.spans[i];
            if len == 0 {
                continue;
            }
            let x = r % u.modulus();
            let es = u.dlog_vector(x).expect("x is a unit");
            for (j, &ej) in es.iter().enumerate() {
                let m = self.data.gen_orders[start + j];
                let t = self.exps[start + j];
                let num = (t as u128 * ej as u128 % m as u128) as u64;
                acc = acc.mul(&UnitRoot::new(num, m));
            }
        }
        CharValue::Root(acc)
    }

    pub fn eval_complex(&self, n: i64) -> Complex64 {
        self.eval(n).to_complex()
    }

    /// Dense table of χ(0), χ(1), ..., χ(q−1) as complex values.
    pub fn value_table(&self) -> CharTable {
        let q = self.modulus();
        let values = (0..q).map(|n| self.eval_complex(n as i64)).collect();
        CharTable { q, primitive: self.is_primitive(), values }
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Local conductor of the component with exponents t against the generators
/// of (ℤ/p^α ℤ)^×.
fn local_conductor(u: &UnitGroup, t: &[u64]) -> u64 {
    let p = u.p();
    let alpha = u.alpha();
    if t.iter().all(|&x| x == 0) {
        return 1;
    }
    if p != 2 {
        // Cyclic case: χ is trivial on the index-p^{α−β} subgroup iff
        // p^{α−β} | t, so the conductor is p^{α − min(v_p(t), α−1)}.
        let mut v = 0u32;
        let mut x = t[0];
        while v < alpha - 1 && x % p == 0 {
            x /= p;
            v += 1;
        }
        return p.pow(alpha - v);
    }
    match alpha {
        1 => 1,
        2 => 4,
        _ => {
            // Units ≡ 1 (mod 4) are ⟨−3⟩; χ(−3) = e(t₁/2 + t₂/2^{α−2}).
            let half = 1u64 << (alpha - 2);
            let trivial_on_u2 = (t[1] + t[0] * (half >> 1)) % half == 0;
            if trivial_on_u2 {
                return 4;
            }
            // Units ≡ 1 (mod 2^β), β ≥ 3, are ⟨3^{2^{β−2}}⟩.
            let mut v = 0u32;
            let mut x = t[1];
            while v < alpha - 3 && x % 2 == 0 {
                x /= 2;
                v += 1;
            }
            2u64.pow(alpha - v)
        }
    }
}

// ============================ value tables ============================

/// Precomputed χ values on a full period, for the inner loops of complete
/// sums.
#[derive(Debug, Clone)]
pub struct CharTable {
    q: u64,
    primitive: bool,
    values: Vec<Complex64>,
}

impl CharTable {
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Whether the character this table came from is primitive.
    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// χ(x) for 0 ≤ x < q.
    #[inline]
    pub fn at_raw(&self, x: u64) -> Complex64 {
        self.values[x as usize]
    }

    /// χ(x) for arbitrary integer x.
    #[inline]
    pub fn at(&self, x: i64) -> Complex64 {
        self.values[arith::reduce_i64(x, self.q) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

// ============================= Gauss sums =============================

/// τ(χ) = Σ_{n mod q} χ(n) e(n/q).
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    twisted_gauss_sum(chi, 1)
}

/// Σ_{n mod q} χ(n) e(a·n/q).  For primitive χ this equals χ̄(a)·τ(χ).
pub fn twisted_gauss_sum(chi: &DirichletCharacter, a: i64) -> Complex64 {
    let q = chi.modulus();
    let a_red = arith::reduce_i64(a, q);
    let mut acc = KahanComplex::new();
    for n in 1..=q {
        let v = chi.eval(n as i64);
        if v.is_zero() {
            continue;
        }
        let phase = (a_red as u128 * n as u128 % q as u128) as u64;
        acc.add(v.to_complex() * e(phase as f64 / q as f64));
    }
    acc.value()
}
