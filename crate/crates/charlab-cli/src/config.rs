//! Sweep configuration: plain `key = value` text.
//!
//! A config file is a sequence of lines; `#` starts a comment, blank lines
//! are skipped, and every non-blank line must read `key = value` with a key
//! from the fixed vocabulary below.  Unknown or repeated keys are errors —
//! a sweep that silently ignores a typo produces the wrong grid.
//!
//! ```text
//!     target   = theorem1          # which quantity each cell evaluates
//!     q-list   = 101,103,107       # explicit moduli, or
//!     q-range  = 101..499          # inclusive range (filter: q-primes)
//!     q-primes = true
//!     n-rule   = q                 # or exp:0.85,0.9,1  or fixed:100,200
//!     chi-rule = canonical         # or all-primitive  or sample:5
//!     a-rule   = fixed:1           # or sample:3
//!     seed     = 42
//!     out      = theorem1.csv
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use charlab::arith;
use charlab::{Error, Result};

/// What each grid cell evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    /// |S_a(q; N)| against the N·q^{−1/24} + q^{5/42}N^{6/7} envelope.
    Theorem1,
    /// Linear (type-1) sums against the √q·log q + N/√q completion shape.
    Pv,
    /// Complete product sums, quadratic halves, against the gcd bound.
    BurgessR2,
    /// Complete product sums, cubic halves, against a Weil-shaped envelope
    /// (reporting only — no proven constant is attached to these rows).
    BurgessR3,
    /// Mean values of product sums over shift boxes against their bounds.
    MeanValue,
    /// Bilinear forms against the coefficient-norm envelope.
    Bilinear,
    /// The two sides of the twisted-pair transfer identity; every ratio
    /// should be 1 up to rounding.
    TransIdentity,
    /// The counting-set chain: each link's cardinality against its bound.
    AsetChain,
    /// Product-sum slices over modulus partitions against the slice bound.
    Cset,
}

impl Target {
    pub const ALL: [Target; 9] = [
        Target::Theorem1,
        Target::Pv,
        Target::BurgessR2,
        Target::BurgessR3,
        Target::MeanValue,
        Target::Bilinear,
        Target::TransIdentity,
        Target::AsetChain,
        Target::Cset,
    ];

    /// The name used in configs, CSV rows, and the lock store.
    pub fn name(self) -> &'static str {
        match self {
            Target::Theorem1 => "theorem1",
            Target::Pv => "pv",
            Target::BurgessR2 => "burgess-r2",
            Target::BurgessR3 => "burgess-r3",
            Target::MeanValue => "meanvalue",
            Target::Bilinear => "bilinear",
            Target::TransIdentity => "trans-identity",
            Target::AsetChain => "aset-chain",
            Target::Cset => "cset",
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Target::ALL.iter().map(|t| t.name()).collect();
                Error::Domain(format!("unknown target `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// How N is derived from each modulus q.
#[derive(Debug, Clone, PartialEq)]
pub enum NRule {
    /// N = q.
    EqualsQ,
    /// N = ⌈q^e⌉ for each listed exponent e.
    Exponents(Vec<f64>),
    /// Fixed N values, independent of q.
    Fixed(Vec<u64>),
}

impl NRule {
    /// The N values this rule produces for modulus q, in rule order.
    pub fn resolve(&self, q: u64) -> Vec<u64> {
        match self {
            NRule::EqualsQ => vec![q],
            NRule::Exponents(es) => es
                .iter()
                .map(|&e| ((q as f64).powf(e).ceil() as u64).max(1))
                .collect(),
            NRule::Fixed(ns) => ns.clone(),
        }
    }
}

impl FromStr for NRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "q" {
            return Ok(NRule::EqualsQ);
        }
        if let Some(rest) = s.strip_prefix("exp:") {
            let es = parse_f64_list(rest)?;
            if es.is_empty() || es.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
                return Err(Error::Domain(format!(
                    "n-rule exponents must be a nonempty list in [0, 1], got `{rest}`"
                )));
            }
            return Ok(NRule::Exponents(es));
        }
        if let Some(rest) = s.strip_prefix("fixed:") {
            let ns = parse_u64_list(rest)?;
            if ns.is_empty() || ns.contains(&0) {
                return Err(Error::Domain(format!("n-rule fixed values must be positive, got `{rest}`")));
            }
            return Ok(NRule::Fixed(ns));
        }
        Err(Error::Domain(format!("unknown n-rule `{s}` (expected q, exp:..., or fixed:...)")))
    }
}

/// Which characters mod q enter the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacterRule {
    /// The first primitive character in label order (one cell per q).
    Canonical,
    /// Every primitive character mod q.
    AllPrimitive,
    /// k primitive characters sampled without replacement from the master
    /// seed (all of them when fewer than k exist).
    Sample(u64),
}

impl FromStr for CharacterRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(CharacterRule::Canonical),
            "all-primitive" => Ok(CharacterRule::AllPrimitive),
            _ => match s.strip_prefix("sample:") {
                Some(k) => {
                    let k: u64 = k
                        .parse()
                        .map_err(|_| Error::Domain(format!("bad sample count in chi-rule `{s}`")))?;
                    if k == 0 {
                        return Err(Error::Domain("chi-rule sample count must be positive".into()));
                    }
                    Ok(CharacterRule::Sample(k))
                }
                None => Err(Error::Domain(format!(
                    "unknown chi-rule `{s}` (expected canonical, all-primitive, or sample:k)"
                ))),
            },
        }
    }
}

/// Which shifts a enter the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ARule {
    /// One fixed shift for every cell.
    Fixed(i64),
    /// k shifts coprime to q drawn from the master seed.
    Sample(u64),
}

impl FromStr for ARule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(a) = s.strip_prefix("fixed:") {
            let a: i64 = a
                .parse()
                .map_err(|_| Error::Domain(format!("bad shift in a-rule `{s}`")))?;
            return Ok(ARule::Fixed(a));
        }
        if let Some(k) = s.strip_prefix("sample:") {
            let k: u64 = k
                .parse()
                .map_err(|_| Error::Domain(format!("bad sample count in a-rule `{s}`")))?;
            if k == 0 {
                return Err(Error::Domain("a-rule sample count must be positive".into()));
            }
            return Ok(ARule::Sample(k));
        }
        Err(Error::Domain(format!("unknown a-rule `{s}` (expected fixed:a or sample:k)")))
    }
}

/// Report file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Domain(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

/// A fully parsed sweep description.  Fields not used by the chosen target
/// keep their defaults and are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub target: Target,
    /// Moduli, in grid order.  Empty is allowed and yields an empty report.
    pub q_values: Vec<u64>,
    pub n_rule: NRule,
    pub chi_rule: CharacterRule,
    pub a_rule: ARule,
    pub d_values: Vec<u64>,
    pub v_values: Vec<u64>,
    /// Tuple half-length for product-sum targets (2 or 3).
    pub r: usize,
    /// Scan moduli for the aset-chain target.
    pub s_values: Vec<u64>,
    /// Fixed shift tuple `d:v1,...,v2r` for the cset target.
    pub tuple: Option<(u64, Vec<u64>)>,
    /// Random draws per cell family (tuples, instances, triples).
    pub samples: u64,
    pub seed: u64,
    /// Per-operation work budget; `None` defers to the CHARLAB_BUDGET
    /// environment variable and the built-in default.
    pub budget: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl SweepConfig {
    /// A config with the given target and every other field at its default.
    pub fn new(target: Target) -> Self {
        SweepConfig {
            target,
            q_values: Vec::new(),
            n_rule: NRule::EqualsQ,
            chi_rule: CharacterRule::Canonical,
            a_rule: ARule::Fixed(1),
            d_values: vec![1],
            v_values: vec![2, 3, 4],
            r: 2,
            s_values: vec![3, 4, 9, 12],
            tuple: None,
            samples: 20,
            seed: 0,
            budget: None,
            out: None,
            format: OutputFormat::Csv,
        }
    }

    /// Parse a config from text.  `target` is the only required key.
    pub fn parse(text: &str) -> Result<Self> {
        let mut target: Option<Target> = None;
        let mut pairs: Vec<(String, String, usize)> = Vec::new();
        let mut seen: Vec<String> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Domain(format!("line {}: expected `key = value`, got `{line}`", idx + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if seen.contains(&key) {
                return Err(Error::Domain(format!("line {}: repeated key `{key}`", idx + 1)));
            }
            seen.push(key.clone());
            if key == "target" {
                target = Some(value.parse()?);
            } else {
                pairs.push((key, value, idx + 1));
            }
        }

        let target = target.ok_or_else(|| Error::Domain("config is missing the `target` key".into()))?;
        let mut cfg = SweepConfig::new(target);

        let mut q_list: Option<Vec<u64>> = None;
        let mut q_range: Option<(u64, u64)> = None;
        let mut q_primes = false;

        for (key, value, line) in pairs {
            let fail = |msg: String| Error::Domain(format!("line {line}: {msg}"));
            match key.as_str() {
                "q-list" => q_list = Some(parse_u64_list(&value).map_err(|e| fail(e.to_string()))?),
                "q-range" => {
                    let (lo, hi) = value
                        .split_once("..")
                        .ok_or_else(|| fail(format!("q-range must read `lo..hi`, got `{value}`")))?;
                    let lo: u64 = lo.trim().parse().map_err(|_| fail(format!("bad q-range start `{lo}`")))?;
                    let hi: u64 = hi.trim().parse().map_err(|_| fail(format!("bad q-range end `{hi}`")))?;
                    if lo > hi {
                        return Err(fail(format!("empty q-range {lo}..{hi}")));
                    }
                    q_range = Some((lo, hi));
                }
                "q-primes" => q_primes = parse_bool(&value).map_err(|e| fail(e.to_string()))?,
                "n-rule" => cfg.n_rule = value.parse().map_err(|e: Error| fail(e.to_string()))?,
                "chi-rule" => cfg.chi_rule = value.parse().map_err(|e: Error| fail(e.to_string()))?,
                "a-rule" => cfg.a_rule = value.parse().map_err(|e: Error| fail(e.to_string()))?,
                "d-list" => cfg.d_values = parse_u64_list(&value).map_err(|e| fail(e.to_string()))?,
                "v-list" => cfg.v_values = parse_u64_list(&value).map_err(|e| fail(e.to_string()))?,
                "r" => {
                    cfg.r = value.parse().map_err(|_| fail(format!("bad r `{value}`")))?;
                    if cfg.r != 2 && cfg.r != 3 {
                        return Err(fail(format!("r must be 2 or 3, got {}", cfg.r)));
                    }
                }
                "s-list" => cfg.s_values = parse_u64_list(&value).map_err(|e| fail(e.to_string()))?,
                "tuple" => {
                    let (d, vs) = value
                        .split_once(':')
                        .ok_or_else(|| fail(format!("tuple must read `d:v1,...`, got `{value}`")))?;
                    let d: u64 = d.trim().parse().map_err(|_| fail(format!("bad tuple spacing `{d}`")))?;
                    let vs = parse_u64_list(vs).map_err(|e| fail(e.to_string()))?;
                    cfg.tuple = Some((d, vs));
                }
                "samples" => {
                    cfg.samples = value.parse().map_err(|_| fail(format!("bad samples `{value}`")))?;
                    if cfg.samples == 0 {
                        return Err(fail("samples must be positive".into()));
                    }
                }
                "seed" => cfg.seed = value.parse().map_err(|_| fail(format!("bad seed `{value}`")))?,
                "budget" => {
                    cfg.budget = Some(value.parse().map_err(|_| fail(format!("bad budget `{value}`")))?)
                }
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = value.parse().map_err(|e: Error| fail(e.to_string()))?,
                other => return Err(fail(format!("unknown key `{other}`"))),
            }
        }

        if q_list.is_some() && q_range.is_some() {
            return Err(Error::Domain("give q-list or q-range, not both".into()));
        }
        cfg.q_values = match (q_list, q_range) {
            (Some(list), _) => list,
            (None, Some((lo, hi))) => (lo..=hi).collect(),
            (None, None) => Vec::new(),
        };
        if q_primes {
            cfg.q_values.retain(|&q| arith::is_prime(q));
        }
        if cfg.q_values.iter().any(|&q| q == 0) {
            return Err(Error::Domain("moduli must be positive".into()));
        }
        if cfg.d_values.is_empty() || cfg.d_values.contains(&0) {
            return Err(Error::Domain("d-list must be a nonempty list of positive integers".into()));
        }
        if cfg.v_values.is_empty() || cfg.v_values.contains(&0) {
            return Err(Error::Domain("v-list must be a nonempty list of positive integers".into()));
        }
        if cfg.s_values.is_empty() || cfg.s_values.contains(&0) {
            return Err(Error::Domain("s-list must be a nonempty list of positive integers".into()));
        }
        Ok(cfg)
    }

    /// Parse a config file from disk.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        SweepConfig::parse(&text)
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Domain(format!("expected true or false, got `{s}`"))),
    }
}

/// `1,2,3` or `2..12` (inclusive) or the empty string (empty list).
fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| Error::Domain(format!("bad range start `{lo}`")))?;
        let hi: u64 = hi.trim().parse().map_err(|_| Error::Domain(format!("bad range end `{hi}`")))?;
        if lo > hi {
            return Err(Error::Domain(format!("empty range {lo}..{hi}")));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::Domain(format!("bad integer `{}` in list", p.trim())))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("bad number `{}` in list", p.trim())))
        })
        .collect()
}
