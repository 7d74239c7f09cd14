//! Deterministic grid sweeps.
//!
//! A sweep expands its config into an ordered list of cells, evaluates the
//! cells in parallel, and reports one CSV row per result in the original
//! grid order — identical config and seed give byte-identical output no
//! matter how the work was scheduled.  Cells that would blow the work
//! budget are listed in the summary and the rest of the grid still runs.
//!
//! Every row records the parameters needed to recompute it standalone:
//! the cell's modulus, character label, shift, ranges, and the seed that
//! drove any random draws inside the cell.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use charlab::arith::{self, ArithTables};
use charlab::burgess::{self, CsetPartition};
use charlab::charsums::{self, BilinearInstance, MeanValue, MeanValuePolicy, ShiftTuple};
use charlab::dirichlet::{CharacterGroup, DirichletCharacter};
use charlab::vaughan;
use charlab::{e, Error, Result};

use crate::config::{ARule, CharacterRule, OutputFormat, SweepConfig, Target};
use crate::fit::{fit_exponent, ExponentFit};

/// The fixed report schema; downstream diffing depends on this exact header.
pub const CSV_HEADER: &str = "target,q,chi_label,a,N,d,V,r,lhs,rhs,ratio,seed,notes";

/// One grid cell's result.  Columns that a target does not use are zero
/// (`chi_label` is `-` where no character is involved).
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub target: &'static str,
    pub q: u64,
    pub chi_label: String,
    pub a: i64,
    #[serde(rename = "N")]
    pub n: u64,
    pub d: u64,
    #[serde(rename = "V")]
    pub v: u64,
    pub r: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub seed: u64,
    pub notes: String,
}

/// Largest ratio in a sweep and the row that produced it.
#[derive(Debug, Clone, Copy)]
pub struct MaxRatio {
    pub ratio: f64,
    pub row: usize,
}

/// A named log-log fit from the summary.
#[derive(Debug, Clone)]
pub struct NamedFit {
    pub name: &'static str,
    pub fit: ExponentFit,
}

/// What a sweep reports beyond its rows.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub cells: usize,
    pub max_ratio: Option<MaxRatio>,
    pub fits: Vec<NamedFit>,
    /// Cells skipped for exceeding the work budget, with their reasons.
    pub violations: Vec<String>,
}

/// Rows in grid order plus the summary.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

// ============================ cell enumeration ============================

#[derive(Debug, Clone)]
enum CellKind {
    Theorem1 { chi: String, a: i64, n: u64 },
    Pv { chi: String, a: i64, n: u64 },
    ProductSample { chi: String, d: u64, v_cap: u64, r: usize },
    MeanValue { chi: String, d: u64, v_cap: u64 },
    Bilinear { chi: String },
    TransIdentity { chi: String },
    AsetChain { s_prime: u64, d: u64, v_cap: u64 },
    Cset { chi: String, parts: [u64; 4], levels: [u64; 3] },
}

#[derive(Debug, Clone)]
struct Cell {
    q: u64,
    seed: u64,
    kind: CellKind,
}

/// SplitMix64 finalizer: spreads cell ordinals into independent seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn cell_seed(master: u64, ordinal: u64) -> u64 {
    splitmix64(master ^ ordinal.wrapping_mul(0xD1B54A32D192ED03))
}

/// The characters a grid uses for modulus q, as labels in enumeration
/// order.  Targets that need primitive characters get an empty list (and
/// hence no cells) when q has none; `fallback_nonprincipal` lets the cset
/// target fall back to the first non-principal character instead.
fn grid_characters(
    q: u64,
    rule: CharacterRule,
    rng: &mut ChaCha8Rng,
    fallback_nonprincipal: bool,
) -> Result<Vec<String>> {
    let group = CharacterGroup::new(q)?;
    let prims = group.primitive_characters();
    let mut labels: Vec<String> = match rule {
        CharacterRule::Canonical => prims.first().map(DirichletCharacter::label).into_iter().collect(),
        CharacterRule::AllPrimitive => prims.iter().map(DirichletCharacter::label).collect(),
        CharacterRule::Sample(k) => {
            if prims.len() as u64 <= k {
                prims.iter().map(DirichletCharacter::label).collect()
            } else {
                let idx: Vec<usize> = (0..prims.len()).collect();
                let mut picked: Vec<usize> =
                    idx.choose_multiple(rng, k as usize).copied().collect();
                picked.sort_unstable();
                picked.into_iter().map(|i| prims[i].label()).collect()
            }
        }
    };
    if labels.is_empty() && fallback_nonprincipal {
        if let Some(c) = group.characters().into_iter().find(|c| !c.is_principal()) {
            labels.push(c.label());
        }
    }
    Ok(labels)
}

/// The shifts a grid uses for modulus q.
fn grid_shifts(q: u64, rule: ARule, rng: &mut ChaCha8Rng) -> Vec<i64> {
    match rule {
        ARule::Fixed(a) => vec![a],
        ARule::Sample(k) => {
            if q <= 2 {
                return vec![1];
            }
            let mut out = Vec::with_capacity(k as usize);
            let mut guard = 0u32;
            while (out.len() as u64) < k && guard < 100_000 {
                guard += 1;
                let a = rng.gen_range(1..q);
                if arith::gcd(a, q) == 1 {
                    out.push(a as i64);
                }
            }
            if out.is_empty() {
                out.push(1);
            }
            out
        }
    }
}

fn sorted_divisors(s: u64) -> Result<Vec<u64>> {
    let mut ds = arith::factorize(s)?.divisors();
    ds.sort_unstable();
    Ok(ds)
}

fn build_cells(cfg: &SweepConfig, rng: &mut ChaCha8Rng) -> Result<Vec<(u64, CellKind)>> {
    let mut cells: Vec<(u64, CellKind)> = Vec::new();
    match cfg.target {
        Target::Theorem1 | Target::Pv => {
            for &q in &cfg.q_values {
                let labels = grid_characters(q, cfg.chi_rule, rng, false)?;
                let shifts = grid_shifts(q, cfg.a_rule, rng);
                for chi in &labels {
                    for &a in &shifts {
                        for n in cfg.n_rule.resolve(q) {
                            let kind = if cfg.target == Target::Theorem1 {
                                CellKind::Theorem1 { chi: chi.clone(), a, n }
                            } else {
                                CellKind::Pv { chi: chi.clone(), a, n }
                            };
                            cells.push((q, kind));
                        }
                    }
                }
            }
        }
        Target::BurgessR2 | Target::BurgessR3 => {
            let r = if cfg.target == Target::BurgessR2 { 2 } else { 3 };
            for &q in &cfg.q_values {
                for chi in grid_characters(q, cfg.chi_rule, rng, false)? {
                    for &d in &cfg.d_values {
                        for &v_cap in &cfg.v_values {
                            cells.push((q, CellKind::ProductSample { chi: chi.clone(), d, v_cap, r }));
                        }
                    }
                }
            }
        }
        Target::MeanValue => {
            for &q in &cfg.q_values {
                for chi in grid_characters(q, cfg.chi_rule, rng, false)? {
                    for &d in &cfg.d_values {
                        for &v_cap in &cfg.v_values {
                            cells.push((q, CellKind::MeanValue { chi: chi.clone(), d, v_cap }));
                        }
                    }
                }
            }
        }
        Target::Bilinear | Target::TransIdentity => {
            for &q in &cfg.q_values {
                for chi in grid_characters(q, cfg.chi_rule, rng, false)? {
                    let kind = if cfg.target == Target::Bilinear {
                        CellKind::Bilinear { chi }
                    } else {
                        CellKind::TransIdentity { chi }
                    };
                    cells.push((q, kind));
                }
            }
        }
        Target::AsetChain => {
            for &s in &cfg.s_values {
                for s_prime in sorted_divisors(s)? {
                    for &d in &cfg.d_values {
                        for &v_cap in &cfg.v_values {
                            cells.push((s, CellKind::AsetChain { s_prime, d, v_cap }));
                        }
                    }
                }
            }
        }
        Target::Cset => {
            let (d, vs) = cfg.tuple.clone().unwrap_or((1, vec![1, 2, 3, 1, 2, 4]));
            ShiftTuple::new(d, vs.clone())?; // validate the tuple once, up front
            for &q in &cfg.q_values {
                let m = arith::factorize(q)?;
                let partitions = burgess::squarefree_partitions(&m)?;
                for chi in grid_characters(q, cfg.chi_rule, rng, true)? {
                    for p in &partitions {
                        cells.push((
                            q,
                            CellKind::Cset { chi: chi.clone(), parts: p.parts, levels: p.levels },
                        ));
                    }
                }
            }
        }
    }
    Ok(cells)
}

// ============================ cell evaluation ============================

struct Ctx<'a> {
    cfg: &'a SweepConfig,
    budget: u64,
    tables: Option<ArithTables>,
}

enum CellOutput {
    Rows(Vec<Row>),
    /// Budget violation: the cell is reported and skipped, the sweep goes on.
    Skipped(String),
}

fn join_dots(vs: &[u64]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(".")
}

/// Sample a shift tuple admissible for the target's bound: at least three
/// distinct entries for r = 2 (the gcd bound's precondition), distinct
/// halves for r = 3 (a nonzero difference polynomial).
fn sample_tuple(rng: &mut ChaCha8Rng, d: u64, v_cap: u64, r: usize) -> Option<ShiftTuple> {
    if r == 2 && v_cap < 3 {
        return None;
    }
    for _ in 0..1000 {
        let vs: Vec<u64> = (0..2 * r).map(|_| rng.gen_range(1..=v_cap)).collect();
        let admissible = if r == 2 {
            let mut distinct = vs.clone();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.len() >= 3
        } else {
            let (mut lo, mut hi) = (vs[..r].to_vec(), vs[r..].to_vec());
            lo.sort_unstable();
            hi.sort_unstable();
            lo != hi
        };
        if admissible {
            return ShiftTuple::new(d, vs).ok();
        }
    }
    None
}

/// A Weil-shaped envelope for cubic-half product sums, used for reporting
/// only: deg(F)^ω(q) · √q · max over nonzero coefficients A of (A, q).
/// No proven constant is attached to these rows; the ratio column simply
/// records how the data sits against the shape.
fn weil_shape_bound(m: &charlab::arith::FactoredModulus, t: &ShiftTuple) -> Result<f64> {
    let f = burgess::f_polynomial(t)?;
    let q = m.q();
    let mut best: Option<u64> = None;
    for &c in f.coeffs() {
        if c != 0 {
            let g = arith::gcd_i128(c, q);
            best = Some(best.map_or(g, |b| b.max(g)));
        }
    }
    let g = best.ok_or_else(|| Error::Domain("difference polynomial vanishes".into()))?;
    Ok(4f64.powi(m.omega() as i32) * (q as f64).sqrt() * g as f64)
}

fn gcd_pow3(d: u64, s: u64) -> u64 {
    let dm = d % s;
    let d3 = arith::mul_mod(arith::mul_mod(dm, dm, s), dm, s);
    arith::gcd(d3, s)
}

/// A random unit-modulus coefficient on the coprime support, zero off it
/// (bilinear forms require coefficients to vanish at indices sharing a
/// factor with q).
fn unit_coefficient(rng: &mut ChaCha8Rng, index: u64, q: u64) -> Complex64 {
    if arith::gcd(index % q, q) == 1 {
        e(rng.gen::<f64>())
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn run_cell(q: u64, seed: u64, kind: &CellKind, ctx: &Ctx) -> Result<CellOutput> {
    let row = |chi_label: String, a: i64, n: u64, d: u64, v: u64, r: u32, lhs: f64, rhs: f64, ratio: f64, notes: String| Row {
        target: ctx.cfg.target.name(),
        q,
        chi_label,
        a,
        n,
        d,
        v,
        r,
        lhs,
        rhs,
        ratio,
        seed,
        notes,
    };

    let out = match kind {
        CellKind::Theorem1 { chi, a, n } => {
            let chi = CharacterGroup::from_label(chi)?;
            let tables = ctx.tables.as_ref().expect("tables are built for this target");
            match vaughan::bound_ratio(&chi, *a, *n, tables) {
                Ok(rep) => {
                    let notes = match rep.window {
                        Some((u, v)) => format!("U={u:.4};V={v:.4}"),
                        None => "fallback".to_string(),
                    };
                    CellOutput::Rows(vec![row(
                        rep.chi_label, rep.a, rep.n, 0, 0, 0, rep.lhs, rep.rhs, rep.ratio, notes,
                    )])
                }
                Err(Error::Resource { what, .. }) => CellOutput::Skipped(what),
                Err(e) => return Err(e),
            }
        }
        CellKind::Pv { chi, a, n } => {
            let chi = CharacterGroup::from_label(chi)?;
            let lhs = charsums::type1_sum(&chi, *a, 0, *n)?.value.norm();
            let qf = q as f64;
            let rhs = qf.sqrt() * qf.max(3.0).ln() + *n as f64 / qf.sqrt();
            CellOutput::Rows(vec![row(
                chi.label(), *a, *n, 0, 0, 0, lhs, rhs, lhs / rhs, String::new(),
            )])
        }
        CellKind::ProductSample { chi, d, v_cap, r } => {
            let chi = CharacterGroup::from_label(chi)?;
            let table = chi.value_table();
            let m = chi.modulus_factored();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::with_capacity(ctx.cfg.samples as usize);
            for _ in 0..ctx.cfg.samples {
                let Some(t) = sample_tuple(&mut rng, *d, *v_cap, *r) else {
                    return Ok(CellOutput::Skipped(format!(
                        "no admissible {}-tuple with entries ≤ {v_cap}",
                        2 * r
                    )));
                };
                let lhs = charsums::complete_product_sum_with(&table, &t).value.norm();
                let rhs = if *r == 2 {
                    charsums::product_sum_gcd_bound(m, &t)?
                } else {
                    weil_shape_bound(m, &t)?
                };
                let shape = if *r == 2 { "gcd" } else { "weil-shape" };
                rows.push(row(
                    chi.label(), 0, 0, *d, *v_cap, *r as u32, lhs, rhs, lhs / rhs,
                    format!("v={};bound={shape}", join_dots(t.v())),
                ));
            }
            CellOutput::Rows(rows)
        }
        CellKind::MeanValue { chi, d, v_cap } => {
            let chi = CharacterGroup::from_label(chi)?;
            let policy = MeanValuePolicy { budget: ctx.budget, sampling: true, seed };
            match charsums::mean_value(&chi, ctx.cfg.r, *d, *v_cap, &policy) {
                Ok(mv) => {
                    let m = chi.modulus_factored();
                    let rhs = if ctx.cfg.r == 2 {
                        charsums::mean_value_bound_r2(m, *d, *v_cap)
                    } else {
                        charsums::mean_value_bound_r3(m, *v_cap)
                    };
                    let notes = match mv {
                        MeanValue::Exact { tuples, .. } => format!("exact;tuples={tuples}"),
                        MeanValue::Sampled { std_error, samples, .. } => {
                            format!("sampled;samples={samples};se={std_error:.3e}")
                        }
                    };
                    let lhs = mv.point();
                    CellOutput::Rows(vec![row(
                        chi.label(), 0, 0, *d, *v_cap, ctx.cfg.r as u32, lhs, rhs, lhs / rhs, notes,
                    )])
                }
                Err(Error::Resource { what, .. }) => CellOutput::Skipped(what),
                Err(e) => return Err(e),
            }
        }
        CellKind::Bilinear { chi } => {
            let chi = CharacterGroup::from_label(chi)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::with_capacity(ctx.cfg.samples as usize);
            for _ in 0..ctx.cfg.samples {
                let k_max = rng.gen_range(2..=8u64);
                let l_max = rng.gen_range(8..=40u64);
                let a = loop {
                    let a = rng.gen_range(1..q);
                    if arith::gcd(a, q) == 1 {
                        break a as i64;
                    }
                };
                let alpha: Vec<Complex64> =
                    (1..=k_max).map(|k| unit_coefficient(&mut rng, k, q)).collect();
                let beta: Vec<Complex64> =
                    (1..=l_max).map(|l| unit_coefficient(&mut rng, l, q)).collect();
                let variable = rng.gen_bool(0.5);
                let mut inst = BilinearInstance::new(a, alpha, beta)?;
                let value = if variable {
                    let limits: Vec<(u64, u64)> = (0..k_max)
                        .map(|_| {
                            let m = rng.gen_range(0..l_max);
                            (m, rng.gen_range(m + 1..=l_max))
                        })
                        .collect();
                    inst = inst.with_limits(limits)?;
                    charsums::bilinear_w_variable(&chi, &inst)?.value
                } else {
                    charsums::bilinear_w(&chi, &inst)?.value
                };
                let lhs = value.norm();
                let rhs = charsums::bilinear_bound(q, &inst);
                rows.push(row(
                    chi.label(), a, l_max, 0, 0, 0, lhs, rhs, lhs / rhs,
                    format!("k={k_max};l={l_max};variable={variable}"),
                ));
            }
            CellOutput::Rows(rows)
        }
        CellKind::TransIdentity { chi } => {
            let chi = CharacterGroup::from_label(chi)?;
            let table = chi.value_table();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::with_capacity(ctx.cfg.samples as usize);
            for _ in 0..ctx.cfg.samples {
                let u1 = rng.gen_range(0..q) as i64;
                let u2 = rng.gen_range(0..q) as i64;
                let l = rng.gen_range(0..q) as i64;
                let lhs = charsums::twisted_pair_sum_with(&table, u1, u2, l).value.norm();
                let rhs = charsums::twisted_pair_sum_with(&table, l, 0, u1 - u2).value.norm();
                // Both sides of an exact identity: when both vanish the
                // ratio is 1 by convention rather than 0/0.
                let ratio = if lhs.max(rhs) <= 1e-9 { 1.0 } else { lhs / rhs };
                rows.push(row(
                    chi.label(), 0, q, 0, 0, 0, lhs, rhs, ratio,
                    format!("u1={u1};u2={u2};lambda={l}"),
                ));
            }
            CellOutput::Rows(rows)
        }
        CellKind::AsetChain { s_prime, d, v_cap } => {
            let s = q;
            let rep = match burgess::chain_report(s, *s_prime, *d, *v_cap, s, ctx.budget) {
                Ok(rep) => rep,
                Err(Error::Resource { what, .. }) => return Ok(CellOutput::Skipped(what)),
                Err(e) => return Err(e),
            };
            let vf = *v_cap as f64;
            let base = format!("s_prime={s_prime}");
            let mut rows = Vec::with_capacity(3 + rep.a3.len());
            rows.push(row(
                "-".into(), 0, 0, *d, *v_cap, 3,
                rep.a as f64, vf.powi(3) + rep.a1 as f64, rep.ratio_a,
                format!("link=A;{base}"),
            ));
            rows.push(row(
                "-".into(), 0, 0, *d, *v_cap, 3,
                rep.a1 as f64,
                arith::gcd(*d, s) as f64 * vf * (1.0 + vf / s as f64) * rep.a2 as f64,
                rep.ratio_a1,
                format!("link=A1;{base}"),
            ));
            let a3_weighted: f64 = rep.a3.iter().map(|&(s2, c)| s2 as f64 * c as f64).sum();
            rows.push(row(
                "-".into(), 0, 0, *d, *v_cap, 3,
                rep.a2 as f64, a3_weighted, rep.ratio_a2,
                format!("link=A2;{base}"),
            ));
            for &(s2, count) in &rep.a3 {
                let rhs = gcd_pow3(*d, s) as f64 * vf.powi(4) / (*s_prime as f64 * s2 as f64);
                let ratio = if count == 0 { 0.0 } else { count as f64 / rhs };
                rows.push(row(
                    "-".into(), 0, 0, *d, *v_cap, 3,
                    count as f64, rhs, ratio,
                    format!("link=A3;{base};s_dprime={s2}"),
                ));
            }
            CellOutput::Rows(rows)
        }
        CellKind::Cset { chi, parts, levels } => {
            let chi = CharacterGroup::from_label(chi)?;
            let (d, vs) = ctx.cfg.tuple.clone().unwrap_or((1, vec![1, 2, 3, 1, 2, 4]));
            let t = ShiftTuple::new(d, vs)?;
            let partition = CsetPartition { parts: *parts, levels: *levels };
            let rep = burgess::set_c_sum(&chi, &partition, &t)?;
            CellOutput::Rows(vec![row(
                chi.label(), 0, 0, t.d(),
                t.v().iter().copied().max().unwrap_or(0), 3,
                rep.sum.norm(), rep.bound, rep.ratio,
                format!(
                    "parts={};levels={};members={}",
                    join_dots(parts), join_dots(levels), rep.members
                ),
            )])
        }
    };
    Ok(out)
}

// ============================== the driver ==============================

/// Expand the config, run every cell, and collect rows in grid order.
pub fn run_sweep(cfg: &SweepConfig, budget: u64) -> Result<SweepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cells_spec = build_cells(cfg, &mut rng)?;
    let cells: Vec<Cell> = cells_spec
        .into_iter()
        .enumerate()
        .map(|(i, (q, kind))| Cell { q, seed: cell_seed(cfg.seed, i as u64), kind })
        .collect();

    let tables = match cfg.target {
        Target::Theorem1 | Target::Pv => {
            let max_n = cells
                .iter()
                .map(|c| match &c.kind {
                    CellKind::Theorem1 { n, .. } | CellKind::Pv { n, .. } => *n,
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            Some(ArithTables::new(max_n.max(2) as usize))
        }
        _ => None,
    };
    let ctx = Ctx { cfg, budget, tables };

    let outputs: Result<Vec<CellOutput>> = cells
        .par_iter()
        .map(|cell| run_cell(cell.q, cell.seed, &cell.kind, &ctx))
        .collect();
    let outputs = outputs?;

    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (i, out) in outputs.into_iter().enumerate() {
        match out {
            CellOutput::Rows(rs) => rows.extend(rs),
            CellOutput::Skipped(msg) => {
                violations.push(format!("cell {i} (q={}): {msg}", cells[i].q))
            }
        }
    }
    let summary = summarize(cells.len(), &rows, violations);
    Ok(SweepOutcome { rows, summary })
}

fn summarize(cells: usize, rows: &[Row], violations: Vec<String>) -> Summary {
    let mut max_ratio: Option<MaxRatio> = None;
    for (i, row) in rows.iter().enumerate() {
        if row.ratio.is_finite() && max_ratio.map_or(true, |m| row.ratio > m.ratio) {
            max_ratio = Some(MaxRatio { ratio: row.ratio, row: i });
        }
    }
    let mut fits = Vec::new();
    let predictors: [(&'static str, fn(&Row) -> f64); 3] = [
        ("lhs~q", |r| r.q as f64),
        ("lhs~N", |r| r.n as f64),
        ("lhs~V", |r| r.v as f64),
    ];
    for (name, pred) in predictors {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| pred(r) > 0.0 && r.lhs > 0.0)
            .map(|r| (pred(r), r.lhs))
            .collect();
        if pts.len() >= 3 {
            if let Ok(fit) = fit_exponent(&pts) {
                fits.push(NamedFit { name, fit });
            }
        }
    }
    Summary { cells, max_ratio, fits, violations }
}

impl Summary {
    /// Human-readable sweep summary (the CSV/JSON file holds the rows).
    pub fn render(&self, rows: &[Row]) -> String {
        let mut out = format!("cells: {}, rows: {}\n", self.cells, rows.len());
        match self.max_ratio {
            Some(m) => {
                let r = &rows[m.row];
                out.push_str(&format!(
                    "max ratio: {} at row {} (q={}, chi={}, N={}, d={}, V={})\n",
                    m.ratio, m.row, r.q, r.chi_label, r.n, r.d, r.v
                ));
            }
            None => out.push_str("max ratio: none (no finite ratios)\n"),
        }
        for nf in &self.fits {
            out.push_str(&format!(
                "fit {}: slope {:.4}, intercept {:.4}, residual {:.4}\n",
                nf.name, nf.fit.slope, nf.fit.intercept, nf.fit.residual
            ));
        }
        if !self.violations.is_empty() {
            out.push_str(&format!("budget violations ({} cells skipped):\n", self.violations.len()));
            for v in &self.violations {
                out.push_str(&format!("  {v}\n"));
            }
        }
        out
    }
}

// ============================== rendering ==============================

/// Shortest round-trip decimal form; the fixed float format for reports.
fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Render rows as CSV with the fixed header.
pub fn render_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory csv write");
    for row in rows {
        w.write_record(&[
            row.target.to_string(),
            row.q.to_string(),
            row.chi_label.clone(),
            row.a.to_string(),
            row.n.to_string(),
            row.d.to_string(),
            row.v.to_string(),
            row.r.to_string(),
            fmt_num(row.lhs),
            fmt_num(row.rhs),
            fmt_num(row.ratio),
            row.seed.to_string(),
            row.notes.clone(),
        ])
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv is utf-8")
}

/// Render rows as a JSON array mirroring the CSV one-to-one.
pub fn render_json(rows: &[Row]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

/// Render in the requested format.
pub fn render(rows: &[Row], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NRule;

    const BUDGET: u64 = 1_000_000_000;

    #[test]
    fn csv_header_matches_the_written_header_line() {
        let text = render_csv(&[]);
        assert_eq!(text, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn empty_q_list_gives_an_empty_report() {
        let cfg = SweepConfig::new(Target::Theorem1);
        let out = run_sweep(&cfg, BUDGET).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(out.summary.cells, 0);
        assert!(out.summary.violations.is_empty());
        assert!(out.summary.render(&out.rows).contains("cells: 0"));
    }

    #[test]
    fn transfer_identity_rows_all_have_unit_ratio() {
        let mut cfg = SweepConfig::new(Target::TransIdentity);
        cfg.q_values = vec![5, 13, 16];
        cfg.samples = 10;
        cfg.seed = 7;
        let out = run_sweep(&cfg, BUDGET).unwrap();
        assert_eq!(out.rows.len(), 30);
        for row in &out.rows {
            assert!((row.ratio - 1.0).abs() <= 1e-8, "row {row:?}");
        }
    }

    #[test]
    fn identical_config_and_seed_reproduce_identical_bytes() {
        let mut cfg = SweepConfig::new(Target::BurgessR2);
        cfg.q_values = vec![5, 7, 9];
        cfg.v_values = vec![3, 4];
        cfg.samples = 4;
        cfg.seed = 42;
        let a = render_csv(&run_sweep(&cfg, BUDGET).unwrap().rows);
        let b = render_csv(&run_sweep(&cfg, BUDGET).unwrap().rows);
        assert_eq!(a, b);
        let c = render_json(&run_sweep(&cfg, BUDGET).unwrap().rows);
        let d = render_json(&run_sweep(&cfg, BUDGET).unwrap().rows);
        assert_eq!(c, d);
    }

    #[test]
    fn theorem1_grid_covers_every_prime_once() {
        let mut cfg = SweepConfig::new(Target::Theorem1);
        cfg.q_values = (101..=140).filter(|&q| arith::is_prime(q)).collect();
        let out = run_sweep(&cfg, BUDGET).unwrap();
        assert_eq!(out.rows.len(), cfg.q_values.len());
        for row in &out.rows {
            assert_eq!(row.n, row.q);
            assert!(row.ratio.is_finite() && row.ratio > 0.0);
            assert!(row.rhs > 0.0);
        }
        assert!(out.summary.max_ratio.is_some());
    }

    #[test]
    fn theorem1_rows_match_a_standalone_recomputation() {
        let mut cfg = SweepConfig::new(Target::Theorem1);
        cfg.q_values = vec![101];
        cfg.n_rule = NRule::Fixed(vec![80]);
        let out = run_sweep(&cfg, BUDGET).unwrap();
        assert_eq!(out.rows.len(), 1);
        let row = &out.rows[0];
        let chi = CharacterGroup::from_label(&row.chi_label).unwrap();
        let tables = ArithTables::new(80);
        let rep = vaughan::bound_ratio(&chi, row.a, row.n, &tables).unwrap();
        assert_eq!(rep.ratio.to_bits(), row.ratio.to_bits());
    }

    #[test]
    fn burgess_rows_respect_their_reported_bounds() {
        for target in [Target::BurgessR2, Target::BurgessR3] {
            let mut cfg = SweepConfig::new(target);
            cfg.q_values = vec![7, 11];
            cfg.d_values = vec![1, 2];
            cfg.v_values = vec![4];
            cfg.samples = 6;
            cfg.seed = 3;
            let out = run_sweep(&cfg, BUDGET).unwrap();
            assert_eq!(out.rows.len(), 2 * 2 * 6);
            for row in &out.rows {
                assert!(row.lhs <= row.rhs + 1e-6, "row {row:?}");
                let expect_r = if target == Target::BurgessR2 { 2 } else { 3 };
                assert_eq!(row.r, expect_r);
            }
        }
    }

    #[test]
    fn aset_chain_rows_expose_every_link() {
        let mut cfg = SweepConfig::new(Target::AsetChain);
        cfg.s_values = vec![9];
        cfg.d_values = vec![1];
        cfg.v_values = vec![2];
        let out = run_sweep(&cfg, BUDGET).unwrap();
        // three s′ | 9, each with links A, A1, A2 and one A3 row per s″.
        assert_eq!(out.summary.cells, 3);
        let links: Vec<&str> = out
            .rows
            .iter()
            .map(|r| r.notes.split(';').next().unwrap())
            .collect();
        assert!(links.contains(&"link=A"));
        assert!(links.contains(&"link=A1"));
        assert!(links.contains(&"link=A2"));
        assert!(links.iter().any(|l| *l == "link=A3"));
        for row in &out.rows {
            assert!(row.ratio.is_finite(), "row {row:?}");
        }
    }

    #[test]
    fn cset_rows_sum_back_to_the_complete_sum() {
        let mut cfg = SweepConfig::new(Target::Cset);
        cfg.q_values = vec![15];
        cfg.tuple = Some((1, vec![1, 2, 3, 1, 2, 4]));
        let out = run_sweep(&cfg, BUDGET).unwrap();
        assert_eq!(out.rows.len(), 16);
        let members: u64 = out
            .rows
            .iter()
            .map(|r| {
                r.notes
                    .split(';')
                    .find_map(|p| p.strip_prefix("members="))
                    .unwrap()
                    .parse::<u64>()
                    .unwrap()
            })
            .sum();
        assert_eq!(members, 15);
    }

    #[test]
    fn meanvalue_summary_fits_the_v_exponent() {
        let mut cfg = SweepConfig::new(Target::MeanValue);
        cfg.q_values = vec![13];
        cfg.d_values = vec![1];
        cfg.v_values = (2..=6).collect();
        let out = run_sweep(&cfg, BUDGET).unwrap();
        assert_eq!(out.rows.len(), 5);
        for row in &out.rows {
            assert!(row.notes.starts_with("exact"), "row {row:?}");
        }
        let fit = out
            .summary
            .fits
            .iter()
            .find(|nf| nf.name == "lhs~V")
            .expect("V fit present");
        assert!(fit.fit.slope > 0.0);
    }

    #[test]
    fn budget_violations_skip_cells_but_keep_the_sweep_alive() {
        let mut cfg = SweepConfig::new(Target::AsetChain);
        cfg.s_values = vec![9];
        cfg.d_values = vec![1];
        cfg.v_values = vec![3];
        let out = run_sweep(&cfg, 1).unwrap();
        assert_eq!(out.rows.len(), 0);
        // one cell per divisor s′ of 9, all over budget.
        assert_eq!(out.summary.violations.len(), 3);
        let rendered = out.summary.render(&out.rows);
        assert!(rendered.contains("budget violations"), "{rendered}");
    }

    #[test]
    fn meanvalue_cells_fall_back_to_sampling_under_a_small_budget() {
        let mut cfg = SweepConfig::new(Target::MeanValue);
        cfg.q_values = vec![13];
        cfg.d_values = vec![1];
        cfg.v_values = vec![3];
        let out = run_sweep(&cfg, 200).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.rows[0].notes.starts_with("sampled;"), "{:?}", out.rows[0]);
        assert!(out.summary.violations.is_empty());
    }

    #[test]
    fn pv_rows_report_the_completion_shape() {
        let mut cfg = SweepConfig::new(Target::Pv);
        cfg.q_values = vec![101];
        cfg.n_rule = NRule::Fixed(vec![50, 101]);
        let out = run_sweep(&cfg, BUDGET).unwrap();
        assert_eq!(out.rows.len(), 2);
        for row in &out.rows {
            let qf = row.q as f64;
            let expected = qf.sqrt() * qf.ln() + row.n as f64 / qf.sqrt();
            assert!((row.rhs - expected).abs() <= 1e-12);
            assert!(row.ratio < 1.0, "linear sums sit well under the shape: {row:?}");
        }
    }
}
