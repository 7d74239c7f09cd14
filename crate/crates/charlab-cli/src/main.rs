//! Command-line front end.
//!
//! Exit codes: 0 = success, 1 = a verification failure or resource limit,
//! 2 = usage, domain, or I/O errors (clap reports its own usage errors
//! with code 2 as well).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use charlab::arith::{self, ArithTables};
use charlab::burgess;
use charlab::charsums::{self, MeanValue, MeanValuePolicy, ShiftTuple};
use charlab::dirichlet::{self, CharacterGroup, DirichletCharacter};
use charlab::vaughan::{self, ParamSelection, VaughanParams};
use charlab::{Error, KahanComplex, Result};

use charlab_cli::config::{OutputFormat, SweepConfig};
use charlab_cli::locks::RegressionStore;
use charlab_cli::sweep;
use charlab_cli::verify::{self, VerifyOptions};

#[derive(Parser)]
#[command(
    name = "charlab",
    about = "Character-sum laboratory: sums, bounds, grid sweeps, and acceptance checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one weighted character sum directly.
    Sum(SumArgs),
    /// Gauss sum of a character, against √q.
    Gauss(GaussArgs),
    /// Mean value of complete shifted-product sums over a v-box.
    Mv(MvArgs),
    /// Counting-set chain on one parameter cell.
    Asets(AsetsArgs),
    /// Slice a complete product sum over a squarefree modulus.
    Cset(CsetArgs),
    /// Four-piece decomposition of the weighted prime sum.
    Vaughan(VaughanArgs),
    /// Run acceptance criteria (all, or one by name).
    Verify(VerifyArgs),
    /// Run a grid sweep from a config file.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SumKind {
    /// Σ_{n≤N} Λ(n)·χ(n+a)
    Sa,
    /// Σ_{n≤N} Λ(n)·χ(n+a)·[(n,q)=1]
    Restricted,
    /// Σ_{M<n≤M+N, (n,q)=1} χ(n+a)
    Type1,
}

#[derive(clap::Args)]
struct SumArgs {
    /// Modulus.
    #[arg(long)]
    q: u64,
    /// Character label such as 5:1 (default: the canonical primitive character mod q).
    #[arg(long)]
    chi: Option<String>,
    /// Shift a.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    a: i64,
    /// Length of the summation range.
    #[arg(long = "N")]
    n: u64,
    /// Which sum to evaluate.
    #[arg(long, value_enum, default_value_t = SumKind::Sa)]
    kind: SumKind,
    /// Window start M for the type1 sum.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    m_start: i64,
}

#[derive(clap::Args)]
struct GaussArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    chi: Option<String>,
    /// Print every primitive character mod q instead of one.
    #[arg(long, conflicts_with = "chi")]
    all_primitive: bool,
}

#[derive(clap::Args)]
struct MvArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    chi: Option<String>,
    /// Number of shifts per half (2 or 3).
    #[arg(long, default_value_t = 2)]
    r: u64,
    /// Common multiplier d of the shifts.
    #[arg(long, default_value_t = 1)]
    d: u64,
    /// Box size: shifts range over [1, V].
    #[arg(long = "V")]
    v: u64,
    /// Monte Carlo instead of failing when enumeration exceeds the budget.
    #[arg(long)]
    sampling: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(clap::Args)]
struct AsetsArgs {
    /// Inner modulus s.
    #[arg(long)]
    s: u64,
    /// Divisor s′ of s.
    #[arg(long, default_value_t = 1)]
    s_prime: u64,
    #[arg(long, default_value_t = 1)]
    d: u64,
    #[arg(long = "V", default_value_t = 2)]
    v: u64,
    /// Outer modulus in the 𝒜₁ shape (defaults to s).
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(clap::Args)]
struct CsetArgs {
    /// Squarefree modulus.
    #[arg(long)]
    q: u64,
    #[arg(long)]
    chi: Option<String>,
    /// Shift tuple as d:v1,v2,... with 6 shifts.
    #[arg(long, default_value = "1:1,2,3,1,2,4")]
    tuple: String,
}

#[derive(clap::Args)]
struct VaughanArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    chi: Option<String>,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    a: i64,
    #[arg(long = "N")]
    n: u64,
    /// Window parameter U (requires --v).
    #[arg(long, requires = "v")]
    u: Option<f64>,
    /// Window parameter V (requires --u).
    #[arg(long, requires = "u")]
    v: Option<f64>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Criterion name, or "all".
    #[arg(default_value = "all")]
    target: String,
    /// Shrink the q-scans for a quick local run.
    #[arg(long)]
    qmax: Option<u64>,
    /// Regression-lock store (default: the versioned locks/constants.txt).
    #[arg(long)]
    locks: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Sweep config file.
    config: PathBuf,
    /// Write the report here instead of the config's `out` (or stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's output format.
    #[arg(long)]
    format: Option<String>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's work budget.
    #[arg(long)]
    budget: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Resource { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Budget precedence: command-line flag, then config file, then the
/// CHARLAB_BUDGET environment variable, then the default.
fn resolve_budget(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(b) = flag.or(config) {
        return Ok(b);
    }
    match std::env::var("CHARLAB_BUDGET") {
        Ok(s) => s.trim().parse().map_err(|_| {
            Error::Domain(format!("CHARLAB_BUDGET must be a non-negative integer, got {s:?}"))
        }),
        Err(_) => Ok(1_000_000_000),
    }
}

/// Pick the character: an explicit label (whose modulus must match `q`),
/// else the canonical primitive character, else — when allowed — the
/// first non-principal character.
fn resolve_chi(q: u64, label: Option<&str>, fallback_nonprincipal: bool) -> Result<DirichletCharacter> {
    if let Some(label) = label {
        let chi = CharacterGroup::from_label(label)?;
        if chi.modulus() != q {
            return Err(Error::Domain(format!(
                "character modulus {} does not match --q {q}",
                chi.modulus()
            )));
        }
        return Ok(chi);
    }
    let group = CharacterGroup::new(q)?;
    group
        .canonical_primitive()
        .or_else(|| {
            if fallback_nonprincipal {
                group.characters().into_iter().find(|c| !c.is_principal())
            } else {
                None
            }
        })
        .ok_or_else(|| Error::Domain(format!("no primitive character mod {q}; pass --chi explicitly")))
}

fn fmt_complex(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{} - {}i", z.re, -z.im)
    } else {
        format!("{} + {}i", z.re, z.im)
    }
}

fn parse_cli_tuple(text: &str) -> Result<(u64, Vec<u64>)> {
    let (d, vs) = text
        .split_once(':')
        .ok_or_else(|| Error::Domain(format!("tuple must look like d:v1,v2,..., got {text:?}")))?;
    let d: u64 = d.trim().parse().map_err(|_| Error::Domain(format!("bad tuple d in {text:?}")))?;
    let vs: Vec<u64> = vs
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| Error::Domain(format!("bad tuple entry in {text:?}"))))
        .collect::<Result<_>>()?;
    Ok((d, vs))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Sum(args) => run_sum(args),
        Command::Gauss(args) => run_gauss(args),
        Command::Mv(args) => run_mv(args),
        Command::Asets(args) => run_asets(args),
        Command::Cset(args) => run_cset(args),
        Command::Vaughan(args) => run_vaughan(args),
        Command::Verify(args) => run_verify(args),
        Command::Sweep(args) => run_sweep_cmd(args),
    }
}

fn run_sum(args: SumArgs) -> Result<ExitCode> {
    let chi = resolve_chi(args.q, args.chi.as_deref(), false)?;
    let kind_name = match args.kind {
        SumKind::Sa => "sa",
        SumKind::Restricted => "restricted",
        SumKind::Type1 => "type1",
    };
    let value = match args.kind {
        SumKind::Sa => {
            let tables = ArithTables::new(args.n.max(2) as usize);
            charsums::shifted_prime_sum(&chi, args.a, args.n, &tables)?.value
        }
        SumKind::Restricted => {
            let tables = ArithTables::new(args.n.max(2) as usize);
            vaughan::restricted_prime_sum(&chi, args.a, args.n, &tables)?
        }
        SumKind::Type1 => charsums::type1_sum(&chi, args.a, args.m_start, args.n)?.value,
    };
    println!("q={} chi={} a={} N={} kind={}", args.q, chi.label(), args.a, args.n, kind_name);
    println!("value = {}", fmt_complex(value));
    println!("|value| = {}", value.norm());
    Ok(ExitCode::SUCCESS)
}

fn run_gauss(args: GaussArgs) -> Result<ExitCode> {
    let chars = if args.all_primitive {
        let prims = CharacterGroup::new(args.q)?.primitive_characters();
        if prims.is_empty() {
            return Err(Error::Domain(format!("no primitive character mod {}", args.q)));
        }
        prims
    } else {
        vec![resolve_chi(args.q, args.chi.as_deref(), false)?]
    };
    let root = (args.q as f64).sqrt();
    println!("sqrt(q) = {root}");
    for chi in chars {
        let tau = dirichlet::gauss_sum(&chi);
        println!("chi={} tau = {} |tau| = {}", chi.label(), fmt_complex(tau), tau.norm());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_mv(args: MvArgs) -> Result<ExitCode> {
    let chi = resolve_chi(args.q, args.chi.as_deref(), false)?;
    let policy = MeanValuePolicy {
        budget: resolve_budget(args.budget, None)?,
        sampling: args.sampling,
        seed: args.seed.unwrap_or(0x5EED),
    };
    let mv = charsums::mean_value(&chi, args.r as usize, args.d, args.v, &policy)?;
    let m = chi.modulus_factored();
    let shape = if args.r == 2 {
        charsums::mean_value_bound_r2(m, args.d, args.v)
    } else {
        charsums::mean_value_bound_r3(m, args.v)
    };
    println!("q={} chi={} r={} d={} V={}", args.q, chi.label(), args.r, args.d, args.v);
    match &mv {
        MeanValue::Exact { value, tuples } => {
            println!("exact mean value = {value} over {tuples} tuples");
        }
        MeanValue::Sampled { estimate, std_error, ci95_upper, samples, seed } => {
            println!(
                "sampled mean value = {estimate} (se {std_error}, 95% upper {ci95_upper}) from {samples} draws, seed {seed}"
            );
        }
    }
    println!("bound shape = {shape}  point/shape = {}", mv.point() / shape);
    Ok(ExitCode::SUCCESS)
}

fn run_asets(args: AsetsArgs) -> Result<ExitCode> {
    let q = args.q.unwrap_or(args.s);
    let budget = resolve_budget(args.budget, None)?;
    let rep = burgess::chain_report(args.s, args.s_prime, args.d, args.v, q, budget)?;
    println!("s={} s'={} d={} V={} q={}", rep.s, rep.s_prime, rep.d, rep.v_cap, rep.q);
    println!("#A  = {:<8} ratio vs V^3 + #A1          = {}", rep.a, rep.ratio_a);
    println!("#A1 = {:<8} ratio vs (d,s)V(1+V/q)#A2   = {}", rep.a1, rep.ratio_a1);
    println!("#A2 = {:<8} ratio vs sum s''#A3         = {}", rep.a2, rep.ratio_a2);
    for (s2, count) in &rep.a3 {
        println!("#A3(s''={s2}) = {count}");
    }
    println!("max A3 ratio vs (d^3,s)V^4/(s's'')  = {}", rep.ratio_a3);
    Ok(ExitCode::SUCCESS)
}

fn run_cset(args: CsetArgs) -> Result<ExitCode> {
    let chi = resolve_chi(args.q, args.chi.as_deref(), true)?;
    let (d, vs) = parse_cli_tuple(&args.tuple)?;
    let t = ShiftTuple::new(d, vs)?;
    let m = arith::factorize(args.q)?;
    let total = charsums::complete_product_sum(&chi, &t).value;
    let mut acc = KahanComplex::new();
    let mut members = 0u64;
    let partitions = burgess::squarefree_partitions(&m)?;
    println!("q={} chi={} tuple {}", args.q, chi.label(), args.tuple);
    for p in &partitions {
        let rep = burgess::set_c_sum(&chi, p, &t)?;
        println!(
            "parts={:?} levels={:?} members={:<6} |sum|={} bound={} ratio={}",
            p.parts, p.levels, rep.members, rep.sum.norm(), rep.bound, rep.ratio
        );
        acc.add(rep.sum);
        members += rep.members;
    }
    println!("slices: {} covering {members}/{} residues", partitions.len(), args.q);
    println!("complete sum = {}", fmt_complex(total));
    println!("slice total  = {}", fmt_complex(acc.value()));
    println!("cover residual = {:.3e}", (acc.value() - total).norm());
    Ok(ExitCode::SUCCESS)
}

fn run_vaughan(args: VaughanArgs) -> Result<ExitCode> {
    let chi = resolve_chi(args.q, args.chi.as_deref(), false)?;
    let tables = ArithTables::new(args.n.max(2) as usize);
    println!("q={} chi={} a={} N={}", args.q, chi.label(), args.a, args.n);
    let params = match (args.u, args.v) {
        (Some(u), Some(v)) => Some(VaughanParams { u, v, n: args.n }),
        _ => match vaughan::choose_params(args.q, args.n) {
            ParamSelection::Chosen { params, u_ge_v, n_ge_q56, clamped } => {
                println!(
                    "window U={} V={} (u_ge_v={u_ge_v} n_ge_q56={n_ge_q56} clamped={clamped})",
                    params.u, params.v
                );
                Some(params)
            }
            ParamSelection::Fallback { reason } => {
                println!("no usable window: {reason}");
                None
            }
        },
    };
    let direct = vaughan::restricted_prime_sum(&chi, args.a, args.n, &tables)?;
    if let Some(params) = params {
        let dec = vaughan::decompose(&chi, args.a, args.n, &params, &tables)?;
        println!(
            "sigma1 = {}\nsigma2 = {}\nsigma3 = {}\nsigma4 = {}",
            dec.sigma1, dec.sigma2, dec.sigma3, dec.sigma4
        );
        println!("pieces total = {}", fmt_complex(dec.total));
        println!("recombination residual = {:.3e}", (dec.total - direct).norm());
    }
    println!("restricted sum = {} (|.| = {})", fmt_complex(direct), direct.norm());
    if chi.is_primitive() && !chi.is_principal() && args.n <= args.q {
        let rep = vaughan::bound_ratio(&chi, args.a, args.n, &tables)?;
        println!("|S| = {}  shape = {}  ratio = {}", rep.lhs, rep.rhs, rep.ratio);
    }
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode> {
    let opts = VerifyOptions {
        qmax: args.qmax,
        locks_path: args.locks.unwrap_or_else(RegressionStore::default_path),
        budget: resolve_budget(args.budget, None)?,
    };
    match verify::run_named(&args.target, &opts) {
        None => {
            eprintln!("error: unknown verify target {:?}", args.target);
            eprintln!("known targets: all, {}", verify::names().join(", "));
            Ok(ExitCode::from(2))
        }
        Some(outcomes) => {
            let mut all_pass = true;
            for outcome in &outcomes {
                println!("{}", outcome.render_line());
                all_pass &= outcome.pass;
            }
            Ok(ExitCode::from(u8::from(!all_pass)))
        }
    }
}

fn run_sweep_cmd(args: SweepArgs) -> Result<ExitCode> {
    let mut cfg = SweepConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(format) = args.format.as_deref() {
        cfg.format = format.parse::<OutputFormat>()?;
    }
    if let Some(out) = args.out {
        cfg.out = Some(out);
    }
    let budget = resolve_budget(args.budget, cfg.budget)?;
    let outcome = sweep::run_sweep(&cfg, budget)?;
    let report = sweep::render(&outcome.rows, cfg.format);
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, report)
                .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", outcome.summary.render(&outcome.rows));
            println!("wrote {} rows to {}", outcome.rows.len(), path.display());
        }
        None => {
            print!("{report}");
            eprint!("{}", outcome.summary.render(&outcome.rows));
        }
    }
    Ok(ExitCode::SUCCESS)
}
