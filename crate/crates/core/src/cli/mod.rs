//! The `sg` command line: scenario resolution, dispatch and report writing.

mod cache;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use cache::{DiskCache, CACHE_ENV};
pub use output::{write_atomic, Ctx, Format, Outcome};

use crate::addressing::{build_lattice, Cell, Word, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::extremal::{
    det_lower_bound_check, minimal_complex_word, periodic_limit, q_reduction_check, sharp_delta_report, Generators,
};
use crate::harmonic::{bump_phi0, extend_to_level, graph_energy, h, harmonic_extend_cell, DiscreteFn, PwFn};
use crate::measure::{
    cell_measure, condition_check, kusuoka_from_frob, standard_sample, CornerSpec, Direction, MeasureKind,
    RnRatioReport,
};
use crate::scalar::{parse_q, q, q_to_f64, q_to_string, qpow, Q};
use crate::sobolev::{
    bump_gradient_check, essinf_decay_check, exponents, growth_report, oscillation_decay_report, poincare_estimate,
    sample_functions, sobolev_verify, SobolevParams, VerifyOptions,
};

#[derive(Parser, Debug)]
#[command(name = "sg", version, about = "Harmonic analysis on the Sierpinski gasket and its products")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Output directory for report.json, CSV tables and provenance.json; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format on stdout.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Include exact rational values.
    #[arg(long, global = true)]
    pub exact: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Upper bound on cells, vertices or dense-matrix entries.
    #[arg(long, global = true)]
    pub budget: Option<u128>,
    /// TOML scenario file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Level-m lattice of S0^n.
    Lattice(LatticeArgs),
    /// Harmonic extension of boundary values.
    Harmonic(HarmonicArgs),
    /// Graph energy of a harmonic extension or of vertex values from CSV.
    Energy(EnergyArgs),
    /// Exact mass of a cell.
    Measure(MeasureArgs),
    /// Kusuoka ratio mu(F_outer F_inner S0) / mu(F_inner S0).
    Rn(RnArgs),
    /// Derived exponents for a parameter set.
    Exponents(ParamArgs),
    /// Discrete Poincare constant.
    Poincare(PoincareArgs),
    /// Oscillation decay table.
    Osc(OscArgs),
    /// Polynomial growth check on blow-up windows.
    Growth(GrowthArgs),
    /// Sobolev inequality on blow-up windows.
    #[command(subcommand)]
    Sobolev(SobolevCmd),
    /// Gradient bounds for harmonic functions and the bump.
    #[command(subcommand)]
    Bump(BumpCmd),
    /// Decay of the h1 gradient below a base cell.
    Essinf(EssinfArgs),
    /// Spectral structure of the M-matrix semigroup.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Scaling conditions for a measure.
    #[command(subcommand)]
    Condition(ConditionCmd),
}

#[derive(Args, Debug)]
pub struct LatticeArgs {
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct HarmonicArgs {
    /// Boundary values `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub word: Option<String>,
    /// Also extend to the whole lattice of this level.
    #[arg(long)]
    pub level: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EnergyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub boundary: Option<String>,
    /// CSV `vertex_id,value` on the level-`level` lattice.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    /// hausdorff, kusuoka, harmonic_energy, dirac, or a JSON measure.
    #[arg(long)]
    pub kind: Option<String>,
    /// Word of a cell in S0^n.
    #[arg(long)]
    pub word: Option<String>,
    /// Cell `k:word`; overrides --word.
    #[arg(long)]
    pub cell: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub boundary: Option<String>,
    /// Dirac point `k:word:corner`.
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Args, Debug)]
pub struct RnArgs {
    #[arg(long)]
    pub outer: Option<String>,
    #[arg(long)]
    pub inner: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// A number or `inf`.
    #[arg(long)]
    pub q: Option<String>,
    /// hausdorff, kusuoka or a JSON measure.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub delta_lo: Option<f64>,
    /// A number or `inf`.
    #[arg(long)]
    pub delta_hi: Option<String>,
}

#[derive(Args, Debug)]
pub struct PoincareArgs {
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct OscArgs {
    /// h1, h2, h3, phi0, random or boundary values `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    pub function: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GrowthArgs {
    /// phi0 or random.
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// The function lives on S_{0,support}.
    #[arg(long)]
    pub support: Option<u32>,
    #[arg(long)]
    pub max_m: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum SobolevCmd {
    /// Empirical constants of the Sobolev inequality.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long)]
    pub compare: Option<usize>,
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long)]
    pub sample_level: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum BumpCmd {
    /// Gradient bounds for h_i and the bump phi0.
    Verify {
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct EssinfArgs {
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum SpectralCmd {
    /// Exact spectrum classes of all M-words up to a length.
    Scan {
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Gram-trace growth along a periodic word.
    Periodic {
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Exact Kusuoka bounds and scaling exponents.
    SharpDelta {
        #[arg(long)]
        max_level: Option<usize>,
        /// Comma-separated lengths of `1^m`.
        #[arg(long)]
        ones: Option<String>,
        #[arg(long)]
        periodic: Option<String>,
        #[arg(long)]
        reps: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConditionCmd {
    /// Scaling condition (M) or (M') on a standard cell sample.
    Check {
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        delta_lo: Option<f64>,
        #[arg(long)]
        delta_hi: Option<String>,
        #[arg(long)]
        constant: Option<f64>,
        /// M or M'.
        #[arg(long)]
        direction: Option<String>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        max_blowup: Option<u32>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lattice(_) => "lattice",
            Command::Harmonic(_) => "harmonic",
            Command::Energy(_) => "energy",
            Command::Measure(_) => "measure",
            Command::Rn(_) => "rn",
            Command::Exponents(_) => "exponents",
            Command::Poincare(_) => "poincare",
            Command::Osc(_) => "osc",
            Command::Growth(_) => "growth",
            Command::Sobolev(SobolevCmd::Verify(_)) => "sobolev_verify",
            Command::Bump(BumpCmd::Verify { .. }) => "bump_verify",
            Command::Essinf(_) => "essinf",
            Command::Spectral(SpectralCmd::Scan { .. }) => "spectral_scan",
            Command::Spectral(SpectralCmd::Periodic { .. }) => "spectral_periodic",
            Command::Spectral(SpectralCmd::SharpDelta { .. }) => "spectral_sharp_delta",
            Command::Condition(ConditionCmd::Check { .. }) => "condition_check",
        }
    }
}

/// Exit status for an error: 2 for invalid input or violated hypotheses, 3 for budgets.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument { .. } | Error::Hypothesis { .. } | Error::UndefinedExponent { .. } => 2,
        Error::Budget { .. } => 3,
        Error::Internal(_) | Error::Io { .. } => 1,
    }
}

/// Parses arguments, runs, prints a one-line diagnostic on failure and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    }
}

fn parse_triple(key: &str, s: &str) -> Result<[Q; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::arg(key, format!("expected three comma-separated values, got `{s}`")));
    }
    Ok([parse_q(parts[0])?, parse_q(parts[1])?, parse_q(parts[2])?])
}

fn parse_inf(key: &str, s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| Error::arg(key, format!("expected a number or `inf`, got `{s}`"))),
    }
}

/// A possibly infinite number from a flag or the config.
fn inf_value(ctx: &mut Ctx, key: &str, flag: Option<String>, default: f64) -> Result<f64> {
    let v = match flag {
        Some(s) => parse_inf(key, &s)?,
        None => match ctx.raw(key) {
            Some(toml::Value::String(s)) => parse_inf(key, &s)?,
            Some(toml::Value::Float(x)) => x,
            Some(toml::Value::Integer(i)) => i as f64,
            Some(_) => return Err(Error::arg(key, "expected a number or `inf`")),
            None => default,
        },
    };
    ctx.record(key, if v.is_infinite() { json!("inf") } else { json!(v) });
    Ok(v)
}

fn measure_from_str(key: &str, s: &str) -> Result<MeasureKind> {
    match s.trim() {
        "hausdorff" | "nu" => Ok(MeasureKind::Hausdorff),
        "kusuoka" | "mu" => Ok(MeasureKind::Kusuoka),
        t if t.starts_with('{') => serde_json::from_str(t).map_err(|e| Error::arg(key, format!("bad measure JSON: {e}"))),
        t => Err(Error::arg(key, format!("unknown measure `{t}`"))),
    }
}

fn measure_value(ctx: &mut Ctx, key: &str, flag: Option<String>, default: MeasureKind) -> Result<MeasureKind> {
    let m = match flag {
        Some(s) => measure_from_str(key, &s)?,
        None => match ctx.raw(key) {
            Some(toml::Value::String(s)) => measure_from_str(key, &s)?,
            Some(v @ toml::Value::Table(_)) => {
                v.try_into().map_err(|e: toml::de::Error| Error::arg(key, format!("bad measure: {}", e.message())))?
            }
            Some(_) => return Err(Error::arg(key, "expected a measure name or table")),
            None => default,
        },
    };
    ctx.record(key, &m);
    Ok(m)
}

fn params(ctx: &mut Ctx, a: &ParamArgs) -> Result<SobolevParams> {
    let n = ctx.get("n", a.n, 1usize)?;
    let r = ctx.get("r", a.r, 2.0f64)?;
    let p = ctx.get("p", a.p, 2.0f64)?;
    let qv = inf_value(ctx, "q", a.q.clone(), 2.0)?;
    let sigma = measure_value(ctx, "sigma", a.sigma.clone(), MeasureKind::Hausdorff)?;
    let delta_lo = ctx.get("delta_lo", a.delta_lo, 1.0f64)?;
    let delta_hi = inf_value(ctx, "delta_hi", a.delta_hi.clone(), 1.0)?;
    Ok(SobolevParams { n, r, p, q: qv, sigma, delta_lo, delta_hi })
}

fn named_function(ctx: &mut Ctx, name: &str, n: usize) -> Result<PwFn<Q>> {
    Ok(match name {
        "h1" | "h2" | "h3" if n == 1 => h(name[1..].parse().unwrap()),
        "phi0" if n == 1 => bump_phi0(),
        "random" => {
            let seed = seed(ctx)?;
            sample_functions(n, 2, 1, seed)?.remove(0)
        }
        s if s.contains(',') && n == 1 => PwFn::harmonic(parse_triple("function", s)?),
        s => return Err(Error::arg("function", format!("unknown function `{s}` for n = {n}"))),
    })
}

/// The seed resolved from `--seed` or the config; random inputs have no default.
fn seed(ctx: &Ctx) -> Result<u64> {
    match ctx.resolved().get("seed") {
        Some(v) => v.as_u64().ok_or_else(|| Error::arg("seed", "must be a non-negative integer")),
        None => Err(Error::arg("seed", "`seed` is required (flag --seed or config key `seed`)")),
    }
}

fn exact_pair(exact: bool, v: &Q) -> serde_json::Value {
    if exact {
        json!({ "value": q_to_string(v), "float": q_to_f64(v) })
    } else {
        json!({ "float": q_to_f64(v) })
    }
}

fn csv_rows<S: serde::Serialize>(rows: &[S]) -> impl FnOnce(&mut Vec<u8>) -> Result<()> + '_ {
    move |buf| {
        let mut w = csv::Writer::from_writer(buf);
        for r in rows {
            w.serialize(r).map_err(crate::addressing::csv_err)?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))
    }
}

/// Runs one command.
pub fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let name = cli.command.name();
    let mut ctx = Ctx::new(c.config.as_deref(), name)?;
    let budget = ctx.get("budget", c.budget, DEFAULT_BUDGET)?;
    let format = ctx.get("format", c.format, Format::Json)?;
    let exact = ctx.get("exact", c.exact.then_some(true), false)?;
    if let Some(seed) = ctx.opt::<u64>("seed", c.seed)? {
        ctx.record("seed", seed);
    }
    let outcome = dispatch(&mut ctx, &cli.command, budget, exact)?;
    let out = ctx.opt::<PathBuf>("out", c.out.clone())?;
    // the output location does not change the payload
    let hash_view = {
        let mut v = ctx;
        v.record("out", serde_json::Value::Null);
        v
    };
    output::finish(name, &hash_view, format, out.as_ref(), outcome)
}

fn dispatch(ctx: &mut Ctx, cmd: &Command, budget: u128, exact: bool) -> Result<Outcome> {
    match cmd {
        Command::Lattice(a) => {
            let level = ctx.req("level", a.level)?;
            let n = ctx.get("n", a.n, 1usize)?;
            let lat = build_lattice(level, n, budget)?;
            Outcome::new(json!({
                "level": level, "n": n,
                "vertices": lat.vertex_count(),
                "edges": lat.edges().len(),
                "cells": lat.cell_count(),
                "connected": lat.is_connected(),
            }))?
            .table("vertices.csv", |b| lat.write_vertices_csv(b))?
            .table("edges.csv", |b| lat.write_edges_csv(b))
        }
        Command::Harmonic(a) => {
            let b = parse_triple("boundary", &ctx.req::<String>("boundary", a.boundary.clone())?)?;
            let word = Word::parse(&ctx.get("word", a.word.clone(), String::new())?)?;
            let t = harmonic_extend_cell(&b, &word);
            let mut result = json!({
                "boundary": b.iter().map(q_to_string).collect::<Vec<_>>(),
                "word": word.to_string(),
                "float": t.iter().map(q_to_f64).collect::<Vec<_>>(),
            });
            if exact {
                result["values"] = json!(t.iter().map(q_to_string).collect::<Vec<_>>());
            }
            match ctx.opt::<usize>("level", a.level)? {
                None => Outcome::new(result),
                Some(level) => {
                    let base = DiscreteFn::new(&build_lattice(0, 1, budget)?, b.to_vec())?;
                    let ext = extend_to_level(&base, level, budget)?;
                    let lat = build_lattice(level, 1, budget)?;
                    result["energy"] = exact_pair(exact, &graph_energy(&lat, &ext.values));
                    Outcome::new(result)?.table("values.csv", |buf| ext.write_csv(buf))
                }
            }
        }
        Command::Energy(a) => {
            let n = ctx.get("n", a.n, 1usize)?;
            let level = ctx.get("level", a.level, 0usize)?;
            let lat = build_lattice(level, n, budget)?;
            let values = match ctx.opt::<PathBuf>("input", a.input.clone())? {
                Some(path) => {
                    let f = std::fs::File::open(&path).map_err(|e| output::io_err(&path, e))?;
                    DiscreteFn::read_csv(n, level, f)?.values
                }
                None => {
                    if n != 1 {
                        return Err(Error::arg("boundary", "boundary data describe one-factor functions; use --input"));
                    }
                    let b = parse_triple("boundary", &ctx.req::<String>("boundary", a.boundary.clone())?)?;
                    let base = DiscreteFn::new(&build_lattice(0, 1, budget)?, b.to_vec())?;
                    extend_to_level(&base, level, budget)?.values
                }
            };
            if values.len() != lat.vertex_count() {
                return Err(Error::arg("input", format!("expected {} values, got {}", lat.vertex_count(), values.len())));
            }
            let e = graph_energy(&lat, &values);
            Outcome::new(json!({ "level": level, "n": n, "energy": exact_pair(exact, &e) }))
        }
        Command::Measure(a) => measure_cmd(ctx, a, exact),
        Command::Rn(a) => {
            let outer = Word::parse(&ctx.req::<String>("outer", a.outer.clone())?)?;
            let inner = Word::parse(&ctx.req::<String>("inner", a.inner.clone())?)?;
            if inner.is_empty() {
                return Err(Error::arg("inner", "inner word must be nonempty"));
            }
            let cache = DiskCache::from_env();
            let both = outer.concat(&inner);
            let kus = |w: &Word| -> Result<Q> { Ok(kusuoka_from_frob(cache.z_product(w)?.frob_sq(), w.len())) };
            let ratio = kus(&both)? / kus(&inner)?;
            let m = outer.len() as i64;
            let lower = qpow(&q(1, 15), m);
            let upper = qpow(&q(3, 5), m);
            let pass = lower <= ratio && ratio <= upper;
            let float = q_to_f64(&ratio);
            let rep = RnRatioReport { outer, inner, ratio, lower, upper, pass };
            let mut v = serde_json::to_value(&rep).map_err(|e| Error::Internal(e.to_string()))?;
            v["float"] = json!(float);
            Outcome::new(v)
        }
        Command::Exponents(a) => {
            let p = params(ctx, a)?;
            Outcome::new(json!({ "params": p, "exponents": exponents(&p)? }))
        }
        Command::Poincare(a) => {
            let level = ctx.req("level", a.level)?;
            let n = ctx.get("n", a.n, 1usize)?;
            let rep = poincare_estimate(level, n, budget)?;
            let rows: Vec<(usize, f64)> = rep.extremizer.iter().copied().enumerate().collect();
            let ex = rows;
            Outcome::new(&rep)?.table("extremizer.csv", move |buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["vertex_id", "value"]).map_err(crate::addressing::csv_err)?;
                for (i, v) in &ex {
                    w.write_record([i.to_string(), format!("{v:e}")]).map_err(crate::addressing::csv_err)?;
                }
                w.flush().map_err(|e| Error::Internal(e.to_string()))
            })
        }
        Command::Osc(a) => {
            let n = ctx.get("n", a.n, 1usize)?;
            let fname = ctx.get("function", a.function.clone(), "h1".to_string())?;
            let r = ctx.get("r", a.r, 2.0f64)?;
            let depth = ctx.get("depth", a.depth, 6usize)?;
            let refine = ctx.get("refine", a.refine, 0usize)?;
            let u = named_function(ctx, &fname, n)?;
            let rep = oscillation_decay_report(&u, r, depth, refine)?;
            Outcome::new(&rep)?.table("levels.csv", csv_rows(&rep.levels))
        }
        Command::Growth(a) => {
            let n = ctx.get("n", a.n, 1usize)?;
            let fname = ctx.get("function", a.function.clone(), "phi0".to_string())?;
            let r = ctx.get("r", a.r, 2.0f64)?;
            let support = ctx.get("support", a.support, 0u32)?;
            let max_m = ctx.get("max_m", a.max_m, 4usize)?;
            let refine = ctx.get("refine", a.refine, 0usize)?;
            let u = named_function(ctx, &fname, n)?;
            let rep = growth_report(&u, support, r, max_m, refine)?;
            Outcome::new(&rep)?.table("growth.csv", csv_rows(&rep.rows))
        }
        Command::Sobolev(SobolevCmd::Verify(a)) => {
            let p = params(ctx, &a.params)?;
            let samples = ctx.get("samples", a.samples, 100usize)?;
            let seed = seed(ctx)?;
            let refine = ctx.get("refine", a.refine, 6usize)?;
            let compare = ctx.opt("compare", a.compare)?.or(refine.checked_sub(1));
            let window = ctx.get("window", a.window, 0u32)?;
            let sample_level = ctx.get("sample_level", a.sample_level, 2usize)?;
            let opts = VerifyOptions { samples, seed, refine, compare, window, sample_level };
            let rep = sobolev_verify(&p, &opts)?;
            Outcome::new(&rep)?.table("samples.csv", |b| rep.write_csv(b))
        }
        Command::Bump(BumpCmd::Verify { depth }) => {
            let depth = ctx.get("depth", *depth, 10usize)?;
            Outcome::new(bump_gradient_check(depth)?)
        }
        Command::Essinf(a) => {
            let base = Word::parse(&ctx.get("base", a.base.clone(), String::new())?)?;
            let k = ctx.get("k", a.k, 12usize)?;
            Outcome::new(essinf_decay_check(&base, k)?)
        }
        Command::Spectral(SpectralCmd::Scan { max_len }) => {
            let max_len = ctx.get("max_len", *max_len, 3usize)?;
            let gens = Generators::default();
            let scan = minimal_complex_word(max_len, budget, &gens)?;
            let words: Vec<Word> = scan.rows.iter().map(|r| r.word.clone()).collect();
            let det = det_lower_bound_check(&words, &gens);
            let result = json!({
                "max_len": scan.max_len,
                "words": scan.rows.len(),
                "witnesses": scan.witnesses,
                "minimal_complex_length": scan.minimal_complex_length,
                "det_bound": det,
            });
            Outcome::new(result)?.table("scan.csv", |b| scan.write_csv(b))
        }
        Command::Spectral(SpectralCmd::Periodic { word, k_max }) => {
            let w = Word::parse(&ctx.get("word", word.clone(), "312".to_string())?)?;
            let k_max = ctx.get("k_max", *k_max, 12usize)?;
            let lim = periodic_limit(&w, k_max, &Generators::default())?;
            let product = DiskCache::from_env().m_product(&w)?;
            let mut v = serde_json::to_value(&lim).map_err(|e| Error::Internal(e.to_string()))?;
            v["product"] = serde_json::to_value(&product.0).map_err(|e| Error::Internal(e.to_string()))?;
            v["q_reduction"] = serde_json::to_value(q_reduction_check(w.len().min(6)))
                .map_err(|e| Error::Internal(e.to_string()))?;
            Outcome::new(v)?.table("periodic.csv", |b| lim.write_csv(b))
        }
        Command::Spectral(SpectralCmd::SharpDelta { max_level, ones, periodic, reps }) => {
            let max_level = ctx.get("max_level", *max_level, 8usize)?;
            let ones_s = ctx.get("ones", ones.clone(), "10,20,40".to_string())?;
            let ones: Vec<usize> = ones_s
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse().map_err(|_| Error::arg("ones", format!("bad length `{s}`"))))
                .collect::<Result<_>>()?;
            let periodic = Word::parse(&ctx.get("periodic", periodic.clone(), "312".to_string())?)?;
            let reps = ctx.get("reps", *reps, 12usize)?;
            if max_level > 20 {
                return Err(Error::arg("max_level", "at most 20"));
            }
            Outcome::new(sharp_delta_report(max_level, &ones, &periodic, reps))
        }
        Command::Condition(ConditionCmd::Check { sigma, n, delta_lo, delta_hi, constant, direction, max_len, max_blowup }) => {
            let n = ctx.get("n", *n, 1usize)?;
            let sigma = measure_value(ctx, "sigma", sigma.clone(), MeasureKind::Kusuoka)?;
            let lo = ctx.get("delta_lo", *delta_lo, 1.0f64)?;
            let hi = inf_value(ctx, "delta_hi", delta_hi.clone(), crate::sobolev::delta_s())?;
            let constant = ctx.get("constant", *constant, 1.0f64)?;
            let dir = match ctx.get("direction", direction.clone(), "M".to_string())?.as_str() {
                "M" => Direction::M,
                "M'" | "Mprime" | "M-prime" => Direction::MPrime,
                d => return Err(Error::arg("direction", format!("expected M or M', got `{d}`"))),
            };
            let max_len = ctx.get("max_len", *max_len, 6usize)?;
            let max_blowup = ctx.get("max_blowup", *max_blowup, 3u32)?;
            let size = (max_blowup as u128 + 1) * (0..=max_len).map(|m| 3u128.pow((m * n) as u32)).sum::<u128>();
            Error::check_budget("condition sample cells", size, budget)?;
            let sample = standard_sample(n, max_len, max_blowup);
            let rep = condition_check(&sigma, lo, hi, constant, &sample, dir)?;
            Outcome::new(&rep)?.table("cells.csv", |b| rep.write_csv(b))
        }
    }
}

fn measure_cmd(ctx: &mut Ctx, a: &MeasureArgs, exact: bool) -> Result<Outcome> {
    let n = ctx.get("n", a.n, 1usize)?;
    let kind_s = ctx.req::<String>("kind", a.kind.clone())?;
    let kind = match kind_s.trim() {
        "harmonic_energy" | "energy" => {
            let b = parse_triple("boundary", &ctx.req::<String>("boundary", a.boundary.clone())?)?;
            MeasureKind::HarmonicEnergy { boundary: b }
        }
        "dirac" | "dirac_corner" => {
            let p = ctx.req::<String>("point", a.point.clone())?;
            let parts: Vec<&str> = p.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::arg("point", "expected `k:word:corner`"));
            }
            let blowup = parts[0].parse().map_err(|_| Error::arg("point", "bad blow-up"))?;
            let corner = parts[2].parse().map_err(|_| Error::arg("point", "bad corner"))?;
            MeasureKind::DiracCorner(CornerSpec { blowup, word: Word::parse(parts[1])?, corner })
        }
        s => measure_from_str("kind", s)?,
    };
    let cell_s = match ctx.opt::<String>("cell", a.cell.clone())? {
        Some(s) => s,
        None => ctx.get("word", a.word.clone(), String::new())?,
    };
    let cell = Cell::parse(&cell_s, n)?;
    kind.validate(n)?;
    let value = if n == 1 && cell.blowup == 0 && matches!(kind, MeasureKind::Kusuoka) {
        let w = cell.word.coord(0);
        kusuoka_from_frob(DiskCache::from_env().z_product(&w)?.frob_sq(), w.len())
    } else {
        cell_measure(&kind, &cell)?
    };
    let mut v = json!({ "kind": kind, "cell": cell.to_string() });
    v["float"] = json!(q_to_f64(&value));
    if exact {
        v["value"] = json!(q_to_string(&value));
    }
    Outcome::new(v)
}
