//! Subcommands of the `miso-capacity` binary. Each command writes its table
//! to `out` and notices to `err`, and returns the process exit code.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use miso_capacity::asymptotics::{high_snr_gap, low_snr_slope};
use miso_capacity::lower::{
    lower_bound_epi_with, lower_bound_uniform, optimize_nu, BoundEvaluation, BoundKind, NuOptimum,
};
use miso_capacity::oracles::{
    bruteforce_vmax, monte_carlo_mutual_information, mutual_information, AggregateLaw, SandwichContext, SandwichOptions,
};
use miso_capacity::upper::duality::{upper_bound_duality_with, DualitySearch};
use miso_capacity::upper::siso::{upper_bound_siso_with, SisoProvider, TabulatedProvider, VarianceProvider};
use miso_capacity::upper::{vmax, vmax_evaluation, VmaxResult};
use miso_capacity::{ChannelGains, Error, Noise, PowerBudget};

pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "miso-capacity", version, about = "Capacity bounds for the MISO optical intensity channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep capacity bounds over an amplitude grid.
    Bounds(BoundsArgs),
    /// Maximum input variance and its achieving law.
    Vmax(VmaxArgs),
    /// High-SNR gap to the uniform-input asymptote over a grid of alpha.
    Gap(GapArgs),
    /// Low-SNR capacity slope over a grid of alpha.
    Slope(SlopeArgs),
    /// Check bound ordering against the mutual-information oracle.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DbConvention {
    /// amp_db = 10 log10(A / sigma)
    #[value(name = "10log")]
    TenLog,
    /// amp_db = 20 log10(A / sigma)
    #[value(name = "20log")]
    TwentyLog,
}

impl DbConvention {
    pub fn amplitude(self, amp_db: f64, sigma: f64) -> f64 {
        match self {
            DbConvention::TenLog => sigma * 10f64.powf(amp_db / 10.0),
            DbConvention::TwentyLog => sigma * 10f64.powf(amp_db / 20.0),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// LED gains, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "3,2,1.5", allow_hyphen_values = true)]
    pub gains: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = -15.0, allow_hyphen_values = true)]
    pub amin_db: f64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub amax_db: f64,
    #[arg(long, default_value_t = 0.5)]
    pub step_db: f64,
    #[arg(long, value_enum, default_value = "10log")]
    pub db_convention: DbConvention,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Significant digits of printed numbers.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,
}

#[derive(Args, Debug, Clone)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0.6)]
    pub alpha: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Bounds to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "lower-epi,lower-uniform,upper-siso,upper-vmax,upper-duality")]
    pub bounds: Vec<String>,
    /// Table of `s_nt A / sigma, capacity_nats` rows used for upper-siso.
    #[arg(long)]
    pub siso_table: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VmaxArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GapArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// `start:step:stop` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0.05:0.05:1")]
    pub alphas: String,
    /// Print the magnitude of the gap instead of its (nonpositive) value.
    #[arg(long)]
    pub positive: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SlopeArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// `start:step:stop` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0.05:0.05:1")]
    pub alphas: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0.6)]
    pub alpha: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Seed of the random oracles.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random laws tried by the brute-force variance oracle.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Samples of the Monte-Carlo information estimate.
    #[arg(long, default_value_t = 200_000)]
    pub mc_samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Harness self-test: `BOUND:OFFSET` shifts one bound before the checks.
    #[arg(long, hide = true)]
    pub tamper: Option<String>,
}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NoConvergence(_)) => EXIT_NO_CONVERGENCE,
        _ => EXIT_USAGE,
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Bounds(a) => cmd_bounds(&a, out, err),
        Command::Vmax(a) => cmd_vmax(&a, out),
        Command::Gap(a) => cmd_gap(&a, out),
        Command::Slope(a) => cmd_slope(&a, out),
        Command::Verify(a) => cmd_verify(&a, out, err),
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits as usize - 1, x).parse().unwrap_or(x)
}

/// Formats `x` with `digits` significant digits, switching to exponent
/// notation for very small or large magnitudes.
pub fn fmt_num(x: f64, digits: u32) -> String {
    let r = round_sig(x, digits);
    if r == 0.0 {
        return "0".into();
    }
    let mag = r.abs();
    if (1e-4..1e9).contains(&mag) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn channel(args: &ChannelArgs) -> Result<ChannelGains> {
    ChannelGains::new(&args.gains).context("invalid --gains")
}

fn amplitude_grid(g: &GridArgs) -> Result<Vec<(f64, f64)>> {
    if !(g.step_db > 0.0) || !g.step_db.is_finite() {
        bail!("--step-db must be positive");
    }
    if !(g.amax_db >= g.amin_db) {
        bail!("--amax-db must not be below --amin-db");
    }
    Noise::new(g.sigma).context("invalid --sigma")?;
    let n = ((g.amax_db - g.amin_db) / g.step_db + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| {
            let db = g.amin_db + i as f64 * g.step_db;
            (db, g.db_convention.amplitude(db, g.sigma))
        })
        .collect())
}

fn parse_alpha_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number `{s}` in alpha grid"));
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || !(stop >= start) {
                bail!("alpha grid `{spec}` must have a positive step and stop >= start");
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => bail!("alpha grid must be `start:step:stop` or a comma-separated list"),
    }
}

fn witness_text(e: &BoundEvaluation, digits: u32) -> String {
    let w = &e.witnesses;
    let mut parts = Vec::new();
    let mut scalar = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            parts.push(format!("{name}={}", fmt_num(v, digits)));
        }
    };
    scalar("lambda", w.lambda);
    scalar("mu", w.mu);
    scalar("a", w.a);
    scalar("delta", w.delta);
    scalar("gamma", w.gamma);
    scalar("gap", w.certificate_gap);
    if let Some(p) = &w.p {
        let list: Vec<String> = p.iter().map(|v| fmt_num(*v, digits)).collect();
        parts.push(format!("p={}", list.join("|")));
    }
    parts.join(";")
}

fn rounded_json(v: serde_json::Value, digits: u32) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x, digits)))
            .map_or(Value::Number(n), Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(|x| rounded_json(x, digits)).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, rounded_json(x, digits))).collect()),
        other => other,
    }
}

struct SweepRow {
    amp_db: f64,
    amplitude: f64,
    eval: BoundEvaluation,
}

#[derive(Serialize)]
struct SweepRowJson<'a> {
    amp_db: f64,
    amplitude: f64,
    bound: &'a str,
    value_nats: f64,
    witness: serde_json::Value,
}

/// Amplitude-independent state shared by the sweep.
struct BoundsPlan {
    kinds: Vec<BoundKind>,
    nu: Option<NuOptimum>,
    variance: Option<VmaxResult>,
    siso: Box<dyn SisoProvider>,
}

fn plan_bounds(args: &BoundsArgs, ch: &ChannelGains, err: &mut dyn Write) -> Result<BoundsPlan> {
    let mut kinds = Vec::new();
    for name in &args.bounds {
        let kind: BoundKind = name.parse()?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    PowerBudget::new(ch, 1.0, args.alpha).context("invalid --alpha")?;
    let wants_nu = kinds.iter().any(|k| matches!(k, BoundKind::LowerEpi | BoundKind::UpperDuality));
    let nu = if wants_nu {
        match optimize_nu(ch, args.alpha) {
            Ok(nu) => Some(nu),
            Err(e @ (Error::Regime(_) | Error::MisoOnly)) => {
                for k in kinds.iter().filter(|k| matches!(k, BoundKind::LowerEpi | BoundKind::UpperDuality)) {
                    writeln!(err, "skipping {k}: {e}")?;
                }
                kinds.retain(|k| !matches!(k, BoundKind::LowerEpi | BoundKind::UpperDuality));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    if kinds.contains(&BoundKind::LowerUniform) && args.alpha < ch.alpha_threshold() {
        writeln!(
            err,
            "skipping {}: alpha = {} < alpha_th = {}",
            BoundKind::LowerUniform,
            args.alpha,
            ch.alpha_threshold()
        )?;
        kinds.retain(|k| *k != BoundKind::LowerUniform);
    }
    let variance = kinds
        .contains(&BoundKind::UpperVmax)
        .then(|| PowerBudget::new(ch, 1.0, args.alpha).map(|b| vmax(ch, &b)))
        .transpose()?;
    let siso: Box<dyn SisoProvider> = match &args.siso_table {
        Some(path) => Box::new(TabulatedProvider::from_path(path)?),
        None => Box::new(VarianceProvider),
    };
    kinds.sort_by_key(|k| k.name());
    Ok(BoundsPlan { kinds, nu, variance, siso })
}

fn evaluate_point(
    plan: &BoundsPlan,
    ch: &ChannelGains,
    alpha: f64,
    noise: &Noise,
    amp_db: f64,
    amplitude: f64,
) -> std::result::Result<Vec<SweepRow>, Error> {
    let budget = PowerBudget::new(ch, amplitude, alpha)?;
    let search = DualitySearch::default();
    plan.kinds
        .iter()
        .map(|kind| {
            let eval = match kind {
                BoundKind::LowerEpi => lower_bound_epi_with(plan.nu.as_ref().expect("planned"), ch, &budget, noise)?,
                BoundKind::LowerUniform => lower_bound_uniform(ch, &budget, noise)?,
                BoundKind::UpperSiso => upper_bound_siso_with(plan.siso.as_ref(), ch, &budget, noise)?,
                BoundKind::UpperVmax => {
                    vmax_evaluation(plan.variance.as_ref().expect("planned"), amplitude, noise.sigma())
                }
                BoundKind::UpperDuality => {
                    upper_bound_duality_with(ch, &budget, noise, &search, plan.nu.as_ref().expect("planned"))?
                }
            };
            if !eval.value.is_finite() {
                return Err(Error::NoConvergence(format!("{kind} is not finite at A = {amplitude}")));
            }
            Ok(SweepRow { amp_db, amplitude, eval })
        })
        .collect()
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let ch = channel(&args.channel)?;
    let grid = amplitude_grid(&args.grid)?;
    let noise = Noise::new(args.grid.sigma)?;
    let plan = plan_bounds(args, &ch, err)?;
    let rows: Vec<Vec<SweepRow>> = grid
        .par_iter()
        .map(|&(db, a)| evaluate_point(&plan, &ch, args.alpha, &noise, db, a))
        .collect::<std::result::Result<_, _>>()?;
    let digits = args.output.precision;
    if args.output.format == Format::Csv {
        writeln!(out, "amp_db,amplitude,bound,value_nats,witness")?;
    }
    for row in rows.iter().flatten() {
        match args.output.format {
            Format::Csv => writeln!(
                out,
                "{},{},{},{},{}",
                fmt_num(row.amp_db, digits),
                fmt_num(row.amplitude, digits),
                row.eval.kind,
                fmt_num(row.eval.value, digits),
                witness_text(&row.eval, digits)
            )?,
            Format::Json => {
                let json = SweepRowJson {
                    amp_db: round_sig(row.amp_db, digits),
                    amplitude: round_sig(row.amplitude, digits),
                    bound: row.eval.kind.name(),
                    value_nats: round_sig(row.eval.value, digits),
                    witness: rounded_json(serde_json::to_value(&row.eval.witnesses)?, digits),
                };
                writeln!(out, "{}", serde_json::to_string(&json)?)?;
            }
        }
    }
    Ok(0)
}

pub fn cmd_vmax(args: &VmaxArgs, out: &mut dyn Write) -> Result<u8> {
    let ch = channel(&args.channel)?;
    let budget = PowerBudget::new(&ch, 1.0, args.alpha).context("invalid --alpha")?;
    let r = vmax(&ch, &budget);
    let d = args.output.precision;
    match args.output.format {
        Format::Csv => {
            writeln!(out, "# gamma = {}", fmt_num(r.gamma, d))?;
            writeln!(out, "# V_max = {} * A^2", fmt_num(r.gamma, d))?;
            writeln!(out, "# certificate_gap = {}", fmt_num(r.certificate_gap, d))?;
            writeln!(out, "index,atom_over_amplitude,mass")?;
            for (k, (atom, mass)) in r.law.atoms.iter().zip(&r.law.masses).enumerate() {
                if *mass > 0.0 {
                    writeln!(out, "{k},{},{}", fmt_num(*atom, d), fmt_num(*mass, d))?;
                }
            }
        }
        Format::Json => {
            let json = serde_json::json!({
                "gamma": round_sig(r.gamma, d),
                "certificate_gap": round_sig(r.certificate_gap, d),
                "atoms_over_amplitude": rounded_json(serde_json::to_value(&r.law.atoms)?, d),
                "masses": rounded_json(serde_json::to_value(&r.law.masses)?, d),
            });
            writeln!(out, "{json}")?;
        }
    }
    Ok(0)
}

fn check_alpha_grid(ch: &ChannelGains, alphas: &[f64]) -> Result<()> {
    let nt = ch.nt() as f64;
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && **a <= nt + 1e-12)) {
        bail!("alpha = {bad} outside (0, {nt}]");
    }
    Ok(())
}

pub fn cmd_gap(args: &GapArgs, out: &mut dyn Write) -> Result<u8> {
    let ch = channel(&args.channel)?;
    let alphas = parse_alpha_grid(&args.alphas)?;
    check_alpha_grid(&ch, &alphas)?;
    let gaps = alphas
        .par_iter()
        .map(|&a| high_snr_gap(&ch, a.min(ch.nt() as f64)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let d = args.output.precision;
    let sign = if args.positive { -1.0 } else { 1.0 };
    if args.output.format == Format::Csv {
        writeln!(out, "alpha,gap_nats,lambda_star,mu_star")?;
    }
    for (alpha, g) in alphas.iter().zip(&gaps) {
        let gap = sign * g.gap + 0.0;
        match args.output.format {
            Format::Csv => {
                let opt = |v: Option<f64>| v.map(|x| fmt_num(x, d)).unwrap_or_default();
                writeln!(out, "{},{},{},{}", fmt_num(*alpha, d), fmt_num(gap, d), opt(g.lambda_star), opt(g.mu_star))?;
            }
            Format::Json => {
                let json = serde_json::json!({
                    "alpha": round_sig(*alpha, d),
                    "gap_nats": round_sig(gap, d),
                    "lambda_star": g.lambda_star.map(|x| round_sig(x, d)),
                    "mu_star": g.mu_star.map(|x| round_sig(x, d)),
                });
                writeln!(out, "{json}")?;
            }
        }
    }
    Ok(0)
}

pub fn cmd_slope(args: &SlopeArgs, out: &mut dyn Write) -> Result<u8> {
    let ch = channel(&args.channel)?;
    let alphas = parse_alpha_grid(&args.alphas)?;
    check_alpha_grid(&ch, &alphas)?;
    let d = args.output.precision;
    if args.output.format == Format::Csv {
        writeln!(out, "alpha,gamma,gamma_over_2")?;
    }
    for &alpha in &alphas {
        let slope = low_snr_slope(&ch, alpha.min(ch.nt() as f64))?;
        match args.output.format {
            Format::Csv => writeln!(out, "{},{},{}", fmt_num(alpha, d), fmt_num(2.0 * slope, d), fmt_num(slope, d))?,
            Format::Json => writeln!(
                out,
                "{}",
                serde_json::json!({
                    "alpha": round_sig(alpha, d),
                    "gamma": round_sig(2.0 * slope, d),
                    "gamma_over_2": round_sig(slope, d),
                })
            )?,
        }
    }
    Ok(0)
}

fn parse_tamper(spec: &str) -> Result<(BoundKind, f64)> {
    let (name, offset) = spec.split_once(':').context("--tamper expects BOUND:OFFSET")?;
    Ok((name.parse()?, offset.parse().context("bad tamper offset")?))
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let ch = channel(&args.channel)?;
    let grid = amplitude_grid(&args.grid)?;
    let noise = Noise::new(args.grid.sigma)?;
    let options =
        SandwichOptions { tamper: args.tamper.as_deref().map(parse_tamper).transpose()?, ..SandwichOptions::default() };
    let ctx = SandwichContext::new(&ch, args.alpha, &noise, options)?;
    let rows = grid.par_iter().map(|&(_, a)| ctx.point(a)).collect::<std::result::Result<Vec<_>, _>>()?;

    let d = args.output.precision;
    let mut violations = Vec::new();
    if args.output.format == Format::Csv {
        writeln!(out, "amp_db,amplitude,quantity,value_nats")?;
    }
    for ((db, _), row) in grid.iter().zip(&rows) {
        violations.extend(ctx.violations(row).into_iter().map(|v| v.to_string()));
        let mut entries: Vec<(&str, f64)> = row.lower.iter().map(|(k, v)| (k.name(), *v)).collect();
        entries.push(("mutual-information", row.mutual_information.value));
        entries.extend(row.upper.iter().map(|(k, v)| (k.name(), *v)));
        entries.sort_by(|a, b| a.0.cmp(b.0));
        for (name, value) in entries {
            match args.output.format {
                Format::Csv => {
                    writeln!(out, "{},{},{},{}", fmt_num(*db, d), fmt_num(row.amplitude, d), name, fmt_num(value, d))?
                }
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::json!({
                        "amp_db": round_sig(*db, d),
                        "amplitude": round_sig(row.amplitude, d),
                        "quantity": name,
                        "value_nats": round_sig(value, d),
                    })
                )?,
            }
        }
    }

    // Variance program against the brute-force search.
    let unit = PowerBudget::new(&ch, 1.0, args.alpha)?;
    let exact = vmax(&ch, &unit);
    let bf = bruteforce_vmax(&ch, &unit, args.samples.max(1), args.seed)?;
    if bf.variance > exact.certified_gamma() + 1e-9 {
        violations.push(format!(
            "brute-force variance {} exceeds certified gamma {}",
            bf.variance,
            exact.certified_gamma()
        ));
    }
    if bf.variance < exact.gamma - 1e-6 {
        violations.push(format!("brute-force variance {} misses gamma {}", bf.variance, exact.gamma));
    }

    // Quadrature against Monte Carlo for the input used at the first grid point.
    if let Some(&(_, a)) = grid.first() {
        let law = AggregateLaw::from_discrete(&vmax(&ch, &PowerBudget::new(&ch, a.max(1.0), args.alpha)?).law);
        let quad = mutual_information(&law, &noise, 1e-9)?;
        let (mc, se) = monte_carlo_mutual_information(&law, &noise, args.mc_samples.max(2), args.seed)?;
        if (mc - quad.value).abs() > 4.0 * se + 1e-9 {
            violations.push(format!("Monte-Carlo information {mc} (se {se}) disagrees with quadrature {}", quad.value));
        }
    }

    for v in &violations {
        writeln!(err, "violation: {v}")?;
    }
    if violations.is_empty() {
        Ok(0)
    } else {
        writeln!(err, "{} violation(s)", violations.len())?;
        Ok(EXIT_VIOLATION)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_num(4.714702109238, 6), "4.7147");
        assert_eq!(fmt_num(0.000582878123, 3), "0.000583");
        assert_eq!(fmt_num(1.249e-16, 6), "1.249e-16");
        assert_eq!(fmt_num(-0.0, 6), "0");
        assert_eq!(fmt_num(100.0, 6), "100");
    }

    #[test]
    fn alpha_grids() {
        let g = parse_alpha_grid("0.05:0.05:1").unwrap();
        assert_eq!(g.len(), 20);
        assert!((g[19] - 1.0).abs() < 1e-12);
        assert_eq!(parse_alpha_grid("0.2, 0.6").unwrap(), vec![0.2, 0.6]);
        assert!(parse_alpha_grid("1:0:2").is_err());
        assert!(parse_alpha_grid("a:b").is_err());
    }

    #[test]
    fn amplitude_grid_is_inclusive() {
        let grid =
            GridArgs { sigma: 2.0, amin_db: -15.0, amax_db: 20.0, step_db: 0.5, db_convention: DbConvention::TenLog };
        let g = amplitude_grid(&grid).unwrap();
        assert_eq!(g.len(), 71);
        assert!((g[70].1 - 200.0).abs() < 1e-9);
        let twenty = GridArgs { db_convention: DbConvention::TwentyLog, ..grid };
        assert!((amplitude_grid(&twenty).unwrap()[70].1 - 20.0).abs() < 1e-9);
    }

    #[test]
    fn no_convergence_maps_to_its_own_code() {
        let e = anyhow::Error::from(Error::NoConvergence("x".into()));
        assert_eq!(exit_code(&e), EXIT_NO_CONVERGENCE);
        assert_eq!(exit_code(&anyhow::anyhow!("bad flag")), EXIT_USAGE);
    }
}
