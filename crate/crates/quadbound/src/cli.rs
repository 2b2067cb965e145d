//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a usage or domain error (the message names
//! the violated precondition), 2 when a verification fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use quadbound_core::genfun::{
    build_kernel, closed_count, pmf_table, series_family, verify_identities, CountFamily, CountQuery, Ensemble,
    Family, Statistic,
};
use quadbound_core::sampler::{ks_compare, Backend, DistanceSampler, Sampler, SampleConfig, BaseCondition};
use quadbound_core::scaling::{self as sc, Critical, Distribution, InnerRule, QuadratureConfig};
use quadbound_core::series::Rational;

use crate::figures::{figure_table, Figure};
use crate::format::{num, CodeRecord, Format, Table};
use crate::harness;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 2,
            _ => 1,
        }
    }
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "quadbound", version, about = "Distance statistics of quadrangulations with a boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form counts (a single number, or a table over n and p).
    Count(CountArgs),
    /// Coefficients of a generating function.
    Series(SeriesArgs),
    /// Exact identity suite and closed forms against series.
    Verify(VerifyArgs),
    /// Monte Carlo distance laws (or raw codes as JSON).
    Sample(SampleArgs),
    /// Scaling functions and critical values on a grid.
    Scaling(ScalingArgs),
    /// Data for one of the standard plots.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "verbatim")]
pub enum CountFamilyArg {
    W0,
    W,
    TildeW0,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long, value_enum, default_value_t = CountFamilyArg::W0)]
    pub family: CountFamilyArg,
    /// Area. With --p, prints one count; otherwise a table is printed.
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-perimeter.
    #[arg(long)]
    pub p: Option<usize>,
    /// Table range in n.
    #[arg(long, default_value_t = 10)]
    pub order_n: usize,
    /// Table range in p.
    #[arg(long, default_value_t = 5)]
    pub order_p: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "verbatim")]
pub enum SeriesFamilyArg {
    W,
    LogW,
    W0,
    Wd,
    LogWd,
    Gd,
    Td,
    TdSs,
    TildeW0,
    TildeWd,
    TildeWdPrime,
    TildeGd,
    OmegaD,
    GammaD,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, value_enum)]
    pub family: SeriesFamilyArg,
    /// Distance index for the d-dependent families.
    #[arg(long, default_value_t = 0)]
    pub d: usize,
    /// Arc lengths for TdSs.
    #[arg(long, default_value_t = 0)]
    pub s: usize,
    #[arg(long, default_value_t = 0)]
    pub s_prime: usize,
    /// Truncation order in g (area).
    #[arg(long, default_value_t = 8)]
    pub order_n: usize,
    /// Truncation order in the boundary weight.
    #[arg(long, default_value_t = 4)]
    pub order_p: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 20)]
    pub order_n: usize,
    #[arg(long, default_value_t = 10)]
    pub order_p: usize,
    /// Largest distance in the identity suite.
    #[arg(long, default_value_t = 5)]
    pub dmax: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Bulk,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    /// Conjugation where it applies, otherwise exact DP.
    Auto,
    Dp,
    Conjugation,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    /// Fixed half-perimeter (exclusive with --z).
    #[arg(long, conflicts_with = "z")]
    pub p: Option<usize>,
    /// Perimeter weight, as a decimal or a fraction (e.g. 0.05 or 1/20).
    #[arg(long)]
    pub z: Option<String>,
    #[arg(long, value_enum, default_value_t = StatisticArg::Bulk)]
    pub statistic: StatisticArg,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Emit the sampled codes (pointed, uniform) as JSON instead of a law.
    #[arg(long, visible_alias = "emit-codes")]
    pub dump_codes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "verbatim")]
pub enum ScalingFn {
    Phi,
    PhiBar,
    PhiBarSa,
    PhiHat,
    #[value(name = "phi_z")]
    PhiZ,
    #[value(name = "phi_tilde_Z")]
    PhiTildeZ,
    RhoBoundSuper,
    Rayleigh,
    RhoBarBound,
    RhoTildeBound,
    RhoTildeJoint,
    MeanDelta,
    RhoTildeSmallP,
    JointSmallP,
    JointLargeP,
    MeanDeltaSmallP,
    MeanDeltaLargeP,
    PhiBarLargeP,
    PhiHatLargeP,
    PhiBarSmallD,
    PhiHatSmallD,
    #[value(name = "g_crit2")]
    GCrit2,
    #[value(name = "g_tilde_crit")]
    GTildeCrit,
    #[value(name = "g_hat_crit")]
    GHatCrit,
    #[value(name = "x_crit")]
    XCrit,
    #[value(name = "x_tilde_crit")]
    XTildeCrit,
    #[value(name = "beta")]
    Beta,
    #[value(name = "beta_tilde")]
    BetaTilde,
    #[value(name = "mean_p_sub")]
    MeanPSub,
    #[value(name = "mean_p_super")]
    MeanPSuper,
    #[value(name = "A")]
    A,
    #[value(name = "A_tilde")]
    ATilde,
    #[value(name = "A_tilde_0")]
    ATilde0,
    #[value(name = "a")]
    SmallA,
    #[value(name = "b")]
    SmallB,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    /// Truncation of the Gaussian integral.
    #[arg(long, default_value_t = 8.0)]
    pub xi_max: f64,
    /// Trapezoid intervals (even).
    #[arg(long, default_value_t = 2048)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Evaluate the inner K integral by adaptive quadrature instead of erfcx.
    #[arg(long)]
    pub adaptive_inner: bool,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig, CliError> {
        let cfg = QuadratureConfig {
            xi_max: self.xi_max,
            nodes: self.nodes,
            tolerance: self.tolerance,
            inner: if self.adaptive_inner { InnerRule::Adaptive } else { InnerRule::ClosedForm },
        };
        cfg.validate().map_err(domain)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long = "fn", value_enum)]
    pub function: ScalingFn,
    /// Abscissa grid start:stop:step (D, delta, d, u, or the argument of a
    /// critical value).
    #[arg(long, visible_alias = "D", default_value = "0:3:0.05")]
    pub grid: String,
    #[arg(long = "P")]
    pub big_p: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long = "Z")]
    pub big_z: Option<f64>,
    /// Boundary separation for the joint law.
    #[arg(long)]
    pub u: Option<f64>,
    /// Loop weight for the critical values ĝ_crit, a and b.
    #[arg(long)]
    pub y: Option<f64>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, value_enum)]
    pub name: Figure,
    /// Override the plotted P values (comma separated).
    #[arg(long = "P", value_delimiter = ',')]
    pub big_p: Vec<f64>,
    /// Override the plotted z values.
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<f64>,
    /// Override the plotted Z values.
    #[arg(long = "Z", value_delimiter = ',')]
    pub big_z: Vec<f64>,
    /// Override the abscissa grid start:stop:step.
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

/// Inclusive grid start:stop:step.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Domain(format!("grid '{}' must be start:stop:step with step > 0 and stop >= start", s));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let (a, b, h) = (v[0], v[1], v[2]);
    if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / h + 1e-9).floor();
    if n > 1e6 {
        return Err(CliError::Domain(format!("grid '{}' has more than 10^6 points", s)));
    }
    // points are a + i h, so repeated runs give identical abscissae
    Ok((0..=n as usize).map(|i| a + i as f64 * h).collect())
}

/// Exact rational from "0.05", "1/20" or "3".
pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::Domain(format!("'{}' is not a decimal or a fraction", s));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    let (int_part, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.contains(|c: char| !c.is_ascii_digit()) || int_part.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{}{}", int_part, frac);
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    Ok(Rational::new(num, BigInt::from(10).pow(frac.len() as u32)))
}

fn rational_str(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Runs the CLI on `argv` (program name first), writing results to `stdout`
/// unless `--out` is given. Returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.out {
        Some(path) => match File::create(path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                dispatch(&cli, &mut w).and_then(|_| w.flush().map_err(CliError::from))
            }
            Err(e) => Err(CliError::Domain(format!("cannot create {}: {}", path.display(), e))),
        },
        None => dispatch(&cli, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e);
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, w: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Count(a) => count(a, cli.format, w),
        Command::Series(a) => series(a, cli.format, w),
        Command::Verify(a) => verify(a, cli.format, w),
        Command::Sample(a) => sample(a, cli.format, w),
        Command::Scaling(a) => scaling(a, cli.format, w),
        Command::Figure(a) => figure(a, cli.format, w),
    }
}

fn count_family(f: CountFamilyArg) -> CountFamily {
    match f {
        CountFamilyArg::W0 => CountFamily::W0,
        CountFamilyArg::W => CountFamily::W,
        CountFamilyArg::TildeW0 => CountFamily::TildeW0,
    }
}

fn count(a: &CountArgs, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    let family = count_family(a.family);
    if let (Some(n), Some(p)) = (a.n, a.p) {
        let c = closed_count(CountQuery { family, n, p }).map_err(domain)?;
        match format {
            Format::Csv => writeln!(w, "{}", c)?,
            Format::Json => writeln!(w, "{}", json!({ "family": format!("{:?}", a.family), "n": n, "p": p, "count": c.to_string() }))?,
        }
        return Ok(());
    }
    if a.n.is_some() != a.p.is_some() {
        return Err(CliError::Domain("give both --n and --p, or neither for a table".into()));
    }
    let mut t = Table::new(json!({ "family": format!("{:?}", a.family), "order_n": a.order_n, "order_p": a.order_p }), &["n", "p", "count"]);
    for n in 0..=a.order_n {
        for p in 1..=a.order_p {
            let c = closed_count(CountQuery { family, n, p }).map_err(domain)?;
            t.push(vec![n.to_string(), p.to_string(), c.to_string()]);
        }
    }
    t.write(w, format)?;
    Ok(())
}

fn series_family_of(a: &SeriesArgs) -> Family {
    use SeriesFamilyArg::*;
    match a.family {
        W => Family::W,
        LogW => Family::LogW,
        W0 => Family::W0,
        Wd => Family::Wd(a.d),
        LogWd => Family::LogWd(a.d),
        Gd => Family::Gd(a.d),
        Td => Family::Td(a.d),
        TdSs => Family::TdSs { d: a.d, s: a.s, s_prime: a.s_prime },
        TildeW0 => Family::TildeW0,
        TildeWd => Family::TildeWd(a.d),
        TildeWdPrime => Family::TildeWdPrime(a.d),
        TildeGd => Family::TildeGd(a.d),
        OmegaD => Family::OmegaD(a.d),
        GammaD => Family::GammaD(a.d),
    }
}

fn series(a: &SeriesArgs, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    let family = series_family_of(a);
    let k = build_kernel(a.order_n, a.order_p);
    let s = series_family(family, &k).map_err(domain)?;
    let meta = json!({ "family": format!("{:?}", family), "order_n": a.order_n, "order_p": a.order_p });
    let mut t = Table::new(meta, &["n", "p", "coefficient"]);
    for (n, p, c) in s.iter() {
        if !c.is_zero() {
            t.push(vec![n.to_string(), p.to_string(), rational_str(c)]);
        }
    }
    t.write(w, format)?;
    Ok(())
}

fn verify(a: &VerifyArgs, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    let k = build_kernel(a.order_n, a.order_p);
    let report = verify_identities(&k, a.dmax).map_err(domain)?;
    let mut checks: Vec<(String, bool)> = report.checks.iter().map(|c| (c.name.clone(), c.passed)).collect();
    for (fam, name) in [(CountFamily::W0, Family::W0), (CountFamily::W, Family::W), (CountFamily::TildeW0, Family::TildeW0)] {
        let s = series_family(name, &k).map_err(domain)?;
        let mut ok = true;
        for n in 0..=a.order_n {
            for p in 1..=a.order_p {
                let c = closed_count(CountQuery { family: fam, n, p }).map_err(domain)?;
                ok &= *s.coeff(n, p) == Rational::from_integer(c);
            }
        }
        checks.push((format!("closed-form count {:?} equals series coefficients", fam), ok));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    let meta = json!({ "order_n": a.order_n, "order_p": a.order_p, "dmax": a.dmax, "all_passed": failed.is_empty() });
    let mut t = Table::new(meta, &["check", "result"]);
    for (name, ok) in &checks {
        t.push(vec![name.clone(), if *ok { "PASS" } else { "FAIL" }.into()]);
    }
    t.write(w, format)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

/// Largest area for which `sample` also prints the exact law.
pub const EXACT_LAW_LIMIT: usize = 40;

fn sample(a: &SampleArgs, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    let ensemble = match (&a.p, &a.z) {
        (Some(p), None) => Ensemble::FixedNp { n: a.n, p: *p },
        (None, Some(z)) => Ensemble::FixedZ { n: a.n, z: parse_rational(z)? },
        _ => return Err(CliError::Domain("give exactly one of --p or --z".into())),
    };
    let statistic = match a.statistic {
        StatisticArg::Bulk => Statistic::BulkBoundary,
        StatisticArg::Boundary => Statistic::BoundaryBoundary,
    };
    let backend = match (a.backend, statistic) {
        (BackendArg::Dp, _) | (BackendArg::Auto, Statistic::BoundaryBoundary) => Backend::ExactDp,
        _ => Backend::Conjugation,
    };
    let ens_json = match &ensemble {
        Ensemble::FixedNp { n, p } => json!({ "n": n, "p": p }),
        Ensemble::FixedZ { n, z } => json!({ "n": n, "z": rational_str(z) }),
    };

    if a.dump_codes {
        let s = Sampler::new(SampleConfig { ensemble, condition: BaseCondition::MinLabelOne, backend }).map_err(domain)?;
        let codes = harness::sample_codes(&s, a.samples, a.seed).map_err(domain)?;
        let recs: Vec<CodeRecord> = codes.iter().map(CodeRecord::from).collect();
        let out = json!({ "ensemble": ens_json, "seed": a.seed, "backend": format!("{:?}", backend), "codes": recs });
        serde_json::to_writer(&mut *w, &out).map_err(|e| CliError::Io(e.into()))?;
        writeln!(w)?;
        return Ok(());
    }

    let sampler = DistanceSampler::new(ensemble.clone(), statistic, backend).map_err(domain)?;
    let hist = harness::sample_distances(&sampler, a.samples, a.seed).map_err(domain)?;
    let exact: Option<Vec<f64>> = if a.n <= EXACT_LAW_LIMIT {
        let order_p = match &ensemble {
            Ensemble::FixedNp { p, .. } => *p,
            Ensemble::FixedZ { .. } => 1,
        };
        let k = build_kernel(a.n, order_p.max(1));
        let law = pmf_table(&k, &ensemble, statistic).map_err(domain)?;
        Some(law.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect())
    } else {
        None
    };
    let mut meta = json!({
        "ensemble": ens_json.clone(),
        "n": a.n,
        "statistic": format!("{:?}", statistic),
        "backend": format!("{:?}", backend),
        "samples": a.samples,
        "seed": a.seed,
        "chunk": harness::CHUNK,
        "table_mode": if sampler.sampler().is_exact() { "exact" } else { "float" },
    });
    if let Some(p) = a.p {
        meta["p"] = json!(p);
    } else {
        meta["z"] = ens_json["z"].clone();
    }
    if let Some(ref e) = exact {
        let fit = ks_compare(&hist, e);
        meta["ks"] = json!(fit.ks);
        meta["chi2"] = json!(fit.chi2);
        meta["dof"] = json!(fit.dof);
    }
    let cols: &[&str] = if exact.is_some() { &["d", "count", "prob", "exact"] } else { &["d", "count", "prob"] };
    let mut t = Table::new(meta, cols);
    let len = hist.counts().len().max(exact.as_ref().map_or(0, |e| e.len()));
    let pmf = hist.pmf();
    for d in 0..len {
        let mut row = vec![d.to_string(), hist.counts().get(d).copied().unwrap_or(0).to_string(), num(pmf.get(d).copied().unwrap_or(0.0))];
        if let Some(ref e) = exact {
            row.push(num(e.get(d).copied().unwrap_or(0.0)));
        }
        t.push(row);
    }
    t.write(w, format)?;
    Ok(())
}

fn need(v: Option<f64>, flag: &str, f: ScalingFn) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Domain(format!("--{} is required for {:?}", flag, f)))
}

fn critical_of(f: ScalingFn) -> Option<Critical> {
    use ScalingFn::*;
    Some(match f {
        GCrit2 => Critical::GCrit2,
        GTildeCrit => Critical::GTildeCrit,
        GHatCrit => Critical::GHatCrit,
        XCrit => Critical::XCrit,
        XTildeCrit => Critical::XTildeCrit,
        Beta => Critical::Beta,
        BetaTilde => Critical::BetaTilde,
        MeanPSub => Critical::MeanPSub,
        MeanPSuper => Critical::MeanPSuper,
        A => Critical::A,
        ATilde => Critical::ATilde,
        ATilde0 => Critical::ATilde0,
        SmallA => Critical::SmallA,
        SmallB => Critical::SmallB,
        _ => return None,
    })
}

fn distribution_at(a: &ScalingArgs, x: f64) -> Result<Distribution, CliError> {
    use ScalingFn as F;
    let f = a.function;
    let p = || need(a.big_p, "P", f);
    Ok(match f {
        F::Phi => Distribution::Phi { d: x },
        F::PhiBar => Distribution::PhiBar { d: x, p: p()? },
        F::PhiBarSa => Distribution::PhiBarSa { d: x, p: p()? },
        F::PhiHat => Distribution::PhiHat { d: x, p: p()? },
        F::PhiZ => Distribution::PhiZ { d: x, z: need(a.z, "z", f)? },
        F::PhiTildeZ => Distribution::PhiTildeZ { d: x, big_z: need(a.big_z, "Z", f)? },
        F::RhoBoundSuper => Distribution::RhoBoundSuper { d: x, z: need(a.z, "z", f)? },
        F::Rayleigh => Distribution::Rayleigh { delta: x },
        F::RhoBarBound => Distribution::RhoBarBound { d: x, p: p()? },
        F::RhoTildeBound => Distribution::RhoTildeBound { delta: x, p: p()? },
        F::RhoTildeJoint => Distribution::RhoTildeJoint { delta: x, u: need(a.u, "u", f)?, p: p()? },
        F::MeanDelta => Distribution::MeanDelta { u: x, p: p()? },
        F::RhoTildeSmallP => Distribution::RhoTildeSmallP { delta: x },
        F::JointSmallP => Distribution::JointSmallP { delta: x, u: need(a.u, "u", f)? },
        F::JointLargeP => Distribution::JointLargeP { delta: x, u: need(a.u, "u", f)? },
        F::MeanDeltaSmallP => Distribution::MeanDeltaSmallP { u: x },
        F::MeanDeltaLargeP => Distribution::MeanDeltaLargeP { u: x },
        F::PhiBarLargeP => Distribution::PhiBarLargeP { d: x, p: p()? },
        F::PhiHatLargeP => Distribution::PhiHatLargeP { d: x, p: p()? },
        F::PhiBarSmallD => Distribution::PhiBarSmallD { d: x, p: p()? },
        F::PhiHatSmallD => Distribution::PhiHatSmallD { d: x, p: p()? },
        _ => unreachable!("critical values are handled separately"),
    })
}

fn scaling(a: &ScalingArgs, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    use rayon::prelude::*;
    let cfg = a.quad.config()?;
    let xs = parse_grid(&a.grid)?;
    let rows: Vec<(f64, f64, f64)> = if let Some(kind) = critical_of(a.function) {
        // a single --z, --Z or --y replaces the grid
        let single = match kind {
            Critical::GTildeCrit | Critical::XTildeCrit | Critical::BetaTilde | Critical::ATilde | Critical::ATilde0 => a.big_z,
            Critical::GHatCrit | Critical::SmallA | Critical::SmallB => a.y,
            _ => a.z,
        };
        let xs = single.map_or(xs, |v| vec![v]);
        xs.iter().map(|&x| sc::critical_value(kind, x).map(|v| (x, v, 0.0)).map_err(domain)).collect::<Result<_, _>>()?
    } else {
        // validate parameters once, before spawning work
        distribution_at(a, xs[0])?;
        xs.par_iter()
            .map(|&x| {
                let e = sc::distribution(distribution_at(a, x)?, &cfg).map_err(domain)?;
                Ok((x, e.value, e.error))
            })
            .collect::<Result<_, CliError>>()?
    };
    let meta = json!({
        "fn": format!("{:?}", a.function),
        "grid": a.grid,
        "P": a.big_p,
        "z": a.z,
        "Z": a.big_z,
        "u": a.u,
        "y": a.y,
        "quadrature": { "xi_max": cfg.xi_max, "nodes": cfg.nodes, "tolerance": cfg.tolerance, "inner": format!("{:?}", cfg.inner) },
    });
    let mut t = Table::new(meta, &["x", "value", "error_estimate"]);
    for (x, v, e) in rows {
        t.push(vec![num(x), num(v), num(e)]);
    }
    t.write(w, format)?;
    Ok(())
}

fn figure(a: &FigureArgs, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    let cfg = a.quad.config()?;
    let overrides = match a.name {
        Figure::PhiZ => &a.z,
        Figure::PhiTildeZ => &a.big_z,
        _ => &a.big_p,
    };
    let params = if overrides.is_empty() { a.name.default_params() } else { overrides.clone() };
    let xs = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => {
            let (s, e, h) = a.name.default_grid();
            parse_grid(&format!("{}:{}:{}", s, e, h))?
        }
    };
    let t = figure_table(a.name, &params, &xs, &cfg).map_err(domain)?;
    t.write(w, format)?;
    Ok(())
}
