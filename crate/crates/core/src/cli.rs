//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification claim fails, 2 on usage
//! or input errors. Indices on the command line and in CSV output are 1-based.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::certify::{certify_classes, certify_dimension, CertificateReport};
use crate::enumerate::{
    compare_with_reference, enumerate_sign_patterns, enumerate_w_classes, reference_w5,
};
use crate::error::{Error, Result};
use crate::experiments::{search_critical_exponent, tridiagonal_witness, Family};
use crate::exppoly::ScanConfig;
use crate::matcore::{check_dn, parse_matrix_with, spectral_decompose, SymMatrix, Tolerances};
use crate::signchange::{component_bound, parse_w_list, sign_change_matrix, validate_sign_change_matrix};

#[derive(Parser, Debug)]
#[command(name = "dnpower", version, about = "Fractional powers of doubly nonnegative matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Relative eigenvalue threshold for PSD and zero tests
    #[arg(long, global = true, default_value_t = 1e-10)]
    psd_tol: f64,

    /// Relative threshold below which exponential polynomial coefficients are dropped
    #[arg(long, global = true, default_value_t = 1e-10)]
    zero_tol: f64,

    /// Grid step for t-scans
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Bisection tolerance for negative-interval endpoints
    #[arg(long, global = true, default_value_t = ScanConfig::DEFAULT_ENDPOINT_TOL)]
    endpoint_tol: f64,

    /// Cap on worker threads (default: available cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write machine-readable output (JSON, or CSV for `scan`) to this path
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report whether a matrix is doubly nonnegative
    Check { file: PathBuf },
    /// Print the spectral power A^t
    Power {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Print the sign change matrix W
    Signchange { file: PathBuf },
    /// Enumerate W classes of dimension n
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        emit_patterns: bool,
    },
    /// Certify the critical exponent from W classes
    Certify {
        #[arg(long, required_unless_present = "w_file", conflicts_with = "w_file")]
        n: Option<usize>,
        #[arg(long)]
        w_file: Option<PathBuf>,
    },
    /// Build and verify a lower-bound witness
    Witness {
        #[arg(long, required = true)]
        tridiagonal: bool,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tabulate entries of A^t over a t-grid as CSV
    Scan {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        /// Entry `i,j` (1-based); repeatable, default all entries with i <= j
        #[arg(long = "entry", value_parser = parse_entry)]
        entries: Vec<(usize, usize)>,
    },
    /// Random search for large empirical critical exponents
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "mixed")]
        family: Family,
    },
}

fn parse_entry(s: &str) -> std::result::Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected i,j, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    let (i, j) = (parse(i)?, parse(j)?);
    if i == 0 || j == 0 {
        return Err("indices are 1-based".into());
    }
    Ok((i, j))
}

impl clap::builder::ValueParserFactory for Family {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Family>().map_err(|e| e.to_string()))
    }
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Ok,
    Failed,
}

/// Formats `v` like C's `%.17g`.
pub fn format_g17(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if (-5..17).contains(&exp) {
        let s = if exp >= 0 {
            let (int, frac) = digits.split_at(exp as usize + 1);
            format!("{int}.{frac}")
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        let s = s.trim_end_matches('0').trim_end_matches('.');
        format!("{sign}{s}")
    } else {
        let (int, frac) = digits.split_at(1);
        let frac = frac.trim_end_matches('0');
        let m = if frac.is_empty() { int.to_string() } else { format!("{int}.{frac}") };
        let es = if exp < 0 { '-' } else { '+' };
        format!("{sign}{m}e{es}{:02}", exp.abs())
    }
}

/// Writes `t,i,j,value` rows (1-based indices) for each grid point and entry.
pub fn emit_scan(a: &SymMatrix, scan: &ScanConfig, entries: &[(usize, usize)], tol: &Tolerances, out: &mut dyn Write) -> Result<()> {
    let n = a.n();
    if let Some(&(i, j)) = entries.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let dec = spectral_decompose(a, tol)?;
    let io = |e: io::Error| Error::InvalidArgument(format!("write failed: {e}"));
    writeln!(out, "t,i,j,value").map_err(io)?;
    for t in scan.grid() {
        let p = dec.power(t)?;
        for &(i, j) in entries {
            writeln!(out, "{},{},{},{}", format_g17(t), i + 1, j + 1, format_g17(p.get(i, j))).map_err(io)?;
        }
    }
    Ok(())
}

/// Runs the CLI on `argv` (including the program name) with the process streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing the human-readable summary to `out` and diagnostics to `err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let pool = match cli.global.threads {
        Some(0) => {
            let _ = writeln!(err, "error: --threads must be positive");
            return 2;
        }
        Some(k) => rayon::ThreadPoolBuilder::new().num_threads(k).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&cli, &mut buf));
    let _ = out.write_all(&buf);
    match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn write_out(path: &Option<PathBuf>, contents: &str) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, contents).map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    if path.is_none() {
        return Ok(());
    }
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write_out(path, &(s + "\n"))
}

fn say(out: &mut dyn Write, s: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", s.as_ref()).map_err(|e| Error::InvalidArgument(format!("write failed: {e}")))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    let g = &cli.global;
    let tol = Tolerances { psd_tol: g.psd_tol, zero_tol: g.zero_tol, ..Tolerances::default() };
    let load = |path: &Path| parse_matrix_with(&read_text(path)?, tol.sym_tol);
    let scan_for = |n: usize| -> Result<ScanConfig> {
        let mut s = ScanConfig::for_dimension(n);
        s.endpoint_tol = g.endpoint_tol;
        if let Some(step) = g.step {
            s.step = step;
            s.t_min = step;
        }
        s.validate()?;
        Ok(s)
    };

    match &cli.command {
        Command::Check { file } => {
            let a = load(file)?;
            let rep = check_dn(&a, &tol);
            say(
                out,
                format!(
                    "is_dn={} is_nonnegative={} is_psd={} min_entry={} min_eigenvalue={} invertible={} irreducible={} distinct_eigenvalues={}",
                    rep.is_dn,
                    rep.is_nonnegative,
                    rep.is_psd,
                    rep.min_entry,
                    rep.min_eigenvalue,
                    rep.is_invertible,
                    rep.is_irreducible,
                    rep.num_distinct_eigenvalues
                ),
            )?;
            write_json(&g.out, &rep)?;
            Ok(if rep.is_dn { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Power { file, t } => {
            let a = load(file)?;
            let p = spectral_decompose(&a, &tol)?.power(*t)?;
            say(out, p.to_text().trim_end())?;
            #[derive(Serialize)]
            struct PowerReport<'a> {
                t: f64,
                power: &'a SymMatrix,
            }
            write_json(&g.out, &PowerReport { t: *t, power: &p })?;
            Ok(Outcome::Ok)
        }
        Command::Signchange { file } => {
            let a = load(file)?;
            let an = sign_change_matrix(&spectral_decompose(&a, &tol)?, &tol)?;
            say(out, an.w.to_text().trim_end())?;
            let violations = validate_sign_change_matrix(&an.w).err().unwrap_or_default();
            say(out, format!("generic={} valid={}", an.generic, violations.is_empty()))?;
            for v in &violations {
                say(out, format!("violation: {v}"))?;
            }
            #[derive(Serialize)]
            struct SignChangeReport<'a> {
                w: &'a crate::signchange::SignChangeMatrix,
                generic: bool,
                violations: Vec<String>,
                component_bounds: Vec<Vec<u32>>,
            }
            let n = an.w.n();
            let rep = SignChangeReport {
                w: &an.w,
                generic: an.generic,
                violations: violations.iter().map(ToString::to_string).collect(),
                component_bounds: (0..n).map(|i| (0..n).map(|j| component_bound(an.w.get(i, j))).collect()).collect(),
            };
            write_json(&g.out, &rep)?;
            Ok(if violations.is_empty() { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Enumerate { n, emit_patterns } => {
            let n = *n;
            if *emit_patterns {
                for p in enumerate_sign_patterns(n)? {
                    say(out, format!("{p}"))?;
                }
            }
            let classes = enumerate_w_classes(n)?;
            let text: Vec<String> = classes.iter().map(|w| w.to_text()).collect();
            say(out, text.join("\n").trim_end())?;
            say(out, format!("classes={}", classes.len()))?;
            let mut outcome = Outcome::Ok;
            let mut comparison = None;
            if n == 5 {
                let cmp = compare_with_reference(&classes, &reference_w5())?;
                say(
                    out,
                    format!(
                        "reference_classes={} missing={} extra={}",
                        cmp.reference_classes,
                        cmp.missing.len(),
                        cmp.extra.len()
                    ),
                )?;
                for w in &cmp.extra {
                    say(out, format!("discrepancy: class not in the reference list\n{}", w.to_text().trim_end()))?;
                }
                for w in &cmp.missing {
                    say(out, format!("missing reference class\n{}", w.to_text().trim_end()))?;
                }
                if !cmp.missing.is_empty() {
                    outcome = Outcome::Failed;
                }
                comparison = Some(cmp);
            }
            #[derive(Serialize)]
            struct EnumerateReport<'a> {
                n: usize,
                classes: &'a [crate::signchange::SignChangeMatrix],
                comparison: Option<crate::enumerate::ClassComparison>,
            }
            write_json(&g.out, &EnumerateReport { n, classes: &classes, comparison })?;
            Ok(outcome)
        }
        Command::Certify { n, w_file } => {
            let rep: CertificateReport = match (n, w_file) {
                (Some(n), _) => certify_dimension(*n)?,
                (None, Some(path)) => {
                    let list = parse_w_list(&read_text(path)?)?;
                    let n = list.first().map(|w| w.n()).ok_or_else(|| Error::Malformed("no W matrices".into()))?;
                    certify_classes(n, &list)?
                }
                (None, None) => unreachable!("clap enforces one of --n/--w-file"),
            };
            say(out, rep.summary_line())?;
            write_json(&g.out, &rep)?;
            Ok(if rep.certified() { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Witness { tridiagonal: _, n, seed } => {
            if *n < 3 {
                return Err(Error::DimensionTooSmall { n: *n, min: 3 });
            }
            let scan = scan_for(*n)?;
            let rep = tridiagonal_witness(*n, *seed, &scan, &tol)?;
            for c in &rep.claims {
                say(out, format!("[{}] {}", if c.verified { "ok" } else { "FAILED" }, c.description))?;
            }
            let window = rep.negative_window.map_or("none".to_string(), |(a, b)| format!("({a:.9}, {b:.9})"));
            say(
                out,
                format!(
                    "verified={} negative_window={} empirical_critexp={:.9}",
                    rep.verified(),
                    window,
                    rep.empirical_critexp
                ),
            )?;
            write_json(&g.out, &rep)?;
            Ok(if rep.verified() { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Scan { file, t_min, t_max, entries } => {
            let a = load(file)?;
            let n = a.n();
            let mut scan = ScanConfig::new(*t_min, *t_max, g.step.unwrap_or(ScanConfig::DEFAULT_STEP))?;
            scan.endpoint_tol = g.endpoint_tol;
            let zero_based: Vec<(usize, usize)> = if entries.is_empty() {
                (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
            } else {
                entries.iter().map(|&(i, j)| (i - 1, j - 1)).collect()
            };
            if let Some(&(i, j)) = zero_based.iter().find(|&&(i, j)| i >= n || j >= n) {
                return Err(Error::IndexOutOfRange { i: i + 1, j: j + 1, n });
            }
            let mut csv = Vec::new();
            emit_scan(&a, &scan, &zero_based, &tol, &mut csv)?;
            let csv = String::from_utf8(csv).expect("ascii output");
            if g.out.is_some() {
                write_out(&g.out, &csv)?;
                say(out, format!("wrote {} rows", csv.lines().count() - 1))?;
            } else {
                out.write_all(csv.as_bytes()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            }
            Ok(Outcome::Ok)
        }
        Command::Search { n, trials, seed, family } => {
            if *n > crate::experiments::MAX_SEARCH_N {
                return Err(Error::DimensionTooLarge { n: *n, max: crate::experiments::MAX_SEARCH_N });
            }
            let scan = scan_for(*n)?;
            let s = search_critical_exponent(*n, *trials, *seed, *family, &scan, &tol)?;
            say(
                out,
                format!(
                    "max_found={:.9} argmax_trial={} distinct_eigenvalues={} histogram={:?}",
                    s.max_found, s.argmax_trial, s.argmax_distinct_eigenvalues, s.histogram
                ),
            )?;
            write_json(&g.out, &s)?;
            Ok(Outcome::Ok)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_formatting() {
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(0.01), "0.01");
        assert_eq!(format_g17(4.0), "4");
        assert_eq!(format_g17(-2.5), "-2.5");
        assert_eq!(format_g17(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(format_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_g17(1.5e20), "1.5e+20");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(0.0), "0");
    }

    #[test]
    fn entry_parser() {
        assert_eq!(parse_entry("1,4"), Ok((1, 4)));
        assert!(parse_entry("0,1").is_err());
        assert!(parse_entry("14").is_err());
    }

    #[test]
    fn emit_scan_examples() {
        let tol = Tolerances::default();
        let mut buf = Vec::new();
        let scan = ScanConfig::new(1.0, 2.0, 1.0).unwrap();
        emit_scan(&SymMatrix::identity(2), &scan, &[(0, 0)], &tol, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,i,j,value\n1,1,1,1\n2,1,1,1\n");

        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let mut buf = Vec::new();
        emit_scan(&a, &ScanConfig::new(2.0, 2.0 + 1e-12, 1.0).unwrap(), &[(0, 1)], &tol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let v: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert!((v - 4.0).abs() < 1e-9);

        let err = emit_scan(&a, &scan, &[(0, 2)], &tol, &mut Vec::new()).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { i: 0, j: 2, n: 2 });
    }
}
