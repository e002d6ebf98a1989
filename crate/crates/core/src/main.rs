use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pinch_core::certify::{
    certificate_json, certify_with, table, table_csv, table_json, to_canonical_json,
    CertifyOptions, DEFAULT_BUDGET, DEFAULT_SEED,
};
use pinch_core::curvature::max_abs_curvature;
use pinch_core::exactalg::{build_polynomial, PolySpec};
use pinch_core::solvgroup::assemble_generator;
use pinch_core::spectra::{cross_check, roots_closed_form, verify_spectral_bound};
use pinch_core::{Error, Result};

const EXIT_FAILED: u8 = 2;
const EXIT_ERROR: u8 = 3;
const THREADS_ENV: &str = "PINCH_THREADS";

#[derive(Parser)]
#[command(
    name = "pinch",
    version,
    about = "Certify solvmanifolds with small |K|·diam² in every dimension"
)]
struct Cli {
    /// Use base diameter 1 (instead of 1/2) when choosing the lattice refinement
    #[arg(long, global = true)]
    paper_mode: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a single dimension
    Certify {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        h: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Certify a range of dimensions, e.g. `--dims 2..8`
    Table {
        #[arg(long, value_parser = parse_range)]
        dims: RangeInclusive<usize>,
        #[arg(long)]
        even_only: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Roots of x^{2k} + sign·3x^k + 1 (times x - 1 with --odd)
    Roots {
        #[arg(long)]
        k: u32,
        #[arg(long, allow_negative_numbers = true)]
        sign: Option<i8>,
        #[arg(long)]
        odd: bool,
    },
    /// Largest sampled sectional curvature for dimension N
    Curvature {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok(a..=b)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // ignore the error if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Certify {
            dim,
            h,
            budget,
            seed,
            json,
        } => {
            let opts = CertifyOptions {
                h,
                budget,
                seed,
                paper_mode: cli.paper_mode,
            };
            let cert = certify_with(dim, &opts)?;
            let doc = certificate_json(&cert)?;
            match json {
                Some(path) => {
                    fs::write(&path, doc)?;
                    println!(
                        "n={} h={} product={:.6e} target={:.6e} passes={} ({} ms)",
                        cert.n, cert.h, cert.product, cert.target, cert.passes, cert.runtime_ms
                    );
                }
                None => print!("{doc}"),
            }
            Ok(if cli.paper_mode {
                cert.passes_paper_mode
            } else {
                cert.passes
            })
        }
        Command::Table {
            dims,
            even_only,
            budget,
            seed,
            csv,
            json,
        } => {
            if *dims.start() < 2 {
                return Err(Error::InvalidArgument("dimensions start at 2".into()));
            }
            let opts = CertifyOptions {
                h: None,
                budget,
                seed,
                paper_mode: cli.paper_mode,
            };
            let rows = table(dims, even_only, &opts);
            let csv_text = table_csv(&rows)?;
            if let Some(path) = csv {
                fs::write(path, &csv_text)?;
            }
            if let Some(path) = json {
                fs::write(path, table_json(&rows)?)?;
            }
            print!("{csv_text}");
            for row in &rows {
                if let Some(e) = &row.error {
                    eprintln!("n={}: {e}", row.n);
                }
            }
            Ok(rows.iter().all(|r| match &r.certificate {
                Some(c) if cli.paper_mode => c.passes_paper_mode,
                Some(c) => c.passes,
                None => false,
            }))
        }
        Command::Roots { k, sign, odd } => {
            let spec = PolySpec::new(k, sign.unwrap_or_else(|| PolySpec::default_sign(k)), odd)?;
            let poly = build_polynomial(&spec)?;
            let closed = roots_closed_form(&spec)?;
            let (_, worst) = cross_check(&closed, &poly)?;
            let bound = verify_spectral_bound(&closed);
            eprintln!("polynomial: {poly}");
            eprintln!("iterative vs closed form: {worst:.3e}");
            eprintln!(
                "lambda_max = {:.12} vs 2/n = {:.12} (margin {:.3e})",
                closed.lambda_max,
                2.0 / closed.n as f64,
                bound.margin
            );
            print!("{}", to_canonical_json("spectrum", &closed)?);
            Ok(true)
        }
        Command::Curvature { dim, budget, seed } => {
            let spec = PolySpec::for_dimension(dim)?;
            let a = assemble_generator(&roots_closed_form(&spec)?)?;
            let report = max_abs_curvature(&a, budget, seed)?;
            eprintln!(
                "max |K| = {:.12} bound = {:.12} ratio = {:.6}",
                report.max_abs,
                report.analytic_bound,
                report.ratio()
            );
            print!("{}", to_canonical_json("curvature", &report)?);
            Ok(report.max_abs <= report.analytic_bound * (1.0 + 1e-6))
        }
    }
}

fn main() -> ExitCode {
    // clap reports usage errors with 2, which is reserved for failed certificates
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    configure_threads();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
