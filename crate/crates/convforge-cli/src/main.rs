//! Command-line front end: factorize sequences, build networks, evaluate
//! and verify them, and run depth studies. All file I/O is JSON under the
//! `convforge/v1` schema; every file-producing run leaves a manifest.
//!
//! Exit codes: 0 success, 2 validation or I/O error, 3 numerical failure
//! (root finding did not converge, or a verification exceeded tolerance).
//! Errors are single-line JSON on standard error.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use convforge::approx::{rate_study, TargetFunction};
use convforge::io::{
    self, EvaluationsFile, RateReportFile, VerifyReportFile, SCHEMA,
};
use convforge::network::build_network;
use convforge::symbolic::factorize_mask;
use convforge::{Error, Network, Result};

#[derive(Parser)]
#[command(name = "convforge", version, about = "Factorize sequences into short masks and build the deep ReLU networks that realize them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize a stored sequence into masks of support s.
    Factorize {
        /// Sequence JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Filter support bound (masks have length s + 1).
        #[arg(long)]
        s: usize,
        /// Relative residual requested from the root finder.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Factorization JSON file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the network that realizes a ridge expansion exactly.
    Build {
        /// Ridge expansion JSON file.
        #[arg(long)]
        ridge: PathBuf,
        /// Filter support bound.
        #[arg(long)]
        s: usize,
        /// Network depth.
        #[arg(long = "J")]
        depth: usize,
        /// Network JSON file to write.
        #[arg(long)]
        out: PathBuf,
        /// Domain half-width B^(0); exactness holds for max |x_i| <= B^(0).
        #[arg(long, default_value_t = 1.0)]
        domain_bound: f64,
    },
    /// Evaluate a network at stored points.
    Eval {
        /// Network JSON file.
        #[arg(long)]
        net: PathBuf,
        /// Points JSON file, one input vector per row.
        #[arg(long)]
        points: PathBuf,
        /// Evaluations JSON file to write; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the evaluation loop.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Measure how far a network deviates from the expansion it realizes.
    Verify {
        /// Network JSON file.
        #[arg(long)]
        net: PathBuf,
        /// Ridge expansion JSON file the network claims to realize.
        #[arg(long)]
        ridge: PathBuf,
        /// Number of sample points in the network's domain.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Seed for the sample draw.
        #[arg(long)]
        seed: u64,
        /// Relative tolerance; the scale is max(1, max |F(x)| seen).
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Worker threads for the evaluation loop.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Report JSON file to write in addition to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup-error decay of built networks across a list of depths.
    RateStudy {
        /// Target function name: gaussian, quadratic, or cosine-ridge.
        #[arg(long)]
        target: String,
        /// Input dimension.
        #[arg(long)]
        d: usize,
        /// Filter support bound.
        #[arg(long)]
        s: usize,
        /// Comma-separated depths, for example 4,8,16,32.
        #[arg(long = "J", value_delimiter = ',', required = true)]
        depths: Vec<usize>,
        /// Seed for fitting and the evaluation grid.
        #[arg(long)]
        seed: u64,
        /// Report JSON file to write.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV copy of the report rows.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Latin-hypercube sample count for the error grid.
        #[arg(long, default_value_t = 4096)]
        grid_samples: usize,
        /// Worker threads for the evaluation loop.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(cli.command, started) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            exit_code_of(&e)
        }
    }
}

/// Kebab-case error code for machine consumption.
fn code_of(e: &Error) -> &'static str {
    match e {
        Error::MaskTooLong { .. } => "mask-too-long",
        Error::ZeroSequence => "zero-sequence",
        Error::FilterLengthTooSmall { .. } => "filter-length-too-small",
        Error::FilterLengthExceedsDimension { .. } => "filter-length-exceeds-dimension",
        Error::DidNotConverge { .. } => "did-not-converge",
        Error::DimensionMismatch { .. } => "dimension-mismatch",
        Error::DepthTooSmall { .. } => "depth-too-small",
        Error::DegenerateScale => "degenerate-scale",
        Error::UnstructuredBias { .. } => "unstructured-bias",
        Error::InvalidExpansion(_) => "invalid-expansion",
        Error::UnknownTarget(_) => "unknown-target",
        Error::Io(_) => "io",
        Error::Format(_) => "format",
        Error::SchemaMismatch { .. } => "schema-mismatch",
    }
}

fn exit_code_of(e: &Error) -> ExitCode {
    match e {
        Error::DidNotConverge { .. } => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn report_error(e: &Error) {
    report_raw_error(code_of(e), &e.to_string());
}

fn report_raw_error(code: &str, message: &str) {
    let payload = serde_json::json!({
        "schema": SCHEMA,
        "kind": "error",
        "code": code,
        "message": message,
    });
    eprintln!("{payload}");
}

fn run(command: Command, started: Instant) -> Result<ExitCode> {
    match command {
        Command::Factorize { input, s, tol, out } => {
            let sequence = io::load_sequence(&input)?;
            let result = factorize_mask(&sequence, s, tol)?;
            io::save_factorization(&out, s, &result)?;
            manifest::write("factorize", None, started, &[&input], &[&out])?;
            println!(
                "wrote {} ({} masks, max relative error {:.3e})",
                out.display(),
                result.depth,
                result.max_rel_error
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Build { ridge, s, depth, out, domain_bound } => {
            let expansion = io::load_ridge(&ridge)?;
            let net = build_network(&expansion, s, depth, domain_bound)?;
            io::save_network(&out, &net)?;
            manifest::write("build", None, started, &[&ridge], &[&out])?;
            let widths = net.config().widths.clone();
            println!(
                "wrote {} (widths {} -> {}, {} layers)",
                out.display(),
                widths.first().unwrap(),
                widths.last().unwrap(),
                net.config().depth
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { net, points, out, threads } => {
            let network = io::load_network(&net)?;
            let inputs = io::load_points(&points)?;
            let d = network.config().d;
            for point in &inputs {
                if point.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: point.len() });
                }
            }
            let values = eval_points(&network, &inputs, threads);
            match out {
                Some(out) => {
                    io::save_evaluations(&out, &values)?;
                    manifest::write("eval", None, started, &[&net, &points], &[&out])?;
                    println!("wrote {} ({} values)", out.display(), values.len());
                }
                None => {
                    let file = EvaluationsFile { schema: SCHEMA.into(), values };
                    println!("{}", serde_json::to_string_pretty(&file)?);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { net, ridge, samples, seed, tol, threads, out } => {
            let network = io::load_network(&net)?;
            let expansion = io::load_ridge(&ridge)?;
            if expansion.dim() != network.config().d {
                return Err(Error::DimensionMismatch {
                    expected: network.config().d,
                    got: expansion.dim(),
                });
            }
            let (deviation, magnitude) =
                convforge::approx::realization_report(&network, &expansion, samples, seed, threads);
            let scale = magnitude.max(1.0);
            let pass = deviation <= tol * scale;
            let report = VerifyReportFile {
                schema: SCHEMA.into(),
                samples,
                seed,
                tolerance: tol,
                scale,
                max_abs_deviation: deviation,
                pass,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(out) = &out {
                io::write_json(out, &report)?;
                manifest::write("verify", Some(seed), started, &[&net, &ridge], &[out])?;
            }
            if pass {
                Ok(ExitCode::SUCCESS)
            } else {
                report_raw_error(
                    "verification-exceeded",
                    &format!(
                        "max deviation {deviation:.3e} exceeds {tol:.3e} at scale {scale:.3e}"
                    ),
                );
                Ok(ExitCode::from(3))
            }
        }
        Command::RateStudy { target, d, s, depths, seed, out, csv, grid_samples, threads } => {
            let function = TargetFunction::named(&target)?;
            let rows = rate_study(&function, d, s, &depths, seed, grid_samples, threads)?;
            for row in &rows {
                println!(
                    "J {:>4}  params {:>6}  sup error {:.6e}",
                    row.depth, row.param_count, row.sup_error
                );
            }
            let report = RateReportFile {
                schema: SCHEMA.into(),
                target,
                d,
                s,
                seed,
                rows: rows.clone(),
            };
            io::write_json(&out, &report)?;
            let mut outputs: Vec<&Path> = vec![&out];
            if let Some(csv_path) = &csv {
                write_csv(csv_path, &rows)?;
                outputs.push(csv_path);
            }
            manifest::write("rate-study", Some(seed), started, &[], &outputs)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Order-preserving chunked evaluation; the thread count never changes the
/// values, only how they are produced.
fn eval_points(net: &Network, points: &[Vec<f64>], threads: usize) -> Vec<f64> {
    let threads = threads.max(1).min(points.len().max(1));
    if threads == 1 {
        return points.iter().map(|x| net.evaluate(x)).collect();
    }
    let chunk = points.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|c| scope.spawn(move || c.iter().map(|x| net.evaluate(x)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// CSV copy of the report rows, written atomically like the JSON outputs.
fn write_csv(path: &Path, rows: &[convforge::Report]) -> Result<()> {
    let mut text = String::from("J,param_count,sup_error\n");
    for row in rows {
        text.push_str(&format!("{},{},{}\n", row.depth, row.param_count, row.sup_error));
    }
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?
        .to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, text).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
