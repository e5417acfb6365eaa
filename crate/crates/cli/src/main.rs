//! Command-line front end: replay traces against the dictionary (optionally
//! cross-checked against the brute-force oracle and the invariant suite),
//! generate workloads, and emit cost/potential CSVs for scaling analysis.

use clap::{Parser, Subcommand, ValueEnum};
use mergeset::baseline::BaselineFamily;
use mergeset::trace::parse_trace;
use mergeset::SetFamily;
use mergeset_harness::{
    gen_workload, run_trace, summarize, write_cost_csv, CheckMode, RunOptions, WorkloadKind,
    WorkloadParams,
};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mergeset",
    version,
    about = "Mergeable integer dictionaries with shift: trace runner and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum CheckArg {
    None,
    Final,
    EveryOp,
}

impl From<CheckArg> for CheckMode {
    fn from(value: CheckArg) -> Self {
        match value {
            CheckArg::None => CheckMode::None,
            CheckArg::Final => CheckMode::Final,
            CheckArg::EveryOp => CheckMode::EveryOp,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a trace file, printing each search result.
    Run {
        trace: PathBuf,
        /// Validate live trees never, once at the end, or after every op.
        #[arg(long, value_enum, default_value_t = CheckArg::None)]
        check: CheckArg,
        /// Cross-check every operation against the brute-force oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Generate a workload trace.
    Gen {
        #[arg(long, value_enum)]
        kind: WorkloadKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Target live-set count (adversarial-k: elements per block half).
        #[arg(long, default_value_t = 32)]
        sets: usize,
        #[arg(long, default_value_t = 16)]
        universe_bits: u32,
        #[arg(long, default_value_t = 1000)]
        ops: usize,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and write per-op cost records as CSV.
    Bench {
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a trace against the sequential-merge baseline engine.
    Baseline {
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in invariant and oracle suite over all workload kinds.
    Selftest,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn usage_err(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

fn check_err(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

fn load_ops(path: &PathBuf) -> Result<Vec<mergeset::trace::TraceOp>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage_err(format!("cannot read {}: {e}", path.display())))?;
    parse_trace(&text).map_err(|e| usage_err(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run {
            trace,
            check,
            oracle,
        } => {
            let ops = load_ops(&trace)?;
            let mut family = SetFamily::new();
            let options = RunOptions {
                check: check.into(),
                oracle,
            };
            let output =
                run_trace(&mut family, &ops, &options).map_err(|e| check_err(e.to_string()))?;
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            for (idx, result) in &output.searches {
                match result {
                    Some(k) => writeln!(w, "search @{idx} -> {k}"),
                    None => writeln!(w, "search @{idx} -> none"),
                }
                .map_err(|e| usage_err(e.to_string()))?;
            }
            let s = summarize(&output.records);
            writeln!(
                w,
                "ok: {} ops, {} live sets, total work {}",
                s.ops, output.live_sets, s.total_work
            )
            .map_err(|e| usage_err(e.to_string()))?;
            Ok(())
        }
        Cmd::Gen {
            kind,
            seed,
            sets,
            universe_bits,
            ops,
            out,
        } => {
            let text = gen_workload(
                kind,
                seed,
                &WorkloadParams {
                    num_sets: sets,
                    universe_bits,
                    ops,
                },
            );
            match out {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| usage_err(format!("cannot write {}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Cmd::Bench { trace, out } => {
            let ops = load_ops(&trace)?;
            let mut family = SetFamily::new();
            let started = std::time::Instant::now();
            let output = run_trace(&mut family, &ops, &RunOptions::default())
                .map_err(|e| check_err(e.to_string()))?;
            let elapsed = started.elapsed();
            write_csv(&out, &output.records)?;
            print_summary(&output.records, elapsed);
            Ok(())
        }
        Cmd::Baseline { trace, out } => {
            let ops = load_ops(&trace)?;
            let mut family = BaselineFamily::new();
            let started = std::time::Instant::now();
            let output = run_trace(&mut family, &ops, &RunOptions::default())
                .map_err(|e| check_err(e.to_string()))?;
            let elapsed = started.elapsed();
            write_csv(&out, &output.records)?;
            print_summary(&output.records, elapsed);
            Ok(())
        }
        Cmd::Selftest => selftest(),
    }
}

fn write_csv(path: &PathBuf, records: &[mergeset_harness::CostRecord]) -> Result<(), CliError> {
    let file = fs::File::create(path)
        .map_err(|e| usage_err(format!("cannot create {}: {e}", path.display())))?;
    write_cost_csv(std::io::BufWriter::new(file), records)
        .map_err(|e| usage_err(format!("cannot write {}: {e}", path.display())))
}

/// Wall-clock time is reported for orientation only; the asserted cost
/// measure is the machine-independent work counter.
fn print_summary(records: &[mergeset_harness::CostRecord], elapsed: std::time::Duration) {
    let s = summarize(records);
    println!(
        "ops={} total_work={} merges={} sum_lg_u_merges={:.3} ratio={:.3} elapsed_ms={}",
        s.ops,
        s.total_work,
        s.merges,
        s.sum_lg_u_merges,
        s.ratio,
        elapsed.as_millis()
    );
}

/// Replay every workload kind with the oracle and per-op validation on.
fn selftest() -> Result<(), CliError> {
    let mut failures = 0;
    for kind in WorkloadKind::ALL {
        for (seed, bits) in [(1u64, 10u32), (2, 16)] {
            let params = WorkloadParams {
                num_sets: 16,
                universe_bits: bits,
                ops: 2_000,
            };
            let text = gen_workload(kind, seed, &params);
            let ops = parse_trace(&text).map_err(|e| usage_err(e.to_string()))?;
            let mut family = SetFamily::new();
            let options = RunOptions {
                check: CheckMode::EveryOp,
                oracle: true,
            };
            match run_trace(&mut family, &ops, &options) {
                Ok(output) => {
                    let s = summarize(&output.records);
                    println!(
                        "selftest {} seed={seed} bits={bits}: ok ({} ops, work {})",
                        kind.name(),
                        s.ops,
                        s.total_work
                    );
                }
                Err(e) => {
                    failures += 1;
                    println!(
                        "selftest {} seed={seed} bits={bits}: FAIL: {e}",
                        kind.name()
                    );
                }
            }
        }
    }
    if failures == 0 {
        println!("selftest passed");
        Ok(())
    } else {
        Err(check_err(format!("{failures} selftest case(s) failed")))
    }
}
