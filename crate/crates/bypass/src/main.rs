//! Thin command-line driver. Subcommands: gen, build, query, verify,
//! bench. Exit codes: 0 success, 1 usage, 2 I/O or format error,
//! 3 verification threshold unmet.

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use bypass::file::{load_oracle, save_oracle};
use bypass::graph::{load_graph, write_graph, Graph};
use bypass::oracle::PipelineId;
use bypass::pipeline::{build, PipelineConfig, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_GAMMA};
use bypass::toolkit::{
    bench, bench_csv_header, bench_row_csv, gen_graph, verify, GraphModel, VerifyScope,
};
use bypass::Runtime;

#[derive(Parser)]
#[command(name = "bypass", version, about = "distance sensitivity oracles: preprocess a directed weighted graph, then answer d(x, y, e) queries in constant lookups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file.
    Gen {
        /// gnm | layered | path-chords
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        wmax: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Preprocess a graph into an oracle file.
    Build {
        #[command(flatten)]
        common: BuildArgs,
        #[arg(long)]
        out: PathBuf,
        /// Write the work/span meter report (CSV) here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Answer queries from an oracle file. A query names a vertex pair
    /// and the failing edge by endpoints: x y u v.
    Query {
        /// Graph file the oracle was built from.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        /// Batch file with one "x y u v" query per line.
        #[arg(long)]
        batch: Option<PathBuf>,
        /// Single query: x y u v.
        #[arg(num_args = 0..=4)]
        triple: Vec<u32>,
    },
    /// Build repeatedly and compare against the brute-force oracle.
    Verify {
        #[command(flatten)]
        common: BuildArgs,
        #[arg(long, default_value_t = 5)]
        trials: u32,
        /// all | sampled:<k>
        #[arg(long, default_value = "all")]
        scope: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Metered builds over a (pipeline, h) grid; CSV to stdout or file.
    Bench {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated pipelines, e.g. a,b,c
        #[arg(long, default_value = "a")]
        pipelines: String,
        /// Comma-separated h values for pipeline c.
        #[arg(long, default_value = "4")]
        h: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BuildArgs {
    /// Graph file.
    #[arg(long = "in")]
    input: PathBuf,
    /// a | b | c
    #[arg(long, default_value = "a")]
    pipeline: String,
    /// Base hop bound (pipeline c).
    #[arg(long, default_value_t = 4)]
    h: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VERIFY: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("bypass: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("bypass: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}

enum CliError {
    Usage(String),
    Io(String),
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn read_graph(path: &PathBuf) -> Result<Graph, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let loaded = load_graph(BufReader::new(file)).map_err(io_err)?;
    if loaded.duplicate_warnings > 0 {
        eprintln!(
            "bypass: warning: {} duplicate edge(s) collapsed to minimum weight",
            loaded.duplicate_warnings
        );
    }
    Ok(loaded.graph)
}

fn parse_pipeline(s: &str) -> Result<PipelineId, CliError> {
    match s {
        "a" | "A" => Ok(PipelineId::A),
        "b" | "B" => Ok(PipelineId::B),
        "c" | "C" => Ok(PipelineId::C),
        _ => Err(CliError::Usage(format!("unknown pipeline '{s}'"))),
    }
}

fn build_config(args: &BuildArgs) -> Result<PipelineConfig, CliError> {
    Ok(PipelineConfig {
        pipeline: parse_pipeline(&args.pipeline)?,
        h: args.h,
        seed: args.seed,
        gamma: args.gamma,
        alpha: args.alpha,
        beta: args.beta,
    })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Gen {
            model,
            n,
            m,
            wmax,
            seed,
            out,
        } => {
            let model = GraphModel::parse(&model)
                .ok_or_else(|| CliError::Usage(format!("unknown model '{model}'")))?;
            let g = gen_graph(&model, n, m, wmax, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let mut buf = Vec::new();
            write_graph(&g, &mut buf).map_err(io_err)?;
            fs::write(&out, buf).map_err(io_err)?;
            println!("wrote {} ({} vertices, {} edges)", out.display(), g.vertex_count(), g.edge_count());
            Ok(ExitCode::SUCCESS)
        }
        Command::Build {
            common,
            out,
            report,
        } => {
            let g = read_graph(&common.input)?;
            let cfg = build_config(&common)?;
            let rt = Runtime::new(common.threads);
            let outcome = build(&g, &cfg, &rt).map_err(|e| CliError::Usage(e.to_string()))?;
            if !outcome.report.accepted {
                eprintln!(
                    "bypass: warning: build not accepted after {} attempt(s) ({} audit mismatches, {} coverage gaps)",
                    outcome.report.attempts,
                    outcome.report.audit_mismatches,
                    outcome.report.coverage_gaps
                );
            }
            save_oracle(&outcome.tables, &out).map_err(io_err)?;
            if let Some(path) = report {
                let csv = outcome.report.build_meter.to_csv().map_err(io_err)?;
                fs::write(&path, csv).map_err(io_err)?;
            }
            println!(
                "built pipeline {:?} oracle: {} stored words, work {}, span {}",
                cfg.pipeline,
                outcome.tables.stored_words(),
                outcome.report.build_meter.work(),
                outcome.report.build_meter.span()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Query {
            input,
            oracle,
            batch,
            triple,
        } => {
            let g = read_graph(&input)?;
            let tables = load_oracle(&oracle, &g).map_err(io_err)?;
            let answer = |x: u32, y: u32, u: u32, v: u32, line: usize| -> Result<String, CliError> {
                let e = g.edge_between(u, v).ok_or_else(|| {
                    CliError::Io(format!("query {line}: no edge ({u}, {v}) in the graph"))
                })?;
                let d = tables
                    .query(x, y, e)
                    .map_err(|err| CliError::Io(format!("query {line}: {err}")))?;
                Ok(d.to_string())
            };
            if let Some(batch) = batch {
                let text = fs::read_to_string(&batch).map_err(io_err)?;
                for (idx, line) in text.lines().enumerate() {
                    let t = line.trim();
                    if t.is_empty() || t.starts_with('#') {
                        continue;
                    }
                    let fields: Vec<u32> = t
                        .split_whitespace()
                        .map(|f| f.parse::<u32>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| CliError::Io(format!("batch line {}: expected 'x y u v'", idx + 1)))?;
                    if fields.len() != 4 {
                        return Err(CliError::Io(format!(
                            "batch line {}: expected 4 fields, found {}",
                            idx + 1,
                            fields.len()
                        )));
                    }
                    println!("{}", answer(fields[0], fields[1], fields[2], fields[3], idx + 1)?);
                }
            } else {
                if triple.len() != 4 {
                    return Err(CliError::Usage(
                        "expected x y u v (or --batch FILE)".into(),
                    ));
                }
                println!("{}", answer(triple[0], triple[1], triple[2], triple[3], 1)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            common,
            trials,
            scope,
            report,
        } => {
            let g = read_graph(&common.input)?;
            let cfg = build_config(&common)?;
            let scope = if scope == "all" {
                VerifyScope::AllTriples
            } else if let Some(k) = scope.strip_prefix("sampled:") {
                VerifyScope::Sampled(
                    k.parse()
                        .map_err(|_| CliError::Usage(format!("bad scope '{scope}'")))?,
                )
            } else {
                return Err(CliError::Usage(format!("bad scope '{scope}'")));
            };
            let rt = Runtime::new(common.threads);
            let vr = verify(&g, &cfg, trials, scope, &rt)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            println!(
                "verify: {}/{} trials accepted (required {})",
                vr.accepted_trials(),
                trials,
                vr.required
            );
            for t in &vr.trials {
                if t.mismatches > 0 {
                    let (x, y, u, v) = t.first_mismatch.unwrap();
                    println!(
                        "  trial {}: {} mismatches, first at x={} y={} edge=({},{})",
                        t.trial, t.mismatches, x, y, u, v
                    );
                }
            }
            if let Some(path) = report {
                fs::write(&path, vr.to_csv()).map_err(io_err)?;
            }
            if vr.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_VERIFY))
            }
        }
        Command::Bench {
            input,
            pipelines,
            h,
            seed,
            threads,
            report,
        } => {
            let g = read_graph(&input)?;
            let hs: Vec<u32> = h
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad h list '{h}'")))?;
            let mut grid = Vec::new();
            for p in pipelines.split(',') {
                let pipeline = parse_pipeline(p.trim())?;
                if pipeline == PipelineId::C {
                    for &hv in &hs {
                        grid.push((pipeline, hv));
                    }
                } else {
                    grid.push((pipeline, 2));
                }
            }
            let rt = Runtime::new(threads);
            let rows = bench(&g, &grid, seed, DEFAULT_GAMMA, DEFAULT_ALPHA, DEFAULT_BETA, &rt)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let mut csv = String::from(bench_csv_header());
            for r in &rows {
                csv.push_str(&bench_row_csv(r));
            }
            match report {
                Some(path) => fs::write(&path, csv).map_err(io_err)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
