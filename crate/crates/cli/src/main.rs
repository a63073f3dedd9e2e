//! Command-line surface for the unareg toolkit.
//!
//! Exit codes are a stable contract: 0 when the construction verified
//! against the length oracle, 1 when verification found a mismatch, 2 on
//! usage or input errors.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use unareg::grammar::UnaryGrammar;
use unareg::pipeline::{self, Config, RegularizationResult};
use unareg::pumping::{
    check_pl1, enumerate_family, tuple_normalize, LanguageSource, PiMode, Pumper, PumpingWitness,
};
use unareg::Error;

const EXIT_OK: u8 = 0;
const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "unareg",
    version,
    about = "Build verified regular descriptions of unary languages that admit pumping splits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PipelineOpts {
    /// Pumping constant override (validated by the bounded pumping check)
    #[arg(long)]
    b: Option<usize>,
    /// Tuple collection bound (default: b * (b + 2))
    #[arg(long)]
    zmax: Option<usize>,
    /// Verification bound (default: max(2000, 4 * zmax))
    #[arg(long)]
    max: Option<usize>,
    /// Split mode: lineage or literal
    #[arg(long = "pi-mode", value_parser = parse_pi_mode)]
    pi_mode: Option<PiMode>,
    /// Disable the tuple soundness filter
    #[arg(long)]
    no_filter: bool,
    /// Witness file supplying b and the split function
    #[arg(long)]
    witness: Option<PathBuf>,
}

fn parse_pi_mode(s: &str) -> Result<PiMode, String> {
    PiMode::from_str(s)
}

#[derive(Subcommand)]
enum Command {
    /// Build the regular expression, minimal DFA and semilinear witness of a
    /// grammar's language, verified against the length oracle
    Regularize {
        /// Grammar file (omit when using --batch)
        grammar: Option<PathBuf>,
        /// Process every .g file in a directory concurrently
        #[arg(long)]
        batch: Option<PathBuf>,
        #[command(flatten)]
        opts: PipelineOpts,
        /// Machine-readable output
        #[arg(long)]
        json: bool,
    },
    /// Compare the constructed set with the length oracle and report
    Verify {
        grammar: PathBuf,
        #[command(flatten)]
        opts: PipelineOpts,
        #[arg(long)]
        json: bool,
    },
    /// Show the descent and normalized tuple for one length
    Pump {
        grammar: PathBuf,
        /// Input length to decompose
        #[arg(long)]
        length: usize,
        #[command(flatten)]
        opts: PipelineOpts,
        #[arg(long)]
        json: bool,
    },
    /// List the collected and filtered tuples of a grammar
    Tuples {
        grammar: PathBuf,
        #[command(flatten)]
        opts: PipelineOpts,
        #[arg(long)]
        json: bool,
    },
    /// List the finite tuple family for a constant b
    Family {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        json: bool,
    },
    /// Test whether a length belongs to the grammar's language
    Member {
        grammar: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `unareg ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Regularize {
            grammar,
            batch,
            opts,
            json,
        } => cmd_regularize(grammar, batch, &opts, json),
        Command::Verify {
            grammar,
            opts,
            json,
        } => cmd_verify(&grammar, &opts, json),
        Command::Pump {
            grammar,
            length,
            opts,
            json,
        } => cmd_pump(&grammar, length, &opts, json),
        Command::Tuples {
            grammar,
            opts,
            json,
        } => cmd_tuples(&grammar, &opts, json),
        Command::Family { b, json } => cmd_family(b, json),
        Command::Member {
            grammar,
            length,
            json,
        } => cmd_member(&grammar, length, json),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

type CmdResult = Result<u8, String>;

fn load_grammar(path: &Path) -> Result<UnaryGrammar, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read grammar file '{}': {e}", path.display()))?;
    UnaryGrammar::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_witness(path: &Path) -> Result<PumpingWitness, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read witness file '{}': {e}", path.display()))?;
    PumpingWitness::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn base_config(opts: &PipelineOpts) -> Config {
    Config {
        b_override: opts.b,
        z_max: opts.zmax,
        max_check: opts.max,
        pi_mode: opts.pi_mode,
        no_filter: opts.no_filter,
    }
}

/// Runs the full pipeline for one grammar file, honoring a witness file and
/// validating any user-supplied pumping constant with the bounded check.
fn run_pipeline(g: &UnaryGrammar, opts: &PipelineOpts) -> Result<RegularizationResult, String> {
    let config = base_config(opts);
    match &opts.witness {
        None => {
            if let Some(b) = opts.b {
                // A user constant must survive the bounded pumping check.
                if let Ok(cnf) = g.to_cnf() {
                    let bounds = pipeline::resolve_bounds(b, &config).map_err(|e| e.to_string())?;
                    let report = check_pl1(&LanguageSource::Grammar(cnf), b, bounds.max_check);
                    if !report.passed() {
                        return Err(format!("{report}"));
                    }
                }
            }
            pipeline::regularize_grammar(g, &config).map_err(|e| e.to_string())
        }
        Some(wpath) => {
            let witness = load_witness(wpath)?;
            if let Some(b) = opts.b {
                if b != witness.b {
                    return Err(format!(
                        "--b {b} conflicts with the witness constant {}",
                        witness.b
                    ));
                }
            }
            match g.to_cnf() {
                Err(Error::EmptyLanguage { .. }) => {
                    pipeline::regularize_grammar(g, &config).map_err(|e| e.to_string())
                }
                Err(e) => Err(e.to_string()),
                Ok(cnf) => {
                    let b = witness.b;
                    let bounds = pipeline::resolve_bounds(b, &config).map_err(|e| e.to_string())?;
                    let bound = bounds.max_check.max(bounds.z_max + b);
                    let lengths = cnf.derivable_lengths(bound);
                    let source = LanguageSource::from_oracle(
                        move |n| n <= bound && lengths.contains(n),
                        witness,
                    );
                    let report = check_pl1(&source, b, bounds.max_check);
                    if !report.passed() {
                        return Err(format!("{report}"));
                    }
                    pipeline::regularize(&source, &config).map_err(|e| e.to_string())
                }
            }
        }
    }
}

fn fmt_set(set: impl IntoIterator<Item = usize>) -> String {
    let items: Vec<String> = set.into_iter().map(|n| n.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn fmt_tuple(p: usize, qs: &[usize]) -> String {
    format!(
        "<{},({})>",
        p,
        qs.iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
}

fn print_tuple_sections(r: &RegularizationResult) {
    if r.verification.tuples_kept.is_empty() {
        println!("tuples kept: (none)");
    } else {
        println!("tuples kept:");
        for t in &r.verification.tuples_kept {
            println!(
                "  {}{}",
                fmt_tuple(t.p_h, &t.qs),
                if t.certified { "  [certified]" } else { "" }
            );
        }
    }
    if r.verification.tuples_discarded.is_empty() {
        println!("tuples discarded: (none)");
    } else {
        println!("tuples discarded:");
        for t in &r.verification.tuples_discarded {
            println!(
                "  {}  escapes the language at {}",
                fmt_tuple(t.p_h, &t.qs),
                t.first_escape
            );
        }
    }
}

fn print_verification_line(r: &RegularizationResult) {
    let v = &r.verification;
    let mismatch = if v.mismatch_count == 0 {
        "0 mismatches".to_string()
    } else {
        format!(
            "{} mismatches (first: {:?})",
            v.mismatch_count, v.mismatches
        )
    };
    println!(
        "verification: agreement bound {}, {}, tuple set {}, pi mode {}",
        v.agreement_bound,
        mismatch,
        if v.stabilized {
            "stabilized"
        } else {
            "NOT stabilized"
        },
        v.pi_mode
    );
}

fn print_result_human(r: &RegularizationResult) {
    println!("b           = {}", r.b);
    println!("low set     = {}", fmt_set(r.low_set.iter().copied()));
    print_tuple_sections(r);
    println!("eps         = {}", r.eps);
    println!("dfa         = {}", r.dfa);
    println!("regex       = {}", r.regex);
    println!("semilinear  = {}", r.semilinear);
    print_verification_line(r);
}

fn result_exit(r: &RegularizationResult) -> u8 {
    if r.verification.agreed() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value).map_err(|e| e.to_string())
}

fn cmd_regularize(
    grammar: Option<PathBuf>,
    batch: Option<PathBuf>,
    opts: &PipelineOpts,
    json: bool,
) -> CmdResult {
    match (grammar, batch) {
        (Some(path), None) => {
            let g = load_grammar(&path)?;
            let result = run_pipeline(&g, opts)?;
            if json {
                println!("{}", to_json(&result)?);
            } else {
                print_result_human(&result);
            }
            Ok(result_exit(&result))
        }
        (None, Some(dir)) => cmd_batch(&dir, opts, json),
        (Some(_), Some(_)) => Err("give either a grammar file or --batch, not both".into()),
        (None, None) => Err("a grammar file or --batch <dir> is required".into()),
    }
}

fn cmd_batch(dir: &Path, opts: &PipelineOpts, json: bool) -> CmdResult {
    if opts.witness.is_some() {
        return Err("--witness cannot be combined with --batch".into());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("cannot read directory '{}': {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "g"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(format!("no grammar files in '{}'", dir.display()));
    }

    // Per-file runs share nothing; process them concurrently and report in
    // directory order.
    let outcomes: Vec<(PathBuf, Result<RegularizationResult, String>)> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = files
                .iter()
                .map(|path| {
                    scope.spawn(move || {
                        let g = load_grammar(path)?;
                        run_pipeline(&g, opts)
                    })
                })
                .collect();
            files
                .iter()
                .cloned()
                .zip(
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("worker panicked")),
                )
                .collect()
        });

    let mut any_input_error = false;
    let mut any_mismatch = false;
    for (path, outcome) in &outcomes {
        let name = path.display();
        match outcome {
            Err(msg) => {
                any_input_error = true;
                println!("{name}: error: {msg}");
            }
            Ok(r) => {
                if !r.verification.agreed() {
                    any_mismatch = true;
                }
                if json {
                    println!(
                        "{}",
                        to_json(&serde_json::json!({
                            "file": name.to_string(),
                            "result": r,
                        }))?
                    );
                } else {
                    println!(
                        "{name}: b={} regex={} {}",
                        r.b,
                        r.regex,
                        if r.verification.agreed() {
                            "verified".to_string()
                        } else {
                            format!("MISMATCH ({} lengths)", r.verification.mismatch_count)
                        }
                    );
                }
            }
        }
    }
    Ok(if any_input_error {
        EXIT_INPUT
    } else if any_mismatch {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    })
}

fn cmd_verify(path: &Path, opts: &PipelineOpts, json: bool) -> CmdResult {
    let g = load_grammar(path)?;
    let result = run_pipeline(&g, opts)?;
    if json {
        println!("{}", to_json(&result.verification)?);
    } else {
        print_verification_line(&result);
    }
    Ok(result_exit(&result))
}

fn cmd_pump(path: &Path, length: usize, opts: &PipelineOpts, json: bool) -> CmdResult {
    let g = load_grammar(path)?;
    let config = base_config(opts);

    let (source, b) = match &opts.witness {
        None => {
            let cnf = g.to_cnf().map_err(|e| e.to_string())?;
            let b = opts.b.unwrap_or_else(|| cnf.pumping_constant());
            (LanguageSource::Grammar(cnf), b)
        }
        Some(wpath) => {
            let witness = load_witness(wpath)?;
            if let Some(b) = opts.b {
                if b != witness.b {
                    return Err(format!(
                        "--b {b} conflicts with the witness constant {}",
                        witness.b
                    ));
                }
            }
            let cnf = g.to_cnf().map_err(|e| e.to_string())?;
            let b = witness.b;
            let bounds = pipeline::resolve_bounds(b, &config).map_err(|e| e.to_string())?;
            let bound = bounds.max_check.max(length);
            let lengths = cnf.derivable_lengths(bound);
            (
                LanguageSource::from_oracle(move |n| n <= bound && lengths.contains(n), witness),
                b,
            )
        }
    };
    let mode = opts.pi_mode.unwrap_or(match source {
        LanguageSource::Grammar(_) => PiMode::Lineage,
        LanguageSource::Oracle { .. } => PiMode::Literal,
    });
    let bounds = pipeline::resolve_bounds(b, &config).map_err(|e| e.to_string())?;
    let bound = bounds.max_check.max(length);
    let pumper =
        Pumper::with_bounds(&source, Some(b), mode, bound, length).map_err(|e| e.to_string())?;
    let trace = pumper.tuple_generate(length).map_err(|e| e.to_string())?;
    let (tuple, counts) = tuple_normalize(&trace);

    if json {
        println!(
            "{}",
            to_json(&serde_json::json!({
                "z": trace.z,
                "b": b,
                "pi_mode": mode.to_string(),
                "steps": trace.steps,
                "tuple": tuple,
                "multiplicities": counts,
            }))?
        );
    } else {
        println!("z = {length}, b = {b}, pi mode = {mode}");
        let mut qsum = 0usize;
        for (i, s) in trace.steps.iter().enumerate() {
            qsum += s.q;
            println!(
                "step {i}: p = {}, q = {}   [z = p + sum(q) = {} + {}]",
                s.p, s.q, s.p, qsum
            );
        }
        println!("residual p_h = {} (below b = {b})", trace.residual());
        println!(
            "tuple: {} with multiplicities [{}]",
            fmt_tuple(tuple.p(), tuple.qs()),
            counts
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
    }
    Ok(EXIT_OK)
}

fn cmd_tuples(path: &Path, opts: &PipelineOpts, json: bool) -> CmdResult {
    let g = load_grammar(path)?;
    let result = run_pipeline(&g, opts)?;
    if json {
        println!(
            "{}",
            to_json(&serde_json::json!({
                "b": result.b,
                "pi_mode": result.verification.pi_mode,
                "tuples_kept": result.verification.tuples_kept,
                "tuples_discarded": result.verification.tuples_discarded,
                "stabilized": result.verification.stabilized,
            }))?
        );
    } else {
        println!(
            "b = {}, pi mode = {}",
            result.b, result.verification.pi_mode
        );
        print_tuple_sections(&result);
        println!(
            "tuple set {}",
            if result.verification.stabilized {
                "stabilized"
            } else {
                "NOT stabilized"
            }
        );
    }
    Ok(result_exit(&result))
}

fn cmd_family(b: usize, json: bool) -> CmdResult {
    if b == 0 || b > 16 {
        return Err(format!(
            "family constant b = {b} outside the supported range 1..=16"
        ));
    }
    let family = enumerate_family(b);
    if json {
        println!(
            "{}",
            to_json(&serde_json::json!({
                "b": b,
                "count": family.len(),
                "tuples": family,
            }))?
        );
    } else {
        for tuple in &family {
            println!("{}", fmt_tuple(tuple.p(), tuple.qs()));
        }
        println!("count = {}", family.len());
    }
    Ok(EXIT_OK)
}

fn cmd_member(path: &Path, length: usize, json: bool) -> CmdResult {
    let g = load_grammar(path)?;
    let member = match g.to_cnf() {
        Ok(cnf) => cnf.derivable_lengths(length).contains(length),
        Err(Error::EmptyLanguage { .. }) => false,
        Err(e) => return Err(e.to_string()),
    };
    if json {
        println!(
            "{}",
            to_json(&serde_json::json!({ "length": length, "member": member }))?
        );
    } else {
        println!("{member}");
    }
    Ok(EXIT_OK)
}
