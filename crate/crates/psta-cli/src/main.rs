//! Command-line surface: evaluation, derivation checking and metrics,
//! subject-reduction traces, confluence exploration, machine compilation,
//! the direct machine oracle, and exact compiled-vs-oracle comparison.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use psta_core::derivation::{depth, rank, weight};
use psta_core::encode::{self, OutputMode};
use psta_core::eval::{EvalError, Strategy, DEFAULT_FUEL};
use psta_core::json;
use psta_core::ptm;
use psta_core::surface::RedexKind;
use psta_core::syntax::{parse_term, print_term};
use psta_core::transform;
use psta_core::Term;

#[derive(Parser)]
#[command(name = "psta", about = "probabilistic soft type assignment toolbox", version)]
struct Cli {
    /// Emit machine-readable JSON (also for errors).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    #[value(name = "leftmost-outermost", alias = "lo")]
    LeftmostOutermost,
    #[value(name = "rightmost-innermost", alias = "ri")]
    RightmostInnermost,
    Random,
    SiteIndex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EmitArg {
    Term,
    Derivation,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a term file to its exact surface distribution.
    Eval {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "leftmost-outermost")]
        strategy: StrategyArg,
        /// Seed for the random strategy / index for site-index.
        #[arg(long, default_value_t = 0)]
        pick: u64,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Check a derivation JSON file.
    Check { file: PathBuf },
    /// Rank, depth and weight of a derivation.
    Metrics {
        file: PathBuf,
        #[arg(long)]
        r: Option<u64>,
    },
    /// Iterated subject reduction with a weight log.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        trace: bool,
    },
    /// Exhaustively explore all strategies and compare distributions.
    Confluence {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Compile a machine specification into a typed term.
    CompilePtm {
        spec: PathBuf,
        #[arg(long)]
        time_poly: String,
        #[arg(long)]
        space_poly: String,
        #[arg(long, value_enum, default_value = "term")]
        emit: EmitArg,
        /// Extract the verdict boolean instead of the tape string.
        #[arg(long)]
        verdict: bool,
    },
    /// Run the direct machine simulator.
    Oracle {
        spec: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        tape: usize,
    },
    /// Compare the compiled term with the oracle, input by input.
    Compare {
        spec: PathBuf,
        #[arg(long, required = true)]
        input: Vec<String>,
        /// Time bound polynomial in n (defaults to the constant `steps`).
        #[arg(long)]
        time_poly: Option<String>,
        /// Space bound polynomial in n (defaults to the constant `tape`).
        #[arg(long)]
        space_poly: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        tape: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_mode = cli.json;
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            if json_mode {
                let payload = serde_json::json!({ "error": format!("{e:#}") });
                eprintln!("{payload}");
            } else {
                eprintln!("error: {e:#}");
            }
            // fuel exhaustion has a dedicated exit code
            if e.downcast_ref::<EvalError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn default_fuel() -> u64 {
    std::env::var("PSTA_FUEL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_FUEL)
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_term(path: &PathBuf) -> Result<Term> {
    let text = read(path)?;
    parse_term(&text).map_err(|e| anyhow!("{e}"))
}

/// Parse `2*x^2+x+3`-style polynomials into a coefficient list.
fn parse_poly(text: &str) -> Result<Vec<usize>> {
    let mut coeffs = vec![0usize; 1];
    for part in text.replace(' ', "").split('+') {
        if part.is_empty() {
            bail!("empty summand in polynomial `{text}`");
        }
        let (coeff, pow) = match part.find('x') {
            None => (
                part.parse::<usize>()
                    .with_context(|| format!("bad constant `{part}`"))?,
                0usize,
            ),
            Some(ix) => {
                let c = &part[..ix];
                let coeff = if c.is_empty() {
                    1
                } else {
                    c.trim_end_matches('*')
                        .parse::<usize>()
                        .with_context(|| format!("bad coefficient in `{part}`"))?
                };
                let rest = &part[ix + 1..];
                let pow = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .ok_or_else(|| anyhow!("expected `^` in `{part}`"))?
                        .parse::<usize>()
                        .with_context(|| format!("bad exponent in `{part}`"))?
                };
                (coeff, pow)
            }
        };
        if coeffs.len() <= pow {
            coeffs.resize(pow + 1, 0);
        }
        coeffs[pow] += coeff;
    }
    Ok(coeffs)
}

fn parse_input_bits(s: &str) -> Result<Vec<bool>> {
    if s.is_empty() || s == "e" || s == "eps" {
        return Ok(vec![]);
    }
    ptm::bits_from_str(s).ok_or_else(|| anyhow!("`{s}` is not a bit string"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval {
            file,
            strategy,
            pick,
            fuel,
        } => {
            let term = load_term(&file)?;
            let strategy = match strategy {
                StrategyArg::LeftmostOutermost => Strategy::LeftmostOutermost,
                StrategyArg::RightmostInnermost => Strategy::RightmostInnermost,
                StrategyArg::Random => Strategy::Random(pick),
                StrategyArg::SiteIndex => Strategy::SiteIndex(pick as usize),
            };
            let fuel = fuel.unwrap_or_else(default_fuel);
            let report = psta_core::evaluate(&term, &strategy, fuel)?;
            if cli.json {
                println!("{}", json::format_distribution(&report.distribution));
            } else {
                println!("branch depth: {}", report.branch_depth);
                println!("steps total:  {}", report.steps_total);
                for (t, p) in report.distribution.sorted_entries() {
                    println!("{p}  {}", print_term(t));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { file } => {
            let d = json::parse_derivation(&read(&file)?)?;
            let judgment = psta_core::check_derivation(&d).map_err(|e| anyhow!("{e}"))?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "ok": true,
                        "judgment": judgment.to_string(),
                    })
                );
            } else {
                println!("ok: {judgment}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics { file, r } => {
            let d = json::parse_derivation(&read(&file)?)?;
            psta_core::check_derivation(&d).map_err(|e| anyhow!("{e}"))?;
            let rk = rank(&d);
            let r = r.unwrap_or(rk);
            let m = psta_core::metrics(&d, r);
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "rank": m.rank,
                        "depth": m.depth,
                        "r": r,
                        "weight": m.weight.to_string(),
                        "subject_size": d.conclusion.subject.size(),
                    })
                );
            } else {
                println!("rank:   {}", m.rank);
                println!("depth:  {}", m.depth);
                println!("w(D,{r}): {}", m.weight);
                println!("|M|:    {}", d.conclusion.subject.size());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce { file, trace } => {
            let d = json::parse_derivation(&read(&file)?)?;
            psta_core::check_derivation(&d).map_err(|e| anyhow!("{e}"))?;
            let r = rank(&d);
            let mut lines = Vec::new();
            trace_reduce(&d, r, 0, &mut lines)?;
            if trace || !cli.json {
                for l in &lines {
                    println!("{l}");
                }
            }
            if cli.json {
                println!("{}", serde_json::json!({ "steps": lines }));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Confluence { file, limit, fuel } => {
            let term = load_term(&file)?;
            let fuel = fuel.unwrap_or(10_000);
            let report = psta_core::confluence_oracle(&term, fuel, limit)
                .map_err(|e| anyhow!("{e}"))?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "agree": report.agree,
                        "distributions": report.distributions.len(),
                    })
                );
            } else {
                println!(
                    "agree: {} ({} distribution(s))",
                    report.agree,
                    report.distributions.len()
                );
                for d in &report.distributions {
                    println!("  {d}");
                }
            }
            Ok(if report.agree {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::CompilePtm {
            spec,
            time_poly,
            space_poly,
            emit,
            verdict,
        } => {
            let machine = json::parse_ptm(&read(&spec)?)?;
            let p = parse_poly(&time_poly)?;
            let q = parse_poly(&space_poly)?;
            let mode = if verdict {
                OutputMode::Verdict
            } else {
                OutputMode::Tape
            };
            let compiled = encode::ptm_compile(&machine, &p, &q, mode)?;
            psta_core::check_derivation(&compiled.derivation).map_err(|e| anyhow!("{e}"))?;
            match emit {
                EmitArg::Term => println!("{}", print_term(compiled.subject())),
                EmitArg::Derivation => {
                    println!("{}", json::derivation_to_json(&compiled.derivation))
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle {
            spec,
            input,
            steps,
            tape,
        } => {
            let machine = json::parse_ptm(&read(&spec)?)?;
            let bits = parse_input_bits(&input)?;
            let out = ptm::ptm_run(&machine, &bits, steps, tape)?;
            let strings: BTreeMap<Vec<bool>, num::BigRational> = out.strings.clone();
            if cli.json {
                println!("{}", json::format_bits_distribution(&strings));
            } else {
                for (bits, p) in &strings {
                    println!("{p}  {}", ptm::bits_to_string(bits));
                }
                println!(
                    "accept mass: {}   reject mass: {}",
                    out.accept_mass(),
                    out.reject_mass()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            spec,
            input,
            time_poly,
            space_poly,
            steps,
            tape,
        } => {
            let machine = json::parse_ptm(&read(&spec)?)?;
            let p = match (&time_poly, steps) {
                (Some(t), _) => parse_poly(t)?,
                (None, Some(s)) => vec![s],
                (None, None) => bail!("pass --time-poly or --steps"),
            };
            let q = match (&space_poly, tape) {
                (Some(t), _) => parse_poly(t)?,
                (None, Some(s)) => vec![s],
                (None, None) => bail!("pass --space-poly or --tape"),
            };
            let compiled = encode::ptm_compile(&machine, &p, &q, OutputMode::Tape)?;
            let mut all_equal = true;
            for raw in &input {
                let bits = parse_input_bits(raw)?;
                let steps = encode::eval_poly(&p, bits.len());
                let tape = encode::eval_poly(&q, bits.len());
                let oracle = ptm::ptm_run(&machine, &bits, steps, tape)?;
                let term = compiled.applied_to(&bits);
                let report = psta_core::evaluate(&term, &Strategy::LeftmostOutermost, default_fuel())?;
                let decoded = encode::decode_string_distribution(&report.distribution)?;
                let equal = decoded == oracle.strings;
                all_equal &= equal;
                if cli.json {
                    println!(
                        "{}",
                        serde_json::json!({ "input": raw, "equal": equal })
                    );
                } else {
                    println!("input {raw}: {}", if equal { "equal" } else { "MISMATCH" });
                    if !equal {
                        println!("  oracle:   {}", json::format_bits_distribution(&oracle.strings));
                        println!("  compiled: {}", json::format_bits_distribution(&decoded));
                    }
                }
            }
            Ok(if all_equal {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn trace_reduce(
    d: &psta_core::Derivation,
    r: u64,
    indent: usize,
    lines: &mut Vec<String>,
) -> Result<()> {
    let pad = "  ".repeat(indent);
    let w = weight(d, r);
    lines.push(format!(
        "{pad}w(D,{r}) = {w}, d = {}, |M| = {}: {}",
        depth(d),
        d.conclusion.subject.size(),
        print_term(&d.conclusion.subject)
    ));
    let sites = psta_core::find_redexes(&d.conclusion.subject);
    let Some(site) = sites.first() else {
        lines.push(format!("{pad}surface normal form"));
        return Ok(());
    };
    let (d1, d2) = transform::subject_reduce(d, site, r).map_err(|e| anyhow!("{e}"))?;
    if site.kind == RedexKind::Proj {
        lines.push(format!("{pad}proj splits:"));
        trace_reduce(&d1, r, indent + 1, lines)?;
        trace_reduce(&d2, r, indent + 1, lines)?;
    } else {
        trace_reduce(&d1, r, indent, lines)?;
    }
    Ok(())
}
