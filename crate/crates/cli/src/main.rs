//! `boxtrace`: run, replay and check Byrd-box traces of pure Prolog programs.
//!
//! Exit codes: 0 success, 1 error (bad input, engine failure, failed check),
//! 2 the run stopped at `--max-steps` before halting.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use boxtrace_core::term::TermPrinter;
use boxtrace_core::{
    check_adequacy, compare_models, format_trace, parse_program, parse_term, parse_trace,
    reconstruct_trace, run_actual_trace, run_model, ModelId, Outcome, Program, ReconstructError,
    RestrictedState, Term,
};
use clap::{Args, Parser, Subcommand};

const EXIT_ERROR: u8 = 1;
const EXIT_FUEL: u8 = 2;

#[derive(Parser)]
#[command(
    name = "boxtrace",
    version,
    about = "Byrd-box tracer and trace checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the trace of a program's goal.
    Trace {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "m1")]
        model: ModelId,
    },
    /// Rebuild the restricted states from a trace file.
    Reconstruct {
        #[arg(long)]
        trace: PathBuf,
        /// Initial goal; defaults to the goal of `--program`.
        #[arg(long, required_unless_present = "program")]
        goal: Option<String>,
        #[arg(long)]
        program: Option<PathBuf>,
        /// Also print the state after the last event; fails when it needs a
        /// successor to decide.
        #[arg(long)]
        final_peek: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check that reconstruction from the trace matches the engine's states.
    Verify {
        #[arg(long, required_unless_present = "corpus", conflicts_with = "corpus")]
        program: Option<PathBuf>,
        /// Check every `.pl` file in a directory.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Trace lengths of the three models and whether their ports nest.
    Compare {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn load_program(path: &Path) -> Result<Program> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&src).with_context(|| format!("{}", path.display()))
}

fn emit(output: Option<&Path>, lines: &[String]) -> Result<()> {
    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout"),
    }
}

fn fuel_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Halted => 0,
        Outcome::FuelExhausted => EXIT_FUEL,
    }
}

fn trace(run: &RunArgs, model: ModelId) -> Result<u8> {
    let p = load_program(&run.program)?;
    let steps = run.max_steps as usize;
    // m1 is the so-core trace; its engine has no silent transitions, so
    // the step bound is also the event bound.
    let (events, outcome) = match model {
        ModelId::M1 => run_actual_trace(&p, steps)?,
        m => {
            let r = run_model(&p, m, steps)?;
            (r.events, r.outcome)
        }
    };
    emit(run.output.as_deref(), &format_trace(&events))?;
    Ok(fuel_code(outcome))
}

fn reconstruct(
    trace: &Path,
    goal: Option<&str>,
    program: Option<&Path>,
    final_peek: bool,
    output: Option<&Path>,
) -> Result<u8> {
    let goal: Term = match (goal, program) {
        (Some(g), _) => parse_term(g).with_context(|| format!("goal `{g}`"))?,
        (None, Some(p)) => load_program(p)?.goal,
        (None, None) => bail!("--goal or --program is required"),
    };
    let text = fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let events = parse_trace(&text).with_context(|| format!("{}", trace.display()))?;
    let rec = match reconstruct_trace(RestrictedState::initial(goal), &events) {
        Ok(r) => r,
        Err(e @ ReconstructError::AmbiguousOrUndecidable { .. }) => {
            bail!("Cond violation: {e}")
        }
        Err(e) => bail!("malformed trace: {e}"),
    };
    let mut printer = TermPrinter::new();
    let mut lines: Vec<String> = rec
        .states
        .iter()
        .enumerate()
        .map(|(t, q)| format!("Q{t} {}", q.render(&mut printer)))
        .collect();
    if final_peek {
        match &rec.final_state {
            Some(q) => lines.push(format!("Q{} {}", events.len(), q.render(&mut printer))),
            None => {
                emit(output, &lines)?;
                bail!("final state is undecidable without a successor event");
            }
        }
    }
    emit(output, &lines)?;
    Ok(0)
}

fn verify(
    program: Option<&Path>,
    corpus: Option<&Path>,
    steps: usize,
    output: Option<&Path>,
) -> Result<u8> {
    let files = match (program, corpus) {
        (Some(p), _) => vec![p.to_path_buf()],
        (None, Some(dir)) => {
            let mut fs: Vec<PathBuf> = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<io::Result<_>>()?;
            fs.retain(|p| p.extension().is_some_and(|x| x == "pl"));
            fs.sort();
            fs
        }
        (None, None) => bail!("--program or --corpus is required"),
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for f in &files {
        let name = f.file_stem().unwrap_or_default().to_string_lossy();
        let line = match load_program(f).and_then(|p| Ok(check_adequacy(&p, steps)?)) {
            Ok(report) => {
                ok &= report.passed();
                report.line(&name)
            }
            Err(e) => {
                ok = false;
                format!("FAIL {name} 0 {e:#}")
            }
        };
        lines.push(line);
    }
    emit(output, &lines)?;
    Ok(if ok { 0 } else { EXIT_ERROR })
}

fn compare(run: &RunArgs) -> Result<u8> {
    let p = load_program(&run.program)?;
    let c = compare_models(&p, run.max_steps as usize)?;
    emit(run.output.as_deref(), &[c.to_string()])?;
    Ok(c.outcomes.into_iter().map(fuel_code).max().unwrap_or(0))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Trace { run, model } => trace(&run, model),
        Command::Reconstruct {
            trace,
            goal,
            program,
            final_peek,
            output,
        } => reconstruct(
            &trace,
            goal.as_deref(),
            program.as_deref(),
            final_peek,
            output.as_deref(),
        ),
        Command::Verify {
            program,
            corpus,
            max_steps,
            output,
        } => verify(
            program.as_deref(),
            corpus.as_deref(),
            max_steps as usize,
            output.as_deref(),
        ),
        Command::Compare { run } => compare(&run),
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1, since clap's default of 2 means fuel exhaustion here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
