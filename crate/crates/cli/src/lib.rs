//! Command-line front end for the `qmacc` audits.
//!
//! Each subcommand builds a [`Report`]; [`execute`] renders it and maps the
//! outcome to an exit code: 0 when every audit passed, 1 when one failed,
//! 2 on an error.

pub mod args;
mod commands;
pub mod report;

use std::io::Write;

use args::{AdviceCmd, AmplifyCmd, Cli, Command, DemerlinCmd, LemmaCmd, RacCmd};
pub use commands::lemma::equality_instance;
use report::{CliError, CliResult, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub seed: u64,
    pub shots: u64,
    pub command: String,
}

pub fn run(cli: &Cli) -> CliResult<Report> {
    let ctx = Ctx { seed: cli.seed, shots: cli.shots, command: cli.command.name().to_string() };
    use commands::{advice, lemma, protocol, rac};
    match &cli.command {
        Command::Lemma(LemmaCmd::GoodAsNew(a)) => lemma::good_as_new(&ctx, a),
        Command::Lemma(LemmaCmd::Union(a)) => lemma::union(&ctx, a),
        Command::Lemma(LemmaCmd::OrBound(a)) => lemma::or_bound(&ctx, a),
        Command::Amplify(AmplifyCmd::Plan(a)) => protocol::plan(&ctx, a),
        Command::Demerlin(DemerlinCmd::Build(a)) => protocol::build(&ctx, a),
        Command::Demerlin(DemerlinCmd::Run(a)) => protocol::run(&ctx, a),
        Command::Rac(RacCmd::Audit(a)) => rac::audit(&ctx, a),
        Command::Rac(RacCmd::Reduce(a)) => rac::reduce(&ctx, a),
        Command::Rac(RacCmd::Fingerprint(a)) => rac::fingerprint(&ctx, a),
        Command::Advice(AdviceCmd::MaFix(a)) => advice::ma_fix(&ctx, a),
        Command::Advice(AdviceCmd::QmaFix(a)) => advice::qma_fix(&ctx, a),
        Command::Advice(AdviceCmd::QcmaTrain(a)) => advice::qcma_train(&ctx, a),
    }
}

fn emit(cli: &Cli, report: &Report) -> CliResult<()> {
    let text = report.render(cli.format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write { path: path.clone(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

/// Runs the parsed command and returns the process exit code. Errors are
/// printed to standard error.
pub fn execute(cli: &Cli) -> i32 {
    if let Some(jobs) = cli.jobs {
        // A second call in the same process finds the pool already built;
        // results never depend on the thread count, so that is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build_global();
    }
    let outcome = run(cli).and_then(|r| emit(cli, &r).map(|_| r.pass));
    if let Err(e) = &outcome {
        eprintln!("qmacc: {e}");
    }
    exit_code(&outcome)
}

/// Exit code for a finished run: `Ok(pass)` or the error that stopped it.
pub fn exit_code(outcome: &CliResult<bool>) -> i32 {
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(_) => EXIT_ERROR,
    }
}
