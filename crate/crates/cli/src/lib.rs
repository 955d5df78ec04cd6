//! Command-line front end: argument definitions, commands and output
//! documents. Exit codes: 0 success, 1 certificate rejected, 2 invalid
//! input, 3 numeric failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use args::{Cli, Command};
pub use error::Failure;

/// Runs one parsed invocation and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let exec = || {
        let (outcome, out) = match &cli.command {
            Command::Solve(a) => (commands::solve(a), a.out.as_deref()),
            Command::Certify(a) => (commands::certify_file(a), a.out.as_deref()),
            Command::Bound(a) => (commands::bound_cmd(a), None),
            Command::Sweep(a) => (commands::sweep(a), a.out.as_deref()),
            Command::Oracle(a) => (commands::oracle(a), a.out.as_deref()),
        };
        outcome.and_then(|o| commands::write_document(&o.document, out).map(|_| o.code))
    };
    let result = match cli.workers {
        Some(0) => Err(Failure::Invalid("--workers must be >= 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Failure::Numeric(e.to_string()))
            .and_then(|pool| pool.install(exec)),
        None => exec(),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("dziobek: {f}");
            f.exit_code()
        }
    }
}
