use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use hottcheck::cli;

fn main() -> ExitCode {
    let code = catch_unwind(AssertUnwindSafe(|| {
        let stdout = std::io::stdout();
        let stderr = std::io::stderr();
        cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
    }))
    .unwrap_or(cli::EXIT_INTERNAL);
    ExitCode::from(code as u8)
}
