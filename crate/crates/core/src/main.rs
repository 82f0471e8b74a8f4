use std::io;
use std::process::ExitCode;

use enetacl::audit::SystemClock;
use enetacl::cli::{run, Io};

fn main() -> ExitCode {
    let stdin = io::stdin();
    let code = run(
        std::env::args_os(),
        Io {
            stdin: &mut stdin.lock(),
            stdout: &mut io::stdout().lock(),
            stderr: &mut io::stderr().lock(),
        },
        &SystemClock,
    );
    ExitCode::from(code as u8)
}
