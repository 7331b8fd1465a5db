use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qnslab::cli::run(std::env::args_os()))
}
