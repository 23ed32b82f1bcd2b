use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(sgfb_cli::run(std::env::args_os()))
}
