use std::io::{stderr, stdout};
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = ic_capacity_cli::run(std::env::args_os(), &mut stdout(), &mut stderr());
    ExitCode::from(code as u8)
}
