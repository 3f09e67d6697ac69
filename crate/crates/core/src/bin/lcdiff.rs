use std::process::ExitCode;

fn main() -> ExitCode {
    lcdiff::cli::run(std::env::args_os())
}
