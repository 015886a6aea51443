use std::process::ExitCode;

fn main() -> ExitCode {
    frsz2_cli::main_with_args(std::env::args_os())
}
