use std::process::ExitCode;

fn main() -> ExitCode {
    apsim_cli::main_with(std::env::args_os())
}
