use std::process::ExitCode;

fn main() -> ExitCode {
    swarm_alloc::cli::main_with_args(std::env::args_os())
}
