use std::process::ExitCode;

fn main() -> ExitCode {
    flowhks_service::cli::main(std::env::args_os())
}
