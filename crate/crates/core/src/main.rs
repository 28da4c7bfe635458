use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qdp_audit::cli::run(std::env::args_os()) as u8)
}
