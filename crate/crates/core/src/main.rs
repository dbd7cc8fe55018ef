use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(wavecorr::cli::main_with_args(std::env::args_os()))
}
