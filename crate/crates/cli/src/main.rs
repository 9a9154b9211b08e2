use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hubline_cli::run(std::env::args_os()))
}
