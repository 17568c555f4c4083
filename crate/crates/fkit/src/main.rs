use std::process::ExitCode;

fn main() -> ExitCode {
    fkit::cli::run()
}
