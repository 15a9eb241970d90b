use std::process::ExitCode;

fn main() -> ExitCode {
    mlsa::cli::main()
}
