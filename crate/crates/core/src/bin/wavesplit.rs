use std::process::ExitCode;

fn main() -> ExitCode {
    wavesplit::cli::main()
}
