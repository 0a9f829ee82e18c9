fn main() -> std::process::ExitCode {
    distrivote::cli::main_with_args(std::env::args_os())
}
