fn main() -> std::process::ExitCode {
    emhd::harness::cli::main_with_args(std::env::args_os())
}
