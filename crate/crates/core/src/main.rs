fn main() {
    std::process::exit(modavg::cli_runner::main_with_args(std::env::args_os()));
}
