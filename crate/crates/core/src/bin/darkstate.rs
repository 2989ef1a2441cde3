fn main() {
    std::process::exit(darkstate::cli::main_with_args(std::env::args_os()));
}
