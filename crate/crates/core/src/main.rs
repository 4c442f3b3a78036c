fn main() {
    std::process::exit(covbounds::cli::main_with_args(std::env::args_os()));
}
