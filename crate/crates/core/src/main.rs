fn main() {
    std::process::exit(percmatch::cli::main_with_args(std::env::args_os()));
}
