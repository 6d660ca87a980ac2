fn main() {
    std::process::exit(simid::cli::main_with_args(std::env::args_os()));
}
