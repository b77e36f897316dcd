fn main() {
    std::process::exit(nudging::cli::main_with_args(std::env::args_os()));
}
