fn main() {
    std::process::exit(sgasket::cli::main_with_args(std::env::args_os()));
}
