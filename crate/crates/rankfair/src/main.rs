fn main() {
    std::process::exit(rankfair::cli::main_with_args(std::env::args_os()));
}
