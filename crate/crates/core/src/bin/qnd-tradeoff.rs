fn main() {
    std::process::exit(qnd_tradeoff::cli::main_with_args(std::env::args_os()));
}
