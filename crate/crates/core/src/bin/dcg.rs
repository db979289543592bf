fn main() {
    std::process::exit(dcg::cli::main_with_args(std::env::args_os()));
}
