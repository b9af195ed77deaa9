fn main() {
    std::process::exit(avgsect::cli::main_with_args(std::env::args_os()));
}
