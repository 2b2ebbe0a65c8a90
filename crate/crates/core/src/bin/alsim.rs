fn main() {
    std::process::exit(alsim::cli::main_with_args(std::env::args_os()));
}
