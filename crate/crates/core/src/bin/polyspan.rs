fn main() {
    std::process::exit(polyspan::cli::main_with_args(std::env::args_os()));
}
