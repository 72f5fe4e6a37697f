fn main() {
    std::process::exit(spinqd::cli::main_with_args(std::env::args_os()));
}
