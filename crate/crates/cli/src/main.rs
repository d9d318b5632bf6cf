fn main() {
    std::process::exit(fliplab_cli::main_with_args(std::env::args_os()));
}
