fn main() {
    std::process::exit(nr_threat::cli::main_with_args(std::env::args_os()));
}
