fn main() {
    std::process::exit(bsq_lab::cli::main_with_args(std::env::args_os()));
}
