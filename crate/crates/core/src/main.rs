fn main() {
    std::process::exit(cuspkahler::cli::main_with_args(std::env::args_os()));
}
