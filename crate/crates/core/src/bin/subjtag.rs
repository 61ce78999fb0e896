fn main() {
    std::process::exit(subjtag::cli::main_with_args(std::env::args_os()));
}
