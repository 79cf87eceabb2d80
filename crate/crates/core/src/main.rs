fn main() {
    std::process::exit(discmean::cli::main_with_args(std::env::args_os()));
}
