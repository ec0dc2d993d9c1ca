fn main() {
    std::process::exit(bdagar::cli::run(std::env::args_os()));
}
