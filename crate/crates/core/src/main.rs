fn main() {
    std::process::exit(kerrpol::cli::run(std::env::args_os()));
}
