fn main() {
    std::process::exit(robust_horseshoe::cli::run(std::env::args_os()));
}
