fn main() {
    std::process::exit(glkde::cli::run_cli(std::env::args_os()));
}
