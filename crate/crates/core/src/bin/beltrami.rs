fn main() {
    std::process::exit(beltrami::cli::run_from(std::env::args_os()));
}
