fn main() {
    std::process::exit(asep_core::cli::run(std::env::args_os()));
}
