fn main() {
    std::process::exit(dsm_core::cli::run(std::env::args_os()));
}
