fn main() {
    std::process::exit(cubic_core::cli::run());
}
