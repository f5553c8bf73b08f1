fn main() {
    std::process::exit(fips::cli::run());
}
