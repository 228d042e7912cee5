fn main() {
    std::process::exit(restriction_lab::cli::run());
}
