fn main() {
    std::process::exit(linkloop::cli::run());
}
