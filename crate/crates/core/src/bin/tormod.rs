fn main() {
    std::process::exit(tormod::cli::main_with(std::env::args().collect()));
}
