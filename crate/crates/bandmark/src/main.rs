fn main() {
    std::process::exit(bandmark::cli::run(std::env::args().collect()));
}
