fn main() {
    std::process::exit(chunkgauge::cli::run());
}
