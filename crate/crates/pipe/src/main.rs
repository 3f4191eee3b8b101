fn main() {
    std::process::exit(tactile_pipe::cli::run());
}
