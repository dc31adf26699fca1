fn main() {
    std::process::exit(deslok::cli::run(std::env::args_os()));
}
