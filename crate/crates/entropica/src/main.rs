fn main() {
    std::process::exit(entropica::cli::run(std::env::args_os()));
}
