fn main() {
    std::process::exit(hashmark::cli::run(std::env::args_os()));
}
