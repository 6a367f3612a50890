fn main() {
    std::process::exit(nqs::cli::run(std::env::args_os()));
}
