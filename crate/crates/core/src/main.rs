fn main() {
    std::process::exit(dnadoc::cli::run(std::env::args_os()));
}
