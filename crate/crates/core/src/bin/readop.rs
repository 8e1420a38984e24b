fn main() {
    std::process::exit(readop::cli::run(std::env::args_os()));
}
