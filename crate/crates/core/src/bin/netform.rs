fn main() {
    std::process::exit(netform::cli::run(std::env::args_os()));
}
