fn main() {
    std::process::exit(dnpower::cli::run(std::env::args_os()));
}
