fn main() {
    std::process::exit(hamilton_green::cli::run(std::env::args_os()));
}
