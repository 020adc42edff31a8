fn main() {
    std::process::exit(kantorovich::cli::run(std::env::args_os()));
}
