fn main() {
    std::process::exit(stabstrings::cli::run(std::env::args_os()));
}
