fn main() {
    std::process::exit(sembench::cli::parse_and_dispatch(std::env::args_os()));
}
