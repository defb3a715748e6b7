fn main() {
    std::process::exit(circle_response::cli::run_from_args(std::env::args_os()));
}
