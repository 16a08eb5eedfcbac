fn main() {
    std::process::exit(ridge_trace::cli::run(std::env::args_os()));
}
