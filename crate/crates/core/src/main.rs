fn main() {
    std::process::exit(trendcycle::cli::run(std::env::args_os()));
}
