fn main() {
    std::process::exit(critical_decay::cli::run(std::env::args_os()));
}
