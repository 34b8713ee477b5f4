fn main() {
    std::process::exit(qbound::cli::run(std::env::args_os()));
}
