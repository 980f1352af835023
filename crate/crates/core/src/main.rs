fn main() {
    std::process::exit(sharc::cli::run(std::env::args_os()));
}
