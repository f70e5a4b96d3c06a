fn main() {
    std::process::exit(bethe_strip_cli::run(std::env::args_os()));
}
