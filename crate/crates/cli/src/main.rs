fn main() {
    std::process::exit(spoofeval_cli::run(std::env::args_os()));
}
