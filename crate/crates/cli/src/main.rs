fn main() {
    std::process::exit(relkit_cli::run_cli(std::env::args_os()));
}
