fn main() {
    std::process::exit(obskit_cli::run(std::env::args_os()));
}
