fn main() {
    std::process::exit(fdakit_cli::run(std::env::args_os()));
}
