fn main() {
    std::process::exit(modckt::cli::run(std::env::args_os()));
}
