fn main() {
    std::process::exit(posepaste::cli::run(std::env::args_os()));
}
