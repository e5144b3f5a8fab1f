fn main() {
    std::process::exit(skfluct::cli::run(std::env::args_os()));
}
