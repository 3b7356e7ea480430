fn main() {
    std::process::exit(edsr::cli::run(std::env::args_os()));
}
