fn main() {
    std::process::exit(morse_sturm::cli::run(std::env::args_os()));
}
