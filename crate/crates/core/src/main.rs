fn main() {
    std::process::exit(greenspec::cli::run(std::env::args_os()));
}
