fn main() {
    std::process::exit(ehglue::cli::run(std::env::args_os()));
}
