fn main() {
    std::process::exit(vesselwave::cli::run(std::env::args_os()));
}
