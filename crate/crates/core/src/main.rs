fn main() {
    std::process::exit(locscale::cli::run_from(std::env::args_os()));
}
