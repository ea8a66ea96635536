fn main() {
    std::process::exit(edgecurves::cli::run(std::env::args_os()));
}
