fn main() {
    std::process::exit(elliptical_ou::cli::run(std::env::args_os()));
}
