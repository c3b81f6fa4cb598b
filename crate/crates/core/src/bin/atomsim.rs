fn main() {
    std::process::exit(atomsim::cli::run(std::env::args_os()));
}
