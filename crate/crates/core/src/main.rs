fn main() {
    std::process::exit(discrete_wigner::cli::run(std::env::args_os()));
}
