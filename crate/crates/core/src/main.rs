fn main() {
    std::process::exit(logdiv::cli::run(std::env::args_os()));
}
