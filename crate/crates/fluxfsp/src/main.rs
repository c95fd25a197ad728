fn main() {
    std::process::exit(fluxfsp::cli::main_from(std::env::args_os()));
}
