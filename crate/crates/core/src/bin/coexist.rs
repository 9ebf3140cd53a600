fn main() {
    std::process::exit(coexistence::cli::cli_main(std::env::args_os()));
}
