fn main() {
    std::process::exit(rdae_cli::cli_main(std::env::args_os()));
}
