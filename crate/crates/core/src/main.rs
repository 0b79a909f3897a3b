fn main() {
    std::process::exit(mick_core::cli::cli_main(std::env::args_os()));
}
