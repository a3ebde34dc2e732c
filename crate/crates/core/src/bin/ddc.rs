fn main() {
    std::process::exit(ddc::cli::cli_main(std::env::args_os()));
}
