fn main() {
    std::process::exit(zrlab::cli::cli_main(std::env::args_os()));
}
