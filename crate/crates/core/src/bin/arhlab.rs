fn main() {
    std::process::exit(arhlab::harness::cli_main(std::env::args_os()));
}
