fn main() {
    std::process::exit(transferlab_cli::run_main(std::env::args_os()));
}
