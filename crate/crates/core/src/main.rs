fn main() {
    std::process::exit(simblock::cli::run_cli(std::env::args_os()));
}
