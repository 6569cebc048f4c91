fn main() {
    std::process::exit(basdp::frontend::cli_run(std::env::args_os()));
}
