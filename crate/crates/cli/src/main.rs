fn main() {
    std::process::exit(fwl_cli::run(std::env::args_os()));
}
