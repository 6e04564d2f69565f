fn main() {
    std::process::exit(plnc_cli::run(std::env::args_os()));
}
