fn main() {
    std::process::exit(jpa_cli::run(std::env::args_os()));
}
