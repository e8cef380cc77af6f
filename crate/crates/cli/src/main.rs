fn main() {
    std::process::exit(tmtc_cli::run(std::env::args_os()));
}
