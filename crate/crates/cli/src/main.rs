fn main() {
    std::process::exit(scaling_lab_cli::run(std::env::args_os()));
}
