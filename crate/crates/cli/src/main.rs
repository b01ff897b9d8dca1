fn main() {
    std::process::exit(facesym_cli::run(std::env::args_os()));
}
