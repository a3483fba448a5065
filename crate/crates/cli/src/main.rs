fn main() {
    std::process::exit(yindex_cli::run(std::env::args_os()));
}
