fn main() {
    std::process::exit(marklab_cli::run(std::env::args_os()));
}
