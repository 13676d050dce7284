fn main() {
    std::process::exit(linkbench::harness::cli::main_with_args(std::env::args_os()));
}
