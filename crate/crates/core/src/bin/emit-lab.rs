fn main() {
    std::process::exit(emit_lab::cli::run(std::env::args_os()));
}
