fn main() {
    std::process::exit(glide_core::cli::main_with_args(std::env::args_os()));
}
