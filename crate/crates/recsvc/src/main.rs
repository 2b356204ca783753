fn main() {
    std::process::exit(nextview_recsvc::cli::main_with(std::env::args_os()));
}
