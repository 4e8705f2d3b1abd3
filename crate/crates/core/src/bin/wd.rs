fn main() {
    std::process::exit(wd_core::cli::run(std::env::args_os()));
}
