fn main() {
    std::process::exit(serrin_annulus::cli::run(std::env::args_os()));
}
