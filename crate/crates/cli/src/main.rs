fn main() {
    std::process::exit(slice_gauss_cli::run(std::env::args_os()));
}
