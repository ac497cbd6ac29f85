fn main() {
    std::process::exit(askey_lattice::cli::run(std::env::args_os()));
}
