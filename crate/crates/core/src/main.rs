fn main() {
    std::process::exit(fluxlat::cli::run(std::env::args_os()));
}
