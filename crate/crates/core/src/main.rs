fn main() {
    std::process::exit(simplex_gauntlet::cli::run(std::env::args_os()));
}
