fn main() {
    std::process::exit(voterpath::cli::run(std::env::args_os()));
}
