fn main() {
    std::process::exit(soliton_kit::cli::run(std::env::args_os()));
}
