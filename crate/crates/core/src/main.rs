fn main() {
    std::process::exit(periodgram::cli::run(std::env::args_os()));
}
