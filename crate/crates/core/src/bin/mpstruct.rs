fn main() {
    std::process::exit(mpstruct::cli::run(std::env::args_os()));
}
