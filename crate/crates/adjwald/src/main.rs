fn main() {
    std::process::exit(adjwald::run(std::env::args_os()));
}
