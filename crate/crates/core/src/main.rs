fn main() {
    let code = hge::cli::run(std::env::args_os());
    std::process::exit(code);
}
