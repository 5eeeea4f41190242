fn main() {
    let code = patchfinder::cli::run(std::env::args_os());
    std::process::exit(code);
}
