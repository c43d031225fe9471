fn main() {
    let (code, out) = kacward::cli::run(std::env::args_os());
    print!("{out}");
    std::process::exit(code);
}
