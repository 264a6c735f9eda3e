fn main() {
    eprintln!("CLI wiring pending");
    std::process::exit(2);
}
