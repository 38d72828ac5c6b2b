fn main() {
    eprintln!("secid: not yet wired up");
    std::process::exit(1);
}
