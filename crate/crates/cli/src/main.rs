fn main() {
    std::process::exit(hokdv::run(std::env::args_os()));
}
