fn main() {
    std::process::exit(epsense::run(std::env::args()));
}
