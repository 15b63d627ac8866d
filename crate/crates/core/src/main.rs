fn main() {
    std::process::exit(spectral_lab::run_cli());
}
